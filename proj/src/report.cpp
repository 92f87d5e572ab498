#include "pnmf/report.hpp"

#include "pnmf/errors.hpp"

#include <json.hpp>

#include <cstdio>

namespace pnmf::io {

namespace {

std::string render_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

Report::Block& Report::current() {
    if (blocks_.empty())
        throw ValidationError("report: add() before begin_block()");
    return blocks_.back();
}

void Report::begin_block(const std::string& name) { blocks_.push_back({name, {}}); }

void Report::add(const std::string& key, const std::string& value) {
    current().entries.push_back({key, value, Kind::text, 0.0, false});
}

void Report::add(const std::string& key, const char* value) { add(key, std::string(value)); }

void Report::add(const std::string& key, double value) {
    current().entries.push_back({key, render_number(value), Kind::number, value, false});
}

void Report::add(const std::string& key, std::size_t value) {
    add(key, static_cast<double>(value));
}

void Report::add(const std::string& key, bool value) {
    current().entries.push_back(
        {key, value ? "true" : "false", Kind::boolean, 0.0, value});
}

std::string Report::to_text() const {
    std::string out;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (b > 0) out += '\n';
        out += "block=" + blocks_[b].name + '\n';
        for (const auto& e : blocks_[b].entries) out += e.key + '=' + e.rendered + '\n';
    }
    return out;
}

std::string Report::to_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& block : blocks_) {
        nlohmann::ordered_json obj;
        obj["block"] = block.name;
        for (const auto& e : block.entries) {
            switch (e.kind) {
                case Kind::text: obj[e.key] = e.rendered; break;
                case Kind::number: obj[e.key] = e.number; break;
                case Kind::boolean: obj[e.key] = e.flag; break;
            }
        }
        arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
}

} // namespace pnmf::io
