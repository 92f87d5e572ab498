#include "pnmf/manifest.hpp"

#include "pnmf/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>

namespace pnmf::io {

std::string fnv1a64_hex(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + file.string());

    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }

    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

RunManifest::FileRecord record_file(const std::filesystem::path& file,
                                    const std::string& recorded_path) {
    RunManifest::FileRecord rec;
    rec.path = recorded_path;
    rec.digest = fnv1a64_hex(file);
    std::error_code ec;
    const auto size = std::filesystem::file_size(file, ec);
    if (ec)
        throw IoError("cannot stat " + file.string() + ": " + ec.message());
    rec.bytes = size;
    return rec;
}

namespace {

nlohmann::ordered_json files_to_json(const std::vector<RunManifest::FileRecord>& files) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& f : files)
        arr.push_back({{"path", f.path}, {"digest", f.digest}, {"bytes", f.bytes}});
    return arr;
}

std::vector<RunManifest::FileRecord> files_from_json(const nlohmann::ordered_json& arr) {
    std::vector<RunManifest::FileRecord> files;
    for (const auto& f : arr) {
        RunManifest::FileRecord rec;
        rec.path = f.at("path").get<std::string>();
        rec.digest = f.at("digest").get<std::string>();
        rec.bytes = f.at("bytes").get<std::uint64_t>();
        files.push_back(std::move(rec));
    }
    return files;
}

} // namespace

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    nlohmann::ordered_json doc;
    doc["tool"] = manifest.tool;
    doc["command"] = manifest.command;
    doc["timestamp_utc"] = manifest.timestamp_utc;
    doc["seed"] = manifest.seed;
    doc["threads"] = manifest.threads;
    doc["parameters"] = manifest.parameters;
    doc["inputs"] = files_to_json(manifest.inputs);
    doc["outputs"] = files_to_json(manifest.outputs);

    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    out.flush();
    if (!out)
        throw IoError("write failed: " + path.string());
}

RunManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    nlohmann::ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }

    try {
        RunManifest manifest;
        manifest.tool = doc.at("tool").get<std::string>();
        manifest.command = doc.at("command").get<std::string>();
        manifest.timestamp_utc = doc.at("timestamp_utc").get<std::string>();
        manifest.seed = doc.at("seed").get<std::uint64_t>();
        manifest.threads = doc.at("threads").get<std::size_t>();
        manifest.parameters = doc.at("parameters").get<std::map<std::string, std::string>>();
        manifest.inputs = files_from_json(doc.at("inputs"));
        manifest.outputs = files_from_json(doc.at("outputs"));
        return manifest;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

} // namespace pnmf::io
