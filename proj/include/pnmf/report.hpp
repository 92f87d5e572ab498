#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace pnmf::io {

/// Flat key=value report: blocks of lines separated by blank lines, or the
/// same content as one JSON document. Keys keep insertion order.
class Report {
public:
    void begin_block(const std::string& name);
    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, const char* value);
    void add(const std::string& key, double value);        ///< rendered %.17g
    void add(const std::string& key, std::size_t value);
    void add(const std::string& key, bool value);          ///< true/false

    std::string to_text() const;
    std::string to_json() const;   ///< array of one object per block

private:
    enum class Kind { text, number, boolean };
    struct Entry {
        std::string key;
        std::string rendered;
        Kind kind = Kind::text;
        double number = 0.0;
        bool flag = false;
    };
    struct Block {
        std::string name;
        std::vector<Entry> entries;
    };
    Block& current();
    std::vector<Block> blocks_;
};

} // namespace pnmf::io
