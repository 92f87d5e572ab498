#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pnmf::io {

/// Execution record written next to every command's outputs. Inputs and
/// outputs carry FNV-1a 64 content digests so a run can be audited and
/// replayed; wall-clock is informational and excluded from replay comparison.
struct RunManifest {
    std::string tool;                 ///< "pnmf <version>"
    std::string command;
    std::string timestamp_utc;        ///< ISO 8601
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::map<std::string, std::string> parameters;   ///< resolved flag values

    struct FileRecord {
        std::string path;             ///< as referenced by the command
        std::string digest;           ///< fnv1a64 hex of the byte content
        std::uint64_t bytes = 0;
    };
    std::vector<FileRecord> inputs;
    std::vector<FileRecord> outputs;  ///< paths relative to the run directory
};

std::string fnv1a64_hex(const std::filesystem::path& file);

RunManifest::FileRecord record_file(const std::filesystem::path& file,
                                    const std::string& recorded_path);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

} // namespace pnmf::io
