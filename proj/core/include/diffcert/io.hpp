#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace diffcert::io {

/// Writes bytes to path (parent directories created), returns the FNV-1a
/// checksum of what was written.
std::uint64_t write_file(const std::string& path, const std::string& bytes);

std::string read_file(const std::string& path);

/// Reproducibility manifest for a run directory: config echo, seeds and the
/// checksum of every emitted file.
struct RunManifest {
    std::string tool_version;
    std::string command;
    std::uint64_t model_checksum = 0;
    std::string config_echo_json; // merged configuration as a JSON object
    std::uint64_t seed = 0;
    struct OutputFile {
        std::string path;
        std::uint64_t checksum = 0;
        std::uint64_t bytes = 0;
    };
    std::vector<OutputFile> outputs;
    std::vector<std::pair<std::string, double>> stage_seconds;

    void add_output(const std::string& path, std::uint64_t checksum, std::uint64_t bytes);
    std::string to_json() const;
};

/// Writes `bytes` under dir/name and records it in the manifest.
void emit(RunManifest& man, const std::string& dir, const std::string& name,
          const std::string& bytes);

} // namespace diffcert::io
