#include "diffcert/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "diffcert/errors.hpp"
#include "diffcert/numerics.hpp"

namespace diffcert::io {

std::uint64_t write_file(const std::string& path, const std::string& bytes) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open for writing: " + path);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("write failed: " + path);
    return num::fnv1a64(bytes);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void RunManifest::add_output(const std::string& path, std::uint64_t checksum,
                             std::uint64_t bytes) {
    outputs.push_back({path, checksum, bytes});
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["model_checksum"] = model_checksum;
    j["seed"] = seed;
    if (!config_echo_json.empty())
        j["config"] = nlohmann::json::parse(config_echo_json);
    nlohmann::json files = nlohmann::json::array();
    for (const auto& o : outputs)
        files.push_back({{"path", o.path}, {"checksum", o.checksum}, {"bytes", o.bytes}});
    j["outputs"] = files;
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& [name, sec] : stage_seconds)
        stages.push_back({{"stage", name}, {"seconds", sec}});
    j["stages"] = stages;
    return j.dump(2);
}

void emit(RunManifest& man, const std::string& dir, const std::string& name,
          const std::string& bytes) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    const std::uint64_t sum = write_file(path, bytes);
    man.add_output(name, sum, bytes.size());
}

} // namespace diffcert::io
