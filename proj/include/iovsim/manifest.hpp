#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace iovsim {

/// Reproducibility record written next to every command's outputs.
/// Honors SOURCE_DATE_EPOCH for the timestamp so reruns can be
/// byte-compared.
struct RunManifest {
    std::string command;
    std::string config_path;
    uint64_t seed = 0;
    std::map<std::string, std::string> inputs;
    std::map<std::string, std::string> outputs;
    std::map<std::string, std::string> parameters;
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir);

}  // namespace iovsim
