#include "iovsim/manifest.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "iovsim/errors.hpp"

namespace iovsim {

namespace {

std::string timestamp_utc() {
    std::time_t t;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir) {
    nlohmann::json j;
    j["format_version"] = "iovsim-manifest-v1";
    j["command"] = manifest.command;
    j["config_path"] = manifest.config_path;
    j["seed"] = manifest.seed;
    j["created_utc"] = timestamp_utc();
    j["inputs"] = manifest.inputs;
    j["outputs"] = manifest.outputs;
    j["parameters"] = manifest.parameters;

    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write " + (out_dir / "manifest.json").string());
    out << j.dump(2) << '\n';
}

}  // namespace iovsim
