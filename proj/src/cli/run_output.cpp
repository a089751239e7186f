#include "marsupial/cli/run_output.hpp"

#include <system_error>

#include <fmt/format.h>

#include "marsupial/cli/commands.hpp"
#include "marsupial/cli/sha256.hpp"
#include "marsupial/common/error.hpp"
#include "marsupial/common/io.hpp"

namespace marsupial::cli {

namespace fs = std::filesystem;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

RunOutput::RunOutput(fs::path out_dir, std::string command)
    : out_dir_(std::move(out_dir)), command_(std::move(command)) {
  if (out_dir_.empty()) throw IoError("output directory is empty");
  const fs::path abs = fs::absolute(out_dir_).lexically_normal();
  const std::string leaf = abs.has_filename() ? abs.filename().string() : abs.parent_path().filename().string();
  const fs::path parent = abs.has_filename() ? abs.parent_path() : abs.parent_path().parent_path();
  staging_ = parent / fmt::format(".{}.staging", leaf);
  std::error_code ec;
  fs::remove_all(staging_, ec);
  fs::create_directories(staging_, ec);
  if (ec) throw IoError(fmt::format("cannot create staging directory {}: {}", staging_.string(), ec.message()));
}

RunOutput::~RunOutput() {
  std::error_code ec;
  fs::remove_all(staging_, ec);
}

fs::path RunOutput::file(const std::string& name) {
  files_.push_back(name);
  return staging_ / name;
}

void RunOutput::record_stage(const std::string& stage, double seconds) { stages_.emplace_back(stage, seconds); }

void RunOutput::commit(const nlohmann::ordered_json& info, int exit_code) {
  if (committed_) throw Error("run output already committed");
  std::error_code ec;
  fs::create_directories(out_dir_, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", out_dir_.string(), ec.message()));

  nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
  for (const auto& name : files_) {
    const fs::path src = staging_ / name;
    if (!fs::exists(src)) throw IoError(fmt::format("output {} was never written", name));
    const std::string digest = sha256_file(src);
    const auto bytes = fs::file_size(src);
    fs::rename(src, out_dir_ / name, ec);
    if (ec) throw IoError(fmt::format("cannot move {} into {}: {}", name, out_dir_.string(), ec.message()));
    outputs.push_back({{"file", name}, {"bytes", bytes}, {"sha256", digest}});
  }

  nlohmann::ordered_json manifest = {{"tool", "marsupial-nav"}, {"version", tool_version()}, {"command", command_}};
  for (const auto& [key, value] : info.items()) manifest[key] = value;
  manifest["exit_code"] = exit_code;
  manifest["outputs"] = outputs;
  nlohmann::ordered_json times = nlohmann::ordered_json::object();
  for (const auto& [stage, seconds] : stages_) times[stage] = seconds;
  manifest["stage_wall_time_s"] = times;
  write_text(out_dir_ / "manifest.json", manifest.dump(2) + "\n");
  committed_ = true;
}

}  // namespace marsupial::cli
