#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "json.hpp"

namespace marsupial::cli {

/// Collects a command's files in a staging directory next to the output
/// directory and moves them in only on commit, followed by the manifest.
/// Dropping an uncommitted RunOutput deletes the staging directory, so an
/// aborted command leaves the output directory untouched.
class RunOutput {
 public:
  RunOutput(std::filesystem::path out_dir, std::string command);
  ~RunOutput();
  RunOutput(const RunOutput&) = delete;
  RunOutput& operator=(const RunOutput&) = delete;

  /// Staging path for an output file; records it in the inventory.
  std::filesystem::path file(const std::string& name);

  void record_stage(const std::string& stage, double seconds);

  /// Runs `f` and records its wall time under `stage`.
  template <typename F>
  decltype(auto) timed(const std::string& stage, F&& f);

  /// Moves the staged files into the output directory and writes
  /// manifest.json. `info` adds the config hash, seed and overrides.
  void commit(const nlohmann::ordered_json& info, int exit_code);

 private:
  std::filesystem::path out_dir_;
  std::filesystem::path staging_;
  std::string command_;
  std::vector<std::string> files_;
  std::vector<std::pair<std::string, double>> stages_;
  bool committed_ = false;
};

double seconds_since(std::chrono::steady_clock::time_point start);

template <typename F>
decltype(auto) RunOutput::timed(const std::string& stage, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  if constexpr (std::is_void_v<decltype(f())>) {
    f();
    record_stage(stage, seconds_since(start));
  } else {
    auto result = f();
    record_stage(stage, seconds_since(start));
    return result;
  }
}

}  // namespace marsupial::cli
