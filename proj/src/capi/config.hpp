#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cogniprof/harness.hpp"
#include "cogniprof/synthetic.hpp"

namespace cogniprof::capi {

struct Settings {
  harness::PipelineConfig pipeline;
  synthetic::SyntheticSpec synth;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::filesystem::path data_dir;
  std::optional<std::filesystem::path> lexicons;
  std::optional<std::filesystem::path> slang;

  Settings();

  void set(std::string_view key, std::string_view value);
  void load(const std::filesystem::path& path);
  void apply_env();

  harness::PipelineConfig resolved() const;
  harness::Resources resources() const;
};

const std::vector<std::string>& setting_keys();

}  // namespace cogniprof::capi
