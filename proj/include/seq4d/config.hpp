// Central serializable configuration. Text format: one `section.key=value`
// per line, `#` comments, missing keys keep their defaults.
#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>

#include "seq4d/cluster.hpp"
#include "seq4d/ground.hpp"
#include "seq4d/loss.hpp"
#include "seq4d/metrics.hpp"
#include "seq4d/sampling.hpp"
#include "seq4d/synth.hpp"

namespace seq4d {

struct MetricsConfig {
  int min_points = 50;
  metrics::FilterMode filter_mode = metrics::FilterMode::kPerScanSlice;
};

struct PipelineConfig {
  ground::GroundConfig ground;
  cluster::ClusterConfig cluster;
  synth::SynthConfig synth;
  sampling::SamplingConfig sampling;
  loss::LossWeights loss;
  MetricsConfig metrics;

  // Checks every field against its module preconditions; the error names the
  // offending key and the violated constraint.
  void validate() const;
};

PipelineConfig default_config();

// Parses a config file over the defaults. An empty path yields the defaults.
PipelineConfig load_config(const std::filesystem::path& path);

// Applies one `key=value` override (the --set flag).
void apply_override(PipelineConfig& config, const std::string& assignment);

// Canonical dump; load_config(dump) reproduces the config exactly.
std::string dump_config(const PipelineConfig& config);

// Dump with a provenance comment per line: default, file, or override.
std::string dump_effective_config(
    const PipelineConfig& config,
    const std::map<std::string, std::string>& provenance);

struct LoadedConfig {
  PipelineConfig config;
  std::map<std::string, std::string> provenance;  // key -> default|file|override
};

// load + overrides + validate, tracking where each value came from.
LoadedConfig load_config_tracked(const std::filesystem::path& path,
                                 std::span<const std::string> overrides);

}  // namespace seq4d
