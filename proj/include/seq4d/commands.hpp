// Subcommand implementations behind the CLI binary. Each returns a process
// exit code, reports errors on stderr, and removes partially written output
// directories on failure. Progress and timing go to stderr so that files and
// stdout stay byte-identical across reruns with the same seeds.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "seq4d/config.hpp"

namespace seq4d::cmd {

struct CommandContext {
  PipelineConfig config;
  std::map<std::string, std::string> provenance;  // for the summary dump
  int threads = 1;
  bool force = false;  // overwrite existing non-empty output directories
};

int run_gen_fixture(const std::filesystem::path& out_dir, int num_scans,
                    std::uint64_t seed, const CommandContext& ctx);

// mask_dir, when non-empty, supplies external ground masks (<stem>.mask, one
// byte per point) instead of the built-in RANSAC segmenter.
int run_pseudo_label(const std::filesystem::path& scan_dir,
                     const std::filesystem::path& pose_file,
                     const std::filesystem::path& out_dir,
                     const CommandContext& ctx,
                     const std::filesystem::path& mask_dir = {});

int run_extract_db(const std::filesystem::path& scan_dir,
                   const std::filesystem::path& pose_file,
                   const std::filesystem::path& label_dir,
                   const std::filesystem::path& db_dir,
                   const CommandContext& ctx);

int run_synth(const std::filesystem::path& scan_dir,
              const std::filesystem::path& pose_file,
              const std::filesystem::path& label_dir,
              const std::filesystem::path& db_dir,
              const std::filesystem::path& out_dir, const CommandContext& ctx,
              const std::filesystem::path& mask_dir = {});

int run_sample_pairs(int seq_len, int n_pairs,
                     const std::filesystem::path& out_file,
                     const CommandContext& ctx);

int run_eval(const std::filesystem::path& gt_dir,
             const std::filesystem::path& pred_dir,
             const std::filesystem::path& scan_dir,
             const std::filesystem::path& out_file, const CommandContext& ctx);

struct LossCheckInputs {
  std::filesystem::path s_t, m_t, raw_t;
  std::filesystem::path s_tk, m_tk, raw_tk;  // empty => single-frame mode
  std::filesystem::path centroids_t, centroids_tk;
};

int run_loss_check(const LossCheckInputs& inputs,
                   const std::filesystem::path& out_file,
                   const CommandContext& ctx);

// Placement manifest, one parseable line per record.
void write_placements(std::span<const synth::PlacementRecord> records,
                      const std::filesystem::path& path);
std::vector<synth::PlacementRecord> read_placements(
    const std::filesystem::path& path);

}  // namespace seq4d::cmd
