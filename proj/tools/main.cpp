// seq4d command line: pseudo-label generation, object database extraction,
// sequence synthesis, pair sampling, evaluation, loss conformance checks and
// toy fixture generation.
#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "seq4d/commands.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  bool force = false;
};

seq4d::cmd::CommandContext make_context(const GlobalArgs& args) {
  std::vector<std::string> overrides = args.overrides;
  if (args.seed_given) {
    // One seed drives every seeded stage.
    overrides.push_back("ground.seed=" + std::to_string(args.seed));
    overrides.push_back("synth.seed=" + std::to_string(args.seed));
    overrides.push_back("sampling.seed=" + std::to_string(args.seed));
  }
  const seq4d::LoadedConfig loaded =
      seq4d::load_config_tracked(args.config_path, overrides);
  seq4d::cmd::CommandContext ctx;
  ctx.config = loaded.config;
  ctx.provenance = loaded.provenance;
  ctx.threads = args.threads;
  ctx.force = args.force;
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seq4d - point cloud sequence toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs globals;
  app.add_option("--config", globals.config_path, "config file (key=value)");
  app.add_option("--set", globals.overrides, "override, e.g. --set synth.n_s=300");
  app.add_option("--seed", globals.seed, "seed for all seeded stages")
      ->each([&globals](const std::string&) { globals.seed_given = true; });
  app.add_option("--threads", globals.threads, "worker threads")
      ->check(CLI::PositiveNumber);
  app.add_flag("--force", globals.force, "overwrite non-empty output dirs");

  auto* gen = app.add_subcommand("gen-fixture", "generate a toy scene");
  std::string gen_out;
  int gen_scans = 10;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--scans", gen_scans, "number of scans");

  auto* pl = app.add_subcommand("pseudo-label",
                                "spatio-temporal clustering pseudo-labels");
  std::string pl_scans, pl_poses, pl_out, pl_masks;
  pl->add_option("--scans", pl_scans, "scan directory")->required();
  pl->add_option("--poses", pl_poses, "pose file (identity if omitted)");
  pl->add_option("--out", pl_out, "output directory")->required();
  pl->add_option("--ground-masks", pl_masks,
                 "directory of external <stem>.mask files (skips RANSAC)");

  auto* ex = app.add_subcommand("extract-db", "build the object database");
  std::string ex_scans, ex_poses, ex_labels, ex_db;
  ex->add_option("--scans", ex_scans, "scan directory")->required();
  ex->add_option("--poses", ex_poses, "pose file (identity if omitted)");
  ex->add_option("--labels", ex_labels, "label directory")->required();
  ex->add_option("--db", ex_db, "database output directory")->required();

  auto* sy = app.add_subcommand("synth", "synthesize an augmented sequence");
  std::string sy_scans, sy_poses, sy_labels, sy_db, sy_out, sy_masks;
  int sy_ns = -1;
  double sy_res = -1.0;
  std::string sy_collide;
  sy->add_option("--scans", sy_scans, "scan directory")->required();
  sy->add_option("--poses", sy_poses, "pose file (identity if omitted)");
  sy->add_option("--labels", sy_labels, "label directory")->required();
  sy->add_option("--db", sy_db, "object database directory")->required();
  sy->add_option("--out", sy_out, "output directory")->required();
  sy->add_option("--ns", sy_ns, "placement attempts (synth.n_s)");
  sy->add_option("--res", sy_res, "ValidMap resolution (synth.validmap_res)");
  sy->add_option("--collide-existing", sy_collide,
                 "also collide against labeled real objects (true/false)");
  sy->add_option("--ground-masks", sy_masks,
                 "directory of external <stem>.mask files (skips RANSAC)");

  auto* sp = app.add_subcommand("sample-pairs", "emit a training pair manifest");
  int sp_len = 0, sp_pairs = 0;
  std::string sp_out;
  sp->add_option("--seq-len", sp_len, "sequence length")->required();
  sp->add_option("--pairs", sp_pairs, "number of draws")->required();
  sp->add_option("--out", sp_out, "output file (stdout if omitted)");
  bool sp_dup = false;
  sp->add_flag("--rto-duplicate", sp_dup, "emit both orders of every pair");

  auto* ev = app.add_subcommand("eval", "4D association metrics");
  std::string ev_gt, ev_pred, ev_scans, ev_out;
  ev->add_option("--gt", ev_gt, "ground-truth label directory")->required();
  ev->add_option("--pred", ev_pred, "predicted label directory")->required();
  ev->add_option("--scans", ev_scans, "scan directory")->required();
  ev->add_option("--out", ev_out, "key=value report file");

  auto* lc = app.add_subcommand("loss-check",
                                "loss kernel conformance for trainers");
  seq4d::cmd::LossCheckInputs lc_in;
  std::string lc_out;
  lc->add_option("--s-t", lc_in.s_t, "similarity matrix at t")->required();
  lc->add_option("--m-t", lc_in.m_t, "assignment matrix at t")->required();
  lc->add_option("--raw-t", lc_in.raw_t, "raw score matrix at t");
  lc->add_option("--s-tk", lc_in.s_tk, "similarity matrix at t+k");
  lc->add_option("--m-tk", lc_in.m_tk, "assignment matrix at t+k");
  lc->add_option("--raw-tk", lc_in.raw_tk, "raw score matrix at t+k");
  lc->add_option("--centroids-t", lc_in.centroids_t, "n_o x 3 centroids at t");
  lc->add_option("--centroids-tk", lc_in.centroids_tk,
                 "n_o x 3 centroids at t+k");
  lc->add_option("--out", lc_out, "also write the report to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    seq4d::cmd::CommandContext ctx = make_context(globals);
    if (gen->parsed()) {
      return seq4d::cmd::run_gen_fixture(gen_out, gen_scans, globals.seed, ctx);
    }
    if (pl->parsed()) {
      return seq4d::cmd::run_pseudo_label(pl_scans, pl_poses, pl_out, ctx,
                                          pl_masks);
    }
    if (ex->parsed()) {
      return seq4d::cmd::run_extract_db(ex_scans, ex_poses, ex_labels, ex_db,
                                        ctx);
    }
    if (sy->parsed()) {
      if (sy_ns >= 0) {
        seq4d::apply_override(ctx.config, "synth.n_s=" + std::to_string(sy_ns));
        ctx.provenance["synth.n_s"] = "override";
      }
      if (sy_res > 0) {
        seq4d::apply_override(ctx.config,
                              "synth.validmap_res=" + std::to_string(sy_res));
        ctx.provenance["synth.validmap_res"] = "override";
      }
      if (!sy_collide.empty()) {
        seq4d::apply_override(ctx.config, "synth.collide_existing=" + sy_collide);
        ctx.provenance["synth.collide_existing"] = "override";
      }
      ctx.config.validate();
      return seq4d::cmd::run_synth(sy_scans, sy_poses, sy_labels, sy_db, sy_out,
                                   ctx, sy_masks);
    }
    if (sp->parsed()) {
      if (sp_dup) {
        seq4d::apply_override(ctx.config, "sampling.rto_duplicate=true");
        ctx.provenance["sampling.rto_duplicate"] = "override";
      }
      return seq4d::cmd::run_sample_pairs(sp_len, sp_pairs, sp_out, ctx);
    }
    if (ev->parsed()) {
      return seq4d::cmd::run_eval(ev_gt, ev_pred, ev_scans, ev_out, ctx);
    }
    if (lc->parsed()) {
      return seq4d::cmd::run_loss_check(lc_in, lc_out, ctx);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
