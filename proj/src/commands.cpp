#include "seq4d/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "seq4d/fixture.hpp"
#include "seq4d/io.hpp"
#include "seq4d/matrix_io.hpp"
#include "seq4d/parallel.hpp"

namespace seq4d::cmd {

namespace {

using Clock = std::chrono::steady_clock;

// Claims an output directory for the duration of a command; removes it again
// if the command does not finish. Pre-existing non-empty directories are
// refused unless force is set (then they are wiped up front).
class OutputDir {
 public:
  OutputDir(const std::filesystem::path& path, bool force) : path_(path) {
    if (std::filesystem::exists(path_)) {
      if (!std::filesystem::is_directory(path_)) {
        throw std::runtime_error(path_.string() + " exists and is not a directory");
      }
      if (!std::filesystem::is_empty(path_)) {
        if (!force) {
          throw std::runtime_error("output directory " + path_.string() +
                                   " is not empty (use --force to overwrite)");
        }
        std::filesystem::remove_all(path_);
      }
    }
    std::filesystem::create_directories(path_);
  }

  ~OutputDir() {
    if (!committed_) {
      std::error_code ec;
      std::filesystem::remove_all(path_, ec);
    }
  }

  void commit() { committed_ = true; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool committed_ = false;
};

int fail(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return 1;
}

void log_elapsed(const char* what, Clock::time_point start) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      Clock::now() - start)
                      .count();
  std::cerr << what << " took " << ms << " ms\n";
}

std::string frame_name(std::size_t index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu%s", index, ext);
  return buf;
}

std::vector<InstanceLabeling> load_labels_for(
    const Sequence& seq, const std::filesystem::path& label_dir) {
  std::vector<InstanceLabeling> labels;
  for (std::size_t s = 0; s < seq.size(); ++s) {
    labels.push_back(io::read_labels(label_dir / frame_name(s, ".label"),
                                     seq.scans[s].points.size()));
  }
  return labels;
}

// External masks when mask_dir is given, built-in RANSAC otherwise.
std::vector<ground::GroundMask> resolve_ground_masks(
    const Sequence& seq, const std::filesystem::path& mask_dir,
    const CommandContext& ctx) {
  if (mask_dir.empty()) {
    return cluster::sequence_ground_masks(seq, ctx.config.ground, ctx.threads);
  }
  std::vector<ground::GroundMask> masks;
  for (std::size_t s = 0; s < seq.size(); ++s) {
    masks.push_back(io::read_ground_mask(mask_dir / frame_name(s, ".mask"),
                                         seq.scans[s].points.size()));
  }
  return masks;
}

}  // namespace

int run_gen_fixture(const std::filesystem::path& out_dir, int num_scans,
                    std::uint64_t seed, const CommandContext& ctx) {
  try {
    OutputDir out(out_dir, ctx.force);
    fixture::FixtureConfig fcfg;
    fcfg.num_scans = num_scans;
    fcfg.seed = seed;
    fixture::write(fixture::generate(fcfg), out.path());
    out.commit();
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int run_pseudo_label(const std::filesystem::path& scan_dir,
                     const std::filesystem::path& pose_file,
                     const std::filesystem::path& out_dir,
                     const CommandContext& ctx,
                     const std::filesystem::path& mask_dir) {
  try {
    const auto start = Clock::now();
    OutputDir out(out_dir, ctx.force);
    const Sequence seq = io::load_sequence(scan_dir, pose_file);
    const auto masks = resolve_ground_masks(seq, mask_dir, ctx);
    const auto windows = cluster::pseudo_label_sequence(
        seq, ctx.config.cluster, masks, ctx.threads);

    // Window-local IDs are shifted by a running base so files carry globally
    // distinct instances; no cross-window identity is implied.
    std::vector<InstanceLabeling> labels(seq.size());
    for (std::size_t s = 0; s < seq.size(); ++s) {
      labels[s].assign(seq.scans[s].points.size(), 0);
    }
    std::uint32_t base = 0;
    std::ostringstream window_lines;
    for (std::size_t w = 0; w < windows.size(); ++w) {
      const auto& win = windows[w];
      for (std::size_t f = 0; f < win.labels.size(); ++f) {
        const std::size_t s = win.start_frame + f;
        for (std::size_t i = 0; i < win.labels[f].size(); ++i) {
          const std::uint32_t id = win.labels[f][i];
          labels[s][i] = id == 0 ? 0 : id + base;
        }
      }
      window_lines << "window_" << w << ".start=" << win.start_frame
                   << "\nwindow_" << w << ".len=" << win.labels.size()
                   << "\nwindow_" << w << ".clusters=" << win.cluster_count
                   << "\n";
      base += win.cluster_count;
    }
    for (std::size_t s = 0; s < seq.size(); ++s) {
      io::write_labels(labels[s], out.path() / frame_name(s, ".label"));
    }

    std::ofstream summary(out.path() / "summary.txt", std::ios::trunc);
    summary << "command=pseudo-label\nscans=" << seq.size()
            << "\nwindows=" << windows.size() << "\ntotal_clusters=" << base
            << "\n"
            << window_lines.str() << "--- effective config ---\n"
            << dump_effective_config(ctx.config, ctx.provenance);
    summary.close();

    out.commit();
    log_elapsed("pseudo-label", start);
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int run_extract_db(const std::filesystem::path& scan_dir,
                   const std::filesystem::path& pose_file,
                   const std::filesystem::path& label_dir,
                   const std::filesystem::path& db_dir,
                   const CommandContext& ctx) {
  try {
    const auto start = Clock::now();
    OutputDir out(db_dir, ctx.force);
    const Sequence seq = io::load_sequence(scan_dir, pose_file);
    const auto labels = load_labels_for(seq, label_dir);

    // The whole sequence acts as one window; IDs in the files are already
    // consistent across its scans.
    cluster::WindowPseudoLabels window;
    window.start_frame = 0;
    window.labels = labels;
    for (const auto& scan_labels : labels) {
      for (std::uint32_t id : scan_labels) {
        window.cluster_count = std::max(window.cluster_count, id);
      }
    }
    const auto db = synth::extract_object_db(
        seq, std::span(&window, 1), ctx.config.synth);
    synth::save_object_db(db, out.path());
    out.commit();
    std::cerr << "extracted " << db.size() << " object snippets\n";
    log_elapsed("extract-db", start);
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int run_synth(const std::filesystem::path& scan_dir,
              const std::filesystem::path& pose_file,
              const std::filesystem::path& label_dir,
              const std::filesystem::path& db_dir,
              const std::filesystem::path& out_dir, const CommandContext& ctx,
              const std::filesystem::path& mask_dir) {
  try {
    const auto start = Clock::now();
    OutputDir out(out_dir, ctx.force);
    const Sequence seq = io::load_sequence(scan_dir, pose_file);
    const auto labels = load_labels_for(seq, label_dir);
    const auto db = synth::load_object_db(db_dir);
    const auto masks = resolve_ground_masks(seq, mask_dir, ctx);

    const auto result =
        synth::synth_sequence(seq, labels, db, ctx.config.synth, masks);

    std::filesystem::create_directories(out.path() / "scans");
    std::filesystem::create_directories(out.path() / "labels");
    for (std::size_t s = 0; s < result.sequence.size(); ++s) {
      io::write_scan(result.sequence.scans[s],
                     out.path() / "scans" / frame_name(s, ".bin"));
      io::write_labels(result.labels[s],
                       out.path() / "labels" / frame_name(s, ".label"));
    }
    if (!pose_file.empty()) {
      std::filesystem::copy_file(pose_file, out.path() / "poses.txt");
    }
    write_placements(result.records, out.path() / "placements.txt");

    std::ofstream summary(out.path() / "summary.txt", std::ios::trunc);
    summary << "command=synth\nscans=" << seq.size()
            << "\nattempts=" << ctx.config.synth.n_s
            << "\naccepted=" << result.records.size() << "\n"
            << "--- effective config ---\n"
            << dump_effective_config(ctx.config, ctx.provenance);
    summary.close();

    out.commit();
    std::cerr << "placed " << result.records.size() << " of "
              << ctx.config.synth.n_s << " attempts\n";
    log_elapsed("synth", start);
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int run_sample_pairs(int seq_len, int n_pairs,
                     const std::filesystem::path& out_file,
                     const CommandContext& ctx) {
  try {
    const auto pairs =
        sampling::sample_pairs(seq_len, n_pairs, ctx.config.sampling);
    std::ostringstream text;
    for (const auto& pair : pairs) {
      text << pair.first << ' ' << pair.second << '\n';
    }
    if (out_file.empty()) {
      std::cout << text.str();
    } else {
      std::ofstream out(out_file, std::ios::trunc);
      if (!out) {
        throw std::runtime_error("cannot open " + out_file.string());
      }
      out << text.str();
    }
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int run_eval(const std::filesystem::path& gt_dir,
             const std::filesystem::path& pred_dir,
             const std::filesystem::path& scan_dir,
             const std::filesystem::path& out_file, const CommandContext& ctx) {
  try {
    const auto start = Clock::now();
    const auto report =
        metrics::evaluate(gt_dir, pred_dir, scan_dir,
                          ctx.config.metrics.min_points,
                          ctx.config.metrics.filter_mode);
    std::cout << metrics::format_report(report);
    if (!out_file.empty()) {
      std::ofstream out(out_file, std::ios::trunc);
      if (!out) {
        throw std::runtime_error("cannot open " + out_file.string());
      }
      out << metrics::report_key_values(report);
    }
    log_elapsed("eval", start);
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int run_loss_check(const LossCheckInputs& inputs,
                   const std::filesystem::path& out_file,
                   const CommandContext& ctx) {
  try {
    std::ostringstream text;
    char buf[256];
    const Eigen::MatrixXd s_t = io::read_matrix(inputs.s_t);
    const Eigen::MatrixXd m_t = io::read_matrix(inputs.m_t);

    if (inputs.s_tk.empty()) {
      // Single-frame mode: cost matrix, matching and per-object mask terms.
      loss::validate_similarity(s_t);
      loss::validate_assignment(m_t);
      const Eigen::MatrixXd c = loss::cost_matrix(s_t, m_t, ctx.config.loss);
      const loss::Matching matching = loss::hungarian(c);
      const Eigen::MatrixXd w = loss::confidence_weight(
          s_t, ctx.config.loss.alpha, ctx.config.loss.epsilon);
      std::snprintf(buf, sizeof(buf), "n_p=%td n_q=%td n_o=%td\n", s_t.rows(),
                    s_t.cols(), m_t.cols());
      text << buf;
      for (Eigen::Index o = 0; o < m_t.cols(); ++o) {
        const int q = matching.query_of_object[o];
        if (q < 0) {
          std::snprintf(buf, sizeof(buf), "object=%td unmatched\n", o);
          text << buf;
          continue;
        }
        std::snprintf(buf, sizeof(buf),
                      "object=%td query=%d cost=%.12g dice=%.12g bce=%.12g "
                      "scaled_dice=%.12g scaled_bce=%.12g\n",
                      o, q, c(q, o),
                      loss::dice_coefficient(s_t.col(q), m_t.col(o)),
                      loss::bce_loss(s_t.col(q), m_t.col(o)),
                      loss::scaled_dice(s_t.col(q), m_t.col(o), w.col(q)),
                      loss::scaled_bce(s_t.col(q), m_t.col(o), w.col(q)));
        text << buf;
      }
      std::snprintf(buf, sizeof(buf), "matching_cost=%.12g\n",
                    matching.total_cost);
      text << buf;
    } else {
      loss::FramePairData data;
      data.s_t = s_t;
      data.m_t = m_t;
      data.raw_t = io::read_matrix(inputs.raw_t);
      data.s_tk = io::read_matrix(inputs.s_tk);
      data.m_tk = io::read_matrix(inputs.m_tk);
      data.raw_tk = io::read_matrix(inputs.raw_tk);
      const Eigen::Index n_o = m_t.cols();
      auto load_centroids = [n_o](const std::filesystem::path& path) {
        std::vector<Eigen::Vector3d> centroids(n_o, Eigen::Vector3d::Zero());
        if (!path.empty()) {
          const Eigen::MatrixXd m = io::read_matrix(path);
          if (m.rows() != n_o || m.cols() != 3) {
            throw std::runtime_error("centroid matrix must be n_o x 3: " +
                                     path.string());
          }
          for (Eigen::Index o = 0; o < n_o; ++o) {
            centroids[o] = m.row(o).transpose();
          }
        }
        return centroids;
      };
      data.centroids_t = load_centroids(inputs.centroids_t);
      data.centroids_tk = load_centroids(inputs.centroids_tk);

      const loss::TotalLossResult result =
          loss::total_loss(data, ctx.config.loss);
      std::snprintf(buf, sizeof(buf), "n_q=%td n_o=%td matched=%d\n",
                    s_t.cols(), n_o, result.matching.matched_count());
      text << buf;
      for (const auto& terms : result.objects) {
        std::snprintf(buf, sizeof(buf),
                      "object=%d query=%d scaled_dice=%.12g scaled_bce=%.12g "
                      "consistency=%.12g motion_weight=%.12g "
                      "contribution=%.12g\n",
                      terms.object, terms.query, terms.scaled_dice,
                      terms.scaled_bce, terms.consistency, terms.motion_weight,
                      terms.contribution);
        text << buf;
      }
      std::snprintf(buf, sizeof(buf), "total=%.12g\n", result.total);
      text << buf;
    }

    std::cout << text.str();
    if (!out_file.empty()) {
      std::ofstream out(out_file, std::ios::trunc);
      if (!out) {
        throw std::runtime_error("cannot open " + out_file.string());
      }
      out << text.str();
    }
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

void write_placements(std::span<const synth::PlacementRecord> records,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string());
  }
  out << "# snippet instance anchor_x anchor_y yaw frame:x_min:x_max:y_min:y_max...\n";
  char buf[160];
  for (const auto& rec : records) {
    std::snprintf(buf, sizeof(buf), "%u %u %.17g %.17g %.17g", rec.snippet_id,
                  rec.instance_id, rec.anchor_x, rec.anchor_y, rec.yaw);
    out << buf;
    for (const auto& [frame, box] : rec.frame_boxes) {
      std::snprintf(buf, sizeof(buf), " %d:%.17g:%.17g:%.17g:%.17g", frame,
                    box.x_min, box.x_max, box.y_min, box.y_max);
      out << buf;
    }
    out << '\n';
  }
}

std::vector<synth::PlacementRecord> read_placements(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::vector<synth::PlacementRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::istringstream ss(line);
    synth::PlacementRecord rec;
    if (!(ss >> rec.snippet_id >> rec.instance_id >> rec.anchor_x >>
          rec.anchor_y >> rec.yaw)) {
      throw std::runtime_error("bad placement line: " + line);
    }
    std::string box_text;
    while (ss >> box_text) {
      int frame;
      Aabb2D box;
      if (std::sscanf(box_text.c_str(), "%d:%lg:%lg:%lg:%lg", &frame,
                      &box.x_min, &box.x_max, &box.y_min, &box.y_max) != 5) {
        throw std::runtime_error("bad placement box: " + box_text);
      }
      rec.frame_boxes.emplace_back(frame, box);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace seq4d::cmd
