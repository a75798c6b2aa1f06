#include "seq4d/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace seq4d {

namespace {

// Shortest representation that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) {
      throw std::invalid_argument("");
    }
    return v;
  } catch (...) {
    throw std::invalid_argument("config error: " + key + "=" + text +
                                " is not a number");
  }
}

long long parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos != text.size()) {
      throw std::invalid_argument("");
    }
    return v;
  } catch (...) {
    throw std::invalid_argument("config error: " + key + "=" + text +
                                " is not an integer");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") {
    return true;
  }
  if (text == "false" || text == "0") {
    return false;
  }
  throw std::invalid_argument("config error: " + key + "=" + text +
                              " is not a boolean (true/false)");
}

struct Entry {
  std::string key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

std::vector<Entry> entries() {
  std::vector<Entry> table;
  auto add = [&table](std::string key, auto getter, auto setter) {
    table.push_back(Entry{std::move(key), getter, setter});
  };

  add("ground.inlier_threshold",
      [](const PipelineConfig& c) { return format_double(c.ground.inlier_threshold); },
      [](PipelineConfig& c, const std::string& v) {
        c.ground.inlier_threshold = parse_double("ground.inlier_threshold", v);
      });
  add("ground.max_normal_tilt_deg",
      [](const PipelineConfig& c) { return format_double(c.ground.max_normal_tilt_deg); },
      [](PipelineConfig& c, const std::string& v) {
        c.ground.max_normal_tilt_deg = parse_double("ground.max_normal_tilt_deg", v);
      });
  add("ground.iterations",
      [](const PipelineConfig& c) { return std::to_string(c.ground.iterations); },
      [](PipelineConfig& c, const std::string& v) {
        c.ground.iterations = static_cast<int>(parse_int("ground.iterations", v));
      });
  add("ground.seed",
      [](const PipelineConfig& c) { return std::to_string(c.ground.seed); },
      [](PipelineConfig& c, const std::string& v) {
        c.ground.seed = static_cast<std::uint64_t>(parse_int("ground.seed", v));
      });

  add("cluster.window_len",
      [](const PipelineConfig& c) { return std::to_string(c.cluster.window_len); },
      [](PipelineConfig& c, const std::string& v) {
        c.cluster.window_len = static_cast<int>(parse_int("cluster.window_len", v));
      });
  add("cluster.stride",
      [](const PipelineConfig& c) { return std::to_string(c.cluster.stride); },
      [](PipelineConfig& c, const std::string& v) {
        c.cluster.stride = static_cast<int>(parse_int("cluster.stride", v));
      });
  add("cluster.voxel_size",
      [](const PipelineConfig& c) { return format_double(c.cluster.voxel_size); },
      [](PipelineConfig& c, const std::string& v) {
        c.cluster.voxel_size = parse_double("cluster.voxel_size", v);
      });
  add("cluster.eps",
      [](const PipelineConfig& c) { return format_double(c.cluster.eps); },
      [](PipelineConfig& c, const std::string& v) {
        c.cluster.eps = parse_double("cluster.eps", v);
      });
  add("cluster.min_pts",
      [](const PipelineConfig& c) { return std::to_string(c.cluster.min_pts); },
      [](PipelineConfig& c, const std::string& v) {
        c.cluster.min_pts = static_cast<int>(parse_int("cluster.min_pts", v));
      });

  add("synth.n_s",
      [](const PipelineConfig& c) { return std::to_string(c.synth.n_s); },
      [](PipelineConfig& c, const std::string& v) {
        c.synth.n_s = static_cast<int>(parse_int("synth.n_s", v));
      });
  add("synth.validmap_res",
      [](const PipelineConfig& c) { return format_double(c.synth.validmap_res); },
      [](PipelineConfig& c, const std::string& v) {
        c.synth.validmap_res = parse_double("synth.validmap_res", v);
      });
  add("synth.min_points",
      [](const PipelineConfig& c) { return std::to_string(c.synth.min_points); },
      [](PipelineConfig& c, const std::string& v) {
        c.synth.min_points = static_cast<int>(parse_int("synth.min_points", v));
      });
  add("synth.seed",
      [](const PipelineConfig& c) { return std::to_string(c.synth.seed); },
      [](PipelineConfig& c, const std::string& v) {
        c.synth.seed = static_cast<std::uint64_t>(parse_int("synth.seed", v));
      });
  add("synth.collide_existing",
      [](const PipelineConfig& c) {
        return std::string(c.synth.collide_existing ? "true" : "false");
      },
      [](PipelineConfig& c, const std::string& v) {
        c.synth.collide_existing = parse_bool("synth.collide_existing", v);
      });

  add("sampling.max_gap",
      [](const PipelineConfig& c) { return std::to_string(c.sampling.max_gap); },
      [](PipelineConfig& c, const std::string& v) {
        c.sampling.max_gap = static_cast<int>(parse_int("sampling.max_gap", v));
      });
  add("sampling.enable_nfs",
      [](const PipelineConfig& c) {
        return std::string(c.sampling.enable_nfs ? "true" : "false");
      },
      [](PipelineConfig& c, const std::string& v) {
        c.sampling.enable_nfs = parse_bool("sampling.enable_nfs", v);
      });
  add("sampling.enable_rto",
      [](const PipelineConfig& c) {
        return std::string(c.sampling.enable_rto ? "true" : "false");
      },
      [](PipelineConfig& c, const std::string& v) {
        c.sampling.enable_rto = parse_bool("sampling.enable_rto", v);
      });
  add("sampling.rto_duplicate",
      [](const PipelineConfig& c) {
        return std::string(c.sampling.rto_duplicate ? "true" : "false");
      },
      [](PipelineConfig& c, const std::string& v) {
        c.sampling.rto_duplicate = parse_bool("sampling.rto_duplicate", v);
      });
  add("sampling.seed",
      [](const PipelineConfig& c) { return std::to_string(c.sampling.seed); },
      [](PipelineConfig& c, const std::string& v) {
        c.sampling.seed = static_cast<std::uint64_t>(parse_int("sampling.seed", v));
      });

  add("loss.lambda_dice",
      [](const PipelineConfig& c) { return format_double(c.loss.lambda_dice); },
      [](PipelineConfig& c, const std::string& v) {
        c.loss.lambda_dice = parse_double("loss.lambda_dice", v);
      });
  add("loss.lambda_bce",
      [](const PipelineConfig& c) { return format_double(c.loss.lambda_bce); },
      [](PipelineConfig& c, const std::string& v) {
        c.loss.lambda_bce = parse_double("loss.lambda_bce", v);
      });
  add("loss.lambda_cons",
      [](const PipelineConfig& c) { return format_double(c.loss.lambda_cons); },
      [](PipelineConfig& c, const std::string& v) {
        c.loss.lambda_cons = parse_double("loss.lambda_cons", v);
      });
  add("loss.alpha",
      [](const PipelineConfig& c) { return format_double(c.loss.alpha); },
      [](PipelineConfig& c, const std::string& v) {
        c.loss.alpha = parse_double("loss.alpha", v);
      });
  add("loss.epsilon",
      [](const PipelineConfig& c) { return format_double(c.loss.epsilon); },
      [](PipelineConfig& c, const std::string& v) {
        c.loss.epsilon = parse_double("loss.epsilon", v);
      });
  add("loss.beta",
      [](const PipelineConfig& c) { return format_double(c.loss.beta); },
      [](PipelineConfig& c, const std::string& v) {
        c.loss.beta = parse_double("loss.beta", v);
      });

  add("metrics.min_points",
      [](const PipelineConfig& c) { return std::to_string(c.metrics.min_points); },
      [](PipelineConfig& c, const std::string& v) {
        c.metrics.min_points = static_cast<int>(parse_int("metrics.min_points", v));
      });
  add("metrics.filter_mode",
      [](const PipelineConfig& c) {
        return std::string(c.metrics.filter_mode ==
                                   metrics::FilterMode::kPerScanSlice
                               ? "slice"
                               : "4d");
      },
      [](PipelineConfig& c, const std::string& v) {
        if (v == "slice") {
          c.metrics.filter_mode = metrics::FilterMode::kPerScanSlice;
        } else if (v == "4d") {
          c.metrics.filter_mode = metrics::FilterMode::kWhole4D;
        } else {
          throw std::invalid_argument(
              "config error: metrics.filter_mode must be 'slice' or '4d'");
        }
      });
  return table;
}

const std::vector<Entry>& table() {
  static const std::vector<Entry> t = entries();
  return t;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

void set_key(PipelineConfig& config, const std::string& key,
             const std::string& value) {
  for (const Entry& e : table()) {
    if (e.key == key) {
      e.set(config, value);
      return;
    }
  }
  throw std::invalid_argument("config error: unknown key '" + key + "'");
}

void check(bool ok, const std::string& key, const std::string& constraint) {
  if (!ok) {
    throw std::invalid_argument("config error: " + key + " violates " +
                                constraint);
  }
}

}  // namespace

void PipelineConfig::validate() const {
  check(ground.inlier_threshold > 0, "ground.inlier_threshold", "> 0");
  check(ground.max_normal_tilt_deg > 0 && ground.max_normal_tilt_deg <= 90,
        "ground.max_normal_tilt_deg", "∈ (0,90]");
  check(ground.iterations >= 1, "ground.iterations", ">= 1");
  check(cluster.window_len >= 1, "cluster.window_len", ">= 1");
  check(cluster.stride >= 1, "cluster.stride", ">= 1");
  check(cluster.voxel_size > 0, "cluster.voxel_size", "> 0");
  check(cluster.eps > 0, "cluster.eps", "> 0");
  check(cluster.min_pts >= 1, "cluster.min_pts", ">= 1");
  check(synth.n_s >= 0, "synth.n_s", ">= 0");
  check(synth.validmap_res > 0, "synth.validmap_res", "> 0");
  check(synth.min_points >= 1, "synth.min_points", ">= 1");
  check(sampling.max_gap >= 1, "sampling.max_gap", ">= 1");
  check(loss.lambda_dice >= 0, "loss.lambda_dice", ">= 0");
  check(loss.lambda_bce >= 0, "loss.lambda_bce", ">= 0");
  check(loss.lambda_cons >= 0, "loss.lambda_cons", ">= 0");
  check(loss.alpha >= 0 && loss.alpha <= 1, "loss.alpha", "alpha ∈ [0,1]");
  check(loss.epsilon > 0, "loss.epsilon", "epsilon > 0");
  check(loss.beta > 0, "loss.beta", "beta > 0");
  check(metrics.min_points >= 0, "metrics.min_points", ">= 0");
}

PipelineConfig default_config() { return PipelineConfig{}; }

PipelineConfig load_config(const std::filesystem::path& path) {
  return load_config_tracked(path, {}).config;
}

void apply_override(PipelineConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("config error: override '" + assignment +
                                "' is not key=value");
  }
  set_key(config, trim(assignment.substr(0, eq)),
          trim(assignment.substr(eq + 1)));
}

std::string dump_config(const PipelineConfig& config) {
  std::string out;
  for (const Entry& e : table()) {
    out += e.key + "=" + e.get(config) + "\n";
  }
  return out;
}

std::string dump_effective_config(
    const PipelineConfig& config,
    const std::map<std::string, std::string>& provenance) {
  std::string out;
  for (const Entry& e : table()) {
    const auto it = provenance.find(e.key);
    const std::string source = it == provenance.end() ? "default" : it->second;
    out += e.key + "=" + e.get(config) + "  # " + source + "\n";
  }
  return out;
}

LoadedConfig load_config_tracked(const std::filesystem::path& path,
                                 std::span<const std::string> overrides) {
  LoadedConfig loaded;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) {
      throw std::runtime_error("cannot open config " + path.string());
    }
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string stripped = trim(line);
      if (stripped.empty() || stripped[0] == '#') {
        continue;
      }
      const auto eq = stripped.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("config error: " + path.string() +
                                    " line " + std::to_string(line_no) +
                                    " is not key=value");
      }
      std::string key = trim(stripped.substr(0, eq));
      std::string raw = stripped.substr(eq + 1);
      // strip trailing comment
      const auto hash = raw.find('#');
      if (hash != std::string::npos) {
        raw = raw.substr(0, hash);
      }
      set_key(loaded.config, key, trim(raw));
      loaded.provenance[key] = "file";
    }
  }
  for (const std::string& assignment : overrides) {
    apply_override(loaded.config, assignment);
    const auto eq = assignment.find('=');
    loaded.provenance[trim(assignment.substr(0, eq))] = "override";
  }
  loaded.config.validate();
  return loaded;
}

}  // namespace seq4d
