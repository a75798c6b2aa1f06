#include "seq4d/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace seq4d::loss {

namespace {

constexpr double kProbClamp = 1e-7;   // log argument floor/ceiling
constexpr double kKlClamp = 1e-12;    // KL denominator floor

double clamp_prob(double s) {
  return std::clamp(s, kProbClamp, 1.0 - kProbClamp);
}

}  // namespace

void LossWeights::validate() const {
  if (lambda_dice < 0 || lambda_bce < 0 || lambda_cons < 0) {
    throw std::invalid_argument("loss.lambda_* must be >= 0");
  }
  if (alpha < 0 || alpha > 1) {
    throw std::invalid_argument("loss.alpha must satisfy alpha ∈ [0,1]");
  }
  if (epsilon <= 0) {
    throw std::invalid_argument("loss.epsilon must be > 0");
  }
  if (beta <= 0) {
    throw std::invalid_argument("loss.beta must be > 0");
  }
}

void validate_similarity(const Eigen::MatrixXd& s) {
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const double v = s(i, j);
      if (!std::isfinite(v) || v <= 0.0 || v >= 1.0) {
        throw std::invalid_argument(
            "similarity entries must be finite and in (0,1)");
      }
    }
  }
}

void validate_assignment(const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double row_sum = 0.0;
    for (Eigen::Index o = 0; o < m.cols(); ++o) {
      const double v = m(i, o);
      if (v != 0.0 && v != 1.0) {
        throw std::invalid_argument("assignment entries must be 0 or 1");
      }
      row_sum += v;
    }
    if (row_sum > 1.0) {
      throw std::invalid_argument(
          "a point may belong to at most one instance");
    }
  }
}

double dice_coefficient(const Eigen::VectorXd& s, const Eigen::VectorXd& m) {
  if (s.size() != m.size()) {
    throw std::invalid_argument("dice: vector lengths differ");
  }
  const double denom = s.squaredNorm() + m.squaredNorm();
  if (denom == 0.0) {
    throw std::invalid_argument("degenerate dice: both vectors all-zero");
  }
  // same reduction shape as scaled_dice, so unit weights reduce bit-exactly
  return 2.0 * (s.array() * m.array()).sum() / denom;
}

double bce_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& m) {
  if (s.size() != m.size()) {
    throw std::invalid_argument("bce: vector lengths differ");
  }
  if (s.size() == 0) {
    throw std::invalid_argument("bce: empty vectors");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double p = clamp_prob(s[i]);
    sum += m[i] * std::log(p) + (1.0 - m[i]) * std::log(1.0 - p);
  }
  return -sum / static_cast<double>(s.size());
}

Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& s, const Eigen::MatrixXd& m,
                            const LossWeights& w) {
  if (s.rows() != m.rows()) {
    throw std::invalid_argument("cost_matrix: S and M disagree on N_p");
  }
  Eigen::MatrixXd c(s.cols(), m.cols());
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    for (Eigen::Index o = 0; o < m.cols(); ++o) {
      c(j, o) = w.lambda_dice * (1.0 - dice_coefficient(s.col(j), m.col(o))) +
                w.lambda_bce * bce_loss(s.col(j), m.col(o));
    }
  }
  return c;
}

int Matching::matched_count() const {
  int n = 0;
  for (int q : query_of_object) {
    n += q >= 0;
  }
  return n;
}

namespace {

// Jonker-Volgenant style shortest augmenting path solver for square
// matrices. Returns the assignment plus dual potentials u, v satisfying
// a(i,j) - u[i] - v[j] >= 0 with equality on assigned pairs; the duals
// certify uniqueness of the optimum below.
struct SquareSolution {
  std::vector<int> row_of_col;
  std::vector<double> u, v;
  double cost = 0.0;
};

SquareSolution solve_square(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) {
          continue;
        }
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {  // strict: lowest column wins ties
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  SquareSolution sol;
  sol.row_of_col.assign(n, -1);
  sol.u.assign(n, 0.0);
  sol.v.assign(n, 0.0);
  for (int j = 1; j <= n; ++j) {
    sol.row_of_col[j - 1] = p[j] - 1;
  }
  for (int i = 1; i <= n; ++i) {
    sol.u[i - 1] = u[i];
  }
  for (int j = 1; j <= n; ++j) {
    sol.v[j - 1] = v[j];
  }
  for (int j = 0; j < n; ++j) {
    sol.cost += a(sol.row_of_col[j], j);
  }
  return sol;
}

// Minimum assignment cost of the submatrix spanned by the free rows/cols.
double solve_free_cost(const Eigen::MatrixXd& a, const std::vector<char>& row_fixed,
                       const std::vector<char>& col_fixed) {
  std::vector<int> rows, cols;
  for (int i = 0; i < static_cast<int>(row_fixed.size()); ++i) {
    if (!row_fixed[i]) {
      rows.push_back(i);
    }
  }
  for (int j = 0; j < static_cast<int>(col_fixed.size()); ++j) {
    if (!col_fixed[j]) {
      cols.push_back(j);
    }
  }
  if (rows.empty()) {
    return 0.0;
  }
  Eigen::MatrixXd sub(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      sub(r, c) = a(rows[r], cols[c]);
    }
  }
  return solve_square(sub).cost;
}

}  // namespace

Matching hungarian(const Eigen::MatrixXd& c) {
  const int n_q = static_cast<int>(c.rows());
  const int n_o = static_cast<int>(c.cols());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (std::isnan(c.data()[i])) {
      throw std::invalid_argument("cost matrix contains NaN");
    }
    if (!std::isfinite(c.data()[i])) {
      throw std::invalid_argument("cost matrix contains non-finite entries");
    }
  }
  Matching matching;
  matching.query_of_object.assign(n_o, -1);
  if (n_q == 0 || n_o == 0) {
    return matching;
  }

  // Pad rectangular inputs to square with a constant above the max entry;
  // pad pairs absorb the surplus side without disturbing the real optimum.
  const int n = std::max(n_q, n_o);
  const double pad = c.maxCoeff() + 1.0;
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(n, n, pad);
  a.topLeftCorner(n_q, n_o) = c;

  const SquareSolution sol = solve_square(a);
  const double tol = 1e-9 * std::max(1.0, c.cwiseAbs().maxCoeff());

  bool unique = true;
  for (int i = 0; i < n && unique; ++i) {
    for (int j = 0; j < n; ++j) {
      if (sol.row_of_col[j] == i) {
        continue;
      }
      if (a(i, j) - sol.u[i] - sol.v[j] <= tol) {
        unique = false;
        break;
      }
    }
  }

  std::vector<int> row_of_col = sol.row_of_col;
  if (!unique) {
    // Tie refinement: fix each real object column, in order, to the lowest
    // row that still completes to the optimal total.
    std::vector<char> row_fixed(n, 0), col_fixed(n, 0);
    double fixed_cost = 0.0;
    for (int o = 0; o < n_o; ++o) {
      col_fixed[o] = 1;
      bool placed = false;
      for (int q = 0; q < n && !placed; ++q) {
        if (row_fixed[q]) {
          continue;
        }
        row_fixed[q] = 1;
        const double cand_cost =
            fixed_cost + a(q, o) + solve_free_cost(a, row_fixed, col_fixed);
        if (cand_cost <= sol.cost + tol) {
          row_of_col[o] = q;
          fixed_cost += a(q, o);
          placed = true;
        } else {
          row_fixed[q] = 0;
        }
      }
      if (!placed) {
        throw std::logic_error("hungarian tie refinement failed");
      }
    }
  }

  for (int o = 0; o < n_o; ++o) {
    const int q = row_of_col[o];
    if (q < n_q) {
      matching.query_of_object[o] = q;
      matching.total_cost += c(q, o);
    }
  }
  return matching;
}

Eigen::MatrixXd confidence_weight(const Eigen::MatrixXd& s, double alpha,
                                  double epsilon) {
  Eigen::MatrixXd w(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    w.data()[i] = std::max(epsilon, 1.0 - alpha * (1.0 - s.data()[i]));
  }
  return w;
}

double scaled_dice(const Eigen::VectorXd& s, const Eigen::VectorXd& m,
                   const Eigen::VectorXd& w) {
  if (s.size() != m.size() || s.size() != w.size()) {
    throw std::invalid_argument("scaled_dice: vector lengths differ");
  }
  const double denom = s.squaredNorm() + m.squaredNorm();
  if (denom == 0.0) {
    throw std::invalid_argument("degenerate dice: both vectors all-zero");
  }
  const double coeff = 2.0 * (w.array() * s.array() * m.array()).sum() / denom;
  return 1.0 - coeff;
}

double scaled_bce(const Eigen::VectorXd& s, const Eigen::VectorXd& m,
                  const Eigen::VectorXd& w) {
  if (s.size() != m.size() || s.size() != w.size()) {
    throw std::invalid_argument("scaled_bce: vector lengths differ");
  }
  if (s.size() == 0) {
    throw std::invalid_argument("scaled_bce: empty vectors");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double p = clamp_prob(s[i]);
    sum += w[i] * m[i] * std::log(p) + (1.0 - m[i]) * std::log(1.0 - p);
  }
  return -sum / static_cast<double>(s.size());
}

std::vector<double> motion_weights(
    std::span<const Eigen::Vector3d> centroids_t,
    std::span<const Eigen::Vector3d> centroids_tk,
    std::span<const std::pair<bool, bool>> presence, double beta) {
  if (beta <= 0) {
    throw std::invalid_argument("loss.beta must be > 0");
  }
  if (centroids_t.size() != centroids_tk.size() ||
      centroids_t.size() != presence.size()) {
    throw std::invalid_argument("motion_weights: input lengths differ");
  }
  const std::size_t n = centroids_t.size();
  std::vector<double> weights(n, 0.0);
  if (n == 0) {
    return weights;
  }
  double denom = 0.0;
  for (std::size_t o = 0; o < n; ++o) {
    const double motion = presence[o].first && presence[o].second
                              ? (centroids_tk[o] - centroids_t[o]).squaredNorm()
                              : 0.0;
    weights[o] = motion + beta;
    denom += weights[o];
  }
  for (double& w : weights) {
    w /= denom;
  }
  return weights;
}

double consistency_loss(const Eigen::VectorXd& h_t,
                        const Eigen::VectorXd& h_tk) {
  if (h_t.size() != h_tk.size()) {
    throw std::invalid_argument("consistency_loss: vector lengths differ");
  }
  auto check_simplex = [](const Eigen::VectorXd& h) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      if (!(h[i] >= 0.0)) {
        throw std::invalid_argument("not a probability distribution");
      }
      sum += h[i];
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw std::invalid_argument("not a probability distribution");
    }
  };
  check_simplex(h_t);
  check_simplex(h_tk);
  double kl = 0.0;
  for (Eigen::Index i = 0; i < h_t.size(); ++i) {
    if (h_t[i] > 0.0) {
      kl += h_t[i] * std::log(h_t[i] / std::max(h_tk[i], kKlClamp));
    }
  }
  return kl;
}

Eigen::VectorXd softmax_query_distribution(const Eigen::VectorXd& avg_scores) {
  if (avg_scores.size() == 0) {
    throw std::invalid_argument("softmax of empty vector");
  }
  const double m = avg_scores.maxCoeff();
  Eigen::VectorXd e = (avg_scores.array() - m).exp();
  return e / e.sum();
}

namespace {

// softmax of per-query mean raw scores over the points of object o.
Eigen::VectorXd query_distribution(const Eigen::MatrixXd& raw,
                                   const Eigen::MatrixXd& m, int o) {
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(raw.cols());
  double count = 0.0;
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    if (m(i, o) != 0.0) {
      sums += raw.row(i).transpose();
      count += 1.0;
    }
  }
  return softmax_query_distribution(sums / count);
}

}  // namespace

TotalLossResult total_loss(const FramePairData& data, const LossWeights& w) {
  w.validate();
  validate_similarity(data.s_t);
  validate_similarity(data.s_tk);
  validate_assignment(data.m_t);
  validate_assignment(data.m_tk);

  const Eigen::Index n_q = data.s_t.cols();
  const Eigen::Index n_o = data.m_t.cols();
  if (data.s_t.rows() != data.m_t.rows() ||
      data.s_tk.rows() != data.m_tk.rows()) {
    throw std::invalid_argument("total_loss: S and M disagree on N_p");
  }
  if (data.s_tk.cols() != n_q || data.m_tk.cols() != n_o) {
    throw std::invalid_argument(
        "total_loss: query/object counts differ between frames");
  }
  if (data.raw_t.rows() != data.s_t.rows() || data.raw_t.cols() != n_q ||
      data.raw_tk.rows() != data.s_tk.rows() || data.raw_tk.cols() != n_q) {
    throw std::invalid_argument("total_loss: raw score dimensions mismatch");
  }
  if (static_cast<Eigen::Index>(data.centroids_t.size()) != n_o ||
      static_cast<Eigen::Index>(data.centroids_tk.size()) != n_o) {
    throw std::invalid_argument("total_loss: one centroid per object needed");
  }

  std::vector<std::pair<bool, bool>> presence(n_o);
  for (Eigen::Index o = 0; o < n_o; ++o) {
    presence[o] = {data.m_t.col(o).maxCoeff() > 0.0,
                   data.m_tk.col(o).maxCoeff() > 0.0};
  }

  TotalLossResult result;
  result.matching = hungarian(cost_matrix(data.s_t, data.m_t, w));
  const Eigen::MatrixXd weights_t =
      confidence_weight(data.s_t, w.alpha, w.epsilon);
  const std::vector<double> motion =
      motion_weights(data.centroids_t, data.centroids_tk, presence, w.beta);

  const int n = static_cast<int>(std::min(n_q, n_o));
  for (Eigen::Index o = 0; o < n_o; ++o) {
    ObjectLossTerms terms;
    terms.object = static_cast<int>(o);
    terms.motion_weight = motion[o];
    const int q = result.matching.query_of_object[o];
    if (q >= 0) {
      terms.query = q;
      terms.scaled_dice =
          scaled_dice(data.s_t.col(q), data.m_t.col(o), weights_t.col(q));
      terms.scaled_bce =
          scaled_bce(data.s_t.col(q), data.m_t.col(o), weights_t.col(q));
      if (presence[o].first && presence[o].second) {
        terms.consistency =
            consistency_loss(query_distribution(data.raw_t, data.m_t, o),
                             query_distribution(data.raw_tk, data.m_tk, o));
      }
      terms.contribution =
          terms.motion_weight *
          (w.lambda_dice * terms.scaled_dice + w.lambda_bce * terms.scaled_bce +
           w.lambda_cons * terms.consistency);
      result.total += terms.contribution;
    }
    result.objects.push_back(terms);
  }
  if (n > 0) {
    result.total /= n;
  }
  return result;
}

}  // namespace seq4d::loss
