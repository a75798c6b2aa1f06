// Forward-value loss kernels over plain numeric arrays: dice/BCE mask terms,
// the query-object cost matrix with Hungarian matching, confidence-scaled
// variants, motion-based instance weighting, the KL time-consistency term and
// the combined weighted objective. No gradients; these are reference
// evaluators for validating external trainers.
//
// Sign convention: the dice and BCE expressions are often written as
// similarity / log-likelihood (higher = better); here loss_dice = 1 - dice
// coefficient and loss_bce = negative mean log-likelihood, so lower is always
// better. dice_coefficient exposes the raw coefficient.
#pragma once

#include <Eigen/Core>
#include <span>
#include <utility>
#include <vector>

namespace seq4d::loss {

struct LossWeights {
  double lambda_dice = 2.0;
  double lambda_bce = 5.0;
  double lambda_cons = 1.0;
  double alpha = 0.6;    // confidence down-weighting strength, in [0,1]
  double epsilon = 0.1;  // confidence weight floor, > 0
  double beta = 0.2;     // motion weight smoothing, > 0

  void validate() const;
};

// S must be N_p x N_q with finite entries in the open interval (0,1).
void validate_similarity(const Eigen::MatrixXd& s);
// M must be N_p x N_o with entries in {0,1} and row sums <= 1.
void validate_assignment(const Eigen::MatrixXd& m);

// 2*sum(s*m) / (sum(s^2) + sum(m^2)). Throws "degenerate dice" when both
// vectors are all-zero.
double dice_coefficient(const Eigen::VectorXd& s, const Eigen::VectorXd& m);

// -(1/N_p) * sum(m*log s + (1-m)*log(1-s)); s is clamped to
// [1e-7, 1-1e-7] before the logs.
double bce_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& m);

// C(j,o) = lambda_dice*(1 - dice(S[:,j], M[:,o])) + lambda_bce*bce(...).
Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& s, const Eigen::MatrixXd& m,
                            const LossWeights& w);

struct Matching {
  // query_of_object[o] = matched query index, or -1 when N_o > N_q leaves
  // the object unmatched. Exactly min(N_q, N_o) entries are >= 0, no query
  // appears twice.
  std::vector<int> query_of_object;
  double total_cost = 0.0;  // over matched pairs

  int matched_count() const;
};

// Minimum-cost injective assignment on an N_q x N_o matrix (rows = queries).
// Rectangular inputs are padded to square with a constant above the largest
// entry. Among minimum-cost assignments the lexicographically smallest
// (by object index, then query index) is returned; a dual-variable
// certificate skips that refinement whenever the optimum is unique. Throws
// on NaN entries.
Matching hungarian(const Eigen::MatrixXd& c);

// w = max(epsilon, 1 - alpha*(1 - S)), elementwise.
Eigen::MatrixXd confidence_weight(const Eigen::MatrixXd& s, double alpha,
                                  double epsilon);

// 1 - sum(2*w*s*m) / (sum(s^2) + sum(m^2)). Reduces to 1 - dice_coefficient
// when w is all ones.
double scaled_dice(const Eigen::VectorXd& s, const Eigen::VectorXd& m,
                   const Eigen::VectorXd& w);

// -(1/N_p) * sum(w*m*log s + (1-m)*log(1-s)); the weight applies to the
// positive term only.
double scaled_bce(const Eigen::VectorXd& s, const Eigen::VectorXd& m,
                  const Eigen::VectorXd& w);

// Squared centroid displacement per object, zero for objects present in only
// one frame, normalized as (a_o + beta) / sum(a + beta). Sums to 1; empty
// input yields an empty vector.
std::vector<double> motion_weights(
    std::span<const Eigen::Vector3d> centroids_t,
    std::span<const Eigen::Vector3d> centroids_tk,
    std::span<const std::pair<bool, bool>> presence, double beta);

// KL(h_t || h_tk) with 0*log(0/x) = 0 and h_tk clamped below at 1e-12.
// Inputs must be non-negative and sum to 1 within 1e-6.
double consistency_loss(const Eigen::VectorXd& h_t,
                        const Eigen::VectorXd& h_tk);

// Numerically stable softmax (max subtraction).
Eigen::VectorXd softmax_query_distribution(const Eigen::VectorXd& avg_scores);

// Everything the combined objective needs for one training pair. Frame point
// counts may differ; the object axis is shared (same pseudo-instance IDs),
// with absence encoded as an all-zero M column.
struct FramePairData {
  Eigen::MatrixXd s_t, s_tk;      // N_p x N_q, sigmoid similarities
  Eigen::MatrixXd m_t, m_tk;      // N_p x N_o, {0,1} assignments
  Eigen::MatrixXd raw_t, raw_tk;  // N_p x N_q, pre-sigmoid scores
  std::vector<Eigen::Vector3d> centroids_t, centroids_tk;  // per object
};

struct ObjectLossTerms {
  int object = -1;
  int query = -1;  // -1 when unmatched
  double scaled_dice = 0.0;
  double scaled_bce = 0.0;
  double consistency = 0.0;
  double motion_weight = 0.0;  // normalized
  double contribution = 0.0;   // motion_weight * weighted term sum
};

struct TotalLossResult {
  double total = 0.0;
  std::vector<ObjectLossTerms> objects;
  Matching matching;
};

// Matches queries to objects at frame t with the Hungarian algorithm, then
// accumulates (1/N) * sum_o A_o * [ lambda_dice * dice_scaled +
// lambda_bce * bce_scaled + lambda_cons * consistency ] over the matched
// objects, N = min(N_q, N_o). The consistency term uses the softmax of
// per-object mean raw scores and is zero for objects absent in either frame.
TotalLossResult total_loss(const FramePairData& data, const LossWeights& w);

}  // namespace seq4d::loss
