#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sdl/common.hpp"

namespace sdl {

// max:      score(A, t) = max over rows of A.t  (ranking through the most
//           dominant principal direction; gradients flow through it alone)
// l2norm:   score(A, t) = ||A t||_2 baseline
// fast0tag: the single-direction special case of max; requires M = 1
enum class LossVariant { kMax, kL2Norm, kFast0Tag };

LossVariant variant_from_string(std::string_view name);
std::string to_string(LossVariant v);

// One training instance in word-vector space. Rows are word vectors.
struct LabelInstance {
  Mat positives;  // |P| x d_w
  Mat negatives;  // |Pbar| x d_w
};

struct LossConfig {
  LossVariant variant = LossVariant::kMax;
  double lambda = 0.3;  // user-facing regularization strength
  bool use_sdw = true;  // semantic diversity weighting of the ranking term
  int m = 7;            // rows of the embedding matrix
};

// Throws ValidationError on m < 1, lambda < 0, or fast0tag with m != 1.
void validate(const LossConfig& cfg);

double softplus(double u);  // overflow-safe max(u,0) + log1p(exp(-|u|))
double sigmoid(double u);

// Per-image ranking weight lambda_tilde = min(1, lambda / |Pbar|); the clamp
// guards the degenerate case of very few negatives.
double lambda_tilde(double lambda, Eigen::Index n_negatives);

struct ScoreResult {
  double value;
  Eigen::Index row;  // argmax row; lowest index on ties
};

// Relevance score max(A t); the returned row drives gradient routing and
// the per-row attribution report.
ScoreResult score(const Mat& a, const Vec& t);

// max(A n) - max(A p): positive when the negative tag outranks the positive.
double pair_margin(const Mat& a, const Vec& p, const Vec& n);

// Semantic diversity weight: 1 + summed per-dimension population variance of
// the rows of `positives`. Exactly 1 for a single row.
double sdw(const Mat& positives);

struct RankLoss {
  double value = 0.0;
  Mat grad_a;
  double omega_d = 1.0;  // reported even when it does not weight the loss
};

// Pairwise ranking loss: omega_d * (1/(|P||Pbar|)) * sum_{j,k} softplus(u_jk)
// with exact gradient w.r.t. A. omega_d is a constant of the labels and
// contributes no gradient.
RankLoss rank_loss(const Mat& a, const LabelInstance& inst, bool use_sdw,
                   LossVariant variant);

// Indexed form sharing the same math path: `vecs` holds one word vector per
// row, `pos`/`neg` index into it. The trainer calls this with the full seen
// vocabulary to avoid copying vectors per sample.
RankLoss rank_loss_over(const Mat& a, const Mat& vecs,
                        const std::vector<int>& pos, const std::vector<int>& neg,
                        bool use_sdw, LossVariant variant);

struct RegLoss {
  double value = 0.0;
  Mat grad_a;
};

// Row-diversity regularizer: summed per-column population variance over the
// rows of A. Zero iff all rows are equal; invariant to adding the same row
// vector to every row.
RegLoss reg_loss(const Mat& a);

struct LossOutput {
  double value = 0.0;
  Mat grad_a;
  double l_rank = 0.0;
  double l_reg = 0.0;
  double omega_d = 1.0;
  double lambda_t = 0.0;
};

// (1 - lambda_tilde) * L_rank + lambda_tilde * L_reg, gradient included.
LossOutput final_loss(const Mat& a, const LabelInstance& inst, const LossConfig& cfg);

}  // namespace sdl
