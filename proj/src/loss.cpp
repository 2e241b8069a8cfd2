#include "sdl/loss.hpp"

#include <cmath>
#include <cstdlib>

namespace sdl {

LossVariant variant_from_string(std::string_view name) {
  if (name == "max") return LossVariant::kMax;
  if (name == "l2norm") return LossVariant::kL2Norm;
  if (name == "fast0tag") return LossVariant::kFast0Tag;
  throw ValidationError("unknown loss variant '" + std::string(name) +
                        "', expected max, l2norm or fast0tag");
}

std::string to_string(LossVariant v) {
  switch (v) {
    case LossVariant::kMax: return "max";
    case LossVariant::kL2Norm: return "l2norm";
    case LossVariant::kFast0Tag: return "fast0tag";
  }
  std::abort();
}

void validate(const LossConfig& cfg) {
  if (cfg.m < 1) {
    throw ValidationError("embedding rows m must be >= 1, got " + std::to_string(cfg.m));
  }
  if (!(cfg.lambda >= 0.0)) {
    throw ValidationError("lambda must be >= 0");
  }
  if (cfg.variant == LossVariant::kFast0Tag && cfg.m != 1) {
    throw ValidationError("fast0tag requires m = 1, got m = " + std::to_string(cfg.m));
  }
}

double softplus(double u) {
  return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}

double sigmoid(double u) {
  if (u >= 0.0) {
    return 1.0 / (1.0 + std::exp(-u));
  }
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double lambda_tilde(double lambda, Eigen::Index n_negatives) {
  if (n_negatives < 1) {
    throw ValidationError("lambda_tilde needs at least one negative");
  }
  return std::min(1.0, lambda / static_cast<double>(n_negatives));
}

ScoreResult score(const Mat& a, const Vec& t) {
  if (a.rows() < 1) {
    throw ValidationError("score needs a non-empty embedding matrix");
  }
  if (a.cols() != t.size()) {
    throw ValidationError("embedding has " + std::to_string(a.cols()) +
                          " columns, tag vector has " + std::to_string(t.size()));
  }
  const Vec s = a * t;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < s.size(); ++i) {
    if (s[i] > s[best]) best = i;
  }
  return {s[best], best};
}

double pair_margin(const Mat& a, const Vec& p, const Vec& n) {
  return score(a, n).value - score(a, p).value;
}

double sdw(const Mat& positives) {
  if (positives.rows() < 1) {
    throw ValidationError("diversity weight needs at least one positive");
  }
  const Eigen::RowVectorXd mean = positives.colwise().mean();
  return 1.0 + (positives.rowwise() - mean).squaredNorm() /
                   static_cast<double>(positives.rows());
}

namespace {

struct TagScore {
  double value = 0.0;
  Eigen::Index row = 0;  // argmax row (max family)
  Vec at;                // A t, kept for the l2norm gradient
};

TagScore score_tag(const Mat& a, const Eigen::Ref<const Eigen::RowVectorXd>& t,
                   LossVariant variant) {
  TagScore out;
  out.at = a * t.transpose();
  if (variant == LossVariant::kL2Norm) {
    out.value = out.at.norm();
    return out;
  }
  for (Eigen::Index i = 1; i < out.at.size(); ++i) {
    if (out.at[i] > out.at[out.row]) out.row = i;
  }
  out.value = out.at[out.row];
  return out;
}

}  // namespace

RankLoss rank_loss_over(const Mat& a, const Mat& vecs, const std::vector<int>& pos,
                        const std::vector<int>& neg, bool use_sdw, LossVariant variant) {
  if (pos.empty() || neg.empty()) {
    throw ValidationError("ranking loss needs at least one positive and one negative");
  }
  if (a.cols() != vecs.cols()) {
    throw ValidationError("embedding has " + std::to_string(a.cols()) +
                          " columns, word vectors have " + std::to_string(vecs.cols()));
  }
  if (variant == LossVariant::kFast0Tag && a.rows() != 1) {
    throw ValidationError("fast0tag requires a single-row embedding matrix");
  }
  for (int i : pos) {
    if (i < 0 || i >= vecs.rows()) throw ValidationError("positive index out of range");
  }
  for (int i : neg) {
    if (i < 0 || i >= vecs.rows()) throw ValidationError("negative index out of range");
  }

  const auto np = static_cast<Eigen::Index>(pos.size());
  const auto nn = static_cast<Eigen::Index>(neg.size());

  RankLoss out;
  out.grad_a = Mat::Zero(a.rows(), a.cols());

  // omega_d is a statistic of the positive set alone.
  {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(vecs.cols());
    for (int i : pos) mean += vecs.row(i);
    mean /= static_cast<double>(np);
    double ssq = 0.0;
    for (int i : pos) ssq += (vecs.row(i) - mean).squaredNorm();
    out.omega_d = 1.0 + ssq / static_cast<double>(np);
  }
  const double weight = use_sdw ? out.omega_d : 1.0;
  const double scale = weight / static_cast<double>(np * nn);

  std::vector<TagScore> ps(pos.size()), ns(neg.size());
  for (std::size_t j = 0; j < pos.size(); ++j) ps[j] = score_tag(a, vecs.row(pos[j]), variant);
  for (std::size_t k = 0; k < neg.size(); ++k) ns[k] = score_tag(a, vecs.row(neg[k]), variant);

  // Each tag's gradient direction is fixed across pairs, so accumulate one
  // scalar coefficient per tag and apply it once.
  std::vector<double> coef_p(pos.size(), 0.0), coef_n(neg.size(), 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < pos.size(); ++j) {
    for (std::size_t k = 0; k < neg.size(); ++k) {
      const double u = ns[k].value - ps[j].value;
      total += softplus(u);
      const double w = sigmoid(u) * scale;
      coef_n[k] += w;
      coef_p[j] -= w;
    }
  }
  out.value = scale * total;

  auto apply = [&](const TagScore& s, const Eigen::Ref<const Eigen::RowVectorXd>& t,
                   double c) {
    if (c == 0.0) return;
    if (variant == LossVariant::kL2Norm) {
      if (s.value > 0.0) out.grad_a += (c / s.value) * s.at * t;
      // ||A t|| = 0: flat subgradient
    } else {
      out.grad_a.row(s.row) += c * t;
    }
  };
  for (std::size_t j = 0; j < pos.size(); ++j) apply(ps[j], vecs.row(pos[j]), coef_p[j]);
  for (std::size_t k = 0; k < neg.size(); ++k) apply(ns[k], vecs.row(neg[k]), coef_n[k]);
  return out;
}

RankLoss rank_loss(const Mat& a, const LabelInstance& inst, bool use_sdw,
                   LossVariant variant) {
  if (inst.positives.rows() < 1 || inst.negatives.rows() < 1) {
    throw ValidationError("ranking loss needs at least one positive and one negative");
  }
  if (inst.positives.cols() != inst.negatives.cols()) {
    throw ValidationError("positive and negative vectors disagree on dimension");
  }
  Mat vecs(inst.positives.rows() + inst.negatives.rows(), inst.positives.cols());
  vecs.topRows(inst.positives.rows()) = inst.positives;
  vecs.bottomRows(inst.negatives.rows()) = inst.negatives;
  std::vector<int> pos(static_cast<std::size_t>(inst.positives.rows()));
  std::vector<int> neg(static_cast<std::size_t>(inst.negatives.rows()));
  for (std::size_t j = 0; j < pos.size(); ++j) pos[j] = static_cast<int>(j);
  for (std::size_t k = 0; k < neg.size(); ++k)
    neg[k] = static_cast<int>(pos.size() + k);
  return rank_loss_over(a, vecs, pos, neg, use_sdw, variant);
}

RegLoss reg_loss(const Mat& a) {
  if (a.rows() < 1) {
    throw ValidationError("regularizer needs a non-empty matrix");
  }
  RegLoss out;
  const double m = static_cast<double>(a.rows());
  const Eigen::RowVectorXd mean = a.colwise().mean();
  const Mat centered = a.rowwise() - mean;
  out.value = centered.squaredNorm() / m;
  out.grad_a = (2.0 / m) * centered;
  return out;
}

LossOutput final_loss(const Mat& a, const LabelInstance& inst, const LossConfig& cfg) {
  validate(cfg);
  if (a.rows() != cfg.m) {
    throw ValidationError("embedding has " + std::to_string(a.rows()) +
                          " rows, config expects m = " + std::to_string(cfg.m));
  }
  const RankLoss rank = rank_loss(a, inst, cfg.use_sdw, cfg.variant);
  const RegLoss reg = reg_loss(a);
  const double lt = lambda_tilde(cfg.lambda, inst.negatives.rows());

  LossOutput out;
  out.l_rank = rank.value;
  out.l_reg = reg.value;
  out.omega_d = rank.omega_d;
  out.lambda_t = lt;
  out.value = (1.0 - lt) * rank.value + lt * reg.value;
  out.grad_a = (1.0 - lt) * rank.grad_a + lt * reg.grad_a;
  if (!std::isfinite(out.value) || !out.grad_a.allFinite()) {
    throw NumericError("non-finite loss or gradient");
  }
  return out;
}

}  // namespace sdl
