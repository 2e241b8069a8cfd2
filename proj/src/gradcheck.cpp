#include "sdl/gradcheck.hpp"

#include "sdl/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sdl {

Mat central_diff(const std::function<double(const Mat&)>& f, const Mat& at,
                 double step) {
  if (!(step > 0.0)) throw ValidationError("finite difference step must be > 0");
  Mat grad(at.rows(), at.cols());
  Mat x = at;
  for (Eigen::Index i = 0; i < at.rows(); ++i) {
    for (Eigen::Index j = 0; j < at.cols(); ++j) {
      const double keep = x(i, j);
      x(i, j) = keep + step;
      const double hi = f(x);
      x(i, j) = keep - step;
      const double lo = f(x);
      x(i, j) = keep;
      grad(i, j) = (hi - lo) / (2.0 * step);
    }
  }
  return grad;
}

Vec central_diff(const std::function<double(const Vec&)>& f, const Vec& at,
                 double step) {
  if (!(step > 0.0)) throw ValidationError("finite difference step must be > 0");
  Vec grad(at.size());
  Vec x = at;
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + step;
    const double hi = f(x);
    x[i] = keep - step;
    const double lo = f(x);
    x[i] = keep;
    grad[i] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

double relative_error(const Mat& analytic, const Mat& numeric) {
  if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols()) {
    throw ValidationError("gradient shapes differ");
  }
  const double denom =
      std::max(analytic.cwiseAbs().maxCoeff() + numeric.cwiseAbs().maxCoeff(), 1e-8);
  return (analytic - numeric).cwiseAbs().maxCoeff() / denom;
}

double relative_error(const Vec& analytic, const Vec& numeric) {
  if (analytic.size() != numeric.size()) {
    throw ValidationError("gradient shapes differ");
  }
  const double denom =
      std::max(analytic.cwiseAbs().maxCoeff() + numeric.cwiseAbs().maxCoeff(), 1e-8);
  return (analytic - numeric).cwiseAbs().maxCoeff() / denom;
}

namespace {

struct GridCell {
  int m, d_w, n_pos, n_neg;
};

constexpr int kHeadDf = 8;
constexpr int kMaxDraws = 100;

struct Instance {
  ModelParams params;
  Vec x;
  Mat a;  // forward(params, x)
  LabelInstance inst;
  LossConfig cfg;
};

Vec unit_gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    const double norm = v.norm();
    if (norm > 1e-8) return v / norm;
  }
}

// The max family is piecewise linear in A: central differences straddling an
// argmax switch measure the wrong branch. The margin covers both the direct
// A perturbation and the one induced through W (scaled by |x|). l2norm is
// smooth except at ||A t|| = 0, checked separately.
bool degenerate(const Instance& in, double step) {
  const double reach = 10.0 * step * std::max(1.0, in.x.cwiseAbs().maxCoeff());
  auto tag_bad = [&](const Vec& t) {
    const Vec s = in.a * t;
    if (in.cfg.variant == LossVariant::kL2Norm) {
      return s.norm() < std::max(1e-3, 100.0 * reach);
    }
    if (s.size() < 2) return false;
    double top = s[0], second = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 1; r < s.size(); ++r) {
      if (s[r] > top) {
        second = top;
        top = s[r];
      } else if (s[r] > second) {
        second = s[r];
      }
    }
    return top - second < reach;
  };
  for (Eigen::Index j = 0; j < in.inst.positives.rows(); ++j) {
    if (tag_bad(in.inst.positives.row(j).transpose())) return true;
  }
  for (Eigen::Index k = 0; k < in.inst.negatives.rows(); ++k) {
    if (tag_bad(in.inst.negatives.row(k).transpose())) return true;
  }
  return false;
}

Instance draw_instance(LossVariant variant, const GridCell& cell, double lambda,
                       bool use_sdw, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Instance in;
  in.cfg.variant = variant;
  in.cfg.lambda = lambda;
  in.cfg.use_sdw = use_sdw;
  in.cfg.m = cell.m;

  in.params = init_params(cell.m, cell.d_w, kHeadDf, rng(), variant);
  in.x = Vec(kHeadDf);
  for (int i = 0; i < kHeadDf; ++i) in.x[i] = gauss(rng);
  in.a = forward(in.params, in.x);

  in.inst.positives = Mat(cell.n_pos, cell.d_w);
  for (int j = 0; j < cell.n_pos; ++j) {
    in.inst.positives.row(j) = unit_gaussian(rng, cell.d_w).transpose();
  }
  in.inst.negatives = Mat(cell.n_neg, cell.d_w);
  for (int k = 0; k < cell.n_neg; ++k) {
    in.inst.negatives.row(k) = unit_gaussian(rng, cell.d_w).transpose();
  }
  return in;
}

}  // namespace

GradCheckReport run_gradcheck(const GradCheckConfig& cfg) {
  if (cfg.instances < 1) throw ValidationError("instances must be >= 1");
  if (!(cfg.step > 0.0)) throw ValidationError("step must be > 0");
  if (!(cfg.tol > 0.0)) throw ValidationError("tol must be > 0");
  if (cfg.variants.empty()) throw ValidationError("no variants to check");

  std::vector<GridCell> cells;
  for (int m : {1, 3, 7}) {
    for (int d_w : {8, 32}) {
      for (int n_pos : {1, 2, 5}) {
        for (int n_neg : {3, 20}) cells.push_back({m, d_w, n_pos, n_neg});
      }
    }
  }
  const double lambdas[] = {0.0, 0.1, 0.3, 1.0, 5.0};

  GradCheckReport report;
  auto stat_of = [&](const std::string& name) -> GradCheckStat& {
    for (auto& s : report.stats) {
      if (s.name == name) return s;
    }
    report.stats.push_back({name, 0.0, 0});
    return report.stats.back();
  };
  auto record = [&](const std::string& name, double err) {
    auto& s = stat_of(name);
    s.max_rel_err = std::max(s.max_rel_err, err);
    s.checked += 1;
  };

  for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
    const LossVariant variant = cfg.variants[v];
    const std::string prefix = to_string(variant) + "/";
    for (int i = 0; i < cfg.instances; ++i) {
      GridCell cell = cells[static_cast<std::size_t>(i) % cells.size()];
      if (variant == LossVariant::kFast0Tag) cell.m = 1;
      const double lambda = lambdas[static_cast<std::size_t>(i) % 5];
      const bool use_sdw = (i % 2) == 0;

      Instance in;
      int attempt = 0;
      for (;; ++attempt) {
        if (attempt >= kMaxDraws) {
          throw ValidationError("could not draw a non-degenerate check instance");
        }
        in = draw_instance(variant, cell, lambda, use_sdw,
                           mix_seed(cfg.seed, (v * 1000003ULL +
                                               static_cast<std::uint64_t>(i)) *
                                                  101ULL +
                                              static_cast<std::uint64_t>(attempt)));
        if (!degenerate(in, cfg.step)) break;
        report.resampled_degenerate += 1;
      }

      const RankLoss rank = rank_loss(in.a, in.inst, use_sdw, variant);
      record(prefix + "rank_A",
             relative_error(rank.grad_a,
                            central_diff(
                                [&](const Mat& a) {
                                  return rank_loss(a, in.inst, use_sdw, variant).value;
                                },
                                in.a, cfg.step)));

      const RegLoss reg = reg_loss(in.a);
      record(prefix + "reg_A",
             relative_error(reg.grad_a,
                            central_diff([](const Mat& a) { return reg_loss(a).value; },
                                         in.a, cfg.step)));

      const LossOutput full = final_loss(in.a, in.inst, in.cfg);
      record(prefix + "final_A",
             relative_error(full.grad_a,
                            central_diff(
                                [&](const Mat& a) {
                                  return final_loss(a, in.inst, in.cfg).value;
                                },
                                in.a, cfg.step)));

      const HeadGrads head = backward(in.params, in.x, full.grad_a);
      ModelParams probe = in.params;
      record(prefix + "head_W",
             relative_error(head.grad_w,
                            central_diff(
                                [&](const Mat& w) {
                                  probe.w = w;
                                  return final_loss(forward(probe, in.x), in.inst, in.cfg)
                                      .value;
                                },
                                in.params.w, cfg.step)));
      probe = in.params;
      record(prefix + "head_b",
             relative_error(head.grad_b,
                            central_diff(
                                [&](const Vec& b) {
                                  probe.b = b;
                                  return final_loss(forward(probe, in.x), in.inst, in.cfg)
                                      .value;
                                },
                                in.params.b, cfg.step)));
    }
  }

  for (const auto& s : report.stats) report.worst = std::max(report.worst, s.max_rel_err);
  report.pass = report.worst <= cfg.tol;
  return report;
}

}  // namespace sdl
