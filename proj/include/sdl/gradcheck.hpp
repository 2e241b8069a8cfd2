#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sdl/loss.hpp"

namespace sdl {

// Central finite differences of a scalar function over every entry of `at`.
Mat central_diff(const std::function<double(const Mat&)>& f, const Mat& at,
                 double step);
Vec central_diff(const std::function<double(const Vec&)>& f, const Vec& at,
                 double step);

// inf-norm relative error; near-absolute once both gradients are tiny so
// that zero-gradient cases compare cleanly.
double relative_error(const Mat& analytic, const Mat& numeric);
double relative_error(const Vec& analytic, const Vec& numeric);

struct GradCheckConfig {
  int instances = 100;  // per variant
  double step = 1e-5;
  double tol = 1e-4;
  std::uint64_t seed = 0;
  std::vector<LossVariant> variants = {LossVariant::kMax, LossVariant::kL2Norm,
                                       LossVariant::kFast0Tag};
};

struct GradCheckStat {
  std::string name;  // e.g. "max/rank_A"
  double max_rel_err = 0.0;
  long checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckStat> stats;
  long resampled_degenerate = 0;  // near-tie instances replaced by fresh draws
  double worst = 0.0;
  bool pass = false;
};

// Seeded instances over M in {1,3,7}, d_w in {8,32}, |P| in {1,2,5},
// |Pbar| in {3,20}: checks the analytic gradients of the ranking,
// regularization and combined losses w.r.t. A, and of the combined loss
// through the linear head w.r.t. W and b, against central differences.
// Instances whose argmax sits within a step-scaled margin of a tie are
// redrawn so the finite differences stay on one side of the kink.
GradCheckReport run_gradcheck(const GradCheckConfig& cfg);

}  // namespace sdl
