#include "doctest.h"

#include "sdl/gradcheck.hpp"

#include <cmath>

using namespace sdl;

TEST_CASE("central differences recover known derivatives") {
  // f(X) = sum x_ij^2 has gradient 2X
  Mat x(2, 3);
  x << 1, -2, 3,
       0.5, 0, -1;
  const Mat g = central_diff([](const Mat& m) { return m.squaredNorm(); }, x, 1e-5);
  CHECK((g - 2.0 * x).cwiseAbs().maxCoeff() < 1e-9);

  // vector overload, f(v) = sum sin(v_i)
  Vec v(3);
  v << 0.0, 1.0, -2.0;
  const Vec gv = central_diff(
      [](const Vec& w) { return std::sin(w[0]) + std::sin(w[1]) + std::sin(w[2]); }, v,
      1e-6);
  for (int i = 0; i < 3; ++i) CHECK(gv[i] == doctest::Approx(std::cos(v[i])).epsilon(1e-8));
}

TEST_CASE("relative error behaves at both scales") {
  Mat a(1, 2), b(1, 2);
  a << 100.0, 0.0;
  b << 101.0, 0.0;
  CHECK(relative_error(a, b) == doctest::Approx(1.0 / 201.0).epsilon(1e-12));

  // both tiny: denominator floors at 1e-8 instead of exploding
  a << 1e-12, 0.0;
  b << 0.0, 0.0;
  CHECK(relative_error(a, b) == doctest::Approx(1e-4).epsilon(1e-9));

  CHECK(relative_error(a, a) == 0.0);
}

TEST_CASE("a reduced sweep of analytic gradients passes finite differences") {
  GradCheckConfig cfg;
  cfg.instances = 40;  // enough to leave the first M=1 block of the cell grid
  cfg.seed = 5;
  const auto report = run_gradcheck(cfg);
  CHECK(report.pass);
  CHECK(report.worst < cfg.tol);
  // rank/reg/final over A plus W and b through the head, per variant
  CHECK(report.stats.size() == 5 * cfg.variants.size());
  for (const auto& s : report.stats) {
    CHECK(s.checked == cfg.instances);
    CHECK(s.max_rel_err <= report.worst);
  }
}

TEST_CASE("the sweep is deterministic and seed-sensitive") {
  GradCheckConfig cfg;
  cfg.instances = 6;
  cfg.seed = 9;
  const auto r1 = run_gradcheck(cfg);
  const auto r2 = run_gradcheck(cfg);
  CHECK(r1.worst == r2.worst);
  CHECK(r1.resampled_degenerate == r2.resampled_degenerate);

  cfg.seed = 10;
  const auto r3 = run_gradcheck(cfg);
  CHECK(r3.pass);
  CHECK(r1.worst != r3.worst);
}

TEST_CASE("single-variant runs only report that variant") {
  GradCheckConfig cfg;
  cfg.instances = 4;
  cfg.variants = {LossVariant::kL2Norm};
  const auto report = run_gradcheck(cfg);
  CHECK(report.stats.size() == 5);
  for (const auto& s : report.stats) {
    CHECK(s.name.rfind("l2norm/", 0) == 0);
  }
  CHECK(report.pass);
}
