#include "doctest.h"

#include "oracles.hpp"
#include "sdl/loss.hpp"

#include <cmath>
#include <random>

using namespace sdl;

namespace {

Mat random_mat(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  }
  return m;
}

Mat random_unit_rows(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  Mat m = random_mat(rng, rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) m.row(i) /= m.row(i).norm();
  return m;
}

}  // namespace

TEST_CASE("softplus hits its anchors and never overflows") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(softplus(-1.0) == doctest::Approx(0.3132616875182228).epsilon(1e-12));
  CHECK(softplus(1000.0) == doctest::Approx(1000.0));
  CHECK(softplus(-1000.0) == doctest::Approx(0.0));
  CHECK(std::isfinite(softplus(5e307)));
}

TEST_CASE("sigmoid is symmetric and saturates safely") {
  CHECK(sigmoid(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sigmoid(3.0) + sigmoid(-3.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sigmoid(1000.0) == doctest::Approx(1.0));
  CHECK(sigmoid(-1000.0) == doctest::Approx(0.0));
}

TEST_CASE("variant names round-trip") {
  for (auto v : {LossVariant::kMax, LossVariant::kL2Norm, LossVariant::kFast0Tag}) {
    CHECK(variant_from_string(to_string(v)) == v);
  }
  CHECK_THROWS_AS(variant_from_string("avg"), ValidationError);
}

TEST_CASE("config validation") {
  LossConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.m = 0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg.m = 7;
  cfg.lambda = -0.1;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg.lambda = 0.3;
  cfg.variant = LossVariant::kFast0Tag;
  CHECK_THROWS_AS(validate(cfg), ValidationError);  // needs m = 1
  cfg.m = 1;
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("score takes the best row, lowest index on ties") {
  Mat a(2, 3);
  a << 1, 0, 0,
       0, 1, 0;
  Vec t(3);
  t << 0, 1, 0;
  auto r = score(a, t);
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(r.row == 1);

  const auto zero = score(Mat::Zero(3, 3), t);
  CHECK(zero.value == doctest::Approx(0.0));
  CHECK(zero.row == 0);  // all rows tie

  Vec bad(2);
  bad << 1, 0;
  CHECK_THROWS_AS(score(a, bad), ValidationError);
}

TEST_CASE("score equals the loop-computed maximum on random instances") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    const Mat a = random_mat(rng, 3, 4);
    Vec t = random_mat(rng, 1, 4).row(0).transpose();
    t /= t.norm();
    CHECK(score(a, t).value ==
          doctest::Approx((double)oracle::score_ld(a, t, false)).epsilon(1e-12));
  }
}

TEST_CASE("pair margin composes two scores") {
  std::mt19937_64 rng(11);
  const Mat a = random_mat(rng, 3, 5);
  const Mat vs = random_unit_rows(rng, 2, 5);
  const Vec p = vs.row(0).transpose();
  const Vec n = vs.row(1).transpose();
  CHECK(pair_margin(a, p, n) ==
        doctest::Approx(score(a, n).value - score(a, p).value).epsilon(1e-15));
  CHECK(pair_margin(a, p, p) == doctest::Approx(0.0));

  // A = p^T single row: the orthogonal negative scores 0, the margin is -1
  Vec orth(5);
  orth << 0, 0, 0, 0, 1;
  Vec p5(5);
  p5 << 1, 0, 0, 0, 0;
  CHECK(pair_margin(p5.transpose(), p5, orth) == doctest::Approx(-1.0));
}

TEST_CASE("diversity weight closed forms") {
  Mat single(1, 4);
  single << 0.3, -0.2, 0.9, 0.1;
  CHECK(sdw(single) == doctest::Approx(1.0).epsilon(1e-12));

  Mat repeated(2, 4);
  repeated.row(0) = single.row(0);
  repeated.row(1) = single.row(0);
  CHECK(sdw(repeated) == doctest::Approx(1.0).epsilon(1e-12));

  Mat pair(2, 2);
  pair << 1, 0,
         -1, 0;
  CHECK(sdw(pair) == doctest::Approx(2.0).epsilon(1e-12));

  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const Mat p = random_unit_rows(rng, 4, 6);
    CHECK(sdw(p) == doctest::Approx((double)oracle::sdw_ld(p)).epsilon(1e-12));
    CHECK(sdw(p) >= 1.0);
  }
}

TEST_CASE("rank loss anchors") {
  SUBCASE("all scores equal gives ln 2 per pair") {
    LabelInstance inst;
    inst.positives = Mat(1, 2);
    inst.positives << 1, 0;
    inst.negatives = Mat(1, 2);
    inst.negatives << 0, 1;
    const auto r = rank_loss(Mat::Zero(2, 2), inst, false, LossVariant::kMax);
    CHECK(r.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // u = 0: sigma = 1/2, routed through row 0 of the zero matrix
    CHECK(r.grad_a(0, 0) == doctest::Approx(0.5 * (0.0 - 1.0)).epsilon(1e-12));
    CHECK(r.grad_a(0, 1) == doctest::Approx(0.5 * (1.0 - 0.0)).epsilon(1e-12));
    CHECK(r.grad_a.row(1).norm() == doctest::Approx(0.0));
  }
  SUBCASE("perfectly placed single direction") {
    LabelInstance inst;
    inst.positives = Mat(1, 2);
    inst.positives << 1, 0;
    inst.negatives = Mat(1, 2);
    inst.negatives << 0, 1;
    Mat a = inst.positives;  // scores: p -> 1, n -> 0, u = -1
    const auto r = rank_loss(a, inst, false, LossVariant::kMax);
    CHECK(r.value == doctest::Approx(0.3132616875182228).epsilon(1e-12));
  }
}

TEST_CASE("rank loss matches a high-precision brute-force reference") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 30; ++i) {
    const int m = 1 + (int)(rng() % 4);
    const int d = 3 + (int)(rng() % 6);
    const int np = 1 + (int)(rng() % 4);
    const int nn = 1 + (int)(rng() % 6);
    const Mat a = random_mat(rng, m, d);
    LabelInstance inst{random_unit_rows(rng, np, d), random_unit_rows(rng, nn, d)};
    const bool use_sdw = i % 2 == 0;
    for (auto variant : {LossVariant::kMax, LossVariant::kL2Norm}) {
      const auto got = rank_loss(a, inst, use_sdw, variant);
      const double want = oracle::rank_loss_value(a, inst.positives, inst.negatives,
                                                  use_sdw, variant == LossVariant::kL2Norm);
      CHECK(got.value == doctest::Approx(want).epsilon(1e-10));
      CHECK(got.omega_d == doctest::Approx((double)oracle::sdw_ld(inst.positives))
                               .epsilon(1e-10));
    }
  }
}

TEST_CASE("indexed rank loss equals the materialized form") {
  std::mt19937_64 rng(55);
  const Mat vocab = random_unit_rows(rng, 12, 6);
  const std::vector<int> pos{2, 5, 9};
  const std::vector<int> neg{0, 1, 3, 4, 6, 7, 8, 10, 11};
  const Mat a = random_mat(rng, 3, 6);

  LabelInstance inst;
  inst.positives = Mat(3, 6);
  inst.negatives = Mat(9, 6);
  for (std::size_t j = 0; j < pos.size(); ++j) inst.positives.row((Eigen::Index)j) = vocab.row(pos[j]);
  for (std::size_t k = 0; k < neg.size(); ++k) inst.negatives.row((Eigen::Index)k) = vocab.row(neg[k]);

  for (auto variant : {LossVariant::kMax, LossVariant::kL2Norm}) {
    const auto direct = rank_loss(a, inst, true, variant);
    const auto indexed = rank_loss_over(a, vocab, pos, neg, true, variant);
    CHECK(indexed.value == doctest::Approx(direct.value).epsilon(1e-14));
    CHECK((indexed.grad_a - direct.grad_a).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(rank_loss_over(a, vocab, {}, neg, true, LossVariant::kMax),
                  ValidationError);
  CHECK_THROWS_AS(rank_loss_over(a, vocab, {12}, neg, true, LossVariant::kMax),
                  ValidationError);
}

TEST_CASE("row permutation leaves the max-variant losses unchanged") {
  std::mt19937_64 rng(31);
  const Mat a = random_mat(rng, 4, 5);
  LabelInstance inst{random_unit_rows(rng, 2, 5), random_unit_rows(rng, 3, 5)};

  Mat perm(4, 5);
  perm.row(0) = a.row(2);
  perm.row(1) = a.row(0);
  perm.row(2) = a.row(3);
  perm.row(3) = a.row(1);

  Vec t = inst.positives.row(0).transpose();
  CHECK(score(perm, t).value == doctest::Approx(score(a, t).value).epsilon(1e-14));
  CHECK(rank_loss(perm, inst, true, LossVariant::kMax).value ==
        doctest::Approx(rank_loss(a, inst, true, LossVariant::kMax).value).epsilon(1e-12));
  CHECK(reg_loss(perm).value == doctest::Approx(reg_loss(a).value).epsilon(1e-12));
  LossConfig cfg;
  cfg.m = 4;
  CHECK(final_loss(perm, inst, cfg).value ==
        doctest::Approx(final_loss(a, inst, cfg).value).epsilon(1e-12));
}

TEST_CASE("moving a negative closer to the scoring direction raises the loss") {
  // Orthogonal construction: A has one direction, the positive is fixed, and
  // the negative rotates toward that direction.
  Mat a(1, 3);
  a << 1, 0, 0;
  LabelInstance inst;
  inst.positives = Mat(1, 3);
  inst.positives << 0, 1, 0;
  inst.negatives = Mat(1, 3);

  double prev = -1.0;
  for (double angle : {0.0, 0.3, 0.6, 0.9, 1.2}) {
    inst.negatives << std::sin(angle), 0, std::cos(angle);
    const double value = rank_loss(a, inst, false, LossVariant::kMax).value;
    CHECK(value > prev);
    prev = value;
  }
}

TEST_CASE("raising a positive's score lowers the loss") {
  Mat a(1, 3);
  a << 1, 0, 0;
  LabelInstance inst;
  inst.negatives = Mat(1, 3);
  inst.negatives << 0, 1, 0;
  inst.positives = Mat(1, 3);

  double prev = 2.0;
  for (double angle : {0.0, 0.3, 0.6, 0.9, 1.2}) {
    inst.positives << std::sin(angle), 0, std::cos(angle);
    const double value = rank_loss(a, inst, false, LossVariant::kMax).value;
    CHECK(value < prev);
    prev = value;
  }
}

TEST_CASE("replicating positives and negatives cancels in the normalizer") {
  std::mt19937_64 rng(17);
  const Mat a = random_mat(rng, 3, 4);
  LabelInstance inst{random_unit_rows(rng, 2, 4), random_unit_rows(rng, 3, 4)};

  LabelInstance doubled;
  doubled.positives = Mat(4, 4);
  doubled.positives << inst.positives, inst.positives;
  doubled.negatives = Mat(9, 4);
  doubled.negatives << inst.negatives, inst.negatives, inst.negatives;

  for (bool use_sdw : {false, true}) {
    CHECK(rank_loss(a, doubled, use_sdw, LossVariant::kMax).value ==
          doctest::Approx(rank_loss(a, inst, use_sdw, LossVariant::kMax).value)
              .epsilon(1e-12));
  }
}

TEST_CASE("fast0tag is the single-row max variant") {
  std::mt19937_64 rng(23);
  const Mat a = random_mat(rng, 1, 5);
  LabelInstance inst{random_unit_rows(rng, 2, 5), random_unit_rows(rng, 4, 5)};
  const auto fast = rank_loss(a, inst, false, LossVariant::kFast0Tag);
  const auto max = rank_loss(a, inst, false, LossVariant::kMax);
  CHECK(fast.value == max.value);
  CHECK((fast.grad_a - max.grad_a).cwiseAbs().maxCoeff() == 0.0);

  const Mat wide = random_mat(rng, 2, 5);
  CHECK_THROWS_AS(rank_loss(wide, inst, false, LossVariant::kFast0Tag), ValidationError);
}

TEST_CASE("l2norm variant handles the zero-matrix subgradient") {
  LabelInstance inst;
  inst.positives = Mat(1, 2);
  inst.positives << 1, 0;
  inst.negatives = Mat(1, 2);
  inst.negatives << 0, 1;
  const auto r = rank_loss(Mat::Zero(2, 2), inst, false, LossVariant::kL2Norm);
  CHECK(r.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(r.grad_a.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("regularizer closed forms") {
  Mat equal_rows(3, 2);
  equal_rows << 1, 2,
                1, 2,
                1, 2;
  auto r = reg_loss(equal_rows);
  CHECK(r.value == doctest::Approx(0.0));
  CHECK(r.grad_a.cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  Mat pair(2, 1);
  pair << 1,
         -1;
  r = reg_loss(pair);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.grad_a(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.grad_a(1, 0) == doctest::Approx(-1.0).epsilon(1e-12));

  CHECK(reg_loss(Mat::Random(1, 8)).value == doctest::Approx(0.0));
}

TEST_CASE("regularizer matches the per-column variance reference") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 10; ++i) {
    const Mat a = random_mat(rng, 7, 30);
    CHECK(reg_loss(a).value == doctest::Approx(oracle::reg_loss_value(a)).epsilon(1e-12));
  }
}

TEST_CASE("regularizer is translation invariant across rows") {
  std::mt19937_64 rng(43);
  const Mat a = random_mat(rng, 5, 6);
  const Mat shift = random_mat(rng, 1, 6);
  Mat shifted = a;
  shifted.rowwise() += shift.row(0);
  CHECK(reg_loss(shifted).value == doctest::Approx(reg_loss(a).value).epsilon(1e-10));
}

TEST_CASE("lambda is rescaled by the negative count and clamped") {
  CHECK(lambda_tilde(0.3, 3) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(lambda_tilde(0.0, 10) == doctest::Approx(0.0));
  CHECK(lambda_tilde(5.0, 3) == doctest::Approx(1.0));  // clamp
  CHECK_THROWS_AS(lambda_tilde(0.3, 0), ValidationError);
}

TEST_CASE("final loss is the announced convex combination") {
  std::mt19937_64 rng(59);
  const Mat a = random_mat(rng, 3, 4);
  LabelInstance inst{random_unit_rows(rng, 2, 4), random_unit_rows(rng, 3, 4)};

  LossConfig cfg;
  cfg.m = 3;
  cfg.lambda = 0.3;
  const auto out = final_loss(a, inst, cfg);
  const double lt = 0.3 / 3.0;
  CHECK(out.lambda_t == doctest::Approx(lt).epsilon(1e-15));
  CHECK(out.value ==
        doctest::Approx((1 - lt) * out.l_rank + lt * out.l_reg).epsilon(1e-12));
  CHECK(out.l_rank ==
        doctest::Approx(rank_loss(a, inst, true, LossVariant::kMax).value).epsilon(1e-12));
  CHECK(out.l_reg == doctest::Approx(reg_loss(a).value).epsilon(1e-12));
  CHECK(out.omega_d >= 1.0);

  cfg.lambda = 0.0;
  CHECK(final_loss(a, inst, cfg).value == doctest::Approx(out.l_rank).epsilon(1e-12));

  cfg.lambda = 100.0;  // clamped to pure regularization
  CHECK(final_loss(a, inst, cfg).value == doctest::Approx(out.l_reg).epsilon(1e-12));

  cfg.m = 2;  // shape mismatch with the 3-row matrix
  CHECK_THROWS_AS(final_loss(a, inst, cfg), ValidationError);
}

TEST_CASE("analytic gradients agree with test-local finite differences") {
  std::mt19937_64 rng(67);
  for (int i = 0; i < 5; ++i) {
    const Mat a = random_mat(rng, 3, 4);
    LabelInstance inst{random_unit_rows(rng, 2, 4), random_unit_rows(rng, 4, 4)};
    LossConfig cfg;
    cfg.m = 3;

    const auto out = final_loss(a, inst, cfg);
    const Mat fd = oracle::fd_grad(
        [&](const Mat& x) { return final_loss(x, inst, cfg).value; }, a, 1e-6);
    const double denom =
        std::max(out.grad_a.cwiseAbs().maxCoeff() + fd.cwiseAbs().maxCoeff(), 1e-8);
    CHECK((out.grad_a - fd).cwiseAbs().maxCoeff() / denom < 1e-4);
  }
}
