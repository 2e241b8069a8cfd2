#pragma once

// Brute-force reference implementations, written straight from the defining
// formulas and kept independent of the library code they check. Everything
// here favors clarity over speed.

#include <cmath>
#include <cstddef>
#include <vector>

#include "sdl/common.hpp"

namespace oracle {

inline long double softplus_ld(long double u) {
  const long double a = u > 0.0L ? u : 0.0L;
  return a + std::log1p(std::exp(-std::abs(u)));
}

inline long double score_ld(const sdl::Mat& a, const sdl::Vec& t, bool l2) {
  if (l2) {
    long double ssq = 0.0L;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      long double dot = 0.0L;
      for (Eigen::Index c = 0; c < a.cols(); ++c) dot += (long double)a(r, c) * t[c];
      ssq += dot * dot;
    }
    return std::sqrt(ssq);
  }
  long double best = -1e300L;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    long double dot = 0.0L;
    for (Eigen::Index c = 0; c < a.cols(); ++c) dot += (long double)a(r, c) * t[c];
    if (dot > best) best = dot;
  }
  return best;
}

inline long double sdw_ld(const sdl::Mat& positives) {
  long double total = 0.0L;
  for (Eigen::Index c = 0; c < positives.cols(); ++c) {
    long double mean = 0.0L;
    for (Eigen::Index j = 0; j < positives.rows(); ++j) mean += positives(j, c);
    mean /= positives.rows();
    long double var = 0.0L;
    for (Eigen::Index j = 0; j < positives.rows(); ++j) {
      const long double d = positives(j, c) - mean;
      var += d * d;
    }
    total += var / positives.rows();
  }
  return 1.0L + total;
}

inline double rank_loss_value(const sdl::Mat& a, const sdl::Mat& positives,
                              const sdl::Mat& negatives, bool use_sdw, bool l2) {
  long double sum = 0.0L;
  for (Eigen::Index j = 0; j < positives.rows(); ++j) {
    for (Eigen::Index k = 0; k < negatives.rows(); ++k) {
      const long double u = score_ld(a, negatives.row(k).transpose(), l2) -
                            score_ld(a, positives.row(j).transpose(), l2);
      sum += softplus_ld(u);
    }
  }
  const long double omega_n = (long double)positives.rows() * negatives.rows();
  const long double omega_d = use_sdw ? sdw_ld(positives) : 1.0L;
  return (double)(omega_d * sum / omega_n);
}

inline double reg_loss_value(const sdl::Mat& a) {
  long double total = 0.0L;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    long double mean = 0.0L;
    for (Eigen::Index r = 0; r < a.rows(); ++r) mean += a(r, c);
    mean /= a.rows();
    long double var = 0.0L;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      const long double d = a(r, c) - mean;
      var += d * d;
    }
    total += var / a.rows();
  }
  return (double)std::abs(total);
}

// AP by rank counting, no sorting: an item's rank under descending scores
// with index-order ties is 1 + (#strictly higher) + (#equal with lower index).
inline double average_precision(const std::vector<double>& scores,
                                const std::vector<char>& relevant) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (scores[j] > scores[i] || (scores[j] == scores[i] && j < i)) ++r;
    }
    rank[i] = r;
  }
  long n_pos = 0;
  long double ap = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    if (!relevant[i]) continue;
    ++n_pos;
    long hits = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (relevant[j] && rank[j] <= rank[i]) ++hits;
    }
    ap += (long double)hits / (long double)rank[i];
  }
  return (double)(ap / n_pos);
}

// scores[i][j]: image i, label j. Labels with no positive image are skipped.
inline double map_score(const std::vector<std::vector<double>>& scores,
                        const std::vector<std::vector<char>>& rel) {
  const std::size_t n_labels = scores.empty() ? 0 : scores[0].size();
  long double sum = 0.0L;
  long counted = 0;
  for (std::size_t j = 0; j < n_labels; ++j) {
    std::vector<double> col(scores.size());
    std::vector<char> col_rel(scores.size());
    long n_pos = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      col[i] = scores[i][j];
      col_rel[i] = rel[i][j];
      n_pos += rel[i][j];
    }
    if (n_pos == 0) continue;
    sum += average_precision(col, col_rel);
    ++counted;
  }
  return (double)(sum / counted);
}

struct Prf {
  double precision, recall, f1;
};

// Top-K by repeated scan: strictly higher score wins, equal score goes to
// the lower index (tag lists are sorted, so index order is lexicographic).
inline Prf prf_at_k(const std::vector<std::vector<double>>& scores,
                    const std::vector<std::vector<char>>& rel, int k) {
  long tp = 0, total_rel = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::size_t n = scores[i].size();
    std::vector<char> taken(n, 0);
    for (int pick = 0; pick < k; ++pick) {
      std::size_t best = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (taken[j]) continue;
        if (best == n || scores[i][j] > scores[i][best]) best = j;
      }
      taken[best] = 1;
      tp += rel[i][best];
    }
    for (char c : rel[i]) total_rel += c;
  }
  Prf out{};
  out.precision = (double)tp / ((double)k * (double)scores.size());
  out.recall = (double)tp / (double)total_rel;
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

// Plain Adam with decoupled decay over a flat parameter vector, transcribed
// from the update equations one scalar at a time.
struct AdamRef {
  std::vector<double> m, v;
  long t = 0;

  void step(std::vector<double>& params, const std::vector<double>& grads, double lr,
            double wd, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    if (m.empty()) {
      m.assign(params.size(), 0.0);
      v.assign(params.size(), 0.0);
    }
    t += 1;
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] *= (1.0 - lr * wd);
      m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
      const double mhat = m[i] / (1.0 - std::pow(beta1, (double)t));
      const double vhat = v[i] / (1.0 - std::pow(beta2, (double)t));
      params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
};

// Central differences written out longhand, separate from the library's
// checker so the two can vouch for each other.
template <typename F>
sdl::Mat fd_grad(F f, const sdl::Mat& at, double step) {
  sdl::Mat g(at.rows(), at.cols());
  sdl::Mat x = at;
  for (Eigen::Index i = 0; i < at.rows(); ++i) {
    for (Eigen::Index j = 0; j < at.cols(); ++j) {
      const double keep = x(i, j);
      x(i, j) = keep + step;
      const double hi = f(x);
      x(i, j) = keep - step;
      const double lo = f(x);
      x(i, j) = keep;
      g(i, j) = (hi - lo) / (2.0 * step);
    }
  }
  return g;
}

}  // namespace oracle
