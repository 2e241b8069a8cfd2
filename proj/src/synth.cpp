#include "sdl/synth.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cstdio>
#include <random>

namespace sdl {

namespace {

constexpr double kMaxCenterDot = 0.3;
constexpr double kLabelJitter = 0.1;
constexpr int kMaxCenterAttempts = 100000;

// one generator per concern so that e.g. adding images never shifts the
// label vectors
enum Stream : std::uint64_t {
  kStreamCenters = 10,
  kStreamLabels = 11,
  kStreamImages = 12,
  kStreamNoise = 13,
  kStreamMap = 14,
};

Vec gaussian_vec(std::mt19937_64& rng, Eigen::Index n, double stddev) {
  Vec v = Vec::Zero(n);
  if (stddev == 0.0) return v;  // normal_distribution requires sigma > 0
  std::normal_distribution<double> gauss(0.0, stddev);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
  return v;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.d_w < 2) throw ValidationError("d_w must be >= 2");
  if (cfg.d_f < cfg.d_w) {
    throw ValidationError("d_f must be >= d_w for the orthonormal feature map");
  }
  if (cfg.groups < 1) throw ValidationError("groups must be >= 1");
  if (cfg.labels_per_group < 1) throw ValidationError("labels_per_group must be >= 1");
  if (cfg.unseen_per_group < 0 || cfg.unseen_per_group >= cfg.labels_per_group) {
    throw ValidationError("unseen_per_group must leave at least one seen label per group");
  }
  if (cfg.n_images < 1) throw ValidationError("n_images must be >= 1");
  if (cfg.min_labels < 1 || cfg.max_labels < cfg.min_labels) {
    throw ValidationError("label count range must satisfy 1 <= min <= max");
  }
  if (cfg.max_labels > cfg.groups * cfg.labels_per_group) {
    throw ValidationError("max_labels exceeds the total label pool");
  }
  if (!(cfg.diversity_mix >= 0.0 && cfg.diversity_mix <= 1.0)) {
    throw ValidationError("diversity_mix must be in [0, 1]");
  }
  if (!(cfg.noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be >= 0");
}

SynthWorld generate(const SynthConfig& cfg) {
  validate(cfg);

  std::mt19937_64 rng_centers(mix_seed(cfg.seed, kStreamCenters));
  std::mt19937_64 rng_labels(mix_seed(cfg.seed, kStreamLabels));
  std::mt19937_64 rng_images(mix_seed(cfg.seed, kStreamImages));
  std::mt19937_64 rng_noise(mix_seed(cfg.seed, kStreamNoise));
  std::mt19937_64 rng_map(mix_seed(cfg.seed, kStreamMap));

  // Rejection-sampled unit centers: every pairwise dot stays below the cap,
  // so groups occupy distinct cones of the sphere.
  Mat centers(cfg.groups, cfg.d_w);
  for (int g = 0, attempts = 0; g < cfg.groups;) {
    if (++attempts > kMaxCenterAttempts) {
      throw ValidationError("cannot place " + std::to_string(cfg.groups) +
                            " separated group centers in " + std::to_string(cfg.d_w) +
                            " dimensions");
    }
    Vec c = gaussian_vec(rng_centers, cfg.d_w, 1.0);
    const double norm = c.norm();
    if (!(norm > 0.0)) continue;
    c /= norm;
    bool ok = true;
    for (int h = 0; h < g; ++h) {
      if (centers.row(h).dot(c) >= kMaxCenterDot) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    centers.row(g++) = c.transpose();
  }

  const int lpg = cfg.labels_per_group;
  const int n_seen_per_group = lpg - cfg.unseen_per_group;
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(cfg.groups) * lpg);
  WordVecTable vecs(cfg.d_w);
  for (int g = 0; g < cfg.groups; ++g) {
    for (int l = 0; l < lpg; ++l) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "g%d_l%02d", g, l);
      Vec v = centers.row(g).transpose() + gaussian_vec(rng_labels, cfg.d_w, kLabelJitter);
      vecs.insert(buf, std::move(v));
      names.emplace_back(buf);
    }
  }

  Dataset data;
  for (int g = 0; g < cfg.groups; ++g) {
    for (int l = 0; l < lpg; ++l) {
      const auto& name = names[static_cast<std::size_t>(g) * lpg + l];
      (l < n_seen_per_group ? data.seen : data.unseen).push_back(name);
    }
  }
  std::sort(data.seen.begin(), data.seen.end());
  std::sort(data.unseen.begin(), data.unseen.end());

  // Fixed orthonormal lift of word-vector space into feature space; the
  // linear head only has to invert it through the noise.
  Mat gauss_map(cfg.d_f, cfg.d_w);
  for (Eigen::Index i = 0; i < gauss_map.rows(); ++i) {
    gauss_map.row(i) = gaussian_vec(rng_map, cfg.d_w, 1.0).transpose();
  }
  const Eigen::HouseholderQR<Mat> qr(gauss_map);
  const Mat lift = qr.householderQ() * Mat::Identity(cfg.d_f, cfg.d_w);

  const int max_groups_per_image = std::min(3, cfg.groups);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  data.features = Mat(cfg.n_images, cfg.d_f);
  data.labels.resize(static_cast<std::size_t>(cfg.n_images));
  data.ids.resize(static_cast<std::size_t>(cfg.n_images));
  std::vector<int> gidx(static_cast<std::size_t>(cfg.groups));

  for (int i = 0; i < cfg.n_images; ++i) {
    int n_groups_img = 1;
    if (cfg.groups > 1 && unit(rng_images) < cfg.diversity_mix) {
      n_groups_img = uniform_int(rng_images, 2, max_groups_per_image);
    }
    for (int g = 0; g < cfg.groups; ++g) gidx[static_cast<std::size_t>(g)] = g;
    for (int j = 0; j < n_groups_img; ++j) {
      std::swap(gidx[static_cast<std::size_t>(j)],
                gidx[static_cast<std::size_t>(uniform_int(rng_images, j, cfg.groups - 1))]);
    }
    std::vector<int> chosen(gidx.begin(), gidx.begin() + n_groups_img);
    std::sort(chosen.begin(), chosen.end());

    const int pool_total = n_groups_img * lpg;
    int n_labels = uniform_int(rng_images, cfg.min_labels, cfg.max_labels);
    n_labels = std::min(std::max(n_labels, n_groups_img), pool_total);

    // at least one label from every chosen group, the rest from the union
    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(n_labels));
    for (int g : chosen) {
      picked.push_back(g * lpg + uniform_int(rng_images, 0, lpg - 1));
    }
    std::vector<int> pool;
    pool.reserve(static_cast<std::size_t>(pool_total - n_groups_img));
    for (int g : chosen) {
      for (int l = 0; l < lpg; ++l) {
        const int idx = g * lpg + l;
        if (std::find(picked.begin(), picked.end(), idx) == picked.end()) {
          pool.push_back(idx);
        }
      }
    }
    for (int e = n_groups_img; e < n_labels; ++e) {
      const auto j = static_cast<std::size_t>(
          uniform_int(rng_images, 0, static_cast<int>(pool.size()) - 1));
      picked.push_back(pool[j]);
      pool[j] = pool.back();
      pool.pop_back();
    }

    auto& labels = data.labels[static_cast<std::size_t>(i)];
    labels.reserve(picked.size());
    Vec mean = Vec::Zero(cfg.d_w);
    for (int idx : picked) {
      labels.push_back(names[static_cast<std::size_t>(idx)]);
      mean += vecs.lookup(names[static_cast<std::size_t>(idx)]);
    }
    std::sort(labels.begin(), labels.end());
    mean /= static_cast<double>(picked.size());

    data.features.row(i) =
        (lift * mean + gaussian_vec(rng_noise, cfg.d_f, cfg.noise_sigma)).transpose();
    char buf[16];
    std::snprintf(buf, sizeof(buf), "img%05d", i);
    data.ids[static_cast<std::size_t>(i)] = buf;
  }

  return {std::move(vecs), std::move(data)};
}

}  // namespace sdl
