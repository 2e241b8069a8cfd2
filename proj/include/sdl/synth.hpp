#pragma once

#include <cstdint>

#include "sdl/data.hpp"
#include "sdl/wordvec.hpp"

namespace sdl {

// Deterministic synthetic world: G well-separated semantic groups of labels,
// per-group unseen holdout, and features linearly tied to label content so a
// linear head can solve the task.
struct SynthConfig {
  int d_w = 32;
  int d_f = 64;
  int groups = 3;
  int labels_per_group = 20;
  int unseen_per_group = 4;
  int n_images = 6000;
  int min_labels = 2;  // labels per image drawn uniformly in [min, max]
  int max_labels = 8;
  double diversity_mix = 0.6;  // probability an image spans >= 2 groups
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;
};

void validate(const SynthConfig& cfg);

struct SynthWorld {
  WordVecTable vecs;
  Dataset data;
};

// Group centers are unit vectors with pairwise dot products below 0.3;
// label vectors are normalized center + Gaussian(0, 0.1) perturbations;
// features are a fixed random orthonormal map of the image's mean label
// vector plus Gaussian noise. Unseen labels stay in the ground truth but
// never train. Fully deterministic for a fixed seed.
SynthWorld generate(const SynthConfig& cfg);

}  // namespace sdl
