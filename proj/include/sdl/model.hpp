#pragma once

#include <cstdint>
#include <string>

#include "sdl/common.hpp"
#include "sdl/loss.hpp"

namespace sdl {

// Linear head over precomputed image features: vec(A) = W x + b, reshaped
// row-major into the M x d_w embedding matrix.
struct ModelParams {
  int m = 0;
  int d_w = 0;
  int d_f = 0;
  LossVariant variant = LossVariant::kMax;
  std::uint64_t seed = 0;
  Mat w;  // (m * d_w) x d_f
  Vec b;  // m * d_w
};

// W ~ iid Gaussian(0, 1/sqrt(d_f)), b = 0. Deterministic for a fixed seed.
ModelParams init_params(int m, int d_w, int d_f, std::uint64_t seed,
                        LossVariant variant = LossVariant::kMax);

Mat forward(const ModelParams& params, const Vec& x);

struct HeadGrads {
  Mat grad_w;
  Vec grad_b;
};

// Chain rule through the reshape: grad_W = vec(grad_A) x^T, grad_b = vec(grad_A).
HeadGrads backward(const ModelParams& params, const Vec& x, const Mat& grad_a);

// Checkpoint file, little-endian throughout:
//   magic "SDLM" | u32 version=1 | u32 M | u32 d_w | u32 d_f
//   W row-major as float32, then b as float32
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace sdl
