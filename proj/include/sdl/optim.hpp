#pragma once

#include <cstdint>
#include <vector>

#include "sdl/data.hpp"
#include "sdl/model.hpp"
#include "sdl/wordvec.hpp"

namespace sdl {

struct OptimConfig {
  double max_lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled, scaled by the step lr
  // One-cycle shape: linear warmup from max_lr/start_div over the first
  // warmup_frac of steps, then cosine decay to max_lr/final_div.
  double warmup_frac = 0.3;
  double start_div = 25.0;
  double final_div = 1e4;
  long total_steps = 0;
};

// Learning rate at step t, 0 <= t <= total_steps. Continuous over the range,
// exactly max_lr at the warmup end and max_lr/final_div at the last step.
double lr_at(const OptimConfig& cfg, long t);

struct OptimState {
  long t = 0;  // completed steps
  Mat m_w, v_w;
  Vec m_b, v_b;
};

OptimState make_optim_state(const ModelParams& params);

// Bias-corrected Adam update at lr_at(cfg, state.t); decoupled weight decay
// shrinks the params before the Adam delta. Non-finite gradients abort.
void adam_step(OptimState& state, ModelParams& params, const HeadGrads& grads,
               const OptimConfig& cfg);

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;
  double max_lr = 1e-4;
  double weight_decay = 3e-4;
  double lambda = 0.3;
  int m = 7;
  LossVariant variant = LossVariant::kMax;
  bool use_sdw = true;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double mean_l_rank = 0.0;
  double mean_l_reg = 0.0;
  double mean_omega_d = 0.0;
  double lr = 0.0;  // lr of the epoch's last optimizer step
  long skipped_samples = 0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
};

// Trains the linear head on the dataset's seen labels. Per sample, positives
// are the annotated seen labels and negatives the rest of the seen
// vocabulary; samples with an empty side are skipped and counted. Mean batch
// loss drives one Adam step per batch. Deterministic for a fixed seed at any
// thread count: per-sample results land in indexed slots and are reduced in
// index order.
TrainResult train(const Dataset& data, const WordVecTable& vecs, const TrainConfig& cfg);

}  // namespace sdl
