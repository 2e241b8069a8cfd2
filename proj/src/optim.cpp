#include "sdl/optim.hpp"

#include "sdl/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>
#include <unordered_map>

namespace sdl {

namespace {

void validate_optim(const OptimConfig& cfg) {
  if (!(cfg.max_lr > 0.0) || !(cfg.eps > 0.0) || !(cfg.start_div >= 1.0) ||
      !(cfg.final_div >= 1.0) || !(cfg.weight_decay >= 0.0) ||
      !(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0) ||
      !(cfg.warmup_frac >= 0.0 && cfg.warmup_frac <= 1.0) || cfg.total_steps < 1) {
    throw ValidationError("invalid optimizer configuration");
  }
}

}  // namespace

double lr_at(const OptimConfig& cfg, long t) {
  validate_optim(cfg);
  if (t < 0 || t > cfg.total_steps) {
    throw ValidationError("step " + std::to_string(t) + " outside schedule of " +
                          std::to_string(cfg.total_steps));
  }
  const long warmup = static_cast<long>(cfg.warmup_frac * static_cast<double>(cfg.total_steps));
  if (t < warmup) {
    const double start = cfg.max_lr / cfg.start_div;
    return start + (cfg.max_lr - start) * static_cast<double>(t) / static_cast<double>(warmup);
  }
  if (t == warmup || cfg.total_steps == warmup) {
    return cfg.max_lr;
  }
  const double final_lr = cfg.max_lr / cfg.final_div;
  const double progress =
      static_cast<double>(t - warmup) / static_cast<double>(cfg.total_steps - warmup);
  return final_lr + (cfg.max_lr - final_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

OptimState make_optim_state(const ModelParams& params) {
  OptimState s;
  s.m_w = Mat::Zero(params.w.rows(), params.w.cols());
  s.v_w = Mat::Zero(params.w.rows(), params.w.cols());
  s.m_b = Vec::Zero(params.b.size());
  s.v_b = Vec::Zero(params.b.size());
  return s;
}

void adam_step(OptimState& state, ModelParams& params, const HeadGrads& grads,
               const OptimConfig& cfg) {
  if (grads.grad_w.rows() != params.w.rows() || grads.grad_w.cols() != params.w.cols() ||
      grads.grad_b.size() != params.b.size()) {
    throw ValidationError("gradient shapes do not match parameters");
  }
  if (!grads.grad_w.allFinite() || !grads.grad_b.allFinite()) {
    throw NumericError("non-finite gradient");
  }
  const double lr = lr_at(cfg, state.t);
  state.t += 1;

  if (cfg.weight_decay > 0.0) {
    const double shrink = 1.0 - lr * cfg.weight_decay;
    params.w *= shrink;
    params.b *= shrink;
  }

  state.m_w = cfg.beta1 * state.m_w + (1.0 - cfg.beta1) * grads.grad_w;
  state.v_w = cfg.beta2 * state.v_w + (1.0 - cfg.beta2) * grads.grad_w.array().square().matrix();
  state.m_b = cfg.beta1 * state.m_b + (1.0 - cfg.beta1) * grads.grad_b;
  state.v_b = cfg.beta2 * state.v_b + (1.0 - cfg.beta2) * grads.grad_b.array().square().matrix();

  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  params.w.array() -=
      lr * (state.m_w.array() / c1) / ((state.v_w.array() / c2).sqrt() + cfg.eps);
  params.b.array() -=
      lr * (state.m_b.array() / c1) / ((state.v_b.array() / c2).sqrt() + cfg.eps);
  if (!params.w.allFinite() || !params.b.allFinite()) {
    throw NumericError("non-finite parameters after optimizer step");
  }
}

namespace {

struct SampleResult {
  bool used = false;
  double value = 0.0;
  double l_rank = 0.0;
  double l_reg = 0.0;
  double omega_d = 0.0;
  Mat grad_a;
};

// Per-sample loss of one image against the seen vocabulary.
SampleResult sample_loss(const ModelParams& params, const Vec& x, const Mat& vocab,
                         const std::vector<int>& pos, const std::vector<int>& neg,
                         const TrainConfig& cfg) {
  SampleResult out;
  const Mat a = forward(params, x);
  const RankLoss rank = rank_loss_over(a, vocab, pos, neg, cfg.use_sdw, cfg.variant);
  const RegLoss reg = reg_loss(a);
  const double lt = lambda_tilde(cfg.lambda, static_cast<Eigen::Index>(neg.size()));
  out.used = true;
  out.value = (1.0 - lt) * rank.value + lt * reg.value;
  out.l_rank = rank.value;
  out.l_reg = reg.value;
  out.omega_d = rank.omega_d;
  out.grad_a = (1.0 - lt) * rank.grad_a + lt * reg.grad_a;
  return out;
}

}  // namespace

TrainResult train(const Dataset& data, const WordVecTable& vecs, const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (cfg.batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (cfg.threads < 1) throw ValidationError("threads must be >= 1");
  if (!(cfg.lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
  if (cfg.m < 1) throw ValidationError("m must be >= 1");
  if (cfg.variant == LossVariant::kFast0Tag && cfg.m != 1) {
    throw ValidationError("fast0tag requires m = 1");
  }
  if (data.n() < 1) throw ValidationError("training needs at least one image");
  if (data.seen.empty()) throw ValidationError("training needs seen labels");

  const int n_seen = static_cast<int>(data.seen.size());
  Mat vocab(n_seen, vecs.dim());
  std::unordered_map<std::string, int> seen_index;
  seen_index.reserve(data.seen.size());
  for (int i = 0; i < n_seen; ++i) {
    vocab.row(i) = vecs.lookup(data.seen[i]).transpose();
    seen_index.emplace(data.seen[i], i);
  }

  // Positives are the image's seen labels; unseen annotations never train.
  const auto n = static_cast<std::size_t>(data.n());
  std::vector<std::vector<int>> pos_of(n);
  std::vector<std::vector<int>> neg_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<char> is_pos(static_cast<std::size_t>(n_seen), 0);
    for (const auto& label : data.labels[i]) {
      if (auto it = seen_index.find(label); it != seen_index.end()) {
        is_pos[static_cast<std::size_t>(it->second)] = 1;
        pos_of[i].push_back(it->second);
      }
    }
    if (pos_of[i].empty() || pos_of[i].size() == static_cast<std::size_t>(n_seen)) {
      pos_of[i].clear();
      continue;  // unusable: one side empty
    }
    neg_of[i].reserve(static_cast<std::size_t>(n_seen) - pos_of[i].size());
    for (int c = 0; c < n_seen; ++c) {
      if (!is_pos[static_cast<std::size_t>(c)]) neg_of[i].push_back(c);
    }
  }

  TrainResult result;
  result.params = init_params(cfg.m, vecs.dim(), static_cast<int>(data.d_f()), cfg.seed,
                              cfg.variant);

  const long steps_per_epoch =
      static_cast<long>((n + static_cast<std::size_t>(cfg.batch_size) - 1) /
                        static_cast<std::size_t>(cfg.batch_size));
  OptimConfig ocfg;
  ocfg.max_lr = cfg.max_lr;
  ocfg.weight_decay = cfg.weight_decay;
  ocfg.total_steps = static_cast<long>(cfg.epochs) * steps_per_epoch;
  OptimState state = make_optim_state(result.params);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double sum_loss = 0.0, sum_rank = 0.0, sum_reg = 0.0, sum_omega = 0.0;
    long used = 0, skipped = 0;
    double last_lr = 0.0;

    for (const auto& batch : batches(n, static_cast<std::size_t>(cfg.batch_size),
                                     cfg.seed, epoch)) {
      std::vector<SampleResult> slots(batch.size());
      // Each sample lands in its own slot; the reduction below walks the
      // slots in index order, so results match at any thread count.
      auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t s = first; s < batch.size(); s += stride) {
          const auto img = static_cast<std::size_t>(batch[s]);
          if (pos_of[img].empty()) continue;
          slots[s] = sample_loss(result.params, data.features.row(batch[s]).transpose(),
                                 vocab, pos_of[img], neg_of[img], cfg);
        }
      };
      const auto n_threads =
          std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), batch.size());
      if (n_threads <= 1) {
        work(0, 1);
      } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t w = 0; w < n_threads; ++w) {
          pool.emplace_back(work, w, n_threads);
        }
        for (auto& t : pool) t.join();
      }

      HeadGrads grads{Mat::Zero(result.params.w.rows(), result.params.w.cols()),
                      Vec::Zero(result.params.b.size())};
      long batch_used = 0;
      for (std::size_t s = 0; s < batch.size(); ++s) {
        if (!slots[s].used) {
          ++skipped;
          continue;
        }
        ++batch_used;
        sum_loss += slots[s].value;
        sum_rank += slots[s].l_rank;
        sum_reg += slots[s].l_reg;
        sum_omega += slots[s].omega_d;
        const HeadGrads g = backward(result.params,
                                     data.features.row(batch[s]).transpose(),
                                     slots[s].grad_a);
        grads.grad_w += g.grad_w;
        grads.grad_b += g.grad_b;
      }
      if (batch_used == 0) continue;
      used += batch_used;
      grads.grad_w /= static_cast<double>(batch_used);
      grads.grad_b /= static_cast<double>(batch_used);
      last_lr = lr_at(ocfg, state.t);
      adam_step(state, result.params, grads, ocfg);
    }

    if (used == 0) {
      throw ValidationError("no trainable samples: every image lacks seen positives "
                            "or seen negatives");
    }
    EpochLog log;
    log.epoch = epoch + 1;
    log.mean_loss = sum_loss / static_cast<double>(used);
    log.mean_l_rank = sum_rank / static_cast<double>(used);
    log.mean_l_reg = sum_reg / static_cast<double>(used);
    log.mean_omega_d = sum_omega / static_cast<double>(used);
    log.lr = last_lr;
    log.skipped_samples = skipped;
    result.log.push_back(log);
  }
  return result;
}

}  // namespace sdl
