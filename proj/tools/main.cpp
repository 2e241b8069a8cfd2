#include "CLI11.hpp"
#include "json.hpp"

#include "sdl/data.hpp"
#include "sdl/eval.hpp"
#include "sdl/gradcheck.hpp"
#include "sdl/loss.hpp"
#include "sdl/model.hpp"
#include "sdl/optim.hpp"
#include "sdl/synth.hpp"
#include "sdl/wordvec.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// --threads wins; otherwise SDL_THREADS; otherwise single-threaded.
int resolve_threads(int flag_value, bool flag_set) {
  if (flag_set) {
    if (flag_value < 1) throw sdl::ValidationError("--threads must be >= 1");
    return flag_value;
  }
  const char* env = std::getenv("SDL_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  int n = 0;
  const auto [ptr, ec] = std::from_chars(env, env + std::string_view(env).size(), n);
  if (ec != std::errc{} || *ptr != '\0' || n < 1) {
    throw sdl::ValidationError("SDL_THREADS must be a positive integer, got '" +
                               std::string(env) + "'");
  }
  return n;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sdl::ValidationError("cannot write " + path);
  out << text;
  if (!out) throw sdl::ValidationError("failed writing " + path);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_text(out_path, text);
  }
}

// A dataset for commands that score images but do not need ground truth.
sdl::Dataset load_unlabeled(const std::string& features_path,
                            const std::string& seen_path,
                            const std::string& unseen_path) {
  sdl::Dataset d;
  std::tie(d.ids, d.features) = sdl::load_features(features_path);
  std::tie(d.seen, d.unseen) = sdl::load_split(seen_path, unseen_path);
  d.labels.resize(d.ids.size());
  return d;
}

struct DataOpts {
  std::string features, labels, seen, unseen, wordvecs;
};

void add_data_options(CLI::App* cmd, DataOpts& o, bool with_labels) {
  cmd->add_option("--features", o.features, "feature file")->required();
  if (with_labels) {
    cmd->add_option("--labels", o.labels, "image label TSV")->required();
  }
  cmd->add_option("--seen", o.seen, "seen label list")->required();
  cmd->add_option("--unseen", o.unseen, "unseen label list")->required();
  cmd->add_option("--wordvecs", o.wordvecs, "word vector .vec file")->required();
}

// fast0tag is the single-direction model: an explicit --m other than 1 is a
// contradiction, an unset --m silently becomes 1.
int resolve_m(const std::string& variant, int m, bool m_set) {
  if (variant == "fast0tag") {
    if (m_set && m != 1) {
      throw sdl::ValidationError("fast0tag requires --m 1, got " + std::to_string(m));
    }
    return 1;
  }
  return m;
}

json report_json(const sdl::MetricsReport& report) {
  return json::parse(sdl::report_to_json(report));
}

struct Cell {
  std::string name;
  int m;
  bool sdw;
  double lambda;
  sdl::LossVariant variant;
};

std::vector<Cell> cells_for(const std::string& mode, double lambda) {
  std::vector<Cell> cells;
  if (mode == "grid") {
    cells = {
        {"base", 1, false, 0.0, sdl::LossVariant::kFast0Tag},
        {"a", 1, true, 0.0, sdl::LossVariant::kMax},
        {"b", 2, true, 0.0, sdl::LossVariant::kMax},
        {"c", 2, true, 0.1, sdl::LossVariant::kMax},
        {"d", 7, true, 0.1, sdl::LossVariant::kMax},
        {"f", 7, false, 0.3, sdl::LossVariant::kMax},
        {"ours", 7, true, 0.3, sdl::LossVariant::kMax},
    };
  } else if (mode == "msweep") {
    for (int m : {1, 2, 3, 5, 9}) {
      cells.push_back({"m" + std::to_string(m), m, true, lambda, sdl::LossVariant::kMax});
    }
  } else if (mode == "lsweep") {
    for (int m : {3, 7}) {
      for (double l : {0.0, 0.05, 0.1, 0.2, 0.3, 0.5}) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "m%d_lambda%.2f", m, l);
        cells.push_back({buf, m, true, l, sdl::LossVariant::kMax});
      }
    }
  } else {
    throw sdl::ValidationError("unknown ablate mode '" + mode +
                               "', expected grid, msweep or lsweep");
  }
  return cells;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-shot multi-label tag ranking over word-vector embeddings"};
  app.require_subcommand(1);

  // ---- synth ----------------------------------------------------------
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic dataset");
  sdl::SynthConfig sc;
  std::string synth_out;
  int test_images = 0;
  c_synth->add_option("--out", synth_out, "output directory")->required();
  c_synth->add_option("--dw", sc.d_w, "word vector dimension");
  c_synth->add_option("--df", sc.d_f, "feature dimension");
  c_synth->add_option("--groups", sc.groups, "semantic groups");
  c_synth->add_option("--labels-per-group", sc.labels_per_group, "labels per group");
  c_synth->add_option("--unseen-per-group", sc.unseen_per_group, "held-out labels per group");
  c_synth->add_option("--n-images", sc.n_images, "total images");
  c_synth->add_option("--test-images", test_images, "images split off into test files");
  c_synth->add_option("--min-labels", sc.min_labels, "min labels per image");
  c_synth->add_option("--max-labels", sc.max_labels, "max labels per image");
  c_synth->add_option("--mix", sc.diversity_mix, "probability an image spans groups");
  c_synth->add_option("--noise", sc.noise_sigma, "feature noise stddev");
  c_synth->add_option("--seed", sc.seed, "random seed");

  // ---- train ----------------------------------------------------------
  auto* c_train = app.add_subcommand("train", "train the linear head");
  DataOpts train_data;
  add_data_options(c_train, train_data, true);
  sdl::TrainConfig tc;
  std::string train_out, train_log, train_variant = "max";
  bool no_sdw = false;
  int train_threads = 1;
  c_train->add_option("--out", train_out, "checkpoint path")->required();
  c_train->add_option("--log", train_log, "JSON-lines training log path");
  auto* train_m = c_train->add_option("--m", tc.m, "embedding matrix rows");
  c_train->add_option("--lambda", tc.lambda, "row-variance regularization strength");
  c_train->add_option("--variant", train_variant, "loss variant: max, l2norm, fast0tag")
      ->check(CLI::IsMember({"max", "l2norm", "fast0tag"}));
  c_train->add_flag("--no-sdw", no_sdw, "disable semantic diversity weighting");
  c_train->add_option("--epochs", tc.epochs, "training epochs");
  c_train->add_option("--batch-size", tc.batch_size, "batch size");
  c_train->add_option("--lr", tc.max_lr, "peak learning rate");
  c_train->add_option("--wd", tc.weight_decay, "decoupled weight decay");
  c_train->add_option("--seed", tc.seed, "random seed");
  auto* train_threads_opt = c_train->add_option("--threads", train_threads, "worker threads");

  // ---- eval -----------------------------------------------------------
  auto* c_eval = app.add_subcommand("eval", "evaluate a checkpoint");
  DataOpts eval_data;
  add_data_options(c_eval, eval_data, true);
  std::string eval_ckpt, eval_task = "zsl", eval_out;
  std::vector<int> eval_ks{3, 5};
  int eval_threads = 1, diverse_min = -1, diverse_k = 10;
  c_eval->add_option("--checkpoint", eval_ckpt, "model checkpoint")->required();
  c_eval->add_option("--task", eval_task, "zsl ranks unseen tags, gzsl ranks all")
      ->check(CLI::IsMember({"zsl", "gzsl"}));
  c_eval->add_option("--k", eval_ks, "top-K cutoffs for precision/recall/F1")
      ->delimiter(',');
  c_eval->add_option("--diverse-min", diverse_min,
                     "also evaluate images with strictly more relevant labels than this");
  c_eval->add_option("--diverse-k", diverse_k, "top-K cutoff for the diverse subset");
  c_eval->add_option("--out", eval_out, "report path, stdout when omitted");
  auto* eval_threads_opt = c_eval->add_option("--threads", eval_threads, "worker threads");

  // ---- rank -----------------------------------------------------------
  auto* c_rank = app.add_subcommand("rank", "top-K tags per image");
  DataOpts rank_data;
  add_data_options(c_rank, rank_data, false);
  std::string rank_ckpt, rank_task = "gzsl", rank_out;
  int rank_k = 5, rank_threads = 1;
  c_rank->add_option("--checkpoint", rank_ckpt, "model checkpoint")->required();
  c_rank->add_option("--task", rank_task, "tag set to rank")
      ->check(CLI::IsMember({"zsl", "gzsl"}));
  c_rank->add_option("--k", rank_k, "tags per image");
  c_rank->add_option("--out", rank_out, "JSON-lines path, stdout when omitted");
  auto* rank_threads_opt = c_rank->add_option("--threads", rank_threads, "worker threads");

  // ---- retrieve -------------------------------------------------------
  auto* c_retr = app.add_subcommand("retrieve", "ranked images for a query tag");
  DataOpts retr_data;
  add_data_options(c_retr, retr_data, false);
  std::string retr_ckpt, retr_task = "gzsl", retr_tag, retr_out;
  int retr_top = 10, retr_threads = 1;
  c_retr->add_option("--checkpoint", retr_ckpt, "model checkpoint")->required();
  c_retr->add_option("--task", retr_task, "tag set the query must belong to")
      ->check(CLI::IsMember({"zsl", "gzsl"}));
  c_retr->add_option("--tag", retr_tag, "query tag")->required();
  c_retr->add_option("--top", retr_top, "images to return");
  c_retr->add_option("--out", retr_out, "JSON path, stdout when omitted");
  auto* retr_threads_opt = c_retr->add_option("--threads", retr_threads, "worker threads");

  // ---- report ---------------------------------------------------------
  auto* c_report = app.add_subcommand("report", "per-image row attribution of top tags");
  DataOpts report_data;
  add_data_options(c_report, report_data, true);
  std::string report_ckpt, report_task = "gzsl", report_out;
  int report_k = 10, report_threads = 1;
  c_report->add_option("--checkpoint", report_ckpt, "model checkpoint")->required();
  c_report->add_option("--task", report_task, "tag set to rank")
      ->check(CLI::IsMember({"zsl", "gzsl"}));
  c_report->add_option("--k", report_k, "tags per image");
  c_report->add_option("--out", report_out, "JSON-lines path, stdout when omitted");
  auto* report_threads_opt =
      c_report->add_option("--threads", report_threads, "worker threads");

  // ---- gradcheck ------------------------------------------------------
  auto* c_grad = app.add_subcommand("gradcheck",
                                    "analytic gradients vs central finite differences");
  sdl::GradCheckConfig gc;
  std::vector<std::string> grad_variants;
  std::string grad_out;
  c_grad->add_option("--instances", gc.instances, "instances per variant");
  c_grad->add_option("--step", gc.step, "finite difference step");
  c_grad->add_option("--tol", gc.tol, "max allowed relative error");
  c_grad->add_option("--seed", gc.seed, "random seed");
  c_grad->add_option("--variant", grad_variants, "restrict to these loss variants")
      ->check(CLI::IsMember({"max", "l2norm", "fast0tag"}));
  c_grad->add_option("--out", grad_out, "JSON summary path");

  // ---- ablate ---------------------------------------------------------
  auto* c_abl = app.add_subcommand("ablate", "train/eval a configuration grid");
  DataOpts abl_data;
  std::string abl_test_features, abl_test_labels;
  add_data_options(c_abl, abl_data, true);
  c_abl->add_option("--test-features", abl_test_features, "test feature file")->required();
  c_abl->add_option("--test-labels", abl_test_labels, "test label TSV")->required();
  std::string abl_mode = "grid", abl_out;
  sdl::TrainConfig abl_tc;
  int abl_seeds = 1, abl_threads = 1;
  std::uint64_t abl_seed = 0;
  c_abl->add_option("--mode", abl_mode, "grid, msweep or lsweep")
      ->check(CLI::IsMember({"grid", "msweep", "lsweep"}));
  c_abl->add_option("--epochs", abl_tc.epochs, "training epochs per cell");
  c_abl->add_option("--batch-size", abl_tc.batch_size, "batch size");
  c_abl->add_option("--lr", abl_tc.max_lr, "peak learning rate");
  c_abl->add_option("--wd", abl_tc.weight_decay, "decoupled weight decay");
  c_abl->add_option("--lambda", abl_tc.lambda, "regularization strength for msweep");
  c_abl->add_option("--seed", abl_seed, "first seed");
  c_abl->add_option("--seeds", abl_seeds, "seeds per cell, consecutive from --seed");
  c_abl->add_option("--out", abl_out, "JSON table path");
  auto* abl_threads_opt = c_abl->add_option("--threads", abl_threads, "worker threads");

  try {
    app.parse(argc, argv);

    if (*c_synth) {
      sdl::validate(sc);
      if (test_images < 0 || test_images >= sc.n_images) {
        throw sdl::ValidationError("--test-images must be in [0, n_images)");
      }
      const auto world = sdl::generate(sc);
      fs::create_directories(synth_out);
      const auto at = [&](const char* name) { return (fs::path(synth_out) / name).string(); };

      world.vecs.save(at("wordvecs.vec"));
      sdl::save_label_list(at("seen.txt"), world.data.seen);
      sdl::save_label_list(at("unseen.txt"), world.data.unseen);
      const auto train_part = sdl::slice(world.data, 0, sc.n_images - test_images);
      sdl::save_features(at("train.features"), train_part.ids, train_part.features);
      sdl::save_labels(at("train.labels.tsv"), train_part.ids, train_part.labels);
      if (test_images > 0) {
        const auto test_part = sdl::slice(world.data, sc.n_images - test_images, sc.n_images);
        sdl::save_features(at("test.features"), test_part.ids, test_part.features);
        sdl::save_labels(at("test.labels.tsv"), test_part.ids, test_part.labels);
      }

      json j;
      j["out"] = synth_out;
      j["train_images"] = sc.n_images - test_images;
      j["test_images"] = test_images;
      j["seen"] = world.data.seen.size();
      j["unseen"] = world.data.unseen.size();
      std::fprintf(stdout, "%s\n", j.dump(2).c_str());
      return 0;
    }

    if (*c_train) {
      tc.variant = sdl::variant_from_string(train_variant);
      tc.m = resolve_m(train_variant, tc.m, train_m->count() > 0);
      tc.use_sdw = !no_sdw;
      tc.threads = resolve_threads(train_threads, train_threads_opt->count() > 0);

      const auto data = sdl::load_dataset(train_data.features, train_data.labels,
                                          train_data.seen, train_data.unseen);
      const auto vecs = sdl::WordVecTable::parse_file(train_data.wordvecs);
      const auto result = sdl::train(data, vecs, tc);
      sdl::save_checkpoint(result.params, train_out);

      std::string log_lines;
      for (const auto& e : result.log) {
        json j;
        j["epoch"] = e.epoch;
        j["loss"] = e.mean_loss;
        j["l_rank"] = e.mean_l_rank;
        j["l_reg"] = e.mean_l_reg;
        j["omega_d"] = e.mean_omega_d;
        j["lr"] = e.lr;
        j["skipped"] = e.skipped_samples;
        log_lines += j.dump() + "\n";
        std::fprintf(stdout, "epoch %3d/%d  loss %.6f  rank %.6f  reg %.6f  omega %.4f  lr %.3e\n",
                     e.epoch, tc.epochs, e.mean_loss, e.mean_l_rank, e.mean_l_reg,
                     e.mean_omega_d, e.lr);
      }
      if (!train_log.empty()) write_text(train_log, log_lines);
      std::fprintf(stdout, "checkpoint %s\n", train_out.c_str());
      return 0;
    }

    if (*c_eval) {
      const int threads = resolve_threads(eval_threads, eval_threads_opt->count() > 0);
      const auto data = sdl::load_dataset(eval_data.features, eval_data.labels,
                                          eval_data.seen, eval_data.unseen);
      const auto vecs = sdl::WordVecTable::parse_file(eval_data.wordvecs);
      const auto params = sdl::load_checkpoint(eval_ckpt);
      const auto task = sdl::task_from_string(eval_task);
      const auto tags = sdl::tag_list(data, task);
      const auto s = sdl::score_all(params, data, vecs, tags, threads);
      const auto rel = sdl::relevance_against(data, tags);

      std::set<int> ks(eval_ks.begin(), eval_ks.end());
      const auto report =
          sdl::evaluate(s, rel, std::vector<int>(ks.begin(), ks.end()));

      json j = report_json(report);
      j["task"] = eval_task;
      if (diverse_min >= 0) {
        const auto sub = sdl::diverse_subset_eval(s, rel, diverse_min, diverse_k);
        json d = report_json(sub);
        d["min_labels"] = diverse_min;
        d["k"] = diverse_k;
        j["diverse"] = std::move(d);
      }
      const std::string text = j.dump(2) + "\n";
      emit(eval_out, text);
      if (!eval_out.empty()) {
        std::fprintf(stdout, "task %s  images %ld  tags %ld  mAP %.4f\n", eval_task.c_str(),
                     report.n_images, report.n_tags, report.map);
        for (const auto& [k, p] : report.at_k) {
          std::fprintf(stdout, "P@%-3d %.4f  R@%-3d %.4f  F1@%-3d %.4f\n", k, p.precision,
                       k, p.recall, k, p.f1);
        }
      }
      return 0;
    }

    if (*c_rank) {
      const int threads = resolve_threads(rank_threads, rank_threads_opt->count() > 0);
      const auto data = load_unlabeled(rank_data.features, rank_data.seen, rank_data.unseen);
      const auto vecs = sdl::WordVecTable::parse_file(rank_data.wordvecs);
      const auto params = sdl::load_checkpoint(rank_ckpt);
      const auto tags = sdl::tag_list(data, sdl::task_from_string(rank_task));
      if (rank_k < 1 || rank_k > static_cast<int>(tags.size())) {
        throw sdl::ValidationError("--k must be in [1, " + std::to_string(tags.size()) + "]");
      }
      const auto s = sdl::score_all(params, data, vecs, tags, threads);

      std::string lines;
      std::vector<int> order(tags.size());
      for (Eigen::Index i = 0; i < s.scores.rows(); ++i) {
        std::iota(order.begin(), order.end(), 0);
        // stable + sorted tag list means score ties resolve lexicographically
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
          return s.scores(i, a) > s.scores(i, b);
        });
        json j;
        j["id"] = s.image_ids[static_cast<std::size_t>(i)];
        json arr = json::array();
        for (int r = 0; r < rank_k; ++r) {
          json e;
          e["tag"] = tags[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
          e["score"] = s.scores(i, order[static_cast<std::size_t>(r)]);
          e["row"] = s.argmax_rows(i, order[static_cast<std::size_t>(r)]);
          arr.push_back(std::move(e));
        }
        j["tags"] = std::move(arr);
        lines += j.dump() + "\n";
      }
      emit(rank_out, lines);
      return 0;
    }

    if (*c_retr) {
      const int threads = resolve_threads(retr_threads, retr_threads_opt->count() > 0);
      const auto data = load_unlabeled(retr_data.features, retr_data.seen, retr_data.unseen);
      const auto vecs = sdl::WordVecTable::parse_file(retr_data.wordvecs);
      const auto params = sdl::load_checkpoint(retr_ckpt);
      const auto tags = sdl::tag_list(data, sdl::task_from_string(retr_task));
      if (retr_top < 1) throw sdl::ValidationError("--top must be >= 1");
      const auto s = sdl::score_all(params, data, vecs, tags, threads);
      const auto hits =
          sdl::retrieve(s, sdl::canonical_label(retr_tag), static_cast<std::size_t>(retr_top));

      json j;
      j["tag"] = sdl::canonical_label(retr_tag);
      json arr = json::array();
      for (const auto& [id, value] : hits) {
        json e;
        e["id"] = id;
        e["score"] = value;
        arr.push_back(std::move(e));
      }
      j["images"] = std::move(arr);
      emit(retr_out, j.dump(2) + "\n");
      return 0;
    }

    if (*c_report) {
      const int threads = resolve_threads(report_threads, report_threads_opt->count() > 0);
      const auto data = sdl::load_dataset(report_data.features, report_data.labels,
                                          report_data.seen, report_data.unseen);
      const auto vecs = sdl::WordVecTable::parse_file(report_data.wordvecs);
      const auto params = sdl::load_checkpoint(report_ckpt);
      const auto tags = sdl::tag_list(data, sdl::task_from_string(report_task));
      const auto s = sdl::score_all(params, data, vecs, tags, threads);
      const auto rel = sdl::relevance_against(data, tags);
      emit(report_out, sdl::row_attribution_report(s, rel, report_k));
      return 0;
    }

    if (*c_grad) {
      if (!grad_variants.empty()) {
        gc.variants.clear();
        for (const auto& v : grad_variants) gc.variants.push_back(sdl::variant_from_string(v));
      }
      const auto r = sdl::run_gradcheck(gc);
      for (const auto& st : r.stats) {
        std::fprintf(stdout, "%-16s max rel err %.3e  (%ld instances)\n", st.name.c_str(),
                     st.max_rel_err, st.checked);
      }
      std::fprintf(stdout, "worst %.3e  tol %.1e  resampled %ld  %s\n", r.worst, gc.tol,
                   r.resampled_degenerate, r.pass ? "PASS" : "FAIL");
      if (!grad_out.empty()) {
        json j;
        j["tol"] = gc.tol;
        j["step"] = gc.step;
        j["instances"] = gc.instances;
        j["worst"] = r.worst;
        j["resampled_degenerate"] = r.resampled_degenerate;
        j["pass"] = r.pass;
        json arr = json::array();
        for (const auto& st : r.stats) {
          json e;
          e["name"] = st.name;
          e["max_rel_err"] = st.max_rel_err;
          e["checked"] = st.checked;
          arr.push_back(std::move(e));
        }
        j["stats"] = std::move(arr);
        write_text(grad_out, j.dump(2) + "\n");
      }
      if (!r.pass) throw sdl::NumericError("gradient check failed");
      return 0;
    }

    if (*c_abl) {
      abl_tc.threads = resolve_threads(abl_threads, abl_threads_opt->count() > 0);
      if (abl_seeds < 1) throw sdl::ValidationError("--seeds must be >= 1");
      const auto train_set = sdl::load_dataset(abl_data.features, abl_data.labels,
                                               abl_data.seen, abl_data.unseen);
      const auto test_set = sdl::load_dataset(abl_test_features, abl_test_labels,
                                              abl_data.seen, abl_data.unseen);
      const auto vecs = sdl::WordVecTable::parse_file(abl_data.wordvecs);
      const auto zsl_tags = sdl::tag_list(test_set, sdl::EvalTask::kZsl);
      const auto gzsl_tags = sdl::tag_list(test_set, sdl::EvalTask::kGzsl);
      const auto zsl_rel = sdl::relevance_against(test_set, zsl_tags);
      const auto gzsl_rel = sdl::relevance_against(test_set, gzsl_tags);

      const auto cells = cells_for(abl_mode, abl_tc.lambda);
      json out;
      out["mode"] = abl_mode;
      out["epochs"] = abl_tc.epochs;
      out["batch_size"] = abl_tc.batch_size;
      out["lr"] = abl_tc.max_lr;
      out["wd"] = abl_tc.weight_decay;
      json seeds = json::array();
      for (int i = 0; i < abl_seeds; ++i) seeds.push_back(abl_seed + (std::uint64_t)i);
      out["seeds"] = std::move(seeds);
      json rows = json::array();

      std::fprintf(stdout, "%-16s %3s %4s %7s %9s %10s\n", "name", "M", "SDW", "lambda",
                   "ZSL mAP", "GZSL mAP");
      for (const auto& cell : cells) {
        std::vector<double> zsl_maps, gzsl_maps;
        for (int i = 0; i < abl_seeds; ++i) {
          auto tc_cell = abl_tc;
          tc_cell.m = cell.m;
          tc_cell.use_sdw = cell.sdw;
          tc_cell.lambda = cell.lambda;
          tc_cell.variant = cell.variant;
          tc_cell.seed = abl_seed + (std::uint64_t)i;
          const auto result = sdl::train(train_set, vecs, tc_cell);
          const auto sz = sdl::score_all(result.params, test_set, vecs, zsl_tags,
                                         abl_tc.threads);
          const auto sg = sdl::score_all(result.params, test_set, vecs, gzsl_tags,
                                         abl_tc.threads);
          zsl_maps.push_back(sdl::map_score(sz, zsl_rel));
          gzsl_maps.push_back(sdl::map_score(sg, gzsl_rel));
        }
        json r;
        r["name"] = cell.name;
        r["m"] = cell.m;
        r["sdw"] = cell.sdw;
        r["lambda"] = cell.lambda;
        r["variant"] = sdl::to_string(cell.variant);
        r["zsl_map"] = {{"mean", mean(zsl_maps)}, {"per_seed", zsl_maps}};
        r["gzsl_map"] = {{"mean", mean(gzsl_maps)}, {"per_seed", gzsl_maps}};
        rows.push_back(std::move(r));
        std::fprintf(stdout, "%-16s %3d %4s %7.2f %9.4f %10.4f\n", cell.name.c_str(),
                     cell.m, cell.sdw ? "yes" : "no", cell.lambda, mean(zsl_maps),
                     mean(gzsl_maps));
      }
      out["cells"] = std::move(rows);
      const std::string text = out.dump(2) + "\n";
      if (!abl_out.empty()) {
        write_text(abl_out, text);
      } else {
        std::fputs(text.c_str(), stdout);
      }
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const sdl::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const sdl::NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
