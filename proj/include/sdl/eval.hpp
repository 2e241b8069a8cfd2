#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sdl/data.hpp"
#include "sdl/model.hpp"
#include "sdl/wordvec.hpp"

namespace sdl {

// zsl ranks only the unseen tags; gzsl ranks the full vocabulary.
enum class EvalTask { kZsl, kGzsl };

EvalTask task_from_string(std::string_view name);

// Tags evaluated for the task, sorted lexicographically.
std::vector<std::string> tag_list(const Dataset& data, EvalTask task);

struct ScoreMatrix {
  std::vector<std::string> image_ids;
  std::vector<std::string> tags;  // sorted
  Mat scores;                     // N x |T|
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> argmax_rows;
};

// r_ij = max(A_i t_j) for every image and tag, with the winning row kept for
// attribution. Parallel over images; results independent of thread count.
ScoreMatrix score_all(const ModelParams& params, const Dataset& data,
                      const WordVecTable& vecs, const std::vector<std::string>& tags,
                      int threads = 1);

// relevance[i][j] - image i is annotated with tags[j].
using Relevance = std::vector<std::vector<char>>;
Relevance relevance_against(const Dataset& data, const std::vector<std::string>& tags);

// Average precision of one ranking. Descending scores, ties kept in
// original index order. Throws ValidationError when nothing is relevant.
double average_precision(const std::vector<double>& scores,
                         const std::vector<char>& relevant);

struct PrfResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double map = 0.0;
  std::vector<std::pair<std::string, double>> per_label_ap;  // labels with positives
  std::vector<std::string> skipped_labels;  // zero positives in the eval set
  std::map<int, PrfResult> at_k;
  long n_images = 0;
  long n_tags = 0;
};

// Mean AP over tags with at least one positive image.
double map_score(const ScoreMatrix& s, const Relevance& rel);

// Micro-aggregated precision/recall/F1 over each image's top-K tags;
// score ties broken by lexicographic tag order.
PrfResult prf_at_k(const ScoreMatrix& s, const Relevance& rel, int k);

MetricsReport evaluate(const ScoreMatrix& s, const Relevance& rel,
                       const std::vector<int>& ks);

// Restricts to images with strictly more than min_labels relevant tags in
// the evaluated tag set. Errors when no image qualifies.
MetricsReport diverse_subset_eval(const ScoreMatrix& s, const Relevance& rel,
                                  int min_labels = 6, int k = 10);

// Images ranked for one query tag, ties broken by id.
std::vector<std::pair<std::string, double>> retrieve(const ScoreMatrix& s,
                                                     const std::string& tag,
                                                     std::size_t top_n);

// JSON-lines, one object per image: its top-k tags grouped by the embedding
// matrix row that produced each score.
std::string row_attribution_report(const ScoreMatrix& s, const Relevance& rel,
                                   int top_k = 10);

std::string report_to_json(const MetricsReport& report, int indent = 2);

}  // namespace sdl
