#include "sdl/eval.hpp"

#include "sdl/loss.hpp"

#include "json.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <thread>
#include <unordered_map>

namespace sdl {

using nlohmann::json;

EvalTask task_from_string(std::string_view name) {
  if (name == "zsl") return EvalTask::kZsl;
  if (name == "gzsl") return EvalTask::kGzsl;
  throw ValidationError("unknown task '" + std::string(name) + "', expected zsl or gzsl");
}

std::vector<std::string> tag_list(const Dataset& data, EvalTask task) {
  std::vector<std::string> tags;
  if (task == EvalTask::kZsl) {
    tags = data.unseen;
  } else {
    tags.reserve(data.seen.size() + data.unseen.size());
    std::merge(data.seen.begin(), data.seen.end(), data.unseen.begin(), data.unseen.end(),
               std::back_inserter(tags));
  }
  if (tags.empty()) {
    throw ValidationError("no tags to evaluate for this task");
  }
  return tags;
}

ScoreMatrix score_all(const ModelParams& params, const Dataset& data,
                      const WordVecTable& vecs, const std::vector<std::string>& tags,
                      int threads) {
  if (tags.empty()) throw ValidationError("empty tag list");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  if (vecs.dim() != params.d_w) {
    throw ValidationError("word vectors have dimension " + std::to_string(vecs.dim()) +
                          ", model expects " + std::to_string(params.d_w));
  }
  const auto n_tags = static_cast<Eigen::Index>(tags.size());
  Mat t(n_tags, vecs.dim());
  for (Eigen::Index j = 0; j < n_tags; ++j) {
    t.row(j) = vecs.lookup(tags[static_cast<std::size_t>(j)]).transpose();
  }

  ScoreMatrix out;
  out.image_ids = data.ids;
  out.tags = tags;
  out.scores = Mat(data.n(), n_tags);
  out.argmax_rows.resize(data.n(), n_tags);

  // Per-tag matvecs rather than one image x tags product: scores must not
  // depend on which other tags are in the list, so restricting gzsl scores
  // to the unseen columns reproduces zsl scores bit for bit.
  auto work = [&](Eigen::Index first, Eigen::Index stride) {
    for (Eigen::Index i = first; i < data.n(); i += stride) {
      const Mat a = forward(params, data.features.row(i).transpose());
      for (Eigen::Index j = 0; j < n_tags; ++j) {
        const auto r = score(a, t.row(j).transpose());
        out.scores(i, j) = r.value;
        out.argmax_rows(i, j) = static_cast<int>(r.row);
      }
    }
  };
  const auto n_threads = std::min<Eigen::Index>(threads, std::max<Eigen::Index>(data.n(), 1));
  if (n_threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (Eigen::Index w = 0; w < n_threads; ++w) pool.emplace_back(work, w, n_threads);
    for (auto& th : pool) th.join();
  }
  return out;
}

Relevance relevance_against(const Dataset& data, const std::vector<std::string>& tags) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(tags.size());
  for (std::size_t j = 0; j < tags.size(); ++j) index.emplace(tags[j], j);
  if (index.size() != tags.size()) {
    throw ValidationError("duplicate tags in evaluation list");
  }
  Relevance rel(static_cast<std::size_t>(data.n()),
                std::vector<char>(tags.size(), 0));
  for (std::size_t i = 0; i < rel.size(); ++i) {
    for (const auto& label : data.labels[i]) {
      if (auto it = index.find(label); it != index.end()) rel[i][it->second] = 1;
    }
  }
  return rel;
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<char>& relevant) {
  if (scores.empty() || scores.size() != relevant.size()) {
    throw ValidationError("average precision needs matching non-empty inputs");
  }
  const long n_pos = std::count(relevant.begin(), relevant.end(), char(1));
  if (n_pos == 0) {
    throw ValidationError("average precision undefined without positives");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double ap = 0.0;
  long hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (relevant[order[rank]]) {
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return ap / static_cast<double>(n_pos);
}

namespace {

void check_shapes(const ScoreMatrix& s, const Relevance& rel) {
  if (s.scores.rows() != static_cast<Eigen::Index>(rel.size()) ||
      s.scores.cols() != static_cast<Eigen::Index>(s.tags.size()) ||
      s.scores.rows() != static_cast<Eigen::Index>(s.image_ids.size())) {
    throw ValidationError("score matrix and relevance disagree on shape");
  }
  for (const auto& row : rel) {
    if (row.size() != s.tags.size()) {
      throw ValidationError("relevance row has wrong width");
    }
  }
}

}  // namespace

double map_score(const ScoreMatrix& s, const Relevance& rel) {
  check_shapes(s, rel);
  double sum = 0.0;
  long counted = 0;
  std::vector<double> col(static_cast<std::size_t>(s.scores.rows()));
  std::vector<char> col_rel(col.size());
  for (std::size_t j = 0; j < s.tags.size(); ++j) {
    long n_pos = 0;
    for (std::size_t i = 0; i < col.size(); ++i) {
      col[i] = s.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      col_rel[i] = rel[i][j];
      n_pos += rel[i][j];
    }
    if (n_pos == 0) continue;
    sum += average_precision(col, col_rel);
    ++counted;
  }
  if (counted == 0) {
    throw ValidationError("no evaluated tag has a positive image");
  }
  return sum / static_cast<double>(counted);
}

PrfResult prf_at_k(const ScoreMatrix& s, const Relevance& rel, int k) {
  check_shapes(s, rel);
  if (k < 1 || k > static_cast<int>(s.tags.size())) {
    throw ValidationError("k must be in [1, " + std::to_string(s.tags.size()) + "]");
  }
  long tp = 0, total_rel = 0;
  std::vector<std::size_t> order(s.tags.size());
  for (Eigen::Index i = 0; i < s.scores.rows(); ++i) {
    std::iota(order.begin(), order.end(), 0);
    // Stable sort on descending score; index order is lexicographic tag
    // order, which settles ties.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return s.scores(i, static_cast<Eigen::Index>(a)) >
             s.scores(i, static_cast<Eigen::Index>(b));
    });
    for (int r = 0; r < k; ++r) {
      tp += rel[static_cast<std::size_t>(i)][order[static_cast<std::size_t>(r)]];
    }
    for (char c : rel[static_cast<std::size_t>(i)]) total_rel += c;
  }
  if (total_rel == 0) {
    throw ValidationError("no relevant labels in the evaluation set");
  }
  PrfResult out;
  out.precision = static_cast<double>(tp) /
                  (static_cast<double>(k) * static_cast<double>(s.scores.rows()));
  out.recall = static_cast<double>(tp) / static_cast<double>(total_rel);
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

MetricsReport evaluate(const ScoreMatrix& s, const Relevance& rel,
                       const std::vector<int>& ks) {
  check_shapes(s, rel);
  MetricsReport report;
  report.n_images = s.scores.rows();
  report.n_tags = static_cast<long>(s.tags.size());

  double sum = 0.0;
  std::vector<double> col(static_cast<std::size_t>(s.scores.rows()));
  std::vector<char> col_rel(col.size());
  for (std::size_t j = 0; j < s.tags.size(); ++j) {
    long n_pos = 0;
    for (std::size_t i = 0; i < col.size(); ++i) {
      col[i] = s.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      col_rel[i] = rel[i][j];
      n_pos += rel[i][j];
    }
    if (n_pos == 0) {
      report.skipped_labels.push_back(s.tags[j]);
      continue;
    }
    const double ap = average_precision(col, col_rel);
    report.per_label_ap.emplace_back(s.tags[j], ap);
    sum += ap;
  }
  if (report.per_label_ap.empty()) {
    throw ValidationError("no evaluated tag has a positive image");
  }
  report.map = sum / static_cast<double>(report.per_label_ap.size());

  for (int k : std::set<int>(ks.begin(), ks.end())) {
    report.at_k[k] = prf_at_k(s, rel, k);
  }
  return report;
}

MetricsReport diverse_subset_eval(const ScoreMatrix& s, const Relevance& rel,
                                  int min_labels, int k) {
  check_shapes(s, rel);
  if (min_labels < 0) throw ValidationError("min_labels must be >= 0");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < rel.size(); ++i) {
    long cnt = 0;
    for (char c : rel[i]) cnt += c;
    if (cnt > min_labels) keep.push_back(i);
  }
  if (keep.empty()) {
    throw ValidationError("no image has more than " + std::to_string(min_labels) +
                          " relevant tags");
  }
  ScoreMatrix sub;
  sub.tags = s.tags;
  sub.scores = Mat(static_cast<Eigen::Index>(keep.size()), s.scores.cols());
  sub.argmax_rows.resize(static_cast<Eigen::Index>(keep.size()), s.scores.cols());
  Relevance sub_rel;
  sub_rel.reserve(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    sub.image_ids.push_back(s.image_ids[keep[r]]);
    sub.scores.row(static_cast<Eigen::Index>(r)) =
        s.scores.row(static_cast<Eigen::Index>(keep[r]));
    sub.argmax_rows.row(static_cast<Eigen::Index>(r)) =
        s.argmax_rows.row(static_cast<Eigen::Index>(keep[r]));
    sub_rel.push_back(rel[keep[r]]);
  }
  return evaluate(sub, sub_rel, {k});
}

std::vector<std::pair<std::string, double>> retrieve(const ScoreMatrix& s,
                                                     const std::string& tag,
                                                     std::size_t top_n) {
  const auto it = std::find(s.tags.begin(), s.tags.end(), tag);
  if (it == s.tags.end()) {
    throw ValidationError("tag '" + tag + "' is not in the scored tag list");
  }
  const auto j = static_cast<Eigen::Index>(it - s.tags.begin());
  std::vector<std::size_t> order(s.image_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = s.scores(static_cast<Eigen::Index>(a), j);
    const double sb = s.scores(static_cast<Eigen::Index>(b), j);
    if (sa != sb) return sa > sb;
    return s.image_ids[a] < s.image_ids[b];
  });
  const std::size_t take = std::min(top_n, order.size());
  std::vector<std::pair<std::string, double>> out;
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    out.emplace_back(s.image_ids[order[r]], s.scores(static_cast<Eigen::Index>(order[r]), j));
  }
  return out;
}

std::string row_attribution_report(const ScoreMatrix& s, const Relevance& rel,
                                   int top_k) {
  check_shapes(s, rel);
  if (top_k < 1 || top_k > static_cast<int>(s.tags.size())) {
    throw ValidationError("top_k must be in [1, " + std::to_string(s.tags.size()) + "]");
  }
  std::string out;
  std::vector<std::size_t> order(s.tags.size());
  for (Eigen::Index i = 0; i < s.scores.rows(); ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return s.scores(i, static_cast<Eigen::Index>(a)) >
             s.scores(i, static_cast<Eigen::Index>(b));
    });
    // Top tags grouped by the row that won the max; rows in index order,
    // tags inside a row in score order.
    std::map<int, json> rows;
    for (int r = 0; r < top_k; ++r) {
      const auto j = order[static_cast<std::size_t>(r)];
      const int row = s.argmax_rows(i, static_cast<Eigen::Index>(j));
      json entry;
      entry["tag"] = s.tags[j];
      entry["score"] = s.scores(i, static_cast<Eigen::Index>(j));
      entry["relevant"] = rel[static_cast<std::size_t>(i)][j] != 0;
      rows[row].push_back(std::move(entry));
    }
    json obj;
    obj["id"] = s.image_ids[static_cast<std::size_t>(i)];
    obj["rows"] = json::array();
    for (auto& [row, tags] : rows) {
      json group;
      group["row"] = row;
      group["tags"] = std::move(tags);
      obj["rows"].push_back(std::move(group));
    }
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::string report_to_json(const MetricsReport& report, int indent) {
  json obj;
  obj["map"] = report.map;
  obj["n_images"] = report.n_images;
  obj["n_tags"] = report.n_tags;
  json ap = json::object();
  for (const auto& [label, value] : report.per_label_ap) ap[label] = value;
  obj["per_label_ap"] = std::move(ap);
  obj["skipped_labels"] = report.skipped_labels;
  json prf = json::array();
  for (const auto& [k, r] : report.at_k) {
    json row;
    row["k"] = k;
    row["precision"] = r.precision;
    row["recall"] = r.recall;
    row["f1"] = r.f1;
    prf.push_back(std::move(row));
  }
  obj["prf"] = std::move(prf);
  return obj.dump(indent) + "\n";
}

}  // namespace sdl
