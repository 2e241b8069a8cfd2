#include "sdl/data.hpp"

#include "sdl/wordvec.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace sdl {

namespace {

constexpr char kMagic[4] = {'S', 'D', 'L', 'F'};
constexpr std::uint32_t kVersion = 1;

// Plausibility bounds so a corrupt header fails cleanly instead of attempting
// a giant allocation.
constexpr std::uint64_t kMaxRows = 50'000'000;
constexpr std::uint64_t kMaxCols = 1'000'000;
constexpr std::uint64_t kMaxElems = 1'000'000'000;

void write_u32(std::ofstream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& f) {
  std::uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> read_label_lines(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    throw ValidationError("cannot open label list '" + path + "'");
  }
  std::vector<std::string> labels;
  std::set<std::string> dedup;
  std::string line;
  long line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string label = canonical_label(trim(line));
    if (label.empty()) continue;
    if (!dedup.insert(label).second) {
      throw ValidationError("duplicate label '" + label + "' at " + path + ":" +
                            std::to_string(line_no));
    }
    labels.push_back(label);
  }
  std::sort(labels.begin(), labels.end());
  return labels;
}

}  // namespace

bool Dataset::is_seen(const std::string& label) const {
  return std::binary_search(seen.begin(), seen.end(), label);
}

bool Dataset::is_unseen(const std::string& label) const {
  return std::binary_search(unseen.begin(), unseen.end(), label);
}

void save_features(const std::string& path, const std::vector<std::string>& ids,
                   const Mat& features) {
  if (static_cast<Eigen::Index>(ids.size()) != features.rows()) {
    throw ValidationError("id count does not match feature rows");
  }
  if (features.cols() < 1) {
    throw ValidationError("features need at least one dimension");
  }
  if (!features.allFinite()) {
    throw NumericError("refusing to save non-finite features");
  }
  std::unordered_set<std::string> dedup;
  for (const auto& id : ids) {
    if (id.empty() || id.size() > 65535) {
      throw ValidationError("image id must be 1..65535 bytes");
    }
    if (!dedup.insert(id).second) {
      throw ValidationError("duplicate image id '" + id + "'");
    }
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw ValidationError("cannot open '" + path + "' for writing");
  }
  f.write(kMagic, 4);
  write_u32(f, kVersion);
  write_u32(f, static_cast<std::uint32_t>(ids.size()));
  write_u32(f, static_cast<std::uint32_t>(features.cols()));
  for (const auto& id : ids) {
    const std::uint16_t len = static_cast<std::uint16_t>(id.size());
    f.write(reinterpret_cast<const char*>(&len), sizeof(len));
    f.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> ff =
      features.cast<float>();
  f.write(reinterpret_cast<const char*>(ff.data()),
          static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(ff.size())));
  if (!f) {
    throw ValidationError("short write to '" + path + "'");
  }
}

std::pair<std::vector<std::string>, Mat> load_features(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw ValidationError("cannot open feature file '" + path + "'");
  }
  char magic[4] = {};
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0) {
    throw ValidationError("'" + path + "' is not a feature file");
  }
  const std::uint32_t version = read_u32(f);
  if (version != kVersion) {
    throw ValidationError("'" + path + "': unsupported feature file version " +
                          std::to_string(version));
  }
  const std::uint32_t n = read_u32(f);
  const std::uint32_t d_f = read_u32(f);
  if (!f || d_f < 1 || n > kMaxRows || d_f > kMaxCols ||
      static_cast<std::uint64_t>(n) * d_f > kMaxElems) {
    throw ValidationError("'" + path + "': implausible feature header");
  }

  std::vector<std::string> ids(n);
  std::unordered_set<std::string> dedup;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint16_t len = 0;
    f.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!f || len == 0) {
      throw ValidationError("'" + path + "': corrupt id record " + std::to_string(i));
    }
    ids[i].resize(len);
    f.read(ids[i].data(), len);
    if (!f) {
      throw ValidationError("'" + path + "': truncated id record " + std::to_string(i));
    }
    if (!dedup.insert(ids[i]).second) {
      throw ValidationError("'" + path + "': duplicate image id '" + ids[i] + "'");
    }
  }

  std::vector<float> buf(static_cast<std::size_t>(n) * d_f);
  f.read(reinterpret_cast<char*>(buf.data()),
         static_cast<std::streamsize>(sizeof(float) * buf.size()));
  if (!f) {
    throw ValidationError("'" + path + "': truncated feature matrix");
  }
  if (f.peek() != std::ifstream::traits_type::eof()) {
    throw ValidationError("'" + path + "': trailing bytes after feature matrix");
  }
  Mat features =
      Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>(
          buf.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d_f))
          .cast<double>();
  if (!features.allFinite()) {
    throw ValidationError("'" + path + "': non-finite feature values");
  }
  return {std::move(ids), std::move(features)};
}

std::vector<std::vector<std::string>> load_labels(
    const std::string& path, const std::vector<std::string>& ids) {
  std::ifstream f(path);
  if (!f) {
    throw ValidationError("cannot open label file '" + path + "'");
  }
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);

  std::vector<std::vector<std::string>> labels(ids.size());
  std::vector<char> filled(ids.size(), 0);
  std::string line;
  long line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string context = path + ":" + std::to_string(line_no);
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ValidationError("expected <id><TAB><labels> at " + context);
    }
    const std::string id = line.substr(0, tab);
    auto it = index.find(id);
    if (it == index.end()) {
      throw ValidationError("unknown image id '" + id + "' at " + context);
    }
    if (filled[it->second]) {
      throw ValidationError("duplicate image id '" + id + "' at " + context);
    }
    filled[it->second] = 1;

    std::set<std::string> parsed;
    std::string_view rest = std::string_view(line).substr(tab + 1);
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const std::string_view tok = rest.substr(0, comma);
      const std::string label = canonical_label(trim(tok));
      if (!label.empty()) parsed.insert(label);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    labels[it->second].assign(parsed.begin(), parsed.end());
  }
  return labels;
}

void save_labels(const std::string& path, const std::vector<std::string>& ids,
                 const std::vector<std::vector<std::string>>& labels) {
  if (ids.size() != labels.size()) {
    throw ValidationError("id count does not match label rows");
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw ValidationError("cannot open '" + path + "' for writing");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    f << ids[i] << '\t';
    for (std::size_t j = 0; j < labels[i].size(); ++j) {
      if (j) f << ',';
      f << labels[i][j];
    }
    f << '\n';
  }
  if (!f) {
    throw ValidationError("short write to '" + path + "'");
  }
}

std::pair<std::vector<std::string>, std::vector<std::string>> load_split(
    const std::string& seen_path, const std::string& unseen_path) {
  auto seen = read_label_lines(seen_path);
  auto unseen = read_label_lines(unseen_path);
  if (seen.empty()) {
    throw ValidationError("'" + seen_path + "' defines no seen labels");
  }
  std::vector<std::string> overlap;
  std::set_intersection(seen.begin(), seen.end(), unseen.begin(), unseen.end(),
                        std::back_inserter(overlap));
  if (!overlap.empty()) {
    throw ValidationError("label '" + overlap.front() + "' is both seen and unseen");
  }
  return {std::move(seen), std::move(unseen)};
}

void save_label_list(const std::string& path, const std::vector<std::string>& labels) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw ValidationError("cannot open '" + path + "' for writing");
  }
  for (const auto& label : labels) f << label << '\n';
  if (!f) {
    throw ValidationError("short write to '" + path + "'");
  }
}

Dataset load_dataset(const std::string& features_path, const std::string& labels_path,
                     const std::string& seen_path, const std::string& unseen_path) {
  Dataset d;
  auto [ids, features] = load_features(features_path);
  d.ids = std::move(ids);
  d.features = std::move(features);
  d.labels = load_labels(labels_path, d.ids);
  std::tie(d.seen, d.unseen) = load_split(seen_path, unseen_path);
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    for (const auto& label : d.labels[i]) {
      if (!d.is_seen(label) && !d.is_unseen(label)) {
        throw ValidationError("label '" + label + "' on image '" + d.ids[i] +
                              "' is in neither split");
      }
    }
  }
  return d;
}

std::vector<std::vector<int>> batches(std::size_t n, std::size_t batch_size,
                                      std::uint64_t seed, int epoch) {
  if (batch_size < 1) {
    throw ValidationError("batch size must be >= 1");
  }
  if (epoch < 0) {
    throw ValidationError("epoch must be >= 0");
  }
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  std::mt19937_64 rng(mix_seed(seed, 1000 + static_cast<std::uint64_t>(epoch)));
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<int>> out;
  out.reserve((n + batch_size - 1) / batch_size);
  for (std::size_t i = 0; i < n; i += batch_size) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + batch_size)));
  }
  return out;
}

Dataset slice(const Dataset& d, Eigen::Index lo, Eigen::Index hi) {
  if (lo < 0 || hi < lo || hi > d.n()) {
    throw ValidationError("invalid slice range");
  }
  Dataset out;
  out.ids.assign(d.ids.begin() + lo, d.ids.begin() + hi);
  out.features = d.features.middleRows(lo, hi - lo);
  out.labels.assign(d.labels.begin() + lo, d.labels.begin() + hi);
  out.seen = d.seen;
  out.unseen = d.unseen;
  return out;
}

}  // namespace sdl
