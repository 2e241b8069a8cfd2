#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sdl/common.hpp"

namespace sdl {

// Feature vectors, per-image label sets, and the seen/unseen split.
// Labels are canonical, unique and sorted per image. Immutable after load.
struct Dataset {
  std::vector<std::string> ids;
  Mat features;  // N x d_f
  std::vector<std::vector<std::string>> labels;
  std::vector<std::string> seen;    // sorted canonical
  std::vector<std::string> unseen;  // sorted canonical, disjoint from seen

  Eigen::Index n() const { return features.rows(); }
  Eigen::Index d_f() const { return features.cols(); }
  bool is_seen(const std::string& label) const;
  bool is_unseen(const std::string& label) const;
};

// Feature file, little-endian throughout:
//   magic "SDLF" | u32 version=1 | u32 N | u32 d_f
//   N ids, each u16 byte-length + UTF-8 bytes
//   N * d_f float32, row-major
void save_features(const std::string& path, const std::vector<std::string>& ids,
                   const Mat& features);
std::pair<std::vector<std::string>, Mat> load_features(const std::string& path);

// TSV `image_id<TAB>comma-separated-labels`; empty label lists allowed.
// Ids absent from the file get empty sets; unknown or duplicate ids are errors.
std::vector<std::vector<std::string>> load_labels(
    const std::string& path, const std::vector<std::string>& ids);
void save_labels(const std::string& path, const std::vector<std::string>& ids,
                 const std::vector<std::vector<std::string>>& labels);

// One label per line. Seen must be non-empty and disjoint from unseen.
std::pair<std::vector<std::string>, std::vector<std::string>> load_split(
    const std::string& seen_path, const std::string& unseen_path);
void save_label_list(const std::string& path, const std::vector<std::string>& labels);

// Loads and cross-validates the four files: every annotated label must be
// classified as seen or unseen.
Dataset load_dataset(const std::string& features_path, const std::string& labels_path,
                     const std::string& seen_path, const std::string& unseen_path);

// Seeded permutation of 0..n-1 chunked into batches; the last one may be
// short. Identical (seed, epoch) gives an identical order.
std::vector<std::vector<int>> batches(std::size_t n, std::size_t batch_size,
                                      std::uint64_t seed, int epoch);

// Contiguous image range [lo, hi) with the split carried over.
Dataset slice(const Dataset& d, Eigen::Index lo, Eigen::Index hi);

}  // namespace sdl
