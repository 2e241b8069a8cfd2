#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sdl/common.hpp"

namespace sdl {

// Lowercases ASCII letters and maps each whitespace character to '_'.
// Tag vocabularies are matched on this canonical form.
std::string canonical_label(std::string_view label);

// Label -> unit-norm word vector table in the fastText `.vec` text format.
// Immutable once loaded; safe for concurrent reads.
class WordVecTable {
 public:
  explicit WordVecTable(int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }

  // Canonicalizes the label and l2-normalizes the vector before storing.
  // Rejects duplicates, dimension mismatches and zero-norm vectors.
  void insert(const std::string& label, Vec v);

  // Exact entry for the canonical form of `label`, no fallback.
  bool contains(const std::string& label) const;

  // Exact canonical match, or, for a multi-token label ("new york"), the
  // l2-normalized mean of its tokens' vectors when every token is present.
  Vec lookup(const std::string& label) const;

  // Entries in insertion order.
  const std::vector<std::pair<std::string, Vec>>& entries() const { return entries_; }

  // Text format: header line "<count> <dim>", then one "<token> <f1> ... <f_dim>"
  // line per entry, single-space separated, shortest round-trip float repr.
  void save(const std::string& path) const;
  static WordVecTable parse_file(const std::string& path);

 private:
  int dim_;
  std::vector<std::pair<std::string, Vec>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace sdl
