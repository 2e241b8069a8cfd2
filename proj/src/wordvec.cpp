#include "sdl/wordvec.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace sdl {

std::string canonical_label(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  for (unsigned char c : label) {
    if (std::isspace(c)) {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  return out;
}

namespace {

// Unit-norm within 1e-12 is left untouched so that save/parse round trips
// are byte-stable; anything else is scaled to unit norm.
void normalize_in_place(Vec& v, const std::string& label) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ValidationError("zero-norm vector for label '" + label + "'");
  }
  if (std::abs(norm - 1.0) > 1e-12) {
    v /= norm;
  }
  if (!v.allFinite()) {
    throw ValidationError("non-finite vector after normalization for label '" + label + "'");
  }
}

double parse_double(std::string_view tok, const std::string& context) {
  double value = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ValidationError("bad float '" + std::string(tok) + "' " + context);
  }
  if (!std::isfinite(value)) {
    throw ValidationError("non-finite value '" + std::string(tok) + "' " + context);
  }
  return value;
}

void append_double(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, static_cast<std::size_t>(ptr - buf));
  (void)ec;
}

}  // namespace

WordVecTable::WordVecTable(int dim) : dim_(dim) {
  if (dim < 1) {
    throw ValidationError("word vector dimension must be positive");
  }
}

void WordVecTable::insert(const std::string& label, Vec v) {
  if (v.size() != dim_) {
    throw ValidationError("vector for '" + label + "' has dimension " +
                          std::to_string(v.size()) + ", table expects " +
                          std::to_string(dim_));
  }
  std::string key = canonical_label(label);
  if (key.empty()) {
    throw ValidationError("empty label");
  }
  if (index_.count(key)) {
    throw ValidationError("duplicate label '" + key + "' after canonicalization");
  }
  normalize_in_place(v, key);
  index_.emplace(key, entries_.size());
  entries_.emplace_back(std::move(key), std::move(v));
}

bool WordVecTable::contains(const std::string& label) const {
  return index_.count(canonical_label(label)) > 0;
}

Vec WordVecTable::lookup(const std::string& label) const {
  const std::string key = canonical_label(label);
  if (auto it = index_.find(key); it != index_.end()) {
    return entries_[it->second].second;
  }
  // Multi-token fallback: mean of the tokens' vectors, renormalized.
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start <= key.size()) {
    std::size_t end = key.find('_', start);
    if (end == std::string::npos) end = key.size();
    if (end > start) tokens.emplace_back(key.substr(start, end - start));
    start = end + 1;
  }
  if (tokens.size() < 2) {
    throw ValidationError("label '" + key + "' not in word vector table");
  }
  Vec mean = Vec::Zero(dim_);
  for (const auto& tok : tokens) {
    auto it = index_.find(tok);
    if (it == index_.end()) {
      throw ValidationError("label '" + key + "' not in table and token '" + tok +
                            "' missing");
    }
    mean += entries_[it->second].second;
  }
  mean /= static_cast<double>(tokens.size());
  const double norm = mean.norm();
  if (!(norm > 0.0)) {
    throw ValidationError("token vectors of '" + key + "' cancel to zero");
  }
  mean /= norm;
  return mean;
}

void WordVecTable::save(const std::string& path) const {
  std::string out;
  out += std::to_string(entries_.size());
  out += ' ';
  out += std::to_string(dim_);
  out += '\n';
  for (const auto& [label, v] : entries_) {
    out += label;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out += ' ';
      append_double(out, v[i]);
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw ValidationError("cannot open '" + path + "' for writing");
  }
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) {
    throw ValidationError("short write to '" + path + "'");
  }
}

WordVecTable WordVecTable::parse_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw ValidationError("cannot open word vector file '" + path + "'");
  }
  std::string line;
  if (!std::getline(f, line)) {
    throw ValidationError("'" + path + "': empty file, expected '<count> <dim>' header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  long declared = -1;
  int dim = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> declared >> dim) || (header >> extra) || declared < 0 || dim < 1) {
      throw ValidationError("'" + path + "': malformed header '" + line + "'");
    }
  }

  WordVecTable table(dim);
  long line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && f.peek() == std::ifstream::traits_type::eof()) break;

    const std::string context = "at " + path + ":" + std::to_string(line_no);
    std::vector<std::string_view> tokens;
    std::string_view rest = line;
    while (true) {
      std::size_t sp = rest.find(' ');
      if (sp == std::string_view::npos) {
        tokens.push_back(rest);
        break;
      }
      tokens.push_back(rest.substr(0, sp));
      rest.remove_prefix(sp + 1);
    }
    if (tokens.size() != static_cast<std::size_t>(dim) + 1 || tokens[0].empty()) {
      throw ValidationError("expected <token> + " + std::to_string(dim) + " floats " +
                            context + ", got " + std::to_string(tokens.size()) +
                            " fields");
    }
    Vec v(dim);
    for (int i = 0; i < dim; ++i) {
      v[i] = parse_double(tokens[static_cast<std::size_t>(i) + 1], context);
    }
    table.insert(std::string(tokens[0]), std::move(v));
  }
  if (static_cast<long>(table.size()) != declared) {
    throw ValidationError("'" + path + "': header declares " + std::to_string(declared) +
                          " entries, file has " + std::to_string(table.size()));
  }
  return table;
}

}  // namespace sdl
