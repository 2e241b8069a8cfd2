#include "sdl/model.hpp"

#include <cstring>
#include <fstream>
#include <random>
#include <vector>

namespace sdl {

namespace {

constexpr char kMagic[4] = {'S', 'D', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kInitStream = 1;

void check_shapes(const ModelParams& p) {
  const Eigen::Index rows = static_cast<Eigen::Index>(p.m) * p.d_w;
  if (p.m < 1 || p.d_w < 1 || p.d_f < 1 || p.w.rows() != rows ||
      p.w.cols() != p.d_f || p.b.size() != rows) {
    throw ValidationError("inconsistent model shapes");
  }
}

void write_u32(std::ofstream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& f) {
  std::uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

ModelParams init_params(int m, int d_w, int d_f, std::uint64_t seed,
                        LossVariant variant) {
  if (m < 1 || d_w < 1 || d_f < 1) {
    throw ValidationError("model dimensions must be positive");
  }
  if (variant == LossVariant::kFast0Tag && m != 1) {
    throw ValidationError("fast0tag requires m = 1");
  }
  ModelParams p;
  p.m = m;
  p.d_w = d_w;
  p.d_f = d_f;
  p.variant = variant;
  p.seed = seed;

  const Eigen::Index rows = static_cast<Eigen::Index>(m) * d_w;
  std::mt19937_64 rng(mix_seed(seed, kInitStream));
  std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(d_f)));
  p.w = Mat(rows, d_f);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < d_f; ++j) {
      p.w(i, j) = gauss(rng);
    }
  }
  p.b = Vec::Zero(rows);
  return p;
}

Mat forward(const ModelParams& params, const Vec& x) {
  check_shapes(params);
  if (x.size() != params.d_f) {
    throw ValidationError("feature vector has dimension " + std::to_string(x.size()) +
                          ", model expects " + std::to_string(params.d_f));
  }
  const Vec flat = params.w * x + params.b;
  return Eigen::Map<const Mat>(flat.data(), params.m, params.d_w);
}

HeadGrads backward(const ModelParams& params, const Vec& x, const Mat& grad_a) {
  check_shapes(params);
  if (x.size() != params.d_f || grad_a.rows() != params.m || grad_a.cols() != params.d_w) {
    throw ValidationError("backward received mismatched shapes");
  }
  const Eigen::Map<const Vec> g(grad_a.data(), grad_a.size());
  HeadGrads out;
  out.grad_w = g * x.transpose();
  out.grad_b = g;
  return out;
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
  check_shapes(params);
  if (!params.w.allFinite() || !params.b.allFinite()) {
    throw NumericError("refusing to save non-finite parameters");
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw ValidationError("cannot open '" + path + "' for writing");
  }
  f.write(kMagic, 4);
  write_u32(f, kVersion);
  write_u32(f, static_cast<std::uint32_t>(params.m));
  write_u32(f, static_cast<std::uint32_t>(params.d_w));
  write_u32(f, static_cast<std::uint32_t>(params.d_f));

  const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> wf =
      params.w.cast<float>();
  const Eigen::VectorXf bf = params.b.cast<float>();
  f.write(reinterpret_cast<const char*>(wf.data()),
          static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(wf.size())));
  f.write(reinterpret_cast<const char*>(bf.data()),
          static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(bf.size())));
  if (!f) {
    throw ValidationError("short write to '" + path + "'");
  }
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) {
    throw ValidationError("cannot open checkpoint '" + path + "'");
  }
  const std::uint64_t file_size = static_cast<std::uint64_t>(f.tellg());
  f.seekg(0);

  char magic[4] = {};
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0) {
    throw ValidationError("'" + path + "' is not a model checkpoint");
  }
  const std::uint32_t version = read_u32(f);
  if (version != kVersion) {
    throw ValidationError("'" + path + "': unsupported checkpoint version " +
                          std::to_string(version));
  }
  const std::uint32_t m = read_u32(f);
  const std::uint32_t d_w = read_u32(f);
  const std::uint32_t d_f = read_u32(f);
  if (!f || m < 1 || d_w < 1 || d_f < 1) {
    throw ValidationError("'" + path + "': corrupt checkpoint header");
  }
  const std::uint64_t rows = static_cast<std::uint64_t>(m) * d_w;
  const std::uint64_t expected = 20 + 4 * (rows * d_f + rows);
  if (file_size != expected) {
    throw ValidationError("'" + path + "': expected " + std::to_string(expected) +
                          " bytes for " + std::to_string(m) + "x" + std::to_string(d_w) +
                          "x" + std::to_string(d_f) + ", file has " +
                          std::to_string(file_size));
  }

  std::vector<float> wf(rows * d_f), bf(rows);
  f.read(reinterpret_cast<char*>(wf.data()),
         static_cast<std::streamsize>(sizeof(float) * wf.size()));
  f.read(reinterpret_cast<char*>(bf.data()),
         static_cast<std::streamsize>(sizeof(float) * bf.size()));
  if (!f) {
    throw ValidationError("'" + path + "': truncated checkpoint");
  }

  ModelParams p;
  p.m = static_cast<int>(m);
  p.d_w = static_cast<int>(d_w);
  p.d_f = static_cast<int>(d_f);
  p.w = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>(
            wf.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d_f))
            .cast<double>();
  p.b = Eigen::Map<const Eigen::VectorXf>(bf.data(), static_cast<Eigen::Index>(rows))
            .cast<double>();
  if (!p.w.allFinite() || !p.b.allFinite()) {
    throw ValidationError("'" + path + "': checkpoint holds non-finite values");
  }
  return p;
}

}  // namespace sdl
