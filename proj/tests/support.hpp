#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "zskg/spaces.hpp"

namespace zskg::test {

inline Vector random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Vector v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  Matrix m(rows, cols);
  std::normal_distribution<double> dist(0.0, scale);
  for (double& x : m.flat()) x = dist(rng);
  return m;
}

inline std::vector<std::string> numbered_tokens(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string idx = std::to_string(i);
    out.push_back(prefix + std::string(3 - std::min<std::size_t>(3, idx.size()), '0') + idx);
  }
  return out;
}

// Single identity layer and no projection: fused(x) == x, G(token) == row.
inline SpaceModel identity_space(SpaceKind kind, std::vector<std::string> tokens, Matrix targets) {
  const std::size_t d = targets.cols();
  FusionModel f({d, d});
  for (std::size_t i = 0; i < d; ++i) f.layers()[0].weight(i, i) = 1.0;
  return SpaceModel(kind, {std::move(f), Matrix()}, TargetTable(std::move(tokens), std::move(targets)));
}

// Glorot network plus projection over random frozen inputs.
inline SpaceModel random_space(std::mt19937_64& rng, std::size_t n_targets, std::vector<std::size_t> dims,
                               std::size_t embedding_dim, bool projection = true) {
  SpaceParameters p;
  p.fusion = FusionModel::glorot(dims, rng);
  if (projection) p.projection = random_matrix(rng, dims.back(), embedding_dim, 0.3);
  const std::size_t in_dim = projection ? embedding_dim : dims.back();
  return SpaceModel(SpaceKind::answer, std::move(p),
                    TargetTable(numbered_tokens("t", n_targets), random_matrix(rng, n_targets, in_dim)));
}

// Fresh scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("zskg_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace zskg::test
