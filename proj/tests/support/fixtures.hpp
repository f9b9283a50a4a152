#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "palign/archive.hpp"
#include "palign/matrix.hpp"

namespace palign::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("palign_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = normal(rng);
  return m;
}

/// Gaussian matrix rounded to float precision, as archive round-trips would.
inline Matrix random_float_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  Matrix m = random_matrix(rng, rows, cols);
  for (double& v : m.values()) v = static_cast<double>(static_cast<float>(v));
  return m;
}

inline std::vector<std::string> make_ids(std::size_t n, const std::string& prefix = "item") {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

inline ArchiveManifest make_manifest(std::string model_id, Modality modality, std::size_t n,
                                     std::size_t layers, std::size_t dim, std::size_t segments = 1) {
  ArchiveManifest m;
  m.model_id = std::move(model_id);
  m.modality = modality;
  m.item_count = n;
  m.layer_count = layers;
  m.dim = dim;
  m.segment_count = segments;
  m.item_ids = make_ids(n);
  return m;
}

/// Writes an S=1 archive whose layer l holds layers[l] (all same shape).
inline Archive write_matrix_archive(const std::filesystem::path& dir, const std::string& model_id,
                                    Modality modality, const std::vector<Matrix>& layers) {
  const std::size_t n = layers.front().rows();
  const std::size_t dim = layers.front().cols();
  auto manifest = make_manifest(model_id, modality, n, layers.size(), dim);
  std::vector<float> tensor;
  for (const auto& layer : layers) {
    for (double v : layer.values()) tensor.push_back(static_cast<float>(v));
  }
  write_archive(manifest, tensor, dir);
  return Archive::open(dir);
}

inline std::vector<float> random_tensor(std::mt19937_64& rng, std::size_t count) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> t(count);
  for (float& v : t) v = normal(rng);
  return t;
}

/// Random orthogonal matrix (Gram-Schmidt on a Gaussian matrix).
inline Matrix random_rotation(std::mt19937_64& rng, std::size_t dim) {
  Matrix q = random_matrix(rng, dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    auto ri = q.row(i);
    for (std::size_t j = 0; j < i; ++j) {
      const auto rj = q.row(j);
      double proj = 0.0;
      for (std::size_t d = 0; d < dim; ++d) proj += ri[d] * rj[d];
      for (std::size_t d = 0; d < dim; ++d) ri[d] -= proj * rj[d];
    }
    double norm = 0.0;
    for (double v : ri) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : ri) v /= norm;
  }
  return q;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double sum = 0.0;
      for (std::size_t t = 0; t < a.cols(); ++t) sum += a(i, t) * b(t, j);
      out(i, j) = sum;
    }
  }
  return out;
}

}  // namespace palign::testing
