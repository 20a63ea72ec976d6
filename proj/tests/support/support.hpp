#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "stylespace/matrix.hpp"
#include "stylespace/rng.hpp"

namespace stylespace::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("stylespace-" + tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
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

/// `k` isotropic Gaussian blobs of `per` points in `dim` dimensions, centres
/// `separation` standard deviations apart along distinct axes. Labels are
/// blob indices, rows grouped by blob.
inline Matrix blobs(std::size_t k, std::size_t per, std::size_t dim, double separation, std::uint64_t seed,
                    std::vector<std::size_t>* labels = nullptr) {
  Rng rng(seed);
  Matrix x(k * per, dim);
  if (labels) labels->clear();
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < per; ++i) {
      const std::size_t row = c * per + i;
      for (std::size_t j = 0; j < dim; ++j) x(row, j) = rng.normal();
      x(row, c % dim) += separation * static_cast<double>(c / dim + 1);
      if (labels) labels->push_back(c);
    }
  }
  return x;
}

}  // namespace stylespace::testing
