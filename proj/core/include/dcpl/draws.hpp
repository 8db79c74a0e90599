#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dcpl {

// Dimension bound of the embedded direction-number table.
inline constexpr std::size_t kMaxSobolDimension = 21;

// Gray-code Sobol generator over 32-bit direction integers. Point index 0 is
// the origin; `skip` points are discarded on construction.
class SobolSequence {
 public:
  explicit SobolSequence(std::size_t dimension, std::size_t skip = 1,
                         std::optional<std::uint64_t> shift_seed = std::nullopt);

  std::size_t dimension() const noexcept { return dimension_; }
  void next(std::span<double> out);

 private:
  void advance();

  std::size_t dimension_;
  std::uint64_t index_ = 0;
  std::vector<std::uint32_t> directions_;  // dimension x 32
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> shift_;
};

// First `count` points (rows) after `skip`, each row a point in [0,1)^dim.
Eigen::MatrixXd sobol_sequence(std::size_t count, std::size_t dim, std::size_t skip = 1);

// Standard normal quantile; accurate to ~1e-15 relative on [1e-300, 1 - 1e-16].
double inv_normal_cdf(double u);

struct SobolConfig {
  std::size_t draws_per_person = 500;
  std::size_t dimensions = 1;
  std::size_t skip = 1;
  // Each base point generates all 2^dimensions per-axis reflections
  // u_d -> 1 - u_d, so the draw set is closed under flipping any subset of
  // coordinates. draws_per_person must be a multiple of 2^dimensions.
  bool antithetic = false;
  std::optional<std::uint64_t> shift_seed;  // random digital shift, off by default

  void validate() const;
};

struct DrawProvenance {
  std::string sequence = "sobol";
  std::size_t skip = 1;
  bool antithetic = false;
  std::optional<std::uint64_t> shift_seed;
  // Person n uses sequence points [n * per_person, (n + 1) * per_person).
  std::size_t points_per_person = 0;
};

// Standard-normal draws indexed (person, draw, dimension).
class DrawMatrix {
 public:
  DrawMatrix(std::size_t persons, std::size_t draws, std::size_t dimensions,
             std::vector<double> values, DrawProvenance provenance);

  std::size_t persons() const noexcept { return persons_; }
  std::size_t draws() const noexcept { return draws_; }
  std::size_t dimensions() const noexcept { return dimensions_; }
  const DrawProvenance& provenance() const noexcept { return provenance_; }

  std::span<const double> draw(std::size_t person, std::size_t r) const {
    return {values_.data() + (person * draws_ + r) * dimensions_, dimensions_};
  }
  double operator()(std::size_t person, std::size_t r, std::size_t d) const {
    return values_[(person * draws_ + r) * dimensions_ + d];
  }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t persons_;
  std::size_t draws_;
  std::size_t dimensions_;
  std::vector<double> values_;
  DrawProvenance provenance_;
};

DrawMatrix build_person_draws(const SobolConfig& cfg, std::size_t persons);

// Packed row-major lower triangle: entry (row, col), col <= row.
constexpr std::size_t packed_lower_index(std::size_t row, std::size_t col) {
  return row * (row + 1) / 2 + col;
}
constexpr std::size_t packed_lower_size(std::size_t dim) { return dim * (dim + 1) / 2; }

// beta_d = sign_d * exp(mean_d + (L z)_d).
Eigen::VectorXd cholesky_transform(const Eigen::VectorXd& mean,
                                   std::span<const double> packed_lower,
                                   std::span<const double> z, std::span<const double> signs);

}  // namespace dcpl
