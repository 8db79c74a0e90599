#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace dcpl {

struct Parameter {
  std::string name;
  double value = 0.0;
  bool fixed = false;
};

// Ordered, uniquely named parameters with a fixed/free mask. The optimizer
// works on the free sub-vector; fixed entries are never touched.
class ParameterVector {
 public:
  ParameterVector() = default;
  explicit ParameterVector(std::vector<Parameter> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const Parameter& operator[](std::size_t i) const { return entries_[i]; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t require_index(std::string_view name) const;
  double value(std::string_view name) const;

  void set_value(std::size_t i, double v) { entries_[i].value = v; }
  void fix(std::size_t i, double v);
  void fix(std::string_view name, double v) { fix(require_index(name), v); }
  void release(std::size_t i) { entries_[i].fixed = false; }

  Eigen::VectorXd values() const;
  void set_values(const Eigen::VectorXd& v);

  std::size_t free_count() const noexcept;
  std::vector<std::size_t> free_indices() const;
  Eigen::VectorXd free_values() const;
  void set_free_values(const Eigen::VectorXd& v);
  std::vector<std::string> names() const;
  std::vector<std::string> free_names() const;

  // Entries equal by name, value and mask (bitwise on values).
  bool operator==(const ParameterVector& other) const;

 private:
  std::vector<Parameter> entries_;
};

}  // namespace dcpl
