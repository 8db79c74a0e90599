#include "dcpl/parameters.hpp"

#include <unordered_set>
#include <utility>

#include "dcpl/errors.hpp"

namespace dcpl {

ParameterVector::ParameterVector(std::vector<Parameter> entries)
    : entries_(std::move(entries)) {
  std::unordered_set<std::string> seen;
  for (const auto& p : entries_) {
    if (p.name.empty()) {
      throw Error(ErrorKind::spec, "parameter with empty name");
    }
    if (!seen.insert(p.name).second) {
      throw Error(ErrorKind::spec, "duplicate parameter name '" + p.name + "'");
    }
  }
}

std::optional<std::size_t> ParameterVector::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParameterVector::require_index(std::string_view name) const {
  if (auto i = index_of(name)) return *i;
  throw Error(ErrorKind::spec, "unknown parameter '" + std::string(name) + "'");
}

double ParameterVector::value(std::string_view name) const {
  return entries_[require_index(name)].value;
}

void ParameterVector::fix(std::size_t i, double v) {
  entries_[i].value = v;
  entries_[i].fixed = true;
}

Eigen::VectorXd ParameterVector::values() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(entries_.size()));
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = entries_[i].value;
  }
  return v;
}

void ParameterVector::set_values(const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != entries_.size()) {
    throw Error(ErrorKind::spec, "parameter value count mismatch");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    entries_[i].value = v[static_cast<Eigen::Index>(i)];
  }
}

std::size_t ParameterVector::free_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : entries_) n += p.fixed ? 0 : 1;
  return n;
}

std::vector<std::size_t> ParameterVector::free_indices() const {
  std::vector<std::size_t> idx;
  idx.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!entries_[i].fixed) idx.push_back(i);
  }
  return idx;
}

Eigen::VectorXd ParameterVector::free_values() const {
  const auto idx = free_indices();
  Eigen::VectorXd v(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    v[static_cast<Eigen::Index>(j)] = entries_[idx[j]].value;
  }
  return v;
}

void ParameterVector::set_free_values(const Eigen::VectorXd& v) {
  const auto idx = free_indices();
  if (static_cast<std::size_t>(v.size()) != idx.size()) {
    throw Error(ErrorKind::spec, "free parameter count mismatch");
  }
  for (std::size_t j = 0; j < idx.size(); ++j) {
    entries_[idx[j]].value = v[static_cast<Eigen::Index>(j)];
  }
}

std::vector<std::string> ParameterVector::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& p : entries_) out.push_back(p.name);
  return out;
}

std::vector<std::string> ParameterVector::free_names() const {
  std::vector<std::string> out;
  for (const auto& p : entries_) {
    if (!p.fixed) out.push_back(p.name);
  }
  return out;
}

bool ParameterVector::operator==(const ParameterVector& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.fixed != b.fixed || a.value != b.value) return false;
  }
  return true;
}

}  // namespace dcpl
