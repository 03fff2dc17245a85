#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "golden/errors.hpp"

namespace golden {

/// Named residuals in insertion order.
class ResidualMap {
 public:
  using Entry = std::pair<std::string, double>;

  void set(const std::string& name, double value) {
    for (auto& e : entries_)
      if (e.first == name) {
        e.second = value;
        return;
      }
    entries_.emplace_back(name, value);
  }

  /// Keeps the larger of the stored and the new value (max-reduction).
  void raise(const std::string& name, double value) {
    for (auto& e : entries_)
      if (e.first == name) {
        if (!(value <= e.second)) e.second = value;  // NaN propagates
        return;
      }
    entries_.emplace_back(name, value);
  }

  void merge_max(const ResidualMap& other) {
    for (const auto& [k, v] : other.entries_) raise(k, v);
  }

  double at(const std::string& name) const {
    for (const auto& e : entries_)
      if (e.first == name) return e.second;
    throw Error("no residual named '" + name + "'");
  }
  bool contains(const std::string& name) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.first == name; });
  }

  double max() const {
    double m = 0;
    for (const auto& e : entries_)
      if (!(e.second <= m)) m = e.second;
    return m;
  }
  bool all_within(double tol) const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [&](const Entry& e) { return std::isfinite(e.second) && e.second <= tol; });
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<Entry> entries_;
};

}  // namespace golden
