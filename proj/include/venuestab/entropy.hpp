#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "venuestab/errors.hpp"

namespace venuestab {

// Shannon entropy (base 2) of a count distribution: -sum p*log2(p) with
// p = count/total. Zero counts contribute nothing; 0*log2(0) := 0.
// The shared kernel of every diversity index in the toolkit.
inline double shannon_entropy(std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) {
    if (c < 0.0) throw ValidationError("entropy counts must be nonnegative");
    total += c;
  }
  if (total <= 0.0) throw ValidationError("entropy needs at least one positive count");
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    double p = c / total;
    h -= p * std::log2(p);
  }
  return std::max(h, 0.0);
}

inline double shannon_entropy(const std::vector<double>& counts) {
  return shannon_entropy(std::span<const double>(counts));
}

// Map overload; iteration over the ordered map fixes the accumulation order,
// which keeps results bit-identical across runs.
template <typename Key, typename Count>
double shannon_entropy(const std::map<Key, Count>& counts) {
  std::vector<double> values;
  values.reserve(counts.size());
  for (const auto& [key, count] : counts) values.push_back(static_cast<double>(count));
  return shannon_entropy(values);
}

}  // namespace venuestab
