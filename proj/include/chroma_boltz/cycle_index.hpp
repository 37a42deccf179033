#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "chroma_boltz/spec_lang.hpp"

namespace chroma_boltz {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Exponent vector (n_1, ..., n_W) of s_1^{n_1} s_2^{n_2} ... s_W^{n_W}.
using Monomial = std::vector<unsigned>;

std::size_t weighted_degree(const Monomial& m);
std::size_t part_count(const Monomial& m);
// "1", "s1^2", "s1 s2", ... (trailing zero exponents ignored).
std::string to_string(const Monomial& m);

struct SeriesLimits {
  std::size_t max_weight = 8;
};

/// Truncated cycle-index sum of one class: every monomial of weighted
/// degree <= max_weight with its exact coefficient.
struct CycleIndexSeries {
  std::string class_name;
  std::size_t max_weight = 0;
  std::map<Monomial, Rational> terms;

  Rational coefficient(const Monomial& m) const;
  // Terms ordered by weighted degree, then by decreasing n_1, n_2, ...
  std::vector<std::pair<Monomial, Rational>> ordered_terms() const;
};

// Builds a monomial of width `width` from (index, exponent) pairs.
Monomial make_monomial(std::size_t width, std::initializer_list<std::pair<std::size_t, unsigned>> powers);

/// Throws CapExceeded when W exceeds limits.max_weight.
CycleIndexSeries series_cycle_index(const SpecSystem& system, std::string_view cls, std::size_t max_weight,
                                    SeriesLimits limits = {});
CycleIndexSeries series_cycle_index(const CompiledSystem& system, int cls, std::size_t max_weight,
                                    SeriesLimits limits = {});

// [x^0..x^W] of the series after s_i <- t x^i (exact).
std::vector<Rational> substitute_colors(const CycleIndexSeries& series, const Rational& t);

/// Coefficients [x^0..x^N] of f(x, t) for integer t.
std::vector<BigInt> series_f(const SpecSystem& system, std::string_view cls, unsigned t, std::size_t max_size,
                             SeriesLimits limits = {});
std::vector<BigInt> series_f(const CompiledSystem& system, int cls, unsigned t, std::size_t max_size,
                             SeriesLimits limits = {});

/// alpha(w): minimum total part count over profiles of weighted degree w with a
/// nonzero cycle-index coefficient, for w = 0..max_weight. Entries are
/// kInfiniteSize where the class has no object of that size.
std::vector<std::size_t> min_parts_table(const CompiledSystem& system, int cls, std::size_t max_weight);

/// Throws NoProfile if no object has size `weight`, CapExceeded above dp_cap.
std::size_t min_parts(const SpecSystem& system, std::string_view cls, std::size_t weight, std::size_t dp_cap = 4096);

}  // namespace chroma_boltz
