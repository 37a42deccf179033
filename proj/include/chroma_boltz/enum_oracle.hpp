#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chroma_boltz/profiled.hpp"
#include "chroma_boltz/spec_lang.hpp"

namespace chroma_boltz {

struct EnumLimits {
  std::size_t max_size_cap = 8;
};

/// Canonical t-colored objects of one class, listed per size.
struct EnumTable {
  SpecSystem system;
  std::string class_name;
  unsigned t = 1;
  std::size_t max_size = 0;
  // by_size[n]: pairwise distinct canonical objects of size n, sorted by compare().
  std::vector<std::vector<ColoredObject>> by_size;

  std::size_t count(std::size_t n) const { return by_size.at(n).size(); }
};

/// Brute-force enumeration by the constructor grammar; multisets and cycles
/// are deduplicated by canonical form. With a shuffle seed the intermediate
/// lists are generated in a random order (the result does not change).
/// Throws CapExceeded when max_size exceeds limits.max_size_cap.
EnumTable enumerate_colored(const SpecSystem& system, std::string_view cls, unsigned t, std::size_t max_size,
                            std::optional<std::uint64_t> shuffle_seed = std::nullopt, EnumLimits limits = {});

struct BoltzmannPmf {
  // Canonical encoding -> x^|a| / f(x, t).
  std::map<std::string, double> probability;
  // Mass of all objects larger than the table's max size.
  double tail_mass = 0.0;
};

BoltzmannPmf boltzmann_pmf(const EnumTable& table, double x);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t degrees_of_freedom = 0;
  std::size_t buckets = 0;
};

/// Pearson goodness of fit. `expected` is a (possibly unnormalized) law over
/// keys; buckets with expected count below min_bucket are merged. An observed
/// key absent from `expected` gives p = 0. Throws InsufficientData when fewer
/// than two buckets remain.
ChiSquareResult chi_square_test(const std::map<std::string, std::uint64_t>& observed,
                                const std::map<std::string, double>& expected, double min_bucket = 5.0);

}  // namespace chroma_boltz
