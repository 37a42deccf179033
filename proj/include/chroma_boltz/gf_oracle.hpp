#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string_view>
#include <vector>

#include "chroma_boltz/spec_lang.hpp"

namespace chroma_boltz {

struct OracleOptions {
  // Relative fixed-point tolerance, also the absolute bound on the
  // truncated tail of every multiset / cycle diagonal sum.
  double tolerance = 1e-12;
  std::size_t max_iterations = 1'000'000;
  double value_cap = 1e15;
  // Upper bound on the number of diagonal indices kept in one sum.
  std::size_t max_diagonal_terms = 100'000;
};

// Values of every compiled node at argument x^level, i.e. f_node(x^level, t).
struct LevelValues {
  std::vector<double> node;
  // MSet / Cyc nodes: number of diagonal indices j kept in the sum (j = 1..terms).
  std::vector<std::size_t> terms;
};

using LevelMap = std::map<std::uint64_t, LevelValues>;

// Euler's totient.
std::uint64_t totient(std::uint64_t k);

/// Computes LevelValues on demand and memoizes them. Levels found in `base`
/// are reused without being copied.
class LevelEvaluator {
 public:
  LevelEvaluator(const CompiledSystem& system, double x, double t, OracleOptions options,
                 const LevelMap* base = nullptr);

  const LevelValues& level(std::uint64_t level);
  LevelMap release() && { return std::move(memo_); }

 private:
  void solve(std::uint64_t level, LevelValues& out);

  const CompiledSystem& system_;
  double x_;
  double t_;
  OracleOptions options_;
  const LevelMap* base_;
  LevelMap memo_;
};

/// Immutable table of generating-function values for one (x, t); shareable
/// across any number of samplers.
class OracleTable {
 public:
  OracleTable(std::shared_ptr<const CompiledSystem> system, double x, double t, OracleOptions options);

  const CompiledSystem& system() const noexcept { return *system_; }
  std::shared_ptr<const CompiledSystem> system_ptr() const noexcept { return system_; }
  double x() const noexcept { return x_; }
  double t() const noexcept { return t_; }
  const OracleOptions& options() const noexcept { return options_; }
  std::size_t k_max() const noexcept { return k_max_; }

  // f_class(x^k, t) for 1 <= k <= k_max().
  double value(int cls, std::size_t k) const;
  double value(std::string_view cls, std::size_t k) const { return value(system_->class_index(cls), k); }

  // Stored level or nullptr; levels beyond the table are computed by SamplerContext.
  const LevelValues* find_level(std::uint64_t level) const;
  const LevelMap& levels() const noexcept { return levels_; }

 private:
  std::shared_ptr<const CompiledSystem> system_;
  double x_;
  double t_;
  OracleOptions options_;
  std::size_t k_max_ = 1;
  LevelMap levels_;
};

std::shared_ptr<const OracleTable> build_oracle(const SpecSystem& system, double x, double t,
                                                OracleOptions options = {});
std::shared_ptr<const OracleTable> build_oracle(std::shared_ptr<const CompiledSystem> system, double x,
                                                double t, OracleOptions options = {});

/// f_class(x, t) by fixed-point iteration of the constructor rules.
/// Throws DivergenceError at or above the singularity, InvalidParameter when a
/// Seq / Cyc operand reaches 1.
double eval_f(const SpecSystem& system, std::string_view cls, double x, double t, OracleOptions options = {});
double eval_f(const CompiledSystem& system, int cls, double x, double t, OracleOptions options = {});

// f_class(x^k, t): the diagonal Delta_k under s_i = t x^i.
double eval_diag(const SpecSystem& system, std::string_view cls, std::uint64_t k, double x, double t,
                 OracleOptions options = {});

// x d/dx log f at x, by central difference with relative step 1e-6.
double expected_size(const CompiledSystem& system, int cls, double x, double t, OracleOptions options = {});

struct TuneResult {
  double x = 0.0;
  double expected_size = 0.0;
  // Largest x found where evaluation still converges.
  double rho_estimate = 0.0;
  std::size_t iterations = 0;
};

/// Solves x f'(x)/f(x) = target_n by bisection on (0, rho_estimate).
/// Throws NoSolution when the expected size stays below the target.
TuneResult tune(const CompiledSystem& system, int cls, double t, double target_n, double solver_tolerance = 1e-10,
                OracleOptions options = {});
TuneResult tune(const SpecSystem& system, std::string_view cls, double t, double target_n,
                double solver_tolerance = 1e-10, OracleOptions options = {});

}  // namespace chroma_boltz
