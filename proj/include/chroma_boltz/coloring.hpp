#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "chroma_boltz/gf_oracle.hpp"
#include "chroma_boltz/profiled.hpp"
#include "chroma_boltz/random.hpp"
#include "chroma_boltz/samplers.hpp"

namespace chroma_boltz {

/// Expands a profiled object and gives every part one uniform color in
/// {1, ..., t}. The result is canonical.
ColoredObject color_profiled(const ProfiledObject& obj, unsigned t, RandomStream& rng);

// Same with explicit colors, one per part in expand() order.
ColoredObject color_with(const ProfiledObject& obj, std::span<const unsigned> part_colors);

/// Turns a sampler with law p over outcomes {0, ..., m-1} into one with law
/// p', by accepting outcome i with probability (p'_i p_0) / (p_i p'_0) and
/// restarting otherwise. Outcome 0 must maximize p'_i / p_i.
class FilterSampler {
 public:
  using Base = std::function<std::size_t(RandomStream&)>;

  // Throws InvalidParameter if some acceptance probability leaves [0, 1].
  FilterSampler(Base base, std::vector<double> p, std::vector<double> p_prime);

  std::size_t operator()(RandomStream& rng);

  const std::vector<double>& acceptance() const noexcept { return acceptance_; }
  std::uint64_t base_calls() const noexcept { return base_calls_; }

 private:
  Base base_;
  std::vector<double> acceptance_;
  std::uint64_t base_calls_ = 0;
};

FilterSampler filter_sampler(FilterSampler::Base base, std::vector<double> p, std::vector<double> p_prime);

enum class Window { UpperOnly, TwoSided };

struct SizeWindow {
  std::size_t lo = 0;
  std::size_t hi = 0;
  bool contains(std::size_t n) const noexcept { return lo <= n && n <= hi; }
};

// [n, (1+eps)n] or [(1-eps)n, (1+eps)n], rounded inward.
SizeWindow size_window(std::size_t n, double epsilon, Window window);

struct RejectionStats {
  std::uint64_t attempts = 0;
  std::uint64_t rejected_window = 0;
  std::uint64_t rejected_bernoulli = 0;
  std::uint64_t accepted = 0;
  std::map<std::size_t, std::uint64_t> accepted_size_histogram;
  // Range of the size filter's Bernoulli parameters actually used.
  double min_bernoulli = 1.0;
  double max_bernoulli = 0.0;

  void merge(const RejectionStats& other);
  nlohmann::json to_json() const;
};

struct ColoredParams {
  std::size_t n = 1;
  double epsilon = 0.1;
  Window window = Window::UpperOnly;
  std::uint64_t attempt_cap = 1'000'000;
  // Abort a draw as soon as it outgrows the window.
  bool use_ceiling = true;
};

/// Everything the size-colored rejection loop needs besides randomness:
/// the window and alpha(w) for every w in it. Shareable across contexts.
struct ColoredPlan {
  int cls = 0;
  ColoredParams params;
  SizeWindow window;
  std::vector<std::size_t> alpha;  // indexed by size, 0..window.hi
};

ColoredPlan make_colored_plan(const CompiledSystem& system, int cls, const ColoredParams& params);

/// Tunes x0 for expected size n at t = n and builds the oracle there.
struct ColoredSetup {
  TuneResult tuning;
  std::shared_ptr<const OracleTable> oracle;
  ColoredPlan plan;
};

ColoredSetup prepare_colored(std::shared_ptr<const CompiledSystem> system, int cls, const ColoredParams& params,
                             OracleOptions options = {});

/// Approximate-size sampler for size-colored objects. `ctx` must use an
/// oracle at (x0, t = n). Returns an object of size m in the window whose
/// atoms carry colors in {1, ..., m}; conditioned on m it is uniform.
/// Throws Timeout after params.attempt_cap attempts.
ColoredObject gamma_colored(SamplerContext& ctx, const ColoredPlan& plan, RejectionStats& stats);

/// Exact-size t-colored sampler by plain size rejection (t = the oracle's t).
/// Throws Timeout after attempt_cap attempts, or at once when no object has size n.
ColoredObject sample_kcolored_exact(SamplerContext& ctx, int cls, std::size_t n, RejectionStats& stats,
                                    std::uint64_t attempt_cap = 1'000'000, bool use_ceiling = true);

}  // namespace chroma_boltz
