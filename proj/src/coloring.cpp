#include "chroma_boltz/coloring.hpp"

#include <cmath>
#include <string>

#include "chroma_boltz/cycle_index.hpp"
#include "chroma_boltz/errors.hpp"

namespace chroma_boltz {

ColoredObject color_with(const ProfiledObject& obj, std::span<const unsigned> part_colors) {
  return canonicalize(apply_colors(expand(obj), part_colors));
}

ColoredObject color_profiled(const ProfiledObject& obj, unsigned t, RandomStream& rng) {
  if (t == 0) throw InvalidParameter("number of colors must be positive");
  const ExpandedObject expanded = expand(obj);
  std::vector<unsigned> colors(expanded.parts.size());
  for (auto& c : colors) c = 1 + static_cast<unsigned>(rng.below(t));
  return canonicalize(apply_colors(expanded, colors));
}

FilterSampler::FilterSampler(Base base, std::vector<double> p, std::vector<double> p_prime) : base_(std::move(base)) {
  if (p.empty() || p.size() != p_prime.size()) throw InvalidParameter("filter needs matching nonempty laws");
  for (double v : p) {
    if (!(v > 0.0)) throw InvalidParameter("filter base probabilities must be positive");
  }
  acceptance_.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = p_prime[i] * p[0] / (p[i] * p_prime[0]);
    if (!(a >= 0.0 && a <= 1.0 + 1e-12)) {
      throw InvalidParameter("filter acceptance " + std::to_string(a) + " for outcome " + std::to_string(i) +
                             " outside [0,1]; outcome 0 must maximize p'/p");
    }
    acceptance_[i] = std::min(a, 1.0);
  }
}

std::size_t FilterSampler::operator()(RandomStream& rng) {
  for (;;) {
    ++base_calls_;
    const std::size_t i = base_(rng);
    if (i >= acceptance_.size()) throw InvalidParameter("base sampler outcome out of range");
    if (bern(rng, acceptance_[i])) return i;
  }
}

FilterSampler filter_sampler(FilterSampler::Base base, std::vector<double> p, std::vector<double> p_prime) {
  return FilterSampler(std::move(base), std::move(p), std::move(p_prime));
}

SizeWindow size_window(std::size_t n, double epsilon, Window window) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw InvalidParameter("epsilon must lie in [0, 1)");
  const double slack = 1e-9;
  const double nd = static_cast<double>(n);
  SizeWindow w;
  w.hi = static_cast<std::size_t>(std::floor((1.0 + epsilon) * nd + slack));
  w.lo = window == Window::UpperOnly ? n : static_cast<std::size_t>(std::ceil((1.0 - epsilon) * nd - slack));
  return w;
}

void RejectionStats::merge(const RejectionStats& other) {
  attempts += other.attempts;
  rejected_window += other.rejected_window;
  rejected_bernoulli += other.rejected_bernoulli;
  accepted += other.accepted;
  for (auto [size, count] : other.accepted_size_histogram) accepted_size_histogram[size] += count;
  if (other.max_bernoulli >= other.min_bernoulli) {
    min_bernoulli = std::min(min_bernoulli, other.min_bernoulli);
    max_bernoulli = std::max(max_bernoulli, other.max_bernoulli);
  }
}

nlohmann::json RejectionStats::to_json() const {
  nlohmann::json histogram = nlohmann::json::object();
  for (auto [size, count] : accepted_size_histogram) histogram[std::to_string(size)] = count;
  nlohmann::json j = {{"attempts", attempts},
                      {"rejected_window", rejected_window},
                      {"rejected_bernoulli", rejected_bernoulli},
                      {"accepted", accepted},
                      {"accepted_size_histogram", histogram}};
  if (max_bernoulli >= min_bernoulli) {
    j["min_bernoulli"] = min_bernoulli;
    j["max_bernoulli"] = max_bernoulli;
  }
  return j;
}

ColoredPlan make_colored_plan(const CompiledSystem& system, int cls, const ColoredParams& params) {
  if (params.n == 0) throw InvalidParameter("target size must be positive");
  ColoredPlan plan;
  plan.cls = cls;
  plan.params = params;
  plan.window = size_window(params.n, params.epsilon, params.window);
  plan.alpha = min_parts_table(system, cls, plan.window.hi);
  bool any = false;
  for (std::size_t w = plan.window.lo; w <= plan.window.hi; ++w) any = any || plan.alpha[w] != kInfiniteSize;
  if (!any) {
    throw NoProfile("no object with size in [" + std::to_string(plan.window.lo) + ", " +
                    std::to_string(plan.window.hi) + "]");
  }
  return plan;
}

ColoredSetup prepare_colored(std::shared_ptr<const CompiledSystem> system, int cls, const ColoredParams& params,
                             OracleOptions options) {
  ColoredSetup setup;
  setup.plan = make_colored_plan(*system, cls, params);
  const double n = static_cast<double>(params.n);
  setup.tuning = tune(*system, cls, n, n, 1e-10, options);
  setup.oracle = build_oracle(std::move(system), setup.tuning.x, n, options);
  return setup;
}

ColoredObject gamma_colored(SamplerContext& ctx, const ColoredPlan& plan, RejectionStats& stats) {
  const std::size_t n = plan.params.n;
  const std::optional<std::size_t> ceiling =
      plan.params.use_ceiling ? std::optional<std::size_t>(plan.window.hi) : std::nullopt;
  for (std::uint64_t attempt = 0; attempt < plan.params.attempt_cap; ++attempt) {
    ++stats.attempts;
    ProfiledObject obj;
    try {
      obj = ctx.sample_class(plan.cls, ceiling);
    } catch (const SizeCeilingExceeded&) {
      ++stats.rejected_window;
      continue;
    }
    const Profile prof = profile(obj);
    const std::size_t m = weighted_degree(prof);
    if (!plan.window.contains(m)) {
      ++stats.rejected_window;
      continue;
    }
    if (m != n) {
      // Retarget the profile law from parameter n to parameter m.
      const double parts = static_cast<double>(part_count(prof));
      const double ratio = static_cast<double>(m) / static_cast<double>(n);
      const double exponent =
          m < n ? parts - static_cast<double>(plan.alpha.at(m)) : parts - static_cast<double>(m);
      const double p = std::pow(ratio, exponent);
      if (!(p > 0.0 && p <= 1.0)) {
        throw InvalidParameter("size filter parameter " + std::to_string(p) + " outside (0,1]");
      }
      stats.min_bernoulli = std::min(stats.min_bernoulli, p);
      stats.max_bernoulli = std::max(stats.max_bernoulli, p);
      if (!bern(ctx.rng(), p)) {
        ++stats.rejected_bernoulli;
        continue;
      }
    } else {
      stats.max_bernoulli = std::max(stats.max_bernoulli, 1.0);
      stats.min_bernoulli = std::min(stats.min_bernoulli, 1.0);
    }
    ++stats.accepted;
    ++stats.accepted_size_histogram[m];
    return color_profiled(obj, static_cast<unsigned>(m), ctx.rng());
  }
  throw Timeout("no accepted object after " + std::to_string(plan.params.attempt_cap) + " attempts");
}

ColoredObject sample_kcolored_exact(SamplerContext& ctx, int cls, std::size_t n, RejectionStats& stats,
                                    std::uint64_t attempt_cap, bool use_ceiling) {
  const double t = ctx.oracle().t();
  if (!(t >= 1.0 && t == std::floor(t))) throw InvalidParameter("k-colored sampling needs a positive integer t");
  if (n < ctx.system().class_node(cls).min_size) {
    throw Timeout("no object of size " + std::to_string(n) + " (below the minimum size)");
  }
  if (n <= 2048 && min_parts_table(ctx.system(), cls, n).at(n) == kInfiniteSize) {
    throw Timeout("the class has no object of size " + std::to_string(n));
  }
  const std::optional<std::size_t> ceiling = use_ceiling ? std::optional<std::size_t>(n) : std::nullopt;
  for (std::uint64_t attempt = 0; attempt < attempt_cap; ++attempt) {
    ++stats.attempts;
    ProfiledObject obj;
    try {
      obj = ctx.sample_class(cls, ceiling);
    } catch (const SizeCeilingExceeded&) {
      ++stats.rejected_window;
      continue;
    }
    if (size(obj) != n) {
      ++stats.rejected_window;
      continue;
    }
    ++stats.accepted;
    ++stats.accepted_size_histogram[n];
    return color_profiled(obj, static_cast<unsigned>(t), ctx.rng());
  }
  throw Timeout("no object of size " + std::to_string(n) + " after " + std::to_string(attempt_cap) + " attempts");
}

}  // namespace chroma_boltz
