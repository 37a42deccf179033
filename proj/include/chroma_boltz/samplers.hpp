#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <memory>
#include <optional>
#include <string_view>

#include "chroma_boltz/gf_oracle.hpp"
#include "chroma_boltz/profiled.hpp"
#include "chroma_boltz/random.hpp"

namespace chroma_boltz {

struct SamplerOptions {
  // Total constructor calls allowed for one object.
  std::uint64_t depth_cap = 10'000'000;
  // Slack allowed on computed probabilities before they count as invalid.
  double probability_slack = 1e-9;
};

// Thrown (and normally caught by a rejection loop) when a draw grows past
// the size ceiling passed to sample_class.
class SizeCeilingExceeded : public std::exception {
 public:
  const char* what() const noexcept override { return "size ceiling exceeded"; }
};

/// One sampling pipeline: an oracle shared read-only, plus an owned random
/// stream and a private cache for diagonal levels deeper than the table.
/// Single-threaded; move it between threads, never share it.
class SamplerContext {
 public:
  SamplerContext(std::shared_ptr<const OracleTable> oracle, std::uint64_t seed, SamplerOptions options = {});

  const OracleTable& oracle() const noexcept { return *oracle_; }
  const CompiledSystem& system() const noexcept { return oracle_->system(); }
  RandomStream& rng() noexcept { return rng_; }
  void reseed(std::uint64_t seed) { rng_ = RandomStream(seed); }

  /// Boltzmann draw of a whole class at s_i = t x^i. With a ceiling, the
  /// draw is abandoned by SizeCeilingExceeded as soon as it exceeds it.
  ProfiledObject sample_class(int cls, std::optional<std::size_t> ceiling = std::nullopt);
  ProfiledObject sample_class(std::string_view cls) { return sample_class(system().class_index(cls)); }

  /// Draw from a compiled node with oracle lookups at f(x^{diag_scale}, t).
  ProfiledObject sample(int node, std::uint64_t diag_scale = 1);

  // Builder samplers; `node` must have the matching kind.
  ProfiledObject sample_seq(int node, std::uint64_t diag_scale);
  ProfiledObject sample_mset(int node, std::uint64_t diag_scale);
  ProfiledObject sample_cyc(int node, std::uint64_t diag_scale);

  // Value of a node at a diagonal level (table lookup or on-demand evaluation).
  const LevelValues& level(std::uint64_t diag_scale);
  double node_value(int node, std::uint64_t diag_scale) { return level(diag_scale).node[static_cast<std::size_t>(node)]; }

  // Stats of the last sample_class / sample call sequence.
  std::uint64_t calls() const noexcept { return calls_; }

 private:
  double checked_probability(double p);
  void enter();
  void add_atoms(std::uint64_t count);

  std::shared_ptr<const OracleTable> oracle_;
  RandomStream rng_;
  SamplerOptions options_;
  std::unique_ptr<LevelEvaluator> overflow_;
  std::uint64_t calls_ = 0;
  std::uint64_t running_size_ = 0;
  std::optional<std::size_t> ceiling_;
};

}  // namespace chroma_boltz
