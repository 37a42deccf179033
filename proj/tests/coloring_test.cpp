#include "chroma_boltz/coloring.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "chroma_boltz/cycle_index.hpp"
#include "chroma_boltz/enum_oracle.hpp"
#include "chroma_boltz/errors.hpp"
#include "test_support.hpp"

namespace chroma_boltz {
namespace {

using P = ProfiledObject;

void collect_colors(const ColoredObject& obj, std::set<unsigned>& out) {
  if (obj.kind == NodeKind::Atom) out.insert(obj.color);
  for (const auto& c : obj.children) collect_colors(c, out);
}

P leaf() { return P::tuple({P::atom(), P::mset({})}); }

std::size_t max_multiplicity(const std::vector<ColoredObject>& objs) {
  std::size_t best = 0;
  for (const auto& a : objs) best = std::max<std::size_t>(best, std::count(objs.begin(), objs.end(), a));
  return best;
}

TEST(ColorProfiled, SingleColor) {
  RandomStream rng(1);
  const P obj = P::mset({P::diag(2, leaf()), P::atom(), P::diag(3, P::atom())});
  std::set<unsigned> colors;
  collect_colors(color_profiled(obj, 1, rng), colors);
  EXPECT_EQ(colors, (std::set<unsigned>{1}));
}

TEST(ColorProfiled, PartSharesOneColor) {
  RandomStream rng(2);
  const int n = 20000;
  int ones = 0;
  for (int i = 0; i < n; ++i) {
    const ColoredObject c = color_profiled(P::mset({P::diag(2, P::atom())}), 2, rng);
    ASSERT_EQ(c.children.size(), 2u);
    ASSERT_EQ(c.children[0].color, c.children[1].color);
    ones += c.children[0].color == 1;
  }
  EXPECT_NEAR(static_cast<double>(ones) / n, 0.5, 3 * std::sqrt(0.25 / n));
}

TEST(ColorProfiled, FourteenNodeTreeRespectsSymmetries) {
  const P subtree = P::tuple({P::atom(), P::mset({leaf(), P::diag(3, leaf())})});
  const P tree = P::tuple({P::atom(), P::mset({P::diag(2, subtree), P::diag(2, leaf()), leaf()})});
  ASSERT_EQ(expand(tree).parts.size(), 6u);
  RandomStream rng(3);
  for (int i = 0; i < 100; ++i) {
    const ColoredObject c = color_profiled(tree, 14, rng);
    ASSERT_EQ(size(c), 14u);
    const auto& children = c.children.at(1).children;  // root multiset, canonical order
    ASSERT_EQ(children.size(), 5u);
    // Canonical order puts the three 2-atom leaves first, then the subtree pair.
    EXPECT_EQ(children[3], children[4]);
    EXPECT_GE(max_multiplicity({children.begin(), children.begin() + 3}), 2u);
    // The three diagonal leaves inside a subtree are colored alike.
    EXPECT_GE(max_multiplicity(children[3].children.at(1).children), 3u);
  }
}

TEST(FilterSampler, IdentityNeverRejects) {
  RandomStream rng(4);
  auto base = [](RandomStream& r) { return static_cast<std::size_t>(r.below(3)); };
  FilterSampler f(base, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  for (double a : f.acceptance()) EXPECT_DOUBLE_EQ(a, 1.0);
  for (int i = 0; i < 1000; ++i) f(rng);
  EXPECT_EQ(f.base_calls(), 1000u);
}

TEST(FilterSampler, TwoOutcomes) {
  RandomStream rng(5);
  auto base = [](RandomStream& r) { return static_cast<std::size_t>(r.below(2)); };
  FilterSampler f = filter_sampler(base, {0.5, 0.5}, {2.0 / 3, 1.0 / 3});
  EXPECT_DOUBLE_EQ(f.acceptance()[0], 1.0);
  EXPECT_DOUBLE_EQ(f.acceptance()[1], 0.5);
  const int n = 100000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += f(rng) == 0;
  const double p = 2.0 / 3;
  EXPECT_NEAR(static_cast<double>(zeros) / n, p, 3 * std::sqrt(p * (1 - p) / n));
  // Restarts: each call accepts with total probability 3/4.
  EXPECT_NEAR(static_cast<double>(f.base_calls()) / n, 4.0 / 3, 0.02);
}

TEST(FilterSampler, IncreasingRatioRejected) {
  auto base = [](RandomStream& r) { return static_cast<std::size_t>(r.below(2)); };
  EXPECT_THROW(filter_sampler(base, {0.5, 0.5}, {1.0 / 3, 2.0 / 3}), InvalidParameter);
  EXPECT_THROW(filter_sampler(base, {0.0, 1.0}, {0.5, 0.5}), InvalidParameter);
}

TEST(SizeWindow, Bounds) {
  const SizeWindow up = size_window(14, 0.1, Window::UpperOnly);
  EXPECT_EQ(up.lo, 14u);
  EXPECT_EQ(up.hi, 15u);
  const SizeWindow two = size_window(10, 0.1, Window::TwoSided);
  EXPECT_EQ(two.lo, 9u);
  EXPECT_EQ(two.hi, 11u);
  const SizeWindow w = size_window(3, 0.34, Window::UpperOnly);
  EXPECT_EQ(w.lo, 3u);
  EXPECT_EQ(w.hi, 4u);
  EXPECT_EQ(size_window(3, 0.0, Window::TwoSided).lo, 3u);
  EXPECT_EQ(size_window(3, 0.0, Window::TwoSided).hi, 3u);
}

std::map<std::string, double> uniform_over(const std::vector<ColoredObject>& objs) {
  std::map<std::string, double> law;
  for (const auto& o : objs) law[encode(o)] = 1.0;
  return law;
}

TEST(GammaColored, SequencesExactSize) {
  const auto sys = std::make_shared<const CompiledSystem>(compile(parse_spec("S = Seq(Z);")));
  ColoredParams params;
  params.n = 3;
  params.epsilon = 0.0;
  const ColoredSetup setup = prepare_colored(sys, 0, params);
  EXPECT_NEAR(setup.tuning.x, 0.25, 1e-6);
  SamplerContext ctx(setup.oracle, 6);
  RejectionStats stats;
  std::map<std::string, std::uint64_t> observed;
  for (int i = 0; i < 27000; ++i) {
    const ColoredObject obj = gamma_colored(ctx, setup.plan, stats);
    ASSERT_EQ(size(obj), 3u);
    ++observed[encode(obj)];
  }
  EXPECT_EQ(stats.rejected_bernoulli, 0u);
  EXPECT_EQ(stats.attempts, stats.accepted + stats.rejected_window + stats.rejected_bernoulli);
  const EnumTable table = enumerate_colored(parse_spec("S = Seq(Z);"), "S", 3, 3);
  ASSERT_EQ(table.count(3), 27u);
  EXPECT_GT(chi_square_test(observed, uniform_over(table.by_size[3])).p_value, 0.001);
}

TEST(GammaColored, TreesPerSizeUniform) {
  const SpecSystem spec = parse_spec("T = Z * MSet(T);");
  const auto sys = std::make_shared<const CompiledSystem>(compile(spec));
  ColoredParams params;
  params.n = 3;
  params.epsilon = 0.34;
  const ColoredSetup setup = prepare_colored(sys, 0, params);
  SamplerContext ctx(setup.oracle, 7);
  RejectionStats stats;
  std::map<std::size_t, std::map<std::string, std::uint64_t>> observed;
  for (int i = 0; i < 40000; ++i) {
    const ColoredObject obj = gamma_colored(ctx, setup.plan, stats);
    ++observed[size(obj)][encode(obj)];
  }
  ASSERT_EQ(observed.size(), 2u);
  EXPECT_GT(stats.min_bernoulli, 0.0);
  EXPECT_LE(stats.max_bernoulli, 1.0);
  EXPECT_GT(stats.rejected_bernoulli, 0u);
  for (unsigned m : {3u, 4u}) {
    const EnumTable table = enumerate_colored(spec, "T", m, m);
    EXPECT_EQ(BigInt(table.count(m)), series_f(spec, "T", m, m).back());
    EXPECT_GT(chi_square_test(observed[m], uniform_over(table.by_size[m])).p_value, 0.001) << m;
  }
}

TEST(GammaColored, Timeout) {
  const auto sys = std::make_shared<const CompiledSystem>(compile(parse_spec("S = Seq(Z);")));
  ColoredParams params;
  params.n = 20;
  params.epsilon = 0.0;
  params.attempt_cap = 3;
  const ColoredSetup setup = prepare_colored(sys, 0, params);
  SamplerContext ctx(setup.oracle, 8);
  RejectionStats stats;
  EXPECT_THROW(
      {
        for (int i = 0; i < 100; ++i) gamma_colored(ctx, setup.plan, stats);
      },
      Timeout);
}

TEST(KColoredExact, SequencesOfTwo) {
  const SpecSystem spec = parse_spec("S = Seq(Z);");
  SamplerContext ctx(build_oracle(spec, 0.3, 2.0), 9);
  RejectionStats stats;
  std::map<std::string, std::uint64_t> observed;
  for (int i = 0; i < 20000; ++i) ++observed[encode(sample_kcolored_exact(ctx, 0, 2, stats))];
  EXPECT_EQ(observed.size(), 4u);
  EXPECT_GT(chi_square_test(observed, uniform_over(enumerate_colored(spec, "S", 2, 2).by_size[2])).p_value, 0.001);
}

TEST(KColoredExact, NoObjectOfThatSize) {
  SamplerContext ctx(build_oracle(parse_spec("P = Z * Z * Seq(Z * Z);"), 0.3, 2.0), 10);
  RejectionStats stats;
  EXPECT_THROW(sample_kcolored_exact(ctx, 0, 1, stats), Timeout);
  EXPECT_THROW(sample_kcolored_exact(ctx, 0, 3, stats), Timeout);
  EXPECT_EQ(stats.attempts, 0u);
}

TEST(ColorMarginal, TreesMatchEnumeratedBoltzmannLaw) {
  const SpecSystem spec = parse_spec("T = Z * MSet(T);");
  const double x = 0.15;
  const EnumTable table = enumerate_colored(spec, "T", 2, 4);
  const BoltzmannPmf pmf = boltzmann_pmf(table, x);
  std::map<std::string, double> expected = pmf.probability;
  expected["tail"] = pmf.tail_mass;
  SamplerContext ctx(build_oracle(spec, x, 2.0), 11);
  std::map<std::string, std::uint64_t> observed;
  for (int i = 0; i < 100000; ++i) {
    const ColoredObject obj = color_profiled(ctx.sample_class(0), 2, ctx.rng());
    ++observed[size(obj) <= 4 ? encode(obj) : "tail"];
  }
  EXPECT_GT(chi_square_test(observed, expected).p_value, 0.001);
}

TEST(RejectionStats, JsonAndMerge) {
  RejectionStats a, b;
  a.attempts = 3;
  a.accepted = 1;
  a.rejected_window = 2;
  a.accepted_size_histogram[5] = 1;
  b.attempts = 1;
  b.accepted = 1;
  b.accepted_size_histogram[5] = 1;
  b.min_bernoulli = 0.5;
  b.max_bernoulli = 0.5;
  a.merge(b);
  const auto j = a.to_json();
  EXPECT_EQ(j["attempts"], 4);
  EXPECT_EQ(j["accepted_size_histogram"]["5"], 2);
  EXPECT_EQ(j["min_bernoulli"], 0.5);
}

}  // namespace
}  // namespace chroma_boltz
