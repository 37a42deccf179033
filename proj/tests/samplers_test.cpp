#include "chroma_boltz/samplers.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "chroma_boltz/coloring.hpp"
#include "chroma_boltz/cycle_index.hpp"
#include "chroma_boltz/enum_oracle.hpp"
#include "chroma_boltz/errors.hpp"
#include "test_support.hpp"

namespace chroma_boltz {
namespace {

SamplerContext context(const std::string& spec, double x, double t, std::uint64_t seed, SamplerOptions opts = {}) {
  return SamplerContext(build_oracle(parse_spec(spec), x, t), seed, opts);
}

std::string profile_key(const Profile& p) {
  std::size_t width = 0;
  for (auto [i, n] : p) width = std::max<std::size_t>(width, i);
  Monomial m(width, 0);
  for (auto [i, n] : p) m[i - 1] = static_cast<unsigned>(n);
  return to_string(m);
}

// Largest diagonal index among the children of a root multiset (1 if none).
std::uint64_t max_index(const ProfiledObject& mset) {
  std::uint64_t k = 1;
  for (const auto& c : mset.children) {
    if (c.kind == NodeKind::Diag) k = std::max(k, c.k);
  }
  return k;
}

TEST(Sample, NeutralAndAtom) {
  auto eps = context("E = Eps;", 0.3, 1.0, 1);
  EXPECT_EQ(encode(eps.sample_class(0)), "()");
  auto atom = context("A = Z;", 0.3, 1.0, 1);
  EXPECT_EQ(encode(atom.sample_class(0)), "Z");
}

TEST(Sample, UnionBranchFrequency) {
  auto ctx = context("A = Z + Z * Z;", 0.3, 1.0, 11);
  const int n = 100000;
  int left = 0;
  for (int i = 0; i < n; ++i) left += size(ctx.sample_class(0)) == 1;
  const double p = 0.3 / (0.3 + 0.09);
  EXPECT_NEAR(static_cast<double>(left) / n, p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(Sample, ProductIsFlatTuple) {
  auto ctx = context("A = Z * (Z * Z) * Eps;", 0.3, 1.0, 2);
  EXPECT_EQ(encode(ctx.sample_class(0)), "(Z Z Z ())");
}

TEST(SampleSeq, GeometricLength) {
  auto ctx = context("S = Seq(Z);", 0.25, 2.0, 12);
  const int n = 100000;
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += static_cast<double>(ctx.sample_class(0).children.size());
  EXPECT_NEAR(total / n, 1.0, 0.02);
  auto zero = context("S = Seq(Z);", 0.0, 2.0, 12);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(encode(zero.sample_class(0)), "()");
}

TEST(SampleMSet, SizeLawMatchesClosedForm) {
  const double x = 0.2, t = 3.0;
  auto ctx = context("S = MSet(Z);", x, t, 13);
  std::map<std::string, std::uint64_t> observed;
  for (int i = 0; i < 100000; ++i) {
    const std::size_t m = size(ctx.sample_class(0));
    ++observed[m <= 8 ? std::to_string(m) : "tail"];
  }
  std::map<std::string, double> expected;
  double head = 0.0;
  for (int m = 0; m <= 8; ++m) {
    const double p = (m + 1.0) * (m + 2.0) / 2.0 * std::pow(x, m) * std::pow(1 - x, t);
    expected[std::to_string(m)] = p;
    head += p;
  }
  expected["tail"] = 1.0 - head;
  EXPECT_GT(chi_square_test(observed, expected).p_value, 0.001);
}

TEST(SampleMSet, MaxIndexLaw) {
  const double x = 0.5, t = 1.0;
  auto ctx = context("S = MSet(Z);", x, t, 14);
  const int n = 100000;
  int k1 = 0;
  for (int i = 0; i < n; ++i) k1 += max_index(ctx.sample_class(0)) == 1;
  // The operand is Z, so lambda_j = t x^j / j.
  double tail = 0.0;
  for (int j = 2; j < 200; ++j) tail += t * std::pow(x, j) / j;
  const double p = std::exp(-tail);
  EXPECT_NEAR(static_cast<double>(k1) / n, p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(SampleMSet, ProfileLawAtSizeThree) {
  const double x = 0.3, t = 2.0;
  auto ctx = context("S = MSet(Z);", x, t, 15);
  std::map<std::string, std::uint64_t> observed;
  for (int i = 0; i < 300000; ++i) {
    const ProfiledObject obj = ctx.sample_class(0);
    if (size(obj) == 3) ++observed[profile_key(profile(obj))];
  }
  const double s1 = t * x, s2 = t * x * x, s3 = t * x * x * x;
  const std::map<std::string, double> expected = {
      {"s1^3", s1 * s1 * s1 / 6.0}, {"s1 s2", s1 * s2 / 2.0}, {"s3", s3 / 3.0}};
  EXPECT_GT(chi_square_test(observed, expected).p_value, 0.001);
}

// Profile law against the exact series, all profiles of weight <= 5 plus a tail bucket.
void check_profile_law(const std::string& spec, double x, double t, std::uint64_t seed) {
  const SpecSystem sys = parse_spec(spec);
  const CycleIndexSeries series = series_cycle_index(sys, sys.root, 5);
  const double f = eval_f(sys, sys.root, x, t);
  std::map<std::string, double> expected;
  double head = 0.0;
  for (const auto& [m, c] : series.terms) {
    double w = c.convert_to<double>();
    for (std::size_t i = 0; i < m.size(); ++i) w *= std::pow(t * std::pow(x, i + 1), m[i]);
    Profile p;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i]) p[i + 1] = m[i];
    }
    expected[profile_key(p)] += w / f;
    head += w / f;
  }
  expected["tail"] = 1.0 - head;
  SamplerContext ctx(build_oracle(sys, x, t), seed);
  std::map<std::string, std::uint64_t> observed;
  for (int i = 0; i < 100000; ++i) {
    const ProfiledObject obj = ctx.sample_class(0);
    ++observed[size(obj) <= 5 ? profile_key(profile(obj)) : "tail"];
  }
  EXPECT_GT(chi_square_test(observed, expected).p_value, 0.001) << spec;
}

TEST(SampleMSet, ProfileLawSeries) { check_profile_law("S = MSet(Z);", 0.4, 1.5, 16); }
TEST(SampleCyc, ProfileLawSeries) { check_profile_law("S = Cyc(Z);", 0.35, 1.5, 17); }
TEST(SampleTree, ProfileLawSeries) { check_profile_law("T = Z * MSet(T);", 0.15, 2.0, 18); }
TEST(SampleNested, ProfileLawSeries) { check_profile_law("A = MSet(Cyc(Z) + Z * Seq(Z));", 0.15, 1.0, 19); }
TEST(SampleNestedCycles, ProfileLawSeries) { check_profile_law("A = Cyc(MSet(Z) * Z);", 0.2, 1.0, 20); }

// Sizes and the totient index law of Cyc(Z) at t = 1, x = 0.3.
TEST(SampleCyc, SizeOneAndIndexOneProbabilities) {
  const double x = 0.3;
  auto ctx = context("C = Cyc(Z);", x, 1.0, 21);
  double f = 0.0;
  for (int k = 1; k < 100; ++k) f += static_cast<double>(totient(k)) / k * -std::log1p(-std::pow(x, k));
  // One necklace of size 1; the index K = 1 covers every cycle that is not a repeated word.
  const double p_size = x / f;
  const double p_index = -std::log1p(-x) / f;
  const int n = 100000;
  int ones = 0, undiagonal = 0;
  for (int i = 0; i < n; ++i) {
    const ProfiledObject c = ctx.sample_class(0);
    ones += size(c) == 1;
    undiagonal += c.children.empty() || c.children[0].kind != NodeKind::Diag;
  }
  EXPECT_NEAR(static_cast<double>(ones) / n, p_size, 3 * std::sqrt(p_size * (1 - p_size) / n));
  EXPECT_NEAR(static_cast<double>(undiagonal) / n, p_index, 3 * std::sqrt(p_index * (1 - p_index) / n));
}

TEST(SampleCyc, BinaryNecklacesOfLengthFourAreUniform) {
  const SpecSystem sys = parse_spec("C = Cyc(Z);");
  auto ctx = SamplerContext(build_oracle(sys, 0.3, 2.0), 22);
  const EnumTable table = enumerate_colored(sys, "C", 2, 4);
  ASSERT_EQ(table.count(4), 6u);
  std::map<std::string, double> expected;
  for (const auto& obj : table.by_size[4]) expected[encode(obj)] = 1.0;
  std::map<std::string, std::uint64_t> observed;
  RejectionStats stats;
  for (int i = 0; i < 30000; ++i) ++observed[encode(sample_kcolored_exact(ctx, 0, 4, stats))];
  EXPECT_GT(chi_square_test(observed, expected).p_value, 0.001);
}

TEST(Sample, DeterministicPerSeed) {
  const auto oracle = build_oracle(parse_spec("T = Z * MSet(T);"), 0.3, 1.0);
  SamplerContext a(oracle, 99), b(oracle, 99);
  for (int i = 0; i < 200; ++i) ASSERT_EQ(encode(a.sample_class(0)), encode(b.sample_class(0)));
}

TEST(Sample, DepthCap) {
  SamplerOptions opts;
  opts.depth_cap = 50;
  // Near the singularity the trees are huge.
  const SpecSystem sys = parse_spec("T = Z * MSet(T);");
  const double x = tune(sys, "T", 1.0, 500.0).x;
  SamplerContext ctx(build_oracle(sys, x, 1.0), 23, opts);
  bool raised = false;
  for (int i = 0; i < 1000 && !raised; ++i) {
    try {
      ctx.sample_class(0);
    } catch (const DepthExceeded&) {
      raised = true;
    }
  }
  EXPECT_TRUE(raised);
}

TEST(Sample, CeilingAbortsEarly) {
  auto ctx = context("S = Seq(Z);", 0.45, 2.0, 24);
  int aborted = 0;
  for (int i = 0; i < 1000; ++i) {
    try {
      EXPECT_LE(size(ctx.sample_class(0, 3)), 3u);
    } catch (const SizeCeilingExceeded&) {
      ++aborted;
    }
  }
  EXPECT_GT(aborted, 0);
}

TEST(Sample, DeepLevelsBeyondTable) {
  // A cycle of multisets samples f at levels k * j, past the oracle's K_max.
  auto ctx = context("A = Cyc(MSet(Z) * Z);", 0.3, 1.0, 25);
  EXPECT_DOUBLE_EQ(ctx.node_value(ctx.system().class_root[0], 1), ctx.oracle().value(0, 1));
  EXPECT_GT(ctx.level(1000).node.size(), 0u);
}

}  // namespace
}  // namespace chroma_boltz
