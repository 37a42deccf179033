#include "chroma_boltz/enum_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "chroma_boltz/cycle_index.hpp"
#include "chroma_boltz/errors.hpp"
#include "chroma_boltz/random.hpp"
#include "test_support.hpp"

namespace chroma_boltz {
namespace {

const char* const kBundled[] = {"seq_z.spec", "mset_z.spec", "cyc_z.spec", "mset_z_seq_z.spec", "tree.spec",
                                "tree_leaf_variant.spec"};

std::set<std::string> encodings(const std::vector<ColoredObject>& objs) {
  std::set<std::string> out;
  for (const auto& o : objs) out.insert(encode(o));
  return out;
}

// Asymptotic Kolmogorov distribution: P(sqrt(n) D > d).
double kolmogorov_survival(double d) {
  double s = 0.0;
  for (int k = 1; k < 100; ++k) s += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * d * d);
  return std::clamp(s, 0.0, 1.0);
}

TEST(Enumerate, PaperCounts) {
  const EnumTable trees = enumerate_colored(parse_spec("T = Z * MSet(T);"), "T", 2, 3);
  EXPECT_EQ(trees.count(3), 14u);
  EXPECT_EQ(enumerate_colored(parse_spec("S = MSet(Z);"), "S", 3, 2).count(2), 6u);
  const EnumTable seq = enumerate_colored(parse_spec("S = Seq(Z);"), "S", 2, 6);
  for (std::size_t n = 0; n <= 6; ++n) EXPECT_EQ(seq.count(n), std::size_t{1} << n);
}

TEST(Enumerate, TreesOfSizeThreeListed) {
  const EnumTable trees = enumerate_colored(parse_spec("T = Z * MSet(T);"), "T", 2, 3);
  const std::set<std::string> got = encodings(trees.by_size[3]);
  // Chains of three nodes (8) and cherries: root color times an unordered pair of leaf colors (6).
  EXPECT_TRUE(got.count("(#1 {(#1 {(#2 {})})})"));
  EXPECT_TRUE(got.count("(#2 {(#1 {}) (#2 {})})"));
  EXPECT_FALSE(got.count("(#2 {(#2 {}) (#1 {})})"));
}

TEST(Enumerate, NoDuplicates) {
  for (const char* file : kBundled) {
    const SpecSystem sys = testing::load_spec(file);
    const EnumTable table = enumerate_colored(sys, sys.root, 2, 6);
    for (const auto& objs : table.by_size) EXPECT_EQ(encodings(objs).size(), objs.size()) << file;
  }
}

TEST(Enumerate, CountsMatchSeries) {
  for (const char* file : kBundled) {
    const SpecSystem sys = testing::load_spec(file);
    for (unsigned t = 1; t <= 3; ++t) {
      const EnumTable table = enumerate_colored(sys, sys.root, t, 6);
      const std::vector<BigInt> f = series_f(sys, sys.root, t, 6);
      for (std::size_t n = 0; n <= 6; ++n) {
        EXPECT_EQ(BigInt(table.count(n)), f[n]) << file << " t=" << t << " n=" << n;
      }
    }
  }
}

TEST(Enumerate, OrderInsensitive) {
  for (const char* file : kBundled) {
    const SpecSystem sys = testing::load_spec(file);
    const EnumTable plain = enumerate_colored(sys, sys.root, 2, 5);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const EnumTable shuffled = enumerate_colored(sys, sys.root, 2, 5, seed);
      for (std::size_t n = 0; n <= 5; ++n) {
        EXPECT_EQ(encodings(plain.by_size[n]), encodings(shuffled.by_size[n])) << file;
        EXPECT_EQ(plain.by_size[n], shuffled.by_size[n]) << file;
      }
    }
  }
}

TEST(Enumerate, Cap) {
  EXPECT_THROW(enumerate_colored(parse_spec("S = Seq(Z);"), "S", 2, 9), CapExceeded);
}

TEST(BoltzmannPmf, Sequences) {
  const EnumTable table = enumerate_colored(parse_spec("S = Seq(Z);"), "S", 2, 6);
  const BoltzmannPmf pmf = boltzmann_pmf(table, 0.25);
  EXPECT_NEAR(pmf.probability.at("()"), 0.5, 1e-12);
  EXPECT_NEAR(pmf.probability.at("(#1 #2)"), pmf.probability.at("(#2 #2)"), 1e-15);
  double total = 0.0;
  for (const auto& [k, p] : pmf.probability) total += p;
  EXPECT_LE(total, 1.0);
  // Tail = P(size > 6) = (tx)^7 for a geometric size law with tx = 1/2.
  EXPECT_NEAR(pmf.tail_mass, std::pow(0.5, 7), 1e-12);
}

TEST(ChiSquare, ExactFit) {
  const std::map<std::string, std::uint64_t> observed = {{"a", 500}, {"b", 300}, {"c", 200}};
  const std::map<std::string, double> expected = {{"a", 0.5}, {"b", 0.3}, {"c", 0.2}};
  const ChiSquareResult r = chi_square_test(observed, expected);
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.degrees_of_freedom, 2u);
}

TEST(ChiSquare, KnownStatistic) {
  // (60-50)^2/50 + (40-50)^2/50 = 4 with one degree of freedom: p = 0.0455.
  const ChiSquareResult r = chi_square_test({{"a", 60}, {"b", 40}}, {{"a", 1.0}, {"b", 1.0}});
  EXPECT_NEAR(r.statistic, 4.0, 1e-12);
  EXPECT_NEAR(r.p_value, 0.0455003, 1e-6);
}

TEST(ChiSquare, MergesSmallBuckets) {
  const ChiSquareResult r =
      chi_square_test({{"a", 90}, {"b", 8}, {"c", 1}, {"d", 1}}, {{"a", 0.9}, {"b", 0.08}, {"c", 0.01}, {"d", 0.01}});
  EXPECT_EQ(r.buckets, 2u);
}

TEST(ChiSquare, Errors) {
  EXPECT_THROW(chi_square_test({{"a", 10}}, {{"a", 1.0}}), InsufficientData);
  const ChiSquareResult r = chi_square_test({{"a", 10}, {"z", 1}}, {{"a", 1.0}, {"b", 1.0}});
  EXPECT_EQ(r.p_value, 0.0);
}

TEST(ChiSquare, PValuesAreUniformUnderTheNull) {
  const std::vector<double> law = {0.4, 0.25, 0.15, 0.1, 0.06, 0.04};
  std::map<std::string, double> expected;
  for (std::size_t i = 0; i < law.size(); ++i) expected[std::to_string(i)] = law[i];
  RandomStream rng(2024);
  std::vector<double> pvalues;
  for (int trial = 0; trial < 100; ++trial) {
    std::map<std::string, std::uint64_t> observed;
    for (int i = 0; i < 100000; ++i) {
      double u = rng.uniform();
      std::size_t k = 0;
      while (k + 1 < law.size() && u >= law[k]) u -= law[k++];
      ++observed[std::to_string(k)];
    }
    pvalues.push_back(chi_square_test(observed, expected).p_value);
  }
  std::sort(pvalues.begin(), pvalues.end());
  double d = 0.0;
  const double n = static_cast<double>(pvalues.size());
  for (std::size_t i = 0; i < pvalues.size(); ++i) {
    d = std::max({d, (i + 1) / n - pvalues[i], pvalues[i] - i / n});
  }
  EXPECT_GT(kolmogorov_survival(std::sqrt(n) * d), 0.01);
}

}  // namespace
}  // namespace chroma_boltz
