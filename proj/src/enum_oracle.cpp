#include "chroma_boltz/enum_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>
#include <utility>

#include <boost/math/special_functions/gamma.hpp>

#include "chroma_boltz/errors.hpp"
#include "chroma_boltz/gf_oracle.hpp"
#include "chroma_boltz/random.hpp"

namespace chroma_boltz {

namespace {

using Items = std::vector<ColoredObject>;

class Enumerator {
 public:
  Enumerator(const CompiledSystem& system, unsigned t, std::optional<std::uint64_t> shuffle_seed)
      : system_(system), t_(t) {
    if (shuffle_seed) shuffle_.emplace(*shuffle_seed);
  }

  const Items& objects(int node_id, std::size_t n) {
    const auto key = std::make_pair(node_id, n);
    if (auto it = objects_.find(key); it != objects_.end()) return it->second;
    Items out = build(node_id, n);
    shuffle(out);
    return objects_.emplace(key, std::move(out)).first->second;
  }

 private:
  Items build(int node_id, std::size_t n) {
    const CompiledNode& node = system_.node(node_id);
    if (n < node.min_size) return {};
    switch (node.kind) {
      case ExprKind::Epsilon: return n == 0 ? Items{ColoredObject::tuple({})} : Items{};
      case ExprKind::Atom: {
        if (n != 1) return {};
        Items out;
        for (unsigned c = 1; c <= t_; ++c) out.push_back(ColoredObject::atom(c));
        return out;
      }
      case ExprKind::Ref: return objects(system_.class_root[static_cast<std::size_t>(node.cls)], n);
      case ExprKind::Union: {
        Items out = objects(node.left, n);
        const Items& right = objects(node.right, n);
        out.insert(out.end(), right.begin(), right.end());
        return out;
      }
      case ExprKind::Product: {
        Items out;
        Items current;
        products(node.factors, 0, n, current, out);
        return out;
      }
      case ExprKind::Seq: {
        Items out;
        for (const Items& s : sequences(node.left, n)) out.push_back(ColoredObject::tuple(s));
        return out;
      }
      case ExprKind::MSet:
      case ExprKind::Cyc: {
        if (node.kind == ExprKind::Cyc && n == 0) return {};
        Items out;
        std::unordered_set<std::string> seen;
        for (const Items& s : sequences(node.left, n)) {
          ColoredObject obj = canonicalize(node.kind == ExprKind::MSet ? ColoredObject::mset(s) : ColoredObject::cyc(s));
          if (seen.insert(encode(obj)).second) out.push_back(std::move(obj));
        }
        return out;
      }
    }
    return {};
  }

  void products(const std::vector<int>& factors, std::size_t i, std::size_t remaining, Items& current, Items& out) {
    if (i == factors.size()) {
      if (remaining == 0) out.push_back(ColoredObject::tuple(current));
      return;
    }
    std::size_t reserved = 0;
    for (std::size_t j = i + 1; j < factors.size(); ++j) {
      const std::size_t m = system_.node(factors[j]).min_size;
      if (m == kInfiniteSize) return;
      reserved += m;
    }
    if (reserved > remaining) return;
    for (std::size_t s = 0; s <= remaining - reserved; ++s) {
      for (const ColoredObject& obj : objects(factors[i], s)) {
        current.push_back(obj);
        products(factors, i + 1, remaining - s, current, out);
        current.pop_back();
      }
    }
  }

  // Ordered sequences of operand objects (each of size >= 1) with total size n.
  const std::vector<Items>& sequences(int inner, std::size_t n) {
    const auto key = std::make_pair(inner, n);
    if (auto it = sequences_.find(key); it != sequences_.end()) return it->second;
    std::vector<Items> out;
    if (n == 0) {
      out.emplace_back();
    } else {
      for (std::size_t s = 1; s <= n; ++s) {
        const Items& heads = objects(inner, s);
        if (heads.empty()) continue;
        const std::vector<Items>& tails = sequences(inner, n - s);
        for (const ColoredObject& head : heads) {
          for (const Items& tail : tails) {
            Items seq;
            seq.reserve(tail.size() + 1);
            seq.push_back(head);
            seq.insert(seq.end(), tail.begin(), tail.end());
            out.push_back(std::move(seq));
          }
        }
      }
    }
    shuffle(out);
    return sequences_.emplace(key, std::move(out)).first->second;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    if (!shuffle_ || v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) std::swap(v[i], v[shuffle_->below(i + 1)]);
  }

  const CompiledSystem& system_;
  unsigned t_;
  std::optional<RandomStream> shuffle_;
  std::map<std::pair<int, std::size_t>, Items> objects_;
  std::map<std::pair<int, std::size_t>, std::vector<Items>> sequences_;
};

}  // namespace

EnumTable enumerate_colored(const SpecSystem& system, std::string_view cls, unsigned t, std::size_t max_size,
                            std::optional<std::uint64_t> shuffle_seed, EnumLimits limits) {
  if (max_size > limits.max_size_cap) {
    throw CapExceeded("enumeration size " + std::to_string(max_size) + " exceeds cap " +
                      std::to_string(limits.max_size_cap));
  }
  if (t == 0) throw InvalidParameter("number of colors must be positive");
  const CompiledSystem compiled = compile(system);
  const int cls_id = compiled.class_index(cls);
  Enumerator enumerator(compiled, t, shuffle_seed);

  EnumTable table;
  table.system = system;
  table.class_name = std::string(cls);
  table.t = t;
  table.max_size = max_size;
  table.by_size.resize(max_size + 1);
  for (std::size_t n = 0; n <= max_size; ++n) {
    Items objs = enumerator.objects(compiled.class_root[static_cast<std::size_t>(cls_id)], n);
    std::sort(objs.begin(), objs.end(), [](const ColoredObject& a, const ColoredObject& b) { return compare(a, b) < 0; });
    table.by_size[n] = std::move(objs);
  }
  return table;
}

BoltzmannPmf boltzmann_pmf(const EnumTable& table, double x) {
  const double f = eval_f(table.system, table.class_name, x, static_cast<double>(table.t));
  BoltzmannPmf pmf;
  double total = 0.0;
  for (std::size_t n = 0; n < table.by_size.size(); ++n) {
    const double p = std::pow(x, static_cast<double>(n)) / f;
    for (const ColoredObject& obj : table.by_size[n]) {
      pmf.probability[encode(obj)] += p;
      total += p;
    }
  }
  pmf.tail_mass = std::max(0.0, 1.0 - total);
  return pmf;
}

ChiSquareResult chi_square_test(const std::map<std::string, std::uint64_t>& observed,
                                const std::map<std::string, double>& expected, double min_bucket) {
  double total_expected = 0.0;
  for (const auto& [key, p] : expected) {
    if (p < 0.0) throw InvalidParameter("expected mass for '" + key + "' is negative");
    total_expected += p;
  }
  double total_observed = 0.0;
  for (const auto& [key, count] : observed) total_observed += static_cast<double>(count);
  if (!(total_expected > 0.0) || !(total_observed > 0.0)) throw InsufficientData("empty histogram or law");

  ChiSquareResult result;
  for (const auto& [key, count] : observed) {
    auto it = expected.find(key);
    if (count > 0 && (it == expected.end() || it->second <= 0.0)) {
      result.statistic = std::numeric_limits<double>::infinity();
      result.p_value = 0.0;
      result.buckets = expected.size();
      result.degrees_of_freedom = expected.size() > 0 ? expected.size() - 1 : 0;
      return result;
    }
  }

  std::vector<std::pair<double, double>> cells;  // (expected count, observed count)
  for (const auto& [key, p] : expected) {
    if (p <= 0.0) continue;
    auto it = observed.find(key);
    cells.emplace_back(total_observed * p / total_expected,
                       it == observed.end() ? 0.0 : static_cast<double>(it->second));
  }
  std::sort(cells.begin(), cells.end());

  std::vector<std::pair<double, double>> buckets;
  std::pair<double, double> pending{0.0, 0.0};
  for (const auto& cell : cells) {
    pending.first += cell.first;
    pending.second += cell.second;
    if (pending.first >= min_bucket) {
      buckets.push_back(pending);
      pending = {0.0, 0.0};
    }
  }
  if (pending.first > 0.0) {
    if (buckets.empty()) {
      buckets.push_back(pending);
    } else {
      buckets.back().first += pending.first;
      buckets.back().second += pending.second;
    }
  }
  if (buckets.size() < 2) throw InsufficientData("fewer than two buckets after merging");

  for (const auto& [e, o] : buckets) result.statistic += (o - e) * (o - e) / e;
  result.buckets = buckets.size();
  result.degrees_of_freedom = buckets.size() - 1;
  result.p_value = result.statistic <= 0.0
                       ? 1.0
                       : boost::math::gamma_q(static_cast<double>(result.degrees_of_freedom) / 2.0,
                                              result.statistic / 2.0);
  return result;
}

}  // namespace chroma_boltz
