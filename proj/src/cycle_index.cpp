#include "chroma_boltz/cycle_index.hpp"

#include <algorithm>
#include <stdexcept>

#include "chroma_boltz/errors.hpp"
#include "chroma_boltz/gf_oracle.hpp"

namespace chroma_boltz {

std::size_t weighted_degree(const Monomial& m) {
  std::size_t w = 0;
  for (std::size_t i = 0; i < m.size(); ++i) w += (i + 1) * m[i];
  return w;
}

std::size_t part_count(const Monomial& m) {
  std::size_t p = 0;
  for (unsigned e : m) p += e;
  return p;
}

std::string to_string(const Monomial& m) {
  std::string out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) continue;
    if (!out.empty()) out += ' ';
    out += "s" + std::to_string(i + 1);
    if (m[i] > 1) out += "^" + std::to_string(m[i]);
  }
  return out.empty() ? "1" : out;
}

Monomial make_monomial(std::size_t width, std::initializer_list<std::pair<std::size_t, unsigned>> powers) {
  Monomial m(width, 0);
  for (auto [index, exponent] : powers) m.at(index - 1) += exponent;
  return m;
}

Rational CycleIndexSeries::coefficient(const Monomial& m) const {
  Monomial key = m;
  key.resize(max_weight, 0);
  auto it = terms.find(key);
  return it == terms.end() ? Rational(0) : it->second;
}

std::vector<std::pair<Monomial, Rational>> CycleIndexSeries::ordered_terms() const {
  std::vector<std::pair<Monomial, Rational>> out(terms.begin(), terms.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const auto wa = weighted_degree(a.first);
    const auto wb = weighted_degree(b.first);
    if (wa != wb) return wa < wb;
    return a.first > b.first;
  });
  return out;
}

namespace {

// Sparse truncated series in s_1..s_W keyed by exponent vectors.
class TruncatedSeries {
 public:
  explicit TruncatedSeries(std::size_t width) : width_(width) {}

  static TruncatedSeries constant(std::size_t width, const Rational& c) {
    TruncatedSeries s(width);
    if (c != 0) s.terms_[Monomial(width, 0)] = c;
    return s;
  }

  static TruncatedSeries variable(std::size_t width, std::size_t index) {
    TruncatedSeries s(width);
    if (index <= width) {
      Monomial m(width, 0);
      m[index - 1] = 1;
      s.terms_[m] = 1;
    }
    return s;
  }

  const std::map<Monomial, Rational>& terms() const { return terms_; }
  Rational constant_term() const {
    auto it = terms_.find(Monomial(width_, 0));
    return it == terms_.end() ? Rational(0) : it->second;
  }

  TruncatedSeries operator+(const TruncatedSeries& o) const {
    TruncatedSeries r = *this;
    for (const auto& [m, c] : o.terms_) r.accumulate(m, c);
    return r;
  }

  TruncatedSeries operator*(const TruncatedSeries& o) const {
    TruncatedSeries r(width_);
    for (const auto& [ma, ca] : terms_) {
      const std::size_t wa = weighted_degree(ma);
      for (const auto& [mb, cb] : o.terms_) {
        if (wa + weighted_degree(mb) > width_) continue;
        Monomial m(width_);
        for (std::size_t i = 0; i < width_; ++i) m[i] = ma[i] + mb[i];
        r.accumulate(m, ca * cb);
      }
    }
    return r;
  }

  TruncatedSeries scaled(const Rational& k) const {
    TruncatedSeries r(width_);
    if (k == 0) return r;
    for (const auto& [m, c] : terms_) r.terms_[m] = c * k;
    return r;
  }

  // s_i -> s_{k i}.
  TruncatedSeries diagonal(std::size_t k) const {
    TruncatedSeries r(width_);
    for (const auto& [m, c] : terms_) {
      if (k * weighted_degree(m) > width_) continue;
      Monomial out(width_, 0);
      for (std::size_t i = 0; i < width_; ++i) {
        if (m[i]) out[k * (i + 1) - 1] = m[i];
      }
      r.accumulate(out, c);
    }
    return r;
  }

  // exp(S) for S without constant term.
  TruncatedSeries exp() const {
    TruncatedSeries result = constant(width_, 1);
    TruncatedSeries power = constant(width_, 1);
    for (std::size_t n = 1; n <= width_; ++n) {
      power = (power * *this).scaled(Rational(1, static_cast<long>(n)));
      result = result + power;
    }
    return result;
  }

  // -log(1 - S) = sum S^l / l.
  TruncatedSeries neg_log_one_minus() const {
    TruncatedSeries result(width_);
    TruncatedSeries power = constant(width_, 1);
    for (std::size_t l = 1; l <= width_; ++l) {
      power = power * *this;
      result = result + power.scaled(Rational(1, static_cast<long>(l)));
    }
    return result;
  }

  // 1 / (1 - S) = sum S^l.
  TruncatedSeries inverse_one_minus() const {
    TruncatedSeries result = constant(width_, 1);
    TruncatedSeries power = constant(width_, 1);
    for (std::size_t l = 1; l <= width_; ++l) {
      power = power * *this;
      result = result + power;
    }
    return result;
  }

  friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b) { return a.terms_ == b.terms_; }

 private:
  void accumulate(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  std::size_t width_;
  std::map<Monomial, Rational> terms_;
};

std::vector<TruncatedSeries> solve_series(const CompiledSystem& system, std::size_t width) {
  const std::size_t n = system.nodes.size();
  std::vector<TruncatedSeries> classes(system.class_count(), TruncatedSeries(width));
  const std::size_t max_rounds = 16 * (width + 2) * (system.class_count() + 2);
  for (std::size_t round = 0; round < max_rounds; ++round) {
    std::vector<TruncatedSeries> v;
    v.reserve(n);
    for (std::size_t id = 0; id < n; ++id) {
      const CompiledNode& node = system.nodes[id];
      const auto at = [&](int child) -> const TruncatedSeries& { return v[static_cast<std::size_t>(child)]; };
      switch (node.kind) {
        case ExprKind::Epsilon: v.push_back(TruncatedSeries::constant(width, 1)); break;
        case ExprKind::Atom: v.push_back(TruncatedSeries::variable(width, 1)); break;
        case ExprKind::Ref: v.push_back(classes[static_cast<std::size_t>(node.cls)]); break;
        case ExprKind::Union: v.push_back(at(node.left) + at(node.right)); break;
        case ExprKind::Product: v.push_back(at(node.left) * at(node.right)); break;
        case ExprKind::Seq: v.push_back(at(node.left).inverse_one_minus()); break;
        case ExprKind::MSet: {
          TruncatedSeries sum(width);
          for (std::size_t k = 1; k <= width; ++k) {
            sum = sum + at(node.left).diagonal(k).scaled(Rational(1, static_cast<long>(k)));
          }
          v.push_back(sum.exp());
          break;
        }
        case ExprKind::Cyc: {
          TruncatedSeries sum(width);
          for (std::size_t k = 1; k <= width; ++k) {
            const Rational weight(static_cast<long>(totient(k)), static_cast<long>(k));
            sum = sum + at(node.left).diagonal(k).neg_log_one_minus().scaled(weight);
          }
          v.push_back(sum);
          break;
        }
      }
    }
    std::vector<TruncatedSeries> next;
    next.reserve(classes.size());
    for (int root : system.class_root) next.push_back(v[static_cast<std::size_t>(root)]);
    if (next == classes) return classes;
    classes = std::move(next);
  }
  throw std::logic_error("cycle-index iteration did not stabilize");
}

}  // namespace

CycleIndexSeries series_cycle_index(const CompiledSystem& system, int cls, std::size_t max_weight,
                                    SeriesLimits limits) {
  if (max_weight > limits.max_weight) {
    throw CapExceeded("series weight " + std::to_string(max_weight) + " exceeds cap " +
                      std::to_string(limits.max_weight));
  }
  const auto all = solve_series(system, max_weight);
  CycleIndexSeries out;
  out.class_name = system.class_names[static_cast<std::size_t>(cls)];
  out.max_weight = max_weight;
  out.terms = all[static_cast<std::size_t>(cls)].terms();
  return out;
}

CycleIndexSeries series_cycle_index(const SpecSystem& system, std::string_view cls, std::size_t max_weight,
                                    SeriesLimits limits) {
  const CompiledSystem compiled = compile(system);
  return series_cycle_index(compiled, compiled.class_index(cls), max_weight, limits);
}

std::vector<Rational> substitute_colors(const CycleIndexSeries& series, const Rational& t) {
  std::vector<Rational> out(series.max_weight + 1, Rational(0));
  for (const auto& [m, c] : series.terms) {
    Rational term = c;
    for (std::size_t p = part_count(m); p > 0; --p) term *= t;
    out[weighted_degree(m)] += term;
  }
  return out;
}

std::vector<BigInt> series_f(const CompiledSystem& system, int cls, unsigned t, std::size_t max_size,
                             SeriesLimits limits) {
  const auto series = series_cycle_index(system, cls, max_size, limits);
  std::vector<BigInt> out;
  for (const Rational& c : substitute_colors(series, Rational(t))) {
    if (denominator(c) != 1) throw std::logic_error("non-integral colored count " + c.str());
    out.push_back(numerator(c));
  }
  return out;
}

std::vector<BigInt> series_f(const SpecSystem& system, std::string_view cls, unsigned t, std::size_t max_size,
                             SeriesLimits limits) {
  const CompiledSystem compiled = compile(system);
  return series_f(compiled, compiled.class_index(cls), t, max_size, limits);
}

std::vector<std::size_t> min_parts_table(const CompiledSystem& system, int cls, std::size_t max_weight) {
  constexpr std::size_t inf = kInfiniteSize;
  const std::size_t n = system.nodes.size();
  const std::size_t width = max_weight + 1;
  auto add = [](std::size_t a, std::size_t b) { return a == inf || b == inf ? inf : a + b; };

  // table[node][w]; seq(w) caches the Seq closure of each builder's operand,
  // used by Seq and Cyc nodes.
  std::vector<std::vector<std::size_t>> table(n, std::vector<std::size_t>(width, inf));
  std::vector<std::vector<std::size_t>> seq(n, std::vector<std::size_t>(width, inf));

  // Weights are filled in increasing order; at a fixed weight, references
  // through size-preserving positions are resolved by repeating passes.
  for (std::size_t w = 0; w <= max_weight; ++w) {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t id = 0; id < n; ++id) {
        const CompiledNode& node = system.nodes[id];
        const auto at = [&](int child, std::size_t weight) {
          return table[static_cast<std::size_t>(child)][weight];
        };
        std::size_t value = inf;
        switch (node.kind) {
          case ExprKind::Epsilon: value = w == 0 ? 0 : inf; break;
          case ExprKind::Atom: value = w == 1 ? 1 : inf; break;
          case ExprKind::Ref: value = table[static_cast<std::size_t>(system.class_root[static_cast<std::size_t>(node.cls)])][w]; break;
          case ExprKind::Union: value = std::min(at(node.left, w), at(node.right, w)); break;
          case ExprKind::Product:
            for (std::size_t a = 0; a <= w; ++a) value = std::min(value, add(at(node.left, a), at(node.right, w - a)));
            break;
          case ExprKind::Seq:
          case ExprKind::Cyc: {
            // Sequences of operand pieces totalling w (empty allowed at w = 0).
            std::size_t s = w == 0 ? 0 : inf;
            for (std::size_t a = 1; a <= w; ++a) s = std::min(s, add(at(node.left, a), seq[id][w - a]));
            if (s < seq[id][w]) {
              seq[id][w] = s;
              changed = true;
            }
            if (node.kind == ExprKind::Seq) {
              value = s;
            } else if (w > 0) {
              // Delta_k of a nonempty sequence of total weight w / k.
              for (std::size_t k = 1; k <= w; ++k) {
                if (w % k != 0) continue;
                const std::size_t u = w / k;
                for (std::size_t a = 1; a <= u; ++a) value = std::min(value, add(at(node.left, a), seq[id][u - a]));
              }
            }
            break;
          }
          case ExprKind::MSet: {
            // Unbounded knapsack over pieces Delta_k(a): weight k*a, parts alpha_inner(a).
            value = w == 0 ? 0 : inf;
            for (std::size_t a = 1; a <= w; ++a) {
              const std::size_t p = at(node.left, a);
              if (p == inf) continue;
              for (std::size_t k = 1; k * a <= w; ++k) value = std::min(value, add(p, table[id][w - k * a]));
            }
            break;
          }
        }
        if (value < table[id][w]) {
          table[id][w] = value;
          changed = true;
        }
      }
    }
  }
  return table[static_cast<std::size_t>(system.class_root[static_cast<std::size_t>(cls)])];
}

std::size_t min_parts(const SpecSystem& system, std::string_view cls, std::size_t weight, std::size_t dp_cap) {
  if (weight < 1) throw InvalidParameter("min_parts needs a positive weight");
  if (weight > dp_cap) {
    throw CapExceeded("min_parts weight " + std::to_string(weight) + " exceeds cap " + std::to_string(dp_cap));
  }
  const CompiledSystem compiled = compile(system);
  const auto table = min_parts_table(compiled, compiled.class_index(cls), weight);
  if (table[weight] == kInfiniteSize) {
    throw NoProfile("class " + std::string(cls) + " has no object of size " + std::to_string(weight));
  }
  return table[weight];
}

}  // namespace chroma_boltz
