#include "chroma_boltz/gf_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chroma_boltz/errors.hpp"

namespace chroma_boltz {

std::uint64_t totient(std::uint64_t k) {
  std::uint64_t result = k;
  for (std::uint64_t p = 2; p * p <= k; ++p) {
    if (k % p != 0) continue;
    while (k % p == 0) k /= p;
    result -= result / p;
  }
  if (k > 1) result -= result / k;
  return result;
}

namespace {

void check_parameters(double x, double t) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidParameter("x must be a finite nonnegative real");
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidParameter("t must be a finite positive real");
}

double neg_log_one_minus(double a, const char* where) {
  if (!(a < 1.0)) {
    throw InvalidParameter(std::string(where) + " operand value " + std::to_string(a) + " >= 1");
  }
  return -std::log1p(-a);
}

}  // namespace

LevelEvaluator::LevelEvaluator(const CompiledSystem& system, double x, double t, OracleOptions options,
                               const LevelMap* base)
    : system_(system), x_(x), t_(t), options_(options), base_(base) {
  check_parameters(x, t);
}

const LevelValues& LevelEvaluator::level(std::uint64_t level) {
  if (base_) {
    if (auto it = base_->find(level); it != base_->end()) return it->second;
  }
  if (auto it = memo_.find(level); it != memo_.end()) return it->second;
  LevelValues values;
  solve(level, values);
  return memo_.emplace(level, std::move(values)).first->second;
}

void LevelEvaluator::solve(std::uint64_t level, LevelValues& out) {
  const std::size_t n = system_.nodes.size();
  const double y = x_ == 0.0 ? 0.0 : std::pow(x_, static_cast<double>(level));
  const double tol = options_.tolerance;

  out.node.assign(n, 0.0);
  out.terms.assign(n, 0);

  // Operand values of each MSet / Cyc node at levels level*j, j >= 2. These
  // do not depend on the fixed point at this level.
  std::vector<std::vector<double>> deep(n);
  for (std::size_t id = 0; id < n; ++id) {
    const CompiledNode& node = system_.nodes[id];
    if (node.kind != ExprKind::MSet && node.kind != ExprKind::Cyc) continue;
    std::size_t kept = 1;
    if (y > 0.0) {
      if (y >= 1.0) throw DivergenceError("diagonal sum does not converge for x^level >= 1");
      for (std::uint64_t j = 2;; ++j) {
        if (j > options_.max_diagonal_terms) {
          throw DivergenceError("diagonal sum needs more than " + std::to_string(options_.max_diagonal_terms) +
                                " terms");
        }
        const double a = this->level(level * j).node[static_cast<std::size_t>(node.left)];
        const double jd = static_cast<double>(j);
        const double term = node.kind == ExprKind::MSet
                                ? a / jd
                                : static_cast<double>(totient(j)) / jd * neg_log_one_minus(a, "Cyc");
        if (term / (1.0 - y) < tol) break;
        deep[id].push_back(a);
        kept = j;
      }
    }
    out.terms[id] = kept;
  }

  std::vector<double> classes(system_.class_count(), 0.0);
  std::vector<double>& v = out.node;
  for (std::size_t iter = 0;; ++iter) {
    if (iter >= options_.max_iterations) {
      throw DivergenceError("fixed point did not settle after " + std::to_string(iter) + " iterations");
    }
    for (std::size_t id = 0; id < n; ++id) {
      const CompiledNode& node = system_.nodes[id];
      const auto at = [&](int child) { return v[static_cast<std::size_t>(child)]; };
      double value = 0.0;
      switch (node.kind) {
        case ExprKind::Epsilon: value = 1.0; break;
        case ExprKind::Atom: value = t_ * y; break;
        case ExprKind::Ref: value = classes[static_cast<std::size_t>(node.cls)]; break;
        case ExprKind::Union: value = at(node.left) + at(node.right); break;
        case ExprKind::Product: value = at(node.left) * at(node.right); break;
        case ExprKind::Seq: {
          const double a = at(node.left);
          if (!(a < 1.0)) throw InvalidParameter("Seq operand value " + std::to_string(a) + " >= 1");
          value = 1.0 / (1.0 - a);
          break;
        }
        case ExprKind::MSet: {
          double s = at(node.left);
          for (std::size_t j = 0; j < deep[id].size(); ++j) s += deep[id][j] / static_cast<double>(j + 2);
          value = std::exp(s);
          break;
        }
        case ExprKind::Cyc: {
          value = neg_log_one_minus(at(node.left), "Cyc");
          for (std::size_t j = 0; j < deep[id].size(); ++j) {
            const auto k = static_cast<std::uint64_t>(j + 2);
            value += static_cast<double>(totient(k)) / static_cast<double>(k) * neg_log_one_minus(deep[id][j], "Cyc");
          }
          break;
        }
      }
      if (!std::isfinite(value) || value > options_.value_cap) {
        throw DivergenceError("generating function value exceeds cap (x at or above singularity)");
      }
      v[id] = value;
    }
    double change = 0.0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const double next = v[static_cast<std::size_t>(system_.class_root[c])];
      change = std::max(change, std::abs(next - classes[c]) / std::max(1.0, std::abs(next)));
      classes[c] = next;
    }
    if (iter > 0 && change <= tol) break;
  }
}

OracleTable::OracleTable(std::shared_ptr<const CompiledSystem> system, double x, double t, OracleOptions options)
    : system_(std::move(system)), x_(x), t_(t), options_(options) {
  LevelEvaluator evaluator(*system_, x, t, options);
  const LevelValues& first = evaluator.level(1);
  k_max_ = std::max<std::size_t>(1, *std::max_element(first.terms.begin(), first.terms.end()));
  for (std::uint64_t k = 2; k <= k_max_; ++k) evaluator.level(k);
  levels_ = std::move(evaluator).release();
}

double OracleTable::value(int cls, std::size_t k) const {
  if (k < 1 || k > k_max_) throw std::out_of_range("oracle level " + std::to_string(k) + " outside 1..K_max");
  return levels_.at(k).node[static_cast<std::size_t>(system_->class_root[static_cast<std::size_t>(cls)])];
}

const LevelValues* OracleTable::find_level(std::uint64_t level) const {
  auto it = levels_.find(level);
  return it == levels_.end() ? nullptr : &it->second;
}

std::shared_ptr<const OracleTable> build_oracle(std::shared_ptr<const CompiledSystem> system, double x, double t,
                                                OracleOptions options) {
  return std::make_shared<const OracleTable>(std::move(system), x, t, options);
}

std::shared_ptr<const OracleTable> build_oracle(const SpecSystem& system, double x, double t,
                                                OracleOptions options) {
  return build_oracle(std::make_shared<const CompiledSystem>(compile(system)), x, t, options);
}

double eval_f(const CompiledSystem& system, int cls, double x, double t, OracleOptions options) {
  LevelEvaluator evaluator(system, x, t, options);
  return evaluator.level(1).node[static_cast<std::size_t>(system.class_root[static_cast<std::size_t>(cls)])];
}

double eval_f(const SpecSystem& system, std::string_view cls, double x, double t, OracleOptions options) {
  const CompiledSystem compiled = compile(system);
  return eval_f(compiled, compiled.class_index(cls), x, t, options);
}

double eval_diag(const SpecSystem& system, std::string_view cls, std::uint64_t k, double x, double t,
                 OracleOptions options) {
  if (k == 0) throw InvalidParameter("diagonal index must be positive");
  return eval_f(system, cls, std::pow(x, static_cast<double>(k)), t, options);
}

double expected_size(const CompiledSystem& system, int cls, double x, double t, OracleOptions options) {
  if (x == 0.0) return static_cast<double>(system.class_node(cls).min_size);
  const double h = 1e-6 * x;
  const double f0 = eval_f(system, cls, x, t, options);
  const double fm = eval_f(system, cls, x - h, t, options);
  try {
    const double fp = eval_f(system, cls, x + h, t, options);
    return x * (fp - fm) / (2.0 * h) / f0;
  } catch (const DivergenceError&) {
  } catch (const InvalidParameter&) {
  }
  return x * (f0 - fm) / h / f0;
}

TuneResult tune(const CompiledSystem& system, int cls, double t, double target_n, double solver_tolerance,
                OracleOptions options) {
  if (!(target_n > 0.0)) throw InvalidParameter("target size must be positive");
  const auto min_sz = system.class_node(cls).min_size;
  if (min_sz == kInfiniteSize) throw NoSolution("class is empty");
  if (target_n < static_cast<double>(min_sz)) {
    throw NoSolution("target size " + std::to_string(target_n) + " is below the minimum size " +
                     std::to_string(min_sz));
  }

  TuneResult result;
  if (target_n == static_cast<double>(min_sz)) {
    result.expected_size = target_n;
    return result;
  }

  auto converges = [&](double x) {
    try {
      eval_f(system, cls, x, t, options);
      return true;
    } catch (const DivergenceError&) {
      return false;
    } catch (const InvalidParameter&) {
      return false;
    }
  };

  // Bracket the singularity: lo converges, hi does not.
  double lo = 0.0;
  double hi = 1.0;
  while (converges(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) break;
  }
  if (hi <= 1e6) {
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (converges(mid) ? lo : hi) = mid;
    }
  }
  result.rho_estimate = lo;
  if (lo <= 0.0) throw DivergenceError("no x > 0 where the generating function converges");

  double e_max = 0.0;
  try {
    e_max = expected_size(system, cls, lo, t, options);
  } catch (const Error&) {
    e_max = 0.0;
  }
  if (e_max < target_n * (1.0 - solver_tolerance)) {
    throw NoSolution("expected size is bounded by " + std::to_string(e_max) + " below target " +
                     std::to_string(target_n));
  }

  double a = 0.0;
  double b = lo;
  double best_x = 0.5 * (a + b);
  double best_e = 0.0;
  for (std::size_t iter = 0; iter < 300; ++iter) {
    const double mid = 0.5 * (a + b);
    result.iterations = iter + 1;
    double e = 0.0;
    try {
      e = expected_size(system, cls, mid, t, options);
    } catch (const Error&) {
      b = mid;
      continue;
    }
    best_x = mid;
    best_e = e;
    if (std::abs(e - target_n) <= solver_tolerance * target_n) break;
    (e < target_n ? a : b) = mid;
    if (b - a <= 1e-16 * b) break;
  }
  result.x = best_x;
  result.expected_size = best_e;
  return result;
}

TuneResult tune(const SpecSystem& system, std::string_view cls, double t, double target_n, double solver_tolerance,
                OracleOptions options) {
  const CompiledSystem compiled = compile(system);
  return tune(compiled, compiled.class_index(cls), t, target_n, solver_tolerance, options);
}

}  // namespace chroma_boltz
