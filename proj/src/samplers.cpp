#include "chroma_boltz/samplers.hpp"

#include <cmath>
#include <string>

#include "chroma_boltz/errors.hpp"

namespace chroma_boltz {

SamplerContext::SamplerContext(std::shared_ptr<const OracleTable> oracle, std::uint64_t seed, SamplerOptions options)
    : oracle_(std::move(oracle)), rng_(seed), options_(options) {
  overflow_ = std::make_unique<LevelEvaluator>(oracle_->system(), oracle_->x(), oracle_->t(), oracle_->options(),
                                               &oracle_->levels());
}

const LevelValues& SamplerContext::level(std::uint64_t diag_scale) {
  if (const LevelValues* stored = oracle_->find_level(diag_scale)) return *stored;
  return overflow_->level(diag_scale);
}

double SamplerContext::checked_probability(double p) {
  if (!(p >= -options_.probability_slack && p <= 1.0 + options_.probability_slack)) {
    throw InvalidParameter("sampler probability " + std::to_string(p) + " outside [0,1]");
  }
  return std::min(1.0, std::max(0.0, p));
}

void SamplerContext::enter() {
  if (++calls_ > options_.depth_cap) {
    throw DepthExceeded("more than " + std::to_string(options_.depth_cap) +
                        " constructor calls; parameters may be critical or untuned");
  }
}

void SamplerContext::add_atoms(std::uint64_t count) {
  running_size_ += count;
  if (ceiling_ && running_size_ > *ceiling_) throw SizeCeilingExceeded();
}

ProfiledObject SamplerContext::sample_class(int cls, std::optional<std::size_t> ceiling) {
  calls_ = 0;
  running_size_ = 0;
  ceiling_ = ceiling;
  const int root = system().class_root[static_cast<std::size_t>(cls)];
  if (!(node_value(root, 1) > 0.0)) throw InvalidParameter("class has zero Boltzmann mass at this x");
  return sample(root, 1);
}

ProfiledObject SamplerContext::sample(int node_id, std::uint64_t diag_scale) {
  enter();
  const CompiledNode& node = system().node(node_id);
  switch (node.kind) {
    case ExprKind::Epsilon: return ProfiledObject::tuple({});
    case ExprKind::Atom:
      add_atoms(diag_scale);
      return ProfiledObject::atom();
    case ExprKind::Ref: return sample(system().class_root[static_cast<std::size_t>(node.cls)], diag_scale);
    case ExprKind::Union: {
      const LevelValues& lv = level(diag_scale);
      const double total = lv.node[static_cast<std::size_t>(node_id)];
      const double p = checked_probability(lv.node[static_cast<std::size_t>(node.left)] / total);
      return sample(bern(rng_, p) ? node.left : node.right, diag_scale);
    }
    case ExprKind::Product: {
      std::vector<ProfiledObject> parts;
      parts.reserve(node.factors.size());
      for (int f : node.factors) parts.push_back(sample(f, diag_scale));
      return ProfiledObject::tuple(std::move(parts));
    }
    case ExprKind::Seq: return sample_seq(node_id, diag_scale);
    case ExprKind::MSet: return sample_mset(node_id, diag_scale);
    case ExprKind::Cyc: return sample_cyc(node_id, diag_scale);
  }
  throw std::logic_error("unreachable node kind");
}

ProfiledObject SamplerContext::sample_seq(int node_id, std::uint64_t diag_scale) {
  const CompiledNode& node = system().node(node_id);
  const double a = node_value(node.left, diag_scale);
  if (!(a < 1.0)) throw InvalidParameter("Seq operand value " + std::to_string(a) + " >= 1");
  const std::uint64_t k = geom(rng_, checked_probability(a));
  std::vector<ProfiledObject> items;
  items.reserve(k);
  for (std::uint64_t i = 0; i < k; ++i) items.push_back(sample(node.left, diag_scale));
  return ProfiledObject::tuple(std::move(items));
}

ProfiledObject SamplerContext::sample_mset(int node_id, std::uint64_t diag_scale) {
  const CompiledNode& node = system().node(node_id);
  const LevelValues& lv = level(diag_scale);
  const std::size_t terms = lv.terms[static_cast<std::size_t>(node_id)];

  // lambda_j = F_A(s_j, s_2j, ...) / j at the current scale.
  std::vector<double> lambda(terms + 1, 0.0);
  for (std::size_t j = 1; j <= terms; ++j) {
    lambda[j] = node_value(node.left, diag_scale * j) / static_cast<double>(j);
  }
  // Max-index law: P(K <= k) = exp(-sum_{j>k} lambda_j); mass past the
  // truncation is folded into K = terms.
  std::vector<double> tail(terms + 1, 0.0);
  for (std::size_t k = terms; k-- > 1;) tail[k] = tail[k + 1] + lambda[k + 1];
  const double u = rng_.uniform();
  std::size_t max_index = terms;
  for (std::size_t k = 1; k < terms; ++k) {
    if (u < checked_probability(std::exp(-tail[k]))) {
      max_index = k;
      break;
    }
  }

  std::vector<ProfiledObject> items;
  for (std::size_t j = 1; j <= max_index; ++j) {
    std::uint64_t q = 0;
    if (max_index == 1) {
      q = pois(rng_, lambda[1]);
    } else if (j < max_index) {
      q = lambda[j] > 0.0 ? pois(rng_, lambda[j]) : 0;
    } else {
      q = pois_pos(rng_, lambda[j]);
    }
    for (std::uint64_t i = 0; i < q; ++i) {
      if (j == 1) {
        items.push_back(sample(node.left, diag_scale));
      } else {
        items.push_back(ProfiledObject::diag(j, sample(node.left, diag_scale * j)));
      }
    }
  }
  return ProfiledObject::mset(std::move(items));
}

ProfiledObject SamplerContext::sample_cyc(int node_id, std::uint64_t diag_scale) {
  const CompiledNode& node = system().node(node_id);
  const LevelValues& lv = level(diag_scale);
  const std::size_t terms = lv.terms[static_cast<std::size_t>(node_id)];

  std::vector<double> operand(terms + 1, 0.0);
  std::vector<double> mass(terms + 1, 0.0);
  double total = 0.0;
  for (std::size_t k = 1; k <= terms; ++k) {
    operand[k] = node_value(node.left, diag_scale * k);
    if (!(operand[k] < 1.0)) throw InvalidParameter("Cyc operand value >= 1");
    mass[k] = static_cast<double>(totient(k)) / static_cast<double>(k) * -std::log1p(-operand[k]);
    total += mass[k];
  }
  if (!(total > 0.0)) throw InvalidParameter("cycle class has zero mass");

  // Totient-weighted index law by sequential inversion; residual to the last index.
  const double u = rng_.uniform() * total;
  double cdf = 0.0;
  std::size_t index = terms;
  for (std::size_t k = 1; k <= terms; ++k) {
    cdf += mass[k];
    checked_probability(cdf / total);
    if (u < cdf && mass[k] > 0.0) {
      index = k;
      break;
    }
  }
  while (mass[index] <= 0.0 && index > 1) --index;

  const std::uint64_t length = logarithmic(rng_, operand[index]);
  const std::uint64_t scale = diag_scale * index;
  std::vector<ProfiledObject> items;
  items.reserve(length);
  for (std::uint64_t i = 0; i < length; ++i) items.push_back(sample(node.left, scale));
  if (index == 1) return ProfiledObject::cyc(std::move(items));
  std::vector<ProfiledObject> wrapped;
  wrapped.push_back(ProfiledObject::diag(index, ProfiledObject::tuple(std::move(items))));
  return ProfiledObject::cyc(std::move(wrapped));
}

}  // namespace chroma_boltz
