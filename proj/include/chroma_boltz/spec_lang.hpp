#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chroma_boltz {

enum class ExprKind { Epsilon, Atom, Union, Product, Seq, MSet, Cyc, Ref };

std::string_view to_string(ExprKind kind);

class ClassExpr;
using ExprPtr = std::shared_ptr<const ClassExpr>;

/// Immutable node of a class expression. Union and Product are binary;
/// n-ary chains are stored right-nested.
class ClassExpr {
 public:
  static ExprPtr epsilon();
  static ExprPtr atom();
  static ExprPtr union_of(ExprPtr left, ExprPtr right);
  static ExprPtr product(ExprPtr left, ExprPtr right);
  static ExprPtr seq(ExprPtr inner);
  static ExprPtr mset(ExprPtr inner);
  static ExprPtr cyc(ExprPtr inner);
  static ExprPtr ref(std::string name);

  ExprKind kind() const noexcept { return kind_; }
  const ClassExpr& left() const { return *left_; }
  const ClassExpr& right() const { return *right_; }
  // Operand of Seq / MSet / Cyc.
  const ClassExpr& inner() const { return *left_; }
  const std::string& name() const noexcept { return name_; }

  bool is_builder() const noexcept {
    return kind_ == ExprKind::Seq || kind_ == ExprKind::MSet || kind_ == ExprKind::Cyc;
  }

  friend bool operator==(const ClassExpr& a, const ClassExpr& b);

 private:
  ClassExpr(ExprKind kind, ExprPtr left, ExprPtr right, std::string name)
      : kind_(kind), left_(std::move(left)), right_(std::move(right)), name_(std::move(name)) {}

  ExprKind kind_;
  ExprPtr left_;
  ExprPtr right_;
  std::string name_;
};

// Pretty-print in the DSL's concrete syntax, with the minimal parentheses
// that make parse(to_string(e)) reproduce e exactly.
std::string to_string(const ClassExpr& expr);

struct Definition {
  std::string name;
  ExprPtr expr;
};

struct SpecSystem {
  std::vector<Definition> definitions;
  std::string root;

  const ClassExpr* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
};

bool operator==(const SpecSystem& a, const SpecSystem& b);

std::string to_string(const SpecSystem& system);

/// Parses `Name = expr ;` definitions. The first definition is the root.
/// Throws SyntaxError, UnknownName or DuplicateDefinition with line/column.
SpecSystem parse_spec(std::string_view source);

inline constexpr std::size_t kInfiniteSize = std::numeric_limits<std::size_t>::max();

struct ClassReport {
  std::string name;
  std::size_t min_size = kInfiniteSize;
  bool admits_epsilon = false;
  bool well_founded = false;
};

struct ValidationReport {
  std::vector<ClassReport> classes;
  std::vector<std::string> errors;

  bool ok() const noexcept { return errors.empty(); }
  const ClassReport* find(std::string_view name) const;
};

ValidationReport validate(const SpecSystem& system);

// Least-fixed-point size of the smallest object; kInfiniteSize if the class is empty.
std::size_t min_size(const SpecSystem& system, std::string_view class_name);
std::size_t min_size(const SpecSystem& system, const ClassExpr& expr);

// Flattened, index-based form of a validated system shared by the oracle,
// samplers and enumerator. Nodes are stored children-first.
struct CompiledNode {
  ExprKind kind = ExprKind::Epsilon;
  int left = -1;
  int right = -1;
  // Ref target.
  int cls = -1;
  // Product: operands of the whole chain this node heads, left to right.
  std::vector<int> factors;
  std::size_t min_size = kInfiniteSize;
};

class CompiledSystem {
 public:
  std::vector<CompiledNode> nodes;
  std::vector<int> class_root;
  std::vector<std::string> class_names;
  int root_class = 0;

  std::size_t class_count() const noexcept { return class_root.size(); }
  // Throws std::out_of_range with the offending name.
  int class_index(std::string_view name) const;
  const CompiledNode& node(int id) const { return nodes[static_cast<std::size_t>(id)]; }
  const CompiledNode& class_node(int cls) const { return node(class_root[static_cast<std::size_t>(cls)]); }
};

/// Throws ValidationError listing every diagnostic if validate() reports any.
CompiledSystem compile(const SpecSystem& system);

}  // namespace chroma_boltz
