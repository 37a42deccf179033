#include "chroma_boltz/spec_lang.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "chroma_boltz/errors.hpp"

namespace chroma_boltz {

std::string_view to_string(ExprKind kind) {
  switch (kind) {
    case ExprKind::Epsilon: return "Eps";
    case ExprKind::Atom: return "Z";
    case ExprKind::Union: return "Union";
    case ExprKind::Product: return "Product";
    case ExprKind::Seq: return "Seq";
    case ExprKind::MSet: return "MSet";
    case ExprKind::Cyc: return "Cyc";
    case ExprKind::Ref: return "Ref";
  }
  return "?";
}

ExprPtr ClassExpr::epsilon() {
  static const ExprPtr node{new ClassExpr(ExprKind::Epsilon, nullptr, nullptr, {})};
  return node;
}

ExprPtr ClassExpr::atom() {
  static const ExprPtr node{new ClassExpr(ExprKind::Atom, nullptr, nullptr, {})};
  return node;
}

ExprPtr ClassExpr::union_of(ExprPtr left, ExprPtr right) {
  return ExprPtr{new ClassExpr(ExprKind::Union, std::move(left), std::move(right), {})};
}

ExprPtr ClassExpr::product(ExprPtr left, ExprPtr right) {
  return ExprPtr{new ClassExpr(ExprKind::Product, std::move(left), std::move(right), {})};
}

ExprPtr ClassExpr::seq(ExprPtr inner) {
  return ExprPtr{new ClassExpr(ExprKind::Seq, std::move(inner), nullptr, {})};
}

ExprPtr ClassExpr::mset(ExprPtr inner) {
  return ExprPtr{new ClassExpr(ExprKind::MSet, std::move(inner), nullptr, {})};
}

ExprPtr ClassExpr::cyc(ExprPtr inner) {
  return ExprPtr{new ClassExpr(ExprKind::Cyc, std::move(inner), nullptr, {})};
}

ExprPtr ClassExpr::ref(std::string name) {
  return ExprPtr{new ClassExpr(ExprKind::Ref, nullptr, nullptr, std::move(name))};
}

bool operator==(const ClassExpr& a, const ClassExpr& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case ExprKind::Epsilon:
    case ExprKind::Atom: return true;
    case ExprKind::Ref: return a.name_ == b.name_;
    case ExprKind::Seq:
    case ExprKind::MSet:
    case ExprKind::Cyc: return *a.left_ == *b.left_;
    case ExprKind::Union:
    case ExprKind::Product: return *a.left_ == *b.left_ && *a.right_ == *b.right_;
  }
  return false;
}

std::string to_string(const ClassExpr& expr) {
  auto wrap = [](const ClassExpr& e, bool parens) {
    return parens ? "(" + to_string(e) + ")" : to_string(e);
  };
  switch (expr.kind()) {
    case ExprKind::Epsilon: return "Eps";
    case ExprKind::Atom: return "Z";
    case ExprKind::Ref: return expr.name();
    case ExprKind::Seq: return "Seq(" + to_string(expr.inner()) + ")";
    case ExprKind::MSet: return "MSet(" + to_string(expr.inner()) + ")";
    case ExprKind::Cyc: return "Cyc(" + to_string(expr.inner()) + ")";
    case ExprKind::Union:
      return wrap(expr.left(), expr.left().kind() == ExprKind::Union) + " + " + to_string(expr.right());
    case ExprKind::Product: {
      const auto lk = expr.left().kind();
      const auto rk = expr.right().kind();
      return wrap(expr.left(), lk == ExprKind::Union || lk == ExprKind::Product) + " * " +
             wrap(expr.right(), rk == ExprKind::Union);
    }
  }
  return {};
}

const ClassExpr* SpecSystem::find(std::string_view name) const {
  for (const auto& def : definitions) {
    if (def.name == name) return def.expr.get();
  }
  return nullptr;
}

bool operator==(const SpecSystem& a, const SpecSystem& b) {
  if (a.root != b.root || a.definitions.size() != b.definitions.size()) return false;
  for (std::size_t i = 0; i < a.definitions.size(); ++i) {
    if (a.definitions[i].name != b.definitions[i].name) return false;
    if (!(*a.definitions[i].expr == *b.definitions[i].expr)) return false;
  }
  return true;
}

std::string to_string(const SpecSystem& system) {
  std::string out;
  for (const auto& def : system.definitions) {
    out += def.name + " = " + to_string(*def.expr) + ";\n";
  }
  return out;
}

namespace {

enum class Tok { Ident, Equals, Semi, Plus, Star, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_keyword(std::string_view word) {
  return word == "Z" || word == "Eps" || word == "Seq" || word == "MSet" || word == "Cyc";
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (is_ident_start(c)) {
      const std::size_t start = i;
      while (i < src.size() && is_ident_char(src[i])) ++i;
      out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), line, col});
      col += i - start;
      continue;
    }
    Tok kind;
    switch (c) {
      case '=': kind = Tok::Equals; break;
      case ';': kind = Tok::Semi; break;
      case '+': kind = Tok::Plus; break;
      case '*': kind = Tok::Star; break;
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      default: throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back({kind, std::string(1, c), line, col});
    ++col;
    ++i;
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

struct PendingRef {
  std::string name;
  std::size_t line;
  std::size_t column;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  SpecSystem parse_system() {
    SpecSystem system;
    std::map<std::string, std::pair<std::size_t, std::size_t>> seen;
    if (peek().kind == Tok::End) fail("expected at least one definition");
    while (peek().kind != Tok::End) {
      const Token name = expect(Tok::Ident, "definition name");
      if (is_keyword(name.text)) {
        throw SyntaxError("reserved word '" + name.text + "' cannot be defined", name.line, name.column);
      }
      if (seen.count(name.text)) {
        throw DuplicateDefinition("duplicate definition of '" + name.text + "'", name.line, name.column);
      }
      seen[name.text] = {name.line, name.column};
      expect(Tok::Equals, "'='");
      ExprPtr expr = parse_expr();
      expect(Tok::Semi, "';'");
      system.definitions.push_back({name.text, std::move(expr)});
    }
    for (const auto& r : refs_) {
      if (!seen.count(r.name)) throw UnknownName("unknown class '" + r.name + "'", r.line, r.column);
    }
    system.root = system.definitions.front().name;
    return system;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }

  Token advance() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    const std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(what + ", found " + found, t.line, t.column);
  }

  Token expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what);
    return advance();
  }

  // Folds an operand chain into right-nested binary nodes.
  static ExprPtr fold_right(std::vector<ExprPtr>& items, ExprPtr (*make)(ExprPtr, ExprPtr)) {
    ExprPtr acc = items.back();
    for (std::size_t i = items.size() - 1; i-- > 0;) acc = make(items[i], acc);
    return acc;
  }

  ExprPtr parse_expr() {
    std::vector<ExprPtr> terms{parse_term()};
    while (peek().kind == Tok::Plus) {
      advance();
      terms.push_back(parse_term());
    }
    return fold_right(terms, &ClassExpr::union_of);
  }

  ExprPtr parse_term() {
    std::vector<ExprPtr> factors{parse_factor()};
    while (peek().kind == Tok::Star) {
      advance();
      factors.push_back(parse_factor());
    }
    return fold_right(factors, &ClassExpr::product);
  }

  ExprPtr parse_factor() {
    const Token& t = peek();
    if (t.kind == Tok::LParen) {
      advance();
      ExprPtr e = parse_expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (t.kind != Tok::Ident) fail("expected an expression");
    const Token word = advance();
    if (word.text == "Z") return ClassExpr::atom();
    if (word.text == "Eps") return ClassExpr::epsilon();
    if (word.text == "Seq" || word.text == "MSet" || word.text == "Cyc") {
      expect(Tok::LParen, "'(' after builder");
      ExprPtr inner = parse_expr();
      expect(Tok::RParen, "')'");
      if (word.text == "Seq") return ClassExpr::seq(std::move(inner));
      if (word.text == "MSet") return ClassExpr::mset(std::move(inner));
      return ClassExpr::cyc(std::move(inner));
    }
    refs_.push_back({word.text, word.line, word.column});
    return ClassExpr::ref(word.text);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<PendingRef> refs_;
};

std::size_t sat_add(std::size_t a, std::size_t b) {
  if (a == kInfiniteSize || b == kInfiniteSize) return kInfiniteSize;
  return a + b;
}

using SizeMap = std::unordered_map<std::string, std::size_t>;

std::size_t eval_min(const ClassExpr& e, const SizeMap& current) {
  switch (e.kind()) {
    case ExprKind::Epsilon: return 0;
    case ExprKind::Atom: return 1;
    case ExprKind::Ref: {
      auto it = current.find(e.name());
      return it == current.end() ? kInfiniteSize : it->second;
    }
    case ExprKind::Union: return std::min(eval_min(e.left(), current), eval_min(e.right(), current));
    case ExprKind::Product: return sat_add(eval_min(e.left(), current), eval_min(e.right(), current));
    case ExprKind::Seq:
    case ExprKind::MSet: return 0;
    case ExprKind::Cyc: return eval_min(e.inner(), current);
  }
  return kInfiniteSize;
}

// Least fixed point of the min-size equations, starting from infinity.
SizeMap class_min_sizes(const SpecSystem& system) {
  SizeMap current;
  for (const auto& def : system.definitions) current[def.name] = kInfiniteSize;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& def : system.definitions) {
      const std::size_t v = eval_min(*def.expr, current);
      if (v < current[def.name]) {
        current[def.name] = v;
        changed = true;
      }
    }
  }
  return current;
}

// Refs reachable without any atom being forced alongside them: an object of
// the referenced class can appear as a whole object of the same size.
void collect_size_preserving(const ClassExpr& e, const SizeMap& sizes, std::set<std::string>& out) {
  switch (e.kind()) {
    case ExprKind::Epsilon:
    case ExprKind::Atom: return;
    case ExprKind::Ref: out.insert(e.name()); return;
    case ExprKind::Union:
      collect_size_preserving(e.left(), sizes, out);
      collect_size_preserving(e.right(), sizes, out);
      return;
    case ExprKind::Product:
      if (eval_min(e.right(), sizes) == 0) collect_size_preserving(e.left(), sizes, out);
      if (eval_min(e.left(), sizes) == 0) collect_size_preserving(e.right(), sizes, out);
      return;
    case ExprKind::Seq:
    case ExprKind::MSet:
    case ExprKind::Cyc: collect_size_preserving(e.inner(), sizes, out); return;
  }
}

void check_builders(const ClassExpr& e, const SizeMap& sizes, const std::string& owner,
                    std::vector<std::string>& errors) {
  switch (e.kind()) {
    case ExprKind::Epsilon:
    case ExprKind::Atom:
    case ExprKind::Ref: return;
    case ExprKind::Union:
    case ExprKind::Product:
      check_builders(e.left(), sizes, owner, errors);
      check_builders(e.right(), sizes, owner, errors);
      return;
    case ExprKind::Seq:
    case ExprKind::MSet:
    case ExprKind::Cyc:
      if (eval_min(e.inner(), sizes) == 0) {
        errors.push_back(owner + ": " + std::string(to_string(e.kind())) + " over class with neutral object");
      }
      check_builders(e.inner(), sizes, owner, errors);
      return;
  }
}

}  // namespace

SpecSystem parse_spec(std::string_view source) { return Parser(tokenize(source)).parse_system(); }

const ClassReport* ValidationReport::find(std::string_view name) const {
  for (const auto& c : classes) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ValidationReport validate(const SpecSystem& system) {
  ValidationReport report;
  const SizeMap sizes = class_min_sizes(system);

  std::map<std::string, std::set<std::string>> edges;
  for (const auto& def : system.definitions) {
    collect_size_preserving(*def.expr, sizes, edges[def.name]);
  }

  // A class on a cycle of size-preserving references has infinitely many
  // objects of some size.
  std::set<std::string> cyclic;
  for (const auto& def : system.definitions) {
    std::set<std::string> visited;
    std::vector<std::string> stack(edges[def.name].begin(), edges[def.name].end());
    while (!stack.empty()) {
      std::string n = stack.back();
      stack.pop_back();
      if (n == def.name) {
        cyclic.insert(def.name);
        break;
      }
      if (!visited.insert(n).second) continue;
      for (const auto& m : edges[n]) stack.push_back(m);
    }
  }

  for (const auto& def : system.definitions) {
    ClassReport r;
    r.name = def.name;
    r.min_size = sizes.at(def.name);
    r.admits_epsilon = r.min_size == 0;
    r.well_founded = r.min_size != kInfiniteSize && !cyclic.count(def.name);
    if (r.min_size == kInfiniteSize) {
      report.errors.push_back(def.name + ": not well-founded (no finite object)");
    } else if (cyclic.count(def.name)) {
      report.errors.push_back(def.name + ": not well-founded (size-preserving recursion)");
    }
    check_builders(*def.expr, sizes, def.name, report.errors);
    report.classes.push_back(r);
  }
  return report;
}

std::size_t min_size(const SpecSystem& system, std::string_view class_name) {
  const SizeMap sizes = class_min_sizes(system);
  auto it = sizes.find(std::string(class_name));
  if (it == sizes.end()) throw std::out_of_range("unknown class '" + std::string(class_name) + "'");
  return it->second;
}

std::size_t min_size(const SpecSystem& system, const ClassExpr& expr) {
  return eval_min(expr, class_min_sizes(system));
}

int CompiledSystem::class_index(std::string_view name) const {
  for (std::size_t i = 0; i < class_names.size(); ++i) {
    if (class_names[i] == name) return static_cast<int>(i);
  }
  throw std::out_of_range("unknown class '" + std::string(name) + "'");
}

CompiledSystem compile(const SpecSystem& system) {
  const ValidationReport report = validate(system);
  if (!report.ok()) {
    std::string msg = "invalid specification:";
    for (const auto& e : report.errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  const SizeMap sizes = class_min_sizes(system);

  CompiledSystem out;
  std::unordered_map<std::string, int> index;
  for (const auto& def : system.definitions) {
    index[def.name] = static_cast<int>(out.class_names.size());
    out.class_names.push_back(def.name);
  }
  out.root_class = index.at(system.root);

  std::function<int(const ClassExpr&)> emit = [&](const ClassExpr& e) -> int {
    CompiledNode n;
    n.kind = e.kind();
    n.min_size = eval_min(e, sizes);
    switch (e.kind()) {
      case ExprKind::Epsilon:
      case ExprKind::Atom: break;
      case ExprKind::Ref: n.cls = index.at(e.name()); break;
      case ExprKind::Seq:
      case ExprKind::MSet:
      case ExprKind::Cyc: n.left = emit(e.inner()); break;
      case ExprKind::Union:
      case ExprKind::Product:
        n.left = emit(e.left());
        n.right = emit(e.right());
        break;
    }
    if (n.kind == ExprKind::Product) {
      for (int child : {n.left, n.right}) {
        const CompiledNode& c = out.node(child);
        if (c.kind == ExprKind::Product) {
          n.factors.insert(n.factors.end(), c.factors.begin(), c.factors.end());
        } else {
          n.factors.push_back(child);
        }
      }
    }
    out.nodes.push_back(std::move(n));
    return static_cast<int>(out.nodes.size()) - 1;
  };

  out.class_root.resize(system.definitions.size());
  for (const auto& def : system.definitions) {
    out.class_root[static_cast<std::size_t>(index.at(def.name))] = emit(*def.expr);
  }
  return out;
}

}  // namespace chroma_boltz
