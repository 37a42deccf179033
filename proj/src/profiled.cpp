#include "chroma_boltz/profiled.hpp"

#include <algorithm>
#include <stdexcept>

namespace chroma_boltz {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Atom: return "atom";
    case NodeKind::Tuple: return "tuple";
    case NodeKind::MSet: return "mset";
    case NodeKind::Cyc: return "cyc";
    case NodeKind::Diag: return "diag";
  }
  return "?";
}

ProfiledObject ProfiledObject::diag(std::uint64_t k, ProfiledObject child) {
  if (k == 0) throw std::invalid_argument("diagonal index must be positive");
  ProfiledObject d{NodeKind::Diag, k, {}};
  d.children.push_back(std::move(child));
  return d;
}

std::size_t weighted_degree(const Profile& p) {
  std::size_t w = 0;
  for (auto [cardinal, count] : p) w += cardinal * count;
  return w;
}

std::size_t part_count(const Profile& p) {
  std::size_t n = 0;
  for (auto [cardinal, count] : p) n += count;
  return n;
}

std::size_t size(const ProfiledObject& obj) {
  if (obj.kind == NodeKind::Atom) return 1;
  std::size_t s = 0;
  for (const auto& c : obj.children) s += size(c);
  return obj.kind == NodeKind::Diag ? obj.k * s : s;
}

namespace {

void collect_profile(const ProfiledObject& obj, std::uint64_t multiplier, Profile& out) {
  if (obj.kind == NodeKind::Atom) {
    ++out[multiplier];
    return;
  }
  const std::uint64_t m = obj.kind == NodeKind::Diag ? multiplier * obj.k : multiplier;
  for (const auto& c : obj.children) collect_profile(c, m, out);
}

std::vector<ColoredObject> expand_items(const ProfiledObject& obj, NodeKind parent, unsigned& next_part) {
  switch (obj.kind) {
    case NodeKind::Atom: return {ColoredObject::atom(next_part++)};
    case NodeKind::Diag: {
      const ProfiledObject& child = obj.children.at(0);
      std::vector<ColoredObject> inner = expand_items(child, NodeKind::Diag, next_part);
      if (parent == NodeKind::Cyc && child.kind == NodeKind::Tuple) inner = std::move(inner.front().children);
      std::vector<ColoredObject> out;
      out.reserve(inner.size() * obj.k);
      for (std::uint64_t i = 0; i < obj.k; ++i) out.insert(out.end(), inner.begin(), inner.end());
      return out;
    }
    case NodeKind::Tuple:
    case NodeKind::MSet:
    case NodeKind::Cyc: {
      ColoredObject node{obj.kind, 0, {}};
      for (const auto& c : obj.children) {
        auto items = expand_items(c, obj.kind, next_part);
        std::move(items.begin(), items.end(), std::back_inserter(node.children));
      }
      return {std::move(node)};
    }
  }
  return {};
}

void collect_parts(const ColoredObject& obj, std::size_t& position, std::vector<std::vector<std::size_t>>& parts) {
  if (obj.kind == NodeKind::Atom) {
    parts.at(obj.color).push_back(++position);
    return;
  }
  for (const auto& c : obj.children) collect_parts(c, position, parts);
}

ColoredObject recolor(const ColoredObject& obj, std::span<const unsigned> colors) {
  if (obj.kind == NodeKind::Atom) return ColoredObject::atom(colors[obj.color]);
  ColoredObject out{obj.kind, 0, {}};
  out.children.reserve(obj.children.size());
  for (const auto& c : obj.children) out.children.push_back(recolor(c, colors));
  return out;
}

int kind_rank(NodeKind k) {
  switch (k) {
    case NodeKind::Atom: return 0;
    case NodeKind::Tuple: return 1;
    case NodeKind::MSet: return 2;
    case NodeKind::Cyc: return 3;
    case NodeKind::Diag: return 4;
  }
  return 5;
}

template <class T>
int three_way(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

int compare_children(const ColoredObject& a, const ColoredObject& b) {
  const std::size_t n = std::min(a.children.size(), b.children.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(a.children[i], b.children[i])) return c;
  }
  return three_way(a.children.size(), b.children.size());
}

}  // namespace

Profile profile(const ProfiledObject& obj) {
  Profile out;
  collect_profile(obj, 1, out);
  return out;
}

std::size_t size(const ColoredObject& obj) {
  if (obj.kind == NodeKind::Atom) return 1;
  std::size_t s = 0;
  for (const auto& c : obj.children) s += size(c);
  return s;
}

int compare(const ColoredObject& a, const ColoredObject& b) {
  if (int c = three_way(size(a), size(b))) return c;
  if (int c = three_way(kind_rank(a.kind), kind_rank(b.kind))) return c;
  if (int c = three_way(a.color, b.color)) return c;
  return compare_children(a, b);
}

ColoredObject canonicalize(const ColoredObject& obj) {
  if (obj.kind == NodeKind::Atom) return obj;
  ColoredObject out{obj.kind, 0, {}};
  out.children.reserve(obj.children.size());
  for (const auto& c : obj.children) out.children.push_back(canonicalize(c));
  if (out.kind == NodeKind::MSet) {
    std::sort(out.children.begin(), out.children.end(),
              [](const ColoredObject& a, const ColoredObject& b) { return compare(a, b) < 0; });
  } else if (out.kind == NodeKind::Cyc && out.children.size() > 1) {
    const std::size_t m = out.children.size();
    auto rotation_less = [&](std::size_t r, std::size_t s) {
      for (std::size_t i = 0; i < m; ++i) {
        if (int c = compare(out.children[(r + i) % m], out.children[(s + i) % m])) return c < 0;
      }
      return false;
    };
    std::size_t best = 0;
    for (std::size_t r = 1; r < m; ++r) {
      if (rotation_less(r, best)) best = r;
    }
    std::rotate(out.children.begin(), out.children.begin() + static_cast<std::ptrdiff_t>(best), out.children.end());
  }
  return out;
}

ExpandedObject expand(const ProfiledObject& obj) {
  unsigned next_part = 0;
  std::vector<ColoredObject> items = expand_items(obj, NodeKind::Tuple, next_part);
  ExpandedObject out;
  out.shape = items.size() == 1 ? std::move(items.front()) : ColoredObject::tuple(std::move(items));
  out.parts.resize(next_part);
  std::size_t position = 0;
  collect_parts(out.shape, position, out.parts);
  return out;
}

ExpandedObject diagonal(const ExpandedObject& obj, std::size_t k) {
  if (k == 0) throw std::invalid_argument("diagonal index must be positive");
  ExpandedObject out;
  out.shape = ColoredObject::tuple(std::vector<ColoredObject>(k, obj.shape));
  const std::size_t atoms = size(obj.shape);
  out.parts.resize(obj.parts.size());
  for (std::size_t p = 0; p < obj.parts.size(); ++p) {
    for (std::size_t copy = 0; copy < k; ++copy) {
      for (std::size_t pos : obj.parts[p]) out.parts[p].push_back(pos + copy * atoms);
    }
  }
  return out;
}

Profile partition_profile(const std::vector<std::vector<std::size_t>>& parts) {
  Profile out;
  for (const auto& part : parts) ++out[part.size()];
  return out;
}

ColoredObject apply_colors(const ExpandedObject& expanded, std::span<const unsigned> part_colors) {
  if (part_colors.size() < expanded.parts.size()) throw std::invalid_argument("one color per part required");
  return recolor(expanded.shape, part_colors);
}

std::string encode(const ColoredObject& obj) {
  if (obj.kind == NodeKind::Atom) return "#" + std::to_string(obj.color);
  std::string open = "(", close = ")";
  if (obj.kind == NodeKind::MSet) open = "{", close = "}";
  if (obj.kind == NodeKind::Cyc) open = "[", close = "]";
  std::string out = open;
  for (std::size_t i = 0; i < obj.children.size(); ++i) {
    if (i) out += ' ';
    out += encode(obj.children[i]);
  }
  return out + close;
}

std::string encode(const ProfiledObject& obj) {
  switch (obj.kind) {
    case NodeKind::Atom: return "Z";
    case NodeKind::Diag: return "<" + std::to_string(obj.k) + ":" + encode(obj.children.at(0)) + ">";
    default: break;
  }
  std::string open = "(", close = ")";
  if (obj.kind == NodeKind::MSet) open = "{", close = "}";
  if (obj.kind == NodeKind::Cyc) open = "[", close = "]";
  std::string out = open;
  for (std::size_t i = 0; i < obj.children.size(); ++i) {
    if (i) out += ' ';
    out += encode(obj.children[i]);
  }
  return out + close;
}

nlohmann::json to_json(const ColoredObject& obj) {
  if (obj.kind == NodeKind::Atom) return {{"kind", "atom"}, {"color", obj.color}};
  nlohmann::json children = nlohmann::json::array();
  for (const auto& c : obj.children) children.push_back(to_json(c));
  return {{"kind", std::string(to_string(obj.kind))}, {"children", std::move(children)}};
}

nlohmann::json to_json(const ProfiledObject& obj) {
  switch (obj.kind) {
    case NodeKind::Atom: return {{"kind", "atom"}};
    case NodeKind::Diag: return {{"kind", "diag"}, {"k", obj.k}, {"child", to_json(obj.children.at(0))}};
    default: break;
  }
  nlohmann::json children = nlohmann::json::array();
  for (const auto& c : obj.children) children.push_back(to_json(c));
  return {{"kind", std::string(to_string(obj.kind))}, {"children", std::move(children)}};
}

namespace {

NodeKind container_kind(const std::string& kind) {
  if (kind == "tuple") return NodeKind::Tuple;
  if (kind == "mset") return NodeKind::MSet;
  if (kind == "cyc") return NodeKind::Cyc;
  throw std::invalid_argument("unknown object kind '" + kind + "'");
}

}  // namespace

ColoredObject colored_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "atom") return ColoredObject::atom(j.at("color").get<unsigned>());
  ColoredObject out{container_kind(kind), 0, {}};
  for (const auto& c : j.at("children")) out.children.push_back(colored_from_json(c));
  return out;
}

ProfiledObject profiled_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "atom") return ProfiledObject::atom();
  if (kind == "diag") return ProfiledObject::diag(j.at("k").get<std::uint64_t>(), profiled_from_json(j.at("child")));
  ProfiledObject out{container_kind(kind), 1, {}};
  for (const auto& c : j.at("children")) out.children.push_back(profiled_from_json(c));
  return out;
}

}  // namespace chroma_boltz
