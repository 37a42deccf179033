#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace chroma_boltz {

enum class NodeKind { Atom, Tuple, MSet, Cyc, Diag };

std::string_view to_string(NodeKind kind);

/// Object tree whose symmetries are kept as unexpanded Diag(k) nodes.
///
/// Diag(k, c) stands for k identical copies of c whose corresponding atoms
/// form one partition part. Under an MSet or Tuple parent the copies are
/// spliced in as siblings. Under a Cyc parent the child is always a Tuple
/// (the concatenation M of the cycle sampler) and its elements are repeated
/// k times in order, giving the cycle M M ... M.
struct ProfiledObject {
  NodeKind kind = NodeKind::Atom;
  std::uint64_t k = 1;
  std::vector<ProfiledObject> children;

  static ProfiledObject atom() { return {}; }
  static ProfiledObject tuple(std::vector<ProfiledObject> children) { return {NodeKind::Tuple, 1, std::move(children)}; }
  static ProfiledObject mset(std::vector<ProfiledObject> children) { return {NodeKind::MSet, 1, std::move(children)}; }
  static ProfiledObject cyc(std::vector<ProfiledObject> children) { return {NodeKind::Cyc, 1, std::move(children)}; }
  static ProfiledObject diag(std::uint64_t k, ProfiledObject child);

  friend bool operator==(const ProfiledObject&, const ProfiledObject&) = default;
};

// Part cardinal i -> number n_i of parts of that cardinal.
using Profile = std::map<std::uint64_t, std::size_t>;

std::size_t weighted_degree(const Profile& p);
std::size_t part_count(const Profile& p);

std::size_t size(const ProfiledObject& obj);
Profile profile(const ProfiledObject& obj);

/// Object without diagonals whose atoms carry colors (or part ids, see
/// ExpandedObject). Never holds NodeKind::Diag.
struct ColoredObject {
  NodeKind kind = NodeKind::Atom;
  unsigned color = 0;
  std::vector<ColoredObject> children;

  static ColoredObject atom(unsigned color) { return {NodeKind::Atom, color, {}}; }
  static ColoredObject tuple(std::vector<ColoredObject> c) { return {NodeKind::Tuple, 0, std::move(c)}; }
  static ColoredObject mset(std::vector<ColoredObject> c) { return {NodeKind::MSet, 0, std::move(c)}; }
  static ColoredObject cyc(std::vector<ColoredObject> c) { return {NodeKind::Cyc, 0, std::move(c)}; }

  friend bool operator==(const ColoredObject&, const ColoredObject&) = default;
};

std::size_t size(const ColoredObject& obj);

// Total order used for canonical forms: size, node tag, color, then children lexicographically.
int compare(const ColoredObject& a, const ColoredObject& b);

// Canonical representative: MSet children sorted, Cyc children at their
// lexicographically minimal rotation, applied bottom-up.
ColoredObject canonicalize(const ColoredObject& obj);

/// Expanded shape plus the set-partition of its atoms. Atoms of `shape`
/// hold their 0-based part id in `color`; `parts` lists 1-based atom
/// positions in depth-first order.
struct ExpandedObject {
  ColoredObject shape;
  std::vector<std::vector<std::size_t>> parts;
};

ExpandedObject expand(const ProfiledObject& obj);

// Concatenation of k copies of a profiled object with an arbitrary
// partition, wrapped in a Tuple; part j of the result unions part j of every copy.
ExpandedObject diagonal(const ExpandedObject& obj, std::size_t k);

// Cardinal counts of a partition.
Profile partition_profile(const std::vector<std::vector<std::size_t>>& parts);

// Replaces each part id by part_colors[id].
ColoredObject apply_colors(const ExpandedObject& expanded, std::span<const unsigned> part_colors);

// Text forms: `#c` colored atoms, `Z` uncolored atoms, `(..)` tuples and
// sequences, `{..}` multisets, `[..]` cycles, `<k:..>` diagonals.
std::string encode(const ColoredObject& obj);
std::string encode(const ProfiledObject& obj);

nlohmann::json to_json(const ColoredObject& obj);
nlohmann::json to_json(const ProfiledObject& obj);
ColoredObject colored_from_json(const nlohmann::json& j);
ProfiledObject profiled_from_json(const nlohmann::json& j);

}  // namespace chroma_boltz
