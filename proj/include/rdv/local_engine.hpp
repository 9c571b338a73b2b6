#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rdv/line_model.hpp"

namespace rdv {

class LocalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Member {
  Coord pos = 0;
  Label label = 0;
};

// G^k[U] over a line-like host: members sorted by position, edges between
// members at host distance in [1, k].
struct PowerSubgraph {
  std::vector<Member> members;
  Coord power = 1;

  PowerSubgraph() = default;
  PowerSubgraph(std::vector<Member> m, Coord k);
  static PowerSubgraph from_world(const World& w, const std::vector<Coord>& positions, Coord k);

  std::size_t size() const { return members.size(); }
  Label max_label() const;
  // Members within host distance r of members[i], as a new subgraph.
  PowerSubgraph truncated(std::size_t i, Coord r) const;
  // Index of the member at pos, or -1.
  std::ptrdiff_t index_of(Coord pos) const;
};

struct ColorAssignment {
  std::vector<std::uint64_t> color;
  std::uint64_t palette = 0;
  // Local minima hold the sentinel color palette-1 during reduction.
  bool minima_reserved = false;

  std::uint64_t core_palette() const { return minima_reserved ? palette - 1 : palette; }
};

struct PathNeighbors {
  std::vector<std::ptrdiff_t> left, right;
};

// Throws LocalError when some member has more than 2 neighbors.
PathNeighbors path_neighbors(const PowerSubgraph& sub);

// Number of bit-trick rounds needed to bring a palette of p colors down to 6.
int cv_iterations(std::uint64_t palette);
std::uint64_t cv_next_palette(std::uint64_t palette);

// Rounds used by color_path_constant and mis for labels bounded by label_bound.
int color_rounds(Label label_bound);
int mis_rounds(Label label_bound);
// rounds <= kRoundsSlope * log*(max label) + kRoundsOffset
inline constexpr int kRoundsSlope = 1;
inline constexpr int kRoundsOffset = 4;

ColorAssignment label_coloring(const PowerSubgraph& sub, Label label_bound = 0);
ColorAssignment cv_reduce_round(const PowerSubgraph& sub, const ColorAssignment& colors);

struct PathColoring {
  ColorAssignment colors;
  int rounds = 0;
};

// label_bound = 0 uses the largest member label.
PathColoring color_path_constant(const PowerSubgraph& sub, Label label_bound = 0);

struct MisResult {
  std::vector<bool> in_set;
  int rounds = 0;
  std::vector<Coord> positions(const PowerSubgraph& sub) const;
};

MisResult mis(const PowerSubgraph& sub, Label label_bound = 0);

using ColorList = std::vector<std::uint64_t>;

// Greedy list coloring in increasing key order: each member takes the
// smallest color of its list unused by already colored neighbors.
ColorAssignment list_color_by_key(const PowerSubgraph& sub, const std::vector<ColorList>& lists,
                                  const std::vector<std::pair<std::uint64_t, Label>>& keys);

// Scales of the nested MIS used for anchors, from 1 up to q_top.
std::vector<Coord> anchor_scales(Coord q_top);
// Members pairwise more than q_top apart, every universe member within sum(scales).
std::vector<Coord> anchor_set(const std::vector<Member>& universe, Coord q_top, Label label_bound);
int anchor_radius_factor(Label label_bound);  // rounds per scale unit

// Distance from each member to its nearest anchor (anchors sorted), or -1 if none.
std::vector<std::int64_t> nearest_anchor_distance(const std::vector<Member>& members,
                                                  const std::vector<Coord>& anchors);

struct ListColoring {
  ColorAssignment colors;
  Coord radius = 0;  // declared locality radius
};

// Degree <= 16 list coloring; anchors at scale 2k order the greedy.
ListColoring list_color(const PowerSubgraph& sub, const std::vector<ColorList>& lists, Label label_bound = 0);
Coord list_color_radius(Coord k, Label label_bound);

struct LocalityCertificate {
  std::vector<Coord> radius;
  Coord max_radius() const;
};

class CertificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// For each member, the smallest r <= bound such that recomputing on the
// radius-r' truncation reproduces the output for every r' in [r, bound].
template <class T>
LocalityCertificate certify_locality(const PowerSubgraph& sub, const std::vector<T>& outputs,
                                     const std::function<T(const PowerSubgraph&, std::size_t)>& recompute,
                                     Coord bound) {
  LocalityCertificate cert;
  cert.radius.resize(sub.size());
  for (std::size_t i = 0; i < sub.size(); ++i) {
    Coord r = bound;
    for (;;) {
      PowerSubgraph t = sub.truncated(i, r);
      std::size_t j = static_cast<std::size_t>(t.index_of(sub.members[i].pos));
      if (!(recompute(t, j) == outputs[i])) {
        if (r == bound)
          throw CertificationFailure("member at " + std::to_string(sub.members[i].pos) +
                                     " is not reproduced within radius " + std::to_string(bound));
        ++r;
        break;
      }
      if (r == 0) break;
      --r;
    }
    cert.radius[i] = r;
  }
  return cert;
}

}  // namespace rdv
