#include "rdv/local_engine.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

namespace rdv {

namespace {

int bit_width_of(std::uint64_t core) {
  if (core <= 2) return 1;
  return 64 - std::countl_zero(core - 1);
}

void check_proper(const PowerSubgraph& sub, const PathNeighbors& nb, const std::vector<std::uint64_t>& c) {
  for (std::size_t i = 0; i < sub.size(); ++i)
    if (nb.right[i] >= 0 && c[i] == c[static_cast<std::size_t>(nb.right[i])])
      throw LocalError("improper coloring between members at " + std::to_string(sub.members[i].pos) + " and " +
                       std::to_string(sub.members[static_cast<std::size_t>(nb.right[i])].pos));
}

}  // namespace

PowerSubgraph::PowerSubgraph(std::vector<Member> m, Coord k) : members(std::move(m)), power(k) {
  if (power < 1) throw LocalError("power must be >= 1");
  std::sort(members.begin(), members.end(), [](const Member& a, const Member& b) { return a.pos < b.pos; });
  for (std::size_t i = 1; i < members.size(); ++i)
    if (members[i].pos == members[i - 1].pos) throw LocalError("duplicate member position");
  std::vector<Label> ls;
  ls.reserve(members.size());
  for (const auto& x : members) ls.push_back(x.label);
  std::sort(ls.begin(), ls.end());
  if (std::adjacent_find(ls.begin(), ls.end()) != ls.end()) throw LocalError("duplicate label among members");
}

PowerSubgraph PowerSubgraph::from_world(const World& w, const std::vector<Coord>& positions, Coord k) {
  if (w.topology() == Topology::Cycle) throw LocalError("power subgraphs are realized over lines and paths");
  std::vector<Member> m;
  m.reserve(positions.size());
  for (Coord p : positions) m.push_back({p, w.label(p)});
  return PowerSubgraph(std::move(m), k);
}

Label PowerSubgraph::max_label() const {
  Label mx = 1;
  for (const auto& m : members) mx = std::max(mx, m.label);
  return mx;
}

PowerSubgraph PowerSubgraph::truncated(std::size_t i, Coord r) const {
  PowerSubgraph t;
  t.power = power;
  const Coord c = members[i].pos;
  auto lo = std::lower_bound(members.begin(), members.end(), c - r,
                             [](const Member& m, Coord p) { return m.pos < p; });
  auto hi = std::upper_bound(members.begin(), members.end(), c + r,
                             [](Coord p, const Member& m) { return p < m.pos; });
  t.members.assign(lo, hi);
  return t;
}

std::ptrdiff_t PowerSubgraph::index_of(Coord pos) const {
  auto it = std::lower_bound(members.begin(), members.end(), pos,
                             [](const Member& m, Coord p) { return m.pos < p; });
  if (it == members.end() || it->pos != pos) return -1;
  return it - members.begin();
}

PathNeighbors path_neighbors(const PowerSubgraph& sub) {
  const auto n = sub.size();
  PathNeighbors nb;
  nb.left.assign(n, -1);
  nb.right.assign(n, -1);
  const Coord k = sub.power;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (sub.members[i + 1].pos - sub.members[i].pos <= k) {
      nb.right[i] = static_cast<std::ptrdiff_t>(i + 1);
      nb.left[i + 1] = static_cast<std::ptrdiff_t>(i);
    }
    if (i + 2 < n && sub.members[i + 2].pos - sub.members[i].pos <= k)
      throw LocalError("power subgraph has a member of degree > 2 near position " +
                       std::to_string(sub.members[i + 1].pos));
  }
  return nb;
}

std::uint64_t cv_next_palette(std::uint64_t palette) {
  if (palette <= 6) return palette;
  return 2 * static_cast<std::uint64_t>(bit_width_of(palette));
}

int cv_iterations(std::uint64_t palette) {
  int it = 0;
  while (palette > 6) {
    palette = cv_next_palette(palette);
    ++it;
  }
  return it;
}

int color_rounds(Label label_bound) { return cv_iterations(label_bound + 1) + 4; }
int mis_rounds(Label label_bound) { return color_rounds(label_bound) + 3; }

ColorAssignment label_coloring(const PowerSubgraph& sub, Label label_bound) {
  ColorAssignment c;
  if (label_bound == 0) label_bound = sub.max_label();
  c.palette = label_bound + 1;
  c.color.reserve(sub.size());
  for (const auto& m : sub.members) {
    if (m.label > label_bound) throw LocalError("member label exceeds the declared bound");
    c.color.push_back(m.label);
  }
  return c;
}

ColorAssignment cv_reduce_round(const PowerSubgraph& sub, const ColorAssignment& colors) {
  const auto nb = path_neighbors(sub);
  check_proper(sub, nb, colors.color);
  if (colors.core_palette() <= 6) return colors;
  const int w = bit_width_of(colors.core_palette());
  const std::uint64_t sentinel = 2 * static_cast<std::uint64_t>(w);
  ColorAssignment out;
  out.palette = sentinel + 1;
  out.minima_reserved = true;
  out.color.resize(sub.size());
  for (std::size_t i = 0; i < sub.size(); ++i) {
    const Label li = sub.members[i].label;
    std::ptrdiff_t parent = -1;
    int parents = 0;
    for (auto j : {nb.left[i], nb.right[i]}) {
      if (j >= 0 && sub.members[static_cast<std::size_t>(j)].label > li) {
        parent = j;
        ++parents;
      }
    }
    const std::uint64_t cv = colors.color[i];
    if (parents == 2) {
      out.color[i] = sentinel;
    } else if (parents == 0) {
      out.color[i] = cv & 1;
    } else {
      const std::uint64_t x = cv ^ colors.color[static_cast<std::size_t>(parent)];
      const int b = std::countr_zero(x);
      out.color[i] = 2 * static_cast<std::uint64_t>(b) + ((cv >> b) & 1);
    }
  }
  return out;
}

PathColoring color_path_constant(const PowerSubgraph& sub, Label label_bound) {
  if (label_bound == 0) label_bound = sub.max_label();
  const auto nb = path_neighbors(sub);
  ColorAssignment c = label_coloring(sub, label_bound);
  const int iters = cv_iterations(c.palette);
  for (int t = 0; t < iters; ++t) c = cv_reduce_round(sub, c);
  const auto n = sub.size();
  auto smallest_free = [&](std::size_t i, const std::vector<std::uint64_t>& col) {
    std::uint64_t used = 0;
    for (auto j : {nb.left[i], nb.right[i]})
      if (j >= 0 && col[static_cast<std::size_t>(j)] < 6) used |= std::uint64_t{1} << col[static_cast<std::size_t>(j)];
    std::uint64_t f = 0;
    while (used >> f & 1) ++f;
    return f;
  };
  // Local minima leave the sentinel, then colors 5, 4, 3 move into {0, 1, 2}.
  std::vector<std::uint64_t> next = c.color;
  for (std::size_t i = 0; i < n; ++i) {
    bool minimum = true;
    int deg = 0;
    for (auto j : {nb.left[i], nb.right[i]}) {
      if (j < 0) continue;
      ++deg;
      if (sub.members[static_cast<std::size_t>(j)].label < sub.members[i].label) minimum = false;
    }
    if (deg == 2 && minimum) next[i] = smallest_free(i, c.color);
  }
  c.color = next;
  for (std::uint64_t target = 5; target >= 3; --target) {
    next = c.color;
    for (std::size_t i = 0; i < n; ++i)
      if (c.color[i] == target) next[i] = smallest_free(i, c.color);
    c.color = next;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (nb.left[i] < 0 && nb.right[i] < 0) c.color[i] = 0;
  c.palette = 3;
  c.minima_reserved = false;
  check_proper(sub, nb, c.color);
  return {c, iters + 4};
}

std::vector<Coord> MisResult::positions(const PowerSubgraph& sub) const {
  std::vector<Coord> out;
  for (std::size_t i = 0; i < sub.size(); ++i)
    if (in_set[i]) out.push_back(sub.members[i].pos);
  return out;
}

MisResult mis(const PowerSubgraph& sub, Label label_bound) {
  const auto nb = path_neighbors(sub);
  PathColoring pc = color_path_constant(sub, label_bound);
  MisResult r;
  r.in_set.assign(sub.size(), false);
  for (std::uint64_t cls = 0; cls < 3; ++cls) {
    std::vector<bool> next = r.in_set;
    for (std::size_t i = 0; i < sub.size(); ++i) {
      if (pc.colors.color[i] != cls) continue;
      bool blocked = false;
      for (auto j : {nb.left[i], nb.right[i]})
        if (j >= 0 && r.in_set[static_cast<std::size_t>(j)]) blocked = true;
      if (!blocked) next[i] = true;
    }
    r.in_set = next;
  }
  r.rounds = pc.rounds + 3;
  return r;
}

ColorAssignment list_color_by_key(const PowerSubgraph& sub, const std::vector<ColorList>& lists,
                                  const std::vector<std::pair<std::uint64_t, Label>>& keys) {
  const auto n = sub.size();
  if (lists.size() != n || keys.size() != n) throw LocalError("list_color: size mismatch");
  const Coord k = sub.power;
  std::vector<std::size_t> lo(n), hi(n);
  {
    std::size_t a = 0, b = 0;
    for (std::size_t i = 0; i < n; ++i) {
      while (sub.members[i].pos - sub.members[a].pos > k) ++a;
      if (b < i) b = i;
      while (b + 1 < n && sub.members[b + 1].pos - sub.members[i].pos <= k) ++b;
      lo[i] = a;
      hi[i] = b;
      if (lists[i].size() < hi[i] - lo[i] + 1)
        throw LocalError("list_color: list of member at " + std::to_string(sub.members[i].pos) +
                         " is smaller than its degree + 1");
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  constexpr std::uint64_t kNone = ~std::uint64_t{0};
  ColorAssignment out;
  out.color.assign(n, kNone);
  std::uint64_t top = 0;
  for (std::size_t i : order) {
    std::uint64_t pick = kNone;
    for (std::uint64_t c : lists[i]) {
      bool used = false;
      for (std::size_t j = lo[i]; j <= hi[i] && !used; ++j) used = j != i && out.color[j] == c;
      if (!used) {
        pick = c;
        break;
      }
    }
    if (pick == kNone) throw LocalError("list_color: list exhausted");
    out.color[i] = pick;
    top = std::max(top, pick);
  }
  out.palette = top + 1;
  return out;
}

std::vector<Coord> anchor_scales(Coord q_top) {
  std::vector<Coord> s;
  Coord q = q_top;
  while (q > 1) {
    s.push_back(q);
    q = q / 2;  // ceil((q-1)/2)
  }
  s.push_back(1);
  std::reverse(s.begin(), s.end());
  return s;
}

int anchor_radius_factor(Label label_bound) { return mis_rounds(label_bound) + 1; }

std::vector<Coord> anchor_set(const std::vector<Member>& universe, Coord q_top, Label label_bound) {
  std::vector<Member> cur = universe;
  for (Coord q : anchor_scales(q_top)) {
    PowerSubgraph h(cur, q);
    MisResult r = mis(h, label_bound);
    std::vector<Member> next;
    for (std::size_t i = 0; i < h.size(); ++i)
      if (r.in_set[i]) next.push_back(h.members[i]);
    cur = std::move(next);
  }
  std::vector<Coord> out;
  out.reserve(cur.size());
  for (const auto& m : cur) out.push_back(m.pos);
  return out;
}

std::vector<std::int64_t> nearest_anchor_distance(const std::vector<Member>& members,
                                                  const std::vector<Coord>& anchors) {
  std::vector<std::int64_t> d(members.size(), -1);
  for (std::size_t i = 0; i < members.size(); ++i) {
    auto it = std::lower_bound(anchors.begin(), anchors.end(), members[i].pos);
    std::int64_t best = -1;
    if (it != anchors.end()) best = *it - members[i].pos;
    if (it != anchors.begin()) {
      std::int64_t l = members[i].pos - *(it - 1);
      if (best < 0 || l < best) best = l;
    }
    d[i] = best;
  }
  return d;
}

Coord list_color_radius(Coord k, Label label_bound) {
  Coord sum = 0;
  for (Coord q : anchor_scales(2 * k)) sum += q;
  // anchors, keys of chain members, chain extent 2*sum + 3k/2, colors of neighbors
  return anchor_radius_factor(label_bound) * sum + sum + 2 * sum + (3 * k + 1) / 2 + k;
}

ListColoring list_color(const PowerSubgraph& sub, const std::vector<ColorList>& lists, Label label_bound) {
  if (label_bound == 0) label_bound = sub.max_label();
  const auto anchors = anchor_set(sub.members, 2 * sub.power, label_bound);
  const auto d = nearest_anchor_distance(sub.members, anchors);
  std::vector<std::pair<std::uint64_t, Label>> keys(sub.size());
  for (std::size_t i = 0; i < sub.size(); ++i) keys[i] = {static_cast<std::uint64_t>(d[i]), sub.members[i].label};
  ListColoring out;
  out.colors = list_color_by_key(sub, lists, keys);
  out.radius = list_color_radius(sub.power, label_bound);
  return out;
}

Coord LocalityCertificate::max_radius() const {
  Coord m = 0;
  for (Coord r : radius) m = std::max(m, r);
  return m;
}

}  // namespace rdv
