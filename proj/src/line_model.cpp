#include "rdv/line_model.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace rdv {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int log_star(Label x) {
  if (x == 0) throw ModelError("log_star: argument must be positive");
  if (x <= 1) return 1;
  if (x <= 2) return 2;
  if (x <= 4) return 3;
  if (x <= 16) return 4;
  if (x <= 65536) return 5;
  return 6;  // 65536 < x < 2^64 <= 2^^5
}

Label class_min_label(int i) {
  static constexpr Label lo[] = {0, 1, 2, 3, 5, 17, 65537};
  if (i < 1 || i > 6) throw ModelError("label class out of range");
  return lo[i];
}

Label class_max_label(int i) {
  static constexpr Label hi[] = {0, 1, 2, 4, 16, 65536, kMaxLabel};
  if (i < 1 || i > 6) throw ModelError("label class out of range");
  return hi[i];
}

Label class_capacity(int i) { return class_max_label(i) - class_min_label(i) + 1; }

Label zigzag(Coord c) {
  if (c == 0) return 1;
  if (c < 0) return 2 * static_cast<Label>(-c);
  return 2 * static_cast<Label>(c) + 1;
}

Permutation::Permutation(std::uint64_t seed, std::uint64_t n) : seed_(seed), n_(n) {
  if (n == 0) throw ModelError("permutation over an empty domain");
  int bits = n <= 1 ? 2 : 64 - std::countl_zero(n - 1);
  bits = std::max(bits, 2);
  half_bits_ = (bits + 1) / 2;
}

std::uint64_t Permutation::operator()(std::uint64_t x) const {
  if (x >= n_) throw ModelError("permutation argument out of domain");
  if (n_ == 1) return 0;
  const std::uint64_t mask = (std::uint64_t{1} << half_bits_) - 1;
  do {
    std::uint64_t l = x >> half_bits_;
    std::uint64_t r = x & mask;
    for (int round = 0; round < 6; ++round) {
      std::uint64_t f = mix64(seed_ ^ mix64(r + 0x1000193ULL * (round + 1))) & mask;
      std::uint64_t nl = r;
      r = l ^ f;
      l = nl;
    }
    x = (l << half_bits_) | r;
  } while (x >= n_);
  return x;
}

LabelScheme LabelScheme::sequential() { return LabelScheme{}; }

LabelScheme LabelScheme::random_injective(std::uint64_t seed, Label max_label) {
  if (max_label < 1 || max_label > kMaxLabel) throw ModelError("random-injective: bad max label");
  LabelScheme s;
  s.kind_ = SchemeKind::RandomInjective;
  s.seed_ = seed;
  s.max_label_ = max_label;
  s.perms_.emplace_back(seed, max_label);
  return s;
}

LabelScheme LabelScheme::uniform_class(std::uint64_t seed, int class_index) {
  if (class_index < 1 || class_index > 6) throw ModelError("uniform-logstar-class: class must be in 1..6");
  LabelScheme s;
  s.kind_ = SchemeKind::UniformClass;
  s.seed_ = seed;
  s.class_index_ = class_index;
  for (int j = class_index; j <= 6; ++j) s.perms_.emplace_back(mix64(seed + 977 * j), class_capacity(j));
  return s;
}

LabelScheme LabelScheme::explicit_map(std::map<Coord, Label> labels) {
  LabelScheme s;
  s.kind_ = SchemeKind::Explicit;
  std::map<Label, Coord> seen;
  for (auto [c, l] : labels) {
    if (l < 1 || l > kMaxLabel) throw ModelError("explicit scheme: labels must be in [1, 2^63-1]");
    if (!seen.emplace(l, c).second) throw ModelError("explicit scheme: duplicate label " + std::to_string(l));
  }
  s.explicit_ = std::move(labels);
  return s;
}

Label LabelScheme::label(Coord c) const {
  switch (kind_) {
    case SchemeKind::Sequential:
      return zigzag(c);
    case SchemeKind::RandomInjective: {
      Label idx = zigzag(c) - 1;
      if (idx >= max_label_) throw ModelError("random-injective: coordinate outside the label space");
      return perms_[0](idx) + 1;
    }
    case SchemeKind::UniformClass: {
      Label idx = zigzag(c) - 1;
      for (int j = class_index_; j <= 6; ++j) {
        const auto& p = perms_[j - class_index_];
        if (idx < p.size()) return class_min_label(j) + p(idx);
        idx -= p.size();
      }
      throw ModelError("uniform-logstar-class: label space exhausted");
    }
    case SchemeKind::Explicit: {
      auto it = explicit_.find(c);
      if (it == explicit_.end()) throw ModelError("explicit scheme: no label for coordinate " + std::to_string(c));
      return it->second;
    }
  }
  return 0;
}

std::string LabelScheme::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case SchemeKind::Sequential: os << "sequential"; break;
    case SchemeKind::RandomInjective: os << "random(" << max_label_ << ")"; break;
    case SchemeKind::UniformClass: os << "class" << class_index_; break;
    case SchemeKind::Explicit: os << "explicit"; break;
  }
  return os.str();
}

World::World(Topology topology, std::int64_t n, LabelScheme labels, std::uint64_t port_seed)
    : topology_(topology), n_(n), labels_(std::move(labels)), port_seed_(port_seed) {
  if (topology_ == Topology::InfiniteLine) n_ = 0;
  if (topology_ == Topology::FinitePath && n_ < 1) throw ModelError("finite path needs n >= 1");
  if (topology_ == Topology::Cycle && n_ < 3) throw ModelError("cycle needs n >= 3");
}

World World::infinite(LabelScheme labels, std::uint64_t port_seed) {
  return World(Topology::InfiniteLine, 0, std::move(labels), port_seed);
}
World World::path(std::int64_t n, LabelScheme labels, std::uint64_t port_seed) {
  return World(Topology::FinitePath, n, std::move(labels), port_seed);
}
World World::cycle(std::int64_t n, LabelScheme labels, std::uint64_t port_seed) {
  return World(Topology::Cycle, n, std::move(labels), port_seed);
}

bool World::valid(Coord c) const {
  if (topology_ == Topology::InfiniteLine) return true;
  return c >= 0 && c < n_;
}

void World::check(Coord c) const {
  if (!valid(c)) throw ModelError("position " + std::to_string(c) + " is not a node of " + describe());
}

Coord World::normalize(Coord c) const {
  if (topology_ != Topology::Cycle) return c;
  Coord m = c % n_;
  return m < 0 ? m + n_ : m;
}

Label World::label(Position p) const {
  check(p.coordinate);
  return labels_.label(p.coordinate);
}

int World::degree(Coord c) const {
  check(c);
  if (topology_ != Topology::FinitePath) return 2;
  if (n_ == 1) return 0;
  return (c == 0 || c == n_ - 1) ? 1 : 2;
}

int World::port_direction(Coord c, int port) const {
  int deg = degree(c);
  if (port < 0 || port >= deg) throw ModelError("node " + std::to_string(c) + " has no port " + std::to_string(port));
  if (deg == 1) return c == 0 ? +1 : -1;
  bool flip = mix64(port_seed_ ^ mix64(static_cast<std::uint64_t>(c))) & 1;
  int dir0 = flip ? -1 : +1;
  return port == 0 ? dir0 : -dir0;
}

int World::port_toward(Coord c, int direction) const {
  for (int p = 0; p < degree(c); ++p)
    if (port_direction(c, p) == direction) return p;
  return -1;
}

std::optional<Coord> World::step(Coord c, int direction) const {
  check(c);
  Coord next = c + direction;
  if (topology_ == Topology::Cycle) return normalize(next);
  if (!valid(next)) return std::nullopt;
  return next;
}

NeighborhoodSnapshot World::snapshot(Position center, Coord radius) const {
  if (radius < 0) throw ModelError("snapshot radius must be nonnegative");
  const Coord c = center.coordinate;
  check(c);
  NeighborhoodSnapshot snap;
  snap.center = center;
  snap.radius = radius;
  auto entry = [&](Coord offset, Coord node) {
    SnapshotEntry e;
    e.offset = offset;
    e.label = labels_.label(node);
    e.degree = degree(node);
    e.port_toward_center = offset == 0 ? -1 : port_toward(node, offset > 0 ? -1 : +1);
    snap.entries.push_back(e);
  };
  if (topology_ == Topology::Cycle && 2 * radius + 1 >= n_) {
    Coord lo = -((n_ - 1) / 2);
    for (Coord o = lo; o < lo + n_; ++o) entry(o, normalize(c + o));
    return snap;
  }
  for (Coord o = -radius; o <= radius; ++o) {
    Coord node = c + o;
    if (topology_ == Topology::Cycle) node = normalize(node);
    else if (!valid(node)) continue;
    entry(o, node);
  }
  return snap;
}

std::int64_t World::distance(Position a, Position b) const {
  check(a.coordinate);
  check(b.coordinate);
  std::int64_t d = a.coordinate - b.coordinate;
  if (d < 0) d = -d;
  if (topology_ == Topology::Cycle) d = std::min(d, n_ - d);
  return d;
}

std::string World::describe() const {
  std::ostringstream os;
  switch (topology_) {
    case Topology::InfiniteLine: os << "infinite-line"; break;
    case Topology::FinitePath: os << "path(" << n_ << ")"; break;
    case Topology::Cycle: os << "cycle(" << n_ << ")"; break;
  }
  os << " labels=" << labels_.describe();
  return os.str();
}

}  // namespace rdv
