#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdv {

using Coord = std::int64_t;
using Label = std::uint64_t;

constexpr Label kMaxLabel = (Label{1} << 63) - 1;

struct Position {
  Coord coordinate = 0;
  friend bool operator==(const Position&, const Position&) = default;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterated logarithm with log*(1) = 1, by exact comparison against 1, 2, 4, 16, 65536.
int log_star(Label x);

// Inclusive label range of class i (log* = i), for i in 1..6.
Label class_min_label(int i);
Label class_max_label(int i);
// Number of labels in class i (saturates for class 6).
Label class_capacity(int i);

// 0 -> 1, -k -> 2k, +k -> 2k+1.
Label zigzag(Coord c);

// Keyed permutation of [0, n) (Feistel network with cycle walking).
class Permutation {
 public:
  Permutation(std::uint64_t seed, std::uint64_t n);
  std::uint64_t operator()(std::uint64_t x) const;
  std::uint64_t size() const { return n_; }

 private:
  std::uint64_t seed_;
  std::uint64_t n_;
  int half_bits_;
};

enum class SchemeKind { Sequential, RandomInjective, UniformClass, Explicit };

class LabelScheme {
 public:
  static LabelScheme sequential();
  static LabelScheme random_injective(std::uint64_t seed, Label max_label);
  // Nodes nearest the origin get class-i labels; once the class is exhausted
  // further nodes spill into the next class.
  static LabelScheme uniform_class(std::uint64_t seed, int class_index);
  static LabelScheme explicit_map(std::map<Coord, Label> labels);

  Label label(Coord c) const;
  SchemeKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  Label max_label() const { return max_label_; }
  int class_index() const { return class_index_; }
  const std::map<Coord, Label>& explicit_labels() const { return explicit_; }
  std::string describe() const;

 private:
  SchemeKind kind_ = SchemeKind::Sequential;
  std::uint64_t seed_ = 0;
  Label max_label_ = kMaxLabel;
  int class_index_ = 0;
  std::map<Coord, Label> explicit_;
  std::vector<Permutation> perms_;
};

enum class Topology { InfiniteLine, FinitePath, Cycle };

struct SnapshotEntry {
  Coord offset = 0;
  Label label = 0;
  int degree = 0;
  int port_toward_center = -1;  // -1 at the center
};

struct NeighborhoodSnapshot {
  Position center;
  Coord radius = 0;
  std::vector<SnapshotEntry> entries;  // sorted by offset
};

class World {
 public:
  World(Topology topology, std::int64_t n, LabelScheme labels, std::uint64_t port_seed);
  static World infinite(LabelScheme labels, std::uint64_t port_seed = 0);
  static World path(std::int64_t n, LabelScheme labels, std::uint64_t port_seed = 0);
  static World cycle(std::int64_t n, LabelScheme labels, std::uint64_t port_seed = 0);

  Topology topology() const { return topology_; }
  std::int64_t size() const { return n_; }  // 0 for the infinite line
  const LabelScheme& scheme() const { return labels_; }
  std::uint64_t port_seed() const { return port_seed_; }

  bool valid(Coord c) const;
  Coord normalize(Coord c) const;  // reduce mod n on cycles
  Label label(Position p) const;
  Label label(Coord c) const { return label(Position{c}); }
  int degree(Coord c) const;
  // Canonical direction (+1 or -1) reached through port p at node c.
  int port_direction(Coord c, int port) const;
  int port_toward(Coord c, int direction) const;
  // Neighbor through a canonical direction, with wraparound on cycles.
  std::optional<Coord> step(Coord c, int direction) const;

  NeighborhoodSnapshot snapshot(Position center, Coord radius) const;
  std::int64_t distance(Position a, Position b) const;
  std::string describe() const;

 private:
  void check(Coord c) const;

  Topology topology_;
  std::int64_t n_;
  LabelScheme labels_;
  std::uint64_t port_seed_;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace rdv
