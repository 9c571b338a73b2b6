#include <doctest.h>

#include <set>

#include "rdv/line_model.hpp"

using namespace rdv;

TEST_CASE("log_star on the tetration ladder") {
  CHECK(log_star(1) == 1);
  CHECK(log_star(2) == 2);
  CHECK(log_star(3) == 3);
  CHECK(log_star(4) == 3);
  CHECK(log_star(5) == 4);
  CHECK(log_star(16) == 4);
  CHECK(log_star(17) == 5);
  CHECK(log_star(65536) == 5);
  CHECK(log_star(65537) == 6);
  CHECK(log_star(kMaxLabel) == 6);
}

TEST_CASE("class ranges tile the label space") {
  Label next = 1;
  for (int i = 1; i <= 6; ++i) {
    CHECK(class_min_label(i) == next);
    CHECK(log_star(class_min_label(i)) == i);
    CHECK(log_star(class_max_label(i)) == i);
    CHECK(class_capacity(i) == class_max_label(i) - class_min_label(i) + 1);
    next = class_max_label(i) + 1;
  }
  CHECK(class_max_label(6) == kMaxLabel);
}

TEST_CASE("sequential labels zigzag from the origin") {
  auto s = LabelScheme::sequential();
  CHECK(s.label(0) == 1);
  CHECK(s.label(-1) == 2);
  CHECK(s.label(1) == 3);
  CHECK(s.label(-2) == 4);
  std::set<Label> seen;
  for (Coord c = -500; c <= 500; ++c) CHECK(seen.insert(s.label(c)).second);
}

TEST_CASE("explicit labels") {
  auto s = LabelScheme::explicit_map({{0, 7}, {1, 3}});
  CHECK(s.label(1) == 3);
  CHECK(s.label(0) == 7);
  CHECK_THROWS_AS(s.label(2), ModelError);
  CHECK_THROWS_AS(LabelScheme::explicit_map({{0, 3}, {1, 3}}), ModelError);
  CHECK_THROWS_AS(LabelScheme::explicit_map({{0, 0}}), ModelError);
}

TEST_CASE("random injective labels are deterministic and injective") {
  auto a = LabelScheme::random_injective(42, 1000000000);
  auto b = LabelScheme::random_injective(42, 1000000000);
  std::set<Label> seen;
  for (Coord c = -2000; c <= 2000; ++c) {
    CHECK(a.label(c) == b.label(c));
    CHECK(a.label(c) >= 1);
    CHECK(a.label(c) <= 1000000000);
    seen.insert(a.label(c));
  }
  CHECK(seen.size() == 4001);
  auto small = LabelScheme::random_injective(3, 9);
  std::set<Label> all;
  for (Coord c = -4; c <= 4; ++c) all.insert(small.label(c));
  CHECK(all == std::set<Label>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK_THROWS_AS(small.label(5), ModelError);
}

TEST_CASE("feistel permutation is a bijection") {
  for (std::uint64_t n : {1u, 2u, 3u, 12u, 100u, 1000u}) {
    Permutation p(7, n);
    std::set<std::uint64_t> img;
    for (std::uint64_t x = 0; x < n; ++x) {
      auto y = p(x);
      CHECK(y < n);
      img.insert(y);
    }
    CHECK(img.size() == n);
  }
}

TEST_CASE("uniform class labels stay in their class until it is exhausted") {
  auto s4 = LabelScheme::uniform_class(5, 4);
  std::set<Label> seen;
  for (Coord c = -100; c <= 100; ++c) {
    Label l = s4.label(c);
    CHECK(seen.insert(l).second);
    if (zigzag(c) <= class_capacity(4)) CHECK(log_star(l) == 4);
    else CHECK(log_star(l) > 4);
  }
  auto s5 = LabelScheme::uniform_class(5, 5);
  for (Coord c = -1000; c <= 1000; ++c) CHECK(log_star(s5.label(c)) == 5);
  CHECK_THROWS_AS(LabelScheme::uniform_class(1, 7), ModelError);
}

TEST_CASE("snapshots") {
  auto w = World::infinite(LabelScheme::sequential());
  CHECK(w.snapshot(Position{0}, 0).entries.size() == 1);
  auto s = w.snapshot(Position{0}, 2);
  REQUIRE(s.entries.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(s.entries[i].offset == i - 2);
  CHECK(s.entries[2].port_toward_center == -1);
  auto p = World::path(3, LabelScheme::sequential());
  CHECK(p.snapshot(Position{0}, 5).entries.size() == 3);
  auto c = World::cycle(5, LabelScheme::sequential());
  CHECK(c.snapshot(Position{0}, 7).entries.size() == 5);
}

TEST_CASE("distances") {
  CHECK(World::infinite(LabelScheme::sequential()).distance(Position{3}, Position{-2}) == 5);
  CHECK(World::cycle(10, LabelScheme::sequential()).distance(Position{1}, Position{9}) == 2);
  CHECK(World::path(8, LabelScheme::sequential()).distance(Position{0}, Position{7}) == 7);
}

TEST_CASE("ports are a consistent local numbering") {
  for (auto w : {World::infinite(LabelScheme::sequential(), 11), World::path(6, LabelScheme::sequential(), 11),
                 World::cycle(7, LabelScheme::sequential(), 11)}) {
    const Coord lo = w.topology() == Topology::InfiniteLine ? -20 : 0;
    const Coord hi = w.topology() == Topology::InfiniteLine ? 20 : w.size() - 1;
    for (Coord c = lo; c <= hi; ++c) {
      const int deg = w.degree(c);
      std::set<int> dirs;
      for (int p = 0; p < deg; ++p) {
        int d = w.port_direction(c, p);
        dirs.insert(d);
        CHECK(w.port_toward(c, d) == p);
        auto n = w.step(c, d);
        REQUIRE(n);
        CHECK(w.step(*n, -d) == w.normalize(c));
      }
      CHECK(dirs.size() == static_cast<std::size_t>(deg));
      CHECK_THROWS(w.port_direction(c, deg));
    }
  }
  auto p = World::path(4, LabelScheme::sequential());
  CHECK(p.degree(0) == 1);
  CHECK(p.degree(3) == 1);
  CHECK_FALSE(p.step(0, -1));
  CHECK(World::path(1, LabelScheme::sequential()).degree(0) == 0);
}

TEST_CASE("labels outside the scheme and tiny cycles are rejected") {
  CHECK_THROWS_AS(World::path(12, LabelScheme::random_injective(1, 5)).label(Position{11}), ModelError);
  CHECK_THROWS_AS(World::cycle(2, LabelScheme::sequential()), ModelError);
}
