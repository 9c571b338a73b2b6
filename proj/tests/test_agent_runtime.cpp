#include <doctest.h>

#include <bit>
#include <set>

#include "rdv/agent_runtime.hpp"
#include "rdv/sim_harness.hpp"

using namespace rdv;

namespace {

// Node ('0' low, '1' high) of an agent doing one careful crossing starting at
// round s, observed at round t.
char careful_position(const std::string& occ, std::int64_t s, std::int64_t t) {
  if (t <= s) return occ.front();
  if (t >= s + 4) return occ.back();
  return occ[static_cast<std::size_t>(t - s)];
}

}  // namespace

TEST_CASE("careful walk occupancy") {
  CHECK(careful_walk_occupancy(2, 9) == "00111");
  CHECK(careful_walk_occupancy(9, 2) == "11010");
  auto up = careful_walk_moves(0, 1, 2, 9);
  CHECK(up[0] == Move::stay());
  CHECK(up[1] == Move::take(0));
  CHECK(up[2] == Move::stay());
  CHECK(up[3] == Move::stay());
  auto down = careful_walk_moves(1, 0, 9, 2);
  CHECK(down[1] == Move::take(1));
  CHECK(down[2] == Move::take(0));
  CHECK(down[3] == Move::take(1));
  CHECK_THROWS_AS(careful_walk_occupancy(3, 3), ProgramError);
}

// Occupancy strings list 5 time steps; the fourth one (index 3) is the meeting.
TEST_CASE("simultaneous opposite careful crossings meet at the higher endpoint on the fourth time step") {
  const std::string a = careful_walk_occupancy(2, 9), b = careful_walk_occupancy(9, 2);
  std::int64_t first = -1;
  for (std::int64_t t = 0; t <= 4 && first < 0; ++t)
    if (careful_position(a, 0, t) == careful_position(b, 0, t)) first = t;
  CHECK(first == 3);
  CHECK(careful_position(a, 0, 3) == '1');
}

TEST_CASE("opposite careful crossings meet for every overlapping offset") {
  for (bool a_up : {true, false}) {
    const std::string a = a_up ? careful_walk_occupancy(2, 9) : careful_walk_occupancy(9, 2);
    const std::string b = a_up ? careful_walk_occupancy(9, 2) : careful_walk_occupancy(2, 9);
    for (std::int64_t delta = -3; delta <= 3; ++delta) {
      bool met = false;
      for (std::int64_t t = std::min<std::int64_t>(0, delta); t <= 8; ++t)
        met = met || careful_position(a, 0, t) == careful_position(b, delta, t);
      CHECK_MESSAGE(met, "offset ", delta, " up ", a_up);
    }
  }
}

TEST_CASE("zwalk unfolding") {
  CHECK(expand_positions(z_walk(1, +1), 0) == std::vector<Coord>{0, 1, 0, -1, 0});
  CHECK(expand_positions(z_walk(2, +1), 0) == std::vector<Coord>{0, 1, 2, 1, 0, -1, -2, -1, 0});
  for (std::int64_t L = 1; L <= 64; ++L)
    for (int d : {+1, -1}) {
      auto p = expand_positions(z_walk(L, d), 0);
      CHECK(static_cast<std::int64_t>(p.size()) == 4 * L + 1);
      CHECK(p.back() == 0);
      std::set<Coord> seen(p.begin(), p.end());
      CHECK(static_cast<std::int64_t>(seen.size()) == 2 * L + 1);
      CHECK(*seen.begin() == -L);
      CHECK(*seen.rbegin() == L);
    }
  CHECK_THROWS_AS(z_walk(0, 1), ProgramError);
}

TEST_CASE("searching walk always lasts 24L") {
  CHECK(color_bits(1) == std::array<int, 5>{0, 0, 0, 0, 0});
  CHECK(color_bits(17) == std::array<int, 5>{1, 0, 0, 0, 0});
  CHECK_THROWS_AS(color_bits(18), ProgramError);
  for (std::int64_t L : {16, 32, 64, 256, 1024})
    for (Coord R = 1; 16 * R <= L; R *= 4)
      for (Coord r : {Coord{0}, R - 1, -(2 * R - 1), 2 * R - 1})
        for (int c = 1; c <= kPalette; ++c) {
          auto w = searching_walk(R, L, r, c);
          CHECK(duration(w) == 24 * L);
          CHECK(expand_positions(w, 0).back() == 0);
        }
  // c = 00000 at distance 0: wait L, one ZWalk(8R), five waits, long wait, wait L
  auto w = searching_walk(1, 16, 0, 1);
  REQUIRE(w.size() == 10);
  CHECK(w[0].kind == Action::Stay);
  CHECK(w[0].count == 16);
  for (int i = 4; i < 9; ++i) CHECK(w[static_cast<std::size_t>(i)].count == 64);
  // one ZWalk(8R) up front, two per set bit of c-1
  for (int c = 1; c <= kPalette; ++c) {
    std::int64_t zw = 0;
    for (const auto& a : searching_walk(1, 16, 0, c)) zw += a.kind == Action::Walk;
    CHECK(zw == 3 * (1 + 2 * std::popcount(static_cast<unsigned>(c - 1))));
  }
  CHECK_THROWS_AS(searching_walk(2, 16, 4, 1), ProgramError);
  CHECK_THROWS_AS(searching_walk(2, 31, 0, 1), ProgramError);
}

TEST_CASE("known line tracks visits, endpoints and wraps") {
  KnownLine k;
  k.reset(10, 2);
  CHECK(k.visit(1, 11, 2) == KnownLine::Event::None);
  CHECK(k.visit(-1, 12, 1) == KnownLine::Event::Endpoint);
  CHECK(k.lo() == -1);
  CHECK(k.hi() == 1);
  CHECK(k.label(-1) == 12);
  CHECK_THROWS_AS(k.visit(3, 13, 2), ProgramError);
  CHECK_THROWS_AS(k.visit(1, 99, 2), ProgramError);
  KnownLine c;
  c.reset(1, 2);
  c.visit(1, 2, 2);
  c.visit(2, 3, 2);
  CHECK(c.visit(3, 1, 2) == KnownLine::Event::Wrap);
  CHECK(c.cycle_length() == 3);
  CHECK(c.hi() == 2);
}

TEST_CASE("care expansion of single steps matches the careful walk") {
  for (bool up : {true, false}) {
    StepCursor cur(true);
    Action a;
    a.kind = Action::Walk;
    a.dir = +1;
    a.count = 1;
    cur.load(a);
    auto label = [&](Coord f) -> Label { return f == 0 ? 5 : (up ? 9 : 2); };
    Coord pos = 0;
    std::string occ;
    const char low = up ? '0' : '1', high = up ? '1' : '0';
    occ += pos == 0 ? low : high;
    while (!cur.finished()) {
      pos += cur.step(pos, label);
      occ += pos == 0 ? low : high;
    }
    CHECK(occ == careful_walk_occupancy(5, up ? 9 : 2));
  }
  StepCursor st(true);
  Action s;
  s.kind = Action::Stay;
  s.count = 3;
  st.load(s);
  int rounds = 0;
  while (!st.finished()) {
    CHECK(st.step(0, [](Coord) { return Label{1}; }) == 0);
    ++rounds;
  }
  CHECK(rounds == 12);
}

TEST_CASE("decisions are a pure function of the known interval") {
  auto w = World::infinite(LabelScheme::sequential());
  KnownLine k;
  k.reset(w.label(Coord{0}), 2);
  const std::int64_t L = 256;
  for (Coord f = 1; f <= L; ++f) {
    k.visit(f, w.label(f), 2);
    k.visit(-f, w.label(-f), 2);
  }
  DecisionCache cache;
  auto a = decide(k, L), b = decide(k, L, &cache), c = decide(k, L, &cache);
  CHECK(a.R == b.R);
  CHECK(a.r == b.r);
  CHECK(a.color == c.color);
  CHECK(cache.size() == 1);
  CHECK(a.R == best_ruling_distance(k, L));
  CHECK(a.R == 4);
  CHECK(std::llabs(a.r) <= 2 * a.R - 1);
  CHECK(a.color >= 1);
  CHECK(a.color <= kPalette);
  CHECK_THROWS_AS(decide(k, 512), ProgramError);
}

TEST_CASE("iteration starts of a lone agent") {
  SimConfig c;
  c.world = World::infinite(LabelScheme::random_injective(3, 1000000000), 5);
  c.single_agent = true;
  c.round_cap = 28 * 8 + 1;
  auto tr = run(c);
  std::vector<std::pair<std::int64_t, std::int64_t>> expect{{1, 0}, {2, 28}, {4, 84}, {8, 196}};
  CHECK(tr.a.iteration_starts == expect);
}

TEST_CASE("program names") {
  CHECK(ProgramSpec{}.name() == "rendezvous");
  CHECK(ProgramSpec{true, true}.name() == "care(rendezvous)+finite");
  CHECK(ProgramSpec{}.assumes_crossing_detection());
}
