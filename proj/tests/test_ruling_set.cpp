#include <doctest.h>

#include <random>

#include "rdv/ruling_set.hpp"

using namespace rdv;

namespace {

std::vector<Member> consecutive(Coord lo, std::size_t n, const LabelScheme& s) {
  std::vector<Member> u;
  for (std::size_t i = 0; i < n; ++i) u.push_back({lo + static_cast<Coord>(i), s.label(static_cast<Coord>(i))});
  return u;
}

std::vector<Coord> positions(const std::vector<Member>& m) {
  std::vector<Coord> p;
  for (const auto& x : m) p.push_back(x.pos);
  return p;
}

LabelWindow closed_window(Coord lo, std::size_t n, const LabelScheme& s) {
  LabelWindow w;
  w.lo = lo;
  for (std::size_t i = 0; i < n; ++i) w.labels.push_back(s.label(static_cast<Coord>(i)));
  w.lo_closed = w.hi_closed = true;
  return w;
}

}  // namespace

TEST_CASE("ruling set checker") {
  std::vector<Coord> U{0, 1, 2, 3, 4};
  CHECK(verify_limited_ruling_set(U, U, 1, 0).ok);
  auto empty = verify_limited_ruling_set(U, {}, 1, 0);
  CHECK_FALSE(empty.ok);
  CHECK(empty.node);
  auto close = verify_limited_ruling_set(U, {0, 3}, 4, 3);
  CHECK_FALSE(close.ok);
  REQUIRE(close.pair);
  CHECK(close.pair->first == 0);
  CHECK(close.pair->second == 3);
  CHECK_FALSE(verify_limited_ruling_set(U, {7}, 1, 10).ok);
}

TEST_CASE("R = 1 keeps the whole universe") {
  auto s = LabelScheme::random_injective(1, 1000);
  auto U = consecutive(0, 30, s);
  auto S = path_ruling_set(U, 1);
  CHECK(positions(S) == positions(U));
}

TEST_CASE("R = 4 on twelve consecutive nodes") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto U = consecutive(5, 12, LabelScheme::random_injective(seed, 1000000));
    PrsOptions opt;
    opt.check_stages = true;
    auto S = path_ruling_set(U, 4, opt);
    auto rc = verify_limited_ruling_set(positions(U), positions(S), 4, 3);
    CHECK_MESSAGE(rc.ok, rc.reason);
  }
}

TEST_CASE("R = 16 on two far clusters") {
  auto s = LabelScheme::random_injective(9, 1000000);
  std::vector<Member> U;
  for (Coord i = 0; i < 20; ++i) U.push_back({i, s.label(i)});
  for (Coord i = 0; i < 20; ++i) U.push_back({1020 + i, s.label(20 + i)});
  PrsOptions opt;
  opt.check_stages = true;
  auto S = path_ruling_set(U, 16, opt);
  auto rc = verify_limited_ruling_set(positions(U), positions(S), 16, 15);
  CHECK_MESSAGE(rc.ok, rc.reason);
  bool left = false, right = false;
  for (auto& m : S) (m.pos < 500 ? left : right) = true;
  CHECK(left);
  CHECK(right);
}

TEST_CASE("stage invariants of the scale cascade") {
  std::mt19937_64 rng(12);
  for (Coord R : {2, 8, 32}) {
    std::vector<Member> U;
    auto s = LabelScheme::random_injective(rng(), 1000000);
    Coord pos = 0;
    for (int i = 0; i < 300; ++i) {
      U.push_back({pos, s.label(i)});
      pos += 1 + static_cast<Coord>(rng() % 3);
    }
    std::vector<std::vector<Coord>> stages;
    PrsOptions opt;
    opt.check_stages = true;
    opt.stages = &stages;
    auto S = path_ruling_set(U, R, opt);
    const int d = prs_levels(R);
    REQUIRE(stages.size() == static_cast<std::size_t>(d + 2));
    for (int i = 0; i < d; ++i) {
      const Coord pack = Coord{1} << i, cover = (Coord{2} << i) - i - 2;
      auto rc = verify_limited_ruling_set(positions(U), stages[static_cast<std::size_t>(i)], pack, cover);
      CHECK_MESSAGE(rc.ok, "stage ", i, ": ", rc.reason);
    }
    CHECK(stages.back() == positions(S));
  }
}

TEST_CASE("scale cascade constants") {
  CHECK(prs_levels(1) == 0);
  CHECK(prs_levels(4) == 2);
  CHECK(prs_levels(5) == 3);
  CHECK(prs_scales(4).size() == 2);
}

TEST_CASE("greedy extension adds far nodes only") {
  std::vector<Member> U{{0, 5}, {1, 3}, {2, 8}, {10, 2}};
  std::vector<Member> S{{0, 5}};
  auto added = greedy_extend(U, S, 4);
  for (auto& m : added) {
    CHECK(m.pos >= 4);
  }
  CHECK(verify_limited_ruling_set(positions(U), positions(S), 4, 100).ok);
}

TEST_CASE("lone node colors itself") {
  LabelWindow w;
  w.lo = 0;
  w.labels = {1};
  w.lo_closed = w.hi_closed = true;
  auto out = es_col_path_ruling_set(w, 4);
  REQUIRE(out.size() == 1);
  CHECK(out[0].in_set);
  CHECK(out[0].color >= 1);
  CHECK(out[0].color <= kPalette);
  CHECK(out[0].certified);
  CHECK(out[0].termination_radius <= es_kappa() * 4 * 1);
  CHECK(verify_es_output(w, 4, out).ok);
}

TEST_CASE("prefix property and coloring on 64 consecutive nodes") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto w = closed_window(0, 64, LabelScheme::random_injective(seed, 1000000));
    auto out = es_col_path_ruling_set(w, 4);
    auto chk = verify_es_output(w, 4, out);
    CHECK_MESSAGE(chk.ok, chk.reason);
  }
}

TEST_CASE("mirror image gives the mirrored output") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto w = closed_window(0, 120, LabelScheme::uniform_class(seed, 4));
    LabelWindow m = w;
    std::reverse(m.labels.begin(), m.labels.end());
    for (Coord R : {1, 4}) {
      auto a = es_col_path_ruling_set(w, R), b = es_col_path_ruling_set(m, R);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& x = a[i];
        const auto& y = b[a.size() - 1 - i];
        CHECK(x.in_set == y.in_set);
        CHECK(x.color == y.color);
        CHECK(x.nearby.size() == y.nearby.size());
      }
    }
  }
}

TEST_CASE("overlapping windows agree where both certify") {
  auto world = World::infinite(LabelScheme::random_injective(77, 1000000000));
  auto big = LabelWindow::from_world(world, -1400, 1400);
  auto left = big.sub(-1400, 900), right = big.sub(-900, 1400);
  const Coord R = 1;
  auto ob = es_col_path_ruling_set(big, R), ol = es_col_path_ruling_set(left, R),
       orr = es_col_path_ruling_set(right, R);
  int both = 0;
  for (Coord p = -900; p <= 900; ++p) {
    const auto& a = ol[static_cast<std::size_t>(p - left.lo)];
    const auto& b = orr[static_cast<std::size_t>(p - right.lo)];
    const auto& c = ob[static_cast<std::size_t>(p - big.lo)];
    if (a.certified && b.certified) {
      ++both;
      CHECK(a.same_output(b));
      CHECK(a.same_output(c));
    }
  }
  CHECK(both > 0);
  auto chk = certify_es_locality(big, R, ob, 37);
  CHECK_MESSAGE(chk.ok, chk.reason);
}

TEST_CASE("termination schedule") {
  const Coord kappa = es_kappa();
  CHECK(kappa == 111);
  CHECK(termination_radius(1, 1) <= kappa);
  CHECK(termination_radius(1, 1) == termination_radius_for_class(1, 1));
  for (Label l : {Label{1}, Label{2}, Label{3}, Label{16}, Label{17}, Label{65536}, Label{1000000000}})
    for (Coord R = 1; R <= 1024; R *= 4) {
      CHECK(termination_radius(l, R) <= termination_radius(l, 4 * R));
      CHECK(termination_radius(l, R) <= kappa * R * log_star(l));
    }
  for (Coord R : {1, 4, 16, 64}) CHECK(termination_radius(65536, R) <= kappa * R * log_star(65536));
  auto s = es_schedule(1);
  CHECK(s.size() == 6);
  CHECK(s[0].terminate == 8);
  CHECK(s[5].terminate == 559);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].terminate >= s[i - 1].terminate);
  CHECK(schedule_formulas().find("T_i") != std::string::npos);
}

TEST_CASE("bad arguments") {
  CHECK_THROWS_AS(es_col_path_ruling_set(LabelWindow{}, 0), RulingError);
  CHECK_THROWS_AS(path_ruling_set(std::vector<Member>{{0, 1}}, 0), RulingError);
}
