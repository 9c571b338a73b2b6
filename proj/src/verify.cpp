#include "rdv/verify.hpp"

#include <algorithm>
#include <random>

#include "rdv/agent_runtime.hpp"
#include "rdv/ruling_set.hpp"

namespace rdv {

namespace {

VerifyReport failed(std::size_t cases, const std::string& why) {
  VerifyReport r;
  r.ok = false;
  r.cases = cases;
  r.detail = why;
  return r;
}

KnownLine explore(const World& w, Coord home, Coord radius) {
  KnownLine k;
  k.reset(w.label(home), w.degree(home));
  for (Coord f = 1; f <= radius; ++f) {
    k.visit(f, w.label(home + f), w.degree(home + f));
    k.visit(-f, w.label(home - f), w.degree(home - f));
  }
  return k;
}

LabelScheme mixed_scheme(std::mt19937_64& rng, int i) {
  if (i % 2) return LabelScheme::random_injective(rng(), 1000000000);
  return LabelScheme::uniform_class(rng(), 1 + static_cast<int>(rng() % 6));
}

}  // namespace

VerifyReport verify_carefulwalk() {
  VerifyReport rep;
  for (bool a_low : {true, false})
    for (std::uint64_t port_seed = 0; port_seed < 4; ++port_seed) {
      const Label la = a_low ? 2 : 9, lb = a_low ? 9 : 2;
      World w = World::path(2, LabelScheme::explicit_map({{0, la}, {1, lb}}), port_seed);
      auto moves_from = [&](Coord u) {
        const Coord v = 1 - u;
        const int dir = v > u ? 1 : -1;
        return careful_walk_moves(w.port_toward(u, dir), w.port_toward(v, -dir), w.label(u), w.label(v));
      };
      const auto ma = moves_from(0), mb = moves_from(1);
      // b starts delta rounds after a
      for (int delta = -3; delta <= 3; ++delta) {
        Coord xa = 0, xb = 1;
        bool met = false;
        auto apply = [&](Coord& x, const std::array<Move, 4>& m, int k) {
          if (k < 0 || k >= 4 || m[static_cast<std::size_t>(k)].kind == Move::Stay) return;
          x = *w.step(x, w.port_direction(x, m[static_cast<std::size_t>(k)].port));
        };
        for (int t = std::min(0, delta); t < std::max(4, delta + 4) && !met; ++t) {
          apply(xa, ma, t);
          apply(xb, mb, t - delta);
          met = xa == xb;
        }
        ++rep.cases;
        if (!met)
          return failed(rep.cases, "no meeting at offset " + std::to_string(delta) +
                                       (a_low ? " (a starts low)" : " (a starts high)"));
      }
    }
  rep.detail = "7 offsets x 2 orientations x 4 port numberings";
  return rep;
}

VerifyReport verify_rulingset(int trials, std::uint64_t seed, std::size_t max_universe, Label max_label) {
  VerifyReport rep;
  std::mt19937_64 rng(seed);
  const Coord radii[] = {1, 2, 4, 8, 16};
  for (int i = 0; i < trials; ++i) {
    const Coord R = radii[i % 5];
    const std::size_t n = 1 + rng() % max_universe;
    auto s = LabelScheme::random_injective(rng(), max_label);
    std::vector<Member> U;
    Coord pos = static_cast<Coord>(rng() % 1000) - 500;
    const std::uint64_t spread = 1 + rng() % 4;
    for (std::size_t j = 0; j < n; ++j) {
      U.push_back({pos, s.label(static_cast<Coord>(j))});
      pos += 1 + static_cast<Coord>(rng() % spread) + (rng() % 50 == 0 ? 40 : 0);
    }
    PrsOptions opt;
    opt.check_stages = true;
    std::vector<Coord> uu, ss;
    try {
      for (const auto& m : path_ruling_set(U, R, opt)) ss.push_back(m.pos);
    } catch (const std::exception& e) {
      return failed(rep.cases, "trial " + std::to_string(i) + " (R=" + std::to_string(R) + "): " + e.what());
    }
    for (const auto& m : U) uu.push_back(m.pos);
    auto rc = verify_limited_ruling_set(uu, ss, R, R - 1);
    ++rep.cases;
    if (!rc.ok) return failed(rep.cases, "trial " + std::to_string(i) + " (R=" + std::to_string(R) + "): " + rc.reason);
  }
  rep.detail = std::to_string(rep.cases) + " trials, per-stage packing and covering checked";
  return rep;
}

VerifyReport verify_escolruling(int trials, std::uint64_t seed, std::size_t max_universe) {
  VerifyReport rep;
  std::mt19937_64 rng(seed);
  const Coord radii[] = {1, 4, 16};
  for (int i = 0; i < trials; ++i) {
    const Coord R = radii[i % 3];
    LabelWindow w;
    w.lo = static_cast<Coord>(rng() % 100);
    const std::size_t n = 1 + rng() % max_universe;
    LabelScheme s = mixed_scheme(rng, i);
    for (std::size_t j = 0; j < n; ++j) w.labels.push_back(s.label(static_cast<Coord>(j)));
    w.lo_closed = w.hi_closed = true;
    try {
      auto out = es_col_path_ruling_set(w, R);
      auto chk = verify_es_output(w, R, out);
      ++rep.cases;
      if (!chk.ok) return failed(rep.cases, "trial " + std::to_string(i) + ": " + chk.reason);
    } catch (const std::exception& e) {
      return failed(rep.cases, "trial " + std::to_string(i) + ": " + e.what());
    }
  }
  rep.detail = std::to_string(rep.cases) + " trials, kappa = " + std::to_string(es_kappa());
  return rep;
}

VerifyReport verify_two_views(int trials, std::uint64_t seed, Coord radius) {
  VerifyReport rep;
  std::mt19937_64 rng(seed);
  std::size_t compared = 0;
  for (int i = 0; i < trials; ++i) {
    const Coord R = radius > 0 ? radius : (i % 2 ? 4 : 1);
    World w = World::infinite(i % 3 == 0 ? LabelScheme::uniform_class(rng(), 5)
                                         : LabelScheme::random_injective(rng(), 1000000000));
    const Coord D = 1 + static_cast<Coord>(rng() % 64);
    const Coord reach = termination_radius_for_class(6, R) + 50;
    const Coord La = reach + static_cast<Coord>(rng() % 1200), Lb = reach + static_cast<Coord>(rng() % 1200);
    auto ka = explore(w, 0, La), kb = explore(w, D, Lb);
    auto wa = ka.window(ka.lo(), ka.hi()), wb = kb.window(kb.lo(), kb.hi());
    wb.lo += D;  // b's frame to host coordinates
    auto oa = es_col_path_ruling_set(wa, R), ob = es_col_path_ruling_set(wb, R);
    for (Coord p = std::max(wa.lo, wb.lo); p <= std::min(wa.hi(), wb.hi()); ++p) {
      const auto& x = oa[static_cast<std::size_t>(p - wa.lo)];
      const auto& y = ob[static_cast<std::size_t>(p - wb.lo)];
      if (!x.certified || !y.certified) continue;
      ++compared;
      if (!x.same_output(y)) return failed(compared, "trial " + std::to_string(i) + ": outputs differ at " + std::to_string(p));
    }
    ++rep.cases;
  }
  if (compared == 0) return failed(0, "no node certified by both views");
  rep.detail = std::to_string(rep.cases) + " trials, " + std::to_string(compared) + " doubly certified nodes agree";
  return rep;
}

VerifyReport verify_locality(int trials, std::uint64_t seed, Coord R, std::size_t universe) {
  VerifyReport rep;
  std::mt19937_64 rng(seed);
  const Coord kappa = es_kappa();
  Coord worst = 0;
  for (int i = 0; i < trials; ++i) {
    LabelWindow w;
    w.lo = static_cast<Coord>(rng() % 1000) - 500;
    LabelScheme s = mixed_scheme(rng, i);
    for (std::size_t j = 0; j < universe; ++j) w.labels.push_back(s.label(static_cast<Coord>(j)));
    w.lo_closed = true;
    w.hi_closed = i % 2 == 0;
    auto out = es_col_path_ruling_set(w, R);
    auto chk = certify_es_locality(w, R, out);
    if (!chk.ok) return failed(rep.cases, "trial " + std::to_string(i) + ": " + chk.reason);
    for (const auto& o : out) {
      if (!o.certified) continue;
      ++rep.cases;
      worst = std::max(worst, (o.termination_radius + R * log_star(o.label) - 1) / (R * log_star(o.label)));
      if (o.termination_radius > kappa * R * log_star(o.label))
        return failed(rep.cases, "radius " + std::to_string(o.termination_radius) + " above kappa*R*log* at " +
                                     std::to_string(o.pos));
    }
  }
  rep.detail = std::to_string(rep.cases) + " certified outputs reproduced; max ceil(radius/(R log*)) = " +
               std::to_string(worst) + " <= kappa = " + std::to_string(kappa);
  return rep;
}

}  // namespace rdv
