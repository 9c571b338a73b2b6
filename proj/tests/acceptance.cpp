// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "rdv/agent_runtime.hpp"
#include "rdv/ruling_set.hpp"
#include "rdv/sim_harness.hpp"
#include "rdv/verify.hpp"

#ifndef RDV_GOLDEN_DIR
#define RDV_GOLDEN_DIR "tests/golden"
#endif

using namespace rdv;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

const std::uint64_t kSeed = 1;

double read_golden(const std::string& name) {
  std::ifstream in(std::string(RDV_GOLDEN_DIR) + "/" + name);
  double v = -1;
  if (!(in >> v)) return -1;
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

Outcome from(const VerifyReport& r) { return {r.ok, r.detail}; }

// The care run with delay tau is compared with the plain run with delay
// ceil(tau/4), the correspondence under which care stretches time by four.
Outcome care_factor() {
  Outcome o;
  std::mt19937_64 rng(kSeed);
  DecisionCache plain_cache, care_cache;
  int n = 0;
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t seed = rng();
    const Coord D = 1 + static_cast<Coord>(rng() % 32);
    const std::int64_t tau = static_cast<std::int64_t>(rng() % 65);
    const int kind = i % 3;
    LabelScheme s = kind == 0   ? LabelScheme::random_injective(seed, 1000000000)
                    : kind == 1 ? LabelScheme::uniform_class(seed, 4 + static_cast<int>(seed % 2))
                                : LabelScheme::sequential();
    SimConfig c;
    c.world = World::infinite(s, seed);
    c.start_a = static_cast<Coord>(rng() % 100);
    c.start_b = c.start_a + D;
    c.program.finite_aware = true;
    c.program.care = false;
    c.detection = Detection::NodeOrCrossing;
    c.tau = (tau + 3) / 4;
    c.cache = &plain_cache;
    auto plain = run(c);
    c.program.care = true;
    c.detection = Detection::NodeOnly;
    c.tau = tau;
    c.cache = &care_cache;
    auto care = run(c);
    ++n;
    if (!plain.event || !care.event || care.event->round > 4 * plain.event->round) {
      o.ok = false;
      o.detail = "instance " + std::to_string(i) + " D=" + std::to_string(D) + " tau=" + std::to_string(tau) +
                 ": care " + (care.event ? std::to_string(care.event->round) : "none") + ", plain " +
                 (plain.event ? std::to_string(plain.event->round) : "none");
      return o;
    }
    worst = std::max(worst, static_cast<double>(care.event->round) / std::max<std::int64_t>(plain.event->round, 1));
  }
  o.detail = std::to_string(n) + " instances, max T(care)/T(plain) = " + fmt(worst);
  return o;
}

Outcome phase_timing() {
  Outcome o;
  for (bool care : {false, true})
    for (int kind = 0; kind < 3; ++kind) {
      SimConfig c;
      c.world = World::infinite(kind == 0   ? LabelScheme::sequential()
                                : kind == 1 ? LabelScheme::random_injective(kSeed, 1000000000)
                                            : LabelScheme::uniform_class(kSeed, 4),
                                kSeed);
      c.single_agent = true;
      c.program.care = care;
      c.detection = care ? Detection::NodeOnly : Detection::NodeOrCrossing;
      const std::int64_t f = care ? 4 : 1;
      c.round_cap = f * 28 * 511 + 1;
      auto tr = run(c);
      std::int64_t L = 1;
      for (const auto& [l, t] : tr.a.iteration_starts) {
        if (l != L || t != f * 28 * (L - 1)) {
          o.ok = false;
          o.detail = "iteration L=" + std::to_string(l) + " starts at " + std::to_string(t);
          return o;
        }
        L *= 2;
      }
      if (L < 512) {
        o.ok = false;
        o.detail = "trace stopped before L=512";
        return o;
      }
      // searching phase of every iteration below 512
      for (std::int64_t l = 1; l < 512; l *= 2) {
        std::int64_t search = 0;
        for (const auto& s : tr.a.segments)
          if (s.note.L == l && (s.note.phase == Phase::Searching || s.note.phase == Phase::Waiting)) search += s.len;
        if (search != f * 24 * l) {
          o.ok = false;
          o.detail = "searching phase of L=" + std::to_string(l) + " lasts " + std::to_string(search);
          return o;
        }
      }
    }
  for (std::int64_t L = 16; L <= 256; L *= 2)
    for (Coord R = 1; 16 * R <= L; R *= 4)
      for (Coord r = -(2 * R - 1); r <= 2 * R - 1; ++r)
        for (int c = 1; c <= kPalette; ++c)
          if (duration(searching_walk(R, L, r, c)) != 24 * L) {
            o.ok = false;
            o.detail = "SearchingWalk duration off at L=" + std::to_string(L);
            return o;
          }
  o.detail = "iteration starts 28(L-1) and 4*28(L-1) for L <= 256; searching phases 24L";
  return o;
}

struct SweepSummary {
  double C = 0;
  std::map<CaseTag, int> hist;
  int missed = 0;
  std::string worst;
};

SweepSummary summarize(const std::vector<SweepRow>& rows) {
  SweepSummary s;
  for (const auto& r : rows) {
    if (!r.t_rdv) ++s.missed;
    ++s.hist[r.tag];
    if (r.ratio > s.C) {
      s.C = r.ratio;
      s.worst = r.csv();
    }
  }
  return s;
}

std::string fmt_hist(const SweepSummary& s) {
  std::string out;
  for (auto c : kAllCases) out += std::string(out.empty() ? "" : " ") + case_name(c) + "=" + std::to_string(s.hist.count(c) ? s.hist.at(c) : 0);
  return out;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name, const Outcome& o, double secs) {
    std::cout << (o.ok ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << o.detail << " ["
              << std::fixed << std::setprecision(2) << secs << "s]" << std::endl;
    if (!o.ok) ++failures;
  };
  auto timed = [&](int id, const std::string& name, auto&& f) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o = f();
    report(id, name, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };
  timed(1, "careful-walk meeting", [] { return from(verify_carefulwalk()); });
  timed(2, "care factor 4", care_factor);
  timed(3, "path ruling set", [] { return from(verify_rulingset(200, kSeed + 1, 512, 1000000)); });
  timed(4, "early-stopping colored ruling set", [] { return from(verify_escolruling(50, kSeed + 2, 256)); });
  timed(5, "locality agreement", [] { return from(verify_two_views(20, kSeed + 3)); });
  timed(6, "phase timing", phase_timing);

  auto t0 = std::chrono::steady_clock::now();
  SweepOptions opt;
  const auto cells = acceptance_grid(kSeed);
  auto first = summarize(sweep(cells, opt));
  auto again = summarize(sweep(cells, opt));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    Outcome o;
    const double golden = read_golden("sweep_C.txt");
    o.ok = first.missed == 0 && first.C == again.C && golden > 0 && first.C <= golden + 1e-6;
    o.detail = std::to_string(cells.size()) + " cells, missed=" + std::to_string(first.missed) + ", C = " +
               fmt(first.C) + " (rerun " + fmt(again.C) + ", golden " + fmt(golden) + "), worst " + first.worst;
    report(7, "rendezvous sweep", o, secs);
  }
  {
    Outcome o;
    for (auto c : {CaseTag::OutOfSync, CaseTag::MismatchedR, CaseTag::SameNode, CaseTag::DistinctNodesColored})
      if (!first.hist.count(c)) o.ok = false;
    o.detail = fmt_hist(first);
    report(8, "case coverage", o, 0);
  }
  {
    auto t1 = std::chrono::steady_clock::now();
    const auto fc = finite_grid(kSeed);
    auto fs = summarize(sweep(fc, opt));
    Outcome o;
    const double golden = read_golden("finite_C.txt");
    o.ok = fs.missed == 0 && golden > 0 && fs.C <= golden + 1e-6;
    o.detail = std::to_string(fc.size()) + " cells, missed=" + std::to_string(fs.missed) + ", C' = " + fmt(fs.C) +
               " (golden " + fmt(golden) + "), worst " + fs.worst;
    report(9, "finite graphs", o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count());
  }
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << failures << " of 9 criteria failed" << std::endl;
  return failures ? 1 : 0;
}
