#include "rdv/agent_runtime.hpp"

#include <algorithm>
#include <cstdlib>

namespace rdv {

std::array<Move, 4> careful_walk_moves(int port_at_u, int entry_port_at_v, Label lu, Label lv) {
  if (lu == lv) throw ProgramError("careful walk over an edge with equal endpoint labels");
  if (lv > lu) return {Move::stay(), Move::take(port_at_u), Move::stay(), Move::stay()};
  return {Move::stay(), Move::take(port_at_u), Move::take(entry_port_at_v), Move::take(port_at_u)};
}

std::string careful_walk_occupancy(Label lu, Label lv) {
  if (lu == lv) throw ProgramError("careful walk over an edge with equal endpoint labels");
  const char u = lu < lv ? '0' : '1';
  const char v = lu < lv ? '1' : '0';
  std::string s{u, u, v, v, v};
  if (lv < lu) s[3] = u;
  return s;
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Asleep: return "asleep";
    case Phase::Discovery: return "discovery";
    case Phase::Searching: return "searching";
    case Phase::Waiting: return "wait";
    case Phase::FinitePath: return "finite-path";
    case Phase::FiniteCycle: return "finite-cycle";
  }
  return "?";
}

std::vector<Action> z_walk(std::int64_t L, int first_dir) {
  if (L < 1) throw ProgramError("ZWalk needs L >= 1");
  if (first_dir != 1 && first_dir != -1) throw ProgramError("ZWalk direction must be +1 or -1");
  Action a;
  a.kind = Action::Walk;
  std::vector<Action> out(3, a);
  out[0].dir = first_dir;
  out[0].count = L;
  out[1].dir = -first_dir;
  out[1].count = 2 * L;
  out[2].dir = first_dir;
  out[2].count = L;
  return out;
}

std::vector<Coord> expand_positions(const std::vector<Action>& acts, Coord from) {
  std::vector<Coord> p{from};
  for (const auto& a : acts)
    for (std::int64_t i = 0; i < a.count; ++i) p.push_back(p.back() + (a.kind == Action::Walk ? a.dir : 0));
  return p;
}

std::int64_t duration(const std::vector<Action>& acts) {
  std::int64_t t = 0;
  for (const auto& a : acts) t += a.count;
  return t;
}

std::array<int, 5> color_bits(int color) {
  if (color < 1 || color > kPalette) throw ProgramError("color outside [1,17]");
  std::array<int, 5> b{};
  for (int i = 0; i < 5; ++i) b[static_cast<std::size_t>(i)] = ((color - 1) >> (4 - i)) & 1;
  return b;
}

std::vector<Action> searching_walk(Coord R, std::int64_t L, Coord r, int color, int first_dir) {
  if (R < 1) throw ProgramError("SearchingWalk needs R >= 1");
  if (L < 16 * R) throw ProgramError("SearchingWalk needs L >= 16R");
  const Coord dist = std::llabs(r);
  if (dist > 2 * R - 1) throw ProgramError("SearchingWalk: r farther than 2R-1 from the start");
  std::vector<Action> out;
  auto stay = [&](std::int64_t k) {
    Action a;
    a.kind = Action::Stay;
    a.count = k;
    if (k > 0) out.push_back(a);
  };
  auto walk = [&](int dir, std::int64_t k) {
    Action a;
    a.kind = Action::Walk;
    a.dir = dir;
    a.count = k;
    if (k > 0) out.push_back(a);
  };
  auto zw = [&] {
    for (const auto& a : z_walk(8 * R, first_dir)) out.push_back(a);
  };
  const int to_r = r >= 0 ? 1 : -1;
  walk(to_r, dist);
  stay(L - dist);
  zw();
  for (int bit : color_bits(color)) {
    if (bit) {
      zw();
      zw();
    } else {
      stay(64 * R);
    }
  }
  stay(11 * (2 * L - 32 * R));
  stay(L - dist);
  walk(-to_r, dist);
  return out;
}

// ---- KnownLine ----

void KnownLine::reset(Label start_label, int start_degree) {
  lo_ = 0;
  labels_.assign(1, start_label);
  degrees_.assign(1, start_degree);
  where_.clear();
  where_[start_label] = 0;
  cycle_.reset();
}

KnownLine::Event KnownLine::visit(Coord f, Label label, int degree) {
  if (known(f)) {
    if (this->label(f) != label) throw ProgramError("label changed at a visited node");
    return degree == 1 ? Event::Endpoint : Event::None;
  }
  if (f != lo() - 1 && f != hi() + 1) throw ProgramError("visit is not adjacent to the known interval");
  auto it = where_.find(label);
  if (it != where_.end()) {
    cycle_ = std::llabs(f - it->second);
    return Event::Wrap;
  }
  where_[label] = f;
  if (f < lo_) {
    labels_.push_front(label);
    degrees_.push_front(degree);
    lo_ = f;
  } else {
    labels_.push_back(label);
    degrees_.push_back(degree);
  }
  return degree == 1 ? Event::Endpoint : Event::None;
}

Label KnownLine::label(Coord f) const {
  if (!known(f)) throw ProgramError("label of an unvisited node");
  return labels_[static_cast<std::size_t>(f - lo_)];
}

int KnownLine::degree(Coord f) const {
  if (!known(f)) throw ProgramError("degree of an unvisited node");
  return degrees_[static_cast<std::size_t>(f - lo_)];
}

LabelWindow KnownLine::window(Coord a, Coord b) const {
  a = std::max(a, lo());
  b = std::min(b, hi());
  LabelWindow w;
  w.lo = a;
  for (Coord f = a; f <= b; ++f) w.labels.push_back(label(f));
  w.lo_closed = a == lo() && degree(a) <= 1;
  w.hi_closed = b == hi() && degree(b) <= 1;
  return w;
}

// ---- decisions ----

std::optional<SearchDecision> DecisionCache::find(const std::array<std::uint64_t, 3>& key) {
  std::lock_guard<std::mutex> g(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void DecisionCache::put(const std::array<std::uint64_t, 3>& key, const SearchDecision& d) {
  std::lock_guard<std::mutex> g(mu_);
  map_.emplace(key, d);
}

std::size_t DecisionCache::size() {
  std::lock_guard<std::mutex> g(mu_);
  return map_.size();
}

namespace {

bool in_candidate_set(const KnownLine& k, std::int64_t L, Coord u, Coord R, const std::vector<ClassSchedule>& s) {
  const Coord T = s[static_cast<std::size_t>(log_star(k.label(u)) - 1)].terminate;
  return std::llabs(u) <= R && std::llabs(u) + T <= L;
}

}  // namespace

Coord best_ruling_distance(const KnownLine& k, std::int64_t L) {
  Coord best = 0;
  for (Coord R = 1; 16 * R <= L; R *= 4) {
    const auto s = es_schedule(R);
    for (Coord u = -R; u <= R; ++u)
      if (in_candidate_set(k, L, u, R, s)) {
        best = R;
        break;
      }
  }
  return best;
}

SearchDecision decide(const KnownLine& k, std::int64_t L, DecisionCache* cache) {
  if (!k.known(-L) || !k.known(L)) throw ProgramError("decision before the radius-L interval is known");
  std::array<std::uint64_t, 3> key{0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, static_cast<std::uint64_t>(L)};
  if (cache) {
    for (Coord f = -L; f <= L; ++f) {
      key[0] = mix64(key[0] ^ k.label(f));
      key[1] = mix64(key[1] + k.label(f) * 0x9e3779b97f4a7c15ULL);
    }
    if (auto hit = cache->find(key)) return *hit;
  }
  SearchDecision d;
  d.R = best_ruling_distance(k, L);
  if (d.R > 0) {
    const Coord R = d.R;
    const auto s = es_schedule(R);
    std::vector<Coord> cand;
    int top = 1;
    for (Coord u = -R; u <= R; ++u)
      if (in_candidate_set(k, L, u, R, s)) {
        cand.push_back(u);
        top = std::max(top, log_star(k.label(u)));
      }
    const Coord reach = R + s[static_cast<std::size_t>(top - 1)].terminate;
    const LabelWindow win = k.window(-std::min<Coord>(reach, L), std::min<Coord>(reach, L));
    const auto out = es_col_path_ruling_set(win, R, top);
    // Anchor on the smallest-label candidate, so two agents seeing it agree.
    Coord anchor = cand.front();
    for (Coord u : cand)
      if (k.label(u) < k.label(anchor)) anchor = u;
    for (Coord u : cand)
      if (!out[static_cast<std::size_t>(u - win.lo)].certified)
        throw ProgramError("candidate node not certified inside the known interval");
    bool found = false;
    for (const auto& m : out[static_cast<std::size_t>(anchor - win.lo)].nearby) {
      const Coord dm = std::llabs(m.pos - anchor), dr = std::llabs(d.r - anchor);
      if (!found || dm < dr || (dm == dr && k.label(m.pos) < k.label(d.r))) {
        d.r = m.pos;
        d.color = m.color;
        found = true;
      }
    }
    if (!found) throw ProgramError("no ruling set member near the candidate nodes");
  }
  if (cache) cache->put(key, d);
  return d;
}

// ---- program ----

std::string ProgramSpec::name() const {
  std::string n = care ? "care(rendezvous)" : "rendezvous";
  if (finite_aware) n += "+finite";
  return n;
}

RendezvousProgram::RendezvousProgram(ProgramSpec spec, DecisionCache* cache) : spec_(spec), cache_(cache) {}

void RendezvousProgram::plan_iteration_start(const KnownLine& k) {
  int first = +1;
  if (L_ > 1) first = k.label(1) > k.label(-1) ? +1 : -1;
  Annotation note;
  note.phase = Phase::Discovery;
  note.L = L_;
  note.iteration_start = clock_;
  for (auto a : z_walk(L_, first)) {
    a.note = note;
    plan_.push_back(a);
  }
  search_next_ = true;
}

void RendezvousProgram::plan_search(const KnownLine& k) {
  const SearchDecision d = decide(k, L_, cache_);
  Annotation note;
  note.L = L_;
  note.iteration_start = clock_ - 4 * L_;
  std::vector<Action> acts;
  if (d.R > 0) {
    note.phase = Phase::Searching;
    note.R = d.R;
    note.r = d.r;
    note.color = d.color;
    const int first = k.label(d.r + 1) > k.label(d.r - 1) ? +1 : -1;
    acts = searching_walk(d.R, L_, d.r, d.color, first);
  } else {
    note.phase = Phase::Waiting;
    Action a;
    a.kind = Action::Stay;
    a.count = 24 * L_;
    acts.push_back(a);
  }
  for (auto& a : acts) {
    a.note = note;
    plan_.push_back(a);
  }
  search_next_ = false;
  L_ *= 2;
}

void RendezvousProgram::plan_finite(const KnownLine& k, Coord pos) {
  Annotation note;
  if (auto n = k.cycle_length()) {
    note.phase = Phase::FiniteCycle;
    Coord m = k.lo();
    for (Coord f = k.lo(); f <= k.hi(); ++f)
      if (k.label(f) < k.label(m)) m = f;
    // nearest copy of m on the unrolled cycle
    Coord t = m + ((pos - m) / *n) * *n;
    Coord best = t;
    for (Coord c : {t - *n, t, t + *n})
      if (std::llabs(c - pos) < std::llabs(best - pos)) best = c;
    if (best != pos) {
      Action w;
      w.kind = Action::Walk;
      w.dir = best > pos ? 1 : -1;
      w.count = std::llabs(best - pos);
      w.note = note;
      plan_.push_back(w);
    }
    Action s;
    s.kind = Action::Stay;
    s.count = kForever;
    s.note = note;
    plan_.push_back(s);
    return;
  }
  note.phase = Phase::FinitePath;
  if (k.degree(pos) == 0) {
    Action s;
    s.kind = Action::Stay;
    s.count = kForever;
    s.note = note;
    plan_.push_back(s);
    return;
  }
  Action w;
  w.kind = Action::Walk;
  w.dir = (k.lo() == k.hi() || pos == k.lo()) ? +1 : -1;
  w.count = kForever;
  w.note = note;
  plan_.push_back(w);
}

Action RendezvousProgram::next(const KnownLine& k, Coord pos) {
  if (spec_.finite_aware && !finite_ && (k.cycle_length() || k.degree(pos) <= 1)) {
    finite_ = true;
    plan_.clear();
  }
  if (plan_.empty()) {
    if (finite_) plan_finite(k, pos);
    else if (search_next_) plan_search(k);
    else plan_iteration_start(k);
  }
  Action a = plan_.front();
  plan_.pop_front();
  clock_ += a.count;
  return a;
}

}  // namespace rdv
