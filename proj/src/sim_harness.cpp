#include "rdv/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <deque>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace rdv {

const char* detection_name(Detection d) { return d == Detection::NodeOnly ? "node-only" : "node-or-crossing"; }

const char* case_name(CaseTag c) {
  switch (c) {
    case CaseTag::None: return "none";
    case CaseTag::OutOfSync: return "out-of-sync";
    case CaseTag::MismatchedR: return "mismatched-R";
    case CaseTag::SameNode: return "same-node";
    case CaseTag::DistinctNodesColored: return "distinct-nodes-colored";
    case CaseTag::DiscoveryCollision: return "discovery-collision";
    case CaseTag::Other: return "other";
  }
  return "?";
}

void validate(const SimConfig& c) {
  if (!c.world.valid(c.start_a) || !c.world.valid(c.start_b)) throw SimError("start position outside the world");
  if (c.tau < 0) throw SimError("tau must be >= 0");
  if (c.allow_mode_mismatch) return;
  if (c.detection == Detection::NodeOnly && !c.program.care)
    throw SimError("node-only detection needs the care-transformed program (override to experiment)");
  if (c.detection == Detection::NodeOrCrossing && c.program.care)
    throw SimError("the care-transformed program is meant for node-only detection (override to experiment)");
}

Coord lmin_window_radius(std::int64_t D) {
  std::int64_t p = 0;
  while ((std::int64_t{1} << p) < std::max<std::int64_t>(D, 1)) ++p;
  return kLminWindowFactor * (std::int64_t{1} << (p + 1));
}

namespace {

template <class F>
void for_window(const World& w, Coord a, Coord b, std::int64_t D, F&& f) {
  const Coord r = lmin_window_radius(D);
  if (w.topology() == Topology::Cycle && 2 * r + 1 >= w.size()) {
    for (Coord c = 0; c < w.size(); ++c) f(c);
    return;
  }
  std::set<Coord> seen;
  for (Coord s : {a, b})
    for (Coord c = s - r; c <= s + r; ++c) {
      if (w.topology() == Topology::FinitePath && !w.valid(c)) continue;
      Coord m = w.normalize(c);
      if (seen.insert(m).second) f(m);
    }
}

}  // namespace

Label lmin(const World& w, Coord a, Coord b, std::int64_t D) {
  Label m = kMaxLabel;
  for_window(w, a, b, D, [&](Coord c) { m = std::min(m, w.label(c)); });
  return m;
}

Label window_max_label(const World& w, Coord a, Coord b, std::int64_t D) {
  Label m = 1;
  for_window(w, a, b, D, [&](Coord c) { m = std::max(m, w.label(c)); });
  return m;
}

std::int64_t default_round_cap(const World& w, Coord a, Coord b, std::int64_t D) {
  return kRoundCapFactor * std::max<std::int64_t>(D, 1) * log_star(window_max_label(w, a, b, D));
}

Coord AgentTrace::host_of(Coord frame, const World& w) const { return w.normalize(start + sigma * frame); }

Coord position_at(const AgentTrace& tr, std::int64_t t, const World& w) {
  auto it = std::upper_bound(tr.segments.begin(), tr.segments.end(), t,
                             [](std::int64_t x, const Segment& s) { return x < s.t0; });
  if (it == tr.segments.begin()) return tr.start;
  const Segment& s = *std::prev(it);
  const std::int64_t dt = std::min(t - s.t0, s.len);
  return w.normalize(s.x0 + s.v * dt);
}

const Annotation& annotation_at(const AgentTrace& tr, std::int64_t t) {
  static const Annotation none;
  auto it = std::upper_bound(tr.segments.begin(), tr.segments.end(), t,
                             [](std::int64_t x, const Segment& s) { return x < s.t0; });
  if (it == tr.segments.begin()) return none;
  return std::prev(it)->note;
}

std::optional<RendezvousEvent> detect(Coord xa_prev, Coord xb_prev, Coord xa, Coord xb, std::int64_t t,
                                      Detection mode) {
  if (xa == xb) return RendezvousEvent{t, false, xa, xb};
  if (mode == Detection::NodeOrCrossing && xa == xb_prev && xb == xa_prev && xa != xa_prev)
    return RendezvousEvent{t, true, xa, xb};
  return std::nullopt;
}

namespace {

int start_sigma(const World& w, Coord start) {
  if (w.degree(start) == 0) return 1;
  return w.port_direction(start, 0);
}

void push_segment(std::vector<Segment>& out, std::size_t consumed, std::int64_t& t, Coord& x, const World& w, int v,
                  std::int64_t len,
                  const Annotation& note) {
  if (len <= 0) return;
  if (out.size() > consumed) {
    Segment& b = out.back();
    if (b.v == v && b.note == note && b.t0 + b.len == t) {
      b.len += len;
      t += len;
      x = w.normalize(x + v * len);
      return;
    }
  }
  out.push_back({t, len, x, v, note});
  t += len;
  x = w.normalize(x + v * len);
}

// Segment-producing executor of one agent.
class FastAgent {
 public:
  FastAgent(const World& w, Coord start, std::int64_t wake, const ProgramSpec& spec, DecisionCache* cache,
            AgentTrace& tr)
      : w_(w), spec_(spec), prog_(spec, cache), tr_(tr) {
    tr_.start = start;
    tr_.sigma = start_sigma(w, start);
    tr_.wake = wake;
    k_.reset(w.label(start), w.degree(start));
    t_ = 0;
    x_ = start;
    if (wake > 0) {
      Annotation asleep;
      push_segment(pending_v_, head_, t_, x_, w_, 0, wake, asleep);
    }
  }

  // Next segment with positive length.
  Segment next() {
    while (head_ >= pending_v_.size()) refill();
    Segment s = pending_v_[head_++];
    if (head_ > 4096) {
      pending_v_.erase(pending_v_.begin(), pending_v_.begin() + static_cast<std::ptrdiff_t>(head_));
      head_ = 0;
    }
    if (!tr_.segments.empty()) {
      Segment& b = tr_.segments.back();
      if (b.v == s.v && b.note == s.note && b.t0 + b.len == s.t0) {
        b.len += s.len;
        return s;
      }
    }
    tr_.segments.push_back(s);
    return s;
  }

 private:
  Label known_label(Coord f) const {
    if (k_.known(f)) return k_.label(f);
    if (auto n = k_.cycle_length()) {
      Coord g = f;
      while (g > k_.hi()) g -= *n;
      while (g < k_.lo()) g += *n;
      return k_.label(g);
    }
    throw SimError("label of an unvisited node");
  }

  void refill() {
    Action a = prog_.next(k_, f_);
    if (a.note.phase == Phase::Discovery &&
        (tr_.iteration_starts.empty() || tr_.iteration_starts.back().first != a.note.L))
      tr_.iteration_starts.push_back({a.note.L, t_});
    const std::int64_t scale = spec_.care ? 4 : 1;
    if (a.kind == Action::Stay) {
      push_segment(pending_v_, head_, t_, x_, w_, 0, a.count * scale, a.note);
      return;
    }
    const int hd = tr_.sigma * a.dir;
    std::int64_t steps = 0;
    bool cut = false;
    std::int64_t run = 0;  // plain steps not yet emitted
    auto flush = [&] {
      push_segment(pending_v_, head_, t_, x_, w_, hd, run, a.note);
      run = 0;
    };
    while (steps < a.count && !cut) {
      const Coord nf = f_ + a.dir;
      if (w_.topology() == Topology::FinitePath && !w_.valid(w_.normalize(tr_.start + tr_.sigma * nf)))
        throw SimError("agent took a nonexistent port");
      std::int64_t take = 1;
      bool event = false;
      if (k_.cycle_length()) {
        take = a.count - steps;
      } else if (k_.known(nf)) {
        const Coord edge = a.dir > 0 ? k_.hi() : k_.lo();
        take = std::min<std::int64_t>(a.count - steps, std::llabs(edge - f_));
        if (f_ + a.dir * take == edge && k_.degree(edge) == 1) event = true;
      } else {
        const Coord hx = w_.normalize(tr_.start + tr_.sigma * nf);
        auto ev = k_.visit(nf, w_.label(hx), w_.degree(hx));
        if (ev == KnownLine::Event::Wrap && !spec_.finite_aware)
          throw SimError("cycle wraparound met by a program without the finite-graph wrapper");
        event = ev != KnownLine::Event::None;
      }
      if (!spec_.care) {
        run += take;
      } else {
        for (std::int64_t i = 0; i < take; ++i) {
          const Coord u = f_ + a.dir * i, v = u + a.dir;
          push_segment(pending_v_, head_, t_, x_, w_, 0, 1, a.note);
          push_segment(pending_v_, head_, t_, x_, w_, hd, 1, a.note);
          if (known_label(v) > known_label(u)) {
            push_segment(pending_v_, head_, t_, x_, w_, 0, 2, a.note);
          } else {
            push_segment(pending_v_, head_, t_, x_, w_, -hd, 1, a.note);
            push_segment(pending_v_, head_, t_, x_, w_, hd, 1, a.note);
          }
        }
      }
      steps += take;
      f_ += a.dir * take;
      if (event && spec_.finite_aware) cut = true;
    }
    flush();
    if (cut && steps < a.count) prog_.interrupt();
  }

  const World& w_;
  ProgramSpec spec_;
  RendezvousProgram prog_;
  AgentTrace& tr_;
  KnownLine k_;
  Coord f_ = 0;
  std::int64_t t_ = 0;
  Coord x_ = 0;
  std::vector<Segment> pending_v_;
  std::size_t head_ = 0;
};

struct Hit {
  std::int64_t s;
  bool crossing;
};

std::optional<Hit> first_hit(const World& w, Coord xa, Coord xb, int va, int vb, std::int64_t len, bool crossing,
                             bool include_zero) {
  std::optional<Hit> best;
  auto offer = [&](std::int64_t s, bool c) {
    if (!best || s < best->s) best = Hit{s, c};
  };
  if (w.topology() != Topology::Cycle) {
    const std::int64_t dx = xa - xb, dv = va - vb;
    if (dv == 0) {
      if (dx == 0 && include_zero) offer(0, false);
    } else if ((-dx) % dv == 0) {
      const std::int64_t s = -dx / dv;
      if (s >= (include_zero ? 0 : 1) && s <= len) offer(s, false);
    }
    if (crossing && va != 0 && va == -vb) {
      const std::int64_t num = -va - dx, den = 2 * va;
      if (num % den == 0) {
        const std::int64_t s = num / den;
        if (s >= 0 && s <= len - 1) offer(s + 1, true);
      }
    }
    return best;
  }
  const std::int64_t n = w.size();
  auto mod = [n](std::int64_t v) { return ((v % n) + n) % n; };
  const std::int64_t dx = mod(xa - xb), dv = va - vb;
  if (dx == 0 && include_zero) return Hit{0, false};
  const std::int64_t limit = std::min<std::int64_t>(len, 2 * n + 2);
  for (std::int64_t s = 1; s <= limit; ++s) {
    if (crossing && va != 0 && va == -vb && mod(dx + dv * (s - 1)) == mod(-va)) return Hit{s, true};
    if (dv != 0 && mod(dx + dv * s) == 0) return Hit{s, false};
  }
  return std::nullopt;
}

void finish(SimTrace& tr, const World& w) {
  if (tr.event) {
    const std::int64_t at = std::max<std::int64_t>(tr.event->round - 1, 0);
    tr.note_a = annotation_at(tr.a, at);
    tr.note_b = annotation_at(tr.b, at);
  }
  tr.tag = classify(tr, w);
}

std::int64_t resolve_cap(const SimConfig& c, std::int64_t D) {
  if (c.round_cap > 0) return c.round_cap;
  // the cap counts plain rounds; care stretches each one to four
  return default_round_cap(c.world, c.start_a, c.start_b, D) * (c.program.care ? 4 : 1);
}

}  // namespace

SimTrace run(const SimConfig& c) {
  validate(c);
  SimTrace tr;
  const World& w = c.world;
  tr.D = w.distance(Position{c.start_a}, Position{c.start_b});
  tr.tau = c.tau;
  tr.round_cap = resolve_cap(c, tr.D);
  FastAgent A(w, c.start_a, 0, c.program, c.cache, tr.a);
  if (c.single_agent) {
    std::int64_t t = 0;
    while (t < tr.round_cap) {
      Segment s = A.next();
      t = s.t0 + s.len;
    }
    tr.end_round = tr.round_cap;
    return tr;
  }
  FastAgent B(w, c.start_b, c.tau, c.program, c.cache, tr.b);
  const bool crossing = c.detection == Detection::NodeOrCrossing;
  Segment sa = A.next(), sb = B.next();
  std::int64_t t = 0;
  bool first = true;
  while (t < tr.round_cap) {
    const std::int64_t ea = sa.t0 + sa.len, eb = sb.t0 + sb.len;
    const std::int64_t e = std::min({ea, eb, tr.round_cap});
    const Coord xa = w.normalize(sa.x0 + sa.v * (t - sa.t0));
    const Coord xb = w.normalize(sb.x0 + sb.v * (t - sb.t0));
    if (auto h = first_hit(w, xa, xb, sa.v, sb.v, e - t, crossing, first)) {
      const std::int64_t r = t + h->s;
      tr.event = RendezvousEvent{r, h->crossing, w.normalize(xa + sa.v * h->s), w.normalize(xb + sb.v * h->s)};
      tr.end_round = r;
      finish(tr, w);
      return tr;
    }
    first = false;
    t = e;
    if (ea == t) sa = A.next();
    if (eb == t) sb = B.next();
  }
  tr.end_round = tr.round_cap;
  finish(tr, w);
  return tr;
}

namespace {

class RefAgent {
 public:
  RefAgent(const World& w, Coord start, std::int64_t wake, const ProgramSpec& spec, DecisionCache* cache,
           AgentTrace& tr)
      : w_(w), spec_(spec), prog_(spec, cache), cur_(spec.care), tr_(tr), x_(start) {
    tr_.start = start;
    tr_.sigma = start_sigma(w, start);
    tr_.wake = wake;
    k_.reset(w.label(start), w.degree(start));
  }

  Coord pos() const { return x_; }

  // Performs round t -> t+1. Returns the annotation of the move.
  void step(std::int64_t t) {
    if (t < tr_.wake) {
      record(t, 0, Annotation{});
      return;
    }
    const std::int64_t local = t - tr_.wake;
    while (cur_.finished()) {
      Action a = prog_.next(k_, f_);
      if (a.note.phase == Phase::Discovery &&
          (tr_.iteration_starts.empty() || tr_.iteration_starts.back().first != a.note.L))
        tr_.iteration_starts.push_back({a.note.L, t});
      cur_.load(a);
    }
    (void)local;
    const bool forward = cur_.next_is_forward();
    const int s = cur_.step(f_, [this](Coord f) { return known_label(f); });
    if (s == 0) {
      record(t, 0, cur_.action().note);
      return;
    }
    int port;
    if (!heading_) port = s == 1 ? 0 : 1;
    else port = s == heading_ ? 1 - *entry_ : *entry_;
    if (port >= w_.degree(x_)) throw SimError("agent took a nonexistent port");
    const int dir = w_.port_direction(x_, port);
    const auto nx = w_.step(x_, dir);
    if (!nx) throw SimError("agent took a nonexistent port");
    const Coord old = x_;
    x_ = *nx;
    entry_ = w_.port_toward(x_, -dir);
    heading_ = s;
    f_ += s;
    if (!k_.cycle_length()) {
      auto ev = k_.visit(f_, w_.label(x_), w_.degree(x_));
      if (ev == KnownLine::Event::Wrap && !spec_.finite_aware)
        throw SimError("cycle wraparound met by a program without the finite-graph wrapper");
      if (ev != KnownLine::Event::None && spec_.finite_aware && forward && cur_.cut()) prog_.interrupt();
    }
    int v = static_cast<int>(x_ - old);
    if (w_.topology() == Topology::Cycle && std::llabs(v) > 1) v = v > 0 ? -1 : 1;
    record(t, v, cur_.action().note);
  }

 private:
  Label known_label(Coord f) const {
    if (k_.known(f)) return k_.label(f);
    if (auto n = k_.cycle_length()) {
      Coord g = f;
      while (g > k_.hi()) g -= *n;
      while (g < k_.lo()) g += *n;
      return k_.label(g);
    }
    throw SimError("label of an unvisited node");
  }

  void record(std::int64_t t, int v, const Annotation& note) {
    auto& segs = tr_.segments;
    if (!segs.empty()) {
      Segment& b = segs.back();
      if (b.v == v && b.note == note && b.t0 + b.len == t) {
        ++b.len;
        return;
      }
    }
    const Coord x0 = w_.normalize(x_ - v);
    segs.push_back({t, 1, x0, v, note});
  }

  const World& w_;
  ProgramSpec spec_;
  RendezvousProgram prog_;
  StepCursor cur_;
  AgentTrace& tr_;
  KnownLine k_;
  Coord x_;
  Coord f_ = 0;
  int heading_ = 0;
  std::optional<int> entry_;
};

}  // namespace

SimTrace run_reference(const SimConfig& c) {
  validate(c);
  SimTrace tr;
  const World& w = c.world;
  tr.D = w.distance(Position{c.start_a}, Position{c.start_b});
  tr.tau = c.tau;
  tr.round_cap = resolve_cap(c, tr.D);
  RefAgent A(w, c.start_a, 0, c.program, c.cache, tr.a);
  if (c.single_agent) {
    for (std::int64_t t = 0; t < tr.round_cap; ++t) A.step(t);
    tr.end_round = tr.round_cap;
    return tr;
  }
  RefAgent B(w, c.start_b, c.tau, c.program, c.cache, tr.b);
  if (A.pos() == B.pos()) {
    tr.event = RendezvousEvent{0, false, A.pos(), B.pos()};
    tr.end_round = 0;
    finish(tr, w);
    return tr;
  }
  for (std::int64_t t = 0; t < tr.round_cap; ++t) {
    const Coord pa = A.pos(), pb = B.pos();
    A.step(t);
    B.step(t);
    if (auto e = detect(pa, pb, A.pos(), B.pos(), t + 1, c.detection)) {
      tr.event = e;
      tr.end_round = t + 1;
      finish(tr, w);
      return tr;
    }
  }
  tr.end_round = tr.round_cap;
  finish(tr, w);
  return tr;
}

CaseTag classify(const SimTrace& tr, const World& w) {
  if (!tr.event) return CaseTag::None;
  const Annotation &a = tr.note_a, &b = tr.note_b;
  auto finite = [](const Annotation& n) { return n.phase == Phase::FinitePath || n.phase == Phase::FiniteCycle; };
  if (finite(a) || finite(b)) return CaseTag::Other;
  if (a.phase == Phase::Asleep || b.phase == Phase::Asleep) return CaseTag::OutOfSync;
  if (a.L != b.L) return CaseTag::OutOfSync;
  if (a.phase == Phase::Discovery || b.phase == Phase::Discovery) return CaseTag::DiscoveryCollision;
  if (a.R != b.R) return CaseTag::MismatchedR;
  if (a.R == 0) return CaseTag::Other;
  return tr.a.host_of(a.r, w) == tr.b.host_of(b.r, w) ? CaseTag::SameNode : CaseTag::DistinctNodesColored;
}

// ---- schemes and sweeps ----

SchemeSpec SchemeSpec::parse(const std::string& s) {
  auto bad = [&] { return SimError("unknown label scheme '" + s + "'"); };
  if (s == "sequential") return {s};
  auto colon = s.find(':');
  const std::string head = s.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (head == "random" || head == "random-injective") {
    Label mx = 1000000000;
    if (!arg.empty()) {
      try {
        mx = std::stoull(arg);
      } catch (...) {
        throw bad();
      }
    }
    if (mx < 1 || mx > kMaxLabel) throw bad();
    return {"random:" + std::to_string(mx)};
  }
  if (head == "class" || head == "uniform-logstar-class") {
    int i = 0;
    try {
      i = std::stoi(arg);
    } catch (...) {
      throw bad();
    }
    if (i < 1 || i > 6) throw bad();
    return {"class:" + std::to_string(i)};
  }
  if (head == "explicit") {
    try {
      auto j = nlohmann::json::parse(arg);
      if (!j.is_object()) throw bad();
    } catch (...) {
      throw bad();
    }
    return {s};
  }
  throw bad();
}

LabelScheme SchemeSpec::build(std::uint64_t seed) const {
  if (name == "sequential") return LabelScheme::sequential();
  auto colon = name.find(':');
  const std::string head = name.substr(0, colon), arg = name.substr(colon + 1);
  if (head == "random") return LabelScheme::random_injective(seed, std::stoull(arg));
  if (head == "class") return LabelScheme::uniform_class(seed, std::stoi(arg));
  if (head == "explicit") {
    std::map<Coord, Label> m;
    auto j = nlohmann::json::parse(arg);
    for (auto it = j.begin(); it != j.end(); ++it) m[std::stoll(it.key())] = it.value().get<Label>();
    return LabelScheme::explicit_map(m);
  }
  throw SimError("unknown label scheme '" + name + "'");
}

World make_world(Topology t, std::int64_t n, const LabelScheme& s, std::uint64_t port_seed) {
  switch (t) {
    case Topology::InfiniteLine: return World::infinite(s, port_seed);
    case Topology::FinitePath: return World::path(n, s, port_seed);
    case Topology::Cycle: return World::cycle(n, s, port_seed);
  }
  throw SimError("bad topology");
}

std::uint64_t port_seed_for(std::uint64_t seed) { return mix64(seed ^ 0x5bd1e995ULL); }

std::string sweep_csv_header() { return "topology,n,D,tau,scheme,lmin,logstar_lmin,t_rdv,ratio,case_tag,seed"; }

static const char* topo_name(Topology t) {
  switch (t) {
    case Topology::InfiniteLine: return "infinite";
    case Topology::FinitePath: return "path";
    case Topology::Cycle: return "cycle";
  }
  return "?";
}

std::string SweepRow::csv() const {
  std::ostringstream os;
  os << topo_name(cell.topology) << ',' << cell.n << ',' << cell.D << ',' << cell.tau << ',' << cell.scheme << ','
     << lmin << ',' << logstar_lmin << ',';
  if (t_rdv) os << *t_rdv;
  os << ',' << std::fixed << std::setprecision(6) << ratio << ',' << case_name(tag) << ',' << cell.seed;
  return os.str();
}

std::vector<std::int64_t> tau_grid(std::int64_t D) {
  std::set<std::int64_t> s{0, 1, 3, D, 3 * D, 10 * D, 10 * D + 7};
  return {s.begin(), s.end()};
}

std::vector<SweepCell> acceptance_grid(std::uint64_t seed) {
  std::vector<SweepCell> cells;
  for (const char* sch : {"sequential", "random:1000000000", "class:4", "class:5"})
    for (std::int64_t D = 1; D <= 64; ++D)
      for (std::int64_t tau : tau_grid(D)) cells.push_back({Topology::InfiniteLine, 0, D, tau, sch, seed});
  return cells;
}

std::vector<SweepCell> finite_grid(std::uint64_t seed) {
  std::vector<SweepCell> cells;
  for (Topology t : {Topology::FinitePath, Topology::Cycle})
    for (const char* sch : {"sequential", "random:1000000000"})
      for (std::int64_t n : {8, 32, 128, 512})
        for (std::int64_t D = 1; D <= n / 2; D *= 2)
          for (std::int64_t tau : {std::int64_t{0}, n}) cells.push_back({t, n, D, tau, sch, seed});
  return cells;
}

SweepRow run_cell(const SweepCell& cell, const SweepOptions& opt, DecisionCache* cache) {
  SimConfig c;
  c.world = make_world(cell.topology, cell.n, SchemeSpec::parse(cell.scheme).build(cell.seed),
                       port_seed_for(cell.seed));
  if (cell.topology == Topology::FinitePath) {
    c.start_a = (cell.n - 1 - cell.D) / 2;
  } else {
    c.start_a = 0;
  }
  c.start_b = c.start_a + cell.D;
  c.tau = cell.tau;
  c.detection = opt.detection;
  c.program.care = opt.care;
  c.program.finite_aware = true;
  c.allow_mode_mismatch = opt.allow_mode_mismatch;
  c.round_cap = opt.round_cap;
  c.cache = cache;
  SimTrace tr = run(c);
  SweepRow row;
  row.cell = cell;
  row.lmin = lmin(c.world, c.start_a, c.start_b, tr.D);
  row.logstar_lmin = log_star(row.lmin);
  row.tag = tr.tag;
  if (tr.event) {
    row.t_rdv = tr.event->round;
    double denom = static_cast<double>(tr.D) * row.logstar_lmin;
    if (cell.topology != Topology::InfiniteLine) denom = std::min<double>(denom, static_cast<double>(cell.n));
    row.ratio = static_cast<double>(tr.event->round) / std::max(denom, 1.0);
  }
  return row;
}

std::vector<SweepRow> sweep(const std::vector<SweepCell>& cells, const SweepOptions& opt,
                            const std::function<void(std::size_t)>& progress) {
  if (cells.empty()) throw SimError("empty sweep grid");
  std::vector<SweepRow> rows(cells.size());
  DecisionCache cache;
  std::atomic<std::size_t> next{0}, done{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        rows[i] = run_cell(cells[i], opt, &cache);
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mu);
        if (!err) err = std::current_exception();
        next = cells.size();
        return;
      }
      const std::size_t d = ++done;
      if (progress) progress(d);
    }
  };
  const int jobs = std::max(1, opt.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
  return rows;
}

void write_trace_jsonl(std::ostream& os, const SimTrace& tr, const World& w, std::int64_t every) {
  if (every < 1) every = 1;
  for (std::int64_t t = 0; t <= tr.end_round; t += every) {
    nlohmann::json j;
    j["round"] = t;
    j["xa"] = position_at(tr.a, t, w);
    j["xb"] = position_at(tr.b, t, w);
    j["phase_a"] = phase_name(annotation_at(tr.a, t).phase);
    j["phase_b"] = phase_name(annotation_at(tr.b, t).phase);
    if (tr.event && tr.event->round == t) j["event"] = tr.event->crossing ? "crossing" : "node";
    else j["event"] = nullptr;
    os << j.dump() << '\n';
    if (t + every > tr.end_round && t != tr.end_round) t = tr.end_round - every;
  }
}

}  // namespace rdv
