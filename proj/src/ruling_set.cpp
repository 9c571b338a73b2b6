#include "rdv/ruling_set.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

namespace rdv {

namespace {

constexpr Coord kFar = std::numeric_limits<Coord>::max() / 4;

bool by_pos(const Member& a, const Member& b) { return a.pos < b.pos; }

// Distance from p to the nearest member of sorted S, kFar when S is empty.
Coord nearest(const std::vector<Member>& S, Coord p) {
  auto it = std::lower_bound(S.begin(), S.end(), p, [](const Member& m, Coord x) { return m.pos < x; });
  Coord best = kFar;
  if (it != S.end()) best = it->pos - p;
  if (it != S.begin()) best = std::min(best, p - std::prev(it)->pos);
  return best;
}

Coord nearest(const std::vector<Coord>& S, Coord p) {
  auto it = std::lower_bound(S.begin(), S.end(), p);
  Coord best = kFar;
  if (it != S.end()) best = *it - p;
  if (it != S.begin()) best = std::min(best, p - *std::prev(it));
  return best;
}

void merge_into(std::vector<Member>& S, const std::vector<Member>& add) {
  std::vector<Member> out;
  out.reserve(S.size() + add.size());
  std::merge(S.begin(), S.end(), add.begin(), add.end(), std::back_inserter(out), by_pos);
  S = std::move(out);
}

std::vector<Coord> positions(const std::vector<Member>& m) {
  std::vector<Coord> p;
  p.reserve(m.size());
  for (const auto& x : m) p.push_back(x.pos);
  return p;
}

Coord sum(const std::vector<Coord>& v) {
  Coord s = 0;
  for (Coord x : v) s += x;
  return s;
}

void check_stage(const std::vector<Member>& U, const std::vector<Member>& S, Coord pack, Coord cover, int level) {
  for (std::size_t i = 1; i < S.size(); ++i)
    if (S[i].pos - S[i - 1].pos < pack)
      throw RulingError("stage " + std::to_string(level) + ": members " + std::to_string(S[i - 1].pos) + " and " +
                        std::to_string(S[i].pos) + " closer than " + std::to_string(pack));
  for (const auto& u : U)
    if (nearest(S, u.pos) > cover)
      throw RulingError("stage " + std::to_string(level) + ": node " + std::to_string(u.pos) +
                        " farther than " + std::to_string(cover) + " from the stage set");
}

}  // namespace

RulingCheck verify_limited_ruling_set(const std::vector<Coord>& universe, const std::vector<Coord>& members,
                                      Coord alpha, Coord beta) {
  std::vector<Coord> U = universe, S = members;
  std::sort(U.begin(), U.end());
  std::sort(S.begin(), S.end());
  RulingCheck r;
  for (Coord s : S) {
    if (!std::binary_search(U.begin(), U.end(), s)) {
      r.ok = false;
      r.reason = "member outside the universe";
      r.node = s;
      return r;
    }
  }
  for (std::size_t i = 1; i < S.size(); ++i) {
    if (S[i] - S[i - 1] < alpha) {
      r.ok = false;
      r.reason = "packing";
      r.pair = {S[i - 1], S[i]};
      return r;
    }
  }
  for (Coord u : U) {
    if (nearest(S, u) > beta) {
      r.ok = false;
      r.reason = "covering";
      r.node = u;
      return r;
    }
  }
  return r;
}

int prs_levels(Coord R) {
  if (R < 1) throw RulingError("R must be >= 1");
  int d = 0;
  while ((Coord{1} << d) < R) ++d;
  return d;
}

std::vector<Coord> prs_scales(Coord R) {
  const int d = prs_levels(R);
  std::vector<Coord> q;
  for (int i = 1; i <= d; ++i) q.push_back(i <= d - 1 ? (Coord{1} << i) - 1 : R - 1);
  return q;
}

std::vector<Member> greedy_extend(const std::vector<Member>& U, std::vector<Member>& S, Coord R) {
  struct Cand {
    Coord pos;
    Coord b;
    Label label;
  };
  std::vector<Cand> cand;
  for (const auto& v : U) {
    Coord b = nearest(S, v.pos);
    if (b >= R) cand.push_back({v.pos, b, v.label});
  }
  auto less = [](const Cand& a, const Cand& b) { return a.b != b.b ? a.b < b.b : a.label < b.label; };
  std::vector<Member> added;
  std::deque<std::size_t> dq;  // decreasing keys
  std::size_t next = 0;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    while (next < cand.size() && cand[next].pos <= cand[i].pos + R - 1) {
      while (!dq.empty() && less(cand[dq.back()], cand[next])) dq.pop_back();
      dq.push_back(next++);
    }
    while (cand[dq.front()].pos < cand[i].pos - (R - 1)) dq.pop_front();
    if (dq.front() == i) added.push_back({cand[i].pos, cand[i].label});
  }
  merge_into(S, added);
  return added;
}

std::vector<Member> path_ruling_set(const std::vector<Member>& input, Coord R, const PrsOptions& opt) {
  if (R < 1) throw RulingError("R must be >= 1");
  std::vector<Member> U = input;
  std::sort(U.begin(), U.end(), by_pos);
  if (U.empty()) return {};
  Label bound = opt.label_bound;
  if (bound == 0)
    for (const auto& u : U) bound = std::max(bound, u.label);
  std::vector<Member> S = U;
  if (opt.stages) opt.stages->push_back(positions(S));
  const auto scales = prs_scales(R);
  const int d = static_cast<int>(scales.size());
  Coord cover = 0;
  for (int i = 1; i <= d; ++i) {
    PowerSubgraph h(S, scales[static_cast<std::size_t>(i - 1)]);
    MisResult m = mis(h, bound);
    std::vector<Member> next;
    for (std::size_t j = 0; j < h.size(); ++j)
      if (m.in_set[j]) next.push_back(h.members[j]);
    S = std::move(next);
    cover += scales[static_cast<std::size_t>(i - 1)];
    if (opt.check_stages) {
      if (i <= d - 1) check_stage(U, S, Coord{1} << i, (Coord{2} << i) - i - 2, i);
      else check_stage(U, S, R, cover, i);
    }
    if (opt.stages) opt.stages->push_back(positions(S));
  }
  for (int it = 0; it < 6; ++it) greedy_extend(U, S, R);
  if (opt.check_stages) check_stage(U, S, R, R - 1, d + 1);
  if (opt.stages) opt.stages->push_back(positions(S));
  return S;
}

LimitedRulingSet path_ruling_set(const World& w, const std::vector<Coord>& U, Coord R, const PrsOptions& opt) {
  std::vector<Member> m;
  m.reserve(U.size());
  for (Coord p : U) m.push_back({p, w.label(p)});
  LimitedRulingSet out;
  out.universe = U;
  std::sort(out.universe.begin(), out.universe.end());
  out.members = positions(path_ruling_set(m, R, opt));
  return out;
}

// ---- windows ----

bool LabelWindow::covers(Coord p, Coord r) const {
  return (p - r >= lo || lo_closed) && (p + r <= hi() || hi_closed);
}

LabelWindow LabelWindow::sub(Coord a, Coord b) const {
  LabelWindow s;
  Coord from = std::max(a, lo), to = std::min(b, hi());
  s.lo = from;
  s.lo_closed = lo_closed && a <= lo;
  s.hi_closed = hi_closed && b >= hi();
  if (to >= from)
    s.labels.assign(labels.begin() + (from - lo), labels.begin() + (to - lo) + 1);
  return s;
}

LabelWindow LabelWindow::from_world(const World& w, Coord a, Coord b) {
  LabelWindow win;
  if (w.topology() == Topology::FinitePath) {
    a = std::max<Coord>(a, 0);
    b = std::min<Coord>(b, w.size() - 1);
    win.lo_closed = a == 0;
    win.hi_closed = b == w.size() - 1;
  } else if (w.topology() == Topology::Cycle && b - a + 1 >= w.size()) {
    throw RulingError("a window covering a whole cycle is not a line segment");
  }
  win.lo = a;
  for (Coord p = a; p <= b; ++p) win.labels.push_back(w.label(w.normalize(p)));
  return win;
}

// ---- schedule ----

std::vector<ClassSchedule> es_schedule(Coord R) {
  if (R < 1) throw RulingError("R must be >= 1");
  const Coord K = coloring_power(R);
  const auto scales = prs_scales(R);
  const Coord cov = sum(scales);
  std::vector<ClassSchedule> out;
  Coord prev = 0;
  for (int i = 1; i <= 6; ++i) {
    ClassSchedule c;
    c.label_class = i;
    const Coord m = mis_rounds(class_max_label(i));
    c.prs = (m + 1) * cov + 6 * ((R - 1) + cov);
    c.merged = std::max(c.prs, prev + (R - 1));
    c.greedy = c.merged + 4 * ((R - 1) + 2 * (R - 1));
    c.anchor_keys = i >= 5;
    if (c.anchor_keys) {
      const auto a = anchor_scales(2 * K);
      const Coord ca = sum(a);
      c.anchors = (m + 1) * ca + ca;
      c.extent = 2 * ca + (3 * K + 1) / 2;
    } else {
      c.anchors = 0;
      c.extent = static_cast<Coord>(class_capacity(i) - 1) * K;
    }
    c.colored = std::max({c.greedy + K, prev + K, c.anchors}) + c.extent;
    c.terminate = std::max(c.colored, prev) + (R - 1);
    prev = c.terminate;
    out.push_back(c);
  }
  return out;
}

Coord termination_radius_for_class(int label_class, Coord R) {
  if (label_class < 1 || label_class > 6) throw RulingError("label class out of range");
  return es_schedule(R)[static_cast<std::size_t>(label_class - 1)].terminate;
}

Coord termination_radius(Label label, Coord R) { return termination_radius_for_class(log_star(label), R); }

Coord es_kappa() {
  static const Coord kappa = [] {
    Coord k = 0;
    Coord R = 1;
    for (int j = 0; j <= kKappaMaxExponent; ++j, R *= 4) {
      const auto s = es_schedule(R);
      for (const auto& c : s) {
        const Coord den = R * c.label_class;
        k = std::max(k, (c.terminate + den - 1) / den);
      }
    }
    return k;
  }();
  return kappa;
}

std::string schedule_formulas() {
  std::ostringstream os;
  os << "K = 9R-1; d = ceil(log2 R); Q_j = 2^j-1 (j<d), Q_d = R-1; cov = sum Q_j\n"
     << "m_i = MIS rounds with labels <= max label of class i\n"
     << "prs_i     = (m_i+1)*cov + 6*((R-1)+cov)\n"
     << "merged_i  = max(prs_i, T_{i-1} + R-1)\n"
     << "greedy_i  = merged_i + 4*3*(R-1)\n"
     << "classes 1-4: keys = labels, ext_i = (|class i|-1)*K, anchors_i = 0\n"
     << "classes 5-6: anchor scales A = 1..2K halving, C = sum A; anchors_i = (m_i+1)*C + C; ext_i = 2C + ceil(3K/2)\n"
     << "colored_i = max(greedy_i + K, T_{i-1} + K, anchors_i) + ext_i\n"
     << "T_i       = max(colored_i, T_{i-1}) + R-1, T_0 = 0\n";
  return os.str();
}

// ---- ES-ColPathRulingSet ----

std::vector<ColoredRulingOutput> es_col_path_ruling_set(const LabelWindow& win, Coord R, int max_class) {
  if (R < 1) throw RulingError("R must be >= 1");
  if (max_class <= 0 || max_class > 6) max_class = 6;
  const std::size_t n = win.labels.size();
  const Coord K = coloring_power(R);
  const auto sched = es_schedule(R);

  std::vector<ColoredRulingOutput> out(n);
  std::array<std::vector<Member>, 7> V;
  for (std::size_t i = 0; i < n; ++i) {
    auto& o = out[i];
    o.pos = win.lo + static_cast<Coord>(i);
    o.label = win.labels[i];
    o.label_class = log_star(o.label);
    o.termination_radius = sched[static_cast<std::size_t>(o.label_class - 1)].terminate;
    o.termination_round = o.termination_radius;
    V[static_cast<std::size_t>(o.label_class)].push_back({o.pos, o.label});
  }
  {
    std::vector<Label> ls = win.labels;
    std::sort(ls.begin(), ls.end());
    if (std::adjacent_find(ls.begin(), ls.end()) != ls.end()) throw RulingError("duplicate label in window");
  }

  std::vector<Member> S;
  std::vector<int> color(n, 0);
  auto idx = [&](Coord p) { return static_cast<std::size_t>(p - win.lo); };

  for (int c = 1; c <= max_class; ++c) {
    const auto& Vi = V[static_cast<std::size_t>(c)];
    if (Vi.empty()) continue;
    PrsOptions opt;
    opt.label_bound = class_max_label(c);
    opt.check_stages = false;
    const auto Si = path_ruling_set(Vi, R, opt);

    const std::vector<Member> prev = S;
    std::vector<Member> fresh;
    for (const auto& s : Si)
      if (nearest(prev, s.pos) >= R) fresh.push_back(s);
    merge_into(S, fresh);
    for (int it = 0; it < 4; ++it) greedy_extend(Vi, S, R);

    std::vector<Member> added;
    std::set_difference(S.begin(), S.end(), prev.begin(), prev.end(), std::back_inserter(added), by_pos);

    std::vector<ColorList> lists(added.size());
    for (std::size_t a = 0; a < added.size(); ++a) {
      std::uint32_t banned = 0;
      const Coord p = added[a].pos;
      auto it = std::lower_bound(prev.begin(), prev.end(), p - K,
                                 [](const Member& m, Coord x) { return m.pos < x; });
      for (; it != prev.end() && it->pos <= p + K; ++it) banned |= 1u << color[idx(it->pos)];
      for (int col = 1; col <= kPalette; ++col)
        if (!(banned >> col & 1)) lists[a].push_back(static_cast<std::uint64_t>(col));
    }
    std::vector<std::pair<std::uint64_t, Label>> keys(added.size());
    if (sched[static_cast<std::size_t>(c - 1)].anchor_keys) {
      const auto anchors = anchor_set(Vi, 2 * K, class_max_label(c));
      const auto dist = nearest_anchor_distance(added, anchors);
      for (std::size_t a = 0; a < added.size(); ++a)
        keys[a] = {static_cast<std::uint64_t>(dist[a] < 0 ? kFar : dist[a]), added[a].label};
    } else {
      for (std::size_t a = 0; a < added.size(); ++a) keys[a] = {0, added[a].label};
    }
    PowerSubgraph h(added, K);
    ColorAssignment chi;
    try {
      chi = list_color_by_key(h, lists, keys);
    } catch (const LocalError& e) {
      throw RulingError(std::string("list coloring failed: ") + e.what());
    }
    for (std::size_t a = 0; a < h.size(); ++a) {
      auto& o = out[idx(h.members[a].pos)];
      o.in_set = true;
      o.color = static_cast<int>(chi.color[a]);
      color[idx(o.pos)] = o.color;
    }
    for (const auto& v : Vi) {
      auto& o = out[idx(v.pos)];
      auto it = std::lower_bound(S.begin(), S.end(), v.pos - (R - 1),
                                 [](const Member& m, Coord x) { return m.pos < x; });
      for (; it != S.end() && it->pos <= v.pos + (R - 1); ++it) o.nearby.push_back({it->pos, color[idx(it->pos)]});
    }
  }
  for (auto& o : out) o.certified = o.label_class <= max_class && win.covers(o.pos, o.termination_radius);
  return out;
}

EsCheck verify_es_output(const LabelWindow& win, Coord R, const std::vector<ColoredRulingOutput>& out) {
  EsCheck chk;
  auto fail = [&](const std::string& why) {
    chk.ok = false;
    chk.reason = why;
    return chk;
  };
  if (out.size() != win.labels.size()) return fail("output size differs from the window");
  const Coord K = coloring_power(R);
  const Coord kappa = es_kappa();
  std::map<Coord, std::vector<std::size_t>> by_round;
  for (std::size_t i = 0; i < out.size(); ++i) by_round[out[i].termination_round].push_back(i);

  std::vector<Coord> U, S;
  std::map<Coord, int> col;
  for (const auto& [t, nodes] : by_round) {
    for (std::size_t i : nodes) {
      const auto& o = out[i];
      U.push_back(o.pos);
      if (o.termination_radius > kappa * R * log_star(o.label))
        return fail("termination radius above kappa*R*log* at " + std::to_string(o.pos));
      if (o.in_set) {
        if (o.color < 1 || o.color > kPalette) return fail("color outside [1,17] at " + std::to_string(o.pos));
        S.push_back(o.pos);
        col[o.pos] = o.color;
      }
    }
    std::sort(U.begin(), U.end());
    std::sort(S.begin(), S.end());
    auto rc = verify_limited_ruling_set(U, S, R, R - 1);
    if (!rc.ok) {
      std::string where = rc.node ? std::to_string(*rc.node)
                                  : std::to_string(rc.pair->first) + "," + std::to_string(rc.pair->second);
      return fail("prefix at round " + std::to_string(t) + " violates " + rc.reason + " at " + where);
    }
    for (std::size_t a = 0; a < S.size(); ++a)
      for (std::size_t b = a + 1; b < S.size() && S[b] - S[a] <= K; ++b)
        if (col[S[a]] == col[S[b]])
          return fail("members " + std::to_string(S[a]) + " and " + std::to_string(S[b]) + " share a color within 9R-1");
    for (std::size_t i : nodes) {
      const auto& o = out[i];
      std::vector<NearbyMember> expect;
      for (auto it = std::lower_bound(S.begin(), S.end(), o.pos - (R - 1)); it != S.end() && *it <= o.pos + R - 1; ++it)
        expect.push_back({*it, col[*it]});
      if (expect != o.nearby) return fail("nearby members wrong at " + std::to_string(o.pos));
    }
  }
  return chk;
}

EsCheck certify_es_locality(const LabelWindow& win, Coord R, const std::vector<ColoredRulingOutput>& out,
                            std::size_t stride) {
  EsCheck chk;
  if (stride == 0) stride = 1;
  for (std::size_t i = 0; i < out.size(); i += stride) {
    const auto& o = out[i];
    if (!o.certified) continue;
    const Coord T = o.termination_radius;
    LabelWindow s = win.sub(o.pos - T, o.pos + T);
    auto re = es_col_path_ruling_set(s, R, o.label_class);
    const auto& r = re[static_cast<std::size_t>(o.pos - s.lo)];
    if (!r.certified || !r.same_output(o)) {
      chk.ok = false;
      chk.reason = "output at " + std::to_string(o.pos) + " not reproduced from its radius-" + std::to_string(T) +
                   " ball";
      return chk;
    }
  }
  return chk;
}

}  // namespace rdv
