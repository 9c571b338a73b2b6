#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdv/line_model.hpp"
#include "rdv/local_engine.hpp"

namespace rdv {

class RulingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RulingParams {
  Coord R = 1;
  Coord alpha = 1;
  Coord beta = 0;
  static RulingParams for_distance(Coord R) { return {R, R, R - 1}; }
};

struct LimitedRulingSet {
  std::vector<Coord> universe;  // sorted
  std::vector<Coord> members;   // sorted
};

struct RulingCheck {
  bool ok = true;
  std::string reason;
  std::optional<Coord> node;                    // uncovered or foreign node
  std::optional<std::pair<Coord, Coord>> pair;  // packing violation
};

// Distances are |a - b|, i.e. measured along a line or path host.
RulingCheck verify_limited_ruling_set(const std::vector<Coord>& universe, const std::vector<Coord>& members,
                                      Coord alpha, Coord beta);

struct PrsOptions {
  Label label_bound = 0;  // 0: largest label in U
#ifdef NDEBUG
  bool check_stages = false;
#else
  bool check_stages = true;
#endif
  std::vector<std::vector<Coord>>* stages = nullptr;  // S_0..S_d, then S_out
};

// The MIS scales R_1..R_d.
std::vector<Coord> prs_scales(Coord R);
int prs_levels(Coord R);  // d = ceil(log2 R)

std::vector<Member> path_ruling_set(const std::vector<Member>& U, Coord R, const PrsOptions& opt = {});
LimitedRulingSet path_ruling_set(const World& w, const std::vector<Coord>& U, Coord R, const PrsOptions& opt = {});

// One greedy extension step: every v in U with b_v >= R that beats all such
// candidates within R-1 on (b, label) joins S. Returns the added members.
std::vector<Member> greedy_extend(const std::vector<Member>& U, std::vector<Member>& S, Coord R);

// ---- early-stopping colored ruling set ----

// Contiguous stretch of a host line with its labels. A closed side is a true
// endpoint of the host: no node exists beyond it.
struct LabelWindow {
  Coord lo = 0;
  std::vector<Label> labels;
  bool lo_closed = false;
  bool hi_closed = false;

  Coord hi() const { return lo + static_cast<Coord>(labels.size()) - 1; }
  bool contains(Coord p) const { return p >= lo && p <= hi(); }
  Label label(Coord p) const { return labels[static_cast<std::size_t>(p - lo)]; }
  // Whether the host ball of radius r around p is entirely inside the window.
  bool covers(Coord p, Coord r) const;
  LabelWindow sub(Coord a, Coord b) const;  // clipped to the window
  static LabelWindow from_world(const World& w, Coord a, Coord b);
};

struct NearbyMember {
  Coord pos = 0;
  int color = 0;
  friend bool operator==(const NearbyMember&, const NearbyMember&) = default;
};

struct ColoredRulingOutput {
  Coord pos = 0;
  Label label = 0;
  int label_class = 0;
  bool in_set = false;
  int color = 0;  // in [1, 17] when in_set
  std::vector<NearbyMember> nearby;
  Coord termination_radius = 0;
  Coord termination_round = 0;
  bool certified = false;

  // Agreement compares committed content only.
  bool same_output(const ColoredRulingOutput& o) const {
    return pos == o.pos && label == o.label && in_set == o.in_set && color == o.color && nearby == o.nearby &&
           termination_radius == o.termination_radius;
  }
};

inline constexpr int kPalette = 17;

// Runs the class-by-class colored ruling set on the window taken as the whole
// host. Outputs whose termination ball fits in the window are certified and
// coincide with the output on the unbounded host. max_class limits the classes
// simulated (0: all).
std::vector<ColoredRulingOutput> es_col_path_ruling_set(const LabelWindow& win, Coord R, int max_class = 0);

// ---- schedule ----

struct ClassSchedule {
  int label_class = 0;
  Coord prs = 0;        // S_i known
  Coord merged = 0;     // S'_i known
  Coord greedy = 0;     // after the 4 extension steps
  Coord anchors = 0;    // anchor keys known (0 when keyed by label)
  Coord extent = 0;     // reach of a list-coloring dependency chain
  Coord colored = 0;    // colors of new members known
  Coord terminate = 0;  // T_i
  bool anchor_keys = false;
};

std::vector<ClassSchedule> es_schedule(Coord R);
Coord termination_radius_for_class(int label_class, Coord R);
Coord termination_radius(Label label, Coord R);
inline Coord coloring_power(Coord R) { return 9 * R - 1; }

// Smallest integer with termination_radius(l, R) <= kappa * R * log*(l) for
// every class and every R = 4^j the main loop can use.
Coord es_kappa();
inline constexpr int kKappaMaxExponent = 15;

// Human-readable provenance of the schedule constants.
std::string schedule_formulas();

struct EsCheck {
  bool ok = true;
  std::string reason;
};

// Replays commits in termination order and checks ruling set, coloring on
// G^{9R-1}, lists, nearby members and radius bound at every prefix.
EsCheck verify_es_output(const LabelWindow& win, Coord R, const std::vector<ColoredRulingOutput>& out);

// Recomputes every certified output from the window truncated to its
// termination radius and reports the first mismatch.
EsCheck certify_es_locality(const LabelWindow& win, Coord R, const std::vector<ColoredRulingOutput>& out,
                            std::size_t stride = 1);

}  // namespace rdv
