#pragma once

#include <array>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rdv/line_model.hpp"
#include "rdv/ruling_set.hpp"

namespace rdv {

class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One round of an agent: stay, or leave through a port.
struct Move {
  enum Kind { Stay, TakePort } kind = Stay;
  int port = 0;
  static Move stay() { return {Stay, 0}; }
  static Move take(int p) { return {TakePort, p}; }
  friend bool operator==(const Move&, const Move&) = default;
};

struct Observation {
  Label label = 0;
  int degree = 0;
  std::optional<int> entry_port;
  std::int64_t rounds_since_wakeup = 0;
};

// The 4 moves crossing u -> v through port_at_u. entry_port_at_v leads back to u.
std::array<Move, 4> careful_walk_moves(int port_at_u, int entry_port_at_v, Label lu, Label lv);
// Occupancy over t = 0..4, '0' = lower label endpoint, '1' = higher.
std::string careful_walk_occupancy(Label lu, Label lv);

enum class Phase { Asleep, Discovery, Searching, Waiting, FinitePath, FiniteCycle };
const char* phase_name(Phase p);

struct Annotation {
  Phase phase = Phase::Asleep;
  std::int64_t L = 0;             // 0 outside the main loop
  std::int64_t iteration_start = 0;  // agent-local round, pre-transform
  Coord R = 0;                    // 0 = no ruling set this iteration
  Coord r = 0;                    // frame coordinate of the chosen member
  int color = 0;
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// A macro action in the agent's frame (+1 = port 0 at the start node).
struct Action {
  enum Kind { Stay, Walk } kind = Stay;
  int dir = 0;
  std::int64_t count = 0;
  Annotation note;
};

inline constexpr std::int64_t kForever = std::int64_t{1} << 60;

std::vector<Action> z_walk(std::int64_t L, int first_dir);
// Frame positions visited by a plain action list, starting at from.
std::vector<Coord> expand_positions(const std::vector<Action>& acts, Coord from);
std::int64_t duration(const std::vector<Action>& acts);

std::array<int, 5> color_bits(int color);  // big-endian bits of color-1
// first_dir orients each ZWalk(8R) around r.
std::vector<Action> searching_walk(Coord R, std::int64_t L, Coord r, int color, int first_dir = +1);

// Everything the agent has visited, in its own frame.
class KnownLine {
 public:
  enum class Event { None, Endpoint, Wrap };

  void reset(Label start_label, int start_degree);
  Event visit(Coord f, Label label, int degree);

  Coord lo() const { return lo_; }
  Coord hi() const { return lo_ + static_cast<Coord>(labels_.size()) - 1; }
  bool known(Coord f) const { return f >= lo() && f <= hi(); }
  Label label(Coord f) const;
  int degree(Coord f) const;
  std::optional<std::int64_t> cycle_length() const { return cycle_; }
  LabelWindow window(Coord a, Coord b) const;

 private:
  Coord lo_ = 0;
  std::deque<Label> labels_;
  std::deque<int> degrees_;
  std::unordered_map<Label, Coord> where_;
  std::optional<std::int64_t> cycle_;
};

struct SearchDecision {
  Coord R = 0;  // 0: no S_R is nonempty
  Coord r = 0;
  int color = 0;
};

// Memo of the pure map (known window, L) -> decision; shared across runs.
class DecisionCache {
 public:
  std::optional<SearchDecision> find(const std::array<std::uint64_t, 3>& key);
  void put(const std::array<std::uint64_t, 3>& key, const SearchDecision& d);
  std::size_t size();

 private:
  struct Hash {
    std::size_t operator()(const std::array<std::uint64_t, 3>& k) const { return k[0] ^ (k[1] * 31) ^ (k[2] * 131); }
  };
  std::mutex mu_;
  std::unordered_map<std::array<std::uint64_t, 3>, SearchDecision, Hash> map_;
};

// Ruling-set step of the main loop on the known interval [-L, L].
SearchDecision decide(const KnownLine& k, std::int64_t L, DecisionCache* cache = nullptr);
// Largest R = 4^j with R <= L/16 (0 if none) for which S_R is nonempty.
Coord best_ruling_distance(const KnownLine& k, std::int64_t L);

struct ProgramSpec {
  bool care = false;          // run care(A): needs node-only detection only
  bool finite_aware = false;  // switch behavior on endpoints and wraparound
  std::string name() const;
  bool assumes_crossing_detection() const { return !care; }
};

// The doubling rendezvous loop (plus the finite-graph wrapper when enabled).
// Actions are plain; the care transform is applied by the executor.
class RendezvousProgram {
 public:
  RendezvousProgram(ProgramSpec spec, DecisionCache* cache = nullptr);

  // Called when the previous action finished; the agent is at frame pos.
  Action next(const KnownLine& k, Coord pos);
  // The previous action was cut short by a finite-graph event.
  void interrupt() { plan_.clear(); }
  const ProgramSpec& spec() const { return spec_; }

 private:
  void plan_iteration_start(const KnownLine& k);
  void plan_search(const KnownLine& k);
  void plan_finite(const KnownLine& k, Coord pos);

  ProgramSpec spec_;
  DecisionCache* cache_;
  std::deque<Action> plan_;
  std::int64_t L_ = 1;
  std::int64_t clock_ = 0;  // plain rounds of actions handed out
  bool search_next_ = false;
  bool finite_ = false;
};

// Lazily expands macro actions into per-round frame steps (-1, 0, +1),
// applying the care transform when enabled.
class StepCursor {
 public:
  StepCursor(bool care) : care_(care) {}
  void load(const Action& a) {
    act_ = a;
    done_ = 0;
    sub_ = 0;
  }
  bool finished() const { return done_ >= act_.count; }
  // Ends the action once the step in progress is complete; true if steps were dropped.
  bool cut() {
    const std::int64_t n = done_ + (sub_ != 0 ? 1 : 0);
    const bool dropped = n < act_.count;
    act_.count = n;
    return dropped;
  }
  // The next step is the forward crossing of a walk step.
  bool next_is_forward() const { return act_.kind == Action::Walk && (!care_ || sub_ == 1); }
  // Next frame step; label_of gives known labels (the agent stands at pos).
  template <class LabelOf>
  int step(Coord pos, const LabelOf& label_of);
  const Action& action() const { return act_; }
  // True between the two halves of a careful crossing.
  bool mid_careful() const { return sub_ != 0; }

 private:
  bool care_;
  Action act_;
  std::int64_t done_ = 0;
  int sub_ = 0;
  bool back_ = false;
};

template <class LabelOf>
int StepCursor::step(Coord pos, const LabelOf& label_of) {
  if (act_.kind == Action::Stay) {
    if (!care_) {
      ++done_;
      return 0;
    }
    if (++sub_ == 4) {
      sub_ = 0;
      ++done_;
    }
    return 0;
  }
  if (!care_) {
    ++done_;
    return act_.dir;
  }
  // Stay; cross; then stay twice, or go back and cross again.
  const int d = act_.dir;
  int out = 0;
  switch (sub_) {
    case 0: out = 0; break;
    case 1: out = d; break;
    case 2:
      back_ = !(label_of(pos) > label_of(pos - d));
      out = back_ ? -d : 0;
      break;
    case 3: out = back_ ? d : 0; break;
  }
  if (++sub_ == 4) {
    sub_ = 0;
    ++done_;
  }
  return out;
}

}  // namespace rdv
