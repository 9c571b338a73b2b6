#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rdv/agent_runtime.hpp"
#include "rdv/line_model.hpp"

namespace rdv {

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Detection { NodeOnly, NodeOrCrossing };
const char* detection_name(Detection d);

enum class CaseTag { None, OutOfSync, MismatchedR, SameNode, DistinctNodesColored, DiscoveryCollision, Other };
const char* case_name(CaseTag c);
inline constexpr CaseTag kAllCases[] = {CaseTag::OutOfSync, CaseTag::MismatchedR, CaseTag::SameNode,
                                         CaseTag::DistinctNodesColored, CaseTag::DiscoveryCollision,
                                         CaseTag::Other};

struct SimConfig {
  World world = World::infinite(LabelScheme::sequential());
  Coord start_a = 0;
  Coord start_b = 1;
  std::int64_t tau = 0;
  Detection detection = Detection::NodeOrCrossing;
  ProgramSpec program;
  std::int64_t round_cap = 0;  // 0: default cap
  bool allow_mode_mismatch = false;
  bool single_agent = false;   // run agent a alone (timing traces)
  DecisionCache* cache = nullptr;
};

// Enforces the pairing of detection mode and care transform.
void validate(const SimConfig& c);

// Radius of the window around each start used for l_min: factor * 2^(ceil(log2 D)+1).
inline constexpr Coord kLminWindowFactor = 4;
Coord lmin_window_radius(std::int64_t D);
Label lmin(const World& w, Coord a, Coord b, std::int64_t D);
Label window_max_label(const World& w, Coord a, Coord b, std::int64_t D);
inline constexpr std::int64_t kRoundCapFactor = 10000;
// In plain rounds; runs of the care-transformed program get four times this.
std::int64_t default_round_cap(const World& w, Coord a, Coord b, std::int64_t D);

// Constant-velocity piece of a trajectory: positions at rounds t0..t0+len are
// x0, x0+v, ... (reduced mod n on cycles).
struct Segment {
  std::int64_t t0 = 0;
  std::int64_t len = 0;
  Coord x0 = 0;
  int v = 0;
  Annotation note;
};

struct AgentTrace {
  Coord start = 0;
  int sigma = 1;  // host direction of frame +1
  std::int64_t wake = 0;
  std::vector<Segment> segments;
  // (L, round) of every discovery phase start
  std::vector<std::pair<std::int64_t, std::int64_t>> iteration_starts;
  Coord host_of(Coord frame, const World& w) const;
};

struct RendezvousEvent {
  std::int64_t round = 0;
  bool crossing = false;
  Coord xa = 0, xb = 0;  // positions in that round
};

struct SimTrace {
  std::int64_t D = 0;
  std::int64_t tau = 0;
  std::int64_t round_cap = 0;
  std::int64_t end_round = 0;  // last simulated round
  AgentTrace a, b;
  std::optional<RendezvousEvent> event;
  Annotation note_a, note_b;  // phases at the rendezvous round
  CaseTag tag = CaseTag::None;
};

Coord position_at(const AgentTrace& tr, std::int64_t t, const World& w);
const Annotation& annotation_at(const AgentTrace& tr, std::int64_t t);

// Rendezvous between rounds t-1 and t, given both positions at t-1 and t.
std::optional<RendezvousEvent> detect(Coord xa_prev, Coord xb_prev, Coord xa, Coord xb, std::int64_t t,
                                      Detection mode);

// Segment-based simulator with analytic meeting detection.
SimTrace run(const SimConfig& c);
// Round-by-round simulator that drives agents through ports only.
SimTrace run_reference(const SimConfig& c);

// (R, r in host coordinates) of an annotation.
CaseTag classify(const SimTrace& tr, const World& w);

struct SchemeSpec {
  std::string name;  // sequential | random:<max> | class:<i> | explicit:<json>
  static SchemeSpec parse(const std::string& s);
  LabelScheme build(std::uint64_t seed) const;
};

struct SweepCell {
  Topology topology = Topology::InfiniteLine;
  std::int64_t n = 0;
  std::int64_t D = 1;
  std::int64_t tau = 0;
  std::string scheme = "sequential";
  std::uint64_t seed = 0;
};

struct SweepRow {
  SweepCell cell;
  Label lmin = 0;
  int logstar_lmin = 0;
  std::optional<std::int64_t> t_rdv;
  double ratio = 0;
  CaseTag tag = CaseTag::None;
  std::string csv() const;
};

struct SweepOptions {
  bool care = false;
  Detection detection = Detection::NodeOrCrossing;
  bool allow_mode_mismatch = false;
  int jobs = 1;
  std::int64_t round_cap = 0;
  // Finite cells divide T_rdv by min(n, D log* l_min) instead of D log* l_min.
};

std::string sweep_csv_header();
std::vector<std::int64_t> tau_grid(std::int64_t D);
std::vector<SweepCell> acceptance_grid(std::uint64_t seed);
std::vector<SweepCell> finite_grid(std::uint64_t seed);
SweepRow run_cell(const SweepCell& cell, const SweepOptions& opt, DecisionCache* cache);
std::vector<SweepRow> sweep(const std::vector<SweepCell>& cells, const SweepOptions& opt,
                            const std::function<void(std::size_t)>& progress = {});

World make_world(Topology t, std::int64_t n, const LabelScheme& s, std::uint64_t port_seed);
std::uint64_t port_seed_for(std::uint64_t seed);

// Line-delimited JSON rendering of a trace, one record per round.
void write_trace_jsonl(std::ostream& os, const SimTrace& tr, const World& w, std::int64_t every = 1);

}  // namespace rdv
