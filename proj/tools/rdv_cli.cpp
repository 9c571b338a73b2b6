#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "rdv/local_engine.hpp"
#include "rdv/ruling_set.hpp"
#include "rdv/sim_harness.hpp"
#include "rdv/verify.hpp"

#ifndef RDV_VERSION
#define RDV_VERSION "unversioned"
#endif

using nlohmann::json;
using namespace rdv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything needed to reproduce a run or a sweep. Output paths and job count
// are kept out of the embedded copy since they do not affect results.
struct RunSpec {
  std::string topology = "infinite";
  std::int64_t n = 0;
  std::int64_t d = 1;
  std::int64_t tau = 0;
  std::string scheme = "sequential";
  std::uint64_t seed = 1;
  std::string detection = "auto";
  bool care = false;
  bool allow_mode_mismatch = false;
  std::int64_t round_cap = 0;
  std::int64_t start = -1;  // -1: centered on paths, 0 otherwise
  std::string engine = "fast";
  // sweep only
  std::string grid = "acceptance";
  std::string n_list = "0";
  std::string d_list = "1..64";
  std::string tau_list = "grid";
  std::vector<std::string> scheme_list;

  json to_json(const std::string& command) const {
    json j{{"command", command},   {"topology", topology}, {"n", n},
           {"seed", seed},         {"detection", detection}, {"care", care},
           {"allow_mode_mismatch", allow_mode_mismatch},    {"round_cap", round_cap}};
    if (command == "run") {
      j.update(json{{"d", d}, {"tau", tau}, {"scheme", scheme}, {"start", start}, {"engine", engine}});
    } else {
      j["grid"] = grid;
      if (grid == "custom")
        j.update(json{{"n_list", n_list}, {"d_list", d_list}, {"tau_list", tau_list}, {"scheme_list", scheme_list}});
    }
    return j;
  }

  static RunSpec from_json(const json& j) {
    RunSpec s;
    auto get = [&](const char* k, auto& v) {
      if (j.contains(k)) j.at(k).get_to(v);
    };
    get("topology", s.topology);
    get("n", s.n);
    get("d", s.d);
    get("tau", s.tau);
    get("scheme", s.scheme);
    get("seed", s.seed);
    get("detection", s.detection);
    get("care", s.care);
    get("allow_mode_mismatch", s.allow_mode_mismatch);
    get("round_cap", s.round_cap);
    get("start", s.start);
    get("engine", s.engine);
    get("grid", s.grid);
    get("n_list", s.n_list);
    get("d_list", s.d_list);
    get("tau_list", s.tau_list);
    get("scheme_list", s.scheme_list);
    return s;
  }
};

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

Topology parse_topology(const std::string& s) {
  if (s == "infinite") return Topology::InfiniteLine;
  if (s == "path") return Topology::FinitePath;
  if (s == "cycle") return Topology::Cycle;
  throw ConfigError("unknown topology '" + s + "'");
}

Detection resolve_detection(const RunSpec& s) {
  Detection d;
  if (s.detection == "auto") return s.care ? Detection::NodeOnly : Detection::NodeOrCrossing;
  if (s.detection == "node-only") d = Detection::NodeOnly;
  else if (s.detection == "node-or-crossing") d = Detection::NodeOrCrossing;
  else throw ConfigError("unknown detection mode '" + s.detection + "'");
  const bool mismatch = (d == Detection::NodeOnly) != s.care;
  if (mismatch) {
    std::cerr << "warning: " << detection_name(d) << " detection with the " << (s.care ? "care" : "plain")
              << " program breaks the correctness assumption of that program\n";
    if (!s.allow_mode_mismatch) throw ConfigError("detection/care mismatch needs --allow-mode-mismatch");
  }
  return d;
}

// Reads "a..b" ranges and comma lists; "pow2:a..b" keeps the powers of two.
std::vector<std::int64_t> parse_int_list(const std::string& text, const char* what) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (...) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ConfigError(std::string("bad ") + what + " entry '" + s + "'");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    bool pow2 = false;
    if (item.rfind("pow2:", 0) == 0) {
      pow2 = true;
      item = item.substr(5);
    }
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(num(item));
      continue;
    }
    const std::int64_t lo = num(item.substr(0, dots)), hi = num(item.substr(dots + 2));
    if (hi - lo > 1000000) throw ConfigError(std::string(what) + " range too large");
    for (std::int64_t v = lo; v <= hi; ++v)
      if (!pow2 || (v > 0 && (v & (v - 1)) == 0)) out.push_back(v);
  }
  return out;
}

std::vector<SweepCell> build_grid(const RunSpec& s) {
  if (s.grid == "acceptance") return acceptance_grid(s.seed);
  if (s.grid == "finite") return finite_grid(s.seed);
  if (s.grid != "custom") throw ConfigError("unknown grid '" + s.grid + "'");
  const Topology topo = parse_topology(s.topology);
  std::vector<std::string> schemes = s.scheme_list;
  if (schemes.empty()) schemes.push_back(s.scheme);
  for (auto& sc : schemes) sc = SchemeSpec::parse(sc).name;
  const auto ns = parse_int_list(s.n_list, "n");
  const auto ds = parse_int_list(s.d_list, "d");
  const bool tau_from_d = s.tau_list == "grid";
  const auto taus = tau_from_d ? std::vector<std::int64_t>{} : parse_int_list(s.tau_list, "tau");
  std::vector<SweepCell> cells;
  for (const auto& sc : schemes)
    for (std::int64_t n : ns)
      for (std::int64_t D : ds) {
        if (D < 1) throw ConfigError("d must be >= 1");
        if (topo != Topology::InfiniteLine && (n < 2 || D >= n)) throw ConfigError("need 1 <= d < n on finite graphs");
        for (std::int64_t tau : tau_from_d ? tau_grid(D) : taus) {
          if (tau < 0) throw ConfigError("tau must be >= 0");
          cells.push_back({topo, topo == Topology::InfiniteLine ? 0 : n, D, tau, sc, s.seed});
        }
      }
  return cells;
}

json read_embedded_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# run_spec: ", 0) == 0) return json::parse(line.substr(12));
    if (line.empty() || line[0] != '{') continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_object() && j.contains("run_spec")) return j["run_spec"];
  }
  throw ConfigError("no embedded run spec in " + path);
}

RunSpec load_replay(const std::string& path, const char* command) {
  json j = read_embedded_spec(path);
  if (j.value("command", std::string()) != command)
    throw ConfigError(path + " holds a '" + j.value("command", std::string("?")) + "' spec, not '" + command + "'");
  return RunSpec::from_json(j);
}

void add_common(CLI::App* app, RunSpec& s) {
  app->add_option("--topology", s.topology, "infinite | path | cycle")->capture_default_str();
  app->add_option("--n", s.n, "number of nodes on path or cycle")->capture_default_str();
  app->add_option("--seed", s.seed, "seed for labels and port numbering")->capture_default_str();
  app->add_option("--detection", s.detection, "auto | node-only | node-or-crossing")->capture_default_str();
  app->add_flag("--care,!--no-care", s.care, "run the care-transformed program");
  app->add_flag("--allow-mode-mismatch", s.allow_mode_mismatch, "accept a detection mode the program was not built for");
  app->add_option("--round-cap", s.round_cap, "round cap, 0 for the default")->capture_default_str();
  app->add_option("--config", "key=value file mirroring the flag names; command-line flags win");
}

int cmd_run(RunSpec s, const std::string& out_path, std::int64_t every) {
  SimConfig c;
  const Topology topo = parse_topology(s.topology);
  if (topo != Topology::InfiniteLine && s.n < 2) throw ConfigError("--n must be >= 2 on path or cycle");
  if (s.d < 0) throw ConfigError("--d must be >= 0");
  if (s.engine != "fast" && s.engine != "reference") throw ConfigError("unknown engine '" + s.engine + "'");
  s.scheme = SchemeSpec::parse(s.scheme).name;
  c.world = make_world(topo, s.n, SchemeSpec{s.scheme}.build(s.seed), port_seed_for(s.seed));
  c.start_a = s.start >= 0 ? s.start : topo == Topology::FinitePath ? std::max<std::int64_t>(0, (s.n - 1 - s.d) / 2) : 0;
  c.start_b = c.start_a + s.d;
  c.tau = s.tau;
  c.detection = resolve_detection(s);
  c.program.care = s.care;
  c.program.finite_aware = topo != Topology::InfiniteLine;
  c.allow_mode_mismatch = s.allow_mode_mismatch;
  c.round_cap = s.round_cap;
  DecisionCache cache;
  c.cache = &cache;
  try {
    validate(c);
  } catch (const SimError& e) {
    throw ConfigError(e.what());
  }

  const SimTrace tr = s.engine == "fast" ? run(c) : run_reference(c);
  const Label lm = lmin(c.world, c.start_a, c.start_b, tr.D);
  double denom = static_cast<double>(tr.D) * log_star(lm);
  if (topo != Topology::InfiniteLine) denom = std::min(denom, static_cast<double>(s.n));

  if (!out_path.empty()) {
    std::ofstream os(out_path);
    if (!os) throw ConfigError("cannot write " + out_path);
    if (every <= 0) every = std::max<std::int64_t>(1, tr.end_round / 10000);
    os << json{{"version", RDV_VERSION}, {"run_spec", s.to_json("run")}, {"round_cap", tr.round_cap},
               {"record_every", every}}
              .dump()
       << '\n';
    write_trace_jsonl(os, tr, c.world, every);
  }

  std::ostringstream line;
  line << std::fixed << std::setprecision(6);
  if (tr.event) {
    line << "rendezvous T_rdv=" << tr.event->round << " D=" << tr.D << " tau=" << tr.tau << " lmin=" << lm
         << " logstar=" << log_star(lm) << " ratio=" << tr.event->round / std::max(denom, 1.0)
         << " case=" << case_name(tr.tag) << " via=" << (tr.event->crossing ? "crossing" : "node");
    std::cout << line.str() << '\n';
    return kExitOk;
  }
  line << "no rendezvous within " << tr.round_cap << " rounds D=" << tr.D << " tau=" << tr.tau << " lmin=" << lm;
  std::cout << line.str() << '\n';
  print_error("bound", "no rendezvous within the round cap of " + std::to_string(tr.round_cap));
  return kExitViolation;
}

int cmd_sweep(const RunSpec& s, const std::string& out_path, int jobs, bool quiet) {
  SweepOptions opt;
  opt.care = s.care;
  opt.detection = resolve_detection(s);
  opt.allow_mode_mismatch = s.allow_mode_mismatch;
  opt.round_cap = s.round_cap;
  opt.jobs = jobs;
  const auto cells = build_grid(s);
  if (cells.empty()) throw ConfigError("empty sweep grid");

  std::vector<SweepRow> rows;
  try {
    rows = sweep(cells, opt, [&](std::size_t done) {
      if (!quiet && (done % 100 == 0 || done == cells.size()))
        std::cerr << "\r" << done << "/" << cells.size() << " cells" << (done == cells.size() ? "\n" : "")
                  << std::flush;
    });
  } catch (const SimError& e) {
    throw ConfigError(e.what());
  }

  std::ofstream file;
  if (!out_path.empty() && out_path != "-") {
    file.open(out_path);
    if (!file) throw ConfigError("cannot write " + out_path);
  }
  std::ostream& csv = file.is_open() ? static_cast<std::ostream&>(file) : std::cout;
  std::ostream& report = file.is_open() ? std::cout : std::cerr;
  csv << "# version: " << RDV_VERSION << '\n' << "# run_spec: " << s.to_json("sweep").dump() << '\n';
  csv << sweep_csv_header() << '\n';
  for (const auto& r : rows) csv << r.csv() << '\n';

  std::map<CaseTag, std::size_t> counts;
  std::vector<const SweepRow*> missed;
  const SweepRow* worst = nullptr;
  for (const auto& r : rows) {
    if (!r.t_rdv) {
      missed.push_back(&r);
      continue;
    }
    ++counts[r.tag];
    if (!worst || r.ratio > worst->ratio) worst = &r;
  }
  report << std::fixed << std::setprecision(6);
  report << "cells " << rows.size() << '\n';
  if (worst) report << "max ratio " << worst->ratio << " at " << worst->csv() << '\n';
  report << "cases";
  for (CaseTag t : kAllCases) report << ' ' << case_name(t) << '=' << counts[t];
  report << '\n';
  std::string absent;
  for (CaseTag t : {CaseTag::OutOfSync, CaseTag::MismatchedR, CaseTag::SameNode, CaseTag::DistinctNodesColored})
    if (counts[t] == 0) absent += std::string(" ") + case_name(t);
  if (!absent.empty()) report << "core cases not observed:" << absent << '\n';
  report << "violations " << missed.size() << '\n';
  for (std::size_t i = 0; i < missed.size() && i < 20; ++i) report << "  " << missed[i]->csv() << '\n';
  if (!missed.empty()) {
    print_error("bound", std::to_string(missed.size()) + " cells hit the round cap");
    return kExitViolation;
  }
  return kExitOk;
}

int report_verify(const char* target, const VerifyReport& r) {
  std::cout << (r.ok ? "PASS" : "FAIL") << " verify " << target << ": " << r.cases << " cases; " << r.detail << '\n';
  if (!r.ok) {
    print_error("oracle", std::string(target) + ": " + r.detail);
    return kExitViolation;
  }
  return kExitOk;
}

void cmd_constants() {
  std::cout << "version " << RDV_VERSION << '\n';
  std::cout << "kappa " << es_kappa() << "  (checked for R = 4^j, j <= " << kKappaMaxExponent << ")\n";
  std::cout << "coloring palette " << kPalette << ", coloring power K = 9R-1\n";
  std::cout << "constant-palette rounds <= " << kRoundsSlope << "*log*(max label) + " << kRoundsOffset << '\n';
  std::cout << "\nITER(N): bit-trick rounds from N colors to 6\n";
  std::cout << std::setw(22) << "N" << std::setw(6) << "ITER" << '\n';
  std::vector<std::uint64_t> ns = {6, 7, 16, 17, 64, 65536};
  for (int i = 1; i <= 6; ++i) ns.push_back(class_max_label(i));
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  for (auto n : ns) std::cout << std::setw(22) << n << std::setw(6) << cv_iterations(n) << '\n';
  std::cout << "\nper-class label bounds and local rounds\n";
  std::cout << std::setw(6) << "class" << std::setw(22) << "max label" << std::setw(8) << "color" << std::setw(6)
            << "mis" << '\n';
  for (int i = 1; i <= 6; ++i)
    std::cout << std::setw(6) << i << std::setw(22) << class_max_label(i) << std::setw(8)
              << color_rounds(class_max_label(i)) << std::setw(6) << mis_rounds(class_max_label(i)) << '\n';
  std::cout << "\nschedule\n" << schedule_formulas();
  std::cout << "\ntermination radius T_i\n" << std::setw(6) << "R";
  for (int i = 1; i <= 6; ++i) std::cout << std::setw(10) << ("T_" + std::to_string(i));
  std::cout << std::setw(16) << "ceil(T_6/6R)" << '\n';
  for (Coord R : {1, 4, 16, 64, 256}) {
    std::cout << std::setw(6) << R;
    for (int i = 1; i <= 6; ++i) std::cout << std::setw(10) << termination_radius_for_class(i, R);
    std::cout << std::setw(16) << (termination_radius_for_class(6, R) + 6 * R - 1) / (6 * R) << '\n';
  }
  std::cout << "\nl_min window radius = " << kLminWindowFactor << " * 2^(ceil(log2 D)+1)\n";
  std::cout << "default round cap = " << kRoundCapFactor
            << " * max(D,1) * log*(largest label in the window), times 4 for the care program\n";
}

// Expands "--config FILE" into "--key=value" tokens placed right after the
// subcommand, so later command-line flags take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    std::size_t erase = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      erase = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      erase = 1;
    } else {
      continue;
    }
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::vector<std::string> tokens;
    std::string line;
    auto trim = [](std::string x) {
      const auto b = x.find_first_not_of(" \t\r"), e = x.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#' || line[0] == '[') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
      std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      while (!key.empty() && key[0] == '-') key.erase(0, 1);
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
      tokens.push_back("--" + key + "=" + value);
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + erase));
    std::size_t at = 1;
    while (at < args.size() && args[at].rfind("-", 0) == 0) ++at;  // top-level flags
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min(at + 1, args.size())), tokens.begin(),
                tokens.end());
    --i;
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic rendezvous on labeled lines: runs, sweeps, oracles"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", RDV_VERSION);

  RunSpec spec;
  std::string run_out = "trace.jsonl", sweep_out = "-", replay;
  int jobs = 1;
  bool quiet = false;
  bool no_trace = false;
  std::int64_t every = 0;

  auto* run_cmd = app.add_subcommand("run", "simulate one instance");
  add_common(run_cmd, spec);
  run_cmd->add_option("--d", spec.d, "initial distance")->capture_default_str();
  run_cmd->add_option("--tau", spec.tau, "wake-up delay of the second agent")->capture_default_str();
  run_cmd->add_option("--scheme", spec.scheme, "sequential | random:<max> | class:<i> | explicit:<json>")
      ->capture_default_str();
  run_cmd->add_option("--start", spec.start, "first agent's node (-1: default placement)")->capture_default_str();
  run_cmd->add_option("--engine", spec.engine, "fast | reference")->capture_default_str();
  run_cmd->add_option("--out", run_out, "trace file (JSON lines)")->capture_default_str();
  run_cmd->add_flag("--no-trace", no_trace, "skip the trace file");
  run_cmd->add_option("--trace-every", every, "rounds between trace records (0: at most ~10000 records)");
  run_cmd->add_option("--replay", replay, "rerun the spec embedded in a trace file");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a grid of instances");
  add_common(sweep_cmd, spec);
  sweep_cmd->add_option("--grid", spec.grid, "acceptance | finite | custom")->capture_default_str();
  sweep_cmd->add_option("--n-list", spec.n_list, "custom grid: sizes, e.g. 8,32 or pow2:8..512");
  sweep_cmd->add_option("--d-list", spec.d_list, "custom grid: distances, e.g. 1..64")->capture_default_str();
  sweep_cmd->add_option("--tau-list", spec.tau_list, "custom grid: delays, or 'grid' for the per-D set")
      ->capture_default_str();
  sweep_cmd->add_option("--scheme", spec.scheme_list, "custom grid: label scheme (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sweep_cmd->add_option("--jobs", jobs, "worker threads")->capture_default_str()->check(CLI::Range(1, 1024));
  sweep_cmd->add_option("--out", sweep_out, "CSV file ('-' for stdout)")->capture_default_str();
  sweep_cmd->add_option("--replay", replay, "rerun the spec embedded in a CSV file");
  sweep_cmd->add_flag("--quiet", quiet, "no progress output");

  auto* verify_cmd = app.add_subcommand("verify", "run an oracle suite");
  verify_cmd->require_subcommand(1);
  int trials = 200;
  std::uint64_t vseed = 1;
  Coord vr = 4;
  std::size_t universe = 128;
  auto* v_walk = verify_cmd->add_subcommand("carefulwalk", "opposite careful crossings always meet");
  auto* v_rs = verify_cmd->add_subcommand("rulingset", "path_ruling_set against the ruling-set checker");
  auto* v_es = verify_cmd->add_subcommand("escolruling", "colored ruling set oracles on whole paths");
  auto* v_loc = verify_cmd->add_subcommand("locality", "outputs reproduced from their termination balls");
  auto* v_views = verify_cmd->add_subcommand("views", "two agents' views agree where both certify");
  for (auto* v : {v_rs, v_es, v_loc, v_views}) {
    v->add_option("--trials", trials)->capture_default_str();
    v->add_option("--seed", vseed)->capture_default_str();
  }
  v_es->add_option("--universe", universe, "largest path length")->default_val(256);
  v_loc->add_option("--r", vr)->capture_default_str()->check(CLI::PositiveNumber);
  v_loc->add_option("--universe", universe, "window length")->capture_default_str();
  v_views->add_option("--r", vr, "0 alternates 1 and 4")->default_val(0);

  auto* const_cmd = app.add_subcommand("constants", "print every implementation constant");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(std::move(args));
    args.erase(args.begin());
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const ConfigError& e) {
    print_error("config", e.what());
    return kExitConfig;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("config", e.what());
    return kExitConfig;
  }

  try {
    if (*run_cmd) {
      if (!replay.empty()) spec = load_replay(replay, "run");
      return cmd_run(spec, no_trace ? std::string() : run_out, every);
    }
    if (*sweep_cmd) {
      if (!replay.empty()) spec = load_replay(replay, "sweep");
      return cmd_sweep(spec, sweep_out, jobs, quiet);
    }
    if (*verify_cmd) {
      if (*v_walk) return report_verify("carefulwalk", verify_carefulwalk());
      if (*v_rs) return report_verify("rulingset", verify_rulingset(trials, vseed));
      if (*v_es) return report_verify("escolruling", verify_escolruling(trials, vseed, universe));
      if (*v_loc) return report_verify("locality", verify_locality(trials, vseed, vr, universe));
      if (*v_views) return report_verify("views", verify_two_views(trials, vseed, vr));
    }
    if (*const_cmd) {
      cmd_constants();
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    print_error("config", e.what());
    return kExitConfig;
  } catch (const SimError& e) {
    print_error("config", e.what());
    return kExitConfig;
  } catch (const ModelError& e) {
    print_error("config", e.what());
    return kExitConfig;
  } catch (const json::exception& e) {
    print_error("config", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitViolation;
  }
  return kExitOk;
}
