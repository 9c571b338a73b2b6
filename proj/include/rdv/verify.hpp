#pragma once

#include <cstdint>
#include <string>

#include "rdv/line_model.hpp"

namespace rdv {

// Result of a randomized or exhaustive oracle run; detail holds the first
// counterexample on failure.
struct VerifyReport {
  bool ok = true;
  std::size_t cases = 0;
  std::string detail;
};

// Opposite careful crossings of one edge, every start offset in -3..3, both
// label orientations and several port numberings.
VerifyReport verify_carefulwalk();
// path_ruling_set against the (R, R-1) checker, R cycling through 1,2,4,8,16.
VerifyReport verify_rulingset(int trials, std::uint64_t seed, std::size_t max_universe = 512,
                              Label max_label = 1000000);
// Prefix, coloring, palette and radius oracles on whole finite paths.
VerifyReport verify_escolruling(int trials, std::uint64_t seed, std::size_t max_universe = 256);
// Two agents' views of the same infinite line agree on every node both certify;
// with radius > 0 only that R is used.
VerifyReport verify_two_views(int trials, std::uint64_t seed, Coord radius = 0);
// Every certified output on a random window is reproduced from its own
// termination ball, and that ball is within kappa*R*log*.
VerifyReport verify_locality(int trials, std::uint64_t seed, Coord R, std::size_t universe);

}  // namespace rdv
