#pragma once

#include <vector>

#include "strokeseg/image.hpp"

namespace strokeseg {

// Foreground: candidate within the brain, eroded by the ball of
// seed_size(candidate, brain). Background: zero-intensity pixels.
// Throws kEmptySeeds when either class ends up empty.
SeedLabels make_seeds(const BinaryMask& candidate, const IntensityImage& img);

// Attack attenuation g(d) = 1 - d / max_intensity.
inline double growcut_g(double diff, double max_intensity) { return 1.0 - diff / max_intensity; }

struct AutomatonState {
  SeedLabels label;  // kNeutral marks a cell nobody owns yet
  IntensityImage strength;
  int iterations = 0;
  bool converged = false;
};

// Synchronous cellular automaton on the 8-neighbourhood. Attackers are
// scanned N, NE, E, SE, S, SW, W, NW; the strongest successful attack wins
// and earlier directions win ties.
class GrowcutAutomaton {
 public:
  GrowcutAutomaton(const IntensityImage& img, const SeedLabels& seeds);

  // One synchronous update. Returns false when no cell changed.
  bool step();

  const AutomatonState& state() const noexcept { return state_; }
  AutomatonState release() && { return std::move(state_); }

 private:
  const IntensityImage& img_;
  double max_intensity_;
  AutomatonState state_;
  // Cells to evaluate next step: neighbours of cells changed in the last one.
  std::vector<int> dirty_;
  std::vector<std::uint8_t> dirty_flag_;
  bool first_step_ = true;
};

// Runs until no cell changes or max_iter steps; converged is false in the
// latter case.
AutomatonState growcut_run(const IntensityImage& img, const SeedLabels& seeds, int max_iter = 500);

BinaryMask strength_mask(const AutomatonState& state, double theta_min);

}  // namespace strokeseg
