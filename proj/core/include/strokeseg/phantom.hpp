#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "strokeseg/image.hpp"

namespace strokeseg {

// Bright rim along the inside of the brain ellipse. At normalized elliptic
// radius rho >= rho0 the tissue level becomes v0 + (v1 - v0) * t^power with
// t = (rho - rho0) / (1 - rho0).
struct CorticalBand {
  double rho0 = 0.9835;
  double v0 = 0.3444;
  double v1 = 0.5605;
  double power = 0.574;
};

// Dark CSF structures: two tilted ellipses either side of the midline,
// `rise` px above the centre, and a thin midline fissure for rho >= fissure_rho.
struct CsfStructures {
  double offset = 16.0;
  double rise = 8.0;
  double rx = 6.0;
  double ry = 22.0;
  double tilt = 0.3;  // radians
  double fissure_half_width = 1.2;
  double fissure_rho = 0.45;
  double dwi_level = 0.1;
  double flair_level = 0.25;
};

struct PhantomSpec {
  int width = 224;
  int height = 224;
  double lesion_cx = 141.5;
  double lesion_cy = 91.5;
  double lesion_radius = 18.0;
  double lesion_level = 0.8;
  double brain_level = 0.35;
  double noise_sigma = 0.02;
  std::uint64_t seed = 1;
  // Brain ellipse semi-axes, centred in the grid.
  double brain_rx = 95.0;
  double brain_ry = 105.0;
  std::optional<CorticalBand> band;
  std::optional<CsfStructures> csf;
  // FLAIR is rendered at flair_scale x the DWI grid. flair_transform maps DWI
  // coordinates to coordinates of the FLAIR resized back to the DWI grid
  // (a, b, tx, c, d, ty); identity leaves both modalities aligned.
  int flair_scale = 3;
  std::array<double, 6> flair_transform{1, 0, 0, 0, 1, 0};
  double flair_brain_level = 0.45;
  double flair_lesion_level = 0.9;
  // FLAIR level of the cortical band, when there is one.
  double flair_band_level = 0.3;
};

struct Phantom {
  RawImage dwi_raw;    // 12-bit
  IntensityImage dwi;  // normalize(dwi_raw)
  RawImage flair_raw;
  IntensityImage flair;
  BinaryMask truth;        // lesion disk on the DWI grid
  BinaryMask truth_flair;  // lesion on the FLAIR grid
  BinaryMask brain;        // brain ellipse on the DWI grid
};

// Deterministic in spec (including seed). Throws kInvalidArgument when the
// lesion leaves the brain ellipse or is not brighter than the brain.
Phantom make_phantom(const PhantomSpec& spec);

// Study-like series: cortical band on, lesion radius 16..19 px at a random
// position, noise 0.02, and (when planted_offsets) a small random affine
// between DWI and FLAIR. Deterministic in (count, seed, planted_offsets).
std::vector<PhantomSpec> phantom_series(int count, std::uint64_t seed, bool planted_offsets = true);

}  // namespace strokeseg
