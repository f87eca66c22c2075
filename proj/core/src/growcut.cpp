#include "strokeseg/growcut.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "strokeseg/morphology.hpp"

namespace strokeseg {

namespace {

constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

struct Update {
  int index;
  SeedLabel label;
  double strength;
};

}  // namespace

SeedLabels make_seeds(const BinaryMask& candidate, const IntensityImage& img) {
  require_same_shape(candidate, img, "candidate mask and image differ in shape");
  const BinaryMask brain = brain_mask(img);
  const BinaryMask lesion = mask_and(candidate, brain);
  if (popcount(brain) == 0) throw Error(ErrorCode::kEmptyBrain, "image has no brain pixels");
  const BinaryMask fg = erode(lesion, BallElement(seed_size(lesion, brain)));
  SeedLabels seeds(img.width(), img.height(), SeedLabel::kNeutral);
  std::size_t n_fg = 0, n_bg = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!brain[i]) {
      seeds[i] = SeedLabel::kBackground;
      ++n_bg;
    } else if (fg[i]) {
      seeds[i] = SeedLabel::kForeground;
      ++n_fg;
    }
  }
  if (n_fg == 0) throw Error(ErrorCode::kEmptySeeds, "no foreground seed survives erosion");
  if (n_bg == 0) throw Error(ErrorCode::kEmptySeeds, "image has no background pixels");
  return seeds;
}

GrowcutAutomaton::GrowcutAutomaton(const IntensityImage& img, const SeedLabels& seeds)
    : img_(img), max_intensity_(max_intensity(img)) {
  require_same_shape(img, seeds, "image and seed labels differ in shape");
  if (!(max_intensity_ > 0.0)) throw Error(ErrorCode::kDegenerateImage, "image maximum is zero");
  bool fg = false, bg = false;
  for (SeedLabel s : seeds.pixels()) {
    fg = fg || s == SeedLabel::kForeground;
    bg = bg || s == SeedLabel::kBackground;
  }
  if (!fg || !bg) throw Error(ErrorCode::kEmptySeeds, "growcut needs foreground and background seeds");
  state_.label = seeds;
  state_.strength = IntensityImage(img.width(), img.height(), 0.0);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (seeds[i] != SeedLabel::kNeutral) state_.strength[i] = 1.0;
  }
  dirty_flag_.assign(img.size(), 0);
}

bool GrowcutAutomaton::step() {
  const int w = img_.width();
  const int h = img_.height();
  if (first_step_) {
    dirty_.resize(img_.size());
    for (std::size_t i = 0; i < dirty_.size(); ++i) dirty_[i] = static_cast<int>(i);
    first_step_ = false;
  }
  std::vector<Update> updates;
  for (int idx : dirty_) {
    dirty_flag_[static_cast<std::size_t>(idx)] = 0;
    const int x = idx % w;
    const int y = idx / w;
    const double iq = img_[static_cast<std::size_t>(idx)];
    double best = state_.strength[static_cast<std::size_t>(idx)];
    int winner = -1;
    for (int d = 0; d < 8; ++d) {
      const int px = x + kDx[d];
      const int py = y + kDy[d];
      if (px < 0 || py < 0 || px >= w || py >= h) continue;
      const auto p = static_cast<std::size_t>(py) * w + px;
      if (state_.label[p] == SeedLabel::kNeutral) continue;
      const double attack = growcut_g(std::abs(img_[p] - iq), max_intensity_) * state_.strength[p];
      if (attack > best) {
        best = attack;
        winner = static_cast<int>(p);
      }
    }
    if (winner >= 0) updates.push_back({idx, state_.label[static_cast<std::size_t>(winner)], best});
  }

  dirty_.clear();
  for (const auto& u : updates) {
    state_.label[static_cast<std::size_t>(u.index)] = u.label;
    state_.strength[static_cast<std::size_t>(u.index)] = u.strength;
    const int x = u.index % w;
    const int y = u.index / w;
    for (int d = 0; d < 8; ++d) {
      const int nx = x + kDx[d];
      const int ny = y + kDy[d];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      const auto n = static_cast<std::size_t>(ny) * w + nx;
      if (!dirty_flag_[n]) {
        dirty_flag_[n] = 1;
        dirty_.push_back(static_cast<int>(n));
      }
    }
  }
  if (updates.empty()) return false;
  ++state_.iterations;
  return true;
}

AutomatonState growcut_run(const IntensityImage& img, const SeedLabels& seeds, int max_iter) {
  if (max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "max_iter must be >= 1");
  GrowcutAutomaton automaton(img, seeds);
  for (int i = 0; i < max_iter; ++i) {
    if (!automaton.step()) {
      AutomatonState s = std::move(automaton).release();
      s.converged = true;
      return s;
    }
  }
  AutomatonState s = std::move(automaton).release();
  s.converged = false;
  return s;
}

BinaryMask strength_mask(const AutomatonState& state, double theta_min) {
  BinaryMask out(state.label.width(), state.label.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (state.label[i] == SeedLabel::kForeground && state.strength[i] >= theta_min) ? 1 : 0;
  }
  return out;
}

}  // namespace strokeseg
