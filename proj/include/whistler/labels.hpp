#pragma once

#include <vector>

#include "whistler/spectro.hpp"

namespace whistler {

/// Ground-truth placement of one whistler in a scene.
struct SceneLabel {
  double t0 = 0.0;      // leading-edge time [s]
  double t_5khz = 0.0;  // arrival time at 5 kHz [s], the AWD-style reference
  double d0 = 0.0;      // zero dispersion [s^(1/2)]
  double duration = 0.0;
  TimeFreqBox box;      // (t0, t0 + duration, f_min, f_max)
};

/// Labels of one generated scene file.
struct LabeledScene {
  std::string file;
  std::vector<SceneLabel> labels;
};

}  // namespace whistler
