#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "whistler/dispersion.hpp"
#include "whistler/labels.hpp"
#include "whistler/spectro.hpp"

namespace whistler {

/// One whistler to inject: leading edge at t0, per-tone peak amplitude.
struct SceneWhistler {
  double t0 = 0.0;
  DispersionParams params;
  double amplitude = 1.0;
};

/// Full description of a synthetic VLF scene. Deterministic per rng_seed.
struct SceneSpec {
  double fs = 40000.0;
  double duration = 6.0;
  std::uint64_t rng_seed = 1;
  std::vector<SceneWhistler> whistlers;
  double noise_floor = 1.0;       // Gaussian noise amplitude std
  double sferic_rate = 0.5;       // broadband impulses per second
  double sferic_amplitude = 12.0; // impulse amplitude, in noise-floor units
  std::vector<double> tone_freqs = {3700.0, 8300.0, 11900.0};  // transmitter lines [Hz]
  double tone_amplitude = 2.0;

  void validate() const;
};

/// Time-domain whistler: a bank of df-spaced windowed tone bursts, each
/// delayed by travel_time(f) - travel_time(f_max), so its STFT traces the
/// dispersion curve starting at sample 0.
TimeSeriesd synth_whistler(const DispersionParams& p, double fs, double amplitude,
                           double tone_spacing_hz = 0.0);

/// Per-tone amplitude that puts the whistler trace roughly snr_db above the
/// noise floor in the spectrogram.
double whistler_amplitude_for_snr(double snr_db, double noise_floor);

/// Noise floor + sferics + transmitter tones + injected whistlers, plus the
/// exact ground-truth labels.
std::pair<TimeSeriesd, std::vector<SceneLabel>> generate_scene(const SceneSpec& spec);

/// Randomised batch description used by the scene-generator CLI.
struct BatchSpec {
  int count = 1;
  std::uint64_t seed = 1;
  SceneSpec base;  // whistlers list ignored; filled per scene
  int whistler_count_min = 1;
  int whistler_count_max = 5;
  std::vector<double> d0_choices = {35.0, 80.0};
  double snr_db = 10.0;
  DispersionParams params;  // d0 overridden per draw
  double t0_min = 0.3;
  double t0_max = -1.0;  // < 0: duration - longest-whistler duration - 1.5 s
};

/// Scene spec for batch entry `index`, drawn deterministically from the batch
/// seed.
SceneSpec random_scene_spec(const BatchSpec& batch, int index);

}  // namespace whistler
