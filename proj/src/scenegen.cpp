#include "whistler/scenegen.hpp"

#include <cmath>
#include <random>

#include "whistler/errors.hpp"

namespace whistler {

namespace {

constexpr double kBurstSeconds = 0.064;    // per-tone burst length
constexpr double kSfericSeconds = 0.0012;  // broadband impulse length
constexpr int kDefaultNfft = 256;          // matches the spectrogram defaults

// Mean square of the plateau-plus-tail burst envelope below:
// a fifth at full power, the rest a half-cosine at 0.42 amplitude.
constexpr double kEnvelopeMeanSq = 0.2 + 0.8 * 0.42 * 0.42 * 0.375;

double curve_duration(const DispersionParams& p) {
  return travel_time(p, p.f_min) - travel_time(p, p.f_max);
}

}  // namespace

void SceneSpec::validate() const {
  if (!(fs > 0.0)) throw InvalidArgument("scene: fs must be positive");
  if (!(duration > 0.0)) throw InvalidArgument("scene: duration must be positive");
  if (noise_floor < 0.0 || sferic_rate < 0.0 || sferic_amplitude < 0.0 ||
      tone_amplitude < 0.0)
    throw InvalidArgument("scene: amplitudes and rates must be non-negative");
  for (const auto& w : whistlers) {
    w.params.validate();
    if (w.t0 < 0.0 || w.t0 + curve_duration(w.params) > duration)
      throw InvalidArgument("scene: whistler does not fit inside the scene");
  }
}

TimeSeriesd synth_whistler(const DispersionParams& p, double fs, double amplitude,
                           double tone_spacing_hz) {
  p.validate();
  if (!(fs > 0.0)) throw InvalidArgument("synth_whistler: fs must be positive");
  const double df = tone_spacing_hz > 0.0 ? tone_spacing_hz : fs / kDefaultNfft;

  // Full-power plateau for two analysis frames, then a quieter half-cosine
  // tail. The plateau guarantees one full-strength frame right at the onset,
  // pinning the trace's leading edge; the tail thickens the trace but stays
  // weak enough that a neighbouring bin's fresh burst can never outshine a
  // row's own onset.
  const int burst_len = std::max(4, static_cast<int>(std::lround(kBurstSeconds * fs)));
  const int plateau = std::min(burst_len / 2, static_cast<int>(std::lround(0.0128 * fs)));
  constexpr double kTailLevel = 0.42;
  Eigen::VectorXd env(burst_len);
  for (int i = 0; i < burst_len; ++i)
    env[i] = i < plateau
                 ? 1.0
                 : kTailLevel *
                       (0.5 + 0.5 * std::cos(M_PI * (i - plateau) / (burst_len - plateau)));

  // Tones sit exactly on the analysis bin centres (multiples of df inside the
  // band), so each one lands in a single spectrogram row.
  const int k_lo = static_cast<int>(std::ceil(p.f_min / df - 1e-9));
  const int k_hi = static_cast<int>(std::floor(p.f_max / df + 1e-9));
  const double t_ref = travel_time(p, p.f_max);
  const Eigen::Index total =
      static_cast<Eigen::Index>(std::ceil((curve_duration(p) + kBurstSeconds) * fs)) + 1;

  TimeSeriesd ts;
  ts.fs = fs;
  ts.channel_id = "NS";
  ts.samples.setZero(total);
  for (int k = k_lo; k <= k_hi; ++k) {
    const double f = k * df;
    const double onset = travel_time(p, f) - t_ref;
    const Eigen::Index start = static_cast<Eigen::Index>(std::lround(onset * fs));
    const double w = 2.0 * M_PI * f / fs;
    // Golden-angle phase spacing keeps overlapping neighbours from adding
    // coherently while staying fully deterministic.
    const double phase = 2.3999632297286533 * k;
    for (int i = 0; i < burst_len && start + i < total; ++i)
      ts.samples[start + i] += amplitude * env[i] * std::cos(w * i + phase);
  }
  return ts;
}

double whistler_amplitude_for_snr(double snr_db, double noise_floor) {
  // Nominal SNR compares the active tone's power, A^2 <env^2> / 2, against
  // the white noise power inside the default 1.5-9.5 kHz band at fs = 40 kHz,
  // noise_floor^2 * 8000 / 20000.
  const double in_band = 0.4;
  return noise_floor * std::pow(10.0, snr_db / 20.0) *
         std::sqrt(in_band / (kEnvelopeMeanSq / 2.0));
}

std::pair<TimeSeriesd, std::vector<SceneLabel>> generate_scene(const SceneSpec& spec) {
  spec.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(std::llround(spec.duration * spec.fs));

  TimeSeriesd ts;
  ts.fs = spec.fs;
  ts.channel_id = "NS";
  ts.samples.setZero(n);

  std::mt19937_64 rng(spec.rng_seed);

  if (spec.noise_floor > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise_floor);
    for (Eigen::Index i = 0; i < n; ++i) ts.samples[i] = noise(rng);
  }

  if (spec.sferic_rate > 0.0 && spec.sferic_amplitude > 0.0) {
    std::poisson_distribution<int> count_dist(spec.sferic_rate * spec.duration);
    const int count = count_dist(rng);
    const int width = std::max(2, static_cast<int>(std::lround(kSfericSeconds * spec.fs)));
    std::uniform_real_distribution<double> when(0.0, spec.duration - kSfericSeconds);
    std::normal_distribution<double> impulse(0.0, spec.sferic_amplitude * spec.noise_floor);
    for (int s = 0; s < count; ++s) {
      const Eigen::Index start = static_cast<Eigen::Index>(std::lround(when(rng) * spec.fs));
      for (int i = 0; i < width && start + i < n; ++i)
        ts.samples[start + i] += impulse(rng);
    }
  }

  for (double f : spec.tone_freqs) {
    const double w = 2.0 * M_PI * f / spec.fs;
    for (Eigen::Index i = 0; i < n; ++i)
      ts.samples[i] += spec.tone_amplitude * std::cos(w * static_cast<double>(i));
  }

  std::vector<SceneLabel> labels;
  labels.reserve(spec.whistlers.size());
  for (const auto& w : spec.whistlers) {
    const TimeSeriesd chirp = synth_whistler(w.params, spec.fs, w.amplitude);
    const Eigen::Index start = static_cast<Eigen::Index>(std::lround(w.t0 * spec.fs));
    const Eigen::Index len = std::min(chirp.samples.size(), n - start);
    ts.samples.segment(start, len) += chirp.samples.head(len);

    const double t_ref = travel_time(w.params, w.params.f_max);
    const double f5 = std::clamp(5000.0, w.params.f_min, w.params.f_max);
    SceneLabel label;
    label.t0 = w.t0;
    label.t_5khz = w.t0 + travel_time(w.params, f5) - t_ref;
    label.d0 = w.params.d0;
    label.duration = curve_duration(w.params);
    label.box = {w.t0, w.t0 + label.duration, w.params.f_min, w.params.f_max};
    labels.push_back(label);
  }
  return {std::move(ts), std::move(labels)};
}

SceneSpec random_scene_spec(const BatchSpec& batch, int index) {
  if (batch.whistler_count_min < 0 || batch.whistler_count_max < batch.whistler_count_min)
    throw InvalidArgument("batch: whistler count range is invalid");
  if (batch.d0_choices.empty()) throw InvalidArgument("batch: d0_choices is empty");

  SceneSpec spec = batch.base;
  spec.whistlers.clear();
  spec.rng_seed = batch.seed + static_cast<std::uint64_t>(index);

  // Placement draws come from their own stream so the scene noise stays
  // reproducible regardless of how many whistlers were placed.
  std::mt19937_64 rng(spec.rng_seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_int_distribution<int> count_dist(batch.whistler_count_min,
                                                batch.whistler_count_max);
  std::uniform_int_distribution<std::size_t> d0_dist(0, batch.d0_choices.size() - 1);

  const int count = count_dist(rng);
  const double amplitude =
      whistler_amplitude_for_snr(batch.snr_db, spec.noise_floor);
  for (int i = 0; i < count; ++i) {
    SceneWhistler w;
    w.params = batch.params;
    w.params.d0 = batch.d0_choices[d0_dist(rng)];
    w.amplitude = amplitude;
    double t0_max = batch.t0_max;
    if (t0_max < 0.0) {
      DispersionParams longest = batch.params;
      for (double d0 : batch.d0_choices) longest.d0 = std::max(longest.d0, d0);
      t0_max = spec.duration - curve_duration(longest) - 1.5;
    }
    t0_max = std::min(t0_max, spec.duration - curve_duration(w.params));
    if (t0_max <= batch.t0_min)
      throw InvalidArgument("batch: no room to place a whistler");
    std::uniform_real_distribution<double> t0_dist(batch.t0_min, t0_max);
    w.t0 = t0_dist(rng);
    spec.whistlers.push_back(w);
  }
  return spec;
}

}  // namespace whistler
