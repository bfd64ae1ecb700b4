#include "whistler/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>

#include "whistler/errors.hpp"

namespace whistler {

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

}  // namespace

std::vector<GroupedPeak> group_detections(const DecisionSeriesd& decisions,
                                          const CorrelationSeriesd& series,
                                          double resolution) {
  if (decisions.size() != series.size())
    throw ShapeMismatch("group_detections: decisions and series differ in length");
  if (!(resolution > 0.0))
    throw InvalidArgument("group_detections: resolution must be positive");

  // Positives are quantised onto a `resolution` grid (cells centred on its
  // multiples); positives sharing a cell collapse to the cell's strongest
  // bin. Events a full `resolution` apart therefore never merge, and the
  // report never holds two detections inside one cell.
  auto cell_of = [resolution](double t) {
    return static_cast<long>(std::floor(t / resolution + 0.5 + 1e-9));
  };

  std::vector<GroupedPeak> peaks;
  bool open = false;
  long current_cell = 0;
  GroupedPeak current;
  for (Eigen::Index i = 0; i < decisions.size(); ++i) {
    if (!decisions.decisions[i]) continue;
    const double t = series.bin_time(i);
    const double v = series.values_db[i];
    const long cell = cell_of(t);
    if (open && cell == current_cell) {
      if (v > current.merit_db) current = {t, v, i};
    } else {
      if (open) peaks.push_back(current);
      current = {t, v, i};
      current_cell = cell;
      open = true;
    }
  }
  if (open) peaks.push_back(current);
  return peaks;
}

DurationEstimate estimate_duration(const Spectrogramd& spec, double t,
                                   const std::vector<WhistlerKerneld>& grid) {
  if (grid.empty()) throw InvalidArgument("estimate_duration: kernel grid is empty");
  const double t_end_spec = spec.t_start + static_cast<double>(spec.n_time()) * spec.dt;
  if (t < spec.t_start - 1e-9 || t >= t_end_spec)
    throw InvalidArgument("estimate_duration: t outside the spectrogram");

  constexpr Eigen::Index kLagWindow = 3;  // absorbs rounding either way
  Eigen::Index max_kernel = 0;
  for (const auto& k : grid) {
    if (k.n_freq() != spec.n_freq())
      throw ShapeMismatch("estimate_duration: kernel rows do not match the spectrogram");
    max_kernel = std::max(max_kernel, k.n_time());
  }

  const Eigen::Index start =
      static_cast<Eigen::Index>(std::floor((t - spec.t_start) / spec.dt + 1e-9));
  Eigen::Index want = std::max<Eigen::Index>(
      static_cast<Eigen::Index>(std::floor(1.0 / spec.dt)), max_kernel + kLagWindow);

  DurationEstimate est;
  Eigen::Index have = spec.n_time() - start;
  if (have < want) est.clipped = true;
  const Eigen::Index len = std::min(want, have);

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& k : grid) {
    const Eigen::Index cols = std::min(k.n_time(), len);
    const Eigen::Index lag_lo = std::max<Eigen::Index>(-kLagWindow, -start);
    const Eigen::Index lag_hi = std::min<Eigen::Index>(kLagWindow, len - cols);
    double score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index lag = lag_lo; lag <= lag_hi; ++lag) {
      const double v = spec.power_db.block(0, start + lag, spec.n_freq(), cols)
                           .cwiseProduct(k.matrix.leftCols(cols))
                           .sum();
      score = std::max(score, v);
    }
    if (score > best) {
      best = score;
      est.t_end = t + k.duration;
      est.d0 = k.d0;
    }
  }
  return est;
}

DetectionReport run_ccsw(const TimeSeriesd& ts, const WhistlerKerneld& kernel,
                         TransformKind transform, const CfarConfig& cfar,
                         const CcswOptions& options, PipelineTrace* trace) {
  const auto t_begin = std::chrono::steady_clock::now();

  Spectrogramd spec = stage("stft", [&] {
    return stft(ts, options.stft.nfft, options.stft.hop, options.stft.window);
  });
  if (trace) trace->full_db = spec;

  Spectrogramd cropped = stage("crop", [&] {
    auto c = crop(spec, kernel.f_min, kernel.f_max);
    if (c.n_freq() != kernel.n_freq())
      throw ShapeMismatch("cropped spectrogram rows do not match the kernel");
    return c;
  });
  if (trace) trace->cropped = cropped;

  Spectrogramd scaled = stage("preprocess", [&] {
    auto x = apply_transform(std::move(cropped), transform, options.axis);
    if (trace) trace->preprocessed = x;
    const auto [mu, sigma] = matrix_mean_std(x);
    if (!(sigma > 0.0))
      throw InvalidArgument("spectrogram has zero spread, cannot scale");
    return scale_clamp(std::move(x), mu, sigma);
  });
  if (trace) trace->scaled = scaled;

  CorrelationSeriesd series =
      stage("correlate", [&] { return cross_correlate(scaled, kernel); });
  if (trace) trace->correlation = series;

  DecisionSeriesd fused = stage("detect", [&] {
    auto ca = ca_cfar(series, cfar);
    auto os = os_cfar(series, cfar);
    auto tm = tm_cfar(series, cfar);
    auto lf = lf_cfar(ca, os, tm);
    if (trace) {
      trace->ca = std::move(ca);
      trace->os = std::move(os);
      trace->tm = std::move(tm);
      trace->lf = lf;
    }
    return lf;
  });

  const auto peaks = stage("group", [&] {
    return group_detections(fused, series, options.group_resolution_s);
  });

  DetectionReport report;
  report.source_file = options.source_file;
  report.config_digest = options.config_digest;
  report.sample_duration = ts.duration();
  stage("duration", [&] {
    for (const auto& peak : peaks) {
      Detection d;
      d.t_start = peak.t;
      d.f_lo = kernel.f_min;
      d.f_hi = kernel.f_max;
      d.merit_db = peak.merit_db;
      if (options.duration_grid.empty()) {
        d.t_end = peak.t + kernel.duration;
      } else {
        const auto est = estimate_duration(scaled, peak.t, options.duration_grid);
        d.t_end = est.t_end;
        d.d0_est = est.d0;
      }
      report.detections.push_back(d);
    }
    return 0;
  });

  report.processing_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return report;
}

std::string digest_string(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace whistler
