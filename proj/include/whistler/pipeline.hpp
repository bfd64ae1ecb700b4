#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "whistler/detect.hpp"
#include "whistler/dispersion.hpp"
#include "whistler/preprocess.hpp"
#include "whistler/spectro.hpp"

namespace whistler {

/// One localized whistler.
struct Detection {
  double t_start = 0.0;
  double t_end = 0.0;
  double f_lo = 0.0;
  double f_hi = 0.0;
  double merit_db = 0.0;  // peak correlation value
  std::optional<double> d0_est;
};

/// Everything one pipeline run produced for one input file.
struct DetectionReport {
  std::string source_file;
  std::vector<Detection> detections;  // sorted by t_start
  std::string config_digest;
  double processing_time = 0.0;   // wall-clock [s]
  double sample_duration = 0.0;   // input length [s]
};

struct StftConfig {
  int nfft = 256;
  int hop = 256;
  Window window = Window::Hann;
};

/// Knobs of run_ccsw beyond the kernel / transform / CFAR trio.
struct CcswOptions {
  StftConfig stft;
  Axis axis = Axis::Time;
  double group_resolution_s = 0.1;
  /// Kernels tried when estimating each detection's duration; empty means
  /// "use the correlation kernel itself".
  std::vector<WhistlerKerneld> duration_grid;
  std::string source_file;
  std::string config_digest;
};

/// Intermediate products of a run, captured on request for CSV dumps and
/// stage-level tests.
struct PipelineTrace {
  Spectrogramd full_db;
  Spectrogramd cropped;
  Spectrogramd preprocessed;
  Spectrogramd scaled;
  CorrelationSeriesd correlation;
  DecisionSeriesd ca, os, tm, lf;
};

/// A cluster of positive decisions collapsed to its strongest bin.
struct GroupedPeak {
  double t = 0.0;
  double merit_db = 0.0;
  Eigen::Index bin = 0;
};

/// Collapses positive decisions into events at the given output resolution:
/// positives quantising onto the same `resolution` cell become one event,
/// represented by the time and value of its maximum correlation. Positives a
/// full `resolution` apart always stay separate.
std::vector<GroupedPeak> group_detections(const DecisionSeriesd& decisions,
                                          const CorrelationSeriesd& series,
                                          double resolution = 0.1);

struct DurationEstimate {
  double t_end = 0.0;
  std::optional<double> d0;
  bool clipped = false;  // cut ran past the spectrogram end
};

/// Correlates every grid kernel against the cut starting at t (length of the
/// longest kernel, at least 1 s) near lag zero and returns the end time and
/// zero dispersion of the best match.
DurationEstimate estimate_duration(const Spectrogramd& spec, double t,
                                   const std::vector<WhistlerKerneld>& grid);

/// Full CCSW pass over one time series:
/// stft -> crop to the kernel band -> transform -> scale to [0,1] ->
/// cross-correlate -> CA/OS/TM CFAR -> fusion -> group -> estimate durations.
/// Errors from any stage are rethrown as PipelineError with the stage name.
DetectionReport run_ccsw(const TimeSeriesd& ts, const WhistlerKerneld& kernel,
                         TransformKind transform, const CfarConfig& cfar,
                         const CcswOptions& options = {},
                         PipelineTrace* trace = nullptr);

/// 64-bit FNV-1a digest of a canonical key=value rendering, as 16 hex chars.
std::string digest_string(const std::string& canonical);

}  // namespace whistler
