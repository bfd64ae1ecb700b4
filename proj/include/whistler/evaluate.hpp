#pragma once

#include <optional>
#include <string>
#include <vector>

#include "whistler/labels.hpp"
#include "whistler/pipeline.hpp"

namespace whistler {

/// Detection quality counts and the ratios derived from them. Ratios with an
/// empty denominator are absent rather than zero.
struct Metrics {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  std::optional<double> misdetection;  // fn / (tp + fn)
  std::optional<double> false_alarm;   // fp / (tp + fp)
  std::optional<double> f1;            // 2 tp / (2 tp + fp + fn)
};

/// Recomputes the ratios from the counts.
Metrics metrics_from_counts(long tp, long fp, long fn);

/// Scores one report against the truth: a label is detected when its 5 kHz
/// reference time falls inside at least one detection's [t_start, t_end];
/// a detection covering no reference time is a false positive. Each label
/// credits at most one true positive.
Metrics match_detections(const DetectionReport& report,
                         const std::vector<SceneLabel>& labels);

/// Sums the counts of several per-file metrics and rederives the ratios.
Metrics merge_metrics(const std::vector<Metrics>& parts);

struct FileTiming {
  std::string file;
  double processing_s = 0.0;
  double duration_s = 0.0;
  double ratio = 0.0;  // processing_s / duration_s
};

/// Processing-to-collection ratio per file and the batch mean; realtime is
/// true when the mean ratio stays at or below 1.
struct TimingReport {
  std::vector<FileTiming> files;
  double mean_ratio = 0.0;
  bool realtime = false;
};

TimingReport timing(const std::vector<DetectionReport>& batch);

}  // namespace whistler
