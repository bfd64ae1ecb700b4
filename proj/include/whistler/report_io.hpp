#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "whistler/evaluate.hpp"
#include "whistler/labels.hpp"
#include "whistler/pipeline.hpp"

namespace whistler {

/// One detection report as a single JSON line:
/// {"file":...,"sample_duration_s":...,"processing_s":...,"config_digest":...,
///  "detections":[{"t_start_s":...,"t_end_s":...,"f_lo_hz":...,"f_hi_hz":...,
///                 "merit_db":...,"d0":...}]}
std::string report_to_json(const DetectionReport& report);
DetectionReport report_from_json(const std::string& line);

/// Reads every non-empty line of a JSON-lines report stream.
std::vector<DetectionReport> read_report_lines(std::istream& in);

/// Label sidecar: {"scenes":[{"file":...,"labels":[{"t0_s":...,"t5khz_s":...,
/// "d0":...,"duration_s":...,"box":[t0,t1,f_lo,f_hi]}]}]}
std::string scenes_to_json(const std::vector<LabeledScene>& scenes);
std::vector<LabeledScene> scenes_from_json(const std::string& text);

std::string metrics_to_json(const Metrics& m);
std::string timing_to_json(const TimingReport& t);

/// One AWD-style label line: `ISO8601:merit`, e.g.
/// `2013-07-07UT07:06:18.355:63`.
struct AwdEntry {
  std::string timestamp;
  double epoch_s = 0.0;  // seconds since 1970-01-01T00:00:00, no leap seconds
  double merit = 0.0;
};

/// Parses `ISO8601:merit` lines; blank lines and lines starting with '#' are
/// skipped.
std::vector<AwdEntry> parse_awd_labels(std::istream& in);

/// Converts AWD entries into labels relative to a file start timestamp. AWD
/// provides only the 5 kHz arrival, so t0 mirrors t_5khz and the box is
/// degenerate.
std::vector<SceneLabel> awd_to_labels(const std::vector<AwdEntry>& entries,
                                      const std::string& file_start_iso);

}  // namespace whistler
