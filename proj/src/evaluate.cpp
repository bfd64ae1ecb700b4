#include "whistler/evaluate.hpp"

#include "whistler/errors.hpp"

namespace whistler {

Metrics metrics_from_counts(long tp, long fp, long fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  if (tp + fn > 0) m.misdetection = static_cast<double>(fn) / static_cast<double>(tp + fn);
  if (tp + fp > 0) m.false_alarm = static_cast<double>(fp) / static_cast<double>(tp + fp);
  if (2 * tp + fp + fn > 0)
    m.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  return m;
}

Metrics match_detections(const DetectionReport& report,
                         const std::vector<SceneLabel>& labels) {
  long tp = 0, fn = 0;
  std::vector<bool> det_hit(report.detections.size(), false);
  for (const auto& label : labels) {
    bool covered = false;
    for (std::size_t d = 0; d < report.detections.size(); ++d) {
      const auto& det = report.detections[d];
      if (label.t_5khz >= det.t_start && label.t_5khz <= det.t_end) {
        covered = true;
        det_hit[d] = true;
      }
    }
    if (covered)
      ++tp;
    else
      ++fn;
  }
  long fp = 0;
  for (bool hit : det_hit)
    if (!hit) ++fp;
  return metrics_from_counts(tp, fp, fn);
}

Metrics merge_metrics(const std::vector<Metrics>& parts) {
  long tp = 0, fp = 0, fn = 0;
  for (const auto& m : parts) {
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
  }
  return metrics_from_counts(tp, fp, fn);
}

TimingReport timing(const std::vector<DetectionReport>& batch) {
  TimingReport rep;
  double sum = 0.0;
  for (const auto& r : batch) {
    if (!(r.sample_duration > 0.0))
      throw InvalidArgument("timing: sample duration must be positive");
    FileTiming ft;
    ft.file = r.source_file;
    ft.processing_s = r.processing_time;
    ft.duration_s = r.sample_duration;
    ft.ratio = r.processing_time / r.sample_duration;
    sum += ft.ratio;
    rep.files.push_back(std::move(ft));
  }
  if (rep.files.empty()) throw InvalidArgument("timing: empty batch");
  rep.mean_ratio = sum / static_cast<double>(rep.files.size());
  rep.realtime = rep.mean_ratio <= 1.0;
  return rep;
}

}  // namespace whistler
