#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "whistler/dispersion.hpp"
#include "whistler/errors.hpp"
#include "whistler/labels.hpp"
#include "whistler/spectro.hpp"

namespace whistler {

/// Result of sliding a kernel over a spectrogram (valid lags only).
template <typename Scalar = double>
struct CorrelationSeries {
  Eigen::Vector<Scalar, Eigen::Dynamic> values_db;
  double dt = 0.0;
  double t_start = 0.0;
  double kernel_duration = 0.0;

  Eigen::Index size() const { return values_db.size(); }
  double bin_time(Eigen::Index i) const { return t_start + static_cast<double>(i) * dt; }
};

using CorrelationSeriesd = CorrelationSeries<double>;

/// Parameters of the CFAR detector family. Per side of the cell under test
/// there are g guard cells and n noise cells; the window is 2(n+g)+1 wide.
struct CfarConfig {
  int n = 12;         // noise cells per side
  int g = 10;         // guard cells per side
  double x_db = 0.5;  // dB offset above the noise estimate
  int k = 13;         // order statistic rank, 1-based into the 2n sorted powers
  int t_s = 5;        // cells trimmed from the low end
  int t_l = 3;        // cells trimmed from the high end

  int window() const { return 2 * (n + g) + 1; }

  void validate() const {
    if (n < 1) throw InvalidArgument("cfar: need n >= 1 noise cells per side");
    if (g < 0) throw InvalidArgument("cfar: guard cells must be >= 0");
    if (k < 1 || k > 2 * n) throw InvalidArgument("cfar: order statistic k must be in [1, 2n]");
    if (t_s < 0 || t_l < 0 || t_s + t_l >= 2 * n)
      throw InvalidArgument("cfar: trimming must leave at least one noise cell");
  }
};

/// Per-bin detector decisions with the adaptive threshold that produced them.
/// Bins closer than edge_margin to either end are undecided: decision false
/// and threshold +inf, which keeps decision[i] == (value[i] > threshold[i]).
template <typename Scalar = double>
struct DecisionSeries {
  Eigen::Array<bool, Eigen::Dynamic, 1> decisions;
  Eigen::Vector<Scalar, Eigen::Dynamic> thresholds_db;
  Eigen::Index edge_margin = 0;
  double dt = 0.0;
  double t_start = 0.0;

  Eigen::Index size() const { return decisions.size(); }
  bool decided(Eigen::Index i) const {
    return i >= edge_margin && i < size() - edge_margin;
  }
  double bin_time(Eigen::Index i) const { return t_start + static_cast<double>(i) * dt; }
};

using DecisionSeriesd = DecisionSeries<double>;

/// Valid cross-correlation of a [0,1]-scaled spectrogram with a kernel.
/// values[j] = sum_i,tau spec(i, j+tau) * kernel(i, tau), reported in dB.
template <typename Scalar>
CorrelationSeries<Scalar> cross_correlate(const Spectrogram<Scalar>& spec,
                                          const WhistlerKernel<Scalar>& kernel) {
  if (spec.n_freq() != kernel.n_freq())
    throw ShapeMismatch("cross_correlate: spectrogram and kernel row counts differ");
  if (std::abs(spec.df - kernel.df) > 1e-9 * kernel.df)
    throw ShapeMismatch("cross_correlate: frequency resolutions differ");
  if (std::abs(spec.dt - kernel.dt) > 1e-9 * kernel.dt)
    throw ShapeMismatch("cross_correlate: time resolutions differ");
  if (spec.n_time() < kernel.n_time())
    throw InvalidArgument("cross_correlate: spectrogram shorter than kernel");

  const Eigen::Index n_lags = spec.n_time() - kernel.n_time() + 1;
  CorrelationSeries<Scalar> out;
  out.values_db.resize(n_lags);
  out.dt = spec.dt;
  out.t_start = spec.t_start;
  out.kernel_duration = kernel.duration;
  for (Eigen::Index j = 0; j < n_lags; ++j) {
    const double v = spec.power_db.middleCols(j, kernel.n_time())
                         .cwiseProduct(kernel.matrix)
                         .template cast<double>()
                         .sum();
    out.values_db[j] =
        static_cast<Scalar>(10.0 * std::log10(std::max(v, 0.0) + kDbFloor));
  }
  return out;
}

namespace detail {

template <typename Scalar>
Eigen::ArrayXd to_linear_power(const CorrelationSeries<Scalar>& s) {
  return Eigen::pow(10.0, s.values_db.template cast<double>().array() / 10.0);
}

template <typename Scalar>
DecisionSeries<Scalar> make_decisions(const CorrelationSeries<Scalar>& s,
                                      const CfarConfig& cfg) {
  if (s.size() < cfg.window())
    throw WindowTooLarge("cfar: series shorter than the window");
  DecisionSeries<Scalar> d;
  d.decisions.setConstant(s.size(), false);
  d.thresholds_db.setConstant(s.size(), std::numeric_limits<Scalar>::infinity());
  d.edge_margin = cfg.n + cfg.g;
  d.dt = s.dt;
  d.t_start = s.t_start;
  return d;
}

/// Runs a CFAR pass where estimate(cells) maps the 2n noise-cell linear
/// powers to a noise level.
template <typename Scalar, typename Estimator>
DecisionSeries<Scalar> run_cfar(const CorrelationSeries<Scalar>& s,
                                const CfarConfig& cfg, Estimator estimate) {
  cfg.validate();
  auto d = make_decisions(s, cfg);
  const Eigen::ArrayXd p = to_linear_power(s);
  const Eigen::Index margin = d.edge_margin;
  std::vector<double> cells(2 * cfg.n);
  for (Eigen::Index i = margin; i < s.size() - margin; ++i) {
    for (int c = 0; c < cfg.n; ++c) {
      cells[c] = p[i - cfg.g - cfg.n + c];
      cells[cfg.n + c] = p[i + cfg.g + 1 + c];
    }
    const double est = estimate(cells);
    const Scalar thr = static_cast<Scalar>(10.0 * std::log10(est + kDbFloor) + cfg.x_db);
    d.thresholds_db[i] = thr;
    d.decisions[i] = s.values_db[i] > thr;
  }
  return d;
}

}  // namespace detail

/// Cell-averaging CFAR: noise estimate is the mean of the 2n noise cells.
template <typename Scalar>
DecisionSeries<Scalar> ca_cfar(const CorrelationSeries<Scalar>& s, const CfarConfig& cfg) {
  return detail::run_cfar(s, cfg, [](std::vector<double>& cells) {
    double sum = 0.0;
    for (double c : cells) sum += c;
    return sum / static_cast<double>(cells.size());
  });
}

/// Order-statistic CFAR: noise estimate is the k-th smallest noise cell.
template <typename Scalar>
DecisionSeries<Scalar> os_cfar(const CorrelationSeries<Scalar>& s, const CfarConfig& cfg) {
  return detail::run_cfar(s, cfg, [&cfg](std::vector<double>& cells) {
    std::nth_element(cells.begin(), cells.begin() + (cfg.k - 1), cells.end());
    return cells[cfg.k - 1];
  });
}

/// Trimmed-mean CFAR: sort the 2n noise cells, drop t_s lowest and t_l
/// highest, average the rest.
template <typename Scalar>
DecisionSeries<Scalar> tm_cfar(const CorrelationSeries<Scalar>& s, const CfarConfig& cfg) {
  return detail::run_cfar(s, cfg, [&cfg](std::vector<double>& cells) {
    std::sort(cells.begin(), cells.end());
    double sum = 0.0;
    const int lo = cfg.t_s, hi = static_cast<int>(cells.size()) - cfg.t_l;
    for (int c = lo; c < hi; ++c) sum += cells[c];
    return sum / static_cast<double>(hi - lo);
  });
}

/// Fusion of the three detectors: where CA is 0 the output is OS AND TM,
/// where CA is 1 it is OS OR TM. Equivalent to a 2-of-3 majority vote, so the
/// fused threshold is the median of the three thresholds.
template <typename Scalar>
DecisionSeries<Scalar> lf_cfar(const DecisionSeries<Scalar>& ca,
                               const DecisionSeries<Scalar>& os,
                               const DecisionSeries<Scalar>& tm) {
  if (ca.size() != os.size() || ca.size() != tm.size())
    throw ShapeMismatch("lf_cfar: decision series lengths differ");
  if (std::abs(ca.t_start - os.t_start) > 1e-12 || std::abs(ca.t_start - tm.t_start) > 1e-12 ||
      std::abs(ca.dt - os.dt) > 1e-15 || std::abs(ca.dt - tm.dt) > 1e-15)
    throw ShapeMismatch("lf_cfar: decision series are not aligned");

  DecisionSeries<Scalar> out;
  out.decisions = ca.decisions.select(os.decisions || tm.decisions,
                                      os.decisions && tm.decisions);
  out.edge_margin = std::max({ca.edge_margin, os.edge_margin, tm.edge_margin});
  out.dt = ca.dt;
  out.t_start = ca.t_start;
  out.thresholds_db.resize(ca.size());
  for (Eigen::Index i = 0; i < ca.size(); ++i) {
    Scalar a = ca.thresholds_db[i], b = os.thresholds_db[i], c = tm.thresholds_db[i];
    out.thresholds_db[i] = std::max(std::min(a, b), std::min(std::max(a, b), c));
    if (!out.decided(i)) {
      out.decisions[i] = false;
      out.thresholds_db[i] = std::numeric_limits<Scalar>::infinity();
    }
  }
  return out;
}

/// False-alarm probability of CA-CFAR on exponential-power noise for a given
/// number of noise cells per side and dB offset.
inline double pfa_from_xdb(int n, double x_db) {
  if (n < 1) throw InvalidArgument("pfa_from_xdb: need n >= 1");
  const double m = 2.0 * n;
  return std::pow(1.0 / (1.0 + std::pow(10.0, x_db / 10.0) / m), m);
}

/// Empirical interference / target-plus-interference statistics of a batch of
/// correlation series, with the detection-vs-false-alarm curve per threshold.
struct ThresholdStats {
  double mu_i = 0.0;       // interference mean [dB]
  double sigma_i = 0.0;    // interference std [dB]
  double mu_ti = 0.0;      // target-plus-interference mean [dB]
  double sigma_ti = 0.0;   // target-plus-interference std [dB]
  struct Point {
    double threshold_db;
    double p_fa;
    double p_d;
  };
  std::vector<Point> curve;  // thresholds ascending; p_fa and p_d non-increasing
  double recommended_threshold_db = 0.0;  // argmax of p_d - p_fa
};

/// Splits every series bin into the two populations using the truth labels
/// (a bin is target-plus-interference when its time falls inside a labelled
/// whistler's extent) and sweeps all observed values as candidate thresholds.
template <typename Scalar>
ThresholdStats threshold_stats(const std::vector<CorrelationSeries<Scalar>>& series,
                               const std::vector<std::vector<SceneLabel>>& truth) {
  if (series.size() != truth.size())
    throw InvalidArgument("threshold_stats: one label list per series required");
  std::vector<double> interference, targets;
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (Eigen::Index i = 0; i < series[s].size(); ++i) {
      const double t = series[s].bin_time(i);
      bool in_target = false;
      for (const auto& label : truth[s])
        if (t >= label.t0 && t <= label.t0 + label.duration) {
          in_target = true;
          break;
        }
      (in_target ? targets : interference)
          .push_back(static_cast<double>(series[s].values_db[i]));
    }
  }
  if (interference.empty() || targets.empty())
    throw InvalidArgument("threshold_stats: both populations must be non-empty");

  auto moments = [](const std::vector<double>& v) {
    double mu = 0.0;
    for (double x : v) mu += x;
    mu /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mu) * (x - mu);
    return std::pair<double, double>{mu, std::sqrt(var / static_cast<double>(v.size()))};
  };

  ThresholdStats st;
  std::tie(st.mu_i, st.sigma_i) = moments(interference);
  std::tie(st.mu_ti, st.sigma_ti) = moments(targets);

  std::sort(interference.begin(), interference.end());
  std::sort(targets.begin(), targets.end());
  std::vector<double> thresholds;
  thresholds.reserve(interference.size() + targets.size());
  thresholds.insert(thresholds.end(), interference.begin(), interference.end());
  thresholds.insert(thresholds.end(), targets.begin(), targets.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  auto right_tail = [](const std::vector<double>& sorted, double t) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
  };

  double best = -1.0;
  st.curve.reserve(thresholds.size());
  for (double t : thresholds) {
    const double pfa = right_tail(interference, t);
    const double pd = right_tail(targets, t);
    st.curve.push_back({t, pfa, pd});
    if (pd - pfa > best) {
      best = pd - pfa;
      st.recommended_threshold_db = t;
    }
  }
  return st;
}

/// Writes `t_s,value_db,threshold_db,decision` rows for plot reproduction.
template <typename Scalar>
void write_decision_csv(std::ostream& os, const CorrelationSeries<Scalar>& series,
                        const DecisionSeries<Scalar>& dec) {
  if (series.size() != dec.size())
    throw ShapeMismatch("write_decision_csv: series and decisions differ in length");
  os << "t_s,value_db,threshold_db,decision\n";
  const auto prec = os.precision(10);
  for (Eigen::Index i = 0; i < series.size(); ++i)
    os << series.bin_time(i) << ',' << series.values_db[i] << ','
       << dec.thresholds_db[i] << ',' << (dec.decisions[i] ? 1 : 0) << '\n';
  os.precision(prec);
}

/// Writes `t_s,value_db` rows of a correlation series.
template <typename Scalar>
void write_correlation_csv(std::ostream& os, const CorrelationSeries<Scalar>& series) {
  os << "t_s,value_db\n";
  const auto prec = os.precision(10);
  for (Eigen::Index i = 0; i < series.size(); ++i)
    os << series.bin_time(i) << ',' << series.values_db[i] << '\n';
  os.precision(prec);
}

/// Writes `threshold_db,p_fa,p_d` rows of a threshold sweep.
inline void write_threshold_stats_csv(std::ostream& os, const ThresholdStats& st) {
  os << "threshold_db,p_fa,p_d\n";
  const auto prec = os.precision(10);
  for (const auto& pt : st.curve)
    os << pt.threshold_db << ',' << pt.p_fa << ',' << pt.p_d << '\n';
  os.precision(prec);
}

}  // namespace whistler
