#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "whistler/errors.hpp"
#include "whistler/spectro.hpp"

namespace whistler {

/// Noise-reduction transform applied to a spectrogram before correlation.
enum class TransformKind { None, Zscore, ConstantDetrend, LinearDetrend };

/// Which 1-D cuts a transform runs over. Time = per frequency row across
/// time (the default; flattens transmitter lines), Frequency = per column.
enum class Axis { Time, Frequency };

inline const char* to_string(TransformKind k) {
  switch (k) {
    case TransformKind::None: return "none";
    case TransformKind::Zscore: return "zscore";
    case TransformKind::ConstantDetrend: return "cdetrend";
    case TransformKind::LinearDetrend: return "ldetrend";
  }
  return "none";
}

inline TransformKind parse_transform(const std::string& s) {
  if (s == "none") return TransformKind::None;
  if (s == "zscore") return TransformKind::Zscore;
  if (s == "cdetrend") return TransformKind::ConstantDetrend;
  if (s == "ldetrend") return TransformKind::LinearDetrend;
  throw InvalidArgument("unknown transform '" + s + "' (use none|zscore|cdetrend|ldetrend)");
}

namespace detail {

template <typename Matrix>
void zscore_inplace(Matrix& m) {
  using Scalar = typename Matrix::Scalar;
  const auto mu = m.array().rowwise().mean().eval();
  m.array().colwise() -= mu;
  const auto sigma = (m.array().square().rowwise().mean()).sqrt().eval();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double floor = 1e-13 * std::max(1.0, std::abs(static_cast<double>(mu[r])));
    if (!(static_cast<double>(sigma[r]) > floor))
      throw DegenerateRow("zscore: constant row " + std::to_string(r));
  }
  m.array().colwise() /= sigma.template cast<Scalar>();
}

template <typename Matrix>
void detrend_constant_inplace(Matrix& m) {
  m.array().colwise() -= m.array().rowwise().mean().eval();
}

template <typename Matrix>
void detrend_linear_inplace(Matrix& m) {
  using Scalar = typename Matrix::Scalar;
  const Eigen::Index n = m.cols();
  if (n < 2) throw InvalidArgument("linear detrend needs at least 2 bins per cut");
  Eigen::Array<Scalar, 1, Eigen::Dynamic> xc(n);
  const double xbar = (n - 1) / 2.0;
  for (Eigen::Index j = 0; j < n; ++j) xc[j] = static_cast<Scalar>(j - xbar);
  const double sxx = double(n) * (double(n) * n - 1.0) / 12.0;

  detrend_constant_inplace(m);
  const auto slope =
      ((m.array().rowwise() * xc).rowwise().sum() / static_cast<Scalar>(sxx)).eval();
  m.noalias() -= slope.matrix() * xc.matrix();
}

}  // namespace detail

/// Replaces every frequency row by (x - mu_row) / sigma_row (population sigma).
/// Output rows have mean 0 and standard deviation 1.
template <typename Scalar>
Spectrogram<Scalar> zscore_rows(Spectrogram<Scalar> spec) {
  detail::zscore_inplace(spec.power_db);
  return spec;
}

/// Subtracts each frequency row's mean; spreads are preserved.
template <typename Scalar>
Spectrogram<Scalar> detrend_constant_rows(Spectrogram<Scalar> spec) {
  detail::detrend_constant_inplace(spec.power_db);
  return spec;
}

/// Subtracts each frequency row's least-squares line over the bin index; the
/// residual is orthogonal to both the constant and the ramp regressor.
template <typename Scalar>
Spectrogram<Scalar> detrend_linear_rows(Spectrogram<Scalar> spec) {
  detail::detrend_linear_inplace(spec.power_db);
  return spec;
}

/// Applies the requested transform along the requested axis.
template <typename Scalar>
Spectrogram<Scalar> apply_transform(Spectrogram<Scalar> spec, TransformKind kind,
                                    Axis axis = Axis::Time) {
  if (kind == TransformKind::None) return spec;
  if (axis == Axis::Time) {
    switch (kind) {
      case TransformKind::Zscore: detail::zscore_inplace(spec.power_db); break;
      case TransformKind::ConstantDetrend: detail::detrend_constant_inplace(spec.power_db); break;
      case TransformKind::LinearDetrend: detail::detrend_linear_inplace(spec.power_db); break;
      default: break;
    }
  } else {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> t = spec.power_db.transpose();
    switch (kind) {
      case TransformKind::Zscore: detail::zscore_inplace(t); break;
      case TransformKind::ConstantDetrend: detail::detrend_constant_inplace(t); break;
      case TransformKind::LinearDetrend: detail::detrend_linear_inplace(t); break;
      default: break;
    }
    spec.power_db = t.transpose();
  }
  return spec;
}

/// Mean and population standard deviation over every entry.
template <typename Scalar>
std::pair<double, double> matrix_mean_std(const Spectrogram<Scalar>& spec) {
  const double mu = spec.power_db.template cast<double>().mean();
  const double var =
      (spec.power_db.template cast<double>().array() - mu).square().mean();
  return {mu, std::sqrt(var)};
}

/// Clamps values to [mu - 4 sigma, mu + 4 sigma] and maps them affinely onto
/// [0, 1]. Monotone, so every argmax location is preserved.
template <typename Scalar>
Spectrogram<Scalar> scale_clamp(Spectrogram<Scalar> spec, double mu, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("scale_clamp: sigma must be positive");
  const Scalar lo = static_cast<Scalar>(mu - 4.0 * sigma);
  const Scalar hi = static_cast<Scalar>(mu + 4.0 * sigma);
  const Scalar span = hi - lo;
  spec.power_db =
      ((spec.power_db.array().max(lo).min(hi) - lo) / span).matrix();
  return spec;
}

/// How snr() interprets the spectrogram entries.
enum class SnrDomain {
  Decibel,          // entries are dB; power = 10^(x/10)
  LinearMagnitude,  // entries are linear magnitudes; power = x^2
};

/// Signal-to-noise summary over marked signal regions.
struct SnrReport {
  double snr_db = 0.0;
  double signal_power = 0.0;
  double noise_power = 0.0;
  std::vector<TimeFreqBox> boxes;
};

/// Signal power is the per-cell power averaged over the union of the boxes;
/// noise power is the whole matrix with those cells zeroed, averaged over all
/// cells. Cells covered by several boxes count once.
template <typename Scalar>
SnrReport snr(const Spectrogram<Scalar>& spec, const std::vector<TimeFreqBox>& boxes,
              SnrDomain domain = SnrDomain::Decibel) {
  if (boxes.empty()) throw InvalidArgument("snr: need at least one signal box");
  const Eigen::Index H = spec.n_freq(), W = spec.n_time();

  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask(H, W);
  mask.setConstant(false);
  for (const auto& b : boxes) {
    if (!(b.t1 > b.t0) || !(b.f_hi > b.f_lo))
      throw InvalidArgument("snr: box must have positive area");
    // Rows are bin centres, columns are frame starts.
    auto row_of = [&](double f) {
      return static_cast<Eigen::Index>(std::floor((f - spec.f_start) / spec.df + 0.5 + 1e-9));
    };
    auto col_of = [&](double t) {
      return static_cast<Eigen::Index>(std::floor((t - spec.t_start) / spec.dt + 1e-9));
    };
    const Eigen::Index r0 = row_of(b.f_lo);
    const Eigen::Index r1 = row_of(b.f_hi);
    const Eigen::Index c0 = col_of(b.t0);
    const Eigen::Index c1 = col_of(b.t1);
    if (r1 < 0 || c1 < 0 || r0 >= H || c0 >= W)
      throw InvalidArgument("snr: box outside the spectrogram");
    mask.block(std::max<Eigen::Index>(r0, 0), std::max<Eigen::Index>(c0, 0),
               std::min(r1, H - 1) - std::max<Eigen::Index>(r0, 0) + 1,
               std::min(c1, W - 1) - std::max<Eigen::Index>(c0, 0) + 1)
        .setConstant(true);
  }

  const Eigen::Index area = mask.count();
  if (area == H * W)
    throw InvalidArgument("snr: boxes cover the entire spectrogram, no noise region");

  Eigen::ArrayXXd power = spec.power_db.template cast<double>().array();
  if (domain == SnrDomain::Decibel)
    power = Eigen::pow(10.0, power / 10.0);
  else
    power = power.square();

  const double signal_sum = mask.select(power, 0.0).sum();
  const double noise_sum = mask.select(0.0, power).sum();

  SnrReport rep;
  rep.boxes = boxes;
  rep.signal_power = signal_sum / static_cast<double>(area);
  rep.noise_power = noise_sum / static_cast<double>(H * W);
  rep.snr_db = 10.0 * std::log10(rep.signal_power / (rep.noise_power + kDbFloor));
  return rep;
}

}  // namespace whistler
