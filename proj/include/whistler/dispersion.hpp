#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "whistler/errors.hpp"

namespace whistler {

/// Bernard-model parameters defining one whistler shape.
///
/// The model relates frequency f to travel time t through the nose frequency
/// f_n, the zero dispersion d0 and the normalised electron gyrofrequency
/// lambda_n; [f_min, f_max] is the band over which the kernel is rasterized.
struct DispersionParams {
  double f_n = 25000.0;    // nose frequency [Hz]
  double d0 = 80.0;        // zero dispersion [s^(1/2)]
  double lambda_n = 0.35;  // normalised electron gyrofrequency, dimensionless
  double f_min = 1500.0;   // lower band edge [Hz]
  double f_max = 9500.0;   // upper band edge [Hz]

  /// True when d0 lies in the studied [20, 80] range. Values outside are
  /// accepted but callers may want to warn.
  bool d0_in_studied_range() const { return d0 >= 20.0 && d0 <= 80.0; }

  void validate() const {
    if (!(f_min > 0.0) || !(f_max > f_min))
      throw InvalidArgument("dispersion band requires 0 < f_min < f_max");
    if (!(f_max < f_n))
      throw InvalidArgument("dispersion band must stay below the nose frequency");
    if (!(lambda_n > 0.0) || !(lambda_n < 1.0))
      throw InvalidArgument("lambda_n must lie in (0, 1)");
    if (!(lambda_n * (f_max / f_n) < 1.0))
      throw InvalidArgument("lambda_n * (f_max / f_n) must stay below 1");
    if (!(d0 > 0.0)) throw InvalidArgument("d0 must be positive");
  }
};

/// Travel time t(f) of the whistler component at frequency f [Hz].
///
/// t = d0 / ((1+L) sqrt(f)) * ((1+L) - (3L-1)(f/f_n)) / (1 - L (f/f_n))
/// with L = lambda_n. Strictly positive on the valid domain.
inline double travel_time(const DispersionParams& p, double f) {
  if (!(f > 0.0)) throw DomainError("travel_time: frequency must be positive");
  const double x = f / p.f_n;
  const double den = 1.0 - p.lambda_n * x;
  if (!(den > 0.0))
    throw DomainError("travel_time: 1 - lambda_n*(f/f_n) must stay positive");
  const double lp1 = 1.0 + p.lambda_n;
  return p.d0 / (lp1 * std::sqrt(f)) * (lp1 - (3.0 * p.lambda_n - 1.0) * x) / den;
}

/// Rasterized whistler trace on a spectrogram grid.
///
/// matrix is n_freq x n_time with magnitudes in [0, 1]; row r is centred at
/// f_min + (r + 0.5) * df (top row clamped to f_max), column c at time c * dt.
/// t = 0 is the arrival of the highest frequency, i.e. the leading edge.
template <typename Scalar = double>
struct WhistlerKernel {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix;
  double dt = 0.0;  // s per time bin
  double df = 0.0;  // Hz per frequency row
  double f_min = 0.0;
  double f_max = 0.0;
  double duration = 0.0;  // (n_time - 1) * dt
  double d0 = 0.0;        // zero dispersion the kernel was built from

  Eigen::Index n_freq() const { return matrix.rows(); }
  Eigen::Index n_time() const { return matrix.cols(); }
  double row_freq(Eigen::Index r) const {
    return std::min(f_min + (static_cast<double>(r) + 0.5) * df, f_max);
  }
};

using WhistlerKerneld = WhistlerKernel<double>;

/// Number of frequency rows a band [f_lo, f_hi] occupies on a grid of pitch df.
inline int band_row_count(double f_lo, double f_hi, double df) {
  return static_cast<int>(std::floor((f_hi - f_lo) / df + 1e-9)) + 1;
}

/// Rasterizes the dispersion curve into a kernel with time pitch dt and
/// frequency pitch df. Each row marks the bin nearest to
/// travel_time(f_row) - travel_time(f_max), magnitude 1 on the curve and a
/// sigma = 1 bin Gaussian across +-band_smoothing bins.
template <typename Scalar = double>
WhistlerKernel<Scalar> rasterize_kernel(const DispersionParams& p, double dt,
                                        double df, int band_smoothing = 1) {
  p.validate();
  if (!(dt > 0.0) || !(df > 0.0))
    throw InvalidArgument("rasterize_kernel: dt and df must be positive");
  if (band_smoothing < 0)
    throw InvalidArgument("rasterize_kernel: band_smoothing must be >= 0");

  const int n_rows = band_row_count(p.f_min, p.f_max, df);
  const double t_ref = travel_time(p, p.f_max);
  const double span = travel_time(p, p.f_min) - t_ref;
  const int n_cols = static_cast<int>(std::floor(span / dt)) + 1;

  WhistlerKernel<Scalar> k;
  k.matrix.setZero(n_rows, n_cols);
  k.dt = dt;
  k.df = df;
  k.f_min = p.f_min;
  k.f_max = p.f_max;
  k.duration = (n_cols - 1) * dt;
  k.d0 = p.d0;

  for (int r = 0; r < n_rows; ++r) {
    const double fr = k.row_freq(r);
    const double offset = travel_time(p, fr) - t_ref;
    const int c0 = std::clamp(static_cast<int>(std::lround(offset / dt)), 0,
                              n_cols - 1);
    for (int d = -band_smoothing; d <= band_smoothing; ++d) {
      const int c = c0 + d;
      if (c < 0 || c >= n_cols) continue;
      const Scalar mag = static_cast<Scalar>(std::exp(-0.5 * double(d) * double(d)));
      k.matrix(r, c) = std::max(k.matrix(r, c), mag);
    }
  }
  return k;
}

/// One kernel per d0 value, sharing every other parameter of the template,
/// sorted by ascending duration.
template <typename Scalar = double>
std::vector<WhistlerKernel<Scalar>> kernel_grid(const std::vector<double>& d0_values,
                                                DispersionParams tpl, double dt,
                                                double df, int band_smoothing = 1) {
  if (d0_values.empty())
    throw InvalidArgument("kernel_grid: need at least one d0 value");
  std::vector<WhistlerKernel<Scalar>> grid;
  grid.reserve(d0_values.size());
  for (double d0 : d0_values) {
    tpl.d0 = d0;
    grid.push_back(rasterize_kernel<Scalar>(tpl, dt, df, band_smoothing));
  }
  std::stable_sort(grid.begin(), grid.end(),
                   [](const auto& a, const auto& b) { return a.duration < b.duration; });
  return grid;
}

/// Writes the nonzero kernel cells as `freq_hz,time_s,magnitude` rows,
/// ascending in frequency then time.
template <typename Scalar>
void write_kernel_csv(std::ostream& os, const WhistlerKernel<Scalar>& k) {
  os << "freq_hz,time_s,magnitude\n";
  const auto prec = os.precision(10);
  for (Eigen::Index r = 0; r < k.n_freq(); ++r)
    for (Eigen::Index c = 0; c < k.n_time(); ++c)
      if (k.matrix(r, c) != Scalar(0))
        os << k.row_freq(r) << ',' << c * k.dt << ',' << k.matrix(r, c) << '\n';
  os.precision(prec);
}

}  // namespace whistler
