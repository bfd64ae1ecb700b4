#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "whistler/errors.hpp"

namespace whistler {

/// Floor added inside every dB conversion so silent bins stay finite.
inline constexpr double kDbFloor = 1e-12;

/// Raw single-channel signal.
template <typename Scalar = double>
struct TimeSeries {
  Eigen::Vector<Scalar, Eigen::Dynamic> samples;
  double fs = 0.0;  // sample rate [Hz]
  std::string channel_id;

  double duration() const { return static_cast<double>(samples.size()) / fs; }

  void validate() const {
    if (!(fs > 0.0)) throw InvalidArgument("time series needs fs > 0");
    if (samples.size() == 0) throw InvalidArgument("time series is empty");
    if (!samples.allFinite()) throw InvalidArgument("time series has non-finite samples");
  }
};

using TimeSeriesd = TimeSeries<double>;

/// A rectangular region in physical time-frequency coordinates.
struct TimeFreqBox {
  double t0 = 0.0;
  double t1 = 0.0;
  double f_lo = 0.0;
  double f_hi = 0.0;
};

/// dB-magnitude time-frequency matrix. Row r is the FFT bin centred at
/// f_start + r*df (covering +-df/2); column c starts at t_start + c*dt.
template <typename Scalar = double>
struct Spectrogram {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> power_db;
  double dt = 0.0;       // s per column
  double df = 0.0;       // Hz per row
  double f_start = 0.0;  // frequency of row 0 [Hz]
  double t_start = 0.0;  // time of column 0 [s]

  Eigen::Index n_freq() const { return power_db.rows(); }
  Eigen::Index n_time() const { return power_db.cols(); }
  double row_freq(Eigen::Index r) const { return f_start + static_cast<double>(r) * df; }
  double col_time(Eigen::Index c) const { return t_start + static_cast<double>(c) * dt; }
};

using Spectrogramd = Spectrogram<double>;

enum class Window { Hann, Rect };

namespace detail {

template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> make_window(Window w, int n) {
  Eigen::Vector<Scalar, Eigen::Dynamic> v(n);
  switch (w) {
    case Window::Hann:
      for (int i = 0; i < n; ++i)
        v[i] = static_cast<Scalar>(0.5 - 0.5 * std::cos(2.0 * M_PI * i / n));
      break;
    case Window::Rect:
      v.setOnes();
      break;
  }
  return v;
}

}  // namespace detail

/// Short-time Fourier transform, one-sided, in dB.
///
/// Bin (i, j) holds 10*log10(P + 1e-12) where P = c_i |X_j(f_i)|^2 / nfft and
/// c_i doubles interior bins, so the linear powers of one column sum to the
/// windowed time-domain power of that frame (Parseval).
template <typename Scalar = double>
Spectrogram<Scalar> stft(const TimeSeries<Scalar>& ts, int nfft, int hop,
                         Window window = Window::Hann) {
  ts.validate();
  if (nfft < 2 || hop < 1) throw InvalidArgument("stft: need nfft >= 2 and hop >= 1");
  if (ts.samples.size() < nfft)
    throw InvalidArgument("stft: series shorter than one frame");

  const Eigen::Index n_time = (ts.samples.size() - nfft) / hop + 1;
  const Eigen::Index n_freq = nfft / 2 + 1;
  const auto win = detail::make_window<Scalar>(window, nfft);

  Spectrogram<Scalar> spec;
  spec.power_db.resize(n_freq, n_time);
  spec.dt = static_cast<double>(hop) / ts.fs;
  spec.df = ts.fs / static_cast<double>(nfft);
  spec.f_start = 0.0;
  spec.t_start = 0.0;

  Eigen::FFT<Scalar> fft;
  std::vector<Scalar> frame(nfft);
  std::vector<std::complex<Scalar>> bins;
  for (Eigen::Index j = 0; j < n_time; ++j) {
    const Eigen::Index off = j * hop;
    for (int i = 0; i < nfft; ++i) frame[i] = ts.samples[off + i] * win[i];
    fft.fwd(bins, frame);
    for (Eigen::Index i = 0; i < n_freq; ++i) {
      const double c = (i == 0 || i == n_freq - 1) ? 1.0 : 2.0;
      const double p = c * std::norm(bins[i]) / nfft;
      spec.power_db(i, j) = static_cast<Scalar>(10.0 * std::log10(p + kDbFloor));
    }
  }
  return spec;
}

/// Keeps the rows whose bin (centre +- df/2) intersects [f_lo, f_hi].
///
/// With the 156.25 Hz grid this maps 1.5-9.5 kHz onto 52 rows. Nested crops
/// compose exactly.
template <typename Scalar>
Spectrogram<Scalar> crop(const Spectrogram<Scalar>& spec, double f_lo, double f_hi) {
  if (!(f_lo < f_hi)) throw InvalidArgument("crop: need f_lo < f_hi");
  const double top = spec.f_start + static_cast<double>(spec.n_freq()) * spec.df;
  if (f_hi <= spec.f_start || f_lo >= top)
    throw InvalidArgument("crop: band does not intersect the spectrogram");

  auto row_of = [&](double f) {
    return static_cast<Eigen::Index>(std::floor((f - spec.f_start) / spec.df + 0.5 + 1e-9));
  };
  const Eigen::Index r0 = std::max<Eigen::Index>(row_of(f_lo), 0);
  const Eigen::Index r1 = std::min<Eigen::Index>(row_of(f_hi), spec.n_freq() - 1);
  if (r0 > r1) throw InvalidArgument("crop: empty band");

  Spectrogram<Scalar> out;
  out.power_db = spec.power_db.middleRows(r0, r1 - r0 + 1);
  out.dt = spec.dt;
  out.df = spec.df;
  out.f_start = spec.f_start + static_cast<double>(r0) * spec.df;
  out.t_start = spec.t_start;
  return out;
}

}  // namespace whistler
