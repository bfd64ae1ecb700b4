#include <doctest.h>

#include <cmath>
#include <random>

#include "whistler/spectro.hpp"

using namespace whistler;

namespace {

TimeSeriesd tone(double freq, double fs, double seconds, double amplitude = 1.0) {
  TimeSeriesd ts;
  ts.fs = fs;
  ts.channel_id = "NS";
  const Eigen::Index n = static_cast<Eigen::Index>(seconds * fs);
  ts.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    ts.samples[i] = amplitude * std::cos(2.0 * M_PI * freq * i / fs);
  return ts;
}

}  // namespace

TEST_CASE("stft geometry at the 40 kHz defaults") {
  const auto ts = tone(5000.0, 40000.0, 1.0);
  const auto spec = stft(ts, 256, 256);
  CHECK(spec.dt == doctest::Approx(0.0064));
  CHECK(spec.df == doctest::Approx(156.25));
  CHECK(spec.n_freq() == 129);
  CHECK(spec.n_time() == 156);
  CHECK(spec.f_start == 0.0);
}

TEST_CASE("a pure tone concentrates in its row") {
  const auto ts = tone(5000.0, 40000.0, 0.5);
  const auto spec = stft(ts, 256, 256);
  const Eigen::Index expected_row = 32;  // 5000 / 156.25
  for (Eigen::Index j = 0; j < spec.n_time(); ++j) {
    Eigen::Index row;
    spec.power_db.col(j).maxCoeff(&row);
    CHECK(row == expected_row);
  }
}

TEST_CASE("an all-zero series sits on the dB floor") {
  TimeSeriesd ts;
  ts.fs = 40000.0;
  ts.channel_id = "NS";
  ts.samples.setZero(4096);
  const auto spec = stft(ts, 256, 256);
  const double floor_db = 10.0 * std::log10(1e-12);
  CHECK((spec.power_db.array() - floor_db).abs().maxCoeff() < 1e-9);
}

TEST_CASE("stft rejects malformed input") {
  TimeSeriesd ts;
  ts.fs = 40000.0;
  ts.samples.setZero(100);
  CHECK_THROWS_AS(stft(ts, 256, 256), InvalidArgument);  // shorter than one frame
  ts.samples.setZero(1024);
  CHECK_THROWS_AS(stft(ts, 1, 256), InvalidArgument);
  CHECK_THROWS_AS(stft(ts, 256, 0), InvalidArgument);
  ts.fs = 0.0;
  CHECK_THROWS_AS(stft(ts, 256, 256), InvalidArgument);
}

TEST_CASE("column power matches windowed time-domain power for white noise") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  TimeSeriesd ts;
  ts.fs = 40000.0;
  ts.channel_id = "NS";
  ts.samples.resize(256 * 120);
  for (Eigen::Index i = 0; i < ts.samples.size(); ++i) ts.samples[i] = dist(rng);

  const auto spec = stft(ts, 256, 256);
  REQUIRE(spec.n_time() >= 100);

  Eigen::VectorXd win(256);
  for (int i = 0; i < 256; ++i) win[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / 256.0);

  double spec_power = 0.0, time_power = 0.0;
  for (Eigen::Index j = 0; j < spec.n_time(); ++j) {
    for (Eigen::Index i = 0; i < spec.n_freq(); ++i)
      spec_power += std::pow(10.0, spec.power_db(i, j) / 10.0) - 1e-12;
    time_power += (ts.samples.segment(j * 256, 256).array() * win.array()).square().sum();
  }
  CHECK(spec_power == doctest::Approx(time_power).epsilon(0.01));
}

TEST_CASE("crop keeps 52 rows for the 1.5-9.5 kHz band") {
  const auto ts = tone(5000.0, 40000.0, 1.0);
  const auto spec = stft(ts, 256, 256);
  const auto c = crop(spec, 1500.0, 9500.0);
  CHECK(c.n_freq() == 52);
  CHECK(c.f_start == doctest::Approx(10 * 156.25));
  CHECK(c.n_time() == spec.n_time());
  CHECK(c.dt == spec.dt);
}

TEST_CASE("crop with the full band is the identity") {
  const auto ts = tone(5000.0, 40000.0, 0.25);
  const auto spec = stft(ts, 256, 256);
  const auto c = crop(spec, spec.f_start, spec.f_start + spec.n_freq() * spec.df);
  CHECK(c.n_freq() == spec.n_freq());
  CHECK(c.power_db == spec.power_db);
}

TEST_CASE("crop rejects inverted or disjoint bands") {
  const auto ts = tone(5000.0, 40000.0, 0.25);
  const auto spec = stft(ts, 256, 256);
  CHECK_THROWS_AS(crop(spec, 9500.0, 1500.0), InvalidArgument);
  CHECK_THROWS_AS(crop(spec, 30000.0, 40000.0), InvalidArgument);
}

TEST_CASE("nested crops compose") {
  const auto ts = tone(5000.0, 40000.0, 0.25);
  const auto spec = stft(ts, 256, 256);
  const auto outer = crop(spec, 1000.0, 12000.0);
  const auto nested = crop(outer, 1500.0, 9500.0);
  const auto direct = crop(spec, 1500.0, 9500.0);
  CHECK(nested.n_freq() == direct.n_freq());
  CHECK(nested.f_start == doctest::Approx(direct.f_start));
  CHECK(nested.power_db == direct.power_db);
}

TEST_CASE("stft instantiates for float as well") {
  TimeSeries<float> ts;
  ts.fs = 40000.0;
  ts.channel_id = "NS";
  ts.samples.resize(2048);
  for (Eigen::Index i = 0; i < ts.samples.size(); ++i)
    ts.samples[i] = std::cos(2.0f * float(M_PI) * 5000.0f * i / 40000.0f);
  const auto spec = stft(ts, 256, 256);
  CHECK(spec.n_freq() == 129);
  Eigen::Index row;
  spec.power_db.col(0).maxCoeff(&row);
  CHECK(row == 32);
}
