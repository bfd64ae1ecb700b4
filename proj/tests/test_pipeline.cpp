#include <doctest.h>

#include <cmath>

#include "whistler/pipeline.hpp"
#include "whistler/scenegen.hpp"

using namespace whistler;

namespace {

WhistlerKerneld default_kernel(double d0 = 80.0) {
  DispersionParams p;
  p.d0 = d0;
  return rasterize_kernel(p, 0.0064, 156.25);
}

SceneSpec scene_with(std::vector<std::pair<double, double>> placements /* t0, d0 */,
                     std::uint64_t seed, double snr_db = 10.0) {
  SceneSpec spec;
  spec.rng_seed = seed;
  for (auto [t0, d0] : placements) {
    SceneWhistler w;
    w.t0 = t0;
    w.params.d0 = d0;
    w.amplitude = whistler_amplitude_for_snr(snr_db, spec.noise_floor);
    spec.whistlers.push_back(w);
  }
  return spec;
}

CcswOptions options_with_grid() {
  CcswOptions opts;
  DispersionParams tpl;
  opts.duration_grid = kernel_grid({20.0, 35.0, 50.0, 65.0, 80.0}, tpl, 0.0064, 156.25);
  opts.source_file = "test.vlfr";
  opts.config_digest = "test";
  return opts;
}

}  // namespace

TEST_CASE("grouping collapses positives closer than the resolution") {
  CorrelationSeriesd series;
  series.dt = 0.01;
  series.t_start = 0.0;
  series.values_db.setConstant(300, 0.0);
  DecisionSeriesd dec;
  dec.decisions.setConstant(300, false);
  dec.thresholds_db.setConstant(300, 100.0);
  dec.edge_margin = 0;
  dec.dt = 0.01;
  dec.t_start = 0.0;

  // Positives at 2.37, 2.38 and 2.59 s with merits 0.8, 0.9, 0.7 dB.
  series.values_db[237] = 0.8;
  series.values_db[238] = 0.9;
  series.values_db[259] = 0.7;
  for (Eigen::Index i : {237, 238, 259}) {
    dec.decisions[i] = true;
    dec.thresholds_db[i] = -1.0;
  }

  const auto peaks = group_detections(dec, series, 0.1);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].t == doctest::Approx(2.38));
  CHECK(peaks[0].merit_db == doctest::Approx(0.9));
  CHECK(peaks[1].t == doctest::Approx(2.59));
  CHECK(peaks[1].merit_db == doctest::Approx(0.7));
}

TEST_CASE("grouping: no positives, and the exact-resolution boundary splits") {
  CorrelationSeriesd series;
  series.dt = 0.05;
  series.t_start = 0.0;
  series.values_db.setConstant(100, 0.0);
  DecisionSeriesd dec;
  dec.decisions.setConstant(100, false);
  dec.thresholds_db.setConstant(100, 100.0);
  dec.edge_margin = 0;
  dec.dt = 0.05;
  dec.t_start = 0.0;

  CHECK(group_detections(dec, series, 0.1).empty());

  // Positives exactly 0.1 s apart: two detections (merge needs gap < 0.1).
  dec.decisions[10] = true;
  dec.decisions[12] = true;
  const auto peaks = group_detections(dec, series, 0.1);
  CHECK(peaks.size() == 2);
}

TEST_CASE("duration estimation recovers the planted kernel") {
  const auto grid = options_with_grid().duration_grid;

  for (double d0 : {35.0, 80.0}) {
    const auto planted = default_kernel(d0);
    Spectrogramd spec;
    spec.dt = 0.0064;
    spec.df = 156.25;
    spec.f_start = 1406.25;
    spec.t_start = 0.0;
    spec.power_db = Eigen::MatrixXd::Zero(planted.n_freq(), 400);
    const Eigen::Index at = 120;
    spec.power_db.middleCols(at, planted.n_time()) = planted.matrix;

    const auto est = estimate_duration(spec, spec.col_time(at), grid);
    REQUIRE(est.d0.has_value());
    CHECK(*est.d0 == d0);
    CHECK(est.t_end == doctest::Approx(spec.col_time(at) + planted.duration));
    CHECK_FALSE(est.clipped);
  }
}

TEST_CASE("duration estimation with a single kernel always returns its span") {
  const auto k = default_kernel(50.0);
  Spectrogramd spec;
  spec.dt = 0.0064;
  spec.df = 156.25;
  spec.t_start = 0.0;
  spec.power_db = Eigen::MatrixXd::Random(k.n_freq(), 300).cwiseAbs();
  const auto est = estimate_duration(spec, 0.5, {k});
  REQUIRE(est.d0.has_value());
  CHECK(*est.d0 == 50.0);
  CHECK(est.t_end == doctest::Approx(0.5 + k.duration));
}

TEST_CASE("duration estimation clips at the spectrogram end and flags it") {
  const auto k = default_kernel(80.0);
  Spectrogramd spec;
  spec.dt = 0.0064;
  spec.df = 156.25;
  spec.t_start = 0.0;
  spec.power_db = Eigen::MatrixXd::Zero(k.n_freq(), 200);
  const double late = spec.col_time(150);
  const auto est = estimate_duration(spec, late, {k});
  CHECK(est.clipped);

  CHECK_THROWS_AS(estimate_duration(spec, -1.0, {k}), InvalidArgument);
  CHECK_THROWS_AS(estimate_duration(spec, 1e9, {k}), InvalidArgument);
  CHECK_THROWS_AS(estimate_duration(spec, 0.5, {}), InvalidArgument);
}

TEST_CASE("the pipeline finds three closely spaced whistlers") {
  // Placements mirroring a cluster of overlapping whistlers.
  const auto spec = scene_with({{2.3, 80.0}, {2.4, 80.0}, {2.6, 80.0}}, 2025, 13.0);
  const auto [ts, labels] = generate_scene(spec);

  const auto report =
      run_ccsw(ts, default_kernel(), TransformKind::Zscore, CfarConfig{}, options_with_grid());

  REQUIRE(report.detections.size() >= 3);
  for (double expected : {2.3, 2.4, 2.6}) {
    bool found = false;
    for (const auto& d : report.detections)
      if (std::abs(d.t_start - expected) <= 0.05) found = true;
    CHECK(found);
  }
  for (const auto& d : report.detections) {
    CHECK(d.t_start < d.t_end);
    CHECK(d.f_lo == 1500.0);
    CHECK(d.f_hi == 9500.0);
    CHECK(std::isfinite(d.merit_db));
  }
  CHECK(report.sample_duration == doctest::Approx(6.0));
  CHECK(report.processing_time > 0.0);
  CHECK(report.source_file == "test.vlfr");
}

TEST_CASE("detections are sorted, one per output-resolution cell") {
  const auto spec = scene_with({{1.0, 80.0}, {2.5, 35.0}, {4.0, 80.0}}, 77);
  const auto [ts, labels] = generate_scene(spec);
  const auto report =
      run_ccsw(ts, default_kernel(), TransformKind::Zscore, CfarConfig{}, options_with_grid());
  auto cell = [](double t) { return static_cast<long>(std::floor(t / 0.1 + 0.5 + 1e-9)); };
  for (std::size_t i = 1; i < report.detections.size(); ++i) {
    CHECK(report.detections[i].t_start > report.detections[i - 1].t_start);
    CHECK(cell(report.detections[i].t_start) > cell(report.detections[i - 1].t_start));
  }
}

TEST_CASE("pipeline errors carry the failing stage") {
  TimeSeriesd short_ts;
  short_ts.fs = 40000.0;
  short_ts.channel_id = "NS";
  short_ts.samples.setZero(64);  // shorter than one frame

  try {
    run_ccsw(short_ts, default_kernel(), TransformKind::Zscore, CfarConfig{});
    FAIL("expected a pipeline error");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "stft");
  }
}

TEST_CASE("identical input and config give identical reports") {
  const auto spec = scene_with({{2.0, 80.0}}, 5);
  const auto [ts, labels] = generate_scene(spec);
  const auto opts = options_with_grid();
  const auto a = run_ccsw(ts, default_kernel(), TransformKind::Zscore, CfarConfig{}, opts);
  const auto b = run_ccsw(ts, default_kernel(), TransformKind::Zscore, CfarConfig{}, opts);
  REQUIRE(a.detections.size() == b.detections.size());
  for (std::size_t i = 0; i < a.detections.size(); ++i) {
    CHECK(a.detections[i].t_start == b.detections[i].t_start);
    CHECK(a.detections[i].t_end == b.detections[i].t_end);
    CHECK(a.detections[i].merit_db == b.detections[i].merit_db);
  }
}

TEST_CASE("the trace exposes stages and preprocessing happens after cropping") {
  SceneSpec scene = scene_with({{2.0, 80.0}}, 31);
  // A strong out-of-band tone: it must not influence in-band row statistics,
  // which it would if the transform ran before the crop.
  scene.tone_freqs = {15000.0};
  scene.tone_amplitude = 8.0;
  const auto [ts, labels] = generate_scene(scene);

  PipelineTrace trace;
  const auto report = run_ccsw(ts, default_kernel(), TransformKind::Zscore, CfarConfig{},
                               options_with_grid(), &trace);

  CHECK(trace.full_db.n_freq() == 129);
  CHECK(trace.cropped.n_freq() == 52);
  CHECK(trace.preprocessed.n_freq() == 52);
  CHECK(trace.scaled.n_freq() == 52);
  CHECK(trace.correlation.size() ==
        trace.scaled.n_time() - default_kernel().n_time() + 1);
  CHECK(trace.lf.size() == trace.correlation.size());

  // The preprocessed stage equals the transform applied to the cropped stage.
  const auto manual = zscore_rows(trace.cropped);
  CHECK(((manual.power_db - trace.preprocessed.power_db).array().abs().maxCoeff()) < 1e-9);

  // Scaled output is inside [0, 1].
  CHECK(trace.scaled.power_db.minCoeff() >= 0.0);
  CHECK(trace.scaled.power_db.maxCoeff() <= 1.0);
}

TEST_CASE("config digest is stable and collision-sensitive") {
  const auto a = digest_string("transform=zscore;n=12");
  const auto b = digest_string("transform=zscore;n=12");
  const auto c = digest_string("transform=zscore;n=13");
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.size() == 16);
}
