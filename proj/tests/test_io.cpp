#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "whistler/report_io.hpp"
#include "whistler/scenegen.hpp"
#include "whistler/vlfr.hpp"

using namespace whistler;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("whistler_io_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

TimeSeriesd ramp_series(Eigen::Index n, double fs = 40000.0) {
  TimeSeriesd ts;
  ts.fs = fs;
  ts.channel_id = "NS";
  ts.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) ts.samples[i] = std::sin(0.001 * i) * (i % 7);
  return ts;
}

}  // namespace

TEST_CASE("vlfr round-trips a single channel bit-exactly") {
  TempDir tmp;
  const auto ts = ramp_series(10000);
  const auto path = tmp.file("a.vlfr");
  write_vlfr(path, ts);

  const auto info = vlfr_info(path);
  CHECK(info.sample_rate == 40000);
  CHECK(info.channels == 1);
  CHECK(info.samples_per_channel == 10000);

  const auto back = read_vlfr(path);
  CHECK(back.fs == 40000.0);
  CHECK(back.channel_id == "NS");
  REQUIRE(back.samples.size() == ts.samples.size());
  // Values go through f32; compare against the f32 cast.
  for (Eigen::Index i = 0; i < ts.samples.size(); ++i)
    CHECK(back.samples[i] == static_cast<double>(static_cast<float>(ts.samples[i])));

  // The written file has the documented size: 19-byte header + 4 bytes/sample.
  CHECK(fs::file_size(path) == 19 + 4 * 10000);
}

TEST_CASE("vlfr serves multiple channels by index") {
  TempDir tmp;
  auto ns = ramp_series(500);
  auto ew = ramp_series(500);
  ew.samples.array() += 1.0;
  ew.channel_id = "EW";
  const auto path = tmp.file("two.vlfr");
  write_vlfr(path, std::vector<TimeSeriesd>{ns, ew});

  const auto c0 = read_vlfr(path, 0);
  const auto c1 = read_vlfr(path, 1);
  CHECK(c0.channel_id == "NS");
  CHECK(c1.channel_id == "EW");
  CHECK(c1.samples[3] != c0.samples[3]);
  CHECK_THROWS_AS(read_vlfr(path, 2), InvalidArgument);
}

TEST_CASE("vlfr writes are byte-identical across calls") {
  TempDir tmp;
  SceneSpec spec;
  spec.rng_seed = 77;
  const auto [ts, labels] = generate_scene(spec);
  const auto p1 = tmp.file("s1.vlfr");
  const auto p2 = tmp.file("s2.vlfr");
  write_vlfr(p1, ts);
  write_vlfr(p2, ts);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::stringstream b1, b2;
  b1 << f1.rdbuf();
  b2 << f2.rdbuf();
  CHECK(b1.str() == b2.str());
}

TEST_CASE("vlfr rejects damaged input") {
  TempDir tmp;
  const auto path = tmp.file("bad.vlfr");
  {
    std::ofstream os(path, std::ios::binary);
    os << "WAVExxxx";
  }
  CHECK_THROWS_AS(read_vlfr(path), IoError);
  CHECK_THROWS_AS(vlfr_info(tmp.file("missing.vlfr")), IoError);

  // Truncated payload.
  const auto good = tmp.file("tr.vlfr");
  write_vlfr(good, ramp_series(100));
  fs::resize_file(good, 19 + 4 * 50);
  CHECK_THROWS_AS(read_vlfr(good), IoError);
}

TEST_CASE("detection reports round-trip through json lines") {
  DetectionReport r;
  r.source_file = "scene_0001.vlfr";
  r.sample_duration = 6.0;
  r.processing_time = 0.123;
  r.config_digest = "00ff00ff00ff00ff";
  Detection d;
  d.t_start = 2.3;
  d.t_end = 3.47;
  d.f_lo = 1500.0;
  d.f_hi = 9500.0;
  d.merit_db = 17.25;
  d.d0_est = 80.0;
  r.detections.push_back(d);
  d.t_start = 4.0;
  d.t_end = 4.5;
  d.d0_est.reset();
  r.detections.push_back(d);

  const auto line = report_to_json(r);
  CHECK(line.find('\n') == std::string::npos);
  const auto back = report_from_json(line);
  CHECK(back.source_file == r.source_file);
  CHECK(back.sample_duration == r.sample_duration);
  CHECK(back.config_digest == r.config_digest);
  REQUIRE(back.detections.size() == 2);
  CHECK(back.detections[0].t_start == 2.3);
  CHECK(back.detections[0].d0_est.has_value());
  CHECK_FALSE(back.detections[1].d0_est.has_value());

  std::stringstream lines;
  lines << line << "\n\n" << line << "\n";
  const auto all = read_report_lines(lines);
  CHECK(all.size() == 2);

  CHECK_THROWS_AS(report_from_json("{ not json"), IoError);
  CHECK_THROWS_AS(report_from_json("{\"file\":\"x\"}"), IoError);
}

TEST_CASE("label sidecars round-trip") {
  std::vector<LabeledScene> scenes(2);
  scenes[0].file = "scene_0000.vlfr";
  SceneLabel l;
  l.t0 = 1.0;
  l.t_5khz = 1.27;
  l.d0 = 35.0;
  l.duration = 0.51;
  l.box = {1.0, 1.51, 1500.0, 9500.0};
  scenes[0].labels.push_back(l);
  scenes[1].file = "scene_0001.vlfr";

  const auto text = scenes_to_json(scenes);
  const auto back = scenes_from_json(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].file == "scene_0000.vlfr");
  REQUIRE(back[0].labels.size() == 1);
  CHECK(back[0].labels[0].t_5khz == 1.27);
  CHECK(back[0].labels[0].box.f_hi == 9500.0);
  CHECK(back[1].labels.empty());

  CHECK_THROWS_AS(scenes_from_json("{}"), IoError);
}

TEST_CASE("metrics and timing serialize with absent ratios as null") {
  const auto m = metrics_from_counts(0, 0, 5);
  const auto text = metrics_to_json(m);
  CHECK(text.find("\"false_alarm\":null") != std::string::npos);
  CHECK(text.find("\"misdetection\":1.0") != std::string::npos);

  TimingReport t;
  t.files.push_back({"a.vlfr", 0.5, 6.0, 0.5 / 6.0});
  t.mean_ratio = 0.5 / 6.0;
  t.realtime = true;
  const auto tj = timing_to_json(t);
  CHECK(tj.find("\"mean_ratio\"") != std::string::npos);
  CHECK(tj.find("\"realtime\":true") != std::string::npos);
}

TEST_CASE("awd label lines parse and anchor to a file start") {
  std::stringstream in;
  in << "# comment\n"
     << "2013-07-07UT07:06:18.355:63\n"
     << "2013-07-07UT07:06:15.343:27\n";
  const auto entries = parse_awd_labels(in);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].merit == 63.0);
  CHECK(entries[0].epoch_s - entries[1].epoch_s == doctest::Approx(3.012));

  const auto labels = awd_to_labels(entries, "2013-07-07UT07:06:10.000");
  REQUIRE(labels.size() == 2);
  CHECK(labels[0].t_5khz == doctest::Approx(8.355));
  CHECK(labels[1].t_5khz == doctest::Approx(5.343));

  std::stringstream bad;
  bad << "nonsense line\n";
  CHECK_THROWS_AS(parse_awd_labels(bad), IoError);
}
