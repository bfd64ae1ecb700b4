// Command-line frontend: scene simulation, CCSW detection, evaluation and
// benchmarking over VLFR1 raw files.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "whistler/errors.hpp"
#include "whistler/evaluate.hpp"
#include "whistler/pipeline.hpp"
#include "whistler/report_io.hpp"
#include "whistler/scenegen.hpp"
#include "whistler/vlfr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace whistler;

namespace {

int worker_count(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("WHISTLER_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, count) on up to `threads` workers; results land in
// their slots so output order stays deterministic.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

// ----------------------------------------------------------------------------
// Detection configuration shared by `detect` and `bench`.

struct DetectConfig {
  std::string preprocess = "zscore";
  std::string axis = "row";
  double d0 = 80.0;
  double f_n = 25000.0;
  double lambda_n = 0.35;
  double f_min = 1500.0;
  double f_max = 9500.0;
  int band_smoothing = 1;
  std::vector<double> cfar_values = {12, 10, 0.5, 13, 5, 3};
  double resolution = 0.1;
  std::vector<double> d0_grid = {20, 35, 50, 65, 80};
  int nfft = 256;
  int hop = 256;
  int channel = 0;
  int threads = 0;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--preprocess", preprocess, "Transform: none|zscore|cdetrend|ldetrend")
        ->capture_default_str();
    cmd->add_option("--axis", axis, "Transform axis: row (per frequency row) or col")
        ->check(CLI::IsMember({"row", "col"}))
        ->capture_default_str();
    cmd->add_option("--d0", d0, "Kernel zero dispersion [s^1/2]")->capture_default_str();
    cmd->add_option("--fn", f_n, "Kernel nose frequency [Hz]")->capture_default_str();
    cmd->add_option("--lambda", lambda_n, "Normalised electron gyrofrequency")
        ->capture_default_str();
    cmd->add_option("--fmin", f_min, "Kernel band low edge [Hz]")->capture_default_str();
    cmd->add_option("--fmax", f_max, "Kernel band high edge [Hz]")->capture_default_str();
    cmd->add_option("--smooth", band_smoothing, "Kernel smoothing half-width [bins]")
        ->capture_default_str();
    cmd->add_option("--cfar", cfar_values, "CFAR parameters N,G,X_dB,k,T_S,T_L")
        ->delimiter(',')
        ->expected(6);
    cmd->add_option("--stride-resolution", resolution, "Detection grouping interval [s]")
        ->capture_default_str();
    cmd->add_option("--d0-grid", d0_grid, "Zero dispersions tried for duration estimation")
        ->delimiter(',');
    cmd->add_option("--nfft", nfft, "STFT size [samples]")->capture_default_str();
    cmd->add_option("--hop", hop, "STFT hop [samples]")->capture_default_str();
    cmd->add_option("--channel", channel, "Channel index (0 = NS, 1 = EW)")
        ->capture_default_str();
    cmd->add_option("--threads", threads, "Worker count (0 = WHISTLER_THREADS or cores)");
  }

  DispersionParams params() const {
    DispersionParams p;
    p.f_n = f_n;
    p.d0 = d0;
    p.lambda_n = lambda_n;
    p.f_min = f_min;
    p.f_max = f_max;
    return p;
  }

  CfarConfig cfar() const {
    CfarConfig c;
    c.n = static_cast<int>(cfar_values[0]);
    c.g = static_cast<int>(cfar_values[1]);
    c.x_db = cfar_values[2];
    c.k = static_cast<int>(cfar_values[3]);
    c.t_s = static_cast<int>(cfar_values[4]);
    c.t_l = static_cast<int>(cfar_values[5]);
    return c;
  }

  std::string digest() const {
    std::ostringstream os;
    os.precision(12);
    os << "preprocess=" << preprocess << ";axis=" << axis << ";fn=" << f_n
       << ";d0=" << d0 << ";lambda=" << lambda_n << ";fmin=" << f_min
       << ";fmax=" << f_max << ";smooth=" << band_smoothing << ";cfar=";
    for (double v : cfar_values) os << v << ',';
    os << ";resolution=" << resolution << ";grid=";
    for (double v : d0_grid) os << v << ',';
    os << ";nfft=" << nfft << ";hop=" << hop << ";window=hann;channel=" << channel;
    return digest_string(os.str());
  }
};

struct PreparedRun {
  WhistlerKerneld kernel;
  TransformKind transform;
  CfarConfig cfar;
  CcswOptions options;
};

PreparedRun prepare(const DetectConfig& cfg) {
  PreparedRun run;
  const auto params = cfg.params();
  if (!params.d0_in_studied_range())
    std::cerr << "warning: d0=" << params.d0 << " is outside the studied 20-80 range\n";
  const double fs_nominal = 40000.0;  // dt/df are refreshed per file below
  (void)fs_nominal;
  run.transform = parse_transform(cfg.preprocess);
  run.cfar = cfg.cfar();
  run.cfar.validate();
  run.options.axis = cfg.axis == "col" ? Axis::Frequency : Axis::Time;
  run.options.group_resolution_s = cfg.resolution;
  run.options.stft.nfft = cfg.nfft;
  run.options.stft.hop = cfg.hop;
  run.options.config_digest = cfg.digest();
  return run;
}

// Kernels depend on the file's sample rate through dt and df.
void build_kernels(PreparedRun& run, const DetectConfig& cfg, double fs) {
  const double dt = static_cast<double>(cfg.hop) / fs;
  const double df = fs / static_cast<double>(cfg.nfft);
  run.kernel = rasterize_kernel(cfg.params(), dt, df, cfg.band_smoothing);
  run.options.duration_grid =
      kernel_grid(cfg.d0_grid, cfg.params(), dt, df, cfg.band_smoothing);
}

void write_spectrogram_csv(std::ostream& os, const Spectrogramd& s, const char* value_name) {
  os << "freq_hz,time_s," << value_name << "\n";
  const auto prec = os.precision(10);
  for (Eigen::Index r = 0; r < s.n_freq(); ++r)
    for (Eigen::Index c = 0; c < s.n_time(); ++c)
      os << s.row_freq(r) << ',' << s.col_time(c) << ',' << s.power_db(r, c) << '\n';
  os.precision(prec);
}

void dump_stages(const std::vector<std::string>& stages, const std::string& dir,
                 const PreparedRun& run, const PipelineTrace& trace) {
  fs::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream os(fs::path(dir) / (name + ".csv"));
    if (!os) throw IoError("cannot write dump file " + name + ".csv");
    return os;
  };
  for (const auto& stage : stages) {
    if (stage == "kernel") {
      auto os = open("kernel");
      write_kernel_csv(os, run.kernel);
    } else if (stage == "spectrogram") {
      auto os = open("spectrogram");
      write_spectrogram_csv(os, trace.full_db, "value_db");
    } else if (stage == "preprocessed") {
      auto os = open("preprocessed");
      write_spectrogram_csv(os, trace.preprocessed, "value");
    } else if (stage == "scaled") {
      auto os = open("scaled");
      write_spectrogram_csv(os, trace.scaled, "value");
    } else if (stage == "correlation") {
      auto os = open("correlation");
      write_correlation_csv(os, trace.correlation);
    } else if (stage == "ca" || stage == "os" || stage == "tm" || stage == "lf") {
      auto os = open("cfar_" + stage);
      const DecisionSeriesd& d = stage == "ca"   ? trace.ca
                                 : stage == "os" ? trace.os
                                 : stage == "tm" ? trace.tm
                                                 : trace.lf;
      write_decision_csv(os, trace.correlation, d);
    } else {
      throw InvalidArgument("unknown dump stage '" + stage + "'");
    }
  }
}

// ----------------------------------------------------------------------------
// simulate

BatchSpec parse_batch_spec(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open scene spec " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw IoError(std::string("scene spec: invalid JSON: ") + e.what());
  }

  BatchSpec batch;
  batch.count = j.value("count", 1);
  batch.seed = j.value("seed", 1ull);
  batch.base.fs = j.value("fs_hz", 40000.0);
  batch.base.duration = j.value("duration_s", 6.0);
  batch.base.noise_floor = j.value("noise_floor", 1.0);
  batch.base.sferic_rate = j.value("sferic_rate_hz", 0.5);
  batch.base.sferic_amplitude = j.value("sferic_amplitude", 12.0);
  if (j.contains("tone_freqs_hz"))
    batch.base.tone_freqs = j.at("tone_freqs_hz").get<std::vector<double>>();
  batch.base.tone_amplitude = j.value("tone_amplitude", 2.0);

  if (j.contains("whistlers")) {
    const auto& w = j.at("whistlers");
    batch.whistler_count_min = w.value("count_min", 1);
    batch.whistler_count_max = w.value("count_max", 5);
    if (w.contains("d0_choices"))
      batch.d0_choices = w.at("d0_choices").get<std::vector<double>>();
    batch.snr_db = w.value("snr_db", 10.0);
    batch.params.f_n = w.value("f_n_hz", 25000.0);
    batch.params.lambda_n = w.value("lambda_n", 0.35);
    batch.params.f_min = w.value("f_min_hz", 1500.0);
    batch.params.f_max = w.value("f_max_hz", 9500.0);
    batch.t0_min = w.value("t0_min_s", 0.3);
    batch.t0_max = w.value("t0_max_s", -1.0);
  }
  return batch;
}

int cmd_simulate(const std::string& spec_path, const std::string& out_dir, int count_override,
                 long seed_override, int threads_flag) {
  BatchSpec batch = parse_batch_spec(spec_path);
  if (count_override > 0) batch.count = count_override;
  if (seed_override >= 0) batch.seed = static_cast<std::uint64_t>(seed_override);

  fs::create_directories(out_dir);
  std::vector<LabeledScene> scenes(batch.count);
  std::vector<std::string> errors(batch.count);

  parallel_for(batch.count, worker_count(threads_flag), [&](int i) {
    try {
      char name[32];
      std::snprintf(name, sizeof(name), "scene_%04d.vlfr", i);
      const auto spec = random_scene_spec(batch, i);
      auto [ts, labels] = generate_scene(spec);
      write_vlfr((fs::path(out_dir) / name).string(), ts);
      scenes[i].file = name;
      scenes[i].labels = std::move(labels);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  bool failed = false;
  for (int i = 0; i < batch.count; ++i)
    if (!errors[i].empty()) {
      std::cerr << "scene " << i << ": " << errors[i] << "\n";
      failed = true;
    }
  if (failed) return 1;

  std::ofstream os(fs::path(out_dir) / "labels.json");
  os << scenes_to_json(scenes) << "\n";
  if (!os) {
    std::cerr << "cannot write labels.json\n";
    return 1;
  }
  std::cerr << "wrote " << batch.count << " scenes to " << out_dir << "\n";
  return 0;
}

// ----------------------------------------------------------------------------
// detect

int cmd_detect(const std::vector<std::string>& files, const DetectConfig& cfg,
               const std::string& out_path, const std::vector<std::string>& dump,
               const std::string& dump_dir) {
  PreparedRun base = prepare(cfg);

  std::ostream* out = &std::cout;
  std::ofstream out_file;
  if (!out_path.empty() && out_path != "-") {
    out_file.open(out_path, std::ios::trunc);
    if (!out_file) throw IoError("cannot open " + out_path + " for writing");
    out = &out_file;
  }

  const int n = static_cast<int>(files.size());
  std::vector<std::string> lines(n), errors(n);

  parallel_for(n, worker_count(cfg.threads), [&](int i) {
    try {
      PreparedRun run = base;
      const auto ts = read_vlfr(files[i], cfg.channel);
      build_kernels(run, cfg, ts.fs);
      run.options.source_file = fs::path(files[i]).filename().string();

      PipelineTrace trace;
      const bool want_trace = !dump.empty() && n == 1;
      const auto report = run_ccsw(ts, run.kernel, run.transform, run.cfar, run.options,
                                   want_trace ? &trace : nullptr);
      if (want_trace) dump_stages(dump, dump_dir, run, trace);
      lines[i] = report_to_json(report);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  bool failed = false;
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      std::cerr << files[i] << ": " << errors[i] << "\n";
      failed = true;
      continue;
    }
    *out << lines[i] << "\n";
  }
  if (!dump.empty() && n != 1)
    std::cerr << "note: --dump-stage applies only to single-file runs\n";
  return failed ? 1 : 0;
}

// ----------------------------------------------------------------------------
// eval

int cmd_eval(const std::string& reports_path, const std::string& labels_path,
             const std::string& file_start, const std::string& csv_path) {
  std::ifstream rin(reports_path);
  if (!rin) throw IoError("cannot open " + reports_path);
  const auto reports = read_report_lines(rin);
  if (reports.empty()) throw InvalidArgument("no reports in " + reports_path);

  std::vector<Metrics> parts;
  if (labels_path.size() > 4 && labels_path.substr(labels_path.size() - 5) == ".json") {
    std::ifstream lin(labels_path);
    if (!lin) throw IoError("cannot open " + labels_path);
    std::stringstream buf;
    buf << lin.rdbuf();
    const auto scenes = scenes_from_json(buf.str());
    for (const auto& report : reports) {
      const auto name = fs::path(report.source_file).filename().string();
      bool matched = false;
      for (const auto& scene : scenes)
        if (fs::path(scene.file).filename().string() == name) {
          parts.push_back(match_detections(report, scene.labels));
          matched = true;
          break;
        }
      if (!matched) throw InvalidArgument("no labels for report file " + name);
    }
  } else {
    // AWD-style text labels anchored to --file-start, applied to every report.
    if (file_start.empty())
      throw InvalidArgument("AWD labels need --file-start ISO8601 timestamp");
    std::ifstream lin(labels_path);
    if (!lin) throw IoError("cannot open " + labels_path);
    const auto labels = awd_to_labels(parse_awd_labels(lin), file_start);
    for (const auto& report : reports) parts.push_back(match_detections(report, labels));
  }

  const auto total = merge_metrics(parts);
  std::cout << metrics_to_json(total) << "\n";

  if (!csv_path.empty()) {
    const bool fresh = !fs::exists(csv_path);
    std::ofstream csv(csv_path, std::ios::app);
    if (!csv) throw IoError("cannot open " + csv_path);
    if (fresh) csv << "config_digest,tp,fp,fn,misdetection,false_alarm,f1\n";
    auto cell = [](const std::optional<double>& v) {
      return v ? std::to_string(*v) : std::string();
    };
    csv << reports.front().config_digest << ',' << total.tp << ',' << total.fp << ','
        << total.fn << ',' << cell(total.misdetection) << ',' << cell(total.false_alarm)
        << ',' << cell(total.f1) << "\n";
  }
  return 0;
}

// ----------------------------------------------------------------------------
// bench

int cmd_bench(const std::vector<std::string>& files, const DetectConfig& cfg, int repeat) {
  if (repeat < 3) repeat = 3;
  PreparedRun base = prepare(cfg);

  const int n = static_cast<int>(files.size());
  std::vector<DetectionReport> reports(n);
  std::vector<std::string> errors(n);

  parallel_for(n, worker_count(cfg.threads), [&](int i) {
    try {
      PreparedRun run = base;
      const auto ts = read_vlfr(files[i], cfg.channel);
      build_kernels(run, cfg, ts.fs);
      run.options.source_file = fs::path(files[i]).filename().string();
      DetectionReport best;
      for (int r = 0; r < repeat; ++r) {
        auto rep = run_ccsw(ts, run.kernel, run.transform, run.cfar, run.options);
        if (r == 0 || rep.processing_time < best.processing_time) best = std::move(rep);
      }
      reports[i] = std::move(best);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  for (int i = 0; i < n; ++i)
    if (!errors[i].empty()) {
      std::cerr << files[i] << ": " << errors[i] << "\n";
      return 1;
    }
  std::cout << timing_to_json(timing(reports)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whistler detection toolkit: simulate, detect, eval, bench"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate labelled synthetic VLFR1 scenes");
  std::string sim_spec, sim_out;
  int sim_count = 0, sim_threads = 0;
  long sim_seed = -1;
  sim->add_option("spec", sim_spec, "Scene batch spec (JSON)")->required();
  sim->add_option("out_dir", sim_out, "Output directory")->required();
  sim->add_option("--count", sim_count, "Override scene count");
  sim->add_option("--seed", sim_seed, "Override batch seed");
  sim->add_option("--threads", sim_threads, "Worker count");

  // detect
  auto* det = app.add_subcommand("detect", "Run CCSW detection over VLFR1 files");
  std::vector<std::string> det_files;
  std::string det_out, det_dump_dir = ".";
  std::vector<std::string> det_dump;
  DetectConfig det_cfg;
  det->add_option("files", det_files, "Input VLFR1 files")->required();
  det->add_option("--out", det_out, "Output JSON-lines path (default stdout)");
  det_cfg.add_flags(det);
  det->add_option("--dump-stage", det_dump,
                  "Stage CSV dump: kernel|spectrogram|preprocessed|scaled|correlation|ca|os|tm|lf");
  det->add_option("--dump-dir", det_dump_dir, "Directory for stage dumps")
      ->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "Score detection reports against labels");
  std::string ev_reports, ev_labels, ev_start, ev_csv;
  ev->add_option("reports", ev_reports, "Detection reports (JSON lines)")->required();
  ev->add_option("labels", ev_labels, "labels.json sidecar or AWD-style text")->required();
  ev->add_option("--file-start", ev_start, "File start (ISO8601) for AWD text labels");
  ev->add_option("--csv", ev_csv, "Append a metrics row to this CSV");

  // bench
  auto* be = app.add_subcommand("bench", "Measure processing-to-duration ratios");
  std::vector<std::string> be_files;
  int be_repeat = 3;
  DetectConfig be_cfg;
  be->add_option("files", be_files, "Input VLFR1 files")->required();
  be->add_option("--repeat", be_repeat, "Runs per file, minimum taken")
      ->capture_default_str();
  be_cfg.add_flags(be);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(sim_spec, sim_out, sim_count, sim_seed, sim_threads);
    if (det->parsed()) return cmd_detect(det_files, det_cfg, det_out, det_dump, det_dump_dir);
    if (ev->parsed()) return cmd_eval(ev_reports, ev_labels, ev_start, ev_csv);
    if (be->parsed()) return cmd_bench(be_files, be_cfg, be_repeat);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
