#include "whistler/report_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <istream>

#include "whistler/errors.hpp"

namespace whistler {

using nlohmann::json;

namespace {

json detection_to_json(const Detection& d) {
  json j{{"t_start_s", d.t_start}, {"t_end_s", d.t_end},   {"f_lo_hz", d.f_lo},
         {"f_hi_hz", d.f_hi},      {"merit_db", d.merit_db}};
  j["d0"] = d.d0_est ? json(*d.d0_est) : json(nullptr);
  return j;
}

Detection detection_from_json(const json& j) {
  Detection d;
  d.t_start = j.at("t_start_s").get<double>();
  d.t_end = j.at("t_end_s").get<double>();
  d.f_lo = j.at("f_lo_hz").get<double>();
  d.f_hi = j.at("f_hi_hz").get<double>();
  d.merit_db = j.at("merit_db").get<double>();
  if (j.contains("d0") && !j.at("d0").is_null()) d.d0_est = j.at("d0").get<double>();
  return d;
}

}  // namespace

std::string report_to_json(const DetectionReport& report) {
  json j;
  j["file"] = report.source_file;
  j["sample_duration_s"] = report.sample_duration;
  j["processing_s"] = report.processing_time;
  j["config_digest"] = report.config_digest;
  j["detections"] = json::array();
  for (const auto& d : report.detections) j["detections"].push_back(detection_to_json(d));
  return j.dump();
}

DetectionReport report_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw IoError(std::string("report: invalid JSON: ") + e.what());
  }
  DetectionReport r;
  try {
    r.source_file = j.at("file").get<std::string>();
    r.sample_duration = j.at("sample_duration_s").get<double>();
    r.processing_time = j.at("processing_s").get<double>();
    if (j.contains("config_digest")) r.config_digest = j.at("config_digest").get<std::string>();
    for (const auto& d : j.at("detections")) r.detections.push_back(detection_from_json(d));
  } catch (const json::exception& e) {
    throw IoError(std::string("report: missing field: ") + e.what());
  }
  return r;
}

std::vector<DetectionReport> read_report_lines(std::istream& in) {
  std::vector<DetectionReport> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(report_from_json(line));
  }
  return out;
}

std::string scenes_to_json(const std::vector<LabeledScene>& scenes) {
  json j;
  j["scenes"] = json::array();
  for (const auto& scene : scenes) {
    json s;
    s["file"] = scene.file;
    s["labels"] = json::array();
    for (const auto& l : scene.labels) {
      s["labels"].push_back(json{{"t0_s", l.t0},
                                 {"t5khz_s", l.t_5khz},
                                 {"d0", l.d0},
                                 {"duration_s", l.duration},
                                 {"box", {l.box.t0, l.box.t1, l.box.f_lo, l.box.f_hi}}});
    }
    j["scenes"].push_back(std::move(s));
  }
  return j.dump(2);
}

std::vector<LabeledScene> scenes_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("labels: invalid JSON: ") + e.what());
  }
  std::vector<LabeledScene> out;
  try {
    for (const auto& s : j.at("scenes")) {
      LabeledScene scene;
      scene.file = s.at("file").get<std::string>();
      for (const auto& l : s.at("labels")) {
        SceneLabel label;
        label.t0 = l.at("t0_s").get<double>();
        label.t_5khz = l.at("t5khz_s").get<double>();
        label.d0 = l.at("d0").get<double>();
        label.duration = l.at("duration_s").get<double>();
        const auto& b = l.at("box");
        label.box = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                     b.at(3).get<double>()};
        scene.labels.push_back(label);
      }
      out.push_back(std::move(scene));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("labels: missing field: ") + e.what());
  }
  return out;
}

std::string metrics_to_json(const Metrics& m) {
  json j;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["misdetection"] = m.misdetection ? json(*m.misdetection) : json(nullptr);
  j["false_alarm"] = m.false_alarm ? json(*m.false_alarm) : json(nullptr);
  j["f1"] = m.f1 ? json(*m.f1) : json(nullptr);
  return j.dump();
}

std::string timing_to_json(const TimingReport& t) {
  json j;
  j["files"] = json::array();
  for (const auto& f : t.files)
    j["files"].push_back(json{{"file", f.file},
                              {"processing_s", f.processing_s},
                              {"duration_s", f.duration_s},
                              {"ratio", f.ratio}});
  j["mean_ratio"] = t.mean_ratio;
  j["realtime"] = t.realtime;
  return j.dump();
}

namespace {

// Days since the epoch for a Gregorian date; valid for years >= 1970.
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = y / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

double parse_iso_ut(const std::string& s) {
  int year, month, day, hour, minute;
  double second;
  if (std::sscanf(s.c_str(), "%d-%d-%dUT%d:%d:%lf", &year, &month, &day, &hour, &minute,
                  &second) != 6 &&
      std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%lf", &year, &month, &day, &hour, &minute,
                  &second) != 6)
    throw IoError("awd: cannot parse timestamp '" + s + "'");
  return static_cast<double>(days_from_civil(year, month, day)) * 86400.0 +
         hour * 3600.0 + minute * 60.0 + second;
}

}  // namespace

std::vector<AwdEntry> parse_awd_labels(std::istream& in) {
  std::vector<AwdEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto sep = line.rfind(':');
    if (sep == std::string::npos || sep + 1 >= line.size())
      throw IoError("awd: line lacks a merit value: '" + line + "'");
    AwdEntry e;
    e.timestamp = line.substr(0, sep);
    e.merit = std::stod(line.substr(sep + 1));
    e.epoch_s = parse_iso_ut(e.timestamp);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<SceneLabel> awd_to_labels(const std::vector<AwdEntry>& entries,
                                      const std::string& file_start_iso) {
  const double t0 = parse_iso_ut(file_start_iso);
  std::vector<SceneLabel> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    SceneLabel l;
    l.t_5khz = e.epoch_s - t0;
    l.t0 = l.t_5khz;
    out.push_back(l);
  }
  return out;
}

}  // namespace whistler
