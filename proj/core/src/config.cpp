#include "ssf/config.hpp"

#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ssf/rdf/turtle.hpp"

namespace ssf {

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw std::invalid_argument("expected boolean, got '" + v + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  using Setter = std::function<void(Config&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"tick_seconds", [](Config& c, const std::string& v) { c.tick_seconds = std::stod(v); }},
      {"iou_gate", [](Config& c, const std::string& v) { c.iou_gate = std::stod(v); }},
      {"score_gate", [](Config& c, const std::string& v) { c.score_gate = std::stod(v); }},
      {"max_age", [](Config& c, const std::string& v) { c.max_age = std::stoi(v); }},
      {"min_hits", [](Config& c, const std::string& v) { c.min_hits = std::stoi(v); }},
      {"same_tick_fixpoint",
       [](Config& c, const std::string& v) { c.same_tick_fixpoint = parse_bool(v); }},
      {"fixpoint_cap", [](Config& c, const std::string& v) { c.fixpoint_cap = std::stoi(v); }},
      {"soft_rule_id_pattern",
       [](Config& c, const std::string& v) { c.soft_rule_id_pattern = v; }},
      {"vmatch_score", [](Config& c, const std::string& v) { c.vmatch_score = std::stod(v); }},
      {"reid_horizon", [](Config& c, const std::string& v) { c.reid_horizon = std::stoi(v); }},
      {"emit_predictions",
       [](Config& c, const std::string& v) { c.emit_predictions = parse_bool(v); }},
      {"sensor", [](Config& c, const std::string& v) { c.sensor = v; }},
      {"detector", [](Config& c, const std::string& v) { c.detector = v; }},
      {"kalman_meas_noise_pos",
       [](Config& c, const std::string& v) { c.kalman_meas_noise_pos = std::stod(v); }},
      {"kalman_meas_noise_scale",
       [](Config& c, const std::string& v) { c.kalman_meas_noise_scale = std::stod(v); }},
      {"kalman_process_noise_pos",
       [](Config& c, const std::string& v) { c.kalman_process_noise_pos = std::stod(v); }},
      {"kalman_process_noise_vel",
       [](Config& c, const std::string& v) { c.kalman_process_noise_vel = std::stod(v); }},
      {"kalman_process_noise_scale_vel",
       [](Config& c, const std::string& v) { c.kalman_process_noise_scale_vel = std::stod(v); }},
      {"kalman_init_cov_pos",
       [](Config& c, const std::string& v) { c.kalman_init_cov_pos = std::stod(v); }},
      {"kalman_init_cov_vel",
       [](Config& c, const std::string& v) { c.kalman_init_cov_vel = std::stod(v); }},
  };
  auto it = setters.find(key);
  if (it == setters.end()) throw std::invalid_argument("unknown config key: " + key);
  it->second(*this, value);
}

Config Config::from_text(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(0, 1);
    config.set(key, value);
  }
  config.validate();
  return config;
}

std::string Config::to_text() const {
  std::ostringstream out;
  out << "detector=" << detector << "\n";
  out << "emit_predictions=" << bool_text(emit_predictions) << "\n";
  out << "fixpoint_cap=" << fixpoint_cap << "\n";
  out << "iou_gate=" << rdf::format_double(iou_gate) << "\n";
  out << "kalman_init_cov_pos=" << rdf::format_double(kalman_init_cov_pos) << "\n";
  out << "kalman_init_cov_vel=" << rdf::format_double(kalman_init_cov_vel) << "\n";
  out << "kalman_meas_noise_pos=" << rdf::format_double(kalman_meas_noise_pos) << "\n";
  out << "kalman_meas_noise_scale=" << rdf::format_double(kalman_meas_noise_scale) << "\n";
  out << "kalman_process_noise_pos=" << rdf::format_double(kalman_process_noise_pos) << "\n";
  out << "kalman_process_noise_scale_vel=" << rdf::format_double(kalman_process_noise_scale_vel)
      << "\n";
  out << "kalman_process_noise_vel=" << rdf::format_double(kalman_process_noise_vel) << "\n";
  out << "max_age=" << max_age << "\n";
  out << "min_hits=" << min_hits << "\n";
  out << "reid_horizon=" << reid_horizon << "\n";
  out << "same_tick_fixpoint=" << bool_text(same_tick_fixpoint) << "\n";
  out << "score_gate=" << rdf::format_double(score_gate) << "\n";
  out << "sensor=" << sensor << "\n";
  out << "soft_rule_id_pattern=" << soft_rule_id_pattern << "\n";
  out << "tick_seconds=" << rdf::format_double(tick_seconds) << "\n";
  out << "vmatch_score=" << rdf::format_double(vmatch_score) << "\n";
  return out.str();
}

void Config::validate() const {
  if (iou_gate < 0 || iou_gate > 1) throw std::invalid_argument("iou_gate must be in [0,1]");
  if (score_gate < 0 || score_gate > 1) throw std::invalid_argument("score_gate must be in [0,1]");
  if (vmatch_score < 0 || vmatch_score > 1)
    throw std::invalid_argument("vmatch_score must be in [0,1]");
  if (max_age < 1) throw std::invalid_argument("max_age must be >= 1");
  if (min_hits < 1) throw std::invalid_argument("min_hits must be >= 1");
  if (tick_seconds <= 0) throw std::invalid_argument("tick_seconds must be positive");
  if (fixpoint_cap < 1) throw std::invalid_argument("fixpoint_cap must be >= 1");
  if (reid_horizon < 1) throw std::invalid_argument("reid_horizon must be >= 1");
}

engine::EngineOptions Config::engine_options() const {
  engine::EngineOptions opts;
  opts.tick_seconds = tick_seconds;
  opts.same_tick_fixpoint = same_tick_fixpoint;
  opts.fixpoint_cap = fixpoint_cap;
  return opts;
}

tracker::TrackerOptions Config::tracker_options() const {
  tracker::TrackerOptions opts;
  opts.max_age = max_age;
  opts.min_hits = min_hits;
  opts.spawn_score_gate = score_gate;
  opts.reid_horizon = reid_horizon;
  opts.emit_predictions = emit_predictions;
  opts.vmatch_score = vmatch_score;
  opts.kalman = kalman_params();
  return opts;
}

tracker::FeatureExtractorOptions Config::extractor_options() const {
  tracker::FeatureExtractorOptions opts;
  opts.sensor = sensor;
  opts.detector = detector;
  opts.vmatch_score = vmatch_score;
  return opts;
}

tracker::KalmanParams Config::kalman_params() const {
  tracker::KalmanParams params;
  params.meas_noise_pos = kalman_meas_noise_pos;
  params.meas_noise_scale = kalman_meas_noise_scale;
  params.process_noise_pos = kalman_process_noise_pos;
  params.process_noise_vel = kalman_process_noise_vel;
  params.process_noise_scale_vel = kalman_process_noise_scale_vel;
  params.init_cov_pos = kalman_init_cov_pos;
  params.init_cov_vel = kalman_init_cov_vel;
  return params;
}

ql::ParseOptions Config::parse_options() const {
  ql::ParseOptions opts;
  opts.soft_rule_id_pattern = soft_rule_id_pattern;
  return opts;
}

}  // namespace ssf
