#pragma once

#include <string>

#include "ssf/engine/engine.hpp"
#include "ssf/rdf/vocab.hpp"
#include "ssf/ql/parser.hpp"
#include "ssf/tracker/features.hpp"
#include "ssf/tracker/tracklet.hpp"

namespace ssf {

/// Every engine knob, loadable from a flat key=value file and overridable
/// with --set key=value. Defaults follow the tracking rules' constants:
/// 0.8 gates, 1-second ticks, 3-tick re-identification horizon.
struct Config {
  double tick_seconds = 1.0;
  double iou_gate = 0.8;
  double score_gate = 0.8;
  int max_age = 3;
  int min_hits = 1;
  bool same_tick_fixpoint = false;
  int fixpoint_cap = 16;
  std::string soft_rule_id_pattern = "_w_";
  double vmatch_score = 0.9;
  int reid_horizon = 3;
  bool emit_predictions = true;
  std::string sensor = rdf::vocab::dflt("cam1");
  std::string detector = rdf::vocab::dflt("Yolo");

  double kalman_meas_noise_pos = 1.0;
  double kalman_meas_noise_scale = 10.0;
  double kalman_process_noise_pos = 1.0;
  double kalman_process_noise_vel = 0.01;
  double kalman_process_noise_scale_vel = 1e-4;
  double kalman_init_cov_pos = 10.0;
  double kalman_init_cov_vel = 1e4;

  void set(const std::string& key, const std::string& value);
  static Config from_text(const std::string& text);
  std::string to_text() const;
  void validate() const;

  engine::EngineOptions engine_options() const;
  tracker::TrackerOptions tracker_options() const;
  tracker::FeatureExtractorOptions extractor_options() const;
  tracker::KalmanParams kalman_params() const;
  ql::ParseOptions parse_options() const;
};

}  // namespace ssf
