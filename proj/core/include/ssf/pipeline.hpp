#pragma once

#include <vector>

#include "ssf/config.hpp"
#include "ssf/engine/engine.hpp"
#include "ssf/tracker/features.hpp"
#include "ssf/tracker/tracklet.hpp"

namespace ssf {

struct TickOutput {
  std::vector<tracker::MotRow> rows;
  std::vector<engine::Output> stream_outputs;
  fusion::WorldSelection selection;
  std::vector<tracker::MintedDetection> minted;
  engine::Diagnostics diagnostics;
};

/// Tracking-by-detection driven by rules: detection records become stream
/// facts, the engine raises association hypotheses, the fusion step picks a
/// consistent world, and the tracklet manager turns it into Kalman updates
/// and next-tick prediction facts. With same_tick_fixpoint enabled the tick
/// iterates, so a track spawned this tick can be re-identified and
/// field-of-view entries fire before the tick closes.
class TrackingPipeline {
 public:
  TrackingPipeline(const std::vector<ql::Rule>& rules, const Config& config,
                   fusion::RuleWeights weights = {});

  TickOutput process_tick(rdf::Tick t, const std::vector<tracker::DetectionRecord>& records);

  const engine::Engine& engine() const { return engine_; }
  const tracker::TrackletManager& tracker() const { return tracklets_; }
  const rdf::StreamId& stream() const { return stream_; }

 private:
  Config config_;
  rdf::StreamId stream_;
  engine::Engine engine_;
  tracker::FeatureExtractor extractor_;
  tracker::TrackletManager tracklets_;
};

}  // namespace ssf
