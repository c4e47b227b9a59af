#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssf/fusion/hypothesis.hpp"
#include "ssf/rdf/term.hpp"
#include "ssf/tracker/features.hpp"
#include "ssf/tracker/kalman.hpp"

namespace ssf::tracker {

enum class TrackStatus { Tentative, Confirmed, Ended };

struct TrackerOptions {
  int max_age = 3;
  int min_hits = 1;
  double spawn_score_gate = 0.8;
  int reid_horizon = 3;  // ticks after :ends during which context republishes
  bool emit_predictions = true;
  double vmatch_score = 0.9;
  KalmanParams kalman;
};

struct TrackletState {
  rdf::Iri id;       // :trk<N>
  rdf::Iri object;   // :o<M>; rebound on re-identification
  long object_num = 0;
  KalmanState kalman;
  int hits = 0;
  int misses_in_a_row = 0;
  TrackStatus status = TrackStatus::Tentative;
  std::optional<rdf::Tick> end_tick;
  std::string appearance_id;
  rdf::Iri current_box;  // box IRI asserted for the tick in flight
  double last_score = 0.0;
  rdf::Iri gallery_box;  // last associated detection box
  // per-tick scratch
  enum class TickState { Untouched, Matched, Missed, Spawned };
  TickState tick_state = TickState::Untouched;
};

struct MotRow {
  rdf::Tick frame = 0;
  long track_id = 0;
  Box box;
  double score = 0.0;
  bool predicted = false;

  std::string to_csv() const;  // frame,id,x,y,w,h,score,-1,-1,-1
};

/// Tracklet lifecycle driven by the per-tick world selection: matched tracks
/// get a Kalman correction, unmatched ones coast, stale ones end, unmatched
/// detections spawn, and re-identification rebinds a spawned track to the
/// ended track's object.
class TrackletManager {
 public:
  TrackletManager(TrackerOptions options, FeatureExtractor* extractor);

  /// First pass applies the full lifecycle and returns the spawn-tick facts;
  /// later passes only rebind spawned tracklets per chosen re-identifications.
  std::vector<rdf::TimestampedFact> apply(const fusion::WorldSelection& selection,
                                          const std::vector<MintedDetection>& detections,
                                          rdf::Tick t, bool first_pass);

  struct TickClose {
    std::vector<MotRow> rows;
    std::vector<rdf::TimestampedFact> next_facts;  // predictions + re-id context
  };
  TickClose finalize(rdf::Tick t);

  /// Gallery entries usable for appearance matching at tick t.
  std::vector<GalleryEntry> gallery(rdf::Tick t) const;

  const std::vector<TrackletState>& tracklets() const { return tracklets_; }

 private:
  TrackletState* by_object(const rdf::Term& object);
  TrackletState* by_current_box(const rdf::Term& box);

  TrackerOptions options_;
  FeatureExtractor* extractor_;
  std::vector<TrackletState> tracklets_;  // live
  std::vector<GalleryEntry> gallery_;     // ended, within horizon
  long spawn_counter_ = 0;
};

struct AdvanceResult {
  std::vector<rdf::TimestampedFact> current_facts;
  TrackletManager::TickClose close;
};

/// Single-pass convenience: lifecycle plus finalize in one call.
AdvanceResult advance_tracklets(TrackletManager& manager, const fusion::WorldSelection& selection,
                                const std::vector<MintedDetection>& detections, rdf::Tick t);

}  // namespace ssf::tracker
