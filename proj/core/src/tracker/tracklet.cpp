#include "ssf/tracker/tracklet.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "ssf/rdf/turtle.hpp"
#include "ssf/rdf/vocab.hpp"

namespace ssf::tracker {

using rdf::Iri;
using rdf::Term;
using rdf::Tick;
using rdf::TimestampedFact;
using rdf::Triple;
namespace vocab = rdf::vocab;

std::string MotRow::to_csv() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%lld,%ld,%.2f,%.2f,%.2f,%.2f,%.2f,-1,-1,-1",
                static_cast<long long>(frame), track_id, box.x, box.y, box.w, box.h, score);
  return buf;
}

TrackletManager::TrackletManager(TrackerOptions options, FeatureExtractor* extractor)
    : options_(options), extractor_(extractor) {}

TrackletState* TrackletManager::by_object(const Term& object) {
  if (!object.is_iri()) return nullptr;
  for (TrackletState& t : tracklets_)
    if (t.object == object.as_iri()) return &t;
  return nullptr;
}

TrackletState* TrackletManager::by_current_box(const Term& box) {
  if (!box.is_iri()) return nullptr;
  for (TrackletState& t : tracklets_)
    if (t.current_box == box.as_iri()) return &t;
  return nullptr;
}

std::vector<TimestampedFact> TrackletManager::apply(const fusion::WorldSelection& selection,
                                                    const std::vector<MintedDetection>& detections,
                                                    Tick t, bool first_pass) {
  std::vector<TimestampedFact> facts;
  auto emit = [&](Term s, const std::string& p, Term o) {
    facts.push_back(TimestampedFact{Triple{std::move(s), Iri{p}, std::move(o)}, t});
  };

  if (!first_pass) {
    // Re-identification: a chosen association whose subject box belongs to a
    // tracklet spawned this tick adopts the old object identity.
    for (const fusion::Hypothesis& h : selection.chosen) {
      if (!h.association()) continue;
      TrackletState* trk = by_current_box(h.head_fact.triple.subject);
      if (trk == nullptr || trk->tick_state != TrackletState::TickState::Spawned) continue;
      if (!h.target->is_iri() || trk->object == h.target->as_iri()) continue;
      trk->object = h.target->as_iri();
      const std::string& v = trk->object.value;
      std::size_t digits = v.find_last_not_of("0123456789");
      if (digits != std::string::npos && digits + 1 < v.size())
        trk->object_num = std::stol(v.substr(digits + 1));
    }
    return facts;
  }

  for (TrackletState& trk : tracklets_) trk.tick_state = TrackletState::TickState::Untouched;

  // Matched tracklets: correct with the associated detection box.
  for (const fusion::Hypothesis& h : selection.chosen) {
    if (!h.association()) continue;
    TrackletState* trk = by_object(*h.target);
    if (trk == nullptr) continue;
    const MintedDetection* det = nullptr;
    for (const MintedDetection& d : detections) {
      if (h.detection->is_iri() && d.box == h.detection->as_iri()) {
        det = &d;
        break;
      }
    }
    if (det == nullptr) continue;
    trk->kalman = kf_update(trk->kalman, det->record.box, options_.kalman);
    ++trk->hits;
    trk->misses_in_a_row = 0;
    if (trk->status == TrackStatus::Tentative && trk->hits >= options_.min_hits)
      trk->status = TrackStatus::Confirmed;
    trk->last_score = det->record.score;
    trk->gallery_box = det->box;
    if (!det->record.appearance_id.empty()) trk->appearance_id = det->record.appearance_id;
    trk->tick_state = TrackletState::TickState::Matched;
  }

  // Unmatched detections above the gate spawn tracklets. The new track
  // asserts its detection box for the current tick, so same-tick rules can
  // bind it: self-association gives the fresh object its entry fact and
  // appearance re-identification competes against it for the old identity.
  std::set<std::string> used_boxes;
  for (const fusion::Hypothesis& h : selection.chosen) {
    if (h.association() && h.detection->is_iri()) used_boxes.insert(h.detection->as_iri().value);
  }
  for (const MintedDetection& d : detections) {
    if (used_boxes.count(d.box.value)) continue;
    if (d.record.score < options_.spawn_score_gate) continue;
    ++spawn_counter_;
    TrackletState trk;
    trk.id = Iri{vocab::dflt(("trk" + std::to_string(spawn_counter_)).c_str())};
    trk.object = Iri{vocab::dflt(("o" + std::to_string(spawn_counter_)).c_str())};
    trk.object_num = spawn_counter_;
    trk.kalman = kf_init(d.record.box, options_.kalman);
    trk.hits = 1;
    trk.status = options_.min_hits <= 1 ? TrackStatus::Confirmed : TrackStatus::Tentative;
    trk.appearance_id = d.record.appearance_id;
    trk.current_box = d.box;
    trk.last_score = d.record.score;
    trk.gallery_box = d.box;
    trk.tick_state = TrackletState::TickState::Spawned;
    tracklets_.push_back(std::move(trk));

    TrackletState& spawned = tracklets_.back();
    Term qt = Term::quoted(Term(Term::Repr{spawned.id}), Iri{vocab::kTrk},
                           Term(Term::Repr{spawned.current_box}));
    emit(qt, rdf::kRdfType, Term::iri(vocab::kTracklet));
    emit(qt, vocab::kUsedProcedure, Term::iri(vocab::kKalmanFilter));
    emit(Term(Term::Repr{spawned.id}), vocab::kTrklet, Term(Term::Repr{spawned.object}));
  }

  // Remaining live tracklets coast; stale ones end and are remembered for
  // appearance-based recovery. The ending tracklet publishes its
  // re-identification context right away, so a track spawned this very tick
  // can already claim the identity.
  std::vector<std::size_t> spawned;
  for (std::size_t i = 0; i < tracklets_.size(); ++i)
    if (tracklets_[i].tick_state == TrackletState::TickState::Spawned) spawned.push_back(i);
  for (TrackletState& trk : tracklets_) {
    if (trk.tick_state != TrackletState::TickState::Untouched) continue;
    trk.tick_state = TrackletState::TickState::Missed;
    ++trk.misses_in_a_row;
    if (trk.misses_in_a_row > options_.max_age) {
      trk.status = TrackStatus::Ended;
      trk.end_tick = t;
      emit(Term(Term::Repr{trk.id}), vocab::kEnds, Term::integer(t));
      emit(Term(Term::Repr{trk.gallery_box}), vocab::kIsSampleOf, Term(Term::Repr{trk.object}));
      for (std::size_t i : spawned) {
        const TrackletState& fresh = tracklets_[i];
        if (trk.appearance_id.empty() || fresh.appearance_id != trk.appearance_id) continue;
        Term match_qt = Term::quoted(Term(Term::Repr{fresh.current_box}), Iri{vocab::kVMatch},
                                     Term(Term::Repr{trk.gallery_box}));
        emit(match_qt, vocab::kScore,
             Term::decimal(rdf::format_double(options_.vmatch_score)));
      }
      GalleryEntry entry;
      entry.box = trk.gallery_box;
      entry.object = trk.object;
      entry.tracklet = trk.id;
      entry.appearance_id = trk.appearance_id;
      entry.end_tick = t;
      gallery_.push_back(std::move(entry));
    }
  }
  return facts;
}

TrackletManager::TickClose TrackletManager::finalize(Tick t) {
  TickClose out;
  auto emit_next = [&](Term s, const std::string& p, Term o) {
    out.next_facts.push_back(
        TimestampedFact{Triple{std::move(s), Iri{p}, std::move(o)}, t + 1});
  };

  for (TrackletState& trk : tracklets_) {
    bool display = trk.status == TrackStatus::Confirmed;
    if (display) {
      MotRow row;
      row.frame = t;
      row.track_id = trk.object_num;
      row.box = state_box(trk.kalman);
      switch (trk.tick_state) {
        case TrackletState::TickState::Matched:
        case TrackletState::TickState::Spawned:
          row.score = trk.last_score;
          break;
        default:
          row.score = 0.0;
          row.predicted = true;
      }
      if (!row.predicted || options_.emit_predictions) out.rows.push_back(row);
    }
  }
  std::sort(out.rows.begin(), out.rows.end(),
            [](const MotRow& a, const MotRow& b) { return a.track_id < b.track_id; });

  // Drop ended tracklets from the live set.
  tracklets_.erase(std::remove_if(tracklets_.begin(), tracklets_.end(),
                                  [](const TrackletState& trk) {
                                    return trk.status == TrackStatus::Ended;
                                  }),
                   tracklets_.end());

  // Predict each live tracklet into the next tick and publish the prediction.
  for (TrackletState& trk : tracklets_) {
    trk.kalman = kf_predict(trk.kalman, options_.kalman);
    trk.current_box = extractor_->mint_box();
    Box pred = state_box(trk.kalman);

    Term trk_term(Term::Repr{trk.id});
    Term box_term(Term::Repr{trk.current_box});
    Term qt = Term::quoted(trk_term, Iri{vocab::kTrk}, box_term);
    emit_next(qt, rdf::kRdfType, Term::iri(vocab::kTracklet));
    emit_next(qt, vocab::kUsedProcedure, Term::iri(vocab::kKalmanFilter));
    emit_next(trk_term, vocab::kTrklet, Term(Term::Repr{trk.object}));
    emit_next(Term(Term::Repr{trk.object}), vocab::kInFov, Term::iri(vocab::kFoV));
    emit_next(box_term, vocab::kBoxX, Term::decimal(rdf::format_double(pred.x)));
    emit_next(box_term, vocab::kBoxY, Term::decimal(rdf::format_double(pred.y)));
    emit_next(box_term, vocab::kBoxW, Term::decimal(rdf::format_double(pred.w)));
    emit_next(box_term, vocab::kBoxH, Term::decimal(rdf::format_double(pred.h)));
  }

  // Republish re-identification context while the horizon is open.
  gallery_.erase(std::remove_if(gallery_.begin(), gallery_.end(),
                                [&](const GalleryEntry& g) {
                                  return t + 1 >= g.end_tick + options_.reid_horizon;
                                }),
                 gallery_.end());
  for (const GalleryEntry& g : gallery_) {
    emit_next(Term(Term::Repr{g.tracklet}), vocab::kEnds, Term::integer(g.end_tick));
    emit_next(Term(Term::Repr{g.box}), vocab::kIsSampleOf, Term(Term::Repr{g.object}));
  }
  return out;
}

std::vector<GalleryEntry> TrackletManager::gallery(Tick t) const {
  std::vector<GalleryEntry> out;
  for (const GalleryEntry& g : gallery_)
    if (t < g.end_tick + options_.reid_horizon) out.push_back(g);
  return out;
}

AdvanceResult advance_tracklets(TrackletManager& manager, const fusion::WorldSelection& selection,
                                const std::vector<MintedDetection>& detections, Tick t) {
  AdvanceResult result;
  result.current_facts = manager.apply(selection, detections, t, true);
  result.close = manager.finalize(t);
  return result;
}

}  // namespace ssf::tracker
