#include "ssf/pipeline.hpp"

#include "ssf/rdf/vocab.hpp"

namespace ssf {

using rdf::StreamId;
using rdf::Tick;

TrackingPipeline::TrackingPipeline(const std::vector<ql::Rule>& rules, const Config& config,
                                   fusion::RuleWeights weights)
    : config_(config),
      stream_{rdf::Iri{rdf::vocab::dflt("ssr")}},
      engine_(config.engine_options()),
      extractor_(config.extractor_options()),
      tracklets_(config.tracker_options(), &extractor_) {
  engine_.register_stream(stream_);
  engine_.set_weights(std::move(weights));
  for (const ql::Rule& rule : rules) engine_.add_rule(rule);
}

TickOutput TrackingPipeline::process_tick(Tick t,
                                          const std::vector<tracker::DetectionRecord>& records) {
  TickOutput out;
  std::vector<rdf::TimestampedFact> facts =
      extractor_.extract(records, t, tracklets_.gallery(t), &out.minted);
  engine_.push(stream_, facts);

  bool first_pass = true;
  int phase = 0;
  while (true) {
    engine::TickResult res = engine_.evaluate_tick(t);
    out.diagnostics += res.diagnostics;
    for (engine::Output& o : res.outputs) out.stream_outputs.push_back(std::move(o));
    out.selection.chosen.insert(out.selection.chosen.end(), res.selection.chosen.begin(),
                                res.selection.chosen.end());
    out.selection.rejected.insert(out.selection.rejected.end(), res.selection.rejected.begin(),
                                  res.selection.rejected.end());
    out.selection.score += res.selection.score;

    std::vector<rdf::TimestampedFact> tracker_facts =
        tracklets_.apply(res.selection, out.minted, t, first_pass);
    first_pass = false;
    if (!tracker_facts.empty()) engine_.push(stream_, tracker_facts);

    bool progressed = !res.outputs.empty() || !res.hypotheses.empty() || !tracker_facts.empty();
    ++phase;
    if (!config_.same_tick_fixpoint || !progressed || phase >= config_.fixpoint_cap) break;
  }

  tracker::TrackletManager::TickClose close = tracklets_.finalize(t);
  out.rows = close.rows;
  if (!close.next_facts.empty()) engine_.push(stream_, close.next_facts);
  return out;
}

}  // namespace ssf
