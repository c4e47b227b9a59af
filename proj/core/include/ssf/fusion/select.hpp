#pragma once

#include <set>
#include <string>
#include <vector>

#include "ssf/fusion/hypothesis.hpp"
#include "ssf/rdf/turtle.hpp"

namespace ssf::fusion {

/// Picks the consistent hypothesis subset maximizing sum of
/// weight(rule) * confidence, subject to: each detection in at most one chosen
/// association, each target in at most one. Non-association hypotheses are
/// always chosen. Among optimal matchings the lexicographically least by
/// (target IRI, detection IRI) is returned.
WorldSelection select_world(std::vector<Hypothesis> hypotheses, const RuleWeights& weights);

/// As above, but detections/targets in the blocked sets are unavailable
/// (already claimed earlier in the same tick).
WorldSelection select_world(std::vector<Hypothesis> hypotheses, const RuleWeights& weights,
                            const std::set<rdf::Term>& blocked_detections,
                            const std::set<rdf::Term>& blocked_targets);

std::vector<ExplanationRecord> explain(const WorldSelection& selection,
                                       const RuleWeights& weights);

std::string explanation_to_tsv(const ExplanationRecord& record,
                               const rdf::PrefixMap& prefixes = rdf::standard_prefixes());

}  // namespace ssf::fusion
