#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssf/rdf/term.hpp"

namespace ssf::fusion {

/// One soft-rule instantiation: a candidate head fact plus the evidence that
/// produced it. Association-shaped hypotheses carry the detection box and the
/// target they propose to link; others (e.g. field-of-view entry events)
/// bypass the one-to-one constraints.
struct Hypothesis {
  rdf::Iri rule_id;
  rdf::TimestampedFact head_fact;
  std::optional<rdf::Term> detection;
  std::optional<rdf::Term> target;
  double confidence = 1.0;
  rdf::Tick tick = 0;
  std::string evidence;  // gate instance, e.g. "iou(?B1,?B2)=0.91"

  bool association() const { return detection.has_value() && target.has_value(); }

  bool operator==(const Hypothesis& o) const {
    return rule_id == o.rule_id && head_fact == o.head_fact && detection == o.detection &&
           target == o.target && confidence == o.confidence && tick == o.tick;
  }
};

/// Per-rule weight vector for soft rules; missing entries read as 1.0.
class RuleWeights {
 public:
  double get(const rdf::Iri& rule) const {
    auto it = weights_.find(rule.value);
    return it == weights_.end() ? 1.0 : it->second;
  }
  void set(const rdf::Iri& rule, double w) { weights_[rule.value] = w; }
  const std::map<std::string, double>& entries() const { return weights_; }

  /// rule_iri<TAB>weight lines.
  std::string to_tsv() const;
  static RuleWeights from_tsv(const std::string& text);

 private:
  std::map<std::string, double> weights_;
};

struct ExplanationRecord {
  enum class Status { Chosen, Bypass, RejectedConflict, RejectedDominated };
  Status status = Status::Chosen;
  Hypothesis hypothesis;
  double weight = 1.0;
  double contribution = 0.0;  // weight * confidence when chosen, else 0
  std::optional<Hypothesis> winner;  // for rejections: who beat it
};

struct WorldSelection {
  std::vector<Hypothesis> chosen;
  std::vector<ExplanationRecord> rejected;
  double score = 0.0;
};

}  // namespace ssf::fusion
