#include "ssf/learn/perceptron.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace ssf::learn {

using fusion::Hypothesis;
using fusion::RuleWeights;
using fusion::WorldSelection;

namespace {

std::set<rdf::TimestampedFact> head_facts(const std::vector<Hypothesis>& chosen) {
  std::set<rdf::TimestampedFact> out;
  for (const Hypothesis& h : chosen) out.insert(h.head_fact);
  return out;
}

std::map<std::string, int> rule_counts(const std::vector<Hypothesis>& chosen) {
  std::map<std::string, int> out;
  for (const Hypothesis& h : chosen) ++out[h.rule_id.value];
  return out;
}

}  // namespace

TrainReport train(const std::vector<LabeledTick>& samples, RuleWeights init,
                  const TrainOptions& options) {
  TrainReport report;
  report.final_weights = std::move(init);
  if (options.learning_rate <= 0) throw std::invalid_argument("learning rate must be positive");

  // Feasibility: every gold fact must be achievable by some hypothesis.
  std::vector<const LabeledTick*> usable;
  for (const LabeledTick& s : samples) {
    std::set<rdf::TimestampedFact> achievable;
    for (const Hypothesis& h : s.hypotheses) achievable.insert(h.head_fact);
    bool ok = true;
    for (const rdf::TimestampedFact& g : s.gold) {
      if (!achievable.count(g)) {
        std::ostringstream msg;
        msg << "tick " << s.tick << ": gold fact not derivable by any hypothesis";
        report.infeasible.push_back(msg.str());
        ok = false;
        break;
      }
    }
    if (ok) usable.push_back(&s);
  }

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    int mismatches = 0;
    for (const LabeledTick* sample : usable) {
      WorldSelection chosen = fusion::select_world(sample->hypotheses, report.final_weights);
      std::set<rdf::TimestampedFact> gold_set(sample->gold.begin(), sample->gold.end());
      if (head_facts(chosen.chosen) == gold_set) continue;

      ++mismatches;
      // Best current explanation of the gold facts: select over the
      // hypotheses whose heads are gold.
      std::vector<Hypothesis> gold_candidates;
      for (const Hypothesis& h : sample->hypotheses)
        if (gold_set.count(h.head_fact)) gold_candidates.push_back(h);
      WorldSelection gold_struct = fusion::select_world(gold_candidates, report.final_weights);

      std::map<std::string, int> gold_counts = rule_counts(gold_struct.chosen);
      std::map<std::string, int> chosen_counts = rule_counts(chosen.chosen);
      std::set<std::string> rules;
      for (const auto& [r, c] : gold_counts) rules.insert(r);
      for (const auto& [r, c] : chosen_counts) rules.insert(r);
      for (const std::string& r : rules) {
        int delta = 0;
        if (auto it = gold_counts.find(r); it != gold_counts.end()) delta += it->second;
        if (auto it = chosen_counts.find(r); it != chosen_counts.end()) delta -= it->second;
        if (delta == 0) continue;
        rdf::Iri rule{r};
        double updated = report.final_weights.get(rule) + options.learning_rate * delta;
        report.final_weights.set(rule, std::max(0.0, updated));
      }
    }
    report.mismatches_per_epoch.push_back(mismatches);
    ++report.epochs_run;
    if (mismatches == 0) {
      report.converged = true;
      break;
    }
  }
  return report;
}

std::string TrainReport::to_string() const {
  std::ostringstream out;
  out << "epochs: " << epochs_run << "\n";
  out << "converged: " << (converged ? "yes" : "no") << "\n";
  out << "mismatches:";
  for (int m : mismatches_per_epoch) out << " " << m;
  out << "\nweights:\n" << final_weights.to_tsv();
  for (const std::string& msg : infeasible) out << "infeasible: " << msg << "\n";
  return out.str();
}

}  // namespace ssf::learn
