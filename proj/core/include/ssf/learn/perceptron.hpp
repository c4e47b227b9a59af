#pragma once

#include <string>
#include <vector>

#include "ssf/fusion/hypothesis.hpp"
#include "ssf/fusion/select.hpp"

namespace ssf::learn {

/// One training instance: the tick's candidate hypotheses and the head facts
/// the selection should reproduce.
struct LabeledTick {
  rdf::Tick tick = 0;
  std::vector<fusion::Hypothesis> hypotheses;
  std::vector<rdf::TimestampedFact> gold;
};

struct TrainOptions {
  double learning_rate = 0.1;
  int max_epochs = 100;
};

struct TrainReport {
  int epochs_run = 0;
  fusion::RuleWeights final_weights;
  std::vector<int> mismatches_per_epoch;
  bool converged = false;
  std::vector<std::string> infeasible;  // per-sample reports, samples skipped

  std::string to_string() const;
};

/// Structured-perceptron loop: per sample, select under the current weights;
/// on a head-fact mismatch move each rule weight toward the gold derivation
/// counts, projected at zero. Stops after the first zero-mismatch epoch.
TrainReport train(const std::vector<LabeledTick>& samples, fusion::RuleWeights init,
                  const TrainOptions& options = {});

}  // namespace ssf::learn
