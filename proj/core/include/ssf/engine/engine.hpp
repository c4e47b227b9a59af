#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssf/engine/binding.hpp"
#include "ssf/engine/window.hpp"
#include "ssf/fusion/hypothesis.hpp"
#include "ssf/fusion/select.hpp"
#include "ssf/ql/ast.hpp"
#include "ssf/tracker/box.hpp"

namespace ssf::engine {

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EngineOptions {
  double tick_seconds = 1.0;
  /// Derived facts become visible within the emitting tick and evaluation
  /// iterates to a fixpoint (capped); off = visible from the next tick.
  bool same_tick_fixpoint = false;
  int fixpoint_cap = 16;
  /// Head-fact predicate marking one-to-one association hypotheses.
  std::string association_predicate;
  /// Quoted-pattern predicate whose object names the detection box.
  std::string detection_predicate;
  EngineOptions();
};

/// Per-rule routing: constructed facts re-enter this stream (default: the
/// rule's first positive block) unless feedback is disabled.
struct RuleRouting {
  bool feedback = true;
  std::optional<rdf::StreamId> output_stream;
};

struct Diagnostics {
  long builtin_errors = 0;
  long discarded_bindings = 0;
  Diagnostics& operator+=(const Diagnostics& o) {
    builtin_errors += o.builtin_errors;
    discarded_bindings += o.discarded_bindings;
    return *this;
  }
};

struct Output {
  rdf::StreamId stream;
  rdf::TimestampedFact fact;
  rdf::Iri rule_id;
  bool operator==(const Output& o) const {
    return stream == o.stream && fact == o.fact && rule_id == o.rule_id;
  }
};

struct TickResult {
  std::vector<Output> outputs;  // hard heads plus selected soft heads
  std::vector<fusion::Hypothesis> hypotheses;  // candidates raised this call
  fusion::WorldSelection selection;
  Diagnostics diagnostics;
};

/// Geometry lookup for the iou builtin, fed from :x/:y/:w/:h facts.
class BoxIndex {
 public:
  void observe(const rdf::TimestampedFact& fact);
  std::optional<tracker::Box> resolve(const rdf::Term& term) const;

 private:
  struct Partial {
    std::optional<double> x, y, w, h;
  };
  std::map<std::string, Partial> partial_;
};

/// Evaluates iou/arithmetic/comparison filters; nullopt = evaluation error
/// (unbound variable, non-numeric operand, unresolvable box).
std::optional<bool> eval_filter(const ql::FilterExpr& expr, const Binding& binding,
                                const BoxIndex& boxes, Diagnostics* diagnostics = nullptr);

using Sink = std::function<void(const rdf::StreamId&, const rdf::TimestampedFact&)>;

class Engine {
 public:
  explicit Engine(EngineOptions options = {});
  ~Engine();

  void register_stream(const rdf::StreamId& id);
  bool has_stream(const rdf::StreamId& id) const;

  /// Streams referenced by the rule must already be registered.
  void add_rule(const ql::Rule& rule, RuleRouting routing = {});
  void set_weights(fusion::RuleWeights weights) { weights_ = std::move(weights); }
  const fusion::RuleWeights& weights() const { return weights_; }
  void set_static_graph(rdf::StaticGraph graph) { graph_ = std::move(graph); }

  /// Thread-safe; facts are queued and drained at evaluation. Timestamps must
  /// be monotone (non-decreasing) per stream.
  void push(const rdf::StreamId& id, std::vector<rdf::TimestampedFact> facts);

  /// Queues facts without the per-stream monotonicity check; transports use
  /// this for remote facts that carry their own logical time.
  void inject(const rdf::StreamId& id, std::vector<rdf::TimestampedFact> facts);

  /// Runs all rules for tick t. Repeated calls at the same tick evaluate the
  /// delta: only derivations not yet produced this tick are returned.
  TickResult evaluate_tick(rdf::Tick t);

  void add_sink(Sink sink) { sinks_.push_back(std::move(sink)); }

  rdf::Tick current_tick() const { return current_tick_; }
  const Diagnostics& diagnostics() const { return total_diagnostics_; }
  const BoxIndex& boxes() const { return boxes_; }

  /// All block extensions of the seed: every pattern matched in the window at
  /// tick now, block filters applied. Exposed for join-level tests.
  std::vector<Binding> match_block(const ql::StreamBlock& block, const WindowState& window,
                                   const Binding& seed, rdf::Tick now,
                                   Diagnostics* diagnostics = nullptr) const;

  const WindowState& window(std::size_t rule_index, std::size_t block_index,
                            bool naf = false) const;

  struct Atom;
  struct CompiledBlock;
  struct CompiledRule;

 private:
  void route_fact(const rdf::StreamId& stream, const rdf::TimestampedFact& fact);
  void drain_mailbox();
  void advance_to(rdf::Tick t);
  std::vector<Binding> match_atoms(const std::vector<Atom>& atoms,
                                   const std::vector<const WindowState*>& atom_windows,
                                   const Binding& seed, rdf::Tick now,
                                   Diagnostics* diagnostics) const;
  bool evaluate_rule(CompiledRule& rule, rdf::Tick t, TickResult& result);

  EngineOptions options_;
  fusion::RuleWeights weights_;
  rdf::StaticGraph graph_;

  std::map<rdf::StreamId, rdf::Tick> stream_last_ts_;
  std::vector<std::unique_ptr<CompiledRule>> rules_;
  std::vector<std::size_t> rule_order_;  // stratified evaluation order

  std::mutex mailbox_mutex_;
  std::vector<std::pair<rdf::StreamId, rdf::TimestampedFact>> mailbox_;
  std::vector<std::pair<rdf::StreamId, rdf::TimestampedFact>> deferred_feedback_;

  BoxIndex boxes_;
  std::vector<Sink> sinks_;

  rdf::Tick current_tick_ = -1;
  // Per-tick dedup and cumulative association constraints.
  std::set<std::pair<std::string, rdf::TimestampedFact>> emitted_;
  std::set<std::tuple<std::string, rdf::TimestampedFact, std::string>> raised_;
  std::set<rdf::Term> used_detections_;
  std::set<rdf::Term> used_targets_;
  Diagnostics total_diagnostics_;
};

}  // namespace ssf::engine
