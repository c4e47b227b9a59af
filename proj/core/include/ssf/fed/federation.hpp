#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ssf/engine/engine.hpp"
#include "ssf/fed/plan.hpp"
#include "ssf/fed/protocol.hpp"

namespace ssf::fed {

struct TopologyNode {
  std::string id;
  std::string endpoint = "local";
  std::set<rdf::StreamId> streams;
};

struct Topology {
  std::vector<TopologyNode> nodes;
  std::string root;

  /// Flat text: `node <id> [endpoint]`, `owns <id> <stream-iri>`, `root <id>`.
  /// Stream IRIs may use the standard prefixes.
  static Topology parse(const std::string& text);

  std::vector<NodeDescriptor> descriptors() const;
};

struct Subscription {
  long id = 0;
  std::string source_node;
  rdf::StreamId sink_stream;
  std::string subquery_b64;  // relay rules installed at the source
  bool active = true;
  long delivered = 0;
  long emitted = 0;
};

/// In-process federation: one engine per node, message passing only. Each
/// tick runs every leaf node, delivers relayed facts to the root, then runs
/// the root. Relayed facts keep their own timestamps; a per-subscription
/// dedup gives exactly-once delivery of each result fact.
class Federation {
 public:
  Federation(const Topology& topology, engine::EngineOptions node_options = {});
  Federation(const Federation&) = delete;
  Federation& operator=(const Federation&) = delete;
  Federation(Federation&&) = delete;

  engine::Engine& engine(const std::string& node);
  const Topology& topology() const { return topology_; }

  /// Rewrites the rule against the topology, installs relay rules on the
  /// owning nodes and the residual rule on the root.
  std::vector<Subscription> deploy(const ql::Rule& rule,
                                   std::optional<rdf::StreamId> output_stream = std::nullopt);

  QueryPlan plan_for(const ql::Rule& rule) const;

  void push(const rdf::StreamId& stream, std::vector<rdf::TimestampedFact> facts);

  /// Root-node outputs for the tick.
  std::vector<engine::Output> evaluate_tick(rdf::Tick t);

  void unsubscribe(long sub_id);
  const std::vector<Subscription>& subscriptions() const { return subscriptions_; }

 private:
  struct Node {
    TopologyNode info;
    std::unique_ptr<engine::Engine> engine;
  };

  Node& node_of(const std::string& id);
  Node& owner_of(const rdf::StreamId& stream);

  Topology topology_;
  std::vector<Node> nodes_;
  std::vector<Subscription> subscriptions_;
  // per-subscription delivered-fact dedup for exactly-once relay
  std::map<long, std::set<rdf::TimestampedFact>> delivered_;
  long next_sub_id_ = 1;
};

}  // namespace ssf::fed
