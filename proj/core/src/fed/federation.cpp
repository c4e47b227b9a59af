#include "ssf/fed/federation.hpp"

#include <algorithm>
#include <sstream>

#include "ssf/ql/printer.hpp"
#include "ssf/rdf/turtle.hpp"

namespace ssf::fed {

using engine::Engine;
using engine::EngineOptions;
using engine::Output;
using rdf::StreamId;
using rdf::TimestampedFact;

Topology Topology::parse(const std::string& text) {
  Topology topo;
  std::istringstream in(text);
  std::string line;
  const rdf::PrefixMap& prefixes = rdf::standard_prefixes();
  auto expand_stream = [&](const std::string& token) {
    auto colon = token.find(':');
    if (token.front() != '<' && colon != std::string::npos &&
        prefixes.has(token.substr(0, colon)))
      return StreamId{rdf::Iri{prefixes.expand(token.substr(0, colon), token.substr(colon + 1))}};
    std::string iri = token;
    if (!iri.empty() && iri.front() == '<' && iri.back() == '>') iri = iri.substr(1, iri.size() - 2);
    return StreamId{rdf::Iri{iri}};
  };
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word) || word[0] == '#') continue;
    if (word == "node") {
      TopologyNode n;
      if (!(ls >> n.id)) throw FederationError("topology line " + std::to_string(line_no));
      if (!(ls >> n.endpoint)) n.endpoint = "local";
      topo.nodes.push_back(std::move(n));
    } else if (word == "owns") {
      std::string id, stream;
      if (!(ls >> id >> stream)) throw FederationError("topology line " + std::to_string(line_no));
      bool found = false;
      for (TopologyNode& n : topo.nodes) {
        if (n.id == id) {
          n.streams.insert(expand_stream(stream));
          found = true;
        }
      }
      if (!found) throw FederationError("owns before node: " + id);
    } else if (word == "root") {
      if (!(ls >> topo.root)) throw FederationError("topology line " + std::to_string(line_no));
    } else {
      throw FederationError("topology line " + std::to_string(line_no) + ": unknown directive " +
                            word);
    }
  }
  if (topo.root.empty() && !topo.nodes.empty()) topo.root = topo.nodes.front().id;
  return topo;
}

std::vector<NodeDescriptor> Topology::descriptors() const {
  std::vector<NodeDescriptor> out;
  for (const TopologyNode& n : nodes) {
    NodeDescriptor d;
    d.id = n.id;
    d.endpoint = n.endpoint;
    d.streams = n.streams;
    out.push_back(std::move(d));
  }
  return out;
}

Federation::Federation(const Topology& topology, EngineOptions node_options)
    : topology_(topology) {
  for (const TopologyNode& info : topology_.nodes) {
    if (info.endpoint != "local")
      throw FederationError("node unreachable: " + info.id + " at " + info.endpoint +
                            " (in-process harness supports local nodes)");
    Node node;
    node.info = info;
    node.engine = std::make_unique<Engine>(node_options);
    for (const StreamId& s : info.streams) node.engine->register_stream(s);
    nodes_.push_back(std::move(node));
  }
  node_of(topology_.root);  // must exist
}

Federation::Node& Federation::node_of(const std::string& id) {
  for (Node& n : nodes_)
    if (n.info.id == id) return n;
  throw FederationError("unknown node: " + id);
}

Federation::Node& Federation::owner_of(const StreamId& stream) {
  for (Node& n : nodes_)
    if (n.info.streams.count(stream)) return n;
  throw FederationError("unadvertised stream: " + stream.iri.value);
}

Engine& Federation::engine(const std::string& node) { return *node_of(node).engine; }

QueryPlan Federation::plan_for(const ql::Rule& rule) const {
  return rewrite(rule, topology_.descriptors(), topology_.root);
}

std::vector<Subscription> Federation::deploy(const ql::Rule& rule,
                                             std::optional<StreamId> output_stream) {
  QueryPlan plan = plan_for(rule);
  check_pushdown_soundness(plan);

  Node& root = node_of(topology_.root);
  std::vector<Subscription> created;

  for (const Fragment& frag : plan.fragments) {
    Node& target = node_of(frag.target_node);
    Subscription sub;
    sub.id = next_sub_id_++;
    sub.source_node = frag.target_node;
    sub.sink_stream = frag.result_stream;
    {
      std::ostringstream doc;
      for (const ql::Rule& r : frag.relay_rules) doc << ql::print_query(r) << "\n";
      sub.subquery_b64 = base64_encode(doc.str());
    }

    if (!root.engine->has_stream(frag.result_stream))
      root.engine->register_stream(frag.result_stream);

    engine::RuleRouting routing;
    routing.feedback = false;
    routing.output_stream = frag.result_stream;
    for (const ql::Rule& relay : frag.relay_rules) target.engine->add_rule(relay, routing);

    const long sub_id = sub.id;
    Engine* root_engine = root.engine.get();
    target.engine->add_sink([this, sub_id, root_engine, result = frag.result_stream](
                                const StreamId& stream, const TimestampedFact& fact) {
      if (stream != result) return;
      for (Subscription& s : subscriptions_) {
        if (s.id != sub_id || !s.active) continue;
        ++s.emitted;
        if (delivered_[sub_id].insert(fact).second) {
          ++s.delivered;
          // Logical time travels with the data: injected facts keep their own
          // timestamps regardless of the subscriber's ingestion order.
          root_engine->inject(result, {fact});
        }
      }
    });

    subscriptions_.push_back(sub);
    created.push_back(sub);
  }

  engine::RuleRouting root_routing;
  root_routing.feedback = false;
  if (output_stream) {
    root_routing.output_stream = output_stream;
  } else if (!plan.original.body.positive.empty()) {
    root_routing.output_stream = plan.original.body.positive.front().stream;
  }
  // Intermediate streams the root rule reads may belong to local blocks too.
  for (const ql::StreamBlock& b : plan.root_rule.body.positive)
    if (!root.engine->has_stream(b.stream)) root.engine->register_stream(b.stream);
  for (const ql::StreamBlock& b : plan.root_rule.body.naf)
    if (!root.engine->has_stream(b.stream)) root.engine->register_stream(b.stream);
  root.engine->add_rule(plan.root_rule, root_routing);

  return created;
}

void Federation::push(const StreamId& stream, std::vector<TimestampedFact> facts) {
  owner_of(stream).engine->push(stream, std::move(facts));
}

std::vector<Output> Federation::evaluate_tick(rdf::Tick t) {
  // Leaves first, root last; deliveries happen inside the leaf evaluations.
  std::vector<Node*> leaves;
  for (Node& n : nodes_)
    if (n.info.id != topology_.root) leaves.push_back(&n);
  std::sort(leaves.begin(), leaves.end(),
            [](const Node* a, const Node* b) { return a->info.id < b->info.id; });
  for (Node* n : leaves) n->engine->evaluate_tick(t);

  engine::TickResult root_result = node_of(topology_.root).engine->evaluate_tick(t);

  // Prune the exactly-once ledger well behind any window horizon.
  for (auto& [sub, facts] : delivered_) {
    for (auto it = facts.begin(); it != facts.end();) {
      if (it->timestamp < t - 64) {
        it = facts.erase(it);
      } else {
        ++it;
      }
    }
  }
  return root_result.outputs;
}

void Federation::unsubscribe(long sub_id) {
  for (Subscription& s : subscriptions_) {
    if (s.id == sub_id) {
      s.active = false;
      return;
    }
  }
  throw FederationError("unknown subscription: " + std::to_string(sub_id));
}

}  // namespace ssf::fed
