#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ssf/ql/ast.hpp"
#include "ssf/rdf/term.hpp"

namespace ssf::fed {

class FederationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NodeDescriptor {
  std::string id;
  std::string endpoint = "local";  // "local" or host:port
  std::set<rdf::StreamId> streams;
  std::map<rdf::StreamId, std::set<rdf::Iri>> predicates;
};

/// Work delegated to the node owning one stream block: relay rules that
/// evaluate the block's patterns (plus every pushable filter) at the source
/// and forward the participating facts, timestamps preserved, to an
/// intermediate stream at the subscriber.
struct Fragment {
  std::string target_node;
  rdf::StreamId source_stream;
  rdf::StreamId result_stream;
  bool naf = false;
  std::vector<ql::Rule> relay_rules;
  std::vector<ql::FilterPtr> pushed_filters;
  std::set<std::string> block_vars;
};

struct QueryPlan {
  std::string root_node;
  ql::Rule original;
  /// Original rule with remote blocks re-pointed at intermediate streams;
  /// all filters are re-checked here, so pushdown stays a pure reduction.
  ql::Rule root_rule;
  std::vector<Fragment> fragments;

  bool fully_local() const { return fragments.empty(); }
};

/// Splits the rule: every block whose stream another node owns becomes a
/// fragment; filters whose variables live in one block and join nothing else
/// push down with it; cross-block conjuncts, NAF checks and the final join
/// stay at the root.
QueryPlan rewrite(const ql::Rule& rule, const std::vector<NodeDescriptor>& registry,
                  const std::string& self);

/// Every pushed filter must be fully bound inside its fragment.
void check_pushdown_soundness(const QueryPlan& plan);

}  // namespace ssf::fed
