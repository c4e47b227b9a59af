#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ssf/ql/ast.hpp"
#include "ssf/rdf/turtle.hpp"

namespace ssf::ql {

struct RuleReport {
  std::set<rdf::StreamId> streams;
  std::set<rdf::Iri> predicates;            // constant predicates, head and body
  std::map<std::string, int> variables;     // occurrence counts
  std::vector<Variable> unsafe_head_vars;

  bool safe() const { return unsafe_head_vars.empty(); }
};

RuleReport analyze_rule(const Rule& rule);

std::string report_to_string(const RuleReport& report,
                             const rdf::PrefixMap& prefixes = rdf::standard_prefixes());

}  // namespace ssf::ql
