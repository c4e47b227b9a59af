#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ssf/ql/ast.hpp"
#include "ssf/rdf/turtle.hpp"

namespace ssf::ql {

struct ParseOptions {
  rdf::PrefixMap prefixes = rdf::standard_prefixes();
  /// Rules whose id contains this pattern are soft; all others hard.
  std::string soft_rule_id_pattern = "_w_";
  /// Reject rules whose head uses a variable without a positive occurrence.
  bool enforce_safety = true;
};

/// Parses zero or more sh:NodeShape rule wrappers, each holding a
/// CONSTRUCT/WHERE query in its sh:construct string.
std::vector<Rule> parse_rule_document(std::string_view text, const ParseOptions& options = {});

/// Parses a bare CONSTRUCT/WHERE query (no SHACL wrapper).
Rule parse_query(std::string_view text, rdf::Iri rule_id, const ParseOptions& options = {});

}  // namespace ssf::ql
