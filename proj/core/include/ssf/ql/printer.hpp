#pragma once

#include <string>

#include "ssf/ql/ast.hpp"
#include "ssf/rdf/turtle.hpp"

namespace ssf::ql {

/// Canonical CONSTRUCT/WHERE text; parse(print(r)) is structurally equal to r.
std::string print_query(const Rule& rule, const rdf::PrefixMap& prefixes = rdf::standard_prefixes());

/// Full sh:NodeShape wrapper around print_query.
std::string pretty_print(const Rule& rule, const rdf::PrefixMap& prefixes = rdf::standard_prefixes());

std::string print_filter(const FilterExpr& expr);
std::string print_pattern(const PatternStmt& stmt,
                          const rdf::PrefixMap& prefixes = rdf::standard_prefixes());

}  // namespace ssf::ql
