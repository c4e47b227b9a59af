#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ssf/rdf/term.hpp"

namespace ssf::rdf {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, int line, int col)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + message),
        line_(line),
        col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

/// Prefix declarations, e.g. "sosa" -> "http://www.w3.org/ns/sosa/".
/// The empty string keys the default prefix ":".
class PrefixMap {
 public:
  void declare(std::string prefix, std::string iri) { map_[std::move(prefix)] = std::move(iri); }
  bool has(const std::string& prefix) const { return map_.count(prefix) > 0; }
  std::string expand(const std::string& prefix, const std::string& local) const;

  /// Qualifies an IRI against the longest declared namespace, if any.
  std::optional<std::string> qualify(const std::string& iri) const;

  const std::map<std::string, std::string>& entries() const { return map_; }

 private:
  std::map<std::string, std::string> map_;
};

/// The prefix set shipped with the engine (:, ssr:, sosa:, sh:, rdf:, xsd:).
const PrefixMap& standard_prefixes();

/// Reads @prefix declarations (a prelude file) on top of the initial map.
PrefixMap parse_prefix_document(std::string_view text,
                                const PrefixMap& initial = standard_prefixes());

/// Parses the Turtle-star subset: @prefix declarations, quoted triples,
/// ';' predicate lists, the 'a' keyword, single-quoted strings, bare numbers,
/// '#'//'//' comments. A group's sosa:resultTime annotation is consumed as the
/// timestamp of every fact in the group; groups without one get default_tick.
std::vector<TimestampedFact> parse_fact_document(std::string_view text,
                                                 const PrefixMap& initial = standard_prefixes(),
                                                 Tick default_tick = 0);

std::string serialize_term(const Term& term, const PrefixMap& prefixes = standard_prefixes());

/// One statement group per fact, resultTime carried inline:
/// parse_fact_document(serialize_fact(f)) == {f}.
std::string serialize_fact(const TimestampedFact& fact,
                           const PrefixMap& prefixes = standard_prefixes());

std::string serialize_document(const std::vector<TimestampedFact>& facts,
                               const PrefixMap& prefixes = standard_prefixes());

/// Shortest plain-decimal form that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace ssf::rdf
