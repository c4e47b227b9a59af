#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace ssf::rdf {

/// Logical time point, one unit per engine tick.
using Tick = std::int64_t;

namespace xsd {
inline constexpr const char* kString = "http://www.w3.org/2001/XMLSchema#string";
inline constexpr const char* kInteger = "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr const char* kDecimal = "http://www.w3.org/2001/XMLSchema#decimal";
}  // namespace xsd

inline constexpr const char* kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

class Term;

struct Iri {
  std::string value;
  auto operator<=>(const Iri&) const = default;
};

struct BlankNode {
  std::string label;
  auto operator<=>(const BlankNode&) const = default;
};

struct Literal {
  std::string lexical;
  Iri datatype{std::string(xsd::kString)};
  auto operator<=>(const Literal&) const = default;
};

/// A quoted (embedded) triple usable as subject or object of other triples.
/// Terms are shared immutably, so copies are cheap.
struct QuotedTriple {
  std::shared_ptr<const Term> subject;
  Iri predicate;
  std::shared_ptr<const Term> object;

  bool operator==(const QuotedTriple& other) const;  // structural recursion
};

class Term {
 public:
  using Repr = std::variant<Iri, BlankNode, Literal, QuotedTriple>;

  Term() : repr_(Iri{}) {}
  explicit Term(Repr r) : repr_(std::move(r)) {}

  static Term iri(std::string v) { return Term(Iri{std::move(v)}); }
  static Term blank(std::string label) { return Term(BlankNode{std::move(label)}); }
  static Term literal(std::string lexical, std::string datatype = xsd::kString) {
    return Term(Literal{std::move(lexical), Iri{std::move(datatype)}});
  }
  static Term integer(std::int64_t v) {
    return Term(Literal{std::to_string(v), Iri{std::string(xsd::kInteger)}});
  }
  static Term decimal(const std::string& lexical) {
    return Term(Literal{lexical, Iri{std::string(xsd::kDecimal)}});
  }
  static Term quoted(Term subject, Iri predicate, Term object);

  bool is_iri() const { return std::holds_alternative<Iri>(repr_); }
  bool is_blank() const { return std::holds_alternative<BlankNode>(repr_); }
  bool is_literal() const { return std::holds_alternative<Literal>(repr_); }
  bool is_quoted() const { return std::holds_alternative<QuotedTriple>(repr_); }

  const Iri& as_iri() const { return std::get<Iri>(repr_); }
  const BlankNode& as_blank() const { return std::get<BlankNode>(repr_); }
  const Literal& as_literal() const { return std::get<Literal>(repr_); }
  const QuotedTriple& as_quoted() const { return std::get<QuotedTriple>(repr_); }
  const Repr& repr() const { return repr_; }

  /// Numeric view of a literal. Integer/decimal literals always qualify;
  /// string literals qualify when the whole lexical form parses as a number
  /// (filters compare '0.8' numerically against 0.8).
  std::optional<double> numeric() const;

  /// Nesting depth of quoted triples: non-quoted terms are 0.
  int quote_depth() const;

  bool operator==(const Term& other) const;
  bool operator!=(const Term& other) const { return !(*this == other); }
  std::strong_ordering operator<=>(const Term& other) const;

 private:
  Repr repr_;
};

inline bool QuotedTriple::operator==(const QuotedTriple& other) const {
  return predicate == other.predicate && *subject == *other.subject && *object == *other.object;
}

/// An asserted triple. The predicate is always an IRI.
struct Triple {
  Term subject;
  Iri predicate;
  Term object;

  bool operator==(const Triple&) const = default;
  std::strong_ordering operator<=>(const Triple& o) const {
    if (auto c = subject <=> o.subject; c != 0) return c;
    if (auto c = predicate <=> o.predicate; c != 0) return c;
    return object <=> o.object;
  }
};

/// A triple carrying a logical timestamp; immutable and value-comparable.
struct TimestampedFact {
  Triple triple;
  Tick timestamp = 0;

  bool operator==(const TimestampedFact&) const = default;
  std::strong_ordering operator<=>(const TimestampedFact& o) const {
    if (auto c = timestamp <=> o.timestamp; c != 0) return c;
    return triple <=> o.triple;
  }
};

struct StreamId {
  Iri iri;
  auto operator<=>(const StreamId&) const = default;
};

/// Duplicate-free background knowledge without timestamps.
class StaticGraph {
 public:
  void insert(Triple t) { triples_.insert(std::move(t)); }
  bool contains(const Triple& t) const { return triples_.count(t) > 0; }
  std::size_t size() const { return triples_.size(); }
  const std::set<Triple>& triples() const { return triples_; }

 private:
  std::set<Triple> triples_;
};

}  // namespace ssf::rdf
