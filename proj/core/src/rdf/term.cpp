#include "ssf/rdf/term.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

namespace ssf::rdf {

Term Term::quoted(Term subject, Iri predicate, Term object) {
  QuotedTriple qt;
  qt.subject = std::make_shared<const Term>(std::move(subject));
  qt.predicate = std::move(predicate);
  qt.object = std::make_shared<const Term>(std::move(object));
  return Term(Repr{std::move(qt)});
}

namespace {

bool lexes_as_number(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') ++i;
  bool digits = false, dot = false;
  for (; i < s.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      digits = true;
    } else if (s[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits;
}

}  // namespace

std::optional<double> Term::numeric() const {
  if (!is_literal()) return std::nullopt;
  const Literal& lit = as_literal();
  if (!lexes_as_number(lit.lexical)) return std::nullopt;
  return std::strtod(lit.lexical.c_str(), nullptr);
}

int Term::quote_depth() const {
  if (!is_quoted()) return 0;
  const QuotedTriple& qt = as_quoted();
  return 1 + std::max(qt.subject->quote_depth(), qt.object->quote_depth());
}

bool Term::operator==(const Term& other) const {
  if (repr_.index() != other.repr_.index()) return false;
  if (is_quoted()) {
    const QuotedTriple& a = as_quoted();
    const QuotedTriple& b = other.as_quoted();
    return a.predicate == b.predicate && *a.subject == *b.subject && *a.object == *b.object;
  }
  return repr_ == other.repr_;
}

std::strong_ordering Term::operator<=>(const Term& other) const {
  if (auto c = repr_.index() <=> other.repr_.index(); c != 0) return c;
  switch (repr_.index()) {
    case 0:
      return std::get<Iri>(repr_) <=> std::get<Iri>(other.repr_);
    case 1:
      return std::get<BlankNode>(repr_) <=> std::get<BlankNode>(other.repr_);
    case 2:
      return std::get<Literal>(repr_) <=> std::get<Literal>(other.repr_);
    default: {
      const QuotedTriple& a = as_quoted();
      const QuotedTriple& b = other.as_quoted();
      if (auto c = *a.subject <=> *b.subject; c != 0) return c;
      if (auto c = a.predicate <=> b.predicate; c != 0) return c;
      return *a.object <=> *b.object;
    }
  }
}

}  // namespace ssf::rdf
