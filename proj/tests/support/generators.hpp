#pragma once

#include <random>
#include <string>
#include <vector>

#include "ssf/rdf/term.hpp"
#include "ssf/rdf/turtle.hpp"
#include "ssf/rdf/vocab.hpp"

namespace gen {

using ssf::rdf::Term;
using ssf::rdf::TimestampedFact;
using ssf::rdf::Triple;

inline std::string random_name(std::mt19937& rng, int len = 5) {
  static const char chars[] = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::uniform_int_distribution<int> pick(0, sizeof(chars) - 2);
  std::string out;
  for (int i = 0; i < len; ++i) out += chars[pick(rng)];
  return out;
}

inline Term random_literal(std::mt19937& rng) {
  std::uniform_int_distribution<int> kind(0, 3);
  switch (kind(rng)) {
    case 0:
      return Term::integer(std::uniform_int_distribution<long>(-1000, 1000)(rng));
    case 1: {
      std::uniform_real_distribution<double> value(-100.0, 100.0);
      return Term::decimal(ssf::rdf::format_double(value(rng)));
    }
    case 2:
      return Term::literal("it's a " + random_name(rng));  // apostrophe escaping
    default:
      return Term::literal(random_name(rng, 8));
  }
}

inline Term random_term(std::mt19937& rng, int depth = 0) {
  std::uniform_int_distribution<int> kind(0, depth == 0 ? 4 : 2);
  switch (kind(rng)) {
    case 0:
      return Term::iri(ssf::rdf::vocab::dflt(random_name(rng).c_str()));
    case 1:
      return Term::blank(random_name(rng));
    case 2:
      return random_literal(rng);
    default:
      return Term::quoted(random_term(rng, depth + 1),
                          ssf::rdf::Iri{ssf::rdf::vocab::dflt(random_name(rng).c_str())},
                          random_term(rng, depth + 1));
  }
}

inline Term random_subject(std::mt19937& rng) {
  Term t = random_term(rng);
  while (t.is_literal()) t = random_term(rng);
  return t;
}

inline TimestampedFact random_fact(std::mt19937& rng) {
  TimestampedFact fact;
  fact.triple = Triple{random_subject(rng),
                       ssf::rdf::Iri{ssf::rdf::vocab::dflt(random_name(rng).c_str())},
                       random_term(rng)};
  fact.timestamp = std::uniform_int_distribution<long>(0, 50)(rng);
  return fact;
}

}  // namespace gen
