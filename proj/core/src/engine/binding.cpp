#include "ssf/engine/binding.hpp"

namespace ssf::engine {

std::optional<rdf::Term> instantiate(const ql::TermOrVar& tv, const Binding& binding) {
  if (!ql::is_var(tv)) return ql::as_term(tv);
  const rdf::Term* bound = binding.find(ql::as_var(tv).name);
  if (bound == nullptr) return std::nullopt;
  return *bound;
}

}  // namespace ssf::engine
