#pragma once

#include <map>
#include <optional>
#include <string>

#include "ssf/ql/ast.hpp"
#include "ssf/rdf/term.hpp"

namespace ssf::engine {

/// Variable assignment built during matching. Timestamp variables bind to
/// integer literals, so a block timestamp and an integer object unify.
class Binding {
 public:
  /// False when the variable is already bound to a different value.
  bool bind(const std::string& var, rdf::Term value) {
    auto [it, inserted] = map_.emplace(var, std::move(value));
    if (inserted) return true;
    return it->second == value;
  }

  const rdf::Term* find(const std::string& var) const {
    auto it = map_.find(var);
    return it == map_.end() ? nullptr : &it->second;
  }

  std::optional<rdf::Tick> tick(const std::string& var) const {
    const rdf::Term* t = find(var);
    if (t == nullptr || !t->is_literal()) return std::nullopt;
    if (t->as_literal().datatype.value != rdf::xsd::kInteger) return std::nullopt;
    return std::stoll(t->as_literal().lexical);
  }

  const std::map<std::string, rdf::Term>& entries() const { return map_; }
  std::size_t size() const { return map_.size(); }

  bool operator==(const Binding& o) const { return map_ == o.map_; }
  bool operator<(const Binding& o) const { return map_ < o.map_; }

 private:
  std::map<std::string, rdf::Term> map_;
};

/// Grounds a term-or-variable; nullopt when a variable is unbound.
std::optional<rdf::Term> instantiate(const ql::TermOrVar& tv, const Binding& binding);

}  // namespace ssf::engine
