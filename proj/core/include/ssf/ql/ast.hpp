#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ssf/rdf/term.hpp"

namespace ssf::ql {

struct Variable {
  std::string name;
  auto operator<=>(const Variable&) const = default;
};

using TermOrVar = std::variant<rdf::Term, Variable>;

inline bool is_var(const TermOrVar& tv) { return std::holds_alternative<Variable>(tv); }
inline const Variable& as_var(const TermOrVar& tv) { return std::get<Variable>(tv); }
inline const rdf::Term& as_term(const TermOrVar& tv) { return std::get<rdf::Term>(tv); }

/// One-level quoted-triple pattern `<< ?X p ?Y >>`.
struct QtPattern {
  TermOrVar subject;
  TermOrVar predicate;
  TermOrVar object;
  bool operator==(const QtPattern&) const = default;
};

/// `s p o` with an optional `@ ?T` timestamp variable.
struct PlainPattern {
  TermOrVar subject;
  TermOrVar predicate;
  TermOrVar object;
  std::optional<Variable> ts_var;
  bool operator==(const PlainPattern&) const = default;
};

struct PredObj {
  TermOrVar predicate;
  TermOrVar object;
  bool operator==(const PredObj&) const = default;
};

/// `<< ... >> @ ?T; p1 o1; p2 o2` — a quoted-triple occurrence with
/// annotation patterns whose subject is the quoted triple. With no
/// annotations the statement matches the triple itself (asserted or quoted).
struct QtStatement {
  QtPattern qt;
  std::optional<Variable> ts_var;
  std::vector<PredObj> annotations;
  bool operator==(const QtStatement&) const = default;
};

using PatternStmt = std::variant<PlainPattern, QtStatement>;

struct WindowSpec {
  enum class Kind { Now, Range };
  Kind kind = Kind::Now;
  int seconds = 0;  // Range only; converted to ticks by the engine config
  bool operator==(const WindowSpec&) const = default;
};

struct FilterExpr;
using FilterPtr = std::shared_ptr<const FilterExpr>;

struct FilterExpr {
  enum class Op { And, Lt, Gt, Le, Ge, Eq, Add, Sub, Var, Num, Iou };
  Op op = Op::Num;
  double number = 0.0;
  std::string lexical;  // number as written, preserved for printing
  Variable var;
  FilterPtr lhs;
  FilterPtr rhs;
  std::vector<Variable> args;  // builtin arguments

  static FilterPtr make_var(Variable v) {
    auto e = std::make_shared<FilterExpr>();
    e->op = Op::Var;
    e->var = std::move(v);
    return e;
  }
  static FilterPtr make_num(double value, std::string lexical) {
    auto e = std::make_shared<FilterExpr>();
    e->op = Op::Num;
    e->number = value;
    e->lexical = std::move(lexical);
    return e;
  }
  static FilterPtr make_binary(Op op, FilterPtr lhs, FilterPtr rhs) {
    auto e = std::make_shared<FilterExpr>();
    e->op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
  }
  static FilterPtr make_iou(Variable a, Variable b) {
    auto e = std::make_shared<FilterExpr>();
    e->op = Op::Iou;
    e->args = {std::move(a), std::move(b)};
    return e;
  }
};

bool filter_equal(const FilterExpr* a, const FilterExpr* b);
inline bool filter_equal(const FilterPtr& a, const FilterPtr& b) {
  return filter_equal(a.get(), b.get());
}

struct StreamBlock {
  rdf::StreamId stream;
  WindowSpec window;
  std::optional<Variable> block_ts_var;
  std::vector<PatternStmt> patterns;
  std::vector<FilterPtr> filters;

  bool operator==(const StreamBlock& o) const;
};

enum class RuleKind { Hard, Soft };

struct BodySpec {
  std::vector<StreamBlock> positive;
  std::vector<StreamBlock> naf;
  std::vector<FilterPtr> filters;  // WHERE-level
  std::vector<PlainPattern> static_patterns;

  bool operator==(const BodySpec& o) const;
};

struct Rule {
  rdf::Iri id;
  RuleKind kind = RuleKind::Hard;
  std::vector<PatternStmt> head;
  BodySpec body;

  bool operator==(const Rule& o) const;
};

/// Variables appearing in a pattern statement, in textual order.
std::vector<Variable> pattern_variables(const PatternStmt& stmt);
std::vector<Variable> filter_variables(const FilterExpr& expr);

}  // namespace ssf::ql
