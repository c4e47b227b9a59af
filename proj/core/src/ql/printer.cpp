#include "ssf/ql/printer.hpp"

#include <sstream>

#include "ssf/rdf/vocab.hpp"

namespace ssf::ql {

namespace {

std::string print_tv(const TermOrVar& tv, const rdf::PrefixMap& prefixes) {
  if (is_var(tv)) return "?" + as_var(tv).name;
  return rdf::serialize_term(as_term(tv), prefixes);
}

std::string print_verb(const TermOrVar& tv, const rdf::PrefixMap& prefixes) {
  if (!is_var(tv) && as_term(tv).is_iri() && as_term(tv).as_iri().value == rdf::kRdfType)
    return "a";
  return print_tv(tv, prefixes);
}

std::string print_window(const WindowSpec& w) {
  if (w.kind == WindowSpec::Kind::Now) return "";
  return " window[" + std::to_string(w.seconds) + " sec]";
}

void print_block(std::ostringstream& out, const StreamBlock& block, bool naf,
                 const rdf::PrefixMap& prefixes, const char* indent) {
  out << indent << (naf ? "NAF STREAM <" : "STREAM <")
      << prefixes.qualify(block.stream.iri.value).value_or(block.stream.iri.value) << ">";
  if (block.block_ts_var) out << " @?" << block.block_ts_var->name;
  out << print_window(block.window) << " {\n";
  for (const PatternStmt& p : block.patterns)
    out << indent << "  " << print_pattern(p, prefixes) << "\n";
  for (const FilterPtr& f : block.filters)
    out << indent << "  FILTER (" << print_filter(*f) << ")\n";
  out << indent << "}\n";
}

std::string trim_number(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

}  // namespace

std::string print_filter(const FilterExpr& expr) {
  switch (expr.op) {
    case FilterExpr::Op::Var:
      return "?" + expr.var.name;
    case FilterExpr::Op::Num:
      return expr.lexical.empty() ? trim_number(expr.number) : expr.lexical;
    case FilterExpr::Op::Iou:
      return "iou(?" + expr.args[0].name + ", ?" + expr.args[1].name + ")";
    case FilterExpr::Op::And:
      return print_filter(*expr.lhs) + " && " + print_filter(*expr.rhs);
    case FilterExpr::Op::Lt:
      return print_filter(*expr.lhs) + " < " + print_filter(*expr.rhs);
    case FilterExpr::Op::Gt:
      return print_filter(*expr.lhs) + " > " + print_filter(*expr.rhs);
    case FilterExpr::Op::Le:
      return print_filter(*expr.lhs) + " <= " + print_filter(*expr.rhs);
    case FilterExpr::Op::Ge:
      return print_filter(*expr.lhs) + " >= " + print_filter(*expr.rhs);
    case FilterExpr::Op::Eq:
      return print_filter(*expr.lhs) + " = " + print_filter(*expr.rhs);
    case FilterExpr::Op::Add:
      return print_filter(*expr.lhs) + " + " + print_filter(*expr.rhs);
    case FilterExpr::Op::Sub:
      return print_filter(*expr.lhs) + " - " + print_filter(*expr.rhs);
  }
  return "";
}

std::string print_pattern(const PatternStmt& stmt, const rdf::PrefixMap& prefixes) {
  std::ostringstream out;
  if (std::holds_alternative<PlainPattern>(stmt)) {
    const PlainPattern& p = std::get<PlainPattern>(stmt);
    out << print_tv(p.subject, prefixes) << " " << print_verb(p.predicate, prefixes) << " "
        << print_tv(p.object, prefixes);
    if (p.ts_var) out << " @ ?" << p.ts_var->name;
  } else {
    const QtStatement& q = std::get<QtStatement>(stmt);
    out << "<<" << print_tv(q.qt.subject, prefixes) << " " << print_verb(q.qt.predicate, prefixes)
        << " " << print_tv(q.qt.object, prefixes) << ">>";
    if (q.ts_var) out << " @ ?" << q.ts_var->name;
    bool first = true;
    for (const PredObj& po : q.annotations) {
      out << (first && !q.ts_var ? " " : "; ");
      out << print_verb(po.predicate, prefixes) << " " << print_tv(po.object, prefixes);
      first = false;
    }
  }
  out << ".";
  return out.str();
}

std::string print_query(const Rule& rule, const rdf::PrefixMap& prefixes) {
  std::ostringstream out;
  out << "CONSTRUCT {";
  if (rule.head.size() == 1) {
    out << print_pattern(rule.head[0], prefixes);
  } else {
    out << "\n";
    for (const PatternStmt& p : rule.head) out << "  " << print_pattern(p, prefixes) << "\n";
  }
  out << "}\nWHERE {\n";
  for (const StreamBlock& b : rule.body.positive) print_block(out, b, false, prefixes, "  ");
  for (const StreamBlock& b : rule.body.naf) print_block(out, b, true, prefixes, "  ");
  for (const PlainPattern& p : rule.body.static_patterns)
    out << "  " << print_pattern(PatternStmt{p}, prefixes) << "\n";
  for (const FilterPtr& f : rule.body.filters)
    out << "  FILTER (" << print_filter(*f) << ")\n";
  out << "}\n";
  return out.str();
}

std::string pretty_print(const Rule& rule, const rdf::PrefixMap& prefixes) {
  std::ostringstream out;
  out << (prefixes.qualify(rule.id.value).value_or("<" + rule.id.value + ">"));
  out << " a sh:NodeShape ;\n";
  out << "sh:rule [\n";
  out << "  a sh:CQELSRule ;\n";
  out << "  sh:construct \"\"\"\n";
  std::istringstream body(print_query(rule, prefixes));
  std::string line;
  while (std::getline(body, line)) out << "  " << line << "\n";
  out << "  \"\"\" ;\n";
  out << "] .\n";
  return out.str();
}

}  // namespace ssf::ql
