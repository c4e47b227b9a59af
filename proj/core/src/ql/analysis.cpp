#include "ssf/ql/analysis.hpp"

#include <sstream>

namespace ssf::ql {

namespace {

void note_predicate(RuleReport& report, const TermOrVar& tv) {
  if (!is_var(tv) && as_term(tv).is_iri()) report.predicates.insert(as_term(tv).as_iri());
}

void scan_stmt(RuleReport& report, const PatternStmt& stmt) {
  if (std::holds_alternative<PlainPattern>(stmt)) {
    note_predicate(report, std::get<PlainPattern>(stmt).predicate);
  } else {
    const QtStatement& q = std::get<QtStatement>(stmt);
    note_predicate(report, q.qt.predicate);
    for (const PredObj& po : q.annotations) note_predicate(report, po.predicate);
  }
  for (const Variable& v : pattern_variables(stmt)) ++report.variables[v.name];
}

void scan_block(RuleReport& report, const StreamBlock& block) {
  report.streams.insert(block.stream);
  if (block.block_ts_var) ++report.variables[block.block_ts_var->name];
  for (const PatternStmt& s : block.patterns) scan_stmt(report, s);
  for (const FilterPtr& f : block.filters)
    for (const Variable& v : filter_variables(*f)) ++report.variables[v.name];
}

}  // namespace

RuleReport analyze_rule(const Rule& rule) {
  RuleReport report;
  for (const PatternStmt& s : rule.head) scan_stmt(report, s);
  for (const StreamBlock& b : rule.body.positive) scan_block(report, b);
  for (const StreamBlock& b : rule.body.naf) scan_block(report, b);
  for (const PlainPattern& p : rule.body.static_patterns) scan_stmt(report, PatternStmt{p});
  for (const FilterPtr& f : rule.body.filters)
    for (const Variable& v : filter_variables(*f)) ++report.variables[v.name];

  std::set<std::string> positive_vars;
  for (const StreamBlock& b : rule.body.positive) {
    for (const PatternStmt& s : b.patterns)
      for (const Variable& v : pattern_variables(s)) positive_vars.insert(v.name);
    if (b.block_ts_var) positive_vars.insert(b.block_ts_var->name);
  }
  for (const PlainPattern& p : rule.body.static_patterns)
    for (const Variable& v : pattern_variables(PatternStmt{p})) positive_vars.insert(v.name);

  std::set<std::string> flagged;
  for (const PatternStmt& s : rule.head) {
    for (const Variable& v : pattern_variables(s)) {
      if (!positive_vars.count(v.name) && flagged.insert(v.name).second)
        report.unsafe_head_vars.push_back(v);
    }
  }
  return report;
}

std::string report_to_string(const RuleReport& report, const rdf::PrefixMap& prefixes) {
  std::ostringstream out;
  out << "streams:";
  for (const rdf::StreamId& s : report.streams)
    out << " " << prefixes.qualify(s.iri.value).value_or(s.iri.value);
  out << "\npredicates:";
  for (const rdf::Iri& p : report.predicates)
    out << " " << prefixes.qualify(p.value).value_or(p.value);
  out << "\nvariables:";
  for (const auto& [name, count] : report.variables) out << " ?" << name << "(" << count << ")";
  out << "\nsafety: ";
  if (report.safe()) {
    out << "safe";
  } else {
    out << "unsafe";
    for (const Variable& v : report.unsafe_head_vars) out << " ?" << v.name;
  }
  out << "\n";
  return out.str();
}

}  // namespace ssf::ql
