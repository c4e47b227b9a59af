#include "ssf/fed/plan.hpp"

#include <algorithm>

#include "ssf/rdf/vocab.hpp"

namespace ssf::fed {

using ql::FilterExpr;
using ql::FilterPtr;
using ql::PatternStmt;
using ql::PlainPattern;
using ql::QtStatement;
using ql::Rule;
using ql::StreamBlock;
using ql::Variable;
using rdf::Iri;
using rdf::StreamId;

namespace {

void flatten(const FilterPtr& f, std::vector<FilterPtr>& out) {
  if (f->op == FilterExpr::Op::And) {
    flatten(f->lhs, out);
    flatten(f->rhs, out);
  } else {
    out.push_back(f);
  }
}

std::set<std::string> block_variables(const StreamBlock& block) {
  std::set<std::string> vars;
  for (const PatternStmt& s : block.patterns)
    for (const Variable& v : ql::pattern_variables(s)) vars.insert(v.name);
  if (block.block_ts_var) vars.insert(block.block_ts_var->name);
  return vars;
}

std::string local_name(const std::string& iri) {
  auto pos = iri.find_last_of("#/");
  return pos == std::string::npos ? iri : iri.substr(pos + 1);
}

/// Pattern copy guaranteed to carry a timestamp variable, so the relay head
/// reproduces the matched fact at its original tick.
PatternStmt with_ts_var(const PatternStmt& stmt, int index) {
  PatternStmt copy = stmt;
  Variable fresh{"_ts" + std::to_string(index)};
  if (std::holds_alternative<PlainPattern>(copy)) {
    PlainPattern& p = std::get<PlainPattern>(copy);
    if (!p.ts_var) p.ts_var = fresh;
  } else {
    QtStatement& q = std::get<QtStatement>(copy);
    if (!q.ts_var) q.ts_var = fresh;
  }
  return copy;
}

std::set<std::string> iou_vars(const std::vector<FilterPtr>& conjuncts) {
  std::set<std::string> out;
  for (const FilterPtr& c : conjuncts) {
    std::vector<const FilterExpr*> stack{c.get()};
    while (!stack.empty()) {
      const FilterExpr* e = stack.back();
      stack.pop_back();
      if (e->op == FilterExpr::Op::Iou)
        for (const Variable& v : e->args) out.insert(v.name);
      if (e->lhs) stack.push_back(e->lhs.get());
      if (e->rhs) stack.push_back(e->rhs.get());
    }
  }
  return out;
}

}  // namespace

QueryPlan rewrite(const Rule& rule, const std::vector<NodeDescriptor>& registry,
                  const std::string& self) {
  QueryPlan plan;
  plan.root_node = self;
  plan.original = rule;
  plan.root_rule = rule;

  auto owner_of = [&](const StreamId& stream) -> const NodeDescriptor* {
    const NodeDescriptor* owner = nullptr;
    for (const NodeDescriptor& n : registry) {
      if (!n.streams.count(stream)) continue;
      if (owner != nullptr)
        throw FederationError("ambiguous advertisement for stream " + stream.iri.value);
      owner = &n;
    }
    if (owner == nullptr) throw FederationError("unadvertised stream: " + stream.iri.value);
    return owner;
  };

  // Join variables: bound in more than one body part.
  std::map<std::string, int> bound_in;
  for (const StreamBlock& b : rule.body.positive)
    for (const std::string& v : block_variables(b)) ++bound_in[v];
  {
    std::set<std::string> static_vars;
    for (const PlainPattern& p : rule.body.static_patterns)
      for (const Variable& v : ql::pattern_variables(PatternStmt{p})) static_vars.insert(v.name);
    for (const std::string& v : static_vars) ++bound_in[v];
  }
  std::set<std::string> cross_vars;
  for (const auto& [v, n] : bound_in)
    if (n > 1) cross_vars.insert(v);

  std::vector<FilterPtr> all_conjuncts;
  for (const StreamBlock& b : rule.body.positive)
    for (const FilterPtr& f : b.filters) flatten(f, all_conjuncts);
  for (const FilterPtr& f : rule.body.filters) flatten(f, all_conjuncts);
  const std::set<std::string> geometry_vars = iou_vars(all_conjuncts);

  const std::string rule_tag = local_name(rule.id.value);
  int fragment_counter = 0;
  int ts_counter = 0;

  auto fragment_streams = [&](Fragment& frag) {
    frag.result_stream = StreamId{Iri{rdf::vocab::dflt(
        ("plan_" + rule_tag + "_b" + std::to_string(fragment_counter)).c_str())}};
    ++fragment_counter;
  };

  auto relay_rule = [&](const Fragment& frag, int relay_index, PatternStmt head,
                        std::vector<PatternStmt> body_patterns,
                        const std::optional<Variable>& block_ts,
                        const StreamBlock& block, std::vector<FilterPtr> filters) {
    Rule relay;
    relay.id = Iri{rdf::vocab::dflt(("relay_" + rule_tag + "_b" +
                                     std::to_string(fragment_counter - 1) + "_p" +
                                     std::to_string(relay_index))
                                        .c_str())};
    relay.kind = ql::RuleKind::Hard;
    relay.head.push_back(std::move(head));
    StreamBlock body;
    body.stream = block.stream;
    body.window = block.window;
    body.block_ts_var = block_ts;
    body.patterns = std::move(body_patterns);
    body.filters = std::move(filters);
    relay.body.positive.push_back(std::move(body));
    (void)frag;
    return relay;
  };

  // Positive blocks owned elsewhere become semijoin-reduced relays.
  for (std::size_t bi = 0; bi < rule.body.positive.size(); ++bi) {
    const StreamBlock& block = rule.body.positive[bi];
    const NodeDescriptor* owner = owner_of(block.stream);
    if (owner->id == self) continue;

    Fragment frag;
    frag.target_node = owner->id;
    frag.source_stream = block.stream;
    frag.block_vars = block_variables(block);
    fragment_streams(frag);

    for (const FilterPtr& c : all_conjuncts) {
      bool pushable = true;
      for (const Variable& v : ql::filter_variables(*c)) {
        if (!frag.block_vars.count(v.name) || cross_vars.count(v.name)) {
          pushable = false;
          break;
        }
      }
      if (pushable) frag.pushed_filters.push_back(c);
    }

    int relay_index = 0;
    for (std::size_t i = 0; i < block.patterns.size(); ++i) {
      std::vector<PatternStmt> body = block.patterns;
      body[i] = with_ts_var(block.patterns[i], ts_counter++);
      frag.relay_rules.push_back(relay_rule(frag, relay_index++, body[i], body,
                                            block.block_ts_var, block, frag.pushed_filters));
    }

    // Boxes the iou builtin touches travel with their geometry.
    for (const std::string& var : geometry_vars) {
      if (!frag.block_vars.count(var)) continue;
      const std::string geom_preds[] = {rdf::vocab::kBoxX, rdf::vocab::kBoxY, rdf::vocab::kBoxW,
                                         rdf::vocab::kBoxH};
      for (const std::string& pred : geom_preds) {
        PlainPattern geom;
        geom.subject = Variable{var};
        geom.predicate = rdf::Term::iri(pred);
        geom.object = Variable{"_g" + std::to_string(ts_counter)};
        geom.ts_var = Variable{"_ts" + std::to_string(ts_counter)};
        ++ts_counter;
        std::vector<PatternStmt> body = block.patterns;
        body.push_back(PatternStmt{geom});
        frag.relay_rules.push_back(relay_rule(frag, relay_index++, PatternStmt{geom}, body,
                                              block.block_ts_var, block, frag.pushed_filters));
      }
    }

    plan.root_rule.body.positive[bi].stream = frag.result_stream;
    plan.fragments.push_back(std::move(frag));
  }

  // Remote NAF blocks relay raw pattern matches; the absence check itself
  // stays at the root.
  for (std::size_t bi = 0; bi < rule.body.naf.size(); ++bi) {
    const StreamBlock& block = rule.body.naf[bi];
    const NodeDescriptor* owner = owner_of(block.stream);
    if (owner->id == self) continue;

    Fragment frag;
    frag.target_node = owner->id;
    frag.source_stream = block.stream;
    frag.naf = true;
    frag.block_vars = block_variables(block);
    fragment_streams(frag);

    int relay_index = 0;
    for (const PatternStmt& stmt : block.patterns) {
      PatternStmt head = with_ts_var(stmt, ts_counter++);
      frag.relay_rules.push_back(
          relay_rule(frag, relay_index++, head, {head}, std::nullopt, block, {}));
    }

    plan.root_rule.body.naf[bi].stream = frag.result_stream;
    plan.fragments.push_back(std::move(frag));
  }

  return plan;
}

void check_pushdown_soundness(const QueryPlan& plan) {
  for (const Fragment& frag : plan.fragments) {
    for (const FilterPtr& f : frag.pushed_filters) {
      for (const Variable& v : ql::filter_variables(*f)) {
        if (!frag.block_vars.count(v.name))
          throw FederationError("pushed filter variable ?" + v.name +
                                " not bound in fragment for " + frag.source_stream.iri.value);
      }
    }
  }
}

}  // namespace ssf::fed
