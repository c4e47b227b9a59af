#include "ssf/engine/engine.hpp"

#include <algorithm>
#include <sstream>

#include "ssf/ql/printer.hpp"
#include "ssf/rdf/turtle.hpp"
#include "ssf/rdf/vocab.hpp"

namespace ssf::engine {

using rdf::Iri;
using rdf::StreamId;
using rdf::Term;
using rdf::Tick;
using rdf::TimestampedFact;

EngineOptions::EngineOptions()
    : association_predicate(rdf::vocab::kIsSampleOf), detection_predicate(rdf::vocab::kDet) {}

// ---------------------------------------------------------------------------
// BoxIndex

void BoxIndex::observe(const TimestampedFact& fact) {
  const Term& s = fact.triple.subject;
  if (!s.is_iri()) return;
  const std::string& p = fact.triple.predicate.value;
  auto num = fact.triple.object.numeric();
  if (!num) return;
  using namespace rdf::vocab;
  if (p != kBoxX && p != kBoxY && p != kBoxW && p != kBoxH) return;
  Partial& e = partial_[s.as_iri().value];
  if (p == kBoxX) e.x = *num;
  else if (p == kBoxY) e.y = *num;
  else if (p == kBoxW) e.w = *num;
  else e.h = *num;
}

std::optional<tracker::Box> BoxIndex::resolve(const Term& term) const {
  if (!term.is_iri()) return std::nullopt;
  auto it = partial_.find(term.as_iri().value);
  if (it == partial_.end()) return std::nullopt;
  const Partial& e = it->second;
  if (!e.x || !e.y || !e.w || !e.h) return std::nullopt;
  tracker::Box box{*e.x, *e.y, *e.w, *e.h};
  if (!box.valid()) return std::nullopt;
  return box;
}

// ---------------------------------------------------------------------------
// Filter evaluation

namespace {

std::optional<double> eval_numeric(const ql::FilterExpr& expr, const Binding& binding,
                                   const BoxIndex& boxes) {
  using Op = ql::FilterExpr::Op;
  switch (expr.op) {
    case Op::Num:
      return expr.number;
    case Op::Var: {
      const Term* t = binding.find(expr.var.name);
      if (t == nullptr) return std::nullopt;
      return t->numeric();
    }
    case Op::Add: {
      auto l = eval_numeric(*expr.lhs, binding, boxes);
      auto r = eval_numeric(*expr.rhs, binding, boxes);
      if (!l || !r) return std::nullopt;
      return *l + *r;
    }
    case Op::Sub: {
      auto l = eval_numeric(*expr.lhs, binding, boxes);
      auto r = eval_numeric(*expr.rhs, binding, boxes);
      if (!l || !r) return std::nullopt;
      return *l - *r;
    }
    case Op::Iou: {
      const Term* a = binding.find(expr.args[0].name);
      const Term* b = binding.find(expr.args[1].name);
      if (a == nullptr || b == nullptr) return std::nullopt;
      auto ba = boxes.resolve(*a);
      auto bb = boxes.resolve(*b);
      if (!ba || !bb) return std::nullopt;
      return tracker::iou(*ba, *bb);
    }
    default:
      return std::nullopt;
  }
}

}  // namespace

std::optional<bool> eval_filter(const ql::FilterExpr& expr, const Binding& binding,
                                const BoxIndex& boxes, Diagnostics* diagnostics) {
  using Op = ql::FilterExpr::Op;
  auto error = [&]() -> std::optional<bool> {
    if (diagnostics) ++diagnostics->builtin_errors;
    return std::nullopt;
  };
  switch (expr.op) {
    case Op::And: {
      auto l = eval_filter(*expr.lhs, binding, boxes, diagnostics);
      if (!l) return std::nullopt;
      if (!*l) return false;
      return eval_filter(*expr.rhs, binding, boxes, diagnostics);
    }
    case Op::Eq: {
      auto l = eval_numeric(*expr.lhs, binding, boxes);
      auto r = eval_numeric(*expr.rhs, binding, boxes);
      if (l && r) return *l == *r;
      // Structural fallback for two bound terms.
      if (expr.lhs->op == Op::Var && expr.rhs->op == Op::Var) {
        const Term* a = binding.find(expr.lhs->var.name);
        const Term* b = binding.find(expr.rhs->var.name);
        if (a && b) return *a == *b;
      }
      return error();
    }
    case Op::Lt:
    case Op::Gt:
    case Op::Le:
    case Op::Ge: {
      auto l = eval_numeric(*expr.lhs, binding, boxes);
      auto r = eval_numeric(*expr.rhs, binding, boxes);
      if (!l || !r) return error();
      switch (expr.op) {
        case Op::Lt: return *l < *r;
        case Op::Gt: return *l > *r;
        case Op::Le: return *l <= *r;
        default: return *l >= *r;
      }
    }
    default: {
      // A bare numeric/iou expression is not a boolean filter.
      return error();
    }
  }
}

// ---------------------------------------------------------------------------
// Compiled form

struct Engine::Atom {
  bool presence = false;
  std::optional<ql::QtPattern> subject_qt;
  ql::TermOrVar subject{Term()};
  ql::TermOrVar predicate{Term()};
  ql::TermOrVar object{Term()};
  std::optional<ql::Variable> ts_var;
  int const_count = 0;
  std::size_t text_order = 0;
};

struct Engine::CompiledBlock {
  StreamId stream;
  RuntimeWindow window;
  std::vector<Atom> atoms;
  std::vector<ql::FilterPtr> filters;
  WindowState state;
};

struct Engine::CompiledRule {
  ql::Rule rule;
  RuleRouting routing;
  StreamId output_stream;
  std::vector<CompiledBlock> positive;
  std::vector<CompiledBlock> naf;
  std::vector<Atom> static_atoms;
  std::vector<ql::FilterPtr> where_filters;
  // Soft-rule evidence: left side of the last ">"/">=" gate in filter order.
  ql::FilterPtr gate_lhs;
  // Detection box extraction for association hypotheses.
  std::optional<std::string> det_var;
  std::optional<Term> det_const;
  int stratum = 0;
  std::size_t load_index = 0;
};

namespace {

int tv_consts(const ql::TermOrVar& tv) { return ql::is_var(tv) ? 0 : 1; }

int qt_consts(const ql::QtPattern& qt) {
  return 1 + tv_consts(qt.subject) + tv_consts(qt.predicate) + tv_consts(qt.object);
}

bool unify_tv(const ql::TermOrVar& pat, const Term& value, Binding& b) {
  if (ql::is_var(pat)) return b.bind(ql::as_var(pat).name, value);
  return ql::as_term(pat) == value;
}

bool unify_qt(const ql::QtPattern& pat, const Term& value, Binding& b) {
  if (!value.is_quoted()) return false;
  const rdf::QuotedTriple& qt = value.as_quoted();
  return unify_tv(pat.subject, *qt.subject, b) &&
         unify_tv(pat.predicate, Term(Term::Repr{qt.predicate}), b) &&
         unify_tv(pat.object, *qt.object, b);
}

void dedup(std::vector<Binding>& bindings) {
  std::sort(bindings.begin(), bindings.end());
  bindings.erase(std::unique(bindings.begin(), bindings.end()), bindings.end());
}

void flatten_conjuncts(const ql::FilterPtr& f, std::vector<ql::FilterPtr>& out) {
  if (f->op == ql::FilterExpr::Op::And) {
    flatten_conjuncts(f->lhs, out);
    flatten_conjuncts(f->rhs, out);
  } else {
    out.push_back(f);
  }
}

}  // namespace

namespace {

void compile_stmt(const ql::PatternStmt& stmt, const std::optional<ql::Variable>& block_ts,
                  std::vector<Engine::Atom>& atoms) {
  Engine::Atom atom;
  atom.text_order = atoms.size();
  if (std::holds_alternative<ql::PlainPattern>(stmt)) {
    const ql::PlainPattern& p = std::get<ql::PlainPattern>(stmt);
    atom.subject = p.subject;
    atom.predicate = p.predicate;
    atom.object = p.object;
    atom.ts_var = p.ts_var ? p.ts_var : block_ts;
    atom.const_count = tv_consts(p.subject) + tv_consts(p.predicate) + tv_consts(p.object);
    atoms.push_back(std::move(atom));
    return;
  }
  const ql::QtStatement& q = std::get<ql::QtStatement>(stmt);
  std::optional<ql::Variable> ts = q.ts_var ? q.ts_var : block_ts;
  if (q.annotations.empty()) {
    atom.presence = true;
    atom.subject_qt = q.qt;
    atom.ts_var = ts;
    atom.const_count = qt_consts(q.qt);
    atoms.push_back(std::move(atom));
    return;
  }
  for (const ql::PredObj& po : q.annotations) {
    Engine::Atom a;
    a.text_order = atoms.size();
    a.subject_qt = q.qt;
    a.predicate = po.predicate;
    a.object = po.object;
    a.ts_var = ts;
    a.const_count = qt_consts(q.qt) + tv_consts(po.predicate) + tv_consts(po.object);
    atoms.push_back(std::move(a));
  }
}

void order_atoms(std::vector<Engine::Atom>& atoms) {
  std::stable_sort(atoms.begin(), atoms.end(), [](const Engine::Atom& a, const Engine::Atom& b) {
    if (a.const_count != b.const_count) return a.const_count > b.const_count;
    return a.text_order < b.text_order;
  });
}

void match_atom_fact(const Engine::Atom& atom, const TimestampedFact& f, const Binding& seed,
                     std::vector<Binding>& out) {
  auto bind_ts = [&](Binding& b) {
    if (!atom.ts_var) return true;
    return b.bind(atom.ts_var->name, Term::integer(f.timestamp));
  };
  const Term pred_term = Term(Term::Repr{f.triple.predicate});
  if (atom.presence) {
    const ql::QtPattern& qp = *atom.subject_qt;
    {
      // The asserted triple itself.
      Binding b = seed;
      if (unify_tv(qp.subject, f.triple.subject, b) && unify_tv(qp.predicate, pred_term, b) &&
          unify_tv(qp.object, f.triple.object, b) && bind_ts(b)) {
        out.push_back(std::move(b));
      }
    }
    if (f.triple.subject.is_quoted()) {
      // Quoted occurrence as the subject of an annotation fact.
      Binding b = seed;
      if (unify_qt(qp, f.triple.subject, b) && bind_ts(b)) out.push_back(std::move(b));
    }
    return;
  }
  {
    Binding b = seed;
    bool subject_ok = atom.subject_qt ? unify_qt(*atom.subject_qt, f.triple.subject, b)
                                      : unify_tv(atom.subject, f.triple.subject, b);
    if (subject_ok && unify_tv(atom.predicate, pred_term, b) &&
        unify_tv(atom.object, f.triple.object, b) && bind_ts(b)) {
      out.push_back(std::move(b));
    }
  }
  // A plain pattern also matches the quoted occurrence itself, so
  // `?Trk :trk ?B` sees `<<:trk1 :trk :b2>> a :Tracklet` groups.
  if (!atom.subject_qt && f.triple.subject.is_quoted()) {
    const rdf::QuotedTriple& qt = f.triple.subject.as_quoted();
    Binding b = seed;
    if (unify_tv(atom.subject, *qt.subject, b) &&
        unify_tv(atom.predicate, Term(Term::Repr{qt.predicate}), b) &&
        unify_tv(atom.object, *qt.object, b) && bind_ts(b)) {
      out.push_back(std::move(b));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(EngineOptions options) : options_(std::move(options)) {}

Engine::~Engine() = default;

void Engine::register_stream(const StreamId& id) {
  if (stream_last_ts_.count(id)) throw EngineError("duplicate stream: " + id.iri.value);
  stream_last_ts_[id] = -1;
}

bool Engine::has_stream(const StreamId& id) const { return stream_last_ts_.count(id) > 0; }

void Engine::add_rule(const ql::Rule& rule, RuleRouting routing) {
  auto compiled = std::make_unique<CompiledRule>();
  compiled->rule = rule;
  compiled->routing = routing;
  compiled->load_index = rules_.size();

  auto compile_block = [&](const ql::StreamBlock& block) {
    if (!has_stream(block.stream))
      throw EngineError("rule references unregistered stream: " + block.stream.iri.value);
    CompiledBlock cb;
    cb.stream = block.stream;
    cb.window = resolve_window(block.window, options_.tick_seconds);
    for (const ql::PatternStmt& s : block.patterns) compile_stmt(s, block.block_ts_var, cb.atoms);
    order_atoms(cb.atoms);
    cb.filters = block.filters;
    cb.state = WindowState(block.stream, cb.window);
    return cb;
  };
  for (const ql::StreamBlock& b : rule.body.positive) compiled->positive.push_back(compile_block(b));
  for (const ql::StreamBlock& b : rule.body.naf) compiled->naf.push_back(compile_block(b));
  for (const ql::PlainPattern& p : rule.body.static_patterns)
    compile_stmt(ql::PatternStmt{p}, std::nullopt, compiled->static_atoms);
  order_atoms(compiled->static_atoms);
  compiled->where_filters = rule.body.filters;

  if (routing.output_stream) {
    compiled->output_stream = *routing.output_stream;
  } else if (!rule.body.positive.empty()) {
    compiled->output_stream = rule.body.positive.front().stream;
  } else {
    compiled->output_stream = StreamId{Iri{rdf::vocab::dflt("out")}};
  }

  // Evidence gate: last '>'/'>=' comparison against a constant.
  std::vector<ql::FilterPtr> conjuncts;
  for (const ql::StreamBlock& b : rule.body.positive)
    for (const ql::FilterPtr& f : b.filters) flatten_conjuncts(f, conjuncts);
  for (const ql::FilterPtr& f : rule.body.filters) flatten_conjuncts(f, conjuncts);
  for (const ql::FilterPtr& c : conjuncts) {
    if ((c->op == ql::FilterExpr::Op::Gt || c->op == ql::FilterExpr::Op::Ge) &&
        c->rhs->op == ql::FilterExpr::Op::Num) {
      compiled->gate_lhs = c->lhs;
    }
  }

  // Detection box: object of a quoted pattern on the detection predicate.
  for (const ql::StreamBlock& b : rule.body.positive) {
    for (const ql::PatternStmt& s : b.patterns) {
      if (!std::holds_alternative<ql::QtStatement>(s)) continue;
      const ql::QtPattern& qt = std::get<ql::QtStatement>(s).qt;
      if (ql::is_var(qt.predicate)) continue;
      const Term& p = ql::as_term(qt.predicate);
      if (!p.is_iri() || p.as_iri().value != options_.detection_predicate) continue;
      if (ql::is_var(qt.object)) {
        compiled->det_var = ql::as_var(qt.object).name;
      } else {
        compiled->det_const = ql::as_term(qt.object);
      }
    }
  }

  rules_.push_back(std::move(compiled));

  // Re-stratify. Positive edges propagate strata, NAF edges increase them;
  // failure to stabilize within |rules| rounds means cyclic negation.
  struct PredSet {
    std::set<std::string> preds;
    bool wildcard = false;
    bool any() const { return wildcard || !preds.empty(); }
    void note(const ql::TermOrVar& tv) {
      if (ql::is_var(tv)) wildcard = true;
      else if (ql::as_term(tv).is_iri()) preds.insert(ql::as_term(tv).as_iri().value);
    }
  };
  auto produces = [](const CompiledRule& r) {
    PredSet out;
    for (const ql::PatternStmt& s : r.rule.head) {
      if (std::holds_alternative<ql::PlainPattern>(s)) {
        out.note(std::get<ql::PlainPattern>(s).predicate);
      } else {
        const ql::QtStatement& q = std::get<ql::QtStatement>(s);
        if (q.annotations.empty()) {
          out.note(q.qt.predicate);
        } else {
          for (const ql::PredObj& po : q.annotations) out.note(po.predicate);
        }
      }
    }
    return out;
  };
  auto consumes = [](const std::vector<CompiledBlock>& blocks) {
    PredSet out;
    for (const CompiledBlock& b : blocks) {
      for (const Atom& a : b.atoms) {
        if (a.presence) {
          out.note(a.subject_qt->predicate);
          continue;
        }
        out.note(a.predicate);
        if (a.subject_qt) out.note(a.subject_qt->predicate);
      }
    }
    return out;
  };
  auto intersects = [](const PredSet& prod, const PredSet& cons) {
    if (!prod.any() || !cons.any()) return false;
    if (prod.wildcard || cons.wildcard) return true;
    for (const std::string& p : prod.preds)
      if (cons.preds.count(p)) return true;
    return false;
  };

  const std::size_t n = rules_.size();
  std::vector<PredSet> prod(n), cons_pos(n), cons_naf(n);
  for (std::size_t i = 0; i < n; ++i) {
    prod[i] = produces(*rules_[i]);
    cons_pos[i] = consumes(rules_[i]->positive);
    cons_naf[i] = consumes(rules_[i]->naf);
  }
  for (auto& r : rules_) r->stratum = 0;
  bool changed = true;
  std::size_t rounds = 0;
  while (changed) {
    changed = false;
    if (++rounds > n + 1) throw EngineError("cyclic negation across rules");
    for (std::size_t from = 0; from < n; ++from) {
      for (std::size_t to = 0; to < n; ++to) {
        if (intersects(prod[from], cons_pos[to]) &&
            rules_[to]->stratum < rules_[from]->stratum) {
          rules_[to]->stratum = rules_[from]->stratum;
          changed = true;
        }
        if (intersects(prod[from], cons_naf[to]) &&
            rules_[to]->stratum < rules_[from]->stratum + 1) {
          rules_[to]->stratum = rules_[from]->stratum + 1;
          changed = true;
        }
      }
    }
  }
  rule_order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) rule_order_[i] = i;
  std::stable_sort(rule_order_.begin(), rule_order_.end(), [&](std::size_t a, std::size_t b) {
    if (rules_[a]->stratum != rules_[b]->stratum) return rules_[a]->stratum < rules_[b]->stratum;
    return rules_[a]->load_index < rules_[b]->load_index;
  });
}

void Engine::push(const StreamId& id, std::vector<TimestampedFact> facts) {
  std::lock_guard<std::mutex> lock(mailbox_mutex_);
  auto it = stream_last_ts_.find(id);
  if (it == stream_last_ts_.end()) throw EngineError("push to unregistered stream: " + id.iri.value);
  for (TimestampedFact& f : facts) {
    if (f.timestamp < it->second)
      throw EngineError("out-of-order timestamp on " + id.iri.value + ": " +
                        std::to_string(f.timestamp) + " after " + std::to_string(it->second));
    it->second = f.timestamp;
    mailbox_.emplace_back(id, std::move(f));
  }
}

void Engine::inject(const StreamId& id, std::vector<TimestampedFact> facts) {
  std::lock_guard<std::mutex> lock(mailbox_mutex_);
  if (!stream_last_ts_.count(id)) throw EngineError("inject to unregistered stream: " + id.iri.value);
  for (TimestampedFact& f : facts) mailbox_.emplace_back(id, std::move(f));
}

void Engine::route_fact(const StreamId& stream, const TimestampedFact& fact) {
  boxes_.observe(fact);
  for (auto& rule : rules_) {
    for (CompiledBlock& b : rule->positive)
      if (b.stream == stream) b.state.push(fact);
    for (CompiledBlock& b : rule->naf)
      if (b.stream == stream) b.state.push(fact);
  }
}

void Engine::drain_mailbox() {
  std::vector<std::pair<StreamId, TimestampedFact>> pending;
  {
    std::lock_guard<std::mutex> lock(mailbox_mutex_);
    pending.swap(mailbox_);
  }
  for (auto& [stream, fact] : pending) route_fact(stream, fact);
}

void Engine::advance_to(Tick t) {
  for (auto& [stream, fact] : deferred_feedback_) route_fact(stream, fact);
  deferred_feedback_.clear();
  current_tick_ = t;
  for (auto& rule : rules_) {
    for (CompiledBlock& b : rule->positive) b.state.evict(t);
    for (CompiledBlock& b : rule->naf) b.state.evict(t);
  }
  emitted_.clear();
  raised_.clear();
  used_detections_.clear();
  used_targets_.clear();
}

std::vector<Binding> Engine::match_atoms(const std::vector<Atom>& atoms,
                                         const std::vector<const WindowState*>& atom_windows,
                                         const Binding& seed, Tick now,
                                         Diagnostics* diagnostics) const {
  std::vector<Binding> results{seed};
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Atom& atom = atoms[i];
    const WindowState* window = atom_windows[i];
    std::vector<Binding> next;
    for (const Binding& b : results) {
      if (window != nullptr) {
        for (const TimestampedFact& f : window->facts()) {
          if (!window->spec().covers(f.timestamp, now)) continue;
          match_atom_fact(atom, f, b, next);
        }
      } else {
        for (const rdf::Triple& triple : graph_.triples()) {
          match_atom_fact(atom, TimestampedFact{triple, now}, b, next);
        }
      }
    }
    results = std::move(next);
    if (results.empty()) break;
  }
  dedup(results);
  (void)diagnostics;
  return results;
}

std::vector<Binding> Engine::match_block(const ql::StreamBlock& block, const WindowState& window,
                                         const Binding& seed, Tick now,
                                         Diagnostics* diagnostics) const {
  std::vector<Atom> atoms;
  for (const ql::PatternStmt& s : block.patterns) compile_stmt(s, block.block_ts_var, atoms);
  order_atoms(atoms);
  std::vector<const WindowState*> windows(atoms.size(), &window);
  std::vector<Binding> results = match_atoms(atoms, windows, seed, now, diagnostics);

  std::vector<Binding> kept;
  for (const Binding& b : results) {
    bool ok = true;
    for (const ql::FilterPtr& f : block.filters) {
      auto verdict = eval_filter(*f, b, boxes_, diagnostics);
      if (!verdict.has_value()) {
        if (diagnostics) ++diagnostics->discarded_bindings;
        ok = false;
        break;
      }
      if (!*verdict) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(b);
  }
  return kept;
}

namespace {

// Head instantiation: a bare quoted template asserts its inner triple; an
// annotated one asserts the annotation facts about the quoted term.
std::optional<std::vector<TimestampedFact>> instantiate_head(const ql::PatternStmt& stmt,
                                                             const Binding& binding,
                                                             Tick default_ts) {
  auto ground = [&](const ql::TermOrVar& tv) { return instantiate(tv, binding); };
  auto ts_of = [&](const std::optional<ql::Variable>& v) -> std::optional<Tick> {
    if (!v) return default_ts;
    return binding.tick(v->name);
  };

  std::vector<TimestampedFact> facts;
  if (std::holds_alternative<ql::PlainPattern>(stmt)) {
    const ql::PlainPattern& p = std::get<ql::PlainPattern>(stmt);
    auto s = ground(p.subject), pr = ground(p.predicate), o = ground(p.object);
    auto ts = ts_of(p.ts_var);
    if (!s || !pr || !o || !pr->is_iri() || !ts) return std::nullopt;
    facts.push_back(TimestampedFact{rdf::Triple{*s, pr->as_iri(), *o}, *ts});
    return facts;
  }
  const ql::QtStatement& q = std::get<ql::QtStatement>(stmt);
  auto s = ground(q.qt.subject), pr = ground(q.qt.predicate), o = ground(q.qt.object);
  auto ts = ts_of(q.ts_var);
  if (!s || !pr || !o || !pr->is_iri() || !ts) return std::nullopt;
  if (q.annotations.empty()) {
    facts.push_back(TimestampedFact{rdf::Triple{*s, pr->as_iri(), *o}, *ts});
    return facts;
  }
  Term qt_term = Term::quoted(*s, pr->as_iri(), *o);
  for (const ql::PredObj& po : q.annotations) {
    auto ap = ground(po.predicate), ao = ground(po.object);
    if (!ap || !ao || !ap->is_iri()) return std::nullopt;
    facts.push_back(TimestampedFact{rdf::Triple{qt_term, ap->as_iri(), *ao}, *ts});
  }
  return facts;
}

std::string term_sort_key(const rdf::Term& t) {
  if (t.is_iri()) return t.as_iri().value;
  if (t.is_literal()) return t.as_literal().lexical;
  if (t.is_blank()) return t.as_blank().label;
  return "~qt";
}

}  // namespace

bool Engine::evaluate_rule(CompiledRule& rule, Tick t, TickResult& result) {
  Diagnostics& diag = result.diagnostics;

  std::vector<Binding> bindings{Binding{}};
  for (CompiledBlock& block : rule.positive) {
    std::vector<Binding> joined;
    std::vector<const WindowState*> windows(block.atoms.size(), &block.state);
    for (const Binding& seed : bindings) {
      std::vector<Binding> matches = match_atoms(block.atoms, windows, seed, t, &diag);
      for (Binding& b : matches) {
        bool ok = true;
        for (const ql::FilterPtr& f : block.filters) {
          auto verdict = eval_filter(*f, b, boxes_, &diag);
          if (!verdict.has_value() || !*verdict) {
            if (!verdict.has_value()) ++diag.discarded_bindings;
            ok = false;
            break;
          }
        }
        if (ok) joined.push_back(std::move(b));
      }
    }
    bindings = std::move(joined);
    dedup(bindings);
    if (bindings.empty()) return false;
  }

  if (!rule.static_atoms.empty()) {
    std::vector<const WindowState*> windows(rule.static_atoms.size(), nullptr);
    std::vector<Binding> joined;
    for (const Binding& seed : bindings) {
      for (Binding& b : match_atoms(rule.static_atoms, windows, seed, t, &diag))
        joined.push_back(std::move(b));
    }
    bindings = std::move(joined);
    dedup(bindings);
    if (bindings.empty()) return false;
  }

  // WHERE-level filters.
  {
    std::vector<Binding> kept;
    for (const Binding& b : bindings) {
      bool ok = true;
      for (const ql::FilterPtr& f : rule.where_filters) {
        auto verdict = eval_filter(*f, b, boxes_, &diag);
        if (!verdict.has_value() || !*verdict) {
          if (!verdict.has_value()) ++diag.discarded_bindings;
          ok = false;
          break;
        }
      }
      if (ok) kept.push_back(b);
    }
    bindings = std::move(kept);
    if (bindings.empty()) return false;
  }

  // NAF: no satisfying extension in any negated block.
  if (!rule.naf.empty()) {
    std::vector<Binding> kept;
    for (const Binding& b : bindings) {
      bool blocked = false;
      for (CompiledBlock& nb : rule.naf) {
        std::vector<const WindowState*> windows(nb.atoms.size(), &nb.state);
        std::vector<Binding> ext = match_atoms(nb.atoms, windows, b, t, &diag);
        std::vector<Binding> satisfying;
        for (Binding& e : ext) {
          bool ok = true;
          for (const ql::FilterPtr& f : nb.filters) {
            auto verdict = eval_filter(*f, e, boxes_, &diag);
            if (!verdict.has_value() || !*verdict) {
              ok = false;
              break;
            }
          }
          if (ok) {
            satisfying.push_back(std::move(e));
            break;
          }
        }
        if (!satisfying.empty()) {
          blocked = true;
          break;
        }
      }
      if (!blocked) kept.push_back(b);
    }
    bindings = std::move(kept);
    if (bindings.empty()) return false;
  }

  std::sort(bindings.begin(), bindings.end());

  bool any_new = false;
  for (const Binding& b : bindings) {
    for (const ql::PatternStmt& stmt : rule.rule.head) {
      auto facts = instantiate_head(stmt, b, t);
      if (!facts) {
        ++diag.discarded_bindings;
        continue;
      }
      for (TimestampedFact& fact : *facts) {
        if (rule.rule.kind == ql::RuleKind::Hard) {
          auto key = std::make_pair(rule.output_stream.iri.value, fact);
          if (!emitted_.insert(key).second) continue;
          result.outputs.push_back(Output{rule.output_stream, fact, rule.rule.id});
          any_new = true;
        } else {
          fusion::Hypothesis h;
          h.rule_id = rule.rule.id;
          h.head_fact = fact;
          h.tick = fact.timestamp;
          if (fact.triple.predicate.value == options_.association_predicate) {
            h.target = fact.triple.object;
            if (rule.det_var) {
              const Term* det = b.find(*rule.det_var);
              h.detection = det ? std::optional<Term>(*det) : std::nullopt;
            } else if (rule.det_const) {
              h.detection = rule.det_const;
            }
            if (!h.detection) h.detection = fact.triple.subject;
          }
          if (rule.gate_lhs) {
            auto value = eval_numeric(*rule.gate_lhs, b, boxes_);
            if (!value) {
              ++diag.discarded_bindings;
              continue;
            }
            h.confidence = std::clamp(*value, 0.0, 1.0);
            std::ostringstream ev;
            ev << ql::print_filter(*rule.gate_lhs) << "=" << *value;
            h.evidence = ev.str();
          }
          std::string shape_key =
              (h.detection ? term_sort_key(*h.detection) : "-") + "|" +
              (h.target ? term_sort_key(*h.target) : "-");
          auto key = std::make_tuple(rule.rule.id.value, fact, shape_key);
          if (!raised_.insert(key).second) continue;
          result.hypotheses.push_back(std::move(h));
          any_new = true;
        }
      }
    }
  }
  return any_new;
}

TickResult Engine::evaluate_tick(Tick t) {
  if (current_tick_ >= 0 && t < current_tick_)
    throw EngineError("evaluate_tick going backwards: " + std::to_string(t));
  if (t != current_tick_) advance_to(t);

  TickResult result;
  int pass = 0;
  while (true) {
    drain_mailbox();
    std::size_t outputs_before = result.outputs.size();
    std::vector<fusion::Hypothesis> pass_hyps;

    for (std::size_t idx : rule_order_) {
      TickResult rule_result;
      rule_result.diagnostics = Diagnostics{};
      evaluate_rule(*rules_[idx], t, rule_result);
      result.diagnostics += rule_result.diagnostics;
      for (Output& o : rule_result.outputs) result.outputs.push_back(std::move(o));
      for (fusion::Hypothesis& h : rule_result.hypotheses) pass_hyps.push_back(std::move(h));
    }

    fusion::WorldSelection sel =
        fusion::select_world(pass_hyps, weights_, used_detections_, used_targets_);
    for (const fusion::Hypothesis& h : sel.chosen) {
      if (h.association()) {
        used_detections_.insert(*h.detection);
        used_targets_.insert(*h.target);
      }
      const CompiledRule* owner = nullptr;
      for (const auto& r : rules_)
        if (r->rule.id == h.rule_id) {
          owner = r.get();
          break;
        }
      StreamId stream = owner ? owner->output_stream : StreamId{Iri{rdf::vocab::dflt("out")}};
      auto key = std::make_pair(stream.iri.value, h.head_fact);
      if (emitted_.insert(key).second)
        result.outputs.push_back(Output{stream, h.head_fact, h.rule_id});
    }
    for (fusion::Hypothesis& h : pass_hyps) result.hypotheses.push_back(std::move(h));
    result.selection.chosen.insert(result.selection.chosen.end(), sel.chosen.begin(),
                                   sel.chosen.end());
    result.selection.rejected.insert(result.selection.rejected.end(), sel.rejected.begin(),
                                     sel.rejected.end());
    result.selection.score += sel.score;

    // Route this pass's new outputs.
    std::vector<Output> pass_outputs(result.outputs.begin() + outputs_before,
                                     result.outputs.end());
    std::sort(pass_outputs.begin(), pass_outputs.end(), [](const Output& a, const Output& b) {
      if (a.rule_id != b.rule_id) return a.rule_id < b.rule_id;
      return a.fact < b.fact;
    });
    for (const Output& o : pass_outputs) {
      for (const Sink& sink : sinks_) sink(o.stream, o.fact);
      const CompiledRule* owner = nullptr;
      for (const auto& r : rules_)
        if (r->rule.id == o.rule_id) {
          owner = r.get();
          break;
        }
      if (owner == nullptr || !owner->routing.feedback) continue;
      if (options_.same_tick_fixpoint) {
        route_fact(o.stream, o.fact);
      } else {
        deferred_feedback_.emplace_back(o.stream, o.fact);
      }
    }

    bool progressed = result.outputs.size() > outputs_before || !pass_hyps.empty();
    ++pass;
    if (!options_.same_tick_fixpoint || !progressed || pass >= options_.fixpoint_cap) break;
  }

  std::sort(result.outputs.begin(), result.outputs.end(), [](const Output& a, const Output& b) {
    if (a.rule_id != b.rule_id) return a.rule_id < b.rule_id;
    return a.fact < b.fact;
  });
  total_diagnostics_ += result.diagnostics;
  return result;
}

const WindowState& Engine::window(std::size_t rule_index, std::size_t block_index,
                                  bool naf) const {
  const CompiledRule& r = *rules_.at(rule_index);
  return naf ? r.naf.at(block_index).state : r.positive.at(block_index).state;
}

}  // namespace ssf::engine
