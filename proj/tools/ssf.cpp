#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssf/config.hpp"
#include "ssf/fed/federation.hpp"
#include "ssf/learn/perceptron.hpp"
#include "ssf/pipeline.hpp"
#include "ssf/ql/analysis.hpp"
#include "ssf/ql/parser.hpp"
#include "ssf/ql/printer.hpp"
#include "ssf/rdf/turtle.hpp"

namespace {

using json = nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

struct CommonArgs {
  std::string config_file;
  std::vector<std::string> sets;
  std::string prelude_file;

  ssf::Config config() const {
    ssf::Config c;
    if (!config_file.empty()) c = ssf::Config::from_text(read_file(config_file));
    for (const std::string& kv : sets) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value");
      c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    c.validate();
    return c;
  }

  ssf::ql::ParseOptions parse_options(const ssf::Config& c) const {
    ssf::ql::ParseOptions opts = c.parse_options();
    if (!prelude_file.empty())
      opts.prefixes = ssf::rdf::parse_prefix_document(read_file(prelude_file), opts.prefixes);
    return opts;
  }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_file, "flat key=value config file");
  cmd->add_option("--set", args.sets, "override one config key (key=value)")
      ->take_all();
  cmd->add_option("--prelude", args.prelude_file, "extra @prefix declarations");
}

json term_or_var_json(const ssf::ql::TermOrVar& tv) {
  if (ssf::ql::is_var(tv)) return json{{"var", ssf::ql::as_var(tv).name}};
  return json{{"term", ssf::rdf::serialize_term(ssf::ql::as_term(tv))}};
}

json pattern_json(const ssf::ql::PatternStmt& stmt) {
  json out;
  if (std::holds_alternative<ssf::ql::PlainPattern>(stmt)) {
    const auto& p = std::get<ssf::ql::PlainPattern>(stmt);
    out["kind"] = "plain";
    out["subject"] = term_or_var_json(p.subject);
    out["predicate"] = term_or_var_json(p.predicate);
    out["object"] = term_or_var_json(p.object);
    if (p.ts_var) out["ts_var"] = p.ts_var->name;
  } else {
    const auto& q = std::get<ssf::ql::QtStatement>(stmt);
    out["kind"] = "quoted";
    out["subject"] = term_or_var_json(q.qt.subject);
    out["predicate"] = term_or_var_json(q.qt.predicate);
    out["object"] = term_or_var_json(q.qt.object);
    if (q.ts_var) out["ts_var"] = q.ts_var->name;
    for (const auto& a : q.annotations) {
      out["annotations"].push_back(json{{"predicate", term_or_var_json(a.predicate)},
                                        {"object", term_or_var_json(a.object)}});
    }
  }
  return out;
}

json rule_json(const ssf::ql::Rule& rule) {
  json out;
  out["id"] = rule.id.value;
  out["kind"] = rule.kind == ssf::ql::RuleKind::Soft ? "soft" : "hard";
  for (const auto& h : rule.head) out["head"].push_back(pattern_json(h));
  auto block_json = [](const ssf::ql::StreamBlock& b) {
    json j;
    j["stream"] = b.stream.iri.value;
    j["window"] = b.window.kind == ssf::ql::WindowSpec::Kind::Now
                      ? json("now")
                      : json{{"range_sec", b.window.seconds}};
    if (b.block_ts_var) j["ts_var"] = b.block_ts_var->name;
    for (const auto& p : b.patterns) j["patterns"].push_back(pattern_json(p));
    for (const auto& f : b.filters) j["filters"].push_back(ssf::ql::print_filter(*f));
    return j;
  };
  for (const auto& b : rule.body.positive) out["positive"].push_back(block_json(b));
  for (const auto& b : rule.body.naf) out["naf"].push_back(block_json(b));
  for (const auto& p : rule.body.static_patterns)
    out["static"].push_back(pattern_json(ssf::ql::PatternStmt{p}));
  for (const auto& f : rule.body.filters)
    out["filters"].push_back(ssf::ql::print_filter(*f));
  return out;
}

int cmd_parse(const std::string& rules_file, bool ast, const CommonArgs& common) {
  ssf::Config config = common.config();
  auto rules = ssf::ql::parse_rule_document(read_file(rules_file), common.parse_options(config));
  if (ast) {
    json doc = json::array();
    for (const auto& r : rules) doc.push_back(rule_json(r));
    std::cout << doc.dump(2) << "\n";
    return 0;
  }
  for (const auto& r : rules) {
    std::cout << ssf::ql::pretty_print(r);
    std::cout << ssf::ql::report_to_string(ssf::ql::analyze_rule(r)) << "\n";
  }
  return 0;
}

std::map<ssf::rdf::Tick, std::vector<ssf::tracker::DetectionRecord>> group_by_frame(
    const std::vector<ssf::tracker::DetectionRecord>& records) {
  std::map<ssf::rdf::Tick, std::vector<ssf::tracker::DetectionRecord>> by_frame;
  for (const auto& r : records) by_frame[r.frame].push_back(r);
  return by_frame;
}

int cmd_run(const std::string& rules_file, const std::string& detections_file,
            const std::string& tracks_file, const std::string& stream_out_file,
            const std::string& explain_file, const std::string& weights_file, bool strict,
            const CommonArgs& common) {
  ssf::Config config = common.config();
  auto rules = ssf::ql::parse_rule_document(read_file(rules_file), common.parse_options(config));
  ssf::fusion::RuleWeights weights;
  if (!weights_file.empty())
    weights = ssf::fusion::RuleWeights::from_tsv(read_file(weights_file));

  auto records = ssf::tracker::parse_detection_csv(read_file(detections_file));
  auto by_frame = group_by_frame(records);

  ssf::TrackingPipeline pipeline(rules, config, weights);

  std::ostringstream tracks, stream_out, explain_out;
  const ssf::rdf::PrefixMap& prefixes = ssf::rdf::standard_prefixes();
  for (const auto& [prefix, ns] : prefixes.entries())
    stream_out << "@prefix " << prefix << ": <" << ns << "> .\n";

  ssf::rdf::Tick first = by_frame.empty() ? 0 : by_frame.begin()->first;
  ssf::rdf::Tick last = by_frame.empty() ? -1 : by_frame.rbegin()->first;
  long diagnostics = 0;
  for (ssf::rdf::Tick t = first; t <= last; ++t) {
    std::vector<ssf::tracker::DetectionRecord> frame;
    if (auto it = by_frame.find(t); it != by_frame.end()) frame = it->second;
    ssf::TickOutput out = pipeline.process_tick(t, frame);
    for (const auto& row : out.rows) tracks << row.to_csv() << "\n";
    for (const auto& o : out.stream_outputs)
      stream_out << ssf::rdf::serialize_fact(o.fact, prefixes) << "\n";
    for (const auto& rec : ssf::fusion::explain(out.selection, pipeline.engine().weights()))
      explain_out << ssf::fusion::explanation_to_tsv(rec, prefixes) << "\n";
    diagnostics += out.diagnostics.builtin_errors + out.diagnostics.discarded_bindings;
  }

  if (!tracks_file.empty()) write_file(tracks_file, tracks.str());
  if (!stream_out_file.empty()) write_file(stream_out_file, stream_out.str());
  if (!explain_file.empty()) write_file(explain_file, explain_out.str());
  if (diagnostics > 0) {
    std::cerr << "diagnostics: " << diagnostics << " evaluation errors counted\n";
    if (strict) return 1;
  }
  return 0;
}

int cmd_train(const std::string& rules_file, const std::string& trace_file,
              const std::string& samples_file, const std::string& init_weights_file, double lr,
              int epochs, const std::string& out_file, const std::string& report_file,
              const CommonArgs& common) {
  ssf::Config config = common.config();
  auto parse_opts = common.parse_options(config);
  auto rules = ssf::ql::parse_rule_document(read_file(rules_file), parse_opts);

  ssf::fusion::RuleWeights init;
  if (!init_weights_file.empty())
    init = ssf::fusion::RuleWeights::from_tsv(read_file(init_weights_file));

  // Harvest per-tick hypotheses by streaming the trace through the rules.
  ssf::engine::Engine engine(config.engine_options());
  std::set<ssf::rdf::StreamId> streams;
  for (const auto& r : rules) {
    auto report = ssf::ql::analyze_rule(r);
    streams.insert(report.streams.begin(), report.streams.end());
  }
  for (const auto& s : streams) engine.register_stream(s);
  for (const auto& r : rules) engine.add_rule(r);

  auto facts = ssf::rdf::parse_fact_document(read_file(trace_file), parse_opts.prefixes);
  std::map<ssf::rdf::Tick, std::vector<ssf::rdf::TimestampedFact>> by_tick;
  for (const auto& f : facts) by_tick[f.timestamp].push_back(f);

  // Samples: <tick> TAB <gold fact statement>.
  std::map<ssf::rdf::Tick, std::vector<ssf::rdf::TimestampedFact>> gold;
  {
    std::istringstream in(read_file(samples_file));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw std::runtime_error("samples line " + std::to_string(line_no) +
                                 ": expected <tick>\\t<fact>");
      ssf::rdf::Tick tick = std::stoll(line.substr(0, tab));
      auto parsed =
          ssf::rdf::parse_fact_document(line.substr(tab + 1), parse_opts.prefixes, tick);
      for (auto& f : parsed) gold[tick].push_back(std::move(f));
    }
  }

  std::vector<ssf::learn::LabeledTick> samples;
  if (!by_tick.empty()) {
    const ssf::rdf::StreamId main_stream = *streams.begin();
    for (ssf::rdf::Tick t = by_tick.begin()->first; t <= by_tick.rbegin()->first; ++t) {
      if (auto it = by_tick.find(t); it != by_tick.end()) engine.push(main_stream, it->second);
      ssf::engine::TickResult res = engine.evaluate_tick(t);
      if (!gold.count(t) && res.hypotheses.empty()) continue;
      ssf::learn::LabeledTick sample;
      sample.tick = t;
      sample.hypotheses = res.hypotheses;
      if (auto it = gold.find(t); it != gold.end()) sample.gold = it->second;
      samples.push_back(std::move(sample));
    }
  }

  ssf::learn::TrainOptions opts;
  opts.learning_rate = lr;
  opts.max_epochs = epochs;
  ssf::learn::TrainReport report = ssf::learn::train(samples, init, opts);

  for (const std::string& msg : report.infeasible) std::cerr << "warning: " << msg << "\n";
  if (!out_file.empty()) write_file(out_file, report.final_weights.to_tsv());
  if (!report_file.empty()) write_file(report_file, report.to_string());
  std::cout << (report.converged ? "converged" : "not converged") << " after "
            << report.epochs_run << " epochs\n";
  return 0;
}

int cmd_federate(const std::string& topology_file, const std::string& rules_file,
                 const std::vector<std::string>& traces, const CommonArgs& common) {
  ssf::Config config = common.config();
  auto parse_opts = common.parse_options(config);
  auto rules = ssf::ql::parse_rule_document(read_file(rules_file), parse_opts);
  ssf::fed::Topology topology = ssf::fed::Topology::parse(read_file(topology_file));

  std::map<ssf::rdf::StreamId, std::vector<ssf::rdf::TimestampedFact>> trace_facts;
  const ssf::rdf::PrefixMap& prefixes = parse_opts.prefixes;
  for (const std::string& spec : traces) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--trace expects <stream>=<file>");
    std::string stream_text = spec.substr(0, eq);
    auto colon = stream_text.find(':');
    ssf::rdf::StreamId stream{ssf::rdf::Iri{stream_text}};
    if (colon != std::string::npos && prefixes.has(stream_text.substr(0, colon)))
      stream = ssf::rdf::StreamId{
          ssf::rdf::Iri{prefixes.expand(stream_text.substr(0, colon), stream_text.substr(colon + 1))}};
    auto facts = ssf::rdf::parse_fact_document(read_file(spec.substr(eq + 1)), prefixes);
    auto& sink = trace_facts[stream];
    sink.insert(sink.end(), facts.begin(), facts.end());
  }

  ssf::rdf::Tick last = 0;
  for (const auto& [stream, facts] : trace_facts)
    for (const auto& f : facts) last = std::max(last, f.timestamp);

  // Federated run.
  ssf::fed::Federation federation(topology, config.engine_options());
  for (const auto& r : rules) federation.deploy(r);
  std::map<ssf::rdf::Tick, std::multiset<std::string>> federated;
  {
    std::map<ssf::rdf::Tick, std::map<ssf::rdf::StreamId, std::vector<ssf::rdf::TimestampedFact>>>
        by_tick;
    for (const auto& [stream, facts] : trace_facts)
      for (const auto& f : facts) by_tick[f.timestamp][stream].push_back(f);
    for (ssf::rdf::Tick t = 0; t <= last; ++t) {
      if (auto it = by_tick.find(t); it != by_tick.end())
        for (auto& [stream, facts] : it->second) federation.push(stream, facts);
      for (const auto& o : federation.evaluate_tick(t))
        federated[t].insert(o.stream.iri.value + " " + ssf::rdf::serialize_fact(o.fact));
    }
  }

  // Monolithic reference run.
  std::map<ssf::rdf::Tick, std::multiset<std::string>> monolithic;
  {
    ssf::engine::Engine engine(config.engine_options());
    for (const auto& node : topology.nodes)
      for (const auto& s : node.streams)
        if (!engine.has_stream(s)) engine.register_stream(s);
    ssf::engine::RuleRouting routing;
    routing.feedback = false;
    for (const auto& r : rules) engine.add_rule(r, routing);
    std::map<ssf::rdf::Tick, std::map<ssf::rdf::StreamId, std::vector<ssf::rdf::TimestampedFact>>>
        by_tick;
    for (const auto& [stream, facts] : trace_facts)
      for (const auto& f : facts) by_tick[f.timestamp][stream].push_back(f);
    for (ssf::rdf::Tick t = 0; t <= last; ++t) {
      if (auto it = by_tick.find(t); it != by_tick.end())
        for (auto& [stream, facts] : it->second) engine.push(stream, facts);
      for (const auto& o : engine.evaluate_tick(t).outputs)
        monolithic[t].insert(o.stream.iri.value + " " + ssf::rdf::serialize_fact(o.fact));
    }
  }

  bool equal = federated == monolithic;
  for (const auto& sub : federation.subscriptions())
    std::cout << "subscription " << sub.id << " node=" << sub.source_node
              << " delivered=" << sub.delivered << "\n";
  std::cout << "verdict: " << (equal ? "EQUAL" : "DIFFER") << "\n";
  return equal ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semantic stream fusion engine"};
  app.require_subcommand(1);

  // parse
  auto* parse = app.add_subcommand("parse", "parse rules, print normalized form and analysis");
  std::string parse_rules;
  bool parse_ast = false;
  CommonArgs parse_common;
  parse->add_option("rules", parse_rules, "rule document (.ttl)")->required();
  parse->add_flag("--ast", parse_ast, "dump a structured tree as JSON");
  add_common(parse, parse_common);

  // run
  auto* run = app.add_subcommand("run", "stream detections through the rule pipeline");
  std::string run_rules, run_dets, run_tracks = "tracks.csv", run_stream, run_explain,
              run_weights;
  bool run_strict = false;
  CommonArgs run_common;
  run->add_option("--rules", run_rules)->required();
  run->add_option("--detections", run_dets)->required();
  run->add_option("--tracks", run_tracks, "MOT-style CSV output");
  run->add_option("--stream-out", run_stream, "derived facts (turtle-star)");
  run->add_option("--explain", run_explain, "explanation records (TSV)");
  run->add_option("--weights", run_weights, "soft-rule weights (TSV)");
  run->add_flag("--strict", run_strict, "exit nonzero on evaluation errors");
  add_common(run, run_common);

  // train
  auto* train = app.add_subcommand("train", "learn soft-rule weights from labeled feedback");
  std::string train_rules, train_trace, train_samples, train_init, train_out = "weights.tsv",
              train_report;
  double train_lr = 0.1;
  int train_epochs = 100;
  CommonArgs train_common;
  train->add_option("--rules", train_rules)->required();
  train->add_option("--trace", train_trace, "input fact stream (turtle-star)")->required();
  train->add_option("--samples", train_samples, "gold facts: <tick>\\t<fact> lines")->required();
  train->add_option("--init-weights", train_init);
  train->add_option("--lr", train_lr);
  train->add_option("--epochs", train_epochs);
  train->add_option("--out", train_out);
  train->add_option("--report", train_report);
  add_common(train, train_common);

  // federate
  auto* fed = app.add_subcommand("federate", "run the multi-node harness and check equivalence");
  std::string fed_topology, fed_rules;
  std::vector<std::string> fed_traces;
  CommonArgs fed_common;
  fed->add_option("--topology", fed_topology)->required();
  fed->add_option("--rules", fed_rules)->required();
  fed->add_option("--trace", fed_traces, "<stream>=<file>, repeatable")->take_all();
  add_common(fed, fed_common);

  // config
  auto* cfg = app.add_subcommand("config", "print engine configuration");
  bool cfg_defaults = false;
  CommonArgs cfg_common;
  cfg->add_flag("--defaults", cfg_defaults, "print built-in defaults");
  add_common(cfg, cfg_common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse->parsed()) return cmd_parse(parse_rules, parse_ast, parse_common);
    if (run->parsed())
      return cmd_run(run_rules, run_dets, run_tracks, run_stream, run_explain, run_weights,
                     run_strict, run_common);
    if (train->parsed())
      return cmd_train(train_rules, train_trace, train_samples, train_init, train_lr,
                       train_epochs, train_out, train_report, train_common);
    if (fed->parsed()) return cmd_federate(fed_topology, fed_rules, fed_traces, fed_common);
    if (cfg->parsed()) {
      std::cout << (cfg_defaults ? ssf::Config().to_text() : cfg_common.config().to_text());
      return 0;
    }
  } catch (const ssf::rdf::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ssf::fed::FederationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
