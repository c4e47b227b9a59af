#include "ssf/fusion/select.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "ssf/fusion/assignment.hpp"

namespace ssf::fusion {

namespace {

struct Pair {
  rdf::Term detection;
  rdf::Term target;
  bool operator<(const Pair& o) const {
    if (auto c = target <=> o.target; c != 0) return c < 0;
    return detection < o.detection;
  }
};

}  // namespace

WorldSelection select_world(std::vector<Hypothesis> hypotheses, const RuleWeights& weights) {
  return select_world(std::move(hypotheses), weights, {}, {});
}

WorldSelection select_world(std::vector<Hypothesis> hypotheses, const RuleWeights& weights,
                            const std::set<rdf::Term>& blocked_detections,
                            const std::set<rdf::Term>& blocked_targets) {
  WorldSelection out;

  // Deterministic processing order regardless of caller ordering.
  std::stable_sort(hypotheses.begin(), hypotheses.end(),
                   [](const Hypothesis& a, const Hypothesis& b) {
                     if (auto c = a.rule_id <=> b.rule_id; c != 0) return c < 0;
                     return a.head_fact < b.head_fact;
                   });

  std::map<Pair, Hypothesis> best;  // max-utility hypothesis per (detection, target)
  for (Hypothesis& h : hypotheses) {
    if (!h.association()) {
      out.chosen.push_back(h);
      out.score += weights.get(h.rule_id) * h.confidence;
      continue;
    }
    if (blocked_detections.count(*h.detection) || blocked_targets.count(*h.target)) {
      ExplanationRecord rec;
      rec.status = ExplanationRecord::Status::RejectedConflict;
      rec.hypothesis = h;
      rec.weight = weights.get(h.rule_id);
      out.rejected.push_back(std::move(rec));
      continue;
    }
    Pair key{*h.detection, *h.target};
    double utility = weights.get(h.rule_id) * h.confidence;
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(key, h);
      continue;
    }
    double incumbent = weights.get(it->second.rule_id) * it->second.confidence;
    // Same head fact from several rules: keep the higher utility.
    bool replace = utility > incumbent ||
                   (utility == incumbent && h.rule_id.value < it->second.rule_id.value);
    ExplanationRecord rec;
    rec.status = ExplanationRecord::Status::RejectedDominated;
    rec.weight = weights.get(replace ? it->second.rule_id : h.rule_id);
    if (replace) {
      rec.hypothesis = it->second;
      rec.winner = h;
      it->second = h;
    } else {
      rec.hypothesis = h;
      rec.winner = it->second;
    }
    out.rejected.push_back(std::move(rec));
  }

  // Index detections and targets in lexicographic order.
  std::vector<rdf::Term> dets, tgts;
  for (const auto& [pair, hyp] : best) {
    dets.push_back(pair.detection);
    tgts.push_back(pair.target);
  }
  auto uniq = [](std::vector<rdf::Term>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(dets);
  uniq(tgts);

  auto index_of = [](const std::vector<rdf::Term>& v, const rdf::Term& t) {
    return static_cast<int>(std::lower_bound(v.begin(), v.end(), t) - v.begin());
  };

  std::vector<std::vector<double>> utility(dets.size(), std::vector<double>(tgts.size(), 0.0));
  for (const auto& [pair, hyp] : best) {
    utility[index_of(dets, pair.detection)][index_of(tgts, pair.target)] =
        weights.get(hyp.rule_id) * hyp.confidence;
  }

  const double optimum = max_weight_score(utility);

  // Fix pairs in (target, detection) order whenever the optimum stays
  // reachable; yields the lexicographically least optimal matching.
  std::vector<bool> det_used(dets.size(), false), tgt_used(tgts.size(), false);
  std::vector<Pair> fixed;
  double fixed_sum = 0.0;
  const double eps = 1e-9 * std::max(1.0, std::abs(optimum));

  auto residual_best = [&](void) {
    std::vector<int> d_idx, t_idx;
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (!det_used[i]) d_idx.push_back(static_cast<int>(i));
    for (std::size_t j = 0; j < tgts.size(); ++j)
      if (!tgt_used[j]) t_idx.push_back(static_cast<int>(j));
    std::vector<std::vector<double>> sub(d_idx.size(), std::vector<double>(t_idx.size(), 0.0));
    for (std::size_t a = 0; a < d_idx.size(); ++a)
      for (std::size_t b = 0; b < t_idx.size(); ++b) sub[a][b] = utility[d_idx[a]][t_idx[b]];
    return max_weight_score(sub);
  };

  for (const auto& [pair, hyp] : best) {  // map iterates (target, detection) ascending
    int di = index_of(dets, pair.detection);
    int ti = index_of(tgts, pair.target);
    if (det_used[di] || tgt_used[ti]) continue;
    double u = utility[di][ti];
    if (u <= 0) continue;
    det_used[di] = true;
    tgt_used[ti] = true;
    if (fixed_sum + u + residual_best() >= optimum - eps) {
      fixed.push_back(pair);
      fixed_sum += u;
    } else {
      det_used[di] = false;
      tgt_used[ti] = false;
    }
  }

  std::set<Pair> fixed_set(fixed.begin(), fixed.end());
  std::vector<Hypothesis> winners;
  for (const auto& [pair, hyp] : best) {
    if (fixed_set.count(pair)) {
      out.chosen.push_back(hyp);
      out.score += weights.get(hyp.rule_id) * hyp.confidence;
      winners.push_back(hyp);
    }
  }
  for (const auto& [pair, hyp] : best) {
    if (fixed_set.count(pair)) continue;
    ExplanationRecord rec;
    rec.status = ExplanationRecord::Status::RejectedConflict;
    rec.hypothesis = hyp;
    rec.weight = weights.get(hyp.rule_id);
    for (const Hypothesis& w : winners) {
      if (*w.detection == pair.detection || *w.target == pair.target) {
        rec.winner = w;
        break;
      }
    }
    out.rejected.push_back(std::move(rec));
  }

  return out;
}

std::string RuleWeights::to_tsv() const {
  std::ostringstream out;
  for (const auto& [rule, weight] : weights_) out << rule << "\t" << weight << "\n";
  return out.str();
}

RuleWeights RuleWeights::from_tsv(const std::string& text) {
  RuleWeights w;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("weights line missing tab: " + line);
    w.weights_[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
  }
  return w;
}

std::vector<ExplanationRecord> explain(const WorldSelection& selection,
                                       const RuleWeights& weights) {
  std::vector<ExplanationRecord> records;
  for (const Hypothesis& h : selection.chosen) {
    ExplanationRecord rec;
    rec.status = h.association() ? ExplanationRecord::Status::Chosen
                                 : ExplanationRecord::Status::Bypass;
    rec.hypothesis = h;
    rec.weight = weights.get(h.rule_id);
    rec.contribution = rec.weight * h.confidence;
    records.push_back(std::move(rec));
  }
  for (const ExplanationRecord& r : selection.rejected) records.push_back(r);
  return records;
}

std::string explanation_to_tsv(const ExplanationRecord& record, const rdf::PrefixMap& prefixes) {
  const Hypothesis& h = record.hypothesis;
  std::ostringstream out;
  switch (record.status) {
    case ExplanationRecord::Status::Chosen: out << "chosen"; break;
    case ExplanationRecord::Status::Bypass: out << "bypass"; break;
    case ExplanationRecord::Status::RejectedConflict: out << "rejected:conflict"; break;
    case ExplanationRecord::Status::RejectedDominated: out << "rejected:dominated"; break;
  }
  out << "\t" << h.tick;
  out << "\t" << (prefixes.qualify(h.rule_id.value).value_or(h.rule_id.value));
  out << "\t" << rdf::serialize_fact(h.head_fact, prefixes);
  out << "\t" << (h.detection ? rdf::serialize_term(*h.detection, prefixes) : "-");
  out << "\t" << (h.target ? rdf::serialize_term(*h.target, prefixes) : "-");
  out << "\t" << h.confidence;
  out << "\t" << record.weight;
  out << "\t" << record.contribution;
  out << "\t" << (h.evidence.empty() ? "-" : h.evidence);
  if (record.winner) {
    out << "\twinner=" << rdf::serialize_fact(record.winner->head_fact, prefixes);
  } else {
    out << "\t-";
  }
  return out.str();
}

}  // namespace ssf::fusion
