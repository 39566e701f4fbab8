#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mba/dataset.hpp"
#include "mba/errors.hpp"
#include "mba/format.hpp"
#include "mba/rng.hpp"
#include "mba/rules.hpp"

namespace mba {

// Holdout validation and rule triage. Splitting is receipt-level and a
// pure function of (seed, receipt_id), so membership is stable under
// input reordering and reproducible across runs.

struct SplitSpec {
  double holdout_fraction = 0.3;  // in (0,1)
  std::uint64_t seed = 0;
};

/// True iff the receipt lands in the holdout: splitmix64(seed XOR
/// fnv1a64(receipt_id)) mod 10^6 < holdout_fraction * 10^6.
inline bool in_holdout(const SplitSpec& spec, const std::string& receipt_id) {
  const std::uint64_t mixed = splitmix64(spec.seed ^ fnv1a64(receipt_id));
  const std::uint64_t threshold = static_cast<std::uint64_t>(
      std::llround(spec.holdout_fraction * 1e6));
  return mixed % 1000000 < threshold;
}

/// Deterministic disjoint, exhaustive train/holdout partition.
inline std::pair<std::vector<Basket>, std::vector<Basket>> split_baskets(
    std::span<const Basket> baskets, const SplitSpec& spec) {
  if (!(spec.holdout_fraction > 0.0) || !(spec.holdout_fraction < 1.0))
    throw Error::config("holdout_fraction must be in (0,1)");
  if (baskets.size() < 2)
    throw Error::data("split requires at least 2 baskets");
  std::vector<Basket> train, holdout;
  for (const auto& basket : baskets) {
    if (in_holdout(spec, basket.receipt_id))
      holdout.push_back(basket);
    else
      train.push_back(basket);
  }
  if (train.empty() || holdout.empty())
    throw Error::data("degenerate split: one side is empty");
  return {std::move(train), std::move(holdout)};
}

enum class StabilityStatus { stable, unstable, unsupported };

inline std::string to_string(StabilityStatus s) {
  switch (s) {
    case StabilityStatus::stable: return "yes";
    case StabilityStatus::unstable: return "no";
    default: return "unsupported";
  }
}

struct ValidationEntry {
  ScoredRule rule;
  double train_confidence = 0.0;  // fraction
  std::optional<double> holdout_confidence;
  std::optional<double> drop;  // |train - holdout|, fraction
  StabilityStatus status = StabilityStatus::unsupported;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  double delta = 0.0;
  std::size_t n_stable = 0;
  std::size_t n_unstable = 0;
  std::size_t n_unsupported = 0;
};

/// Recomputes each rule's confidence on a holdout index. Rules whose
/// antecedent never occurs in the holdout are flagged unsupported rather
/// than judged.
inline ValidationReport validate_rules(const std::vector<ScoredRule>& rules,
                                       std::span<const Basket> holdout,
                                       double delta) {
  if (holdout.empty()) throw Error::data("validate_rules: empty holdout");
  const BitmapIndex index = build_index(holdout);
  ValidationReport report;
  report.delta = delta;
  for (const auto& scored : rules) {
    ValidationEntry entry;
    entry.rule = scored;
    entry.train_confidence = scored.metrics.confidence;

    std::uint64_t instances = 0;
    bool all_known = true;
    std::vector<std::uint32_t> antecedent_cols;
    for (const auto& id : scored.rule.antecedent) {
      auto col = index.column(id);
      if (!col) {
        all_known = false;
        break;
      }
      antecedent_cols.push_back(*col);
    }
    if (all_known) instances = index.support_of_columns(antecedent_cols);

    if (!all_known || instances == 0) {
      entry.status = StabilityStatus::unsupported;
      ++report.n_unsupported;
      report.entries.push_back(std::move(entry));
      continue;
    }

    std::uint64_t joint = 0;
    if (auto ccol = index.column(scored.rule.consequent)) {
      auto all_cols = antecedent_cols;
      all_cols.push_back(*ccol);
      std::sort(all_cols.begin(), all_cols.end());
      joint = index.support_of_columns(all_cols);
    }
    const double holdout_conf =
        static_cast<double>(joint) / static_cast<double>(instances);
    entry.holdout_confidence = holdout_conf;
    entry.drop = std::fabs(entry.train_confidence - holdout_conf);
    entry.status = *entry.drop <= delta ? StabilityStatus::stable
                                        : StabilityStatus::unstable;
    if (entry.status == StabilityStatus::stable)
      ++report.n_stable;
    else
      ++report.n_unstable;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

/// Rules CSV columns plus holdout_confidence;drop;stable (percent,
/// percent, yes/no/unsupported).
inline void write_validation_csv(std::ostream& out,
                                 const ValidationReport& report) {
  out << "consequent;antecedent;instances;support_pct;confidence_pct;lift;"
         "j_bits;mdl_bits;holdout_confidence;drop;stable\n";
  for (const auto& entry : report.entries) {
    out << render_rule_row(entry.rule) << ';';
    if (entry.holdout_confidence)
      out << render_fixed(100.0 * *entry.holdout_confidence, 1);
    out << ';';
    if (entry.drop) out << render_fixed(100.0 * *entry.drop, 1);
    out << ';' << to_string(entry.status) << '\n';
  }
}

/// Pattern over rules: `antecedent_items(|-joined) => consequent`,
/// with `*` matching anything on either side.
struct RulePattern {
  std::optional<Itemset> antecedent;   // nullopt = wildcard
  std::optional<std::string> consequent;

  bool matches(const Rule& rule) const {
    if (antecedent && *antecedent != rule.antecedent) return false;
    if (consequent && *consequent != rule.consequent) return false;
    return true;
  }

  static RulePattern parse(const std::string& line) {
    const std::size_t arrow = line.find("=>");
    if (arrow == std::string::npos)
      throw Error::data("malformed rule pattern (missing '=>'): " + line);
    const std::string lhs = trim(line.substr(0, arrow));
    const std::string rhs = trim(line.substr(arrow + 2));
    if (lhs.empty() || rhs.empty())
      throw Error::data("malformed rule pattern (empty side): " + line);
    RulePattern pattern;
    if (lhs != "*") {
      Itemset items;
      for (const auto& part : split_on(lhs, '|')) {
        std::string id = trim(part);
        if (id.empty())
          throw Error::data("malformed rule pattern (empty item): " + line);
        items.push_back(std::move(id));
      }
      pattern.antecedent = make_itemset(std::move(items));
    }
    if (rhs != "*") pattern.consequent = rhs;
    return pattern;
  }
};

/// One pattern per line; blank lines and '#' comments are skipped.
inline std::vector<RulePattern> parse_pattern_file(std::istream& in) {
  std::vector<RulePattern> patterns;
  std::string line;
  while (std::getline(in, line)) {
    std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    patterns.push_back(RulePattern::parse(text));
  }
  return patterns;
}

enum class TriageLabel { actionable, trivial, inexplicable, unlabeled };

inline std::string to_string(TriageLabel label) {
  switch (label) {
    case TriageLabel::actionable: return "actionable";
    case TriageLabel::trivial: return "trivial";
    case TriageLabel::inexplicable: return "inexplicable";
    default: return "unlabeled";
  }
}

inline TriageLabel parse_triage_label(const std::string& name) {
  if (name == "actionable") return TriageLabel::actionable;
  if (name == "trivial") return TriageLabel::trivial;
  if (name == "inexplicable") return TriageLabel::inexplicable;
  if (name == "unlabeled") return TriageLabel::unlabeled;
  throw Error::data("unknown triage label: " + name);
}

struct TriageThresholds {
  double lift_epsilon = 0.1;         // lift in [1-eps, 1+eps] is no surprise
  std::uint64_t floor_instances = 5; // fewer instances cannot be explained
};

/// Manual override: pattern, label, optional rationale.
struct Annotation {
  RulePattern pattern;
  TriageLabel label = TriageLabel::unlabeled;
  std::string rationale;

  /// `antecedent => consequent : label [: rationale]`
  static Annotation parse(const std::string& line) {
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw Error::data("malformed annotation (missing ':'): " + line);
    Annotation note;
    note.pattern = RulePattern::parse(trim(line.substr(0, colon)));
    std::string rest = trim(line.substr(colon + 1));
    const std::size_t second = rest.find(':');
    if (second != std::string::npos) {
      note.rationale = trim(rest.substr(second + 1));
      rest = trim(rest.substr(0, second));
    }
    note.label = parse_triage_label(rest);
    if (note.rationale.empty()) note.rationale = "user override";
    return note;
  }
};

inline std::vector<Annotation> parse_annotation_file(std::istream& in) {
  std::vector<Annotation> notes;
  std::string line;
  while (std::getline(in, line)) {
    std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    notes.push_back(Annotation::parse(text));
  }
  return notes;
}

struct TriagedRule {
  ScoredRule rule;
  TriageLabel label = TriageLabel::unlabeled;
  std::string rationale;
};

/// Suggested labels, first match wins: user annotation, known
/// association, lift near 1, too few instances, otherwise actionable.
/// Every rule receives exactly one label.
inline std::vector<TriagedRule> triage(
    const std::vector<ScoredRule>& rules,
    const std::vector<RulePattern>& known_associations,
    const TriageThresholds& thresholds,
    const std::vector<Annotation>& annotations = {}) {
  std::vector<TriagedRule> out;
  out.reserve(rules.size());
  for (const auto& scored : rules) {
    TriagedRule triaged;
    triaged.rule = scored;
    const Annotation* note = nullptr;
    for (const auto& a : annotations)
      if (a.pattern.matches(scored.rule)) {
        note = &a;
        break;
      }
    if (note) {
      triaged.label = note->label;
      triaged.rationale = note->rationale;
    } else if (std::any_of(known_associations.begin(),
                           known_associations.end(),
                           [&](const RulePattern& p) {
                             return p.matches(scored.rule);
                           })) {
      triaged.label = TriageLabel::trivial;
      triaged.rationale = "known association";
    } else if (std::fabs(scored.metrics.lift - 1.0) <=
               thresholds.lift_epsilon) {
      triaged.label = TriageLabel::trivial;
      triaged.rationale = "lift near 1";
    } else if (scored.metrics.instances < thresholds.floor_instances) {
      triaged.label = TriageLabel::inexplicable;
      triaged.rationale = "too few instances";
    } else {
      triaged.label = TriageLabel::actionable;
      triaged.rationale = "passes triage thresholds";
    }
    out.push_back(std::move(triaged));
  }
  return out;
}

inline void write_triage_csv(std::ostream& out,
                             const std::vector<TriagedRule>& triaged) {
  out << "consequent;antecedent;label;rationale\n";
  for (const auto& entry : triaged)
    out << entry.rule.rule.consequent << ';'
        << join(entry.rule.rule.antecedent, '|') << ';'
        << to_string(entry.label) << ';' << entry.rationale << '\n';
}

}  // namespace mba
