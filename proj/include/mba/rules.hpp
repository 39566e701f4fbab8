#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mba/errors.hpp"
#include "mba/format.hpp"
#include "mba/mining.hpp"

namespace mba {

// Association rules with a single-item consequent, scored by antecedent
// instances, support, confidence, lift, J-measure bits and an MDL code
// length. Candidate rules come from the frequent-itemset table; ranking
// by J-measure with a rule cap realizes GRI-style induction.

struct Rule {
  Itemset antecedent;
  std::string consequent;

  std::size_t items_involved() const { return antecedent.size() + 1; }

  bool operator==(const Rule&) const = default;
};

enum class SupportMode { antecedent, joint };

inline SupportMode parse_support_mode(const std::string& name) {
  if (name == "antecedent") return SupportMode::antecedent;
  if (name == "joint") return SupportMode::joint;
  throw Error::config("unknown support mode: " + name);
}

struct RuleGenParams {
  double min_confidence = 0.5;       // fraction in (0,1]
  SupportMode support_mode = SupportMode::antecedent;
  bool virtual_antecedent_only = true;
  /// Optional GRI-style cap: keep only the top max_rules by J-measure.
  std::optional<std::size_t> max_rules;
};

struct RuleMetrics {
  std::uint64_t instances = 0;         // |T(antecedent)|
  std::uint64_t joint = 0;             // |T(antecedent + consequent)|
  std::uint64_t consequent_count = 0;  // |T(consequent)|
  std::uint64_t n_baskets = 0;
  SupportMode support_mode = SupportMode::antecedent;
  double support_pct = 0.0;
  double confidence = 0.0;  // fraction
  double lift = 0.0;
  double j_measure_bits = 0.0;
  double mdl_bits = 0.0;

  double confidence_pct() const { return 100.0 * confidence; }
};

struct ScoredRule {
  Rule rule;
  RuleMetrics metrics;
};

/// J-measure in bits from raw counts:
///   J = P(A) * [ p*log2(p/q) + (1-p)*log2((1-p)/(1-q)) ]
/// with p = P(C|A), q = P(C) and the convention 0*log2(0/x) = 0.
/// Exact independence (joint*n == instances*c_count) returns 0 so the
/// "zero iff independent" law holds as a rational identity.
inline double j_measure_from_counts(std::uint64_t n, std::uint64_t instances,
                                    std::uint64_t joint,
                                    std::uint64_t c_count) {
  if (n == 0 || instances == 0)
    throw Error::config("j_measure: undefined for zero antecedent support");
  if (static_cast<unsigned __int128>(joint) * n ==
      static_cast<unsigned __int128>(instances) * c_count)
    return 0.0;
  if (c_count == 0 || c_count == n)
    throw Error::config("j_measure: undefined for P(consequent) in {0,1}");
  const double p = static_cast<double>(joint) / static_cast<double>(instances);
  const double q = static_cast<double>(c_count) / static_cast<double>(n);
  const double pa =
      static_cast<double>(instances) / static_cast<double>(n);
  double bits = 0.0;
  if (p > 0.0) bits += p * std::log2(p / q);
  if (p < 1.0) bits += (1.0 - p) * std::log2((1.0 - p) / (1.0 - q));
  return pa * bits;
}

namespace detail {

inline double log2_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) throw Error::config("log2_binomial: k > n");
  if (k == 0 || k == n) return 0.0;
  const long double ln2 = 0.6931471805599453094L;
  return static_cast<double>(
      (std::lgammal(static_cast<long double>(n) + 1) -
       std::lgammal(static_cast<long double>(k) + 1) -
       std::lgammal(static_cast<long double>(n - k) + 1)) /
      ln2);
}

}  // namespace detail

/// MDL code length of a rule in bits: identity of the rule within an
/// M-item universe, the exception count, and which of the antecedent
/// baskets are exceptions:
///   bits = log2(M * C(M-1, k)) + log2(instances + 1) + log2(C(instances, e))
/// with k = |antecedent| and e = instances - joint. Fewer bits is better.
inline double mdl_bits_from_counts(std::uint64_t m_items, std::uint64_t k,
                                   std::uint64_t instances,
                                   std::uint64_t exceptions) {
  if (m_items < 2) throw Error::config("mdl: item universe too small");
  if (k < 1 || k > m_items - 1)
    throw Error::config("mdl: antecedent size out of range");
  if (exceptions > instances)
    throw Error::config("mdl: exceptions exceed instances");
  return std::log2(static_cast<double>(m_items)) +
         detail::log2_binomial(m_items - 1, k) +
         std::log2(static_cast<double>(instances) + 1.0) +
         detail::log2_binomial(instances, exceptions);
}

/// Full metrics for one rule against the index. Lift is computed as
/// joint*N / (|T(A)|*|T(C)|) in a fixed operation order, which makes
/// pairwise lift exactly symmetric.
inline RuleMetrics compute_metrics(const Rule& rule, const BitmapIndex& index,
                                   SupportMode mode = SupportMode::antecedent) {
  auto antecedent_cols = index.columns_of(rule.antecedent);
  auto all_cols = antecedent_cols;
  all_cols.push_back(index.require_column(rule.consequent));
  std::sort(all_cols.begin(), all_cols.end());

  RuleMetrics m;
  m.n_baskets = index.n_baskets();
  m.instances = index.support_of_columns(antecedent_cols);
  m.joint = index.support_of_columns(all_cols);
  m.consequent_count = index.count(index.require_column(rule.consequent));
  if (m.instances == 0)
    throw Error::data("undefined confidence: antecedent never occurs");
  if (m.consequent_count == 0)
    throw Error::data("undefined lift: consequent never occurs");

  m.confidence =
      static_cast<double>(m.joint) / static_cast<double>(m.instances);
  m.lift = (static_cast<double>(m.joint) * static_cast<double>(m.n_baskets)) /
           (static_cast<double>(m.instances) *
            static_cast<double>(m.consequent_count));
  m.support_mode = mode;
  const std::uint64_t numer =
      mode == SupportMode::antecedent ? m.instances : m.joint;
  m.support_pct =
      100.0 * static_cast<double>(numer) / static_cast<double>(m.n_baskets);
  m.j_measure_bits =
      j_measure_from_counts(m.n_baskets, m.instances, m.joint,
                            m.consequent_count);
  m.mdl_bits = mdl_bits_from_counts(index.n_items(), rule.antecedent.size(),
                                    m.instances, m.instances - m.joint);
  return m;
}

inline double j_measure(const Rule& rule, const BitmapIndex& index) {
  auto antecedent_cols = index.columns_of(rule.antecedent);
  auto all_cols = antecedent_cols;
  all_cols.push_back(index.require_column(rule.consequent));
  return j_measure_from_counts(
      index.n_baskets(), index.support_of_columns(antecedent_cols),
      index.support_of_columns(all_cols),
      index.count(index.require_column(rule.consequent)));
}

inline double mdl_score(const Rule& rule, const BitmapIndex& index) {
  auto antecedent_cols = index.columns_of(rule.antecedent);
  auto all_cols = antecedent_cols;
  all_cols.push_back(index.require_column(rule.consequent));
  const std::uint64_t instances = index.support_of_columns(antecedent_cols);
  const std::uint64_t joint = index.support_of_columns(all_cols);
  return mdl_bits_from_counts(index.n_items(), rule.antecedent.size(),
                              instances, instances - joint);
}

namespace detail {

inline bool rule_identity_less(const Rule& a, const Rule& b) {
  if (a.antecedent != b.antecedent) return a.antecedent < b.antecedent;
  return a.consequent < b.consequent;
}

}  // namespace detail

enum class RankMeasure { support, confidence, lift, j_measure, mdl };

inline RankMeasure parse_rank_measure(const std::string& name) {
  if (name == "support") return RankMeasure::support;
  if (name == "confidence") return RankMeasure::confidence;
  if (name == "lift") return RankMeasure::lift;
  if (name == "j_measure") return RankMeasure::j_measure;
  if (name == "mdl") return RankMeasure::mdl;
  throw Error::config("unknown rank measure: " + name);
}

/// Top-k by the chosen measure, best first (fewest bits first for mdl),
/// ties broken by (antecedent, consequent) ascending.
inline std::vector<ScoredRule> rank_rules(std::vector<ScoredRule> rules,
                                          RankMeasure measure, std::size_t k) {
  auto key = [measure](const ScoredRule& r) -> double {
    switch (measure) {
      case RankMeasure::support: return r.metrics.support_pct;
      case RankMeasure::confidence: return r.metrics.confidence;
      case RankMeasure::lift: return r.metrics.lift;
      case RankMeasure::j_measure: return r.metrics.j_measure_bits;
      case RankMeasure::mdl: return -r.metrics.mdl_bits;
    }
    return 0.0;
  };
  std::sort(rules.begin(), rules.end(),
            [&](const ScoredRule& a, const ScoredRule& b) {
              const double ka = key(a), kb = key(b);
              if (ka != kb) return ka > kb;
              return detail::rule_identity_less(a.rule, b.rule);
            });
  if (rules.size() > k) rules.resize(k);
  return rules;
}

/// All rules Z\{c} -> c over frequent itemsets Z of size >= 2 that meet
/// min_confidence and the virtual-item policy, in (antecedent,
/// consequent) order. With max_rules set, keeps the J-measure top
/// max_rules instead.
inline std::vector<ScoredRule> generate_rules(const FrequentItemsetTable& table,
                                              const BitmapIndex& index,
                                              const RuleGenParams& params) {
  if (!(params.min_confidence > 0.0) || params.min_confidence > 1.0)
    throw Error::config("min_confidence must be in (0,1]");
  std::vector<ScoredRule> rules;
  for (std::size_t size = 2; size <= table.max_size(); ++size) {
    for (const auto& entry : table.level(size)) {
      for (std::size_t drop = 0; drop < entry.items.size(); ++drop) {
        const std::string& consequent = entry.items[drop];
        if (params.virtual_antecedent_only &&
            consequent[0] == kVirtualPrefix)
          continue;
        Rule rule;
        rule.consequent = consequent;
        rule.antecedent = entry.items;
        rule.antecedent.erase(rule.antecedent.begin() +
                              static_cast<std::ptrdiff_t>(drop));
        RuleMetrics metrics = compute_metrics(rule, index, params.support_mode);
        if (static_cast<double>(metrics.joint) <
            params.min_confidence * static_cast<double>(metrics.instances))
          continue;
        rules.push_back({std::move(rule), metrics});
      }
    }
  }
  std::sort(rules.begin(), rules.end(),
            [](const ScoredRule& a, const ScoredRule& b) {
              return detail::rule_identity_less(a.rule, b.rule);
            });
  if (params.max_rules && rules.size() > *params.max_rules)
    rules = rank_rules(std::move(rules), RankMeasure::j_measure,
                       *params.max_rules);
  return rules;
}

/// One output row. Support prints to 3 decimals, confidence whole or one
/// decimal, lift one decimal; all half-up from exact counts.
inline std::string render_rule_row(const ScoredRule& scored) {
  const RuleMetrics& m = scored.metrics;
  const std::uint64_t support_numer =
      m.support_mode == SupportMode::antecedent ? m.instances : m.joint;
  std::string row = scored.rule.consequent;
  row += ';';
  row += join(scored.rule.antecedent, '|');
  row += ';';
  row += std::to_string(m.instances);
  row += ';';
  row += render_percent(support_numer, m.n_baskets, 3);
  row += ';';
  row += render_confidence_percent(m.joint, m.instances);
  row += ';';
  row += render_fixed(m.lift, 1);
  row += ';';
  row += render_fixed(m.j_measure_bits, 6);
  row += ';';
  row += render_fixed(m.mdl_bits, 6);
  return row;
}

inline void write_rules_csv(std::ostream& out,
                            const std::vector<ScoredRule>& rules) {
  out << "consequent;antecedent;instances;support_pct;confidence_pct;lift;"
         "j_bits;mdl_bits\n";
  for (const auto& rule : rules) out << render_rule_row(rule) << '\n';
}

}  // namespace mba
