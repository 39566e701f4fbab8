#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mba/dataset.hpp"
#include "mba/errors.hpp"
#include "mba/format.hpp"
#include "mba/mining.hpp"
#include "mba/rng.hpp"

namespace mba {

// Synthetic corpus generator with planted rules and known ground truth.
// Randomness is a single xoshiro256** stream (see rng.hpp), so a seed
// fully determines the corpus on every platform. Draw order per basket:
//   1. gender (u < p_female), 2. age, 3. timestamp minute,
//   4. per planted rule: force-antecedent draw, then consequent draw,
//   5. per item index: base-probability draw,
//   6. if no item landed, redraw steps 4-5 (demographics stay).
//
// The redraw conditions each basket on being nonempty, so planted
// probabilities and pairwise independence hold up to a factor of
// P(nonempty). Keep the per-attempt empty rate small (more items or
// higher base probabilities) when calibrated counts matter.

struct PlantedRule {
  std::vector<std::uint32_t> antecedent;  // item indices
  std::uint32_t consequent = 0;
  double confidence = 0.7;
  double antecedent_probability = 0.02;
};

struct Demographics {
  double p_female = 0.5;
  int age_min = 20;
  int age_max = 69;
  Timestamp date_start{2024, 1, 1, 0, 0};
  Timestamp date_end{2024, 1, 31, 0, 0};
};

struct SynthSpec {
  std::uint64_t n_baskets = 0;
  std::uint32_t n_items = 0;
  std::vector<double> base_probability;  // one entry per item
  std::vector<PlantedRule> planted;
  Demographics demographics;
  std::uint64_t seed = 0;

  std::string item_code(std::uint32_t index) const {
    std::string digits = std::to_string(index);
    std::size_t width = std::to_string(n_items > 0 ? n_items - 1 : 0).size();
    if (width < 3) width = 3;
    if (digits.size() < width)
      digits.insert(0, width - digits.size(), '0');
    return "I" + digits;
  }

  void validate() const {
    if (n_baskets < 1) throw Error::config("synth: n_baskets must be >= 1");
    if (n_items < 1) throw Error::config("synth: n_items must be >= 1");
    if (base_probability.size() != n_items)
      throw Error::config("synth: base_probability size must equal n_items");
    for (double p : base_probability)
      if (!(p >= 0.0) || p > 1.0)
        throw Error::config("synth: base probabilities must lie in [0,1]");
    bool feasible = false;
    for (double p : base_probability) feasible = feasible || p > 0.0;
    for (const auto& rule : planted) {
      if (rule.antecedent.empty())
        throw Error::config("synth: planted antecedent is empty");
      for (std::uint32_t item : rule.antecedent)
        if (item >= n_items)
          throw Error::config("synth: planted antecedent item out of range");
      if (rule.consequent >= n_items)
        throw Error::config("synth: planted consequent out of range");
      for (std::uint32_t item : rule.antecedent)
        if (item == rule.consequent)
          throw Error::config("synth: consequent inside its own antecedent");
      if (!(rule.confidence >= 0.0) || rule.confidence > 1.0 ||
          !(rule.antecedent_probability >= 0.0) ||
          rule.antecedent_probability > 1.0)
        throw Error::config("synth: planted probabilities must lie in [0,1]");
      if (!(rule.confidence > base_probability[rule.consequent]))
        throw Error::config(
            "synth: target confidence must exceed the consequent's base "
            "probability");
      feasible = feasible || rule.antecedent_probability > 0.0;
    }
    if (!feasible)
      throw Error::config(
          "synth: no item can ever be drawn; baskets would be empty");
    const auto& d = demographics;
    if (!(d.p_female >= 0.0) || d.p_female > 1.0)
      throw Error::config("synth: p_female must lie in [0,1]");
    if (d.age_min < 0 || d.age_max > 130 || d.age_min > d.age_max)
      throw Error::config("synth: age range must satisfy 0 <= min <= max <= 130");
    if (!d.date_start.valid() || !d.date_end.valid() ||
        d.date_end < d.date_start)
      throw Error::config("synth: invalid date range");
  }
};

struct PlantedTruth {
  Itemset antecedent;  // item codes
  std::string consequent;
  double target_confidence = 0.0;
  double antecedent_probability = 0.0;
  double expected_instances = 0.0;  // n_baskets * antecedent_probability
};

struct GroundTruth {
  std::vector<PlantedTruth> rules;
};

struct SynthResult {
  std::vector<PosRecord> records;
  GroundTruth truth;
};

namespace detail {

inline std::chrono::sys_days to_sys_days(const Timestamp& ts) {
  namespace chr = std::chrono;
  return chr::sys_days{
      chr::year_month_day{chr::year{ts.year}, chr::month{ts.month},
                          chr::day{ts.day}}};
}

inline Timestamp minute_offset_to_timestamp(const Timestamp& start,
                                            std::uint64_t minutes) {
  namespace chr = std::chrono;
  chr::sys_days day = to_sys_days(start) + chr::days{minutes / 1440};
  chr::year_month_day ymd{day};
  const unsigned minute_of_day = static_cast<unsigned>(minutes % 1440);
  return Timestamp{int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()),
                   minute_of_day / 60, minute_of_day % 60};
}

}  // namespace detail

/// Generates the corpus as ingestion records plus the planted ground
/// truth. Identical spec (including seed) yields identical output.
inline SynthResult generate(const SynthSpec& spec) {
  spec.validate();
  Xoshiro256StarStar rng(spec.seed);
  const std::uint64_t total_minutes =
      static_cast<std::uint64_t>(
          (detail::to_sys_days(spec.demographics.date_end) -
           detail::to_sys_days(spec.demographics.date_start))
              .count() +
          1) *
      1440;
  const std::uint64_t age_span = static_cast<std::uint64_t>(
      spec.demographics.age_max - spec.demographics.age_min + 1);

  std::size_t receipt_width = std::to_string(spec.n_baskets).size();
  if (receipt_width < 6) receipt_width = 6;

  SynthResult result;
  for (std::uint64_t i = 0; i < spec.n_baskets; ++i) {
    const Gender gender = rng.u01() < spec.demographics.p_female
                              ? Gender::female
                              : Gender::male;
    const int age =
        spec.demographics.age_min + static_cast<int>(rng.bounded(age_span));
    const Timestamp ts = detail::minute_offset_to_timestamp(
        spec.demographics.date_start, rng.bounded(total_minutes));

    std::vector<bool> present(spec.n_items, false);
    bool any = false;
    for (int attempt = 0; !any; ++attempt) {
      if (attempt >= 100000)
        throw Error::data("synth: could not draw a nonempty basket");
      std::fill(present.begin(), present.end(), false);
      for (const auto& rule : spec.planted) {
        if (rng.u01() < rule.antecedent_probability) {
          for (std::uint32_t item : rule.antecedent) present[item] = true;
          if (rng.u01() < rule.confidence) present[rule.consequent] = true;
        }
      }
      for (std::uint32_t item = 0; item < spec.n_items; ++item)
        if (rng.u01() < spec.base_probability[item]) present[item] = true;
      for (std::uint32_t item = 0; item < spec.n_items && !any; ++item)
        any = present[item];
    }

    std::string receipt = std::to_string(i + 1);
    receipt.insert(0, receipt_width - receipt.size(), '0');
    receipt.insert(0, 1, 'R');
    for (std::uint32_t item = 0; item < spec.n_items; ++item) {
      if (!present[item]) continue;
      PosRecord rec;
      rec.receipt_id = receipt;
      rec.timestamp = ts;
      rec.gender = gender;
      rec.age = age;
      rec.item_code = spec.item_code(item);
      rec.item_name = rec.item_code;
      rec.quantity = 1;
      rec.unit_price = 100.0;
      result.records.push_back(std::move(rec));
    }
  }

  for (const auto& rule : spec.planted) {
    PlantedTruth truth;
    for (std::uint32_t item : rule.antecedent)
      truth.antecedent.push_back(spec.item_code(item));
    std::sort(truth.antecedent.begin(), truth.antecedent.end());
    truth.consequent = spec.item_code(rule.consequent);
    truth.target_confidence = rule.confidence;
    truth.antecedent_probability = rule.antecedent_probability;
    truth.expected_instances =
        static_cast<double>(spec.n_baskets) * rule.antecedent_probability;
    result.truth.rules.push_back(std::move(truth));
  }
  return result;
}

inline void write_corpus_csv(std::ostream& out,
                             const std::vector<PosRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& rec : records) {
    out << rec.receipt_id << ',' << rec.timestamp.to_string() << ','
        << to_string(rec.gender) << ','
        << (rec.age ? std::to_string(*rec.age) : std::string()) << ','
        << rec.item_code << ',' << rec.item_name << ','
        << (rec.category ? *rec.category : std::string()) << ','
        << rec.quantity << ',' << render_trimmed(rec.unit_price) << '\n';
  }
}

inline void write_ground_truth_csv(std::ostream& out,
                                   const GroundTruth& truth) {
  out << "antecedent;consequent;target_confidence;antecedent_prob\n";
  for (const auto& rule : truth.rules)
    out << join(rule.antecedent, '|') << ';' << rule.consequent << ';'
        << render_trimmed(rule.target_confidence) << ';'
        << render_trimmed(rule.antecedent_probability) << '\n';
}

/// Loads a SynthSpec from JSON. base_probability may be a single number
/// (broadcast to every item) or an array with one entry per item.
inline SynthSpec load_synth_spec(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error::data(std::string("synth spec: invalid JSON: ") + e.what());
  }
  try {
    SynthSpec spec;
    spec.n_baskets = doc.at("n_baskets").get<std::uint64_t>();
    spec.n_items = doc.at("n_items").get<std::uint32_t>();
    if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
    const auto& base = doc.at("base_probability");
    if (base.is_number()) {
      spec.base_probability.assign(spec.n_items, base.get<double>());
    } else {
      spec.base_probability = base.get<std::vector<double>>();
    }
    if (doc.contains("planted_rules")) {
      for (const auto& entry : doc["planted_rules"]) {
        PlantedRule rule;
        rule.antecedent =
            entry.at("antecedent").get<std::vector<std::uint32_t>>();
        rule.consequent = entry.at("consequent").get<std::uint32_t>();
        rule.confidence = entry.at("confidence").get<double>();
        rule.antecedent_probability =
            entry.at("antecedent_probability").get<double>();
        spec.planted.push_back(std::move(rule));
      }
    }
    if (doc.contains("demographics")) {
      const auto& demo = doc["demographics"];
      if (demo.contains("p_female"))
        spec.demographics.p_female = demo["p_female"].get<double>();
      if (demo.contains("age_min"))
        spec.demographics.age_min = demo["age_min"].get<int>();
      if (demo.contains("age_max"))
        spec.demographics.age_max = demo["age_max"].get<int>();
      auto parse_date = [](const std::string& text) {
        auto ts = Timestamp::parse(text + "T00:00");
        if (!ts) throw Error::data("synth spec: invalid date: " + text);
        return *ts;
      };
      if (demo.contains("date_start"))
        spec.demographics.date_start =
            parse_date(demo["date_start"].get<std::string>());
      if (demo.contains("date_end"))
        spec.demographics.date_end =
            parse_date(demo["date_end"].get<std::string>());
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error::data(std::string("synth spec: ") + e.what());
  }
}

}  // namespace mba
