#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "mba/synth.hpp"

using namespace mba;

namespace {

SynthSpec small_spec() {
  SynthSpec spec;
  spec.n_baskets = 200;
  spec.n_items = 6;
  spec.base_probability.assign(6, 0.3);
  spec.seed = 5;
  return spec;
}

}  // namespace

TEST_CASE("generation is reproducible per seed") {
  auto a = generate(small_spec());
  auto b = generate(small_spec());
  std::ostringstream csv_a, csv_b;
  write_corpus_csv(csv_a, a.records);
  write_corpus_csv(csv_b, b.records);
  CHECK(csv_a.str() == csv_b.str());

  auto different = small_spec();
  different.seed = 6;
  std::ostringstream csv_c;
  write_corpus_csv(csv_c, generate(different).records);
  CHECK(csv_a.str() != csv_c.str());
}

TEST_CASE("corpus round-trips through the ingestion parser") {
  auto spec = small_spec();
  auto result = generate(spec);
  std::ostringstream csv;
  write_corpus_csv(csv, result.records);
  std::istringstream in(csv.str());
  auto records = parse_pos_csv(in);
  CHECK(records.size() == result.records.size());
  auto grouped = group_into_baskets(records);
  CHECK(grouped.rejections.empty());
  CHECK(grouped.baskets.size() == spec.n_baskets);
  for (const auto& basket : grouped.baskets) {
    CHECK_FALSE(basket.items.empty());
    CHECK(basket.gender != Gender::unknown);
    CHECK(basket.age_band.has_value());
  }
}

TEST_CASE("demographics respect the configured mix") {
  auto spec = small_spec();
  spec.n_baskets = 2000;
  spec.demographics.p_female = 1.0;
  spec.demographics.age_min = 30;
  spec.demographics.age_max = 39;
  spec.demographics.date_start = *Timestamp::parse("2024-01-01T00:00");
  spec.demographics.date_end = *Timestamp::parse("2024-01-31T00:00");
  auto result = generate(spec);
  for (const auto& rec : result.records) {
    CHECK(rec.gender == Gender::female);
    CHECK(*rec.age >= 30);
    CHECK(*rec.age <= 39);
    CHECK(rec.timestamp.year == 2024);
    CHECK(rec.timestamp.month == 1);
  }
}

TEST_CASE("impossible specs are rejected") {
  SynthSpec spec;
  spec.n_baskets = 10;
  spec.n_items = 3;
  spec.base_probability.assign(3, 0.0);
  CHECK_THROWS_AS(generate(spec), Error);  // nothing can ever be drawn

  spec.base_probability.assign(3, 0.3);
  spec.planted.push_back({{0}, 0, 0.7, 0.1});  // consequent in antecedent
  CHECK_THROWS_AS(generate(spec), Error);

  spec.planted.back() = {{0}, 1, 0.2, 0.1};  // confidence below base prob
  CHECK_THROWS_AS(generate(spec), Error);

  spec.planted.back() = {{0}, 7, 0.7, 0.1};  // item out of range
  CHECK_THROWS_AS(generate(spec), Error);

  spec.planted.clear();
  spec.base_probability = {0.3, 0.3};  // wrong length
  CHECK_THROWS_AS(generate(spec), Error);
}

TEST_CASE("tiny base probabilities still yield nonempty baskets") {
  SynthSpec spec;
  spec.n_baskets = 50;
  spec.n_items = 3;
  spec.base_probability.assign(3, 0.001);
  spec.seed = 9;
  auto result = generate(spec);
  auto grouped = group_into_baskets(result.records);
  CHECK(grouped.baskets.size() == 50);
  for (const auto& basket : grouped.baskets) CHECK_FALSE(basket.items.empty());
}

TEST_CASE("planted rules hit their target confidence") {
  // base density keeps the empty-attempt rate (0.98 * 0.7^10 ~ 2.8%)
  // negligible, so antecedent draws stay calibrated near N*p = 200
  SynthSpec spec;
  spec.n_baskets = 10000;
  spec.n_items = 12;
  spec.base_probability.assign(12, 0.3);
  spec.base_probability[10] = 0.0;
  spec.base_probability[11] = 0.0;
  spec.planted.push_back({{10}, 11, 0.7, 0.02});
  spec.seed = 12;
  auto result = generate(spec);
  auto baskets = group_into_baskets(result.records).baskets;
  REQUIRE(baskets.size() == spec.n_baskets);

  std::uint64_t instances = 0, joint = 0;
  for (const auto& basket : baskets) {
    if (!basket.items.count("I010")) continue;
    ++instances;
    joint += basket.items.count("I011");
  }
  // ~200 antecedent draws; 3 sigma of a Bernoulli(0.7) mean is below 0.1
  CHECK(instances > 140);
  CHECK(instances < 260);
  const double confidence = double(joint) / double(instances);
  CHECK(std::fabs(confidence - 0.7) < 0.1);

  REQUIRE(result.truth.rules.size() == 1);
  CHECK(result.truth.rules[0].antecedent == Itemset{"I010"});
  CHECK(result.truth.rules[0].consequent == "I011");
  CHECK(result.truth.rules[0].target_confidence == 0.7);
  CHECK(result.truth.rules[0].expected_instances == 200.0);
}

TEST_CASE("independent pairs keep lift near one") {
  // expected pair lift under the nonempty conditioning is
  // P(nonempty) = 1 - 0.7^10 ~ 0.972; sigma(lift) ~ 1/sqrt(E[joint])
  // ~ 0.035, so three sigma stays within [0.85, 1.10] for all 45 pairs
  SynthSpec spec;
  spec.n_baskets = 10000;
  spec.n_items = 10;
  spec.base_probability.assign(10, 0.3);
  spec.seed = 2;
  auto result = generate(spec);
  auto baskets = group_into_baskets(result.records).baskets;
  auto index = build_index(baskets);
  const auto& items = index.item_order();
  const double n = double(index.n_baskets());
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      const double joint = double(support_count(index, {items[i], items[j]}));
      const double lift =
          joint * n / (double(support_count(index, {items[i]})) *
                       double(support_count(index, {items[j]})));
      CHECK(lift > 0.85);
      CHECK(lift < 1.10);
    }
  }
}

TEST_CASE("ground truth CSV format") {
  SynthSpec spec;
  spec.n_baskets = 10;
  spec.n_items = 4;
  spec.base_probability.assign(4, 0.5);
  spec.planted.push_back({{0, 1}, 2, 0.7, 0.02});
  auto result = generate(spec);
  std::ostringstream out;
  write_ground_truth_csv(out, result.truth);
  CHECK(out.str() ==
        "antecedent;consequent;target_confidence;antecedent_prob\n"
        "I000|I001;I002;0.7;0.02\n");
}

TEST_CASE("synth specs load from JSON") {
  std::istringstream in(R"({
    "n_baskets": 100,
    "n_items": 5,
    "seed": 7,
    "base_probability": 0.1,
    "planted_rules": [
      {"antecedent": [3], "consequent": 4, "confidence": 0.8,
       "antecedent_probability": 0.05}
    ],
    "demographics": {
      "p_female": 0.8,
      "age_min": 25,
      "age_max": 45,
      "date_start": "2024-01-01",
      "date_end": "2024-01-15"
    }
  })");
  auto spec = load_synth_spec(in);
  CHECK(spec.n_baskets == 100);
  CHECK(spec.n_items == 5);
  CHECK(spec.seed == 7);
  CHECK(spec.base_probability == std::vector<double>(5, 0.1));
  REQUIRE(spec.planted.size() == 1);
  CHECK(spec.planted[0].consequent == 4);
  CHECK(spec.demographics.p_female == 0.8);
  CHECK(spec.demographics.date_end.day == 15);

  std::istringstream bad("{not json");
  CHECK_THROWS_AS(load_synth_spec(bad), Error);
  std::istringstream missing(R"({"n_items": 5})");
  CHECK_THROWS_AS(load_synth_spec(missing), Error);
  std::istringstream wrong_len(
      R"({"n_baskets": 10, "n_items": 3, "base_probability": [0.1, 0.2]})");
  CHECK_THROWS_AS(load_synth_spec(wrong_len), Error);
}

TEST_CASE("item codes are zero-padded and stable") {
  SynthSpec spec;
  spec.n_items = 1200;
  CHECK(spec.item_code(0) == "I0000");
  CHECK(spec.item_code(1199) == "I1199");
  spec.n_items = 12;
  CHECK(spec.item_code(7) == "I007");
}
