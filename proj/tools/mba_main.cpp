// mba: market-basket mining command line.
//
// Subcommands wire the library into the POS workflow: profile the data,
// mine frequent itemsets, generate and rank rules, validate on a holdout
// split, export the co-occurrence graph, and generate synthetic corpora.
// Outputs are plain CSV/DOT and byte-identical across reruns and thread
// counts.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mba/mba.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string input;
  std::string out_dir = "out";
  std::string min_support = "0.01";
  std::uint32_t max_len = 3;
  double min_confidence = 0.5;
  std::string support_mode = "antecedent";
  std::string virtual_attrs;
  double holdout = 0.3;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool oracle = false;
  std::size_t top_k = 0;  // 0 = all
  bool allow_virtual_consequents = false;
  // validate
  double delta = 0.1;
  double lift_epsilon = 0.1;
  std::uint64_t floor_instances = 5;
  std::string known_file;
  std::string annotations_file;
  // graph
  std::uint64_t min_pair_count = 2;
  std::string weight_metric = "lift";
  std::optional<double> t_weak;
  std::optional<double> t_strong;
  bool include_virtual = false;
  // synth
  std::string spec_file;
};

mba::MinSupport parse_min_support(const std::string& text) {
  try {
    if (text.find_first_of(".eE") != std::string::npos)
      return mba::MinSupport::fraction(std::stod(text));
    return mba::MinSupport::absolute(std::stoull(text));
  } catch (const mba::Error&) {
    throw;
  } catch (const std::exception&) {
    throw mba::Error::config("cannot parse min_support: " + text);
  }
}

struct LoadedCorpus {
  std::vector<mba::PosRecord> records;
  mba::ItemCatalog catalog;
  std::vector<mba::Basket> baskets;
};

LoadedCorpus load_corpus(const CommonOpts& opts) {
  if (opts.input.empty()) throw mba::Error::config("--input is required");
  std::ifstream in(opts.input, std::ios::binary);
  if (!in)
    throw mba::Error::config("cannot open input file: " + opts.input);
  LoadedCorpus corpus;
  corpus.records = mba::parse_pos_csv(in);
  corpus.catalog = mba::build_catalog(corpus.records);
  auto grouped = mba::group_into_baskets(corpus.records);
  for (const auto& diag : grouped.rejections)
    std::cerr << "warning: rejected " << diag << '\n';
  if (!grouped.rejections.empty())
    std::cerr << "warning: " << grouped.rejections.size()
              << " receipt(s) rejected\n";
  if (grouped.baskets.empty()) throw mba::Error::data("no baskets");
  const auto spec = mba::VirtualItemSpec::parse_list(opts.virtual_attrs);
  corpus.baskets = mba::apply_virtual_items(std::move(grouped.baskets), spec);
  return corpus;
}

fs::path out_path(const CommonOpts& opts, const std::string& name) {
  fs::path dir(opts.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw mba::Error::config("cannot create output directory: " +
                             opts.out_dir);
  return dir / name;
}

template <typename WriteFn>
void write_file(const CommonOpts& opts, const std::string& name,
                WriteFn&& write) {
  const fs::path path = out_path(opts, name);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw mba::Error::config("cannot open output file: " + path.string());
  write(out);
  std::cout << "wrote " << path.string() << '\n';
}

mba::MiningParams mining_params(const CommonOpts& opts) {
  mba::MiningParams params;
  params.min_support = parse_min_support(opts.min_support);
  params.max_len = opts.max_len;
  return params;
}

mba::RuleGenParams rule_params(const CommonOpts& opts) {
  mba::RuleGenParams params;
  if (!(opts.min_confidence > 0.0) || opts.min_confidence > 1.0)
    throw mba::Error::config("min_confidence must be in (0,1]");
  params.min_confidence = opts.min_confidence;
  params.support_mode = mba::parse_support_mode(opts.support_mode);
  params.virtual_antecedent_only = !opts.allow_virtual_consequents;
  return params;
}

void cmd_profile(const CommonOpts& opts) {
  auto corpus = load_corpus(opts);
  write_file(opts, "frequency.csv", [&](std::ostream& out) {
    mba::write_frequency_csv(out, mba::frequency_table(corpus.baskets));
  });
  const std::pair<mba::ProfileAttribute, const char*> profiles[] = {
      {mba::ProfileAttribute::gender, "profile_gender.csv"},
      {mba::ProfileAttribute::day_of_week, "profile_day_of_week.csv"},
      {mba::ProfileAttribute::age_band, "profile_age_band.csv"},
      {mba::ProfileAttribute::category, "profile_category.csv"},
  };
  for (const auto& [attribute, file] : profiles) {
    write_file(opts, file, [&](std::ostream& out) {
      mba::write_profile_csv(
          out, mba::categorical_profile(corpus.baskets, attribute,
                                        &corpus.catalog));
    });
  }
}

void cmd_mine(const CommonOpts& opts) {
  auto corpus = load_corpus(opts);
  const auto params = mining_params(opts);
  const auto index = mba::build_index(corpus.baskets);
  const auto table = mba::apriori(index, params, opts.threads);
  if (opts.oracle) {
    const auto expected = mba::brute_force_frequent(corpus.baskets, params);
    if (!(table == expected))
      throw mba::Error::data("oracle mismatch: apriori disagrees with the "
                             "brute-force scan");
    std::cerr << "oracle check passed (" << table.total() << " itemsets)\n";
  }
  write_file(opts, "itemsets.csv",
             [&](std::ostream& out) { table.write_csv(out); });
}

void cmd_rules(const CommonOpts& opts) {
  auto corpus = load_corpus(opts);
  const auto index = mba::build_index(corpus.baskets);
  const auto table = mba::apriori(index, mining_params(opts), opts.threads);
  const auto rules = mba::generate_rules(table, index, rule_params(opts));
  const std::size_t k = opts.top_k == 0 ? rules.size() : opts.top_k;
  const std::pair<mba::RankMeasure, const char*> outputs[] = {
      {mba::RankMeasure::support, "rules_support.csv"},
      {mba::RankMeasure::confidence, "rules_confidence.csv"},
      {mba::RankMeasure::lift, "rules_lift.csv"},
      {mba::RankMeasure::j_measure, "rules_j_measure.csv"},
      {mba::RankMeasure::mdl, "rules_mdl.csv"},
  };
  for (const auto& [measure, file] : outputs) {
    write_file(opts, file, [&](std::ostream& out) {
      mba::write_rules_csv(out, mba::rank_rules(rules, measure, k));
    });
  }
}

void cmd_validate(const CommonOpts& opts) {
  auto corpus = load_corpus(opts);
  const mba::SplitSpec split_spec{opts.holdout, opts.seed};
  auto [train, holdout] = mba::split_baskets(corpus.baskets, split_spec);
  const auto index = mba::build_index(train);
  const auto table = mba::apriori(index, mining_params(opts), opts.threads);
  const auto rules = mba::generate_rules(table, index, rule_params(opts));
  const auto report = mba::validate_rules(rules, holdout, opts.delta);
  write_file(opts, "validation.csv", [&](std::ostream& out) {
    mba::write_validation_csv(out, report);
  });

  std::vector<mba::RulePattern> known;
  if (!opts.known_file.empty()) {
    std::ifstream in(opts.known_file, std::ios::binary);
    if (!in)
      throw mba::Error::config("cannot open known-associations file: " +
                               opts.known_file);
    known = mba::parse_pattern_file(in);
  }
  std::vector<mba::Annotation> annotations;
  if (!opts.annotations_file.empty()) {
    std::ifstream in(opts.annotations_file, std::ios::binary);
    if (!in)
      throw mba::Error::config("cannot open annotations file: " +
                               opts.annotations_file);
    annotations = mba::parse_annotation_file(in);
  }
  const mba::TriageThresholds thresholds{opts.lift_epsilon,
                                         opts.floor_instances};
  const auto triaged = mba::triage(rules, known, thresholds, annotations);
  write_file(opts, "triage.csv", [&](std::ostream& out) {
    mba::write_triage_csv(out, triaged);
  });
  std::cout << "stable " << report.n_stable << ", unstable "
            << report.n_unstable << ", unsupported " << report.n_unsupported
            << '\n';
}

void cmd_graph(const CommonOpts& opts) {
  auto corpus = load_corpus(opts);
  const auto index = mba::build_index(corpus.baskets);
  const auto metric = mba::parse_weight_metric(opts.weight_metric);
  auto graph = mba::build_multiweb(index, opts.min_pair_count, metric,
                                   &corpus.catalog, opts.include_virtual);
  if (opts.t_weak.has_value() != opts.t_strong.has_value())
    throw mba::Error::config("--t-weak and --t-strong must be given together");
  graph = opts.t_weak ? mba::classify_edges(std::move(graph), *opts.t_weak,
                                            *opts.t_strong)
                      : mba::classify_edges(std::move(graph));
  write_file(opts, "multiweb.dot",
             [&](std::ostream& out) { out << mba::export_dot(graph); });
  write_file(opts, "edges.csv",
             [&](std::ostream& out) { mba::write_edges_csv(out, graph); });
}

void cmd_synth(const CommonOpts& opts, bool seed_given) {
  if (opts.spec_file.empty())
    throw mba::Error::config("--spec is required for synth");
  std::ifstream in(opts.spec_file, std::ios::binary);
  if (!in)
    throw mba::Error::config("cannot open synth spec: " + opts.spec_file);
  mba::SynthSpec spec = mba::load_synth_spec(in);
  if (seed_given) spec.seed = opts.seed;
  const auto result = mba::generate(spec);
  write_file(opts, "corpus.csv", [&](std::ostream& out) {
    mba::write_corpus_csv(out, result.records);
  });
  write_file(opts, "ground_truth.csv", [&](std::ostream& out) {
    mba::write_ground_truth_csv(out, result.truth);
  });
}

void add_common_options(CLI::App* cmd, CommonOpts& opts, bool needs_input) {
  cmd->fallthrough();  // lets --config reach the parent app
  auto* input = cmd->add_option("--input", opts.input, "input POS CSV file");
  if (needs_input) input->required();
  cmd->add_option("--out-dir", opts.out_dir, "output directory")
      ->capture_default_str();
  cmd->add_option("--threads", opts.threads, "worker thread cap")
      ->capture_default_str();
}

void add_mining_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--min-support", opts.min_support,
                  "absolute count (e.g. 25) or fraction (e.g. 0.01)")
      ->capture_default_str();
  cmd->add_option("--max-len", opts.max_len, "maximum itemset size")
      ->capture_default_str();
  cmd->add_option("--virtual", opts.virtual_attrs,
                  "virtual item attributes: gender,dow,age");
}

void add_rule_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--min-confidence", opts.min_confidence,
                  "minimum rule confidence in (0,1]")
      ->capture_default_str();
  cmd->add_option("--support-mode", opts.support_mode,
                  "rule support basis: antecedent or joint")
      ->capture_default_str();
  cmd->add_option("--top-k", opts.top_k, "rules per ranking file (0 = all)")
      ->capture_default_str();
  cmd->add_flag("--allow-virtual-consequents", opts.allow_virtual_consequents,
                "permit '@' virtual items as rule consequents");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"market-basket mining toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value config file; flags override");

  CommonOpts opts;

  auto* profile = app.add_subcommand(
      "profile", "frequency table and categorical profiles");
  add_common_options(profile, opts, true);
  profile->add_option("--virtual", opts.virtual_attrs,
                      "virtual item attributes: gender,dow,age");

  auto* mine = app.add_subcommand("mine", "mine frequent itemsets");
  add_common_options(mine, opts, true);
  add_mining_options(mine, opts);
  mine->add_flag("--oracle", opts.oracle,
                 "verify against the brute-force scan (small corpora)");

  auto* rules = app.add_subcommand("rules", "generate and rank rules");
  add_common_options(rules, opts, true);
  add_mining_options(rules, opts);
  add_rule_options(rules, opts);

  auto* validate =
      app.add_subcommand("validate", "holdout validation and triage");
  add_common_options(validate, opts, true);
  add_mining_options(validate, opts);
  add_rule_options(validate, opts);
  validate->add_option("--holdout", opts.holdout, "holdout fraction in (0,1)")
      ->capture_default_str();
  validate->add_option("--seed", opts.seed, "split seed")
      ->capture_default_str();
  validate->add_option("--delta", opts.delta, "max stable confidence drop")
      ->capture_default_str();
  validate->add_option("--known", opts.known_file,
                       "known-associations pattern file");
  validate->add_option("--annotations", opts.annotations_file,
                       "triage override file");
  validate
      ->add_option("--epsilon-lift", opts.lift_epsilon,
                   "lift band around 1 labeled trivial")
      ->capture_default_str();
  validate
      ->add_option("--floor-instances", opts.floor_instances,
                   "below this instance count rules are inexplicable")
      ->capture_default_str();

  auto* graph = app.add_subcommand("graph", "co-occurrence graph export");
  add_common_options(graph, opts, true);
  graph->add_option("--virtual", opts.virtual_attrs,
                    "virtual item attributes: gender,dow,age");
  graph
      ->add_option("--min-pair-count", opts.min_pair_count,
                   "minimum pair count for an edge")
      ->capture_default_str();
  graph
      ->add_option("--weight-metric", opts.weight_metric,
                   "edge weight: count, support, or lift")
      ->capture_default_str();
  graph->add_option("--t-weak", opts.t_weak,
                    "weights below this are weak (default: 33rd percentile)");
  graph->add_option("--t-strong", opts.t_strong,
                    "weights at or above this are strong (default: 67th "
                    "percentile)");
  graph->add_flag("--include-virtual", opts.include_virtual,
                  "keep '@' virtual items in the graph");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common_options(synth, opts, false);
  synth->add_option("--spec", opts.spec_file, "synth spec JSON")->required();
  auto* synth_seed =
      synth->add_option("--seed", opts.seed, "override the spec's seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (profile->parsed()) cmd_profile(opts);
    if (mine->parsed()) cmd_mine(opts);
    if (rules->parsed()) cmd_rules(opts);
    if (validate->parsed()) cmd_validate(opts);
    if (graph->parsed()) cmd_graph(opts);
    if (synth->parsed()) cmd_synth(opts, synth_seed->count() > 0);
  } catch (const mba::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == mba::Error::Kind::config ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
