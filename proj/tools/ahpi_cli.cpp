// Copyright 2026 The AHPI Ranking Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: one subcommand per pipeline stage, chained through
// file artifacts. Every artifact is written atomically and accompanied by a
// `<artifact>.manifest.json` with digests of the stage's inputs and outputs.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ahpi/ahpi.hpp"
#include "ahpi/manifest.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidArgument = 2,
  kInfeasible = 7,
  kNumerical = 8,
  kLookup = 10,
  kUndefined = 11,
};

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  if (csv.empty()) return out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ahpi::InvalidArgument("not a number: '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> parse_names(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::string to_string(const ahpi::Dataset& data) {
  std::ostringstream os;
  ahpi::write_interactions(os, data);
  return os.str();
}

std::string to_string(const ahpi::Model& model) {
  std::ostringstream os;
  ahpi::write_model(os, model);
  return os.str();
}

ahpi::Dataset load_dataset(const fs::path& path) {
  ahpi::verify_artifact(path);
  auto res = ahpi::ingest_file(path, {nullptr, true});
  return std::move(res.data);
}

ahpi::Model load_model(const fs::path& path) {
  ahpi::verify_artifact(path);
  return ahpi::read_model_file(path);
}

std::optional<ahpi::ClusterAssignment> load_mapping(const std::string& path) {
  if (path.empty()) return std::nullopt;
  ahpi::verify_artifact(path);
  std::istringstream in(ahpi::read_file(path));
  return ahpi::read_mapping(in);
}

// ---------------------------------------------------------------------------

struct FitFlags {
  ahpi::FitConfig config;
  void add(CLI::App* app) {
    app->add_option("--init-lambda", config.init_lambda, "initial exp(score)")->capture_default_str();
    app->add_option("--init-q", config.init_q, "initial valence")->capture_default_str();
    app->add_option("--init-eps", config.init_eps, "initial privilege")->capture_default_str();
    app->add_option("--rank-corr", config.rank_corr_threshold, "convergence: Kendall tau between iterations")
        ->capture_default_str();
    app->add_option("--tol", config.param_abs_tol, "convergence: max parameter change")->capture_default_str();
    app->add_option("--max-iters", config.max_iters)->capture_default_str();
  }
  ordered_json json() const {
    return {{"init_lambda", config.init_lambda}, {"init_q", config.init_q},
            {"init_eps", config.init_eps},       {"rank_corr_threshold", config.rank_corr_threshold},
            {"param_abs_tol", config.param_abs_tol}, {"max_iters", config.max_iters}};
  }
};

struct SynthFlags {
  std::size_t n = 63115;
  std::size_t k = 2064;
  std::uint64_t seed = 0;
  double activity = 0.0;
  std::string types, weights, eps, q, scores_file;

  void add(CLI::App* app) {
    app->add_option("--n", n, "number of interactions")->capture_default_str();
    app->add_option("--k", k, "number of entities")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
    app->add_option("--types", types, "comma-separated type names (default: five litigation types)");
    app->add_option("--type-weights", weights, "comma-separated type shares");
    app->add_option("--eps", eps, "comma-separated true privileges");
    app->add_option("--q", q, "comma-separated true valences");
    app->add_option("--scores-file", scores_file, "one true score per line (sampled with replacement)");
    app->add_option("--activity-exponent", activity,
                    "entity k takes part with weight (k+1)^-x; 0 = uniform pairs")
        ->capture_default_str();
  }

  ahpi::SynthConfig config() const {
    auto c = ahpi::litigation_config(n, k, seed);
    if (!types.empty()) c.type_names = parse_names(types);
    if (!weights.empty()) c.type_weights = parse_list(weights);
    if (!eps.empty()) c.true_eps = parse_list(eps);
    if (!q.empty()) c.true_q = parse_list(q);
    c.activity_exponent = activity;
    if (!scores_file.empty()) {
      std::istringstream in(ahpi::read_file(scores_file));
      double s;
      while (in >> s) c.score_pool.push_back(s);
      if (c.score_pool.empty()) throw ahpi::InvalidArgument("scores file has no numbers");
    }
    c.validate();
    return c;
  }

  ordered_json json() const {
    const auto c = config();
    return {{"n", n}, {"k", k}, {"types", c.type_names}, {"type_weights", c.type_weights},
            {"eps", c.true_eps}, {"q", c.true_q}, {"activity_exponent", activity},
            {"scores_file", scores_file}};
  }
};

// ---------------------------------------------------------------------------

struct NormalizeCmd {
  std::string input, attorneys, config_path, output;
  double threshold = 2.7;

  int run() const {
    ahpi::ParserConfig pc;
    if (!config_path.empty()) {
      std::istringstream in(ahpi::read_file(config_path));
      pc = ahpi::load_parser_config(in);
    }
    // raw string -> normalized form, with counts of the normalized forms
    std::map<std::string, std::string> normalized;
    std::vector<ahpi::NameCount> counts;
    std::size_t kept = 0, discarded = 0;
    if (!attorneys.empty()) {
      std::istringstream in(ahpi::read_file(attorneys));
      for (const auto& [id, subs] : ahpi::read_attorney_listings(in)) {
        const auto firms = ahpi::extract_case_firms(subs, pc);
        if (!firms) {
          ++discarded;
          continue;
        }
        ++kept;
        for (const auto* side : {&firms->plaintiff_firms, &firms->defendant_firms})
          for (const auto& f : *side) {
            normalized[f] = f;
            counts.push_back({f, 1});
          }
      }
    } else {
      std::istringstream in(ahpi::read_file(input));
      for (const auto& nc : ahpi::read_name_counts(in)) {
        const auto norm = ahpi::normalize_firm_name(nc.name, pc);
        if (norm.empty()) continue;
        normalized[nc.name] = norm;
        counts.push_back({norm, nc.count});
      }
    }
    const auto clusters = ahpi::agglomerate(counts, threshold);
    ahpi::ClusterAssignment mapping;
    for (const auto& [raw, norm] : normalized) mapping.canonical[raw] = clusters.canonicalize(norm);
    std::ostringstream os;
    ahpi::write_mapping(os, mapping);
    ahpi::write_file_atomic(output, os.str());

    ahpi::ManifestBuilder mf{"normalize", {{"threshold_c", threshold}, {"config", config_path}}};
    mf.inputs.push_back(attorneys.empty() ? input : attorneys);
    if (!config_path.empty()) mf.inputs.push_back(config_path);
    mf.outputs.push_back(output);
    mf.write(output);
    std::cerr << "normalize: " << normalized.size() << " names -> " << clusters.clusters.size()
              << " clusters";
    if (!attorneys.empty()) std::cerr << " (" << kept << " cases kept, " << discarded << " discarded)";
    std::cerr << '\n';
    return kOk;
  }
};

struct IngestCmd {
  std::string input, mapping_path, output;
  bool strict = false;

  int run() const {
    const auto mapping = load_mapping(mapping_path);
    ahpi::verify_artifact(input);
    const auto res = ahpi::ingest_file(input, {mapping ? &*mapping : nullptr, strict});
    for (const auto& d : res.skipped)
      std::cerr << input << ":" << d.line << ": skipped: " << d.message << '\n';
    ahpi::write_file_atomic(output, to_string(res.data));
    ahpi::ManifestBuilder mf{"ingest", {{"strict", strict}, {"mapping", mapping_path}}};
    mf.inputs.push_back(input);
    if (!mapping_path.empty()) mf.inputs.push_back(mapping_path);
    mf.outputs.push_back(output);
    mf.write(output);
    std::cerr << "ingest: " << res.data.records.size() << " interactions, "
              << res.data.entity_count() << " entities, " << res.skipped.size() << " rows skipped\n";
    return kOk;
  }
};

struct TrimCmd {
  std::string input, output;
  double q_target = 30.0;

  int run() const {
    const auto data = load_dataset(input);
    const auto trimmed = ahpi::trim_to_q(ahpi::InteractionNetwork::from_dataset(data), q_target);
    const auto sub = ahpi::compact(data, trimmed.network);
    ahpi::write_file_atomic(output, to_string(sub.data));
    ahpi::ManifestBuilder mf{"trim", {{"q_factor", q_target}}};
    mf.inputs.push_back(input);
    mf.outputs.push_back(output);
    mf.write(output);

    ordered_json j;
    j["q_achieved"] = trimmed.report.q_achieved;
    j["n"] = trimmed.report.n_interactions;
    j["k"] = trimmed.report.k_entities;
    j["removed"] = ordered_json::array();
    for (auto id : trimmed.report.removal_order) j["removed"].push_back(data.entity_labels[id.index()]);
    std::cout << j.dump() << '\n';
    return kOk;
  }
};

// Temporal train part of `data`, optionally trimmed to a Q-factor.
ahpi::Dataset training_set(const ahpi::Dataset& data, double train_fraction, double q_target) {
  ahpi::Dataset train = data;
  if (train_fraction < 1.0)
    train = ahpi::subset(data, ahpi::temporal_split(data.records, train_fraction).train);
  std::vector<char> seen(train.entity_count(), 0);
  for (const auto& r : train.records) seen[r.plaintiff.index()] = seen[r.defendant.index()] = 1;
  ahpi::InteractionNetwork net(train.entity_count(), train.records, std::move(seen));
  if (q_target > 0.0) net = ahpi::trim_to_q(net, q_target).network;
  return ahpi::compact(train, net).data;
}

struct FitCmd {
  std::string input, output;
  double train_fraction = 0.8;
  double q_target = 0.0;
  FitFlags flags;

  int run() const {
    const auto data = load_dataset(input);
    const auto train = training_set(data, train_fraction, q_target);
    const auto result = ahpi::fit(train, flags.config);
    ahpi::Model model{train.entity_labels, train.type_names, result.params};
    ahpi::write_file_atomic(output, to_string(model));

    auto cfg = flags.json();
    cfg["train_fraction"] = train_fraction;
    cfg["q_factor"] = q_target;
    ahpi::ManifestBuilder mf{"fit", cfg};
    mf.inputs.push_back(input);
    mf.outputs.push_back(output);
    mf.write(output);

    ordered_json j;
    j["iterations"] = result.trace.iterations;
    j["converged"] = result.trace.converged;
    j["symmetry_flipped"] = result.trace.symmetry_flipped;
    j["log_posterior"] = result.trace.log_posterior.back();
    j["n"] = train.records.size();
    j["k"] = train.entity_count();
    j["warnings"] = result.trace.warnings;
    std::cout << j.dump() << '\n';
    return kOk;
  }
};

std::string predictions_csv(const ahpi::Dataset& data, const ahpi::Model& model,
                            std::size_t* excluded) {
  const auto aligned = ahpi::align_to_model(data, model.entity_labels, model.type_names);
  if (excluded) *excluded = aligned.excluded;
  std::ostringstream os;
  os << "case_id,date,plaintiff_firm,defendant_firm,case_type,outcome,defendant_propensity\n";
  for (const auto& r : aligned.records)
    os << r.case_id << ',' << ahpi::format_date(r.timestamp) << ','
       << model.entity_labels[r.plaintiff.index()] << ',' << model.entity_labels[r.defendant.index()]
       << ',' << model.type_names[r.itype.index()] << ',' << (r.defendant_won() ? 'D' : 'P') << ','
       << ahpi::format_real(ahpi::predict_defendant_propensity(r, model.params)) << '\n';
  return os.str();
}

struct PredictCmd {
  std::string input, model_path, output;

  int run() const {
    const auto data = load_dataset(input);
    const auto model = load_model(model_path);
    std::size_t excluded = 0;
    ahpi::write_file_atomic(output, predictions_csv(data, model, &excluded));
    ahpi::ManifestBuilder mf{"predict"};
    mf.inputs = {input, model_path};
    mf.outputs.push_back(output);
    mf.write(output);
    std::cerr << "predict: " << excluded << " records without fitted scores excluded\n";
    return kOk;
  }
};

ahpi::Dataset test_set(const ahpi::Dataset& data, double train_fraction) {
  if (train_fraction <= 0.0) return data;
  return ahpi::subset(data, ahpi::temporal_split(data.records, train_fraction).test);
}

ordered_json accuracy_json(const ahpi::AccuracyResult& a) {
  return {{"accuracy", a.accuracy}, {"sd", a.sd}, {"n_scored", a.n_scored}, {"n_excluded", a.n_excluded}};
}

struct EvaluateCmd {
  std::string input, model_path, prefix;
  double train_fraction = 0.8;
  std::size_t bins = 6, bootstrap = 100;
  std::uint64_t seed = 0;

  int run() const {
    const auto data = load_dataset(input);
    const auto model = load_model(model_path);
    const auto test = test_set(data, train_fraction);
    const auto aligned = ahpi::align_to_model(test, model.entity_labels, model.type_names);
    if (aligned.records.empty()) throw ahpi::InvalidArgument("no test record has fitted scores");

    const auto calib = ahpi::calibration_report(aligned.records, model.params,
                                                {bins, bootstrap, ahpi::derive_seed(seed, 1)});
    for (const auto& w : calib.warnings) std::cerr << "evaluate: warning: " << w << '\n';
    const auto acc = ahpi::balanced_accuracy(aligned.records, ahpi::score_predictor(model.params),
                                             bootstrap, ahpi::derive_seed(seed, 2));
    const auto control = ahpi::random_score_control(aligned.records, model.params.entity_count(),
                                                    model.params.type_count(), bootstrap,
                                                    ahpi::derive_seed(seed, 3));

    const fs::path calib_path = prefix + ".calibration.csv";
    const fs::path acc_path = prefix + ".accuracy.csv";
    const fs::path summary_path = prefix + ".summary.json";
    ahpi::write_file_atomic(calib_path, ahpi::calibration_csv(calib));
    std::ostringstream acc_csv;
    acc_csv << "scoring,accuracy,sd,n_scored,n_excluded\n";
    for (const auto& [name, a] : {std::pair{"ahpi", acc}, std::pair{"random", control}})
      acc_csv << name << ',' << ahpi::format_real(a.accuracy) << ',' << ahpi::format_real(a.sd) << ','
              << a.n_scored << ',' << a.n_excluded << '\n';
    ahpi::write_file_atomic(acc_path, acc_csv.str());

    ordered_json j;
    j["test_records"] = test.records.size();
    j["scored"] = aligned.records.size();
    j["excluded_without_scores"] = aligned.excluded;
    j["baseline_defendant_winrate"] = calib.baseline_winrate;
    j["bins"] = calib.bins.size();
    j["balanced_accuracy"] = accuracy_json(acc);
    j["random_control"] = accuracy_json(control);
    j["warnings"] = calib.warnings;
    ahpi::write_file_atomic(summary_path, j.dump(2) + "\n");

    ahpi::ManifestBuilder mf{"evaluate",
                             {{"train_fraction", train_fraction}, {"bins", bins}, {"bootstrap", bootstrap}},
                             seed};
    mf.inputs = {input, model_path};
    mf.outputs = {calib_path, acc_path, summary_path};
    mf.write(summary_path);
    std::cout << j.dump() << '\n';
    return kOk;
  }
};

struct CompareCmd {
  std::string input, model_path, mapping_path, prefix;
  std::vector<std::string> rankings;
  double train_fraction = 0.8;
  std::size_t bootstrap = 100;
  std::uint64_t seed = 0;

  int run() const {
    const auto model = load_model(model_path);
    const auto mapping = load_mapping(mapping_path);
    std::optional<ahpi::Dataset> test;
    if (!input.empty()) test = test_set(load_dataset(input), train_fraction);
    const auto ahpi_order = ahpi::score_order(model.entity_labels, model.params.scores);

    std::ostringstream csv;
    csv << "ranking,overlap,kendall_tau,accuracy,sd,n_scored\n";
    ordered_json rows = ordered_json::array();
    std::vector<fs::path> inputs{model_path};
    auto emit = [&](const std::string& name, std::optional<std::size_t> overlap,
                    std::optional<double> tau, std::optional<ahpi::AccuracyResult> acc) {
      csv << name << ',' << (overlap ? std::to_string(*overlap) : "") << ','
          << (tau ? ahpi::format_real(*tau) : "") << ',' << (acc ? ahpi::format_real(acc->accuracy) : "")
          << ',' << (acc ? ahpi::format_real(acc->sd) : "") << ','
          << (acc ? std::to_string(acc->n_scored) : "") << '\n';
      ordered_json r{{"ranking", name}};
      r["overlap"] = overlap ? ordered_json(*overlap) : ordered_json(nullptr);
      r["kendall_tau"] = tau ? ordered_json(*tau) : ordered_json(nullptr);
      r["balanced_accuracy"] = acc ? accuracy_json(*acc) : ordered_json(nullptr);
      rows.push_back(r);
    };
    auto accuracy = [&](const ahpi::Predictor& pred, std::uint64_t stream)
        -> std::optional<ahpi::AccuracyResult> {
      if (!test) return std::nullopt;
      try {
        return ahpi::balanced_accuracy(test->records, pred, bootstrap, ahpi::derive_seed(seed, stream));
      } catch (const ahpi::InvalidArgument& e) {
        std::cerr << "compare-rankings: " << e.what() << '\n';
        return std::nullopt;
      }
    };

    if (test) {
      const auto aligned = ahpi::align_to_model(*test, model.entity_labels, model.type_names);
      std::optional<ahpi::AccuracyResult> acc;
      try {
        acc = ahpi::balanced_accuracy(aligned.records, ahpi::score_predictor(model.params), bootstrap,
                                      ahpi::derive_seed(seed, 0));
      } catch (const ahpi::InvalidArgument& e) {
        std::cerr << "compare-rankings: " << e.what() << '\n';
      }
      emit("ahpi", std::nullopt, std::nullopt, acc);
    }
    for (std::size_t i = 0; i < rankings.size(); ++i) {
      std::string spec = rankings[i], name;
      if (auto eq = spec.find('='); eq != std::string::npos) {
        name = spec.substr(0, eq);
        spec = spec.substr(eq + 1);
      } else {
        name = fs::path(spec).stem().string();
      }
      ahpi::verify_artifact(spec);
      inputs.push_back(spec);
      std::istringstream in(ahpi::read_file(spec));
      const auto ranking = ahpi::read_ranking(in, name, mapping ? &*mapping : nullptr);
      const auto order = ranking.ordered();
      std::size_t overlap = 0;
      {
        std::set<std::string> mine(model.entity_labels.begin(), model.entity_labels.end());
        for (const auto& f : order) overlap += mine.count(f);
      }
      std::optional<double> tau;
      try {
        tau = ahpi::kendall_tau(ahpi_order, order);
      } catch (const ahpi::UndefinedResult&) {
      }
      std::optional<ahpi::AccuracyResult> acc;
      if (test) acc = accuracy(ahpi::rank_predictor(ranking.ranks_for(test->entity_labels)), i + 1);
      emit(name, overlap, tau, acc);
    }

    const fs::path csv_path = prefix + ".csv";
    const fs::path json_path = prefix + ".json";
    ahpi::write_file_atomic(csv_path, csv.str());
    ahpi::write_file_atomic(json_path, rows.dump(2) + "\n");
    if (!input.empty()) inputs.push_back(input);
    if (!mapping_path.empty()) inputs.push_back(mapping_path);
    ahpi::ManifestBuilder mf{"compare-rankings",
                             {{"train_fraction", train_fraction}, {"bootstrap", bootstrap}}, seed};
    mf.inputs = inputs;
    mf.outputs = {csv_path, json_path};
    mf.write(json_path);
    std::cout << rows.dump() << '\n';
    return kOk;
  }
};

struct SynthCmd {
  SynthFlags flags;
  std::string output, truth;

  int run() const {
    const auto synth = ahpi::generate(flags.config());
    ahpi::write_file_atomic(output, to_string(synth.data));
    ahpi::Model t{synth.data.entity_labels, synth.data.type_names, synth.truth};
    ahpi::write_file_atomic(truth, to_string(t));
    ahpi::ManifestBuilder mf{"synth", flags.json(), flags.seed};
    if (!flags.scores_file.empty()) mf.inputs.push_back(flags.scores_file);
    mf.outputs = {output, truth};
    mf.write(output);
    std::cerr << "synth: " << synth.data.records.size() << " interactions among "
              << synth.data.entity_count() << " entities\n";
    return kOk;
  }
};

struct SweepCmd {
  SynthFlags flags;
  FitFlags fit;
  std::string targets = "20,30,40", output;

  int run() const {
    const auto cfg = flags.config();
    const auto q = parse_list(targets);
    const auto rows = ahpi::q_sweep(cfg, q, fit.config);
    ahpi::write_file_atomic(output, ahpi::q_sweep_csv(rows, cfg.type_names));
    auto js = flags.json();
    js["q_targets"] = q;
    js["fit"] = fit.json();
    ahpi::ManifestBuilder mf{"sweep-q", js, flags.seed};
    if (!flags.scores_file.empty()) mf.inputs.push_back(flags.scores_file);
    mf.outputs.push_back(output);
    mf.write(output);
    return kOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank entities from asymmetric, heterogeneous pairwise outcomes"};
  app.set_version_flag("--version", std::string(ahpi::kVersion));
  app.require_subcommand(1);
  app.set_config("--run-config", "", "TOML/INI file with option values");
  app.allow_config_extras(CLI::config_extras_mode::error);

  NormalizeCmd normalize;
  auto* s_norm = app.add_subcommand("normalize", "cluster raw firm names into a raw->canonical mapping");
  auto* norm_src = s_norm->add_option_group("source");
  norm_src->add_option("--input", normalize.input, "count<TAB>name file")->check(CLI::ExistingFile);
  norm_src->add_option("--attorneys", normalize.attorneys, "case_id<TAB>attorney substring file")
      ->check(CLI::ExistingFile);
  norm_src->require_option(1);
  s_norm->add_option("--threshold-c", normalize.threshold, "clustering threshold")->capture_default_str();
  s_norm->add_option("--config", normalize.config_path, "key=value parser config")->check(CLI::ExistingFile);
  s_norm->add_option("--output", normalize.output)->required();

  IngestCmd ingest;
  auto* s_ing = app.add_subcommand("ingest", "validate, expand and canonicalize an interaction file");
  s_ing->add_option("--input", ingest.input)->required()->check(CLI::ExistingFile);
  s_ing->add_option("--mapping", ingest.mapping_path, "raw<TAB>canonical file from normalize");
  s_ing->add_flag("--strict", ingest.strict, "abort on the first invalid row");
  s_ing->add_option("--output", ingest.output)->required();

  TrimCmd trim;
  auto* s_trim = app.add_subcommand("trim", "extract the dense core with Q-factor >= target");
  s_trim->add_option("--input", trim.input)->required()->check(CLI::ExistingFile);
  s_trim->add_option("--q-factor", trim.q_target)->capture_default_str();
  s_trim->add_option("--output", trim.output)->required();

  FitCmd fitc;
  auto* s_fit = app.add_subcommand("fit", "fit scores, privileges and valences on the training split");
  s_fit->add_option("--input", fitc.input)->required()->check(CLI::ExistingFile);
  s_fit->add_option("--output", fitc.output)->required();
  s_fit->add_option("--train-fraction", fitc.train_fraction, "temporal training share; 1 = all")
      ->check(CLI::Range(1e-9, 1.0))
      ->capture_default_str();
  s_fit->add_option("--q-factor", fitc.q_target, "trim the training split first (0 = no trim)")
      ->capture_default_str();
  fitc.flags.add(s_fit);

  PredictCmd predict;
  auto* s_pred = app.add_subcommand("predict", "defendant-win propensity per interaction");
  s_pred->add_option("--input", predict.input)->required()->check(CLI::ExistingFile);
  s_pred->add_option("--model", predict.model_path)->required()->check(CLI::ExistingFile);
  s_pred->add_option("--output", predict.output)->required();

  EvaluateCmd evaluate;
  auto* s_eval = app.add_subcommand("evaluate", "calibration bins and balanced accuracy on the test split");
  s_eval->add_option("--input", evaluate.input)->required()->check(CLI::ExistingFile);
  s_eval->add_option("--model", evaluate.model_path)->required()->check(CLI::ExistingFile);
  s_eval->add_option("--train-fraction", evaluate.train_fraction, "0 = evaluate on every record")
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  s_eval->add_option("--bins", evaluate.bins)->capture_default_str();
  s_eval->add_option("--bootstrap", evaluate.bootstrap)->capture_default_str();
  s_eval->add_option("--seed", evaluate.seed)->capture_default_str();
  s_eval->add_option("--output-prefix", evaluate.prefix)->required();

  CompareCmd compare;
  auto* s_cmp = app.add_subcommand("compare-rankings", "Kendall tau and balanced accuracy vs external rankings");
  s_cmp->add_option("--model", compare.model_path)->required()->check(CLI::ExistingFile);
  s_cmp->add_option("--ranking", compare.rankings, "[name=]path of a rank<TAB>firm file")->required();
  s_cmp->add_option("--input", compare.input, "interaction file for balanced accuracy on its test split");
  s_cmp->add_option("--mapping", compare.mapping_path, "raw<TAB>canonical file applied to ranking names");
  s_cmp->add_option("--train-fraction", compare.train_fraction)->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  s_cmp->add_option("--bootstrap", compare.bootstrap)->capture_default_str();
  s_cmp->add_option("--seed", compare.seed)->capture_default_str();
  s_cmp->add_option("--output-prefix", compare.prefix)->required();

  SynthCmd synth;
  auto* s_syn = app.add_subcommand("synth", "generate interactions with known ground truth");
  synth.flags.add(s_syn);
  s_syn->add_option("--output", synth.output)->required();
  s_syn->add_option("--truth", synth.truth, "ground-truth model file")->required();

  SweepCmd sweep;
  auto* s_swp = app.add_subcommand("sweep-q", "recovery accuracy across Q-factor targets");
  sweep.flags.add(s_swp);
  sweep.fit.add(s_swp);
  s_swp->add_option("--q-targets", sweep.targets, "comma-separated ascending targets")->capture_default_str();
  s_swp->add_option("--output", sweep.output)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*s_norm) return normalize.run();
    if (*s_ing) return ingest.run();
    if (*s_trim) return trim.run();
    if (*s_fit) return fitc.run();
    if (*s_pred) return predict.run();
    if (*s_eval) return evaluate.run();
    if (*s_cmp) return compare.run();
    if (*s_syn) return synth.run();
    if (*s_swp) return sweep.run();
  } catch (const ahpi::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const ahpi::InfeasibleTarget& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ahpi::NumericalFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const ahpi::LookupError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kLookup;
  } catch (const ahpi::UndefinedResult& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUndefined;
  } catch (const ahpi::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidArgument;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
