// Copyright 2026 The privgraph Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// privgraph command-line tool. Every subcommand reads its inputs from the
// given paths and writes files only below --out.
//
// Exit codes: 0 success, 2 validation error, 3 numerical or divergence
// error, 1 anything else.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "privgraph.hpp"

namespace {

using json = nlohmann::json;
using namespace privgraph;

enum class Format { kTsv, kJson };

struct Globals {
  std::uint64_t seed = 1;
  std::string out;
  std::string format;

  // Format for stdout, falling back to the subcommand's own default.
  Format format_or(Format fallback) const {
    if (format == "tsv") return Format::kTsv;
    if (format == "json") return Format::kJson;
    return fallback;
  }

  std::string output_path(const std::string& name) const {
    if (out.empty()) throw ValidationError("this subcommand needs --out DIR");
    std::filesystem::create_directories(out);
    return (std::filesystem::path(out) / name).string();
  }
};

// Flat "key<TAB>value" rendering of a JSON object; arrays become
// space-separated lists and nested objects are dumped inline.
void print_tsv(const json& obj) {
  for (const auto& [key, value] : obj.items()) {
    std::cout << key << '\t';
    if (value.is_array()) {
      bool first = true;
      for (const auto& v : value) {
        if (!first) std::cout << ' ';
        std::cout << (v.is_string() ? v.get<std::string>() : v.dump());
        first = false;
      }
    } else if (value.is_string()) {
      std::cout << value.get<std::string>();
    } else {
      std::cout << value.dump();
    }
    std::cout << '\n';
  }
}

void emit(const json& obj, Format fmt) {
  if (fmt == Format::kJson) {
    std::cout << obj.dump(2) << '\n';
  } else {
    print_tsv(obj);
  }
}

json report_json(const ConvergenceReport& r) {
  return {{"spectral_radius", r.spectral_radius},
          {"l1_norm", r.l1_norm},
          {"average_degree", r.average_degree},
          {"necessary_bound", r.necessary_bound},
          {"sufficient_bound", r.sufficient_bound},
          {"heuristic_bound", r.heuristic_bound},
          {"w_hat", r.w_hat},
          {"verdict", to_string(r.verdict)}};
}

// Binary labels; with `positive` set the file is read as multiclass and
// that class becomes +1.
LabelSet load_binary_labels(const std::string& path, std::optional<int> positive,
                            std::optional<std::size_t> node_count = {}) {
  if (positive) {
    return to_binary(load_labels(path, LabelMode::kMulticlass, node_count), *positive);
  }
  return load_labels(path, LabelMode::kBinary, node_count);
}

std::vector<double> load_priors(const std::string& path, const SocialGraph& g) {
  return parse_probabilities(text::read_file(path), g.node_count());
}

void print_posteriors(const std::vector<double>& post, const json& meta, Format fmt) {
  if (fmt == Format::kJson) {
    json obj = meta;
    obj["posteriors"] = post;
    std::cout << obj.dump(2) << '\n';
    return;
  }
  std::cout << "# user posterior\n";
  std::cout << format_probabilities(post);
}

ClassifierKind parse_kind(const std::string& s) {
  if (s == "linear") return ClassifierKind::kLinearOva;
  if (s == "mlp") return ClassifierKind::kOneHiddenRelu;
  throw ValidationError("unknown classifier kind '" + s + "'");
}

std::optional<std::vector<double>> parse_grid(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return text::parse_double_list(s);
}

json noise_json(const NoiseResult& r) {
  json entries = json::array();
  for (std::size_t j = 0; j < r.noise.size(); ++j) {
    if (r.noise[j] != 0.0) entries.push_back({{"object", j}, {"delta", r.noise[j]}});
  }
  return {{"target", r.target},   {"success", r.success}, {"l0", r.l0},
          {"iterations", r.iterations}, {"fell_back", r.fell_back},
          {"noise", entries}};
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::size_t nodes = 400;
  int classes = 2;
  double intra = 0.05;
  double inter = 0.005;
  std::size_t objects_per_class = 10;
  double in_rate = 0.3;
  double out_rate = 0.1;
  double behaviorless = 0.0;
};

int run_synth(const Globals& g, const SynthArgs& a) {
  if (a.classes < 2) throw ValidationError("need at least 2 classes");
  SynthConfig cfg;
  cfg.node_count = a.nodes;
  cfg.class_proportions.assign(static_cast<std::size_t>(a.classes), 1.0 / a.classes);
  cfg.intra_prob = a.intra;
  cfg.inter_prob = a.inter;
  cfg.objects_per_class = a.objects_per_class;
  cfg.in_class_rate = a.in_rate;
  cfg.out_class_rate = a.out_rate;
  cfg.behaviorless_fraction = a.behaviorless;
  cfg.seed = g.seed;
  const SyntheticWorld w = gen_synthetic(cfg);
  save_graph(w.graph, g.output_path("graph.tsv"));
  save_behaviors(w.behaviors, g.output_path("behaviors.tsv"));
  save_labels(w.labels, g.output_path("labels.tsv"));
  emit({{"nodes", w.graph.node_count()},
        {"edges", w.graph.edge_count()},
        {"objects", w.behaviors.object_count()},
        {"classes", w.num_classes},
        {"edge_homophily", edge_homophily(w.graph, w.labels)},
        {"seed", g.seed}},
       g.format_or(Format::kJson));
  return 0;
}

struct TrainPriorArgs {
  std::string behaviors, labels, graph;
  std::optional<int> positive;
  LrOptions lr;
};

int run_train_prior(const Globals& g, const TrainPriorArgs& a) {
  const BehaviorMatrix b = load_behaviors(a.behaviors);
  std::size_t nodes = b.user_count();
  if (!a.graph.empty()) nodes = load_graph(a.graph).node_count();
  const LabelSet labels = load_binary_labels(a.labels, a.positive, nodes);
  const LrTrainResult r = train_prior(b, labels, a.lr);
  save_lr_model(r.model, g.output_path("prior_model.tsv"));
  text::write_file(g.output_path("priors.tsv"),
                   "# user prior\n" + format_probabilities(assemble_priors(r.model, b, nodes)));
  emit({{"epochs", r.epochs},
        {"converged", r.converged},
        {"gradient_norm", r.gradient_norm},
        {"final_loss", r.loss_history.empty() ? 0.0 : r.loss_history.back()},
        {"users", nodes}},
       g.format_or(Format::kJson));
  return 0;
}

struct InferArgs {
  std::string graph, priors;
  double w = 0.6;
  int max_iters = 0;
  double tol = 1e-3;
  bool check_convergence = false;
};

int run_infer_lbp(const Globals& g, const InferArgs& a) {
  const SocialGraph graph = load_graph(a.graph);
  const Pmrf mrf(graph, load_priors(a.priors, graph), a.w);
  LbpOptions opts;
  if (a.max_iters > 0) opts.max_iters = a.max_iters;
  opts.tol = a.tol;
  const LbpResult r = lbp_run(mrf, opts);
  if (!g.out.empty()) {
    text::write_file(g.output_path("posteriors.tsv"),
                     "# user posterior\n" + format_probabilities(r.posteriors));
  }
  if (!r.converged) {
    std::cerr << "warning: LBP stopped after " << r.iterations
              << " iterations without meeting tol (last change "
              << text::format_double(r.last_change) << ")\n";
  }
  print_posteriors(r.posteriors,
                   {{"engine", "lbp"}, {"w", a.w}, {"iterations", r.iterations},
                    {"converged", r.converged}, {"last_change", r.last_change}},
                   g.format_or(Format::kTsv));
  return 0;
}

int run_infer_linear(const Globals& g, const InferArgs& a) {
  const SocialGraph graph = load_graph(a.graph);
  const double w_hat = a.w - 0.5;
  if (!(w_hat > 0.0 && w_hat < 0.5)) {
    throw ValidationError("homophily strength w must lie in (0.5, 1)");
  }
  const auto priors = load_priors(a.priors, graph);
  if (a.check_convergence) {
    const ConvergenceReport rep = convergence_report(graph, w_hat);
    std::cerr << "convergence: " << to_string(rep.verdict) << " (w_hat="
              << text::format_double(w_hat) << ", necessary bound "
              << text::format_double(rep.necessary_bound) << ", sufficient bound "
              << text::format_double(rep.sufficient_bound) << ")\n";
    if (rep.verdict == ConvergenceVerdict::kDivergent) {
      throw DivergenceError(divergence_message(w_hat, rep.spectral_radius));
    }
  }
  LinearOptions opts;
  if (a.max_iters > 0) opts.max_iters = a.max_iters;
  opts.rel_tol = a.tol;
  const LinearResult r =
      linear_iterate(graph, ResidualVector::from_probabilities(priors), w_hat, opts);
  const auto post = r.posterior.to_probabilities();
  if (!g.out.empty()) {
    text::write_file(g.output_path("posteriors.tsv"),
                     "# user posterior\n" + format_probabilities(post));
  }
  print_posteriors(post,
                   {{"engine", "linear"}, {"w", a.w}, {"w_hat", w_hat},
                    {"iterations", r.iterations}, {"converged", r.converged},
                    {"last_relative_change", r.last_relative_change}},
                   g.format_or(Format::kTsv));
  return 0;
}

int run_spectral(const Globals& g, const std::string& graph_path, std::optional<double> w) {
  const SocialGraph graph = load_graph(graph_path);
  const double w_hat = w ? *w - 0.5 : 0.0;
  const json obj = report_json(convergence_report(graph, w_hat));
  if (!g.out.empty()) text::write_file(g.output_path("convergence.json"), obj.dump(2) + "\n");
  emit(obj, g.format_or(Format::kJson));
  return 0;
}

struct TrainClfArgs {
  std::string behaviors, labels, kind = "linear";
  int classes = 0;
  ClassifierOptions opts;
};

int run_train_clf(const Globals& g, TrainClfArgs a) {
  const BehaviorMatrix b = load_behaviors(a.behaviors);
  const LabelSet labels = load_labels(a.labels, LabelMode::kMulticlass, b.user_count());
  if (a.classes != 0 && a.classes != labels.num_classes()) {
    throw ValidationError("--classes " + std::to_string(a.classes) +
                          " but the label file has " +
                          std::to_string(labels.num_classes()) + " classes");
  }
  a.opts.kind = parse_kind(a.kind);
  a.opts.seed = g.seed;
  const Dataset d = make_dataset(b, labels);
  const ClassifierTrainResult r = train_classifier(d, a.opts);
  save_classifier(r.classifier, g.output_path("classifier.tsv"));
  emit({{"kind", a.kind},
        {"classes", labels.num_classes()},
        {"inputs", b.object_count()},
        {"training_accuracy", classifier_accuracy(r.classifier, d)},
        {"final_loss", r.loss_history.empty() ? 0.0 : r.loss_history.back()},
        {"rejected_epochs", r.rejected_epochs},
        {"seed", g.seed}},
       g.format_or(Format::kJson));
  return 0;
}

struct NoiseArgs {
  std::string clf, input, policy = "modify-add", grid;
  std::size_t user = 0;
  int target = 1;
  NoiseSearchConfig search;
};

int run_noise_search(const Globals& g, NoiseArgs a) {
  const Classifier clf = load_classifier(a.clf);
  const BehaviorMatrix b = load_behaviors(a.input);
  if (a.user >= b.user_count()) throw ValidationError("user id out of range");
  if (b.object_count() > clf.input_dim()) {
    throw ValidationError("behavior file has more objects than the classifier inputs");
  }
  std::vector<double> x = b.dense_row(a.user);
  x.resize(clf.input_dim(), 0.0);
  a.search.grid = parse_grid(a.grid);
  const NoisePolicy policy = parse_policy(a.policy);
  NoiseResult r = find_noise(clf, x, a.target, policy, a.search);
  json obj = {{"user", a.user}, {"policy", to_string(policy)},
              {"tau", a.search.tau}, {"maxiter", a.search.maxiter},
              {"predicted", clf.predict(x)}};
  obj["search"] = noise_json(r);
  if (a.search.grid && r.success) {
    r = quantize_noise(clf, x, r, *a.search.grid);
    obj["quantized"] = noise_json(r);
  }
  std::vector<double> noisy = x;
  for (std::size_t j = 0; j < x.size(); ++j) noisy[j] += r.noise[j];
  obj["noisy_prediction"] = clf.predict(noisy);
  if (!g.out.empty()) text::write_file(g.output_path("noise.json"), obj.dump(2) + "\n");
  emit(obj, g.format_or(Format::kJson));
  return 0;
}

struct DefendArgs {
  std::string defender, behaviors, policy = "modify-add", target = "uniform";
  std::string train_labels, grid;
  double budget = 4.0;
  NoiseSearchConfig search;
};

int run_defend(const Globals& g, DefendArgs a) {
  const Classifier clf = load_classifier(a.defender);
  const BehaviorMatrix b = load_behaviors(a.behaviors);
  if (b.object_count() > clf.input_dim()) {
    throw ValidationError("behavior file has more objects than the classifier inputs");
  }
  TargetDistribution target;
  if (a.target == "uniform") {
    target = TargetDistribution::uniform(clf.num_classes());
  } else if (a.target == "train") {
    if (a.train_labels.empty()) throw ValidationError("--target train needs --train-labels");
    target = TargetDistribution::from_training(
        load_labels(a.train_labels, LabelMode::kMulticlass, b.user_count()));
  } else {
    throw ValidationError("unknown target '" + a.target + "'");
  }
  DefenseConfig cfg;
  cfg.policy = parse_policy(a.policy);
  cfg.search = a.search;
  cfg.search.grid = parse_grid(a.grid);
  cfg.search.validate();
  cfg.beta = a.budget;

  const std::string noisy_path = g.output_path("noisy.tsv");
  const std::string provenance_path = g.output_path("provenance.json");
  std::vector<BehaviorEntry> entries;
  json users = json::array();
  double expected = 0.0, realized = 0.0;
  std::size_t changed = 0, unreachable = 0;
  for (std::size_t u = 0; u < b.user_count(); ++u) {
    std::vector<double> x = b.dense_row(u);
    x.resize(clf.input_dim(), 0.0);
    const DefenseOutcome out = defend_user(clf, x, target, cfg, g.seed, u);
    for (std::size_t j = 0; j < out.noisy.size(); ++j) {
      if (out.noisy[j] != 0.0) entries.push_back({u, j, out.noisy[j]});
    }
    json norms = json::array();
    for (double n : out.norms) {
      if (n == kUnreachableNorm) {
        norms.push_back(nullptr);
      } else {
        norms.push_back(n);
      }
    }
    const std::size_t l0 = out.noises[static_cast<std::size_t>(out.chosen - 1)].l0;
    expected += out.solution.expected_cost;
    realized += static_cast<double>(l0);
    changed += l0 > 0;
    unreachable += out.any_unreachable;
    users.push_back({{"user", u},
                     {"predicted", out.predicted},
                     {"chosen", out.chosen},
                     {"l0", l0},
                     {"norms", norms},
                     {"distribution", out.distribution},
                     {"binding", out.solution.binding},
                     {"degenerate", out.degenerate},
                     {"any_unreachable", out.any_unreachable}});
  }
  save_behaviors(BehaviorMatrix(b.user_count(), clf.input_dim(), std::move(entries)),
                 noisy_path);
  const double n = b.user_count() ? static_cast<double>(b.user_count()) : 1.0;
  const json summary = {{"users", b.user_count()},
                        {"budget", a.budget},
                        {"policy", to_string(cfg.policy)},
                        {"target", a.target},
                        {"target_distribution", target.p},
                        {"seed", g.seed},
                        {"mean_expected_l0", expected / n},
                        {"mean_l0", realized / n},
                        {"users_changed", changed},
                        {"users_with_unreachable_classes", unreachable},
                        {"noisy", noisy_path},
                        {"provenance", provenance_path}};
  json provenance = summary;
  provenance["users"] = users;
  text::write_file(provenance_path, provenance.dump(2) + "\n");
  emit(summary, g.format_or(Format::kJson));
  return 0;
}

struct GameArgs {
  std::string joint, privacy_loss, utility_loss;
  double beta = 0.0;
};

json matrix_json(const DenseMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    std::vector<double> row(m.cols);
    for (std::size_t c = 0; c < m.cols; ++c) row[c] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

int run_game_lp(const Globals& g, const GameArgs& a) {
  const JointDistribution joint = load_joint(a.joint);
  const DenseMatrix dp = a.privacy_loss.empty()
                             ? identity_indicator(joint.attribute_count())
                             : parse_dense_matrix(text::read_file(a.privacy_loss));
  const DenseMatrix dq = a.utility_loss.empty()
                             ? mismatch_indicator(joint.value_count())
                             : parse_dense_matrix(text::read_file(a.utility_loss));
  const LpDefense d = solve_game_lp(build_game_lp(joint, dp, dq, a.beta));
  const json obj = {{"beta", a.beta},
                    {"objective", d.objective},
                    {"f", matrix_json(d.mapping)},
                    {"y", d.y},
                    {"expected_utility_loss", d.expected_utility_loss},
                    {"certificates",
                     {{"budget", d.budget_violation},
                      {"stochasticity", d.stochasticity_violation},
                      {"dominance", d.dominance_violation},
                      {"nonnegativity", d.nonnegativity_violation},
                      {"complementary_slackness", d.complementary_slackness}}},
                    {"pivots", d.pivots}};
  if (!g.out.empty()) text::write_file(g.output_path("game_lp.json"), obj.dump(2) + "\n");
  emit(obj, g.format_or(Format::kJson));
  return 0;
}

struct EvaluateArgs {
  std::string clf, behaviors, posteriors, labels;
  std::optional<int> positive;
};

int run_evaluate(const Globals& g, const EvaluateArgs& a) {
  json obj;
  if (!a.clf.empty()) {
    if (a.behaviors.empty()) throw ValidationError("--clf needs --behaviors");
    const Classifier clf = load_classifier(a.clf);
    const BehaviorMatrix b = load_behaviors(a.behaviors);
    const LabelSet labels = load_labels(a.labels, LabelMode::kMulticlass, b.user_count());
    std::vector<int> pred, truth;
    for (const LabelEntry& e : labels.entries()) {
      std::vector<double> x = b.dense_row(e.user);
      if (x.size() > clf.input_dim()) throw ValidationError("behavior width exceeds classifier inputs");
      x.resize(clf.input_dim(), 0.0);
      pred.push_back(clf.predict(x));
      truth.push_back(e.label);
    }
    obj = {{"mode", "classifier"}, {"users", truth.size()},
           {"accuracy", inference_accuracy(pred, truth)}};
  } else if (!a.posteriors.empty()) {
    const std::string contents = text::read_file(a.posteriors);
    std::size_t nodes = 0;
    for (const text::Line& line : text::lines(contents)) {
      auto toks = text::split_ws(line.text);
      if (toks.empty() || toks.front().front() == '#') continue;
      if (auto u = text::parse_uint(toks[0])) nodes = std::max<std::size_t>(nodes, *u + 1);
    }
    const auto post = parse_probabilities(contents, nodes);
    const LabelSet labels = load_binary_labels(a.labels, a.positive, nodes);
    std::vector<int> pred, truth;
    std::vector<double> scores;
    bool pos = false, neg = false;
    for (const LabelEntry& e : labels.entries()) {
      pred.push_back(post[e.user] > 0.5 ? 1 : -1);
      truth.push_back(e.label);
      scores.push_back(post[e.user]);
      (e.label > 0 ? pos : neg) = true;
    }
    obj = {{"mode", "posteriors"}, {"users", truth.size()},
           {"accuracy", inference_accuracy(pred, truth)}};
    obj["auc"] = pos && neg ? json(rank_auc(scores, truth)) : json(nullptr);
  } else {
    throw ValidationError("evaluate needs --clf with --behaviors, or --posteriors");
  }
  emit(obj, g.format_or(Format::kJson));
  return 0;
}

struct SweepArgs {
  std::string seeds, betas = "0,1,2,4,8", policy = "modify-add", target = "uniform";
  std::size_t nodes = 500;
  double train_fraction = 0.5;
};

int run_sweep(const Globals& g, const SweepArgs& a) {
  SweepConfig cfg;
  cfg.world.node_count = a.nodes;
  cfg.betas = text::parse_double_list(a.betas);
  if (a.seeds.empty()) {
    cfg.seeds.clear();
    for (std::uint64_t k = 0; k < 5; ++k) cfg.seeds.push_back(g.seed + k);
  } else {
    cfg.seeds.clear();
    for (double s : text::parse_double_list(a.seeds)) {
      if (!(s >= 0.0) || s != static_cast<double>(static_cast<std::uint64_t>(s))) {
        throw ValidationError("seeds must be nonnegative integers");
      }
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  cfg.policy = parse_policy(a.policy);
  if (a.target == "uniform") {
    cfg.target = TargetKind::kUniform;
  } else if (a.target == "train") {
    cfg.target = TargetKind::kTraining;
  } else {
    throw ValidationError("unknown target '" + a.target + "'");
  }
  cfg.train_fraction = a.train_fraction;
  const auto rows = run_defense_sweep(cfg);
  const std::string csv = format_sweep_csv(rows);
  if (!g.out.empty()) text::write_file(g.output_path("sweep.csv"), csv);
  if (g.format_or(Format::kTsv) == Format::kJson) {
    json arr = json::array();
    for (const SweepRow& r : rows) {
      arr.push_back({{"seed", r.seed}, {"beta", r.beta}, {"attacker", r.attacker},
                     {"accuracy", r.accuracy}, {"expected_l0", r.expected_l0},
                     {"mean_l0", r.mean_l0}});
    }
    std::cout << arr.dump(2) << '\n';
  } else {
    std::cout << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privgraph: graph attribute inference and defense"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--format", g.format, "Stdout format")
      ->check(CLI::IsMember({"tsv", "json"}));

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic world");
  c_synth->add_option("--nodes", synth.nodes)->capture_default_str();
  c_synth->add_option("--classes", synth.classes)->capture_default_str();
  c_synth->add_option("--intra", synth.intra, "Edge probability within a class")
      ->capture_default_str();
  c_synth->add_option("--inter", synth.inter, "Edge probability across classes")
      ->capture_default_str();
  c_synth->add_option("--objects-per-class", synth.objects_per_class)->capture_default_str();
  c_synth->add_option("--in-rate", synth.in_rate)->capture_default_str();
  c_synth->add_option("--out-rate", synth.out_rate)->capture_default_str();
  c_synth->add_option("--behaviorless", synth.behaviorless)->capture_default_str();

  TrainPriorArgs prior;
  auto* c_prior = app.add_subcommand("train-prior", "Train the logistic-regression prior");
  c_prior->add_option("--behaviors", prior.behaviors)->required();
  c_prior->add_option("--labels", prior.labels)->required();
  c_prior->add_option("--graph", prior.graph, "Graph fixing the node count");
  c_prior->add_option("--positive", prior.positive,
                      "Read multiclass labels; this class becomes +1");
  c_prior->add_option("--l2", prior.lr.l2)->capture_default_str();
  c_prior->add_option("--max-epochs", prior.lr.max_epochs)->capture_default_str();
  c_prior->add_option("--tol", prior.lr.tol)->capture_default_str();

  InferArgs lbp;
  lbp.w = 0.8;
  lbp.max_iters = 100;
  auto* c_lbp = app.add_subcommand("infer-lbp", "Loopy belief propagation");
  c_lbp->add_option("--graph", lbp.graph)->required();
  c_lbp->add_option("--priors", lbp.priors)->required();
  c_lbp->add_option("--w", lbp.w, "Homophily strength in (0.5, 1)")->capture_default_str();
  c_lbp->add_option("--max-iters", lbp.max_iters)->capture_default_str();
  c_lbp->add_option("--tol", lbp.tol)->capture_default_str();

  InferArgs lin;
  auto* c_lin = app.add_subcommand("infer-linear", "Linearized propagation");
  c_lin->add_option("--graph", lin.graph)->required();
  c_lin->add_option("--priors", lin.priors)->required();
  c_lin->add_option("--w", lin.w, "Homophily strength in (0.5, 1)")->capture_default_str();
  c_lin->add_option("--max-iters", lin.max_iters);
  c_lin->add_option("--tol", lin.tol, "Relative l1 halting tolerance")->capture_default_str();
  c_lin->add_flag("--check-convergence", lin.check_convergence,
                  "Refuse before iterating when the bound is violated");

  std::string spectral_graph;
  std::optional<double> spectral_w;
  auto* c_spec = app.add_subcommand("spectral", "Spectral radius and convergence bounds");
  c_spec->add_option("--graph", spectral_graph)->required();
  c_spec->add_option("--w", spectral_w, "Homophily strength to classify");

  TrainClfArgs clf;
  auto* c_clf = app.add_subcommand("train-clf", "Train a multiclass classifier");
  c_clf->add_option("--behaviors", clf.behaviors)->required();
  c_clf->add_option("--labels", clf.labels)->required();
  c_clf->add_option("--kind", clf.kind)->check(CLI::IsMember({"linear", "mlp"}))
      ->capture_default_str();
  c_clf->add_option("--classes", clf.classes, "Expected class count");
  c_clf->add_option("--hidden", clf.opts.hidden)->capture_default_str();
  c_clf->add_option("--epochs", clf.opts.epochs)->capture_default_str();
  c_clf->add_option("--batch", clf.opts.batch_size)->capture_default_str();
  c_clf->add_option("--learning-rate", clf.opts.learning_rate)->capture_default_str();
  c_clf->add_option("--l2", clf.opts.l2)->capture_default_str();

  NoiseArgs noise;
  auto* c_noise = app.add_subcommand("panda", "Minimum evasion noise for one user");
  c_noise->add_option("--clf", noise.clf)->required();
  c_noise->add_option("--input", noise.input, "Behavior file")->required();
  c_noise->add_option("--user", noise.user)->required();
  c_noise->add_option("--target", noise.target)->required();
  c_noise->add_option("--policy", noise.policy)
      ->check(CLI::IsMember({"modify-exist", "add-new", "modify-add"}))
      ->capture_default_str();
  c_noise->add_option("--tau", noise.search.tau)->capture_default_str();
  c_noise->add_option("--maxiter", noise.search.maxiter)->capture_default_str();
  c_noise->add_option("--grid", noise.grid, "Comma-separated rating grid");

  DefendArgs defend;
  auto* c_def = app.add_subcommand("defend", "Randomized defense for every user");
  c_def->add_option("--defender", defend.defender)->required();
  c_def->add_option("--behaviors", defend.behaviors)->required();
  c_def->add_option("--policy", defend.policy)
      ->check(CLI::IsMember({"modify-exist", "add-new", "modify-add"}))
      ->capture_default_str();
  c_def->add_option("--target", defend.target)->check(CLI::IsMember({"uniform", "train"}))
      ->capture_default_str();
  c_def->add_option("--train-labels", defend.train_labels, "Labels for --target train");
  c_def->add_option("--budget", defend.budget)->capture_default_str();
  c_def->add_option("--tau", defend.search.tau)->capture_default_str();
  c_def->add_option("--maxiter", defend.search.maxiter)->capture_default_str();
  c_def->add_option("--grid", defend.grid, "Comma-separated rating grid");

  GameArgs game;
  auto* c_game = app.add_subcommand("game-lp", "Exact defense LP on a micro domain");
  c_game->add_option("--joint", game.joint)->required();
  c_game->add_option("--beta", game.beta)->required();
  c_game->add_option("--privacy-loss", game.privacy_loss, "d_p matrix (default 0-1)");
  c_game->add_option("--utility-loss", game.utility_loss, "d_q matrix (default 0-1)");

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "Accuracy (and AUC) against labels");
  c_eval->add_option("--clf", eval.clf);
  c_eval->add_option("--behaviors", eval.behaviors);
  c_eval->add_option("--posteriors", eval.posteriors);
  c_eval->add_option("--labels", eval.labels)->required();
  c_eval->add_option("--positive", eval.positive,
                     "Read multiclass labels; this class becomes +1");

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Accuracy versus budget on synthetic worlds");
  c_sweep->add_option("--seeds", sweep.seeds, "Comma-separated (default: 5 from --seed)");
  c_sweep->add_option("--betas", sweep.betas)->capture_default_str();
  c_sweep->add_option("--nodes", sweep.nodes)->capture_default_str();
  c_sweep->add_option("--policy", sweep.policy)
      ->check(CLI::IsMember({"modify-exist", "add-new", "modify-add"}))
      ->capture_default_str();
  c_sweep->add_option("--target", sweep.target)->check(CLI::IsMember({"uniform", "train"}))
      ->capture_default_str();
  c_sweep->add_option("--train-fraction", sweep.train_fraction)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*c_synth) return run_synth(g, synth);
    if (*c_prior) return run_train_prior(g, prior);
    if (*c_lbp) return run_infer_lbp(g, lbp);
    if (*c_lin) return run_infer_linear(g, lin);
    if (*c_spec) return run_spectral(g, spectral_graph, spectral_w);
    if (*c_clf) return run_train_clf(g, clf);
    if (*c_noise) return run_noise_search(g, noise);
    if (*c_def) return run_defend(g, defend);
    if (*c_game) return run_game_lp(g, game);
    if (*c_eval) return run_evaluate(g, eval);
    if (*c_sweep) return run_sweep(g, sweep);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
