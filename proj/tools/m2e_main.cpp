// m2e: generate synthetic datasets, fit embeddings, cluster and evaluate.
//
//   m2e generate   --preset hiv --seed 3 --out data/
//   m2e fit        --data data/ --rank 7 --lambda 1=0.01 --lambda 2=100 --out run/
//   m2e evaluate   --embedding run/embedding.txt --data data/ --out run/
//   m2e cluster    --embedding run/embedding.txt --k 2 --out run/
//   m2e gridsearch --data data/ --config grid.json --out grid/
//   m2e cp         --data data/ --view 1 --rank 3 --out cp/
//
// Settings come from --config (JSON) and are then overridden by flags. On
// failure an error document is printed to stderr (and written to
// <out>/error.json when an output directory is known) and the exit status
// is 1.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "m2e/datagen.hpp"
#include "m2e/experiment.hpp"
#include "m2e/io.hpp"
#include "m2e/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::string data;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> eval_seed;
  std::string method;
  std::optional<m2e::Index> rank;
  std::vector<std::string> lambdas;
  std::optional<int> restarts;
  std::optional<int> max_iters;
  std::optional<int> kmeans_iters;
  std::optional<double> tol;
  std::optional<double> residual_tol;
  std::optional<double> mu;
  std::optional<double> mu_growth;
  std::optional<double> mu_max;
  std::optional<int> inner_steps;
  std::optional<int> k;
  std::optional<int> repetitions;
  std::optional<int> positive_class;
  std::vector<double> lambda_grid;
  std::vector<m2e::Index> rank_grid;
  bool allow_large = false;
  std::optional<std::size_t> view;
  std::string embedding;
  std::string labels;

  // generate
  std::string preset = "default";
  std::optional<int> views;
  std::optional<m2e::Index> nodes;
  std::vector<m2e::Index> cluster_sizes;
  std::optional<m2e::Index> latent_rank;
  std::optional<double> separation;
  std::optional<double> jitter;
  std::optional<double> noise;
};

// Out directory known so far, for the error document.
fs::path g_error_dir;

void add_out(CLI::App* cmd, Flags& f) {
  cmd->add_option("--out", f.out, "Output directory");
}

void add_config(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
}

void add_solver_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--data", f.data, "Dataset directory or manifest")->required();
  cmd->add_option("--method", f.method, "m2e, m2e-ds, m2e-ts or cp");
  cmd->add_option("--seed", f.seed, "Solver seed");
  cmd->add_option("--rank", f.rank, "Embedding rank R");
  cmd->add_option("--lambda", f.lambdas, "Consensus weight per view as v=x (v: 1-based index or name); repeatable")
      ->allow_extra_args(false);
  cmd->add_option("--max-iters", f.max_iters, "Maximum outer iterations");
  cmd->add_option("--tol", f.tol, "Relative objective change tolerance");
  cmd->add_option("--residual-tol", f.residual_tol, "Coupling residual tolerance");
  cmd->add_option("--mu", f.mu, "Initial ADMM penalty");
  cmd->add_option("--mu-growth", f.mu_growth, "Penalty growth factor per iteration");
  cmd->add_option("--mu-max", f.mu_max, "Penalty cap");
  cmd->add_option("--inner-steps", f.inner_steps, "Proximal steps per block");
}

void add_eval_flags(CLI::App* cmd, Flags& f, bool seed_flag) {
  if (seed_flag) cmd->add_option("--seed", f.eval_seed, "K-means seed");
  cmd->add_option("--k", f.k, "Number of clusters");
  cmd->add_option("--restarts", f.restarts, "K-means restarts");
  cmd->add_option("--repetitions", f.repetitions, "Repetitions of the clustering procedure");
  cmd->add_option("--positive-class", f.positive_class, "Label of the positive class");
}

m2e::RunConfig base_config(const Flags& f) {
  m2e::RunConfig c = f.config.empty() ? m2e::RunConfig{} : m2e::load_run_config(f.config);
  if (!f.out.empty()) c.out_dir = f.out;
  g_error_dir = c.out_dir;
  if (!f.method.empty()) c.method = m2e::parse_method(f.method);
  if (f.seed) c.solver.seed = *f.seed;
  if (f.eval_seed) c.eval.seed = *f.eval_seed;
  if (f.rank) c.solver.rank = *f.rank;
  if (f.tol) c.solver.obj_rel_tol = *f.tol;
  if (f.residual_tol) c.solver.residual_tol = *f.residual_tol;
  if (f.mu) c.solver.mu = *f.mu;
  if (f.mu_growth) c.solver.mu_growth = *f.mu_growth;
  if (f.mu_max) c.solver.mu_max = *f.mu_max;
  if (f.inner_steps) c.solver.inner_steps = *f.inner_steps;
  if (f.k) c.eval.k = *f.k;
  if (f.restarts) c.eval.restarts = *f.restarts;
  if (f.repetitions) c.eval.repetitions = *f.repetitions;
  if (f.positive_class) c.eval.positive_class = *f.positive_class;
  if (f.kmeans_iters) c.eval.max_iters = *f.kmeans_iters;
  if (!f.lambda_grid.empty()) c.grid.lambda_grid = f.lambda_grid;
  if (!f.rank_grid.empty()) c.grid.rank_grid = f.rank_grid;
  if (f.allow_large) c.grid.allow_large = true;
  if (f.view) {
    if (*f.view < 1) throw std::invalid_argument("--view is 1-based");
    c.cp_view = *f.view - 1;
  }
  return c;
}

// --lambda v=x, where v is a 1-based view index or a view name.
void apply_lambdas(const Flags& f, m2e::RunConfig& c, const m2e::io::Dataset& data) {
  if (f.lambdas.empty()) return;
  if (c.solver.lambdas.empty()) c.solver.lambdas.assign(data.views.size(), 1.0);
  if (c.solver.lambdas.size() != data.views.size()) {
    throw std::invalid_argument("config lists " + std::to_string(c.solver.lambdas.size()) +
                                " lambdas for " + std::to_string(data.views.size()) + " views");
  }
  for (const std::string& item : f.lambdas) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--lambda expects v=x, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    std::size_t view = data.views.size();
    for (std::size_t v = 0; v < data.view_names.size(); ++v) {
      if (data.view_names[v] == key) view = v;
    }
    if (view == data.views.size()) {
      std::size_t idx = 0;
      auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
      if (ec != std::errc() || p != key.data() + key.size() || idx < 1 || idx > data.views.size()) {
        throw std::invalid_argument("--lambda: unknown view '" + key + "'");
      }
      view = idx - 1;
    }
    double x = 0.0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc() || p != value.data() + value.size()) {
      throw std::invalid_argument("--lambda: '" + value + "' is not a number");
    }
    c.solver.lambdas[view] = x;
  }
}

// --max-iters means outer solver iterations for fitting commands and Lloyd
// iterations for clustering commands.
void apply_max_iters(const Flags& f, m2e::RunConfig& c, bool clustering) {
  if (!f.max_iters) return;
  if (clustering) {
    c.eval.max_iters = *f.max_iters;
  } else {
    c.solver.max_outer_iters = *f.max_iters;
  }
}

std::vector<int> labels_for(const Flags& f, const std::optional<m2e::io::Dataset>& data) {
  if (!f.labels.empty()) return m2e::io::read_labels(f.labels);
  if (data && data->labels) return *data->labels;
  throw std::invalid_argument("no labels available: the dataset has no labels_file; pass --labels");
}

void print_json(const json& doc) { std::cout << doc.dump(2) << '\n'; }

json metrics_brief(const m2e::EvaluationReport& r) {
  return {{"accuracy", {{"mean", r.accuracy.mean}, {"std", r.accuracy.std}}},
          {"f1", {{"mean", r.f1.mean}, {"std", r.f1.std}}},
          {"precision", {{"mean", r.precision.mean}, {"std", r.precision.std}}},
          {"recall", {{"mean", r.recall.mean}, {"std", r.recall.std}}}};
}

int cmd_generate(const Flags& f) {
  m2e::SyntheticSpec spec;
  if (f.preset == "hiv") {
    spec = m2e::hiv_shape_preset();
  } else if (f.preset == "bp") {
    spec = m2e::bp_shape_preset();
  } else if (f.preset != "default") {
    throw std::invalid_argument("unknown preset '" + f.preset + "' (expected default, hiv or bp)");
  }
  if (f.views) spec.views = *f.views;
  if (f.nodes) spec.nodes = *f.nodes;
  if (!f.cluster_sizes.empty()) spec.cluster_sizes = f.cluster_sizes;
  if (f.latent_rank) spec.latent_rank = *f.latent_rank;
  if (f.separation) spec.separation = *f.separation;
  if (f.jitter) spec.jitter_sigma = *f.jitter;
  if (f.noise) spec.noise_sigma = *f.noise;
  if (f.seed) spec.seed = *f.seed;
  const fs::path out = f.out.empty() ? fs::path("m2e_data") : fs::path(f.out);
  g_error_dir = out;

  m2e::SyntheticDataset synth = m2e::generate(spec);
  m2e::io::Dataset data;
  for (int v = 0; v < spec.views; ++v) data.view_names.push_back("view" + std::to_string(v + 1));
  data.views = std::move(synth.views);
  data.labels = std::move(synth.labels);
  std::string sizes;
  for (m2e::Index s : spec.cluster_sizes) sizes += (sizes.empty() ? "" : ",") + std::to_string(s);
  data.metadata = {{"generator", "planted-cluster"},
                   {"preset", f.preset},
                   {"seed", std::to_string(spec.seed)},
                   {"latent_rank", std::to_string(spec.latent_rank)},
                   {"cluster_sizes", sizes},
                   {"separation", m2e::io::format_double(spec.separation)},
                   {"jitter_sigma", m2e::io::format_double(spec.jitter_sigma)},
                   {"noise_sigma", m2e::io::format_double(spec.noise_sigma)}};
  m2e::io::save_dataset(out, data);
  print_json({{"dataset", out.string()},
              {"views", spec.views},
              {"nodes", spec.nodes},
              {"subjects", spec.subjects()}});
  return 0;
}

int cmd_fit(const Flags& f) {
  m2e::RunConfig c = base_config(f);
  apply_max_iters(f, c, false);
  const m2e::io::Dataset data = m2e::io::load_dataset(f.data);
  apply_lambdas(f, c, data);
  if (c.method == m2e::Method::cp) throw std::invalid_argument("fit needs an embedding method; use the cp subcommand");
  const m2e::FitReport report = m2e::run_fit(c, data);
  print_json({{"out", report.config.out_dir.string()},
              {"method", std::string(m2e::to_string(report.config.method))},
              {"iterations", report.solution.iterations},
              {"converged", report.solution.converged},
              {"final_objective", report.solution.final_objective},
              {"wall_seconds", report.wall_seconds}});
  return 0;
}

int cmd_evaluate(const Flags& f) {
  m2e::RunConfig c = base_config(f);
  apply_max_iters(f, c, true);
  std::optional<m2e::io::Dataset> data;
  if (!f.data.empty()) data = m2e::io::load_dataset(f.data);
  const std::vector<int> labels = labels_for(f, data);
  const m2e::Matrix embedding = m2e::io::read_matrix(f.embedding);
  const m2e::EvaluationReport report = m2e::run_evaluate(embedding, labels, c.eval);
  if (report.k_mismatch) {
    std::cerr << "warning: K = " << c.eval.k << " but the labels have "
              << report.match_k << " classes; clustering with the configured K\n";
  }
  fs::create_directories(c.out_dir);
  m2e::write_metrics(c.out_dir / "metrics.json", report, c.eval);
  json brief = metrics_brief(report);
  brief["metrics"] = (c.out_dir / "metrics.json").string();
  print_json(brief);
  return 0;
}

int cmd_cluster(const Flags& f) {
  m2e::RunConfig c = base_config(f);
  apply_max_iters(f, c, true);
  const m2e::Matrix embedding = m2e::io::read_matrix(f.embedding);
  const m2e::KMeansResult km = m2e::run_cluster(embedding, c.eval, c.out_dir);
  print_json({{"labels", (c.out_dir / "cluster_labels.txt").string()},
              {"inertia", km.inertias[static_cast<std::size_t>(km.best_restart)]},
              {"best_restart", km.best_restart}});
  return 0;
}

int cmd_gridsearch(const Flags& f) {
  m2e::RunConfig c = base_config(f);
  apply_max_iters(f, c, false);
  const m2e::io::Dataset data = m2e::io::load_dataset(f.data);
  apply_lambdas(f, c, data);
  if (!data.labels) throw std::invalid_argument("grid search needs labels: the dataset has no labels_file");
  const m2e::GridResult grid = m2e::run_gridsearch(c, data);
  const m2e::GridCell& best = grid.ranked.front();
  json brief = metrics_brief(best.report);
  print_json({{"out", c.out_dir.string()},
              {"cells", grid.ranked.size()},
              {"best", {{"lambdas", best.lambdas}, {"rank", best.rank}, {"metrics", brief}}}});
  return 0;
}

int cmd_cp(const Flags& f) {
  m2e::RunConfig c = base_config(f);
  apply_max_iters(f, c, false);
  const m2e::io::Dataset data = m2e::io::load_dataset(f.data);
  const m2e::AlsResult als = m2e::run_cp(c, data);
  print_json({{"out", c.out_dir.string()},
              {"iterations", als.iterations},
              {"converged", als.converged},
              {"final_relative_error", als.error_trace.empty() ? 0.0 : als.error_trace.back()}});
  return 0;
}

int emit_error(const std::string& command, const std::string& message) {
  const json doc = {{"error", message}, {"command", command}};
  std::cerr << doc.dump(2) << '\n';
  if (!g_error_dir.empty()) {
    std::error_code ec;
    fs::create_directories(g_error_dir, ec);
    std::ofstream out(g_error_dir / "error.json");
    if (out) out << doc.dump(2) << '\n';
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view multi-graph embedding"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "m2e 1.0.0");
  Flags f;

  auto* gen = app.add_subcommand("generate", "Write a synthetic planted-cluster dataset");
  gen->add_option("--preset", f.preset, "default, hiv or bp");
  gen->add_option("--seed", f.seed, "Generator seed");
  gen->add_option("--views", f.views, "Number of views");
  gen->add_option("--nodes", f.nodes, "Nodes per graph (M)");
  gen->add_option("--cluster-sizes", f.cluster_sizes, "Subjects per cluster")->delimiter(',');
  gen->add_option("--latent-rank", f.latent_rank, "Rank of the planted factors");
  gen->add_option("--separation", f.separation, "Distance between cluster centroids");
  gen->add_option("--jitter", f.jitter, "Within-cluster spread of subject factors");
  gen->add_option("--noise", f.noise, "Edge noise standard deviation");
  add_out(gen, f);

  auto* fit = app.add_subcommand("fit", "Fit an embedding and write factors and traces");
  add_config(fit, f);
  add_solver_flags(fit, f);
  add_out(fit, f);

  auto* eval = app.add_subcommand("evaluate", "Cluster an embedding repeatedly and score it");
  add_config(eval, f);
  eval->add_option("--embedding", f.embedding, "Embedding matrix file")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", f.data, "Dataset providing labels");
  eval->add_option("--labels", f.labels, "Label file (overrides the dataset's)");
  eval->add_option("--max-iters", f.max_iters, "Lloyd iterations per restart");
  add_eval_flags(eval, f, true);
  add_out(eval, f);

  auto* cluster = app.add_subcommand("cluster", "K-means on an embedding");
  add_config(cluster, f);
  cluster->add_option("--embedding", f.embedding, "Embedding matrix file")->required()->check(CLI::ExistingFile);
  cluster->add_option("--max-iters", f.max_iters, "Lloyd iterations per restart");
  add_eval_flags(cluster, f, true);
  add_out(cluster, f);

  auto* grid = app.add_subcommand("gridsearch", "Evaluate every (lambda, rank) combination");
  add_config(grid, f);
  add_solver_flags(grid, f);
  add_eval_flags(grid, f, false);
  grid->add_option("--eval-seed", f.eval_seed, "K-means seed");
  grid->add_option("--kmeans-iters", f.kmeans_iters, "Lloyd iterations per restart");
  grid->add_option("--lambda-grid", f.lambda_grid, "Candidate lambdas")->delimiter(',');
  grid->add_option("--rank-grid", f.rank_grid, "Candidate ranks")->delimiter(',');
  grid->add_flag("--allow-large", f.allow_large, "Permit grids above 10000 cells");
  add_out(grid, f);

  auto* cp = app.add_subcommand("cp", "CP-ALS on one view");
  add_config(cp, f);
  cp->add_option("--data", f.data, "Dataset directory or manifest")->required();
  cp->add_option("--view", f.view, "1-based view index");
  cp->add_option("--seed", f.seed, "Initialization seed");
  cp->add_option("--rank", f.rank, "CP rank");
  cp->add_option("--max-iters", f.max_iters, "Maximum ALS sweeps");
  cp->add_option("--tol", f.tol, "Stop when the relative error changes by less than this");
  add_out(cp, f);

  std::string command = "m2e";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (!f.out.empty()) g_error_dir = f.out;
    return emit_error(command, e.what());
  }

  try {
    if (*gen) {
      command = "generate";
      return cmd_generate(f);
    }
    if (*fit) {
      command = "fit";
      return cmd_fit(f);
    }
    if (*eval) {
      command = "evaluate";
      return cmd_evaluate(f);
    }
    if (*cluster) {
      command = "cluster";
      return cmd_cluster(f);
    }
    if (*grid) {
      command = "gridsearch";
      return cmd_gridsearch(f);
    }
    if (*cp) {
      command = "cp";
      return cmd_cp(f);
    }
  } catch (const std::exception& e) {
    return emit_error(command, e.what());
  }
  return 0;
}
