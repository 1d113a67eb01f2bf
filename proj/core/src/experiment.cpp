#include "m2e/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "m2e/parallel.hpp"
#include "m2e/random.hpp"

namespace m2e {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Method method) {
  switch (method) {
    case Method::m2e: return "m2e";
    case Method::m2e_ds: return "m2e-ds";
    case Method::m2e_ts: return "m2e-ts";
    case Method::cp: return "cp";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "m2e") return Method::m2e;
  if (name == "m2e-ds") return Method::m2e_ds;
  if (name == "m2e-ts") return Method::m2e_ts;
  if (name == "cp") return Method::cp;
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected m2e, m2e-ds, m2e-ts or cp)");
}

double GridSpec::cell_count(std::size_t views) const {
  return std::pow(static_cast<double>(lambda_grid.size()), static_cast<double>(views)) *
         static_cast<double>(rank_grid.size());
}

namespace {

json to_json(const RunConfig& c) {
  const M2eConfig& s = c.solver;
  return json{
      {"method", std::string(to_string(c.method))},
      {"solver",
       {{"lambdas", s.lambdas},
        {"rank", s.rank},
        {"mu", s.mu},
        {"mu_growth", s.mu_growth},
        {"mu_max", s.mu_max},
        {"inner_steps", s.inner_steps},
        {"max_outer_iters", s.max_outer_iters},
        {"obj_rel_tol", s.obj_rel_tol},
        {"residual_tol", s.residual_tol},
        {"seed", s.seed},
        {"view_seeds", s.view_seeds}}},
      {"eval",
       {{"k", c.eval.k},
        {"restarts", c.eval.restarts},
        {"repetitions", c.eval.repetitions},
        {"max_iters", c.eval.max_iters},
        {"positive_class", c.eval.positive_class},
        {"seed", c.eval.seed}}},
      {"grid",
       {{"lambda_grid", c.grid.lambda_grid},
        {"rank_grid", c.grid.rank_grid},
        {"allow_large", c.grid.allow_large}}},
      {"cp", {{"view", c.cp_view}, {"ridge", c.cp_ridge}}},
      {"out_dir", c.out_dir.string()},
  };
}

template <typename T>
void read_field(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

RunConfig from_json(const json& doc) {
  RunConfig c;
  try {
    if (doc.contains("method")) c.method = parse_method(doc.at("method").get<std::string>());
    if (doc.contains("solver")) {
      const json& s = doc.at("solver");
      read_field(s, "lambdas", c.solver.lambdas);
      read_field(s, "rank", c.solver.rank);
      read_field(s, "mu", c.solver.mu);
      read_field(s, "mu_growth", c.solver.mu_growth);
      read_field(s, "mu_max", c.solver.mu_max);
      read_field(s, "inner_steps", c.solver.inner_steps);
      read_field(s, "max_outer_iters", c.solver.max_outer_iters);
      read_field(s, "obj_rel_tol", c.solver.obj_rel_tol);
      read_field(s, "residual_tol", c.solver.residual_tol);
      read_field(s, "seed", c.solver.seed);
      read_field(s, "view_seeds", c.solver.view_seeds);
    }
    if (doc.contains("eval")) {
      const json& e = doc.at("eval");
      read_field(e, "k", c.eval.k);
      read_field(e, "restarts", c.eval.restarts);
      read_field(e, "repetitions", c.eval.repetitions);
      read_field(e, "max_iters", c.eval.max_iters);
      read_field(e, "positive_class", c.eval.positive_class);
      read_field(e, "seed", c.eval.seed);
    }
    if (doc.contains("grid")) {
      const json& g = doc.at("grid");
      read_field(g, "lambda_grid", c.grid.lambda_grid);
      read_field(g, "rank_grid", c.grid.rank_grid);
      read_field(g, "allow_large", c.grid.allow_large);
    }
    if (doc.contains("cp")) {
      read_field(doc.at("cp"), "view", c.cp_view);
      read_field(doc.at("cp"), "ridge", c.cp_ridge);
    }
    if (doc.contains("out_dir")) c.out_dir = doc.at("out_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid run configuration: ") + e.what());
  }
  return c;
}

void write_json(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
}

MetricStats stats_of(const std::vector<double>& values) {
  MetricStats s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / n);
  return s;
}

json stats_json(const MetricStats& s) { return json{{"mean", s.mean}, {"std", s.std}}; }

json report_json(const EvaluationReport& r) {
  json reps = json::array();
  for (const BinaryMetrics& m : r.repetitions) {
    reps.push_back({{"accuracy", m.accuracy},
                    {"precision", m.precision},
                    {"recall", m.recall},
                    {"f1", m.f1},
                    {"degenerate", m.degenerate}});
  }
  return json{{"accuracy", stats_json(r.accuracy)},
              {"precision", stats_json(r.precision)},
              {"recall", stats_json(r.recall)},
              {"f1", stats_json(r.f1)},
              {"match_k", r.match_k},
              {"k_mismatch", r.k_mismatch},
              {"repetitions", reps}};
}

std::string view_file_stem(const io::Dataset& data, std::size_t v) {
  return v < data.view_names.size() ? data.view_names[v] : std::to_string(v + 1);
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("run configuration is not valid JSON: ") + e.what());
  }
  return from_json(doc);
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string run_config_json(const RunConfig& config) { return to_json(config).dump(2); }

RunConfig resolve_config(RunConfig config, const io::Dataset& data) {
  if (data.views.empty()) throw std::invalid_argument("dataset has no views");
  if (config.solver.lambdas.empty()) config.solver.lambdas.assign(data.views.size(), 1.0);
  if (config.method == Method::cp) {
    if (config.cp_view >= data.views.size()) {
      throw std::invalid_argument("cp view index " + std::to_string(config.cp_view) +
                                  " out of range for " + std::to_string(data.views.size()) + " views");
    }
  } else {
    config.solver.validate(data.views.size());
  }
  if (config.eval.k < 1) throw std::invalid_argument("K must be >= 1");
  return config;
}

M2eSolution fit_views(Method method, std::span<const GraphViewTensor> views,
                      const M2eConfig& config) {
  switch (method) {
    case Method::m2e: return m2e_fit(views, config);
    case Method::m2e_ds: return m2e_ds_fit(views, config);
    case Method::m2e_ts: return m2e_ts_fit(views, config);
    case Method::cp: break;
  }
  throw std::invalid_argument("fit_views: cp is not an embedding method; use run_cp");
}

FitReport run_fit(const RunConfig& config_in, const io::Dataset& data) {
  FitReport report;
  report.config = resolve_config(config_in, data);
  const RunConfig& config = report.config;

  const auto start = std::chrono::steady_clock::now();
  try {
    report.solution = fit_views(config.method, data.views, config.solver);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(to_string(config.method)) + " fit failed: " + e.what());
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const M2eSolution& sol = report.solution;
  const fs::path& out = config.out_dir;
  fs::create_directories(out);
  io::write_matrix(out / "embedding.txt", sol.consensus);
  json outputs = {{"embedding", "embedding.txt"}, {"trace", "trace.csv"}};
  for (std::size_t v = 0; v < sol.node_factors.size(); ++v) {
    const std::string stem = view_file_stem(data, v);
    io::write_matrix(out / ("node_factor_" + stem + ".txt"), sol.node_factors[v]);
    io::write_matrix(out / ("subject_factor_" + stem + ".txt"), sol.subject_factors[v]);
    outputs["node_factors"].push_back("node_factor_" + stem + ".txt");
    outputs["subject_factors"].push_back("subject_factor_" + stem + ".txt");
  }
  std::vector<double> iters(sol.objective_trace.size());
  std::iota(iters.begin(), iters.end(), 1.0);
  io::write_table(out / "trace.csv", {"iteration", "objective", "residual"},
                  {iters, sol.objective_trace, sol.residual_trace});

  json summary = {
      {"config", to_json(config)},
      {"iterations", sol.iterations},
      {"converged", sol.converged},
      {"final_objective", sol.final_objective},
      {"last_tracked_objective", sol.objective_trace.empty() ? 0.0 : sol.objective_trace.back()},
      {"final_residual", sol.residual_trace.empty() ? 0.0 : sol.residual_trace.back()},
      {"wall_seconds", report.wall_seconds},
      {"views", data.view_names},
      {"subjects", data.views.front().subject_count()},
      {"outputs", outputs},
  };
  write_json(out / "summary.json", summary);
  return report;
}

EvaluationReport run_evaluate(const Matrix& embedding, std::span<const int> labels,
                              const EvalSettings& settings) {
  if (static_cast<Index>(labels.size()) != embedding.rows()) {
    throw std::invalid_argument("embedding has " + std::to_string(embedding.rows()) +
                                " rows but there are " + std::to_string(labels.size()) + " labels");
  }
  if (settings.repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (labels.empty()) throw std::invalid_argument("no labels to evaluate against");
  const int max_label = *std::max_element(labels.begin(), labels.end());
  if (*std::min_element(labels.begin(), labels.end()) < 1) {
    throw std::invalid_argument("truth labels must be >= 1");
  }

  EvaluationReport report;
  report.match_k = std::max(settings.k, max_label);
  report.k_mismatch = settings.k != max_label;

  std::vector<double> acc, prec, rec, f1;
  Rng seeds = make_rng(settings.seed, 0x5eed);
  for (int r = 0; r < settings.repetitions; ++r) {
    KMeansOptions opts{settings.k, settings.restarts, settings.max_iters, seeds()};
    const KMeansResult km = kmeans(embedding, opts);
    const LabelMatch match = match_labels(km.labels, labels, report.match_k);
    const BinaryMetrics m = binary_metrics(match.matched, labels, settings.positive_class);
    report.repetitions.push_back(m);
    acc.push_back(m.accuracy);
    prec.push_back(m.precision);
    rec.push_back(m.recall);
    f1.push_back(m.f1);
  }
  report.accuracy = stats_of(acc);
  report.precision = stats_of(prec);
  report.recall = stats_of(rec);
  report.f1 = stats_of(f1);
  return report;
}

void write_metrics(const fs::path& path, const EvaluationReport& report,
                   const EvalSettings& settings) {
  json doc = report_json(report);
  doc["settings"] = {{"k", settings.k},
                     {"restarts", settings.restarts},
                     {"repetitions", settings.repetitions},
                     {"max_iters", settings.max_iters},
                     {"positive_class", settings.positive_class},
                     {"seed", settings.seed}};
  write_json(path, doc);
}

GridResult run_gridsearch(const RunConfig& config_in, const io::Dataset& data) {
  if (!data.labels) throw std::invalid_argument("grid search needs a dataset with labels");
  RunConfig config = resolve_config(config_in, data);
  if (config.method == Method::cp) throw std::invalid_argument("grid search needs an embedding method");
  const GridSpec& grid = config.grid;
  if (grid.lambda_grid.empty() || grid.rank_grid.empty()) {
    throw std::invalid_argument("grid search needs non-empty lambda and rank grids");
  }
  for (double l : grid.lambda_grid) {
    if (!(l > 0.0)) throw std::invalid_argument("lambda grid values must be positive");
  }
  for (Index r : grid.rank_grid) {
    if (r < 1) throw std::invalid_argument("rank grid values must be positive");
  }
  const std::size_t view_count = data.views.size();
  const double cells = grid.cell_count(view_count);
  if (cells > kMaxGridCells && !grid.allow_large) {
    throw std::invalid_argument("grid has " + std::to_string(static_cast<long long>(cells)) +
                                " cells; more than 10000 requires allow_large");
  }

  // Cells in grid order: lambda tuples (first view slowest), then rank.
  std::vector<GridCell> cells_list;
  std::vector<std::size_t> digits(view_count, 0);
  bool done = false;
  while (!done) {
    std::vector<double> lambdas(view_count);
    for (std::size_t v = 0; v < view_count; ++v) lambdas[v] = grid.lambda_grid[digits[v]];
    for (Index r : grid.rank_grid) cells_list.push_back({lambdas, r, {}, 0, false});
    done = true;
    for (std::size_t pos = view_count; pos-- > 0;) {
      if (++digits[pos] < grid.lambda_grid.size()) {
        done = false;
        break;
      }
      digits[pos] = 0;
    }
  }

  parallel_for(cells_list.size(), [&](std::size_t i) {
    GridCell& cell = cells_list[i];
    M2eConfig solver = config.solver;
    solver.lambdas = cell.lambdas;
    solver.rank = cell.rank;
    const M2eSolution sol = fit_views(config.method, data.views, solver);
    cell.iterations = sol.iterations;
    cell.converged = sol.converged;
    cell.report = run_evaluate(sol.consensus, *data.labels, config.eval);
  });

  GridResult result;
  result.ranked = cells_list;
  std::stable_sort(result.ranked.begin(), result.ranked.end(), [](const GridCell& a, const GridCell& b) {
    if (a.report.accuracy.mean != b.report.accuracy.mean) {
      return a.report.accuracy.mean > b.report.accuracy.mean;
    }
    return a.report.accuracy.std < b.report.accuracy.std;
  });
  const GridCell& best = result.ranked.front();
  for (const GridCell& c : cells_list) {
    if (c.lambdas == best.lambdas) result.rank_curve.push_back(c);
    if (c.rank == best.rank) result.lambda_surface.push_back(c);
  }

  const fs::path& out = config.out_dir;
  fs::create_directories(out);
  auto table = [&](const fs::path& path, const std::vector<GridCell>& rows) {
    std::vector<std::string> header;
    std::vector<std::vector<double>> cols(view_count + 5);
    for (std::size_t v = 0; v < view_count; ++v) header.push_back("lambda_" + std::to_string(v + 1));
    for (const char* h : {"rank", "accuracy_mean", "accuracy_std", "f1_mean", "f1_std"}) header.push_back(h);
    for (const GridCell& c : rows) {
      for (std::size_t v = 0; v < view_count; ++v) cols[v].push_back(c.lambdas[v]);
      cols[view_count].push_back(static_cast<double>(c.rank));
      cols[view_count + 1].push_back(c.report.accuracy.mean);
      cols[view_count + 2].push_back(c.report.accuracy.std);
      cols[view_count + 3].push_back(c.report.f1.mean);
      cols[view_count + 4].push_back(c.report.f1.std);
    }
    io::write_table(path, header, cols);
  };
  table(out / "gridsearch.csv", result.ranked);
  table(out / "accuracy_vs_rank.csv", result.rank_curve);
  table(out / "accuracy_vs_lambda.csv", result.lambda_surface);
  write_json(out / "gridsearch_summary.json",
             {{"config", to_json(config)},
              {"cells", result.ranked.size()},
              {"best", {{"lambdas", best.lambdas}, {"rank", best.rank}, {"metrics", report_json(best.report)}}}});
  return result;
}

AlsResult run_cp(const RunConfig& config_in, const io::Dataset& data) {
  RunConfig config = config_in;
  config.method = Method::cp;
  config = resolve_config(config, data);
  AlsOptions opts;
  opts.rank = config.solver.rank;
  opts.max_iters = config.solver.max_outer_iters;
  opts.rel_tol = config.solver.obj_rel_tol;
  opts.seed = config.solver.seed;
  opts.ridge = config.cp_ridge;
  AlsResult als = cp_als_fit(data.views[config.cp_view].tensor(), opts);

  const fs::path& out = config.out_dir;
  fs::create_directories(out);
  for (int m = 0; m < 3; ++m) {
    io::write_matrix(out / ("cp_factor_" + std::to_string(m + 1) + ".txt"), als.factors.factors[m]);
  }
  std::vector<double> iters(als.error_trace.size());
  std::iota(iters.begin(), iters.end(), 1.0);
  io::write_table(out / "cp_trace.csv", {"iteration", "relative_error"}, {iters, als.error_trace});
  write_json(out / "cp_summary.json",
             {{"config", to_json(config)},
              {"view", view_file_stem(data, config.cp_view)},
              {"iterations", als.iterations},
              {"converged", als.converged},
              {"zero_input", als.zero_input},
              {"final_relative_error", als.error_trace.empty() ? 0.0 : als.error_trace.back()}});
  return als;
}

KMeansResult run_cluster(const Matrix& embedding, const EvalSettings& settings,
                         const fs::path& out_dir) {
  KMeansResult km = kmeans(embedding, {settings.k, settings.restarts, settings.max_iters, settings.seed});
  fs::create_directories(out_dir);
  io::write_labels(out_dir / "cluster_labels.txt", km.labels);
  write_json(out_dir / "cluster_summary.json",
             {{"k", settings.k},
              {"restarts", settings.restarts},
              {"seed", settings.seed},
              {"best_restart", km.best_restart},
              {"inertias", km.inertias}});
  return km;
}

}  // namespace m2e
