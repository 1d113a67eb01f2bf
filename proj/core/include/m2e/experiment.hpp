#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "m2e/clustering.hpp"
#include "m2e/cp_als.hpp"
#include "m2e/io.hpp"
#include "m2e/solver.hpp"

namespace m2e {

enum class Method { m2e, m2e_ds, m2e_ts, cp };

std::string_view to_string(Method method);
/// Accepts "m2e", "m2e-ds", "m2e-ts", "cp". Throws std::invalid_argument.
Method parse_method(std::string_view name);

/// Clustering evaluation protocol: `repetitions` independent K-means runs,
/// each the best of `restarts` initializations.
struct EvalSettings {
  int k = 2;
  int restarts = 20;
  int repetitions = 20;
  int max_iters = 100;
  int positive_class = 1;
  std::uint64_t seed = 0;
};

struct GridSpec {
  std::vector<double> lambda_grid{1e-4, 1e-2, 1.0, 1e2, 1e4};
  std::vector<Index> rank_grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  /// Grids above kMaxGridCells cells are refused unless this is set.
  bool allow_large = false;

  /// |lambda_grid|^views * |rank_grid|.
  double cell_count(std::size_t views) const;
};

inline constexpr double kMaxGridCells = 1e4;

struct RunConfig {
  Method method = Method::m2e;
  /// Empty lambdas mean weight 1 for every view of the dataset.
  M2eConfig solver;
  EvalSettings eval;
  GridSpec grid;
  /// View index factored by the cp method.
  std::size_t cp_view = 0;
  double cp_ridge = 1e-10;
  std::filesystem::path out_dir = "m2e_out";
};

/// Reads a JSON run configuration. Missing fields keep their defaults.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(std::string_view json_text);
/// The complete effective configuration, defaults included.
std::string run_config_json(const RunConfig& config);

/// Fills defaulted per-dataset fields (lambdas) and validates the solver
/// settings against the dataset.
RunConfig resolve_config(RunConfig config, const io::Dataset& data);

/// Dispatches m2e / m2e-ds / m2e-ts. Throws std::invalid_argument for cp.
M2eSolution fit_views(Method method, std::span<const GraphViewTensor> views,
                      const M2eConfig& config);

struct FitReport {
  RunConfig config;
  M2eSolution solution;
  double wall_seconds = 0.0;
};

/// Fits and writes to config.out_dir:
///   embedding.txt            F* (N x R)
///   node_factor_<v>.txt      symmetrized H per view
///   subject_factor_<v>.txt   F per view
///   trace.csv                iteration, objective, residual
///   summary.json             effective config, iterations, convergence,
///                            objectives, wall time
FitReport run_fit(const RunConfig& config, const io::Dataset& data);

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;
};

struct EvaluationReport {
  std::vector<BinaryMetrics> repetitions;
  MetricStats accuracy;
  MetricStats precision;
  MetricStats recall;
  MetricStats f1;
  /// K used for matching: max(configured K, largest truth label).
  int match_k = 2;
  /// Set when the configured K differs from the number of truth classes.
  bool k_mismatch = false;
};

/// Repeats kmeans + match_labels + binary_metrics `repetitions` times with
/// independent seeds and aggregates mean and population std.
EvaluationReport run_evaluate(const Matrix& embedding, std::span<const int> labels,
                              const EvalSettings& settings);

/// metrics.json: per-repetition entries plus aggregates.
void write_metrics(const std::filesystem::path& path, const EvaluationReport& report,
                   const EvalSettings& settings);

struct GridCell {
  std::vector<double> lambdas;
  Index rank = 0;
  EvaluationReport report;
  int iterations = 0;
  bool converged = false;
};

struct GridResult {
  /// Every cell, best mean accuracy first (std, then grid order break ties).
  std::vector<GridCell> ranked;
  /// Accuracy vs R at the best cell's lambdas, one row per rank_grid entry.
  std::vector<GridCell> rank_curve;
  /// Accuracy over all lambda combinations at the best cell's rank.
  std::vector<GridCell> lambda_surface;
};

/// Fits and evaluates every (lambda_1..lambda_V, R) cell. Writes
/// gridsearch.csv, accuracy_vs_rank.csv, accuracy_vs_lambda.csv and
/// gridsearch_summary.json to config.out_dir. Requires labels.
GridResult run_gridsearch(const RunConfig& config, const io::Dataset& data);

/// CP-ALS on one view (config.cp_view) with rank, max_outer_iters,
/// obj_rel_tol and seed taken from config.solver. Writes
/// cp_factor_{1,2,3}.txt, cp_trace.csv and cp_summary.json.
AlsResult run_cp(const RunConfig& config, const io::Dataset& data);

/// K-means on an embedding; writes cluster_labels.txt and
/// cluster_summary.json.
KMeansResult run_cluster(const Matrix& embedding, const EvalSettings& settings,
                         const std::filesystem::path& out_dir);

}  // namespace m2e
