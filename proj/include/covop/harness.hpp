#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "covop/bootstrap.hpp"
#include "covop/metrics.hpp"
#include "covop/models.hpp"
#include "covop/serialize.hpp"

namespace covop {

enum class Aggregate { median, mean };

// Everything a Monte Carlo accuracy experiment needs. Floors on the MC sizes
// keep the d_K estimates' own sampling noise well under the effects measured.
struct ExperimentConfig {
  ModelSpec model;
  std::vector<long> n_grid;
  int mc_reference = 2000;        // reference T_n draws per n (M)
  int bootstrap_replicates = 1000;  // bootstrap draws per dataset (B)
  int datasets_per_n = 50;        // datasets per n (R)
  double epsilon = 0.1;
  std::optional<int> k_override;
  std::uint64_t seed = 0;
  MultiplierLaw law = MultiplierLaw::multinomial_minus_one;
  int threads = 1;
  bool burn_in = false;           // drop the smallest n from the rate fit
  Aggregate aggregate = Aggregate::median;
  bool self_test = false;         // replace the bootstrap by fresh reference draws

  void validate() const;
};

json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const json& j);

struct AccuracyRecord {
  long n = 0;
  int k_used = 0;
  std::vector<double> dk_values;  // one per dataset, in dataset order
  double dk_median = 0.0;
  double dk_q10 = 0.0;
  double dk_q90 = 0.0;
  double dk_aggregate = 0.0;  // median or mean per config
};

struct ExperimentResult {
  std::string experiment_id;
  ExperimentConfig config;
  std::vector<AccuracyRecord> records;  // ascending n
  double fitted_slope = 0.0;
  double slope_stderr = 0.0;
  double rate_theory_new = 0.0;
  double rate_theory_old = 0.0;
  double wall_seconds = 0.0;
};

// True when everything persisted matches (wall time included; the comparison
// used by determinism checks is on CSV bytes instead).
bool same_result(const ExperimentResult& a, const ExperimentResult& b);

// M independent datasets -> M draws of sqrt(n) ||S_hat - Sigma||_op, sorted.
ScalarSample reference_distribution(const ModelSpec& model, long n, int mc_draws,
                                    std::uint64_t seed, int threads = 1);

// Called after each completed n so partially written outputs stay valid.
using PartialSink = std::function<void(const AccuracyRecord&)>;

// The main experiment: per n, R datasets, each with a B-replicate bootstrap
// sample compared against a shared M-draw reference via exact d_K; quantiles
// per n, then a log-log rate fit of the aggregate against n, reported next
// to the theoretical exponents.
ExperimentResult bootstrap_accuracy(const ExperimentConfig& config,
                                    const PartialSink& sink = nullptr);

struct TransitionRow {
  double beta = 0.0;
  int p = 0;
  double dk_median = 0.0;
};

// Median d_K at a fixed n across a beta grid spanning the decay threshold.
// For beta <= 1/2 the spectrum never admits a truncation rule, so the
// configured p is used as-is and k bookkeeping falls back to p.
std::vector<TransitionRow> transition_probe(const std::vector<double>& beta_grid, long n,
                                            const ExperimentConfig& base);

struct CouplingRow {
  int k = 0;
  double mean_abs_gap = 0.0;
  // Mean of 2 sqrt(n) ||(I - P_k)(S_hat - Sigma)||_op, the off-projection
  // majorant of the gap. The gap itself is a second-order perturbation and
  // decays faster; this row keeps the first-order quantity visible.
  double mean_offblock_bound = 0.0;
};

struct CouplingResult {
  long n = 0;
  std::vector<CouplingRow> rows;        // in the order of the requested grid
  std::optional<RateFit> loglog_slope;  // gap slope over rows with positive gap
  std::optional<RateFit> offblock_slope;
};

// Monte Carlo mean of |T_n - T_{n,k}| per k, all statistics per dataset
// computed from the same draws so the gap is exactly zero at k = p.
CouplingResult coupling_probe(const ModelSpec& model, long n, const std::vector<int>& k_grid,
                              int mc_draws, std::uint64_t seed, int threads = 1);

// Empirical versions of the five comparison terms chaining the law of the
// full statistic to the conditional law of its bootstrap: projection gap,
// Gaussian approximation, covariance-operator comparison (with its Pinsker
// bound), bootstrap-vs-Gaussian gap, and the bootstrap projection gap.
struct DecompositionResult {
  long n = 0;
  int k = 0;
  double projection_gap_data = 0.0;
  double gaussian_approx_gap = 0.0;
  double operator_comparison_gap = 0.0;
  double operator_comparison_pinsker = 0.0;
  double bootstrap_gaussian_gap = 0.0;
  double projection_gap_bootstrap = 0.0;
  double direct_dk = 0.0;  // d_K(MC T_n, bootstrap sample), for the triangle check
  double sum_of_terms() const {
    return projection_gap_data + gaussian_approx_gap + operator_comparison_gap +
           bootstrap_gaussian_gap + projection_gap_bootstrap;
  }
};

DecompositionResult decomposition_probe(const ModelSpec& model, long n, int k, int mc_draws,
                                        int bootstrap_replicates, std::uint64_t seed,
                                        MultiplierLaw law = MultiplierLaw::multinomial_minus_one,
                                        int threads = 1);

struct MomentRow {
  long n = 0;
  double moment_root = 0.0;  // (E ||S_hat - Sigma||_op^q)^{1/q} estimate
};

struct MomentResult {
  double q = 0.0;
  std::vector<MomentRow> rows;
  std::optional<RateFit> loglog_slope;
};

MomentResult moment_probe(const ModelSpec& model, const std::vector<long>& n_grid, double q,
                          int mc_draws, std::uint64_t seed, int threads = 1);

// Writes manifest.json plus accuracy.csv / summary.csv under dir. CSV bodies
// are deterministic functions of (config, seed); timestamps live only in the
// manifest. Returns the manifest.
json persist(const ExperimentResult& result, const std::filesystem::path& dir);

ExperimentResult load_result(const std::filesystem::path& dir);

// Deterministic id for an experiment: hash of the canonical config and seed.
std::string experiment_id(const ExperimentConfig& config);

// Accuracy-table fragments, shared by persist() and incremental writers so
// partially written files are byte-compatible with the final table.
std::string accuracy_csv_header();
std::string accuracy_csv_rows(const std::string& experiment_id, const AccuracyRecord& record);

// Formats a double with the shortest representation that parses back
// exactly; used for every CSV number so reruns are byte-identical.
std::string format_double(double v);

// k bookkeeping: k_override if present, k_index when it applies, p otherwise.
int resolve_k(const ExperimentConfig& config, long n);

}  // namespace covop
