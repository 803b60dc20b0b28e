#include "covop/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "covop/seeds.hpp"
#include "covop/thread_pool.hpp"

namespace covop {

namespace {

double aggregate_value(const ScalarSample& sample, Aggregate aggregate) {
  return aggregate == Aggregate::median ? sample.quantile(0.5) : sample.mean();
}

ScalarSample sample_of(std::vector<double> values) { return ScalarSample(std::move(values)); }

}  // namespace

void ExperimentConfig::validate() const {
  model.validate();
  if (n_grid.empty()) throw ConfigError("config: n_grid must not be empty");
  for (long n : n_grid)
    if (n < 2) throw ConfigError("config: every n in n_grid must be at least 2");
  if (mc_reference < 200) throw ConfigError("config: mc_reference must be at least 200");
  if (bootstrap_replicates < 200)
    throw ConfigError("config: bootstrap_replicates must be at least 200");
  if (datasets_per_n < 1) throw ConfigError("config: datasets_per_n must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("config: epsilon must lie in (0,1)");
  if (k_override && (*k_override < 1 || *k_override > model.spectrum.p))
    throw ConfigError("config: k_override out of range");
  if (threads < 1) throw ConfigError("config: threads must be positive");
}

json to_json(const ExperimentConfig& config) {
  json j;
  j["model"] = to_json(config.model);
  j["n_grid"] = config.n_grid;
  j["mc_reference"] = config.mc_reference;
  j["bootstrap_replicates"] = config.bootstrap_replicates;
  j["datasets_per_n"] = config.datasets_per_n;
  j["epsilon"] = config.epsilon;
  if (config.k_override) j["k_override"] = *config.k_override;
  j["seed"] = config.seed;
  j["law"] = multiplier_law_name(config.law);
  j["burn_in"] = config.burn_in;
  j["aggregate"] = config.aggregate == Aggregate::median ? "median" : "mean";
  j["self_test"] = config.self_test;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig config;
  config.model = model_from_json(detail::require_field<json>(j, "model", "config"));
  config.n_grid = detail::require_field<std::vector<long>>(j, "n_grid", "config");
  config.mc_reference = detail::require_field<int>(j, "mc_reference", "config");
  config.bootstrap_replicates =
      detail::require_field<int>(j, "bootstrap_replicates", "config");
  config.datasets_per_n = detail::require_field<int>(j, "datasets_per_n", "config");
  config.epsilon = j.value("epsilon", 0.1);
  if (j.contains("k_override") && !j.at("k_override").is_null())
    config.k_override = j.at("k_override").get<int>();
  config.seed = detail::require_field<std::uint64_t>(j, "seed", "config");
  config.law = multiplier_law_from_string(j.value("law", "multinomial_minus_one"));
  config.burn_in = j.value("burn_in", false);
  const std::string agg = j.value("aggregate", "median");
  if (agg == "median") config.aggregate = Aggregate::median;
  else if (agg == "mean") config.aggregate = Aggregate::mean;
  else throw ConfigError("config: aggregate must be \"median\" or \"mean\"");
  config.self_test = j.value("self_test", false);
  config.validate();
  return config;
}

int resolve_k(const ExperimentConfig& config, long n) {
  if (config.k_override) return *config.k_override;
  const int p = config.model.spectrum.p;
  if (config.model.spectrum.beta > 0.5) return k_index(n, config.model.spectrum.beta, p);
  return p;
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string experiment_id(const ExperimentConfig& config) {
  const std::string canonical = to_json(config).dump();
  std::uint64_t h = mix64(config.seed ^ 0x65787065726964ULL);
  for (char c : canonical) h = mix64(h ^ static_cast<unsigned char>(c));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string accuracy_csv_header() { return "experiment_id,n,k,dataset_index,d_k\n"; }

std::string accuracy_csv_rows(const std::string& experiment_id, const AccuracyRecord& record) {
  std::ostringstream csv;
  for (std::size_t r = 0; r < record.dk_values.size(); ++r)
    csv << experiment_id << ',' << record.n << ',' << record.k_used << ',' << r << ','
        << format_double(record.dk_values[r]) << '\n';
  return csv.str();
}

ScalarSample reference_distribution(const ModelSpec& model, long n, int mc_draws,
                                    std::uint64_t seed, int threads) {
  if (mc_draws < 1) throw ConfigError("reference_distribution: mc_draws must be positive");
  model.validate();
  const SymMatrix sigma = population_covariance(model);
  std::vector<double> values(static_cast<std::size_t>(mc_draws));
  parallel_for(mc_draws, threads, [&](std::int64_t i) {
    const auto obs = sample_observations(
        model, n, Rng::derive_seed(seed, {seeds::kReference, static_cast<std::uint64_t>(i)}));
    values[static_cast<std::size_t>(i)] = t_statistic_cols(obs, sigma);
  });
  return sample_of(std::move(values));
}

namespace {

// d_K between one dataset's bootstrap sample and the shared reference. In
// self-test mode the "bootstrap" is B fresh reference draws, which measures
// the two-sample ECDF noise floor of the pipeline.
double dataset_dk(const ExperimentConfig& config, long n, std::size_t n_index, int r,
                  const ScalarSample& reference, const SymMatrix& sigma) {
  if (config.self_test) {
    std::vector<double> values(static_cast<std::size_t>(config.bootstrap_replicates));
    parallel_for(config.bootstrap_replicates, config.threads, [&](std::int64_t b) {
      const auto obs = sample_observations(
          config.model, n,
          Rng::derive_seed(config.seed, {seeds::kSelfTest, n_index,
                                         static_cast<std::uint64_t>(r),
                                         static_cast<std::uint64_t>(b)}));
      values[static_cast<std::size_t>(b)] = t_statistic_cols(obs, sigma);
    });
    return kolmogorov_distance(sample_of(std::move(values)), reference);
  }
  const auto obs = sample_observations(
      config.model, n,
      Rng::derive_seed(config.seed,
                       {seeds::kDataset, n_index, static_cast<std::uint64_t>(r)}));
  BootstrapOptions options;
  options.threads = config.threads;
  const auto boot = bootstrap_norms(
      obs, config.law, config.bootstrap_replicates,
      Rng::derive_seed(config.seed,
                       {seeds::kBootstrap, n_index, static_cast<std::uint64_t>(r)}),
      std::nullopt, options);
  return kolmogorov_distance(boot, reference);
}

}  // namespace

ExperimentResult bootstrap_accuracy(const ExperimentConfig& config, const PartialSink& sink) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.experiment_id = experiment_id(config);
  result.config = config;
  const SymMatrix sigma = population_covariance(config.model);

  std::vector<long> grid = config.n_grid;
  std::sort(grid.begin(), grid.end());
  for (std::size_t ni = 0; ni < grid.size(); ++ni) {
    const long n = grid[ni];
    const auto reference = reference_distribution(
        config.model, n, config.mc_reference,
        Rng::derive_seed(config.seed, {seeds::kReference, ni}), config.threads);
    AccuracyRecord record;
    record.n = n;
    record.k_used = resolve_k(config, n);
    record.dk_values.resize(static_cast<std::size_t>(config.datasets_per_n));
    for (int r = 0; r < config.datasets_per_n; ++r)
      record.dk_values[static_cast<std::size_t>(r)] =
          dataset_dk(config, n, ni, r, reference, sigma);
    const ScalarSample dks(record.dk_values);
    record.dk_median = dks.quantile(0.5);
    record.dk_q10 = dks.quantile(0.1);
    record.dk_q90 = dks.quantile(0.9);
    record.dk_aggregate = aggregate_value(dks, config.aggregate);
    result.records.push_back(record);
    if (sink) sink(record);
  }

  result.rate_theory_new = config.model.spectrum.beta > 0.5
                               ? theoretical_rate(config.model.spectrum.beta, config.epsilon)
                               : 0.0;
  result.rate_theory_old = config.model.spectrum.beta > 0.5
                               ? theoretical_rate_previous(config.model.spectrum.beta)
                               : 0.0;
  if (result.records.size() >= 3) {
    std::vector<double> ns;
    std::vector<double> agg;
    for (const auto& rec : result.records) {
      ns.push_back(static_cast<double>(rec.n));
      agg.push_back(rec.dk_aggregate);
    }
    bool positive = true;
    for (double v : agg) positive = positive && v > 0.0;
    if (positive) {
      const RateFit fit = rate_fit(ns, agg, config.burn_in);
      result.fitted_slope = fit.slope;
      result.slope_stderr = fit.stderr;
    }
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

bool same_result(const ExperimentResult& a, const ExperimentResult& b) {
  if (a.experiment_id != b.experiment_id) return false;
  if (to_json(a.config) != to_json(b.config)) return false;
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& ra = a.records[i];
    const auto& rb = b.records[i];
    if (ra.n != rb.n || ra.k_used != rb.k_used || ra.dk_values != rb.dk_values ||
        ra.dk_median != rb.dk_median || ra.dk_q10 != rb.dk_q10 || ra.dk_q90 != rb.dk_q90 ||
        ra.dk_aggregate != rb.dk_aggregate)
      return false;
  }
  return a.fitted_slope == b.fitted_slope && a.slope_stderr == b.slope_stderr &&
         a.rate_theory_new == b.rate_theory_new && a.rate_theory_old == b.rate_theory_old;
}

std::vector<TransitionRow> transition_probe(const std::vector<double>& beta_grid, long n,
                                            const ExperimentConfig& base) {
  if (beta_grid.empty()) throw ConfigError("transition_probe: beta grid must not be empty");
  std::vector<TransitionRow> rows;
  for (std::size_t bi = 0; bi < beta_grid.size(); ++bi) {
    ExperimentConfig config = base;
    config.model = base.model.with_beta(beta_grid[bi]);
    config.n_grid = {n};
    config.seed = Rng::derive_seed(base.seed, {seeds::kTransition, bi});
    config.validate();
    const auto result = bootstrap_accuracy(config);
    rows.push_back(TransitionRow{beta_grid[bi], config.model.spectrum.p,
                                 result.records.front().dk_median});
  }
  return rows;
}

CouplingResult coupling_probe(const ModelSpec& model, long n, const std::vector<int>& k_grid,
                              int mc_draws, std::uint64_t seed, int threads) {
  model.validate();
  if (mc_draws < 1) throw ConfigError("coupling_probe: mc_draws must be positive");
  if (k_grid.empty()) throw ConfigError("coupling_probe: k grid must not be empty");
  const int p = model.spectrum.p;
  for (int k : k_grid)
    if (k < 1 || k > p) throw ConfigError("coupling_probe: k grid entry out of range");
  const SymMatrix sigma = population_covariance(model);

  // Per dataset, the full statistic and all projected statistics come from
  // the same draws; the gap is a nested sup and vanishes identically at k=p.
  std::vector<std::vector<double>> gaps(k_grid.size(),
                                        std::vector<double>(static_cast<std::size_t>(mc_draws)));
  std::vector<std::vector<double>> bounds(
      k_grid.size(), std::vector<double>(static_cast<std::size_t>(mc_draws)));
  parallel_for(mc_draws, threads, [&](std::int64_t i) {
    const auto obs = sample_observations(
        model, n, Rng::derive_seed(seed, {seeds::kCoupling, static_cast<std::uint64_t>(i)}));
    const double t_full = t_statistic_cols(obs, sigma);
    const Eigen::MatrixXd scaled_err =
        std::sqrt(static_cast<double>(n)) *
        (sample_covariance_cols(obs).mat() - sigma.mat());
    for (std::size_t kidx = 0; kidx < k_grid.size(); ++kidx) {
      const int k = k_grid[kidx];
      const double t_proj = projected_t_statistic_cols(obs, sigma, k);
      gaps[kidx][static_cast<std::size_t>(i)] = std::abs(t_full - t_proj);
      double offblock = 0.0;
      if (k < p) {
        // largest singular value of the rows past k
        const auto tail = scaled_err.bottomRows(p - k);
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p - k, p - k);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(tail);
        offblock = 2.0 * std::sqrt(operator_norm_sym(gram));
      }
      bounds[kidx][static_cast<std::size_t>(i)] = offblock;
    }
  });

  CouplingResult result;
  result.n = n;
  std::vector<double> fit_k;
  std::vector<double> fit_gap;
  std::vector<double> bound_k;
  std::vector<double> bound_v;
  for (std::size_t kidx = 0; kidx < k_grid.size(); ++kidx) {
    double mean = 0.0;
    double mean_bound = 0.0;
    for (double g : gaps[kidx]) mean += g;
    for (double b : bounds[kidx]) mean_bound += b;
    mean /= static_cast<double>(mc_draws);
    mean_bound /= static_cast<double>(mc_draws);
    result.rows.push_back(CouplingRow{k_grid[kidx], mean, mean_bound});
    if (mean > 0.0) {
      fit_k.push_back(static_cast<double>(k_grid[kidx]));
      fit_gap.push_back(mean);
    }
    if (mean_bound > 0.0) {
      bound_k.push_back(static_cast<double>(k_grid[kidx]));
      bound_v.push_back(mean_bound);
    }
  }
  if (fit_k.size() >= 3) result.loglog_slope = rate_fit(fit_k, fit_gap);
  if (bound_k.size() >= 3) result.offblock_slope = rate_fit(bound_k, bound_v);
  return result;
}

DecompositionResult decomposition_probe(const ModelSpec& model, long n, int k, int mc_draws,
                                        int bootstrap_replicates, std::uint64_t seed,
                                        MultiplierLaw law, int threads) {
  model.validate();
  const int p = model.spectrum.p;
  if (k < 1 || k > p) throw ConfigError("decomposition_probe: k out of range");
  if (mc_draws < 2) throw ConfigError("decomposition_probe: mc_draws must be at least 2");
  if (bootstrap_replicates < 2)
    throw ConfigError("decomposition_probe: bootstrap_replicates must be at least 2");
  const SymMatrix sigma = population_covariance(model);

  // Marginal laws of the full and projected statistics, common draws.
  std::vector<double> t_full(static_cast<std::size_t>(mc_draws));
  std::vector<double> t_proj(static_cast<std::size_t>(mc_draws));
  parallel_for(mc_draws, threads, [&](std::int64_t i) {
    const auto obs = sample_observations(
        model, n,
        Rng::derive_seed(seed, {seeds::kDecomposition, 1, static_cast<std::uint64_t>(i)}));
    t_full[static_cast<std::size_t>(i)] = t_statistic_cols(obs, sigma);
    t_proj[static_cast<std::size_t>(i)] = projected_t_statistic_cols(obs, sigma, k);
  });
  const auto sample_full = sample_of(std::move(t_full));
  const auto sample_proj = sample_of(std::move(t_proj));

  // Gaussian proxies: population-level from Sigma_k and the model's score
  // operator, conditional from the empirical covariance operator of one
  // dataset. The bootstrap on that dataset reuses one weight stream for the
  // projected and full statistics, so the projection gap is a genuine
  // coupling (and exactly zero at k = p).
  const auto score_op = score_moment_operator(model, k);
  const auto c_op = covariance_operator(sigma.top_left(k), score_op);
  const auto g_norms = gaussian_norm_sample(
      c_op, mc_draws, Rng::derive_seed(seed, {seeds::kDecomposition, 2}));

  const auto obs0 = sample_observations(
      model, n, Rng::derive_seed(seed, {seeds::kDecomposition, 3}));
  const auto c_hat = empirical_covariance_operator(obs0, k);
  const auto g_star_norms = gaussian_norm_sample(
      c_hat, mc_draws, Rng::derive_seed(seed, {seeds::kDecomposition, 4}));

  BootstrapOptions options;
  options.threads = threads;
  const std::uint64_t boot_seed = Rng::derive_seed(seed, {seeds::kDecomposition, 5});
  const auto boot_proj = bootstrap_norms(obs0, law, bootstrap_replicates, boot_seed, k, options);
  const auto boot_full =
      bootstrap_norms(obs0, law, bootstrap_replicates, boot_seed, std::nullopt, options);

  DecompositionResult result;
  result.n = n;
  result.k = k;
  result.projection_gap_data = kolmogorov_distance(sample_full, sample_proj);
  result.gaussian_approx_gap = kolmogorov_distance(sample_proj, g_norms);
  result.operator_comparison_gap = kolmogorov_distance(g_norms, g_star_norms);
  result.operator_comparison_pinsker = gaussian_kl(c_op, c_hat).pinsker_bound;
  result.bootstrap_gaussian_gap = kolmogorov_distance(g_star_norms, boot_proj);
  result.projection_gap_bootstrap = kolmogorov_distance(boot_proj, boot_full);
  result.direct_dk = kolmogorov_distance(sample_full, boot_full);
  return result;
}

MomentResult moment_probe(const ModelSpec& model, const std::vector<long>& n_grid, double q,
                          int mc_draws, std::uint64_t seed, int threads) {
  if (!(q >= 1.0)) throw ConfigError("moment_probe: q must be at least 1");
  if (mc_draws < 1000)
    throw ConfigError("moment_probe: mc_draws must be at least 1000 for a stable moment root");
  if (n_grid.empty()) throw ConfigError("moment_probe: n grid must not be empty");
  MomentResult result;
  result.q = q;
  std::vector<double> fit_n;
  std::vector<double> fit_v;
  std::vector<long> grid = n_grid;
  std::sort(grid.begin(), grid.end());
  for (std::size_t ni = 0; ni < grid.size(); ++ni) {
    const long n = grid[ni];
    const auto sample = reference_distribution(
        model, n, mc_draws, Rng::derive_seed(seed, {seeds::kMoment, ni}), threads);
    const double root_n = std::sqrt(static_cast<double>(n));
    double acc = 0.0;
    for (double t : sample.values()) acc += std::pow(t / root_n, q);
    const double root = std::pow(acc / static_cast<double>(sample.size()), 1.0 / q);
    result.rows.push_back(MomentRow{n, root});
    if (root > 0.0) {
      fit_n.push_back(static_cast<double>(n));
      fit_v.push_back(root);
    }
  }
  if (fit_n.size() >= 3) result.loglog_slope = rate_fit(fit_n, fit_v);
  return result;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << body;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string accuracy_csv(const ExperimentResult& result) {
  std::string csv = accuracy_csv_header();
  for (const auto& rec : result.records) csv += accuracy_csv_rows(result.experiment_id, rec);
  return csv;
}

std::string summary_csv(const ExperimentResult& result) {
  std::ostringstream csv;
  csv << "n,dk_median,dk_q10,dk_q90,slope,slope_stderr,rate_theory_new,rate_theory_old\n";
  for (const auto& rec : result.records)
    csv << rec.n << ',' << format_double(rec.dk_median) << ',' << format_double(rec.dk_q10)
        << ',' << format_double(rec.dk_q90) << ',' << format_double(result.fitted_slope) << ','
        << format_double(result.slope_stderr) << ',' << format_double(result.rate_theory_new)
        << ',' << format_double(result.rate_theory_old) << '\n';
  return csv.str();
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

}  // namespace

json persist(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  const std::string acc = accuracy_csv(result);
  const std::string sum = summary_csv(result);
  write_file(dir / "accuracy.csv", acc);
  write_file(dir / "summary.csv", sum);

  long acc_rows = 0;
  for (const auto& rec : result.records) acc_rows += static_cast<long>(rec.dk_values.size());

  json manifest;
  manifest["config"] = to_json(result.config);
  manifest["master_seed"] = result.config.seed;
  manifest["started_at"] = timestamp_utc();
  manifest["artifact_version"] = kArtifactVersion;
  manifest["tables"] = json::array({
      json{{"name", "accuracy"}, {"file", "accuracy.csv"}, {"rows", acc_rows}},
      json{{"name", "summary"},
           {"file", "summary.csv"},
           {"rows", static_cast<long>(result.records.size())}},
  });
  manifest["experiment_id"] = result.experiment_id;
  manifest["seed_scheme"] = seeds::kSchemeDescription;
  manifest["wall_seconds"] = result.wall_seconds;
  json per_n = json::array();
  for (const auto& rec : result.records)
    per_n.push_back(json{{"n", rec.n},
                         {"k_used", rec.k_used},
                         {"dk_aggregate", rec.dk_aggregate}});
  manifest["per_n"] = per_n;
  manifest["fitted_slope"] = result.fitted_slope;
  manifest["slope_stderr"] = result.slope_stderr;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

ExperimentResult load_result(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw IoError("manifest.json in " + dir.string() + " is not valid JSON: " + e.what());
  }
  ExperimentResult result;
  result.config = config_from_json(manifest.at("config"));
  result.experiment_id = manifest.at("experiment_id").get<std::string>();
  result.fitted_slope = manifest.value("fitted_slope", 0.0);
  result.slope_stderr = manifest.value("slope_stderr", 0.0);
  result.wall_seconds = manifest.value("wall_seconds", 0.0);
  result.rate_theory_new =
      result.config.model.spectrum.beta > 0.5
          ? theoretical_rate(result.config.model.spectrum.beta, result.config.epsilon)
          : 0.0;
  result.rate_theory_old = result.config.model.spectrum.beta > 0.5
                               ? theoretical_rate_previous(result.config.model.spectrum.beta)
                               : 0.0;

  // Rebuild the per-n records from the accuracy table.
  const std::string acc = read_file(dir / "accuracy.csv");
  std::istringstream lines(acc);
  std::string line;
  if (!std::getline(lines, line)) throw IoError("accuracy.csv in " + dir.string() + " is empty");
  std::map<long, AccuracyRecord> by_n;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id, n_s, k_s, r_s, dk_s;
    if (!std::getline(fields, id, ',') || !std::getline(fields, n_s, ',') ||
        !std::getline(fields, k_s, ',') || !std::getline(fields, r_s, ',') ||
        !std::getline(fields, dk_s))
      throw IoError("accuracy.csv in " + dir.string() + ": malformed row \"" + line + "\"");
    const long n = std::stol(n_s);
    auto& rec = by_n[n];
    rec.n = n;
    rec.k_used = std::stoi(k_s);
    rec.dk_values.push_back(std::stod(dk_s));
  }
  for (auto& [n, rec] : by_n) {
    const ScalarSample dks(rec.dk_values);
    rec.dk_median = dks.quantile(0.5);
    rec.dk_q10 = dks.quantile(0.1);
    rec.dk_q90 = dks.quantile(0.9);
    rec.dk_aggregate = aggregate_value(dks, result.config.aggregate);
    result.records.push_back(rec);
  }
  return result;
}

}  // namespace covop
