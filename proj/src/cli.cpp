#include "covop/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "covop/harness.hpp"
#include "covop/seeds.hpp"

namespace covop {

namespace {

namespace fs = std::filesystem;

struct CliOptions {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = "covop_out";
  std::vector<std::string> overrides;
  std::optional<int> threads;
  bool check_config = false;
};

json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("config file not found or unreadable: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return json(text);  // bare word: treat as string
  }
}

// key=value with dotted keys, e.g. model.beta=1.5 or accuracy.n_grid=[100,200].
void apply_override(json& doc, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override \"" + kv + "\" is not of the form key=value");
  const std::string path = kv.substr(0, eq);
  const json value = parse_override_value(kv.substr(eq + 1));
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("override \"" + kv + "\" has an empty path segment");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (!node->is_object() && !node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

const json& require_section(const json& config, const std::string& name) {
  if (!config.contains(name))
    throw ConfigError("config: missing required section \"" + name + "\"");
  return config.at(name);
}

template <typename T>
T require_key(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key)) throw ConfigError(ctx + ": missing required key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(ctx + ": key \"" + key + "\" has the wrong type");
  }
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << body;
  if (!out) throw IoError("write failed: " + path.string());
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

void write_probe_manifest(const fs::path& dir, const json& config,
                          const std::vector<std::string>& overrides, std::uint64_t seed,
                          const json& tables, const json& extras) {
  json manifest;
  manifest["config"] = config;
  manifest["master_seed"] = seed;
  manifest["started_at"] = timestamp_utc();
  manifest["artifact_version"] = kArtifactVersion;
  manifest["tables"] = tables;
  manifest["overrides"] = overrides;
  manifest["seed_scheme"] = seeds::kSchemeDescription;
  for (auto it = extras.begin(); it != extras.end(); ++it) manifest[it.key()] = it.value();
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

int resolve_threads(const CliOptions& opts, const json& config) {
  if (opts.threads) return *opts.threads;
  if (const char* env = std::getenv("COVOP_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (...) {
      throw ConfigError("COVOP_THREADS is not an integer");
    }
  }
  return std::max(1, config.value("threads", 1));
}

ExperimentConfig accuracy_config(const json& config, const std::string& section_name,
                                 int threads) {
  const json& section = require_section(config, section_name);
  ExperimentConfig ec;
  ec.model = model_from_json(require_section(config, "model"));
  ec.n_grid = require_key<std::vector<long>>(section, "n_grid", section_name);
  ec.mc_reference = require_key<int>(section, "mc_reference", section_name);
  ec.bootstrap_replicates = require_key<int>(section, "bootstrap_replicates", section_name);
  ec.datasets_per_n = require_key<int>(section, "datasets_per_n", section_name);
  ec.epsilon = config.value("epsilon", 0.1);
  if (section.contains("k_override") && !section.at("k_override").is_null())
    ec.k_override = section.at("k_override").get<int>();
  ec.seed = require_key<std::uint64_t>(config, "seed", "config");
  ec.law = multiplier_law_from_string(config.value("law", "multinomial_minus_one"));
  ec.threads = threads;
  ec.burn_in = section.value("burn_in", false);
  const std::string agg = section.value("aggregate", "median");
  if (agg == "median") ec.aggregate = Aggregate::median;
  else if (agg == "mean") ec.aggregate = Aggregate::mean;
  else throw ConfigError(section_name + ": aggregate must be \"median\" or \"mean\"");
  ec.self_test = section.value("self_test", false);
  ec.validate();
  return ec;
}

int run_accuracy_like(const CliOptions& opts, const json& config, const std::string& section,
                      bool emphasize_rate) {
  const int threads = resolve_threads(opts, config);
  const ExperimentConfig ec = accuracy_config(config, section, threads);
  const fs::path dir(opts.out_dir);
  std::error_code ec_fs;
  fs::create_directories(dir, ec_fs);
  if (ec_fs) throw IoError("cannot create output directory " + dir.string());

  // Rows are appended as each n completes, so an interrupted or failed run
  // leaves a valid partial table behind; persist() rewrites the same bytes.
  const std::string expid = experiment_id(ec);
  const fs::path partial = dir / "accuracy.csv";
  write_text(partial, accuracy_csv_header());
  const auto result = bootstrap_accuracy(ec, [&](const AccuracyRecord& rec) {
    std::ofstream app(partial, std::ios::binary | std::ios::app);
    if (!app) throw IoError("cannot append to " + partial.string());
    app << accuracy_csv_rows(expid, rec);
    std::printf("n=%ld k=%d dk_median=%s dk_q10=%s dk_q90=%s\n", rec.n, rec.k_used,
                format_double(rec.dk_median).c_str(), format_double(rec.dk_q10).c_str(),
                format_double(rec.dk_q90).c_str());
    std::fflush(stdout);
  });
  json manifest = persist(result, dir);
  manifest["overrides"] = opts.overrides;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  if (result.records.size() >= 3) {
    std::printf("slope=%s stderr=%s rate_theory_new=%s rate_theory_old=%s\n",
                format_double(result.fitted_slope).c_str(),
                format_double(result.slope_stderr).c_str(),
                format_double(result.rate_theory_new).c_str(),
                format_double(result.rate_theory_old).c_str());
    if (emphasize_rate) {
      const double bound = -result.rate_theory_new;
      std::printf("rate check: fitted slope %s vs theory upper-bound slope %s -> %s\n",
                  format_double(result.fitted_slope).c_str(), format_double(bound).c_str(),
                  result.fitted_slope <= bound + 0.1 ? "consistent" : "slower than theory");
    }
  }
  return 0;
}

int run_transition(const CliOptions& opts, const json& config) {
  const int threads = resolve_threads(opts, config);
  const json& section = require_section(config, "transition");
  const auto beta_grid = require_key<std::vector<double>>(section, "beta_grid", "transition");
  const long n = require_key<long>(section, "n", "transition");

  ExperimentConfig base;
  base.model = model_from_json(require_section(config, "model"));
  base.n_grid = {n};
  base.mc_reference = require_key<int>(section, "mc_reference", "transition");
  base.bootstrap_replicates = require_key<int>(section, "bootstrap_replicates", "transition");
  base.datasets_per_n = require_key<int>(section, "datasets_per_n", "transition");
  base.epsilon = config.value("epsilon", 0.1);
  base.seed = require_key<std::uint64_t>(config, "seed", "config");
  base.law = multiplier_law_from_string(config.value("law", "multinomial_minus_one"));
  base.threads = threads;

  const auto rows = transition_probe(beta_grid, n, base);
  std::ostringstream csv;
  csv << "beta,p,n,dk_median\n";
  for (const auto& row : rows) {
    csv << format_double(row.beta) << ',' << row.p << ',' << n << ','
        << format_double(row.dk_median) << '\n';
    std::printf("beta=%s p=%d n=%ld dk_median=%s\n", format_double(row.beta).c_str(), row.p, n,
                format_double(row.dk_median).c_str());
  }
  const fs::path dir(opts.out_dir);
  std::error_code ec_fs;
  fs::create_directories(dir, ec_fs);
  if (ec_fs) throw IoError("cannot create output directory " + dir.string());
  write_text(dir / "transition.csv", csv.str());
  write_probe_manifest(dir, config, opts.overrides, base.seed,
                       json::array({json{{"name", "transition"},
                                         {"file", "transition.csv"},
                                         {"rows", static_cast<long>(rows.size())}}}),
                       json::object());
  return 0;
}

int run_coupling(const CliOptions& opts, const json& config) {
  const int threads = resolve_threads(opts, config);
  const json& section = require_section(config, "coupling");
  const auto model = model_from_json(require_section(config, "model"));
  const long n = require_key<long>(section, "n", "coupling");
  const auto k_grid = require_key<std::vector<int>>(section, "k_grid", "coupling");
  const int mc = require_key<int>(section, "mc_draws", "coupling");
  const auto seed = require_key<std::uint64_t>(config, "seed", "config");

  const auto result = coupling_probe(model, n, k_grid, mc, seed, threads);
  std::ostringstream csv;
  csv << "k,mean_abs_gap,mean_offblock_bound\n";
  for (const auto& row : result.rows) {
    csv << row.k << ',' << format_double(row.mean_abs_gap) << ','
        << format_double(row.mean_offblock_bound) << '\n';
    std::printf("k=%d mean_abs_gap=%s offblock_bound=%s\n", row.k,
                format_double(row.mean_abs_gap).c_str(),
                format_double(row.mean_offblock_bound).c_str());
  }
  json extras;
  if (result.loglog_slope) {
    std::printf("coupling slope=%s stderr=%s\n",
                format_double(result.loglog_slope->slope).c_str(),
                format_double(result.loglog_slope->stderr).c_str());
    extras["loglog_slope"] = result.loglog_slope->slope;
    extras["loglog_slope_stderr"] = result.loglog_slope->stderr;
  }
  if (result.offblock_slope) {
    std::printf("offblock slope=%s stderr=%s\n",
                format_double(result.offblock_slope->slope).c_str(),
                format_double(result.offblock_slope->stderr).c_str());
    extras["offblock_slope"] = result.offblock_slope->slope;
  }
  const fs::path dir(opts.out_dir);
  std::error_code ec_fs;
  fs::create_directories(dir, ec_fs);
  if (ec_fs) throw IoError("cannot create output directory " + dir.string());
  write_text(dir / "coupling.csv", csv.str());
  write_probe_manifest(dir, config, opts.overrides, seed,
                       json::array({json{{"name", "coupling"},
                                         {"file", "coupling.csv"},
                                         {"rows", static_cast<long>(result.rows.size())}}}),
                       extras);
  return 0;
}

int run_decompose(const CliOptions& opts, const json& config) {
  const int threads = resolve_threads(opts, config);
  const json& section = require_section(config, "decompose");
  const auto model = model_from_json(require_section(config, "model"));
  const long n = require_key<long>(section, "n", "decompose");
  const int k = require_key<int>(section, "k", "decompose");
  const int mc = require_key<int>(section, "mc_draws", "decompose");
  const int reps = require_key<int>(section, "bootstrap_replicates", "decompose");
  const auto seed = require_key<std::uint64_t>(config, "seed", "config");
  const auto law = multiplier_law_from_string(config.value("law", "multinomial_minus_one"));

  const auto r = decomposition_probe(model, n, k, mc, reps, seed, law, threads);
  std::ostringstream csv;
  csv << "n,k,projection_gap_data,gaussian_approx_gap,operator_comparison_gap,"
         "operator_comparison_pinsker,bootstrap_gaussian_gap,projection_gap_bootstrap,"
         "direct_dk\n";
  csv << r.n << ',' << r.k << ',' << format_double(r.projection_gap_data) << ','
      << format_double(r.gaussian_approx_gap) << ',' << format_double(r.operator_comparison_gap)
      << ',' << format_double(r.operator_comparison_pinsker) << ','
      << format_double(r.bootstrap_gaussian_gap) << ','
      << format_double(r.projection_gap_bootstrap) << ',' << format_double(r.direct_dk) << '\n';
  std::printf(
      "n=%ld k=%d projection=%s gaussian=%s comparison=%s (pinsker=%s) bootstrap=%s "
      "projection*=%s direct=%s\n",
      r.n, r.k, format_double(r.projection_gap_data).c_str(),
      format_double(r.gaussian_approx_gap).c_str(),
      format_double(r.operator_comparison_gap).c_str(),
      format_double(r.operator_comparison_pinsker).c_str(),
      format_double(r.bootstrap_gaussian_gap).c_str(),
      format_double(r.projection_gap_bootstrap).c_str(), format_double(r.direct_dk).c_str());
  const fs::path dir(opts.out_dir);
  std::error_code ec_fs;
  fs::create_directories(dir, ec_fs);
  if (ec_fs) throw IoError("cannot create output directory " + dir.string());
  write_text(dir / "decomposition.csv", csv.str());
  write_probe_manifest(dir, config, opts.overrides, seed,
                       json::array({json{{"name", "decomposition"},
                                         {"file", "decomposition.csv"},
                                         {"rows", 1}}}),
                       json::object());
  return 0;
}

int run_moments(const CliOptions& opts, const json& config) {
  const int threads = resolve_threads(opts, config);
  const json& section = require_section(config, "moments");
  const auto model = model_from_json(require_section(config, "model"));
  const auto n_grid = require_key<std::vector<long>>(section, "n_grid", "moments");
  const double q = require_key<double>(section, "q", "moments");
  const int mc = require_key<int>(section, "mc_draws", "moments");
  const auto seed = require_key<std::uint64_t>(config, "seed", "config");

  const auto result = moment_probe(model, n_grid, q, mc, seed, threads);
  std::ostringstream csv;
  csv << "n,q,moment_root\n";
  for (const auto& row : result.rows) {
    csv << row.n << ',' << format_double(q) << ',' << format_double(row.moment_root) << '\n';
    std::printf("n=%ld moment_root=%s\n", row.n, format_double(row.moment_root).c_str());
  }
  json extras;
  if (result.loglog_slope) {
    std::printf("moment slope=%s stderr=%s\n",
                format_double(result.loglog_slope->slope).c_str(),
                format_double(result.loglog_slope->stderr).c_str());
    extras["loglog_slope"] = result.loglog_slope->slope;
    extras["loglog_slope_stderr"] = result.loglog_slope->stderr;
  }
  const fs::path dir(opts.out_dir);
  std::error_code ec_fs;
  fs::create_directories(dir, ec_fs);
  if (ec_fs) throw IoError("cannot create output directory " + dir.string());
  write_text(dir / "moments.csv", csv.str());
  write_probe_manifest(dir, config, opts.overrides, seed,
                       json::array({json{{"name", "moments"},
                                         {"file", "moments.csv"},
                                         {"rows", static_cast<long>(result.rows.size())}}}),
                       extras);
  return 0;
}

int run_simulate(const CliOptions& opts, const json& config) {
  const json& section = require_section(config, "simulate");
  const auto model = model_from_json(require_section(config, "model"));
  const long n = require_key<long>(section, "n", "simulate");
  const auto seed = require_key<std::uint64_t>(config, "seed", "config");

  const Dataset ds = sample_dataset(model, n, seed);
  std::ostringstream csv;
  for (Index j = 0; j < ds.p(); ++j) csv << (j ? "," : "") << 'x' << (j + 1);
  csv << '\n';
  for (Index i = 0; i < ds.n(); ++i) {
    for (Index j = 0; j < ds.p(); ++j)
      csv << (j ? "," : "") << format_double(ds.values(i, j));
    csv << '\n';
  }
  const fs::path dir(opts.out_dir);
  std::error_code ec_fs;
  fs::create_directories(dir, ec_fs);
  if (ec_fs) throw IoError("cannot create output directory " + dir.string());
  write_text(dir / "dataset.csv", csv.str());
  write_probe_manifest(dir, config, opts.overrides, seed,
                       json::array({json{{"name", "dataset"},
                                         {"file", "dataset.csv"},
                                         {"rows", static_cast<long>(ds.n())}}}),
                       json::object());
  std::printf("n=%ld p=%ld family=%s written to %s\n", static_cast<long>(ds.n()),
              static_cast<long>(ds.p()), family_name(model.family).c_str(),
              opts.out_dir.c_str());
  return 0;
}

// Analytic-vs-empirical consistency suite over the symmetric-space algebra.
int run_theory_check(const CliOptions& opts, const json& config) {
  (void)opts;
  const std::uint64_t seed = config.value("seed", std::uint64_t{7});
  int failures = 0;
  const auto report = [&](const char* name, bool ok, const std::string& detail) {
    std::printf("%s %s (%s)\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    if (!ok) ++failures;
  };

  {  // closed-form spectra of the three operator builders
    bool ok = true;
    double worst = 0.0;
    for (int d = 2; d <= 8; ++d) {
      const Index q = sym_vec_size(d);
      for (double v : {2.0, 0.8, 8.0, 0.0}) {
        const auto ev = fourth_moment_iid(d, v).eigenvalues();
        Eigen::VectorXd expect(q);
        for (Index i = 0; i < q; ++i) expect[i] = i < d ? v : 2.0;
        std::vector<double> want(expect.data(), expect.data() + q);
        std::sort(want.begin(), want.end());
        for (Index i = 0; i < q; ++i) worst = std::max(worst, std::abs(ev[i] - want[i]));
      }
      for (double r : {1.2, 0.9, 1.0}) {
        const auto ev = fourth_moment_elliptical(d, r).eigenvalues();
        std::vector<double> want(static_cast<std::size_t>(q), 2.0 * r);
        want.back() = (r - 1.0) * d + 2.0 * r;
        std::sort(want.begin(), want.end());
        for (Index i = 0; i < q; ++i) worst = std::max(worst, std::abs(ev[i] - want[i]));
      }
      for (double v : {0.0, 1.0, 2.5}) {
        const auto ev = fourth_moment_scale_mixture(d, v).eigenvalues();
        worst = std::max(worst, std::abs(ev[q - 1] - ((d + 2.0) * v + 2.0)));
      }
    }
    ok = worst <= 1e-10;
    report("operator-spectra", ok, "max deviation " + format_double(worst));
  }

  {  // Chat = R Jhat R, an exact algebraic identity
    const auto model = ModelSpec::kl(SpectrumSpec{1.0, 5, 1.0}, ScoreLaw::gaussian());
    const auto obs = sample_observations(model, 400, Rng::derive_seed(seed, {1}));
    const int k = 4;
    const auto c_hat = empirical_covariance_operator(obs, k);
    const Eigen::VectorXd lambda = model.spectrum.eigenvalues().head(k);
    Eigen::MatrixXd scores = obs.topRows(k).transpose();
    for (int j = 0; j < k; ++j) scores.col(j) /= std::sqrt(lambda[j]);
    const auto j_hat = empirical_fourth_moment(scores, Centering::sample_mean);
    const Eigen::MatrixXd r = sym_conjugation(
        Eigen::MatrixXd(lambda.cwiseSqrt().asDiagonal()));
    const Eigen::MatrixXd recon = r * j_hat.rep * r;
    const double err = (recon - c_hat.rep).cwiseAbs().maxCoeff();
    report("covariance-operator-identity", err <= 1e-10, "max deviation " + format_double(err));
  }

  {  // MC variance of <A, zz^T> against the operator quadratic form
    bool ok = true;
    std::string detail;
    const SpectrumSpec spec{1.0, 8, 1.0};
    const std::vector<ModelSpec> models = {
        ModelSpec::kl(spec, ScoreLaw::standardized_exponential()),
        ModelSpec::elliptical(spec, EtaLaw::gamma_p_1()),
        ModelSpec::mp(spec, ScoreLaw::standardized_uniform())};
    const int d = 4;
    const long draws = 50000;
    int model_idx = 0;
    for (const auto& model : models) {
      const auto scores = sample_scores(model, d, draws,
                                        Rng::derive_seed(seed, {2, (std::uint64_t)model_idx}));
      const auto j_op = score_moment_operator(model, d);
      Rng rng = Rng::derive(seed, {3, (std::uint64_t)model_idx});
      for (int rep = 0; rep < 5; ++rep) {
        Eigen::MatrixXd a(d, d);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
        const SymMatrix sym_a{a};
        std::vector<double> form(static_cast<std::size_t>(draws));
        for (long i = 0; i < draws; ++i) {
          const auto z = scores.row(i);
          form[static_cast<std::size_t>(i)] = z * sym_a.mat() * z.transpose();
        }
        double mean = 0.0;
        for (double f : form) mean += f;
        mean /= static_cast<double>(draws);
        double m2 = 0.0;
        double m4 = 0.0;
        for (double f : form) {
          const double c = f - mean;
          m2 += c * c;
          m4 += c * c * c * c;
        }
        m2 /= static_cast<double>(draws);
        m4 /= static_cast<double>(draws);
        const double se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / static_cast<double>(draws));
        const double expect = j_op.pairing(sym_a, sym_a);
        if (std::abs(m2 - expect) > 5.0 * se + 1e-12) {
          ok = false;
          detail = family_name(model.family) + ": |" + format_double(m2) + " - " +
                   format_double(expect) + "| > 5 se";
        }
      }
      ++model_idx;
    }
    report("quadratic-form-variance", ok, ok ? "3 families x 5 forms within 5 se" : detail);
  }

  {  // KL invariance under conjugation, and KL(C, C) = 0
    Rng rng = Rng::derive(seed, {4});
    bool ok = true;
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
      const int d = 3;
      const Index q = sym_vec_size(d);
      Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(q, q, [&]() { return rng.normal(); });
      Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(q, q, [&]() { return rng.normal(); });
      Eigen::MatrixXd c_mat = a * a.transpose() + Eigen::MatrixXd::Identity(q, q);
      Eigen::MatrixXd chat_mat = b * b.transpose() + Eigen::MatrixXd::Identity(q, q);
      const SymOperatorRep c_op(d, 0.5 * (c_mat + c_mat.transpose()));
      const SymOperatorRep chat_op(d, 0.5 * (chat_mat + chat_mat.transpose()));
      Eigen::MatrixXd s = Eigen::MatrixXd::NullaryExpr(d, d, [&]() { return rng.normal(); });
      s = (0.5 * (s + s.transpose())).eval();
      s.diagonal().array() += static_cast<double>(d);
      const Eigen::MatrixXd r = sym_conjugation(s);
      const SymOperatorRep c2(d, Eigen::MatrixXd(r * c_op.rep * r));
      const SymOperatorRep chat2(d, Eigen::MatrixXd(r * chat_op.rep * r));
      const double kl1 = gaussian_kl(c_op, chat_op).divergence;
      const double kl2 = gaussian_kl(c2, chat2).divergence;
      worst = std::max(worst, std::abs(kl1 - kl2) / std::max(1.0, kl1));
      if (gaussian_kl(c_op, c_op).divergence != 0.0) ok = false;
    }
    ok = ok && worst <= 1e-9;
    report("kl-invariance", ok, "max relative deviation " + format_double(worst));
  }

  {  // psi isometry
    Rng rng = Rng::derive(seed, {5});
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
      const int d = 6;
      Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(d, d, [&]() { return rng.normal(); });
      Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(d, d, [&]() { return rng.normal(); });
      a = (0.5 * (a + a.transpose())).eval();
      b = (0.5 * (b + b.transpose())).eval();
      const double dot = sym_vec(a).dot(sym_vec(b));
      const double tr = (a * b).trace();
      worst = std::max(worst, std::abs(dot - tr) / std::max(1.0, a.norm() * b.norm()));
    }
    report("psi-isometry", worst <= 1e-12, "max relative deviation " + format_double(worst));
  }

  return failures == 0 ? 0 : 2;
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
  CLI::App app{"bootstrap experiments for the operator-norm error of sample covariance"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> subcommands = {
      {"simulate", "draw one dataset from the configured model and write it as CSV"},
      {"accuracy", "bootstrap approximation accuracy (d_K) over the configured n grid"},
      {"rate-sweep", "accuracy run with the fitted log-log rate compared against theory"},
      {"transition", "median d_K across a beta grid at a fixed n"},
      {"decompose", "five-term comparison chain between the statistic and its bootstrap"},
      {"theory-check", "analytic-vs-empirical consistency suite (PASS/FAIL per check)"},
      {"coupling", "mean |T_n - T_{n,k}| over a k grid"},
      {"moments", "Monte Carlo moment roots of the covariance error over an n grid"},
  };
  CliOptions opts;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, desc] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", opts.config_path, "JSON config file")->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--set", opts.overrides,
                    "override config entries, dotted key=value; repeatable");
    sub->add_option("--threads", opts.threads, "worker threads (env COVOP_THREADS as fallback)");
    sub->add_flag("--check-config", opts.check_config, "validate the config and exit");
    subs[name] = sub;
  }

  std::vector<const char*> argv;
  argv.push_back("covop");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) opts.subcommand = name;

    json config = load_config_file(opts.config_path);
    for (const auto& kv : opts.overrides) apply_override(config, kv);

    if (opts.check_config) {
      model_from_json(require_section(config, "model"));
      if (!config.contains("seed")) throw ConfigError("config: missing required key \"seed\"");
      require_key<std::uint64_t>(config, "seed", "config");
      if (config.contains("law"))
        multiplier_law_from_string(config.at("law").get<std::string>());
      if (config.contains("accuracy"))
        accuracy_config(config, "accuracy", resolve_threads(opts, config));
      if (config.contains("rate_sweep"))
        accuracy_config(config, "rate_sweep", resolve_threads(opts, config));
      if (config.contains("transition")) {
        const json& s = config.at("transition");
        require_key<std::vector<double>>(s, "beta_grid", "transition");
        require_key<long>(s, "n", "transition");
        require_key<int>(s, "mc_reference", "transition");
        require_key<int>(s, "bootstrap_replicates", "transition");
        require_key<int>(s, "datasets_per_n", "transition");
      }
      if (config.contains("decompose")) {
        const json& s = config.at("decompose");
        require_key<long>(s, "n", "decompose");
        require_key<int>(s, "k", "decompose");
        require_key<int>(s, "mc_draws", "decompose");
        require_key<int>(s, "bootstrap_replicates", "decompose");
      }
      if (config.contains("coupling")) {
        const json& s = config.at("coupling");
        require_key<long>(s, "n", "coupling");
        require_key<std::vector<int>>(s, "k_grid", "coupling");
        require_key<int>(s, "mc_draws", "coupling");
      }
      if (config.contains("moments")) {
        const json& s = config.at("moments");
        require_key<std::vector<long>>(s, "n_grid", "moments");
        require_key<double>(s, "q", "moments");
        require_key<int>(s, "mc_draws", "moments");
      }
      if (config.contains("simulate"))
        require_key<long>(config.at("simulate"), "n", "simulate");
      std::printf("config ok: %s\n", opts.config_path.c_str());
      return 0;
    }

    if (opts.subcommand == "simulate") return run_simulate(opts, config);
    if (opts.subcommand == "accuracy") return run_accuracy_like(opts, config, "accuracy", false);
    if (opts.subcommand == "rate-sweep")
      return run_accuracy_like(opts, config, "rate_sweep", true);
    if (opts.subcommand == "transition") return run_transition(opts, config);
    if (opts.subcommand == "decompose") return run_decompose(opts, config);
    if (opts.subcommand == "theory-check") return run_theory_check(opts, config);
    if (opts.subcommand == "coupling") return run_coupling(opts, config);
    if (opts.subcommand == "moments") return run_moments(opts, config);
    throw ConfigError("unknown subcommand");
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o failure: %s\n", e.what());
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "i/o failure: %s\n", e.what());
    return 3;
  }
}

}  // namespace covop
