#include "onebit/cli.hpp"

#include "onebit/bounds.hpp"
#include "onebit/encoders.hpp"
#include "onebit/errors.hpp"
#include "onebit/grid_density.hpp"
#include "onebit/normal.hpp"
#include "onebit/property_checks.hpp"
#include "onebit/sim.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace onebit {

namespace {

struct SimulateOptions {
  std::string config_path;
  std::string out_path = "risk.csv";
  std::optional<double> sigma;
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> beta;
  std::optional<std::int64_t> n_max;
  bool verbose = false;
};

int cmd_simulate(const SimulateOptions& opt) {
  SimConfig config = parse_config_file(opt.config_path);
  if (opt.sigma) config.sigma = *opt.sigma;
  if (opt.trials) config.trials = *opt.trials;
  if (opt.seed) config.seed = *opt.seed;
  if (opt.beta) config.beta = *opt.beta;
  if (opt.n_max) {
    config.n_max = *opt.n_max;
    // Drop explicit checkpoints the shrunken horizon can no longer reach.
    std::erase_if(config.checkpoints,
                  [&](std::int64_t n) { return n > config.n_max; });
  }
  validate_config(config);

  const int workers = resolve_workers(0);
  if (opt.verbose) {
    std::printf("config: %s\n", opt.config_path.c_str());
    std::printf("prior: %s\n", prior_to_string(config.prior).c_str());
    std::printf("sigma=%g n_max=%lld trials=%lld beta=%g seed=%llu workers=%d\n",
                config.sigma, static_cast<long long>(config.n_max),
                static_cast<long long>(config.trials), config.beta,
                static_cast<unsigned long long>(config.seed), workers);
  }

  const auto start = std::chrono::steady_clock::now();
  const RiskCurve curve = run_monte_carlo(config, workers);
  const auto stop = std::chrono::steady_clock::now();
  export_csv(curve, opt.out_path);

  std::printf("wrote %s (%zu scheme(s), %lld trials)\n", opt.out_path.c_str(),
              curve.schemes.size(), static_cast<long long>(curve.trials));
  std::printf("%-16s %10s %13s %13s %10s %14s\n", "scheme", "final_n", "mse",
              "stderr", "n*mse", "n*mse/sigma^2");
  const double s2 = config.sigma * config.sigma;
  for (const SchemeRisk& s : curve.schemes) {
    if (s.points.empty()) continue;
    const RiskPoint& pt = s.points.back();
    std::printf("%-16s %10lld %13.6g %13.6g %10.5f %14.5f\n",
                scheme_name(s.scheme).c_str(), static_cast<long long>(pt.n),
                pt.mse, pt.std_error, pt.n_mse, pt.n_mse / s2);
  }
  std::printf("reference pi*sigma^2/2 = %.10g\n", 0.5 * kPi * s2);
  if (const auto i0 = prior_location_fisher(config.prior)) {
    std::printf("van Trees floor at n=%lld: mse >= %.10g\n",
                static_cast<long long>(config.n_max),
                van_trees_bound(config.n_max, config.sigma, *i0));
  } else {
    std::printf("van Trees floor: undefined for this prior (no location Fisher information)\n");
  }
  if (opt.verbose) {
    const double secs = std::chrono::duration<double>(stop - start).count();
    std::printf("elapsed: %.2f s\n", secs);
  }
  return 0;
}

struct BoundsOptions {
  double sigma = 1.0;
  std::optional<double> sigma_theta;
  std::optional<double> i0;
  std::string prior_text;
  std::optional<std::int64_t> n;
  std::string out_path;  // empty -> stdout
};

int cmd_bounds(const BoundsOptions& opt) {
  std::optional<double> i0 = opt.i0;
  if (!i0 && !opt.prior_text.empty()) {
    const PriorSpec prior = parse_prior(opt.prior_text);
    const auto fisher = prior_location_fisher(prior);
    if (!fisher) {
      throw UndefinedFisherInfoError(
          "the van Trees bound requires a prior with finite location Fisher "
          "information; this prior's density does not vanish at the endpoints "
          "of its support (try --i0 or a gaussian/cosine2 prior)");
    }
    i0 = *fisher;
  }
  if (!i0 && opt.sigma_theta) {
    // Gaussian prior of width sigma_theta matches the CEO setup.
    i0 = 1.0 / (*opt.sigma_theta * *opt.sigma_theta);
  }
  if (!i0 && !opt.sigma_theta) {
    throw std::invalid_argument(
        "bounds: need at least one of --sigma-theta, --i0, --prior");
  }

  std::vector<std::int64_t> ns;
  if (opt.n) {
    ns.push_back(*opt.n);
  } else {
    for (std::int64_t n = 10; n <= 1000000; n *= 10) ns.push_back(n);
  }
  const BoundReport report = make_bound_report(ns, opt.sigma, i0, opt.sigma_theta);
  if (opt.out_path.empty()) {
    std::fputs(bound_report_csv(report).c_str(), stdout);
  } else {
    write_bound_csv(report, opt.out_path);
    const Eigen::Index last = static_cast<Eigen::Index>(report.n.size()) - 1;
    std::printf("wrote %s (%zu row(s))\n", opt.out_path.c_str(), report.n.size());
    std::printf("at n=%lld: van_trees=%.10g ceo_lower=%.10g ceo_upper=%.10g asymptote=%.10g\n",
                static_cast<long long>(report.n.back()), report.van_trees[last],
                report.ceo_lower[last], report.ceo_upper[last], report.asymptote[last]);
  }
  return 0;
}

struct CheckOptions {
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  double limit_scale = 1.0;
};

int cmd_check(const CheckOptions& opt) {
  if (opt.samples < 1) throw std::invalid_argument("check: --samples must be >= 1");
  if (!(opt.limit_scale > 0.0)) {
    throw std::invalid_argument("check: --limit-scale must be > 0");
  }
  const auto reports = run_all_scans(opt.seed, opt.samples, opt.limit_scale);
  bool all_pass = true;
  for (const ScanReport& r : reports) {
    std::printf("[%s] %s: %s (%lld samples)\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.detail.c_str(),
                static_cast<long long>(r.samples));
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

struct FixedPointOptions {
  std::string prior_text;
  std::int64_t grid_m = 4096;
  double tail_mass = 1e-9;
  std::string dump_path;
};

int cmd_fixed_point(const FixedPointOptions& opt) {
  const PriorSpec prior = parse_prior(opt.prior_text);
  const GridDensity density =
      grid_from_prior(prior, static_cast<Eigen::Index>(opt.grid_m), opt.tail_mass);
  const double tau = solve_threshold(density);
  const TruncatedMeans means = truncated_means(density, tau);
  const double residual = tau - 0.5 * (means.m_minus + means.m_plus);
  std::printf("tau      = %.12g\n", tau);
  std::printf("m_minus  = %.12g\n", means.m_minus);
  std::printf("m_plus   = %.12g\n", means.m_plus);
  std::printf("residual = %.3g\n", residual);
  if (!opt.dump_path.empty()) {
    write_density_csv(density, opt.dump_path);
    std::printf("wrote %s\n", opt.dump_path.c_str());
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"One-bit adaptive mean estimation: simulation, bounds, and property checks"};
  app.require_subcommand(1);

  SimulateOptions sim_opt;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Monte Carlo risk curves for the estimation schemes");
  sim->add_option("--config", sim_opt.config_path, "Config file (key = value)")
      ->required();
  sim->add_option("--out", sim_opt.out_path, "Output CSV path (default risk.csv)");
  sim->add_option("--sigma", sim_opt.sigma, "Override noise standard deviation");
  sim->add_option("--trials", sim_opt.trials, "Override Monte Carlo trial count");
  sim->add_option("--seed", sim_opt.seed, "Override master seed");
  sim->add_option("--beta", sim_opt.beta, "Override step-size exponent");
  sim->add_option("--n-max", sim_opt.n_max, "Override sample horizon");
  sim->add_flag("-v,--verbose", sim_opt.verbose, "Echo config and timing");

  BoundsOptions bounds_opt;
  CLI::App* bounds = app.add_subcommand(
      "bounds", "Evaluate the lower/upper bound curves as CSV");
  bounds->add_option("--sigma", bounds_opt.sigma, "Noise standard deviation")
      ->required();
  bounds->add_option("--sigma-theta", bounds_opt.sigma_theta,
                     "Gaussian prior width for the CEO bounds");
  bounds->add_option("--i0", bounds_opt.i0,
                     "Prior location Fisher information for the van Trees curve");
  bounds->add_option("--prior", bounds_opt.prior_text,
                     "Prior spec to derive the Fisher information from");
  bounds->add_option("--n", bounds_opt.n,
                     "Single message count (default: decades 10..10^6)");
  bounds->add_option("--out", bounds_opt.out_path, "CSV path (default: stdout)");

  CheckOptions check_opt;
  CLI::App* check = app.add_subcommand(
      "check", "Randomized audits of the Fisher-information bounds");
  check->add_option("--samples", check_opt.samples, "Sample count (default 100000)");
  check->add_option("--seed", check_opt.seed, "Scan seed (default 1)");
  check->add_option("--limit-scale", check_opt.limit_scale,
                    "Scale the asserted limits (<1 provokes failures; fault injection)");

  FixedPointOptions fp_opt;
  CLI::App* fp = app.add_subcommand(
      "fixed-point", "Solve the threshold fixed point for a prior");
  fp->add_option("--prior", fp_opt.prior_text,
                 "Prior spec, e.g. 'gaussian 0 1' or 'csv density.csv'")
      ->required();
  fp->add_option("--grid-m", fp_opt.grid_m, "Grid size (default 4096)");
  fp->add_option("--tail-mass", fp_opt.tail_mass,
                 "Truncated tail mass for unbounded priors (default 1e-9)");
  fp->add_option("--dump", fp_opt.dump_path, "Write the gridded density as CSV");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("onebit");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_opt);
    if (bounds->parsed()) return cmd_bounds(bounds_opt);
    if (check->parsed()) return cmd_check(check_opt);
    if (fp->parsed()) return cmd_fixed_point(fp_opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::fprintf(stderr, "error: no subcommand\n");
  return 1;
}

}  // namespace onebit
