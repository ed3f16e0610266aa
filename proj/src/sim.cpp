#include "onebit/sim.hpp"

#include "onebit/normal.hpp"
#include "onebit/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace onebit {

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Bayes: return "bayes";
    case Scheme::EmpiricalMean: return "empirical_mean";
    case Scheme::Sgd: return "sgd";
  }
  throw std::logic_error("scheme_name: unreachable");
}

Scheme parse_scheme(const std::string& name) {
  if (name == "bayes") return Scheme::Bayes;
  if (name == "empirical_mean") return Scheme::EmpiricalMean;
  if (name == "sgd") return Scheme::Sgd;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

// ---------------------------------------------------------------------------
// Config

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw std::invalid_argument("config: " + key + ": " + why);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    bad_key(key, "expected a number, got '" + v + "'");
  }
  if (pos != v.size()) bad_key(key, "expected a number, got '" + v + "'");
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    bad_key(key, "expected an integer, got '" + v + "'");
  }
  if (pos != v.size()) bad_key(key, "expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    bad_key(key, "expected an unsigned integer, got '" + v + "'");
  }
  if (pos != v.size()) bad_key(key, "expected an unsigned integer, got '" + v + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::string cleaned = v;
  for (char& ch : cleaned) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream in(cleaned);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::vector<std::int64_t> default_checkpoints(std::int64_t n_max, int per_decade) {
  if (n_max < 1) throw std::invalid_argument("default_checkpoints: n_max must be >= 1");
  if (per_decade < 1) throw std::invalid_argument("default_checkpoints: per_decade must be >= 1");
  std::vector<std::int64_t> out;
  for (int k = per_decade;; ++k) {
    const double v = std::pow(10.0, static_cast<double>(k) / per_decade);
    const auto n = static_cast<std::int64_t>(std::llround(v));
    if (n >= n_max) break;
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  out.push_back(n_max);
  return out;
}

std::vector<std::int64_t> effective_checkpoints(const SimConfig& config) {
  if (config.checkpoints.empty()) {
    return default_checkpoints(config.n_max, config.checkpoints_per_decade);
  }
  std::vector<std::int64_t> out = config.checkpoints;
  if (out.back() != config.n_max) out.push_back(config.n_max);
  return out;
}

std::vector<std::int64_t> scheme_checkpoints(const SimConfig& config, Scheme s) {
  std::vector<std::int64_t> out = effective_checkpoints(config);
  if (s == Scheme::Bayes) {
    while (!out.empty() && out.back() > config.bayes_n_cap) out.pop_back();
  }
  return out;
}

void validate_config(const SimConfig& config) {
  if (!(config.sigma > 0.0) || !std::isfinite(config.sigma)) {
    bad_key("sigma", "must be finite and > 0");
  }
  if (config.n_max < 1) bad_key("n_max", "must be >= 1");
  if (config.trials < 1) bad_key("trials", "must be >= 1");
  if (!(config.beta > 0.0 && config.beta <= 1.0)) bad_key("beta", "must lie in (0, 1]");
  if (config.grid_m < GridDensity::kMinSize) bad_key("grid_m", "must be >= 64");
  if (config.schemes.empty()) bad_key("schemes", "must name at least one scheme");
  for (std::size_t i = 0; i < config.schemes.size(); ++i) {
    for (std::size_t j = i + 1; j < config.schemes.size(); ++j) {
      if (config.schemes[i] == config.schemes[j]) {
        bad_key("schemes", "duplicate scheme '" + scheme_name(config.schemes[i]) + "'");
      }
    }
  }
  if (config.bayes_n_cap < 1) bad_key("bayes_n_cap", "must be >= 1");
  if (config.theta0 && !std::isfinite(*config.theta0)) bad_key("theta0", "must be finite");
  if (!(config.tail_mass > 0.0 && config.tail_mass <= 1e-6)) {
    bad_key("tail_mass", "must lie in (0, 1e-6]");
  }
  if (config.burn_in < 0) bad_key("burn_in", "must be >= 0");
  if (config.checkpoints_per_decade < 1) bad_key("checkpoints", "log rule needs >= 1 per decade");
  const auto& cps = config.checkpoints;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] < 1) bad_key("checkpoints", "entries must be >= 1");
    if (cps[i] > config.n_max) bad_key("checkpoints", "entries must be <= n_max");
    if (i > 0 && !(cps[i - 1] < cps[i])) {
      bad_key("checkpoints", "entries must be strictly increasing");
    }
  }
  const bool want_sgd =
      std::find(config.schemes.begin(), config.schemes.end(), Scheme::Sgd) !=
      config.schemes.end();
  if (want_sgd && config.burn_in >= effective_checkpoints(config).front()) {
    bad_key("burn_in", "must be smaller than the first checkpoint");
  }
  // Exercise the prior constraints (support, parameters) early.
  prior_mean(config.prior);
}

SimConfig parse_config_text(const std::string& text) {
  SimConfig config;
  bool have_prior = false;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) bad_key("line " + std::to_string(lineno), "empty key");
    if (value.empty()) bad_key(key, "empty value");

    if (key == "prior") {
      config.prior = parse_prior(value);
      have_prior = true;
    } else if (key == "sigma") {
      config.sigma = to_double(key, value);
    } else if (key == "n_max") {
      config.n_max = to_int(key, value);
    } else if (key == "trials") {
      config.trials = to_int(key, value);
    } else if (key == "beta") {
      config.beta = to_double(key, value);
    } else if (key == "grid_m") {
      config.grid_m = static_cast<Eigen::Index>(to_int(key, value));
    } else if (key == "seed") {
      config.seed = to_uint(key, value);
    } else if (key == "bayes_n_cap") {
      config.bayes_n_cap = to_int(key, value);
    } else if (key == "burn_in") {
      config.burn_in = to_int(key, value);
    } else if (key == "tail_mass") {
      config.tail_mass = to_double(key, value);
    } else if (key == "theta0") {
      if (value == "prior_mean") {
        config.theta0.reset();
      } else {
        config.theta0 = to_double(key, value);
      }
    } else if (key == "averaging") {
      if (value == "post") {
        config.averaging = Averaging::PostUpdate;
      } else if (value == "pre") {
        config.averaging = Averaging::PreUpdate;
      } else {
        bad_key(key, "expected 'post' or 'pre', got '" + value + "'");
      }
    } else if (key == "schemes") {
      config.schemes.clear();
      for (const std::string& tok : split_list(value)) {
        try {
          config.schemes.push_back(parse_scheme(tok));
        } catch (const std::invalid_argument& e) {
          bad_key(key, e.what());
        }
      }
    } else if (key == "checkpoints") {
      const auto toks = split_list(value);
      if (!toks.empty() && toks[0] == "log") {
        if (toks.size() > 2) bad_key(key, "log rule takes at most one argument");
        config.checkpoints.clear();
        config.checkpoints_per_decade =
            toks.size() == 2 ? static_cast<int>(to_int(key, toks[1])) : 20;
      } else {
        config.checkpoints.clear();
        for (const std::string& tok : toks) {
          config.checkpoints.push_back(to_int(key, tok));
        }
      }
    } else {
      bad_key(key, "unknown key");
    }
  }
  if (!have_prior) bad_key("prior", "missing (required)");
  validate_config(config);
  return config;
}

SimConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// Sampling

double sample_prior(const PriorSpec& prior, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("sample_prior: u must lie in (0,1)");
  }
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformPrior>) {
          return f.a + (f.b - f.a) * u;
        } else if constexpr (std::is_same_v<T, GaussianPrior>) {
          return f.mean + f.stddev * normal_quantile(u);
        } else if constexpr (std::is_same_v<T, CosineSquaredPrior>) {
          // CDF F(t) = (t - c + a) / (2a) + sin(pi (t - c) / a) / (2 pi);
          // strictly increasing, so bisect down to adjacent doubles.
          const double c = f.center, a = f.half_width;
          auto cdf = [&](double t) {
            return (t - c + a) / (2.0 * a) + std::sin(kPi * (t - c) / a) / (2.0 * kPi);
          };
          double lo = c - a, hi = c + a;
          for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (!(mid > lo && mid < hi)) break;
            if (cdf(mid) < u) {
              lo = mid;
            } else {
              hi = mid;
            }
          }
          return 0.5 * (lo + hi);
        } else {
          return sample_from_density(f.density, u);
        }
      },
      prior.family);
}

// ---------------------------------------------------------------------------
// Trials

namespace {

struct RunContext {
  const SimConfig* config;
  std::vector<std::int64_t> checkpoints;
  Eigen::ArrayXd gamma;  // gamma[n] = n^-beta, index 0 unused
  std::optional<BayesState> bayes_template;
  double theta0 = 0.0;
  bool want_sgd = false, want_bayes = false, want_emp = false;
};

RunContext make_context(const SimConfig& config) {
  RunContext ctx;
  ctx.config = &config;
  ctx.checkpoints = effective_checkpoints(config);
  for (Scheme s : config.schemes) {
    if (s == Scheme::Sgd) ctx.want_sgd = true;
    if (s == Scheme::Bayes) ctx.want_bayes = true;
    if (s == Scheme::EmpiricalMean) ctx.want_emp = true;
  }
  ctx.theta0 = config.theta0 ? *config.theta0 : prior_mean(config.prior);
  if (ctx.want_sgd) {
    const GammaSchedule schedule(config.beta);
    ctx.gamma.resize(config.n_max + 1);
    ctx.gamma[0] = 0.0;
    for (std::int64_t k = 1; k <= config.n_max; ++k) {
      ctx.gamma[k] = gamma_at(schedule, k);
    }
  }
  if (ctx.want_bayes) {
    ctx.bayes_template = bayes_init(config.prior, config.grid_m, config.tail_mass);
  }
  return ctx;
}

TrialResult run_trial_impl(const RunContext& ctx, std::int64_t trial_index) {
  const SimConfig& config = *ctx.config;
  SplitMix64 rng(trial_seed(config.seed, trial_index));

  TrialResult result;
  result.trial_index = trial_index;
  result.theta = sample_prior(config.prior, rng.next_double());
  result.sq_errors.resize(config.schemes.size());
  for (std::size_t s = 0; s < config.schemes.size(); ++s) {
    result.sq_errors[s].reserve(scheme_checkpoints(config, config.schemes[s]).size());
  }

  std::optional<SignSgdState> sgd;
  if (ctx.want_sgd) {
    sgd = sgd_init(ctx.theta0, GammaSchedule(config.beta), config.averaging,
                   config.burn_in);
  }
  std::optional<BayesState> bayes;
  if (ctx.want_bayes) bayes = *ctx.bayes_template;
  RunningMean emp;

  std::size_t next_cp = 0;
  for (std::int64_t n = 1; n <= config.n_max; ++n) {
    const double x = result.theta + config.sigma * normal_quantile(rng.next_double());
    if (sgd) sgd_step(*sgd, x, ctx.gamma[n]);
    if (bayes && n <= config.bayes_n_cap) {
      const Message msg = bayes_encode(*bayes, x);
      bayes_update(*bayes, msg, config.sigma);
    }
    if (ctx.want_emp) empirical_mean_step(emp, x);

    if (next_cp < ctx.checkpoints.size() && ctx.checkpoints[next_cp] == n) {
      for (std::size_t s = 0; s < config.schemes.size(); ++s) {
        double est;
        switch (config.schemes[s]) {
          case Scheme::Sgd:
            est = sgd_estimate(*sgd);
            break;
          case Scheme::Bayes:
            if (n > config.bayes_n_cap) continue;
            est = bayes->estimate;
            break;
          case Scheme::EmpiricalMean:
            est = empirical_mean(emp);
            break;
          default:
            throw std::logic_error("run_trial: unreachable scheme");
        }
        const double err = est - result.theta;
        result.sq_errors[s].push_back(err * err);
      }
      ++next_cp;
    }
  }
  return result;
}

}  // namespace

TrialResult run_trial(const SimConfig& config, std::int64_t trial_index) {
  validate_config(config);
  if (trial_index < 0 || trial_index >= config.trials) {
    throw std::invalid_argument("run_trial: trial_index out of range");
  }
  return run_trial_impl(make_context(config), trial_index);
}

// ---------------------------------------------------------------------------
// Monte Carlo

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ONEBIT_WORKERS")) {
    const std::string v(env);
    std::size_t pos = 0;
    long parsed = 0;
    try {
      parsed = std::stol(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != v.size() || parsed < 1) {
      throw std::invalid_argument("ONEBIT_WORKERS must be a positive integer, got '" + v + "'");
    }
    return static_cast<int>(parsed);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

RiskCurve run_monte_carlo(const SimConfig& config, int workers) {
  validate_config(config);
  const RunContext ctx = make_context(config);
  const std::int64_t trials = config.trials;

  std::vector<TrialResult> slots(static_cast<std::size_t>(trials));
  const int n_workers =
      std::max(1, std::min<int>(resolve_workers(workers), static_cast<int>(trials)));

  if (n_workers == 1) {
    for (std::int64_t i = 0; i < trials; ++i) {
      try {
        slots[static_cast<std::size_t>(i)] = run_trial_impl(ctx, i);
      } catch (const std::exception& e) {
        throw std::runtime_error("trial " + std::to_string(i) + " failed: " + e.what());
      }
    }
  } else {
    std::atomic<std::int64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::int64_t i = next.fetch_add(1);
        if (i >= trials) break;
        try {
          slots[static_cast<std::size_t>(i)] = run_trial_impl(ctx, i);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) {
            first_error = std::make_exception_ptr(std::runtime_error(
                "trial " + std::to_string(i) + " failed: " + e.what()));
          }
          failed.store(true, std::memory_order_relaxed);
          break;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // Reduce in trial order (two passes), so the curve does not depend on
  // which worker finished first.
  RiskCurve curve;
  curve.sigma = config.sigma;
  curve.trials = trials;
  for (std::size_t s = 0; s < config.schemes.size(); ++s) {
    SchemeRisk risk;
    risk.scheme = config.schemes[s];
    const auto cps = scheme_checkpoints(config, config.schemes[s]);
    for (std::size_t c = 0; c < cps.size(); ++c) {
      double sum = 0.0;
      for (std::int64_t i = 0; i < trials; ++i) {
        sum += slots[static_cast<std::size_t>(i)].sq_errors[s][c];
      }
      const double mse = sum / static_cast<double>(trials);
      double var = 0.0;
      if (trials > 1) {
        for (std::int64_t i = 0; i < trials; ++i) {
          const double d = slots[static_cast<std::size_t>(i)].sq_errors[s][c] - mse;
          var += d * d;
        }
        var /= static_cast<double>(trials - 1);
      }
      RiskPoint pt;
      pt.n = cps[c];
      pt.mse = mse;
      pt.std_error = trials > 1 ? std::sqrt(var / static_cast<double>(trials)) : 0.0;
      pt.n_mse = static_cast<double>(pt.n) * mse;
      risk.points.push_back(pt);
    }
    curve.schemes.push_back(std::move(risk));
  }
  return curve;
}

// ---------------------------------------------------------------------------
// CSV

std::string risk_curve_csv(const RiskCurve& curve) {
  std::vector<const SchemeRisk*> order;
  order.reserve(curve.schemes.size());
  for (const SchemeRisk& s : curve.schemes) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const SchemeRisk* a, const SchemeRisk* b) {
    return scheme_name(a->scheme) < scheme_name(b->scheme);
  });

  std::string out = "n,scheme,mse,stderr,n_mse\n";
  char buf[160];
  for (const SchemeRisk* s : order) {
    const std::string name = scheme_name(s->scheme);
    for (const RiskPoint& pt : s->points) {
      std::snprintf(buf, sizeof(buf), "%lld,%s,%.17g,%.17g,%.17g\n",
                    static_cast<long long>(pt.n), name.c_str(), pt.mse,
                    pt.std_error, pt.n_mse);
      out += buf;
    }
  }
  return out;
}

void export_csv(const RiskCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_csv: cannot open " + path);
  out << risk_curve_csv(curve);
  if (!out) throw std::runtime_error("export_csv: write failed for " + path);
}

}  // namespace onebit
