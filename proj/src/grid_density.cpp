#include "onebit/grid_density.hpp"

#include "onebit/errors.hpp"
#include "onebit/normal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace onebit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinSideMass = 1e-12;

// Shifted log weights below this are flushed to an exact zero density. Against
// the unit-scale peak exp(0) = 1 they could contribute at most ~1e-296 of the
// mass, far below double resolution, while letting them underflow gradually
// carpets the tail with subnormals whose microcode assists slow every
// downstream pass (quadratures, prefix sums) by an order of magnitude once a
// posterior concentrates.
constexpr double kLogFlush = -690.0;

std::string describe(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

GridDensity::GridDensity(double lo, double hi, Eigen::ArrayXd log_density)
    : lo_(lo), hi_(hi) {
  const Eigen::Index m = log_density.size();
  if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi)) {
    throw std::invalid_argument("GridDensity: need finite lo < hi");
  }
  if (m < kMinSize) {
    throw std::invalid_argument("GridDensity: grid needs at least 64 points");
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const double v = log_density[j];
    if (std::isnan(v) || v == kInf) {
      throw std::invalid_argument("GridDensity: log density must be < +inf and not NaN");
    }
  }

  step_ = (hi - lo) / static_cast<double>(m - 1);
  t_ = Eigen::ArrayXd::LinSpaced(m, lo, hi);

  // Normalize in log space: shift by the max, trapezoid-sum the shifted
  // weights, then subtract log of the integral. The shifted sum is >= 0.5
  // (the max element contributes 1, endpoint halving at worst), so the log
  // is always safe once any mass exists at all.
  const double max_lp = log_density.maxCoeff();
  if (!std::isfinite(max_lp)) {
    throw GridExhaustionError("GridDensity: density has no mass anywhere on the grid");
  }
  Eigen::ArrayXd shifted = log_density - max_lp;
  Eigen::ArrayXd w =
      (shifted >= kLogFlush).select(shifted.max(kLogFlush).exp(), 0.0);
  const double core = w.sum() - 0.5 * (w[0] + w[m - 1]);
  const double log_integral = max_lp + std::log(core * step_);
  if (!std::isfinite(log_integral)) {
    throw GridExhaustionError("GridDensity: normalizer is not finite");
  }

  log_p_ = std::move(log_density);
  log_p_ -= log_integral;
  p_ = w / (core * step_);
}

double trapezoid_mass(const GridDensity& d) {
  const Eigen::ArrayXd& p = d.density();
  return d.step() * (p.sum() - 0.5 * (p[0] + p[p.size() - 1]));
}

double conditional_mean(const GridDensity& d) {
  const Eigen::ArrayXd& p = d.density();
  const Eigen::ArrayXd& t = d.grid();
  const Eigen::Index m = p.size();
  const double core =
      (t * p).sum() - 0.5 * (t[0] * p[0] + t[m - 1] * p[m - 1]);
  return d.step() * core;
}

namespace {

// Prefix trapezoid integrals of p and t*p up to each grid point, plus exact
// splitting of the cell containing an interior cut. Built once per density,
// then every cut evaluation is O(log m) at worst.
struct CumulativeTrapezoid {
  const GridDensity* d;
  std::vector<double> mass;    // integral of p over [lo, t_j]
  std::vector<double> moment;  // integral of t*p over [lo, t_j]

  explicit CumulativeTrapezoid(const GridDensity& density) : d(&density) {
    const Eigen::ArrayXd& p = d->density();
    const Eigen::ArrayXd& t = d->grid();
    const Eigen::Index m = p.size();
    const double h = d->step();
    mass.resize(static_cast<std::size_t>(m));
    moment.resize(static_cast<std::size_t>(m));
    mass[0] = 0.0;
    moment[0] = 0.0;
    for (Eigen::Index j = 1; j < m; ++j) {
      mass[j] = mass[j - 1] + 0.5 * h * (p[j - 1] + p[j]);
      moment[j] = moment[j - 1] + 0.5 * h * (t[j - 1] * p[j - 1] + t[j] * p[j]);
    }
  }

  double total_mass() const { return mass.back(); }
  double total_moment() const { return moment.back(); }

  // Integrals over [lo, x] for interior x; the boundary cell is split with
  // linear interpolation of p (and of t*p, which is quadratic-exact enough:
  // t*p is itself interpolated linearly between nodes, consistent with the
  // trapezoid rule used everywhere else).
  void left_of(double x, double* mass_out, double* moment_out) const {
    const Eigen::ArrayXd& p = d->density();
    const Eigen::ArrayXd& t = d->grid();
    const double h = d->step();
    const Eigen::Index m = p.size();
    Eigen::Index j = static_cast<Eigen::Index>((x - d->lo()) / h);
    j = std::clamp<Eigen::Index>(j, 0, m - 2);
    const double dx = x - t[j];
    const double frac = dx / h;
    const double px = p[j] + frac * (p[j + 1] - p[j]);
    const double qj = t[j] * p[j];
    const double qx = qj + frac * (t[j + 1] * p[j + 1] - qj);
    *mass_out = mass[j] + 0.5 * dx * (p[j] + px);
    *moment_out = moment[j] + 0.5 * dx * (qj + qx);
  }
};

struct SplitParts {
  double mass_minus, moment_minus, mass_plus, moment_plus;
};

SplitParts split_at(const CumulativeTrapezoid& cum, double tau) {
  SplitParts s;
  cum.left_of(tau, &s.mass_minus, &s.moment_minus);
  s.mass_plus = cum.total_mass() - s.mass_minus;
  s.moment_plus = cum.total_moment() - s.moment_minus;
  return s;
}

}  // namespace

TruncatedMeans truncated_means(const GridDensity& d, double tau) {
  if (!(tau > d.lo() && tau < d.hi())) {
    throw std::invalid_argument("truncated_means: tau must lie strictly inside (lo, hi)");
  }
  const CumulativeTrapezoid cum(d);
  const SplitParts s = split_at(cum, tau);
  if (s.mass_minus < kMinSideMass || s.mass_plus < kMinSideMass) {
    throw DegenerateSplitError(
        "truncated_means: a side of the cut at tau=" + describe(tau) +
        " carries less than 1e-12 mass");
  }
  return {s.moment_minus / s.mass_minus, s.moment_plus / s.mass_plus};
}

double solve_threshold(const GridDensity& d, double rel_tol) {
  if (!(rel_tol > 0.0)) {
    throw std::invalid_argument("solve_threshold: rel_tol must be > 0");
  }
  const CumulativeTrapezoid cum(d);
  const Eigen::ArrayXd& t = d.grid();
  const Eigen::Index m = d.size();
  const double total = cum.total_mass();

  // Innermost grid points with at least the minimum mass on their outer
  // side; the fixed point of a proper density lives between them.
  Eigen::Index jl = 1;
  while (jl < m - 1 && cum.mass[jl] < kMinSideMass) ++jl;
  Eigen::Index jr = m - 2;
  while (jr > 0 && total - cum.mass[jr] < kMinSideMass) --jr;
  if (jl > jr) {
    throw BracketFailureError(
        "solve_threshold: density mass is confined to a single cell");
  }

  auto residual = [&](double x) {
    const SplitParts s = split_at(cum, x);
    const double m_minus = s.moment_minus / s.mass_minus;
    const double m_plus = s.moment_plus / s.mass_plus;
    return x - 0.5 * (m_minus + m_plus);
  };

  double xl = t[jl];
  double xr = t[jr];
  double gl = residual(xl);
  double gr = residual(xr);
  if (gl == 0.0) return xl;
  if (gr == 0.0) return xr;
  if (!(gl < 0.0 && gr > 0.0)) {
    throw BracketFailureError(
        "solve_threshold: no sign change over the grid (residuals " +
        describe(gl) + " and " + describe(gr) + ")");
  }

  const double tol = rel_tol * (d.hi() - d.lo());
  for (int it = 0; it < 200 && (xr - xl) > tol; ++it) {
    const double mid = 0.5 * (xl + xr);
    const double gm = residual(mid);
    if (gm == 0.0) return mid;
    if (gm < 0.0) {
      xl = mid;
    } else {
      xr = mid;
    }
  }
  return 0.5 * (xl + xr);
}

GridDensity posterior_update(const GridDensity& d, int message, double tau,
                             double sigma) {
  if (message != 1 && message != -1) {
    throw std::invalid_argument("posterior_update: message must be +1 or -1");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("posterior_update: sigma must be finite and > 0");
  }
  if (!std::isfinite(tau)) {
    throw std::invalid_argument("posterior_update: tau must be finite");
  }
  const double scale = static_cast<double>(message) / sigma;
  Eigen::ArrayXd new_lp =
      d.log_density() +
      ((d.grid() - tau) * scale).unaryExpr([](double z) { return log_std_normal_cdf(z); });
  if (!std::isfinite(new_lp.maxCoeff())) {
    throw GridExhaustionError(
        "posterior_update: update drove all grid mass to zero");
  }
  return GridDensity(d.lo(), d.hi(), std::move(new_lp));
}

bool is_log_concave(const GridDensity& d, double tol) {
  const Eigen::ArrayXd& lp = d.log_density();
  const Eigen::Index m = lp.size();
  for (Eigen::Index j = 1; j + 1 < m; ++j) {
    if (lp[j] == -kInf) return false;  // interior hole
    const double d2 = lp[j + 1] - 2.0 * lp[j] + lp[j - 1];
    if (std::isnan(d2) || d2 > tol) return false;
  }
  return true;
}

double sample_from_density(const GridDensity& d, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("sample_from_density: u must lie in (0,1)");
  }
  const CumulativeTrapezoid cum(d);
  const double target = u * cum.total_mass();
  const auto it = std::upper_bound(cum.mass.begin(), cum.mass.end(), target);
  Eigen::Index j = static_cast<Eigen::Index>(it - cum.mass.begin()) - 1;
  j = std::clamp<Eigen::Index>(j, 0, d.size() - 2);

  const Eigen::ArrayXd& p = d.density();
  const double h = d.step();
  const double c = (target - cum.mass[j]) / h;  // mass still needed, in h units
  const double pj = p[j];
  const double dp = p[j + 1] - pj;
  double s;
  if (c <= 0.0) {
    s = 0.0;
  } else {
    const double disc = std::sqrt(std::max(0.0, pj * pj + 2.0 * dp * c));
    const double denom = pj + disc;
    s = denom > 0.0 ? 2.0 * c / denom : 0.5;
  }
  s = std::clamp(s, 0.0, 1.0);
  return std::clamp(d.grid()[j] + s * h, d.lo(), d.hi());
}

// ---------------------------------------------------------------------------
// Priors

namespace {

std::vector<std::string> tokenize(const std::string& text) {
  std::string cleaned = text;
  for (char& ch : cleaned) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream in(cleaned);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

double parse_number(const std::string& tok, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("parse_prior: bad " + what + " '" + tok + "'");
  }
  if (pos != tok.size()) {
    throw std::invalid_argument("parse_prior: bad " + what + " '" + tok + "'");
  }
  return v;
}

}  // namespace

PriorSpec parse_prior(const std::string& text) {
  const auto tok = tokenize(text);
  if (tok.empty()) throw std::invalid_argument("parse_prior: empty prior spec");
  const std::string& family = tok[0];
  auto need = [&](std::size_t n) {
    if (tok.size() != n + 1) {
      throw std::invalid_argument("parse_prior: '" + family + "' takes " +
                                  std::to_string(n) + " argument(s)");
    }
  };
  if (family == "uniform") {
    need(2);
    const double a = parse_number(tok[1], "lower endpoint");
    const double b = parse_number(tok[2], "upper endpoint");
    if (!(a < b)) throw std::invalid_argument("parse_prior: uniform needs a < b");
    return {UniformPrior{a, b}};
  }
  if (family == "gaussian" || family == "normal") {
    need(2);
    const double mean = parse_number(tok[1], "mean");
    const double sd = parse_number(tok[2], "stddev");
    if (!(sd > 0.0)) throw std::invalid_argument("parse_prior: gaussian needs stddev > 0");
    return {GaussianPrior{mean, sd}};
  }
  if (family == "cosine2" || family == "cosine_squared") {
    need(2);
    const double c = parse_number(tok[1], "center");
    const double a = parse_number(tok[2], "half_width");
    if (!(a > 0.0)) throw std::invalid_argument("parse_prior: cosine2 needs half_width > 0");
    return {CosineSquaredPrior{c, a}};
  }
  if (family == "csv") {
    need(1);
    return {ExplicitPrior{read_density_csv(tok[1])}};
  }
  throw std::invalid_argument("parse_prior: unknown prior family '" + family + "'");
}

std::string prior_to_string(const PriorSpec& prior) {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformPrior>) {
          return "uniform " + describe(f.a) + " " + describe(f.b);
        } else if constexpr (std::is_same_v<T, GaussianPrior>) {
          return "gaussian " + describe(f.mean) + " " + describe(f.stddev);
        } else if constexpr (std::is_same_v<T, CosineSquaredPrior>) {
          return "cosine2 " + describe(f.center) + " " + describe(f.half_width);
        } else {
          return "explicit grid density on [" + describe(f.density.lo()) + ", " +
                 describe(f.density.hi()) + "]";
        }
      },
      prior.family);
}

double prior_mean(const PriorSpec& prior) {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformPrior>) {
          return 0.5 * (f.a + f.b);
        } else if constexpr (std::is_same_v<T, GaussianPrior>) {
          return f.mean;
        } else if constexpr (std::is_same_v<T, CosineSquaredPrior>) {
          return f.center;
        } else {
          return conditional_mean(f.density);
        }
      },
      prior.family);
}

namespace {

// Numeric location Fisher information of a gridded density: integrate
// p * (dlog p/dt)^2 with central differences, skipping cells whose density
// is too small to carry information (and whose score blows up numerically).
std::optional<double> numeric_location_fisher(const GridDensity& d) {
  const Eigen::ArrayXd& p = d.density();
  const Eigen::ArrayXd& lp = d.log_density();
  const Eigen::Index m = d.size();
  const double pmax = p.maxCoeff();
  if (!(p[0] <= 1e-6 * pmax && p[m - 1] <= 1e-6 * pmax)) {
    return std::nullopt;  // density does not vanish at the support edge
  }
  const double h = d.step();
  const double floor = 1e-12 * pmax;
  double acc = 0.0;
  double first = -1.0, last = -1.0;
  for (Eigen::Index j = 1; j + 1 < m; ++j) {
    // the neighbors must carry real mass too: at a hard support edge the
    // stored log density is a rounding artifact (for instance cos(pi/2)
    // evaluating to 6e-17 instead of 0), and a central difference through it
    // reads an enormous fake score exactly where p is small but not yet
    // negligible
    if (!(p[j] > floor && p[j - 1] > floor && p[j + 1] > floor)) continue;
    const double score = (lp[j + 1] - lp[j - 1]) / (2.0 * h);
    const double w = p[j] * score * score;
    if (first < 0.0) first = w;
    last = w;
    acc += w;
  }
  if (first < 0.0) return std::nullopt;
  return h * (acc - 0.5 * (first + last));
}

}  // namespace

std::optional<double> prior_location_fisher(const PriorSpec& prior) {
  return std::visit(
      [](const auto& f) -> std::optional<double> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformPrior>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, GaussianPrior>) {
          return 1.0 / (f.stddev * f.stddev);
        } else if constexpr (std::is_same_v<T, CosineSquaredPrior>) {
          return kPi * kPi / (f.half_width * f.half_width);
        } else {
          return numeric_location_fisher(f.density);
        }
      },
      prior.family);
}

namespace {

GridDensity regrid_log_linear(const GridDensity& src, Eigen::Index m) {
  if (m == src.size()) {
    return GridDensity(src.lo(), src.hi(), src.log_density());
  }
  const Eigen::ArrayXd& lp = src.log_density();
  const Eigen::ArrayXd t_new = Eigen::ArrayXd::LinSpaced(m, src.lo(), src.hi());
  Eigen::ArrayXd out(m);
  const double h = src.step();
  const Eigen::Index last = src.size() - 1;
  for (Eigen::Index j = 0; j < m; ++j) {
    double pos = (t_new[j] - src.lo()) / h;
    Eigen::Index k = std::clamp<Eigen::Index>(
        static_cast<Eigen::Index>(pos), 0, last - 1);
    double f = std::clamp(pos - static_cast<double>(k), 0.0, 1.0);
    if (f == 0.0) {
      out[j] = lp[k];
    } else if (f == 1.0) {
      out[j] = lp[k + 1];
    } else if (lp[k] == -kInf || lp[k + 1] == -kInf) {
      out[j] = -kInf;
    } else {
      out[j] = lp[k] + f * (lp[k + 1] - lp[k]);
    }
  }
  return GridDensity(src.lo(), src.hi(), std::move(out));
}

}  // namespace

GridDensity grid_from_prior(const PriorSpec& prior, Eigen::Index m,
                            double tail_mass) {
  return std::visit(
      [&](const auto& f) -> GridDensity {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformPrior>) {
          return GridDensity(f.a, f.b, Eigen::ArrayXd::Zero(m));
        } else if constexpr (std::is_same_v<T, GaussianPrior>) {
          if (!(tail_mass > 0.0 && tail_mass <= 1e-6)) {
            throw std::invalid_argument(
                "grid_from_prior: tail_mass must lie in (0, 1e-6] for unbounded priors");
          }
          // lower-tail form: quantile(p) near p=0 keeps full relative
          // precision, while 1 - p/2 near 1 would round half the digits away
          const double z = -normal_quantile(0.5 * tail_mass);
          const double lo = f.mean - z * f.stddev;
          const double hi = f.mean + z * f.stddev;
          Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(m, lo, hi);
          Eigen::ArrayXd lp =
              -0.5 * ((t - f.mean) / f.stddev).square() - std::log(f.stddev) -
              kLogSqrt2Pi;
          return GridDensity(lo, hi, std::move(lp));
        } else if constexpr (std::is_same_v<T, CosineSquaredPrior>) {
          const double lo = f.center - f.half_width;
          const double hi = f.center + f.half_width;
          Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(m, lo, hi);
          Eigen::ArrayXd lp =
              2.0 * ((t - f.center) * (0.5 * kPi / f.half_width))
                        .cos()
                        .abs()
                        .log() -
              std::log(f.half_width);
          return GridDensity(lo, hi, std::move(lp));
        } else {
          GridDensity g = regrid_log_linear(f.density, m);
          if (!is_log_concave(g)) {
            throw std::invalid_argument(
                "grid_from_prior: explicit prior density is not log-concave");
          }
          return g;
        }
      },
      prior.family);
}

// ---------------------------------------------------------------------------
// CSV

void write_density_csv(const GridDensity& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_density_csv: cannot open " + path);
  out << "t,density\n";
  char buf[80];
  for (Eigen::Index j = 0; j < d.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", d.grid()[j], d.density()[j]);
    out << buf;
  }
  if (!out) throw std::runtime_error("write_density_csv: write failed for " + path);
}

GridDensity read_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_density_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_density_csv: empty file " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,density") {
    throw std::runtime_error("read_density_csv: expected header 't,density' in " + path);
  }
  std::vector<double> ts, ps;
  std::size_t lineno = 1;
  auto parse_field = [&](const std::string& tok, const char* what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != tok.size()) {
      throw std::runtime_error("read_density_csv: bad " + std::string(what) +
                               " '" + tok + "' at row " +
                               std::to_string(lineno) + " in " + path);
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("read_density_csv: malformed row " +
                               std::to_string(lineno) + " in " + path);
    }
    ts.push_back(parse_field(line.substr(0, comma), "grid value"));
    ps.push_back(parse_field(line.substr(comma + 1), "density value"));
  }
  const Eigen::Index m = static_cast<Eigen::Index>(ts.size());
  if (m < GridDensity::kMinSize) {
    throw std::runtime_error("read_density_csv: need at least 64 rows in " + path);
  }
  const double lo = ts.front();
  const double hi = ts.back();
  const double h = (hi - lo) / static_cast<double>(m - 1);
  Eigen::ArrayXd lp(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double expected = lo + h * static_cast<double>(j);
    if (std::abs(ts[j] - expected) > 1e-9 * (std::abs(hi - lo) + 1.0)) {
      throw std::runtime_error("read_density_csv: grid is not uniform at row " +
                               std::to_string(j + 2) + " in " + path);
    }
    if (ps[j] < 0.0 || std::isnan(ps[j])) {
      throw std::runtime_error("read_density_csv: negative or NaN density at row " +
                               std::to_string(j + 2) + " in " + path);
    }
    lp[j] = ps[j] > 0.0 ? std::log(ps[j]) : -kInf;
  }
  return GridDensity(lo, hi, std::move(lp));
}

}  // namespace onebit
