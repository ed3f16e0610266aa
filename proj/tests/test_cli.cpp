#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "onebit/bounds.hpp"
#include "onebit/grid_density.hpp"
#include "onebit/normal.hpp"
#include "onebit/sim.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace onebit;

namespace {

namespace fs = std::filesystem;

// The build injects the location of the real binary; every case here drives
// it through the shell so exit codes, stream routing, and flag parsing are
// exercised exactly as a user sees them.
const std::string kCli = ONEBIT_CLI_PATH;

struct CmdResult {
  int status = -1;  // exit status, or -1 if the process died abnormally
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CmdResult run_in(const fs::path& cwd, const std::string& args) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path();
  const fs::path out_path = dir / ("onebit_cli_out_" + std::to_string(counter));
  const fs::path err_path = dir / ("onebit_cli_err_" + std::to_string(counter));
  ++counter;
  std::string cmd = kCli + " " + args + " >" + out_path.string() + " 2>" +
                    err_path.string();
  if (!cwd.empty()) cmd = "cd " + cwd.string() + " && " + cmd;
  const int rc = std::system(cmd.c_str());
  CmdResult r;
  if (WIFEXITED(rc)) r.status = WEXITSTATUS(rc);
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::error_code ec;
  fs::remove(out_path, ec);
  fs::remove(err_path, ec);
  return r;
}

CmdResult run_cmd(const std::string& args) { return run_in({}, args); }

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

// Scratch directory shared by the whole suite; ctest runs suites serially.
struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / "onebit_cli_suite";
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  fs::path file(const char* name) const { return dir / name; }
  fs::path write(const char* name, const std::string& body) const {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << body;
    REQUIRE(out.good());
    return p;
  }
};

const std::string kSimConfig =
    "# small demo run\n"
    "prior = uniform -2 2\n"
    "sigma = 1\n"
    "n_max = 200\n"
    "trials = 3\n"
    "seed = 9\n"
    "grid_m = 257\n"
    "schemes = sgd, empirical_mean\n"
    "checkpoints = 10 50 200\n";

struct BoundRow {
  long long n = 0;
  double vt = 0.0, lo = 0.0, up = 0.0, asym = 0.0;
};

std::vector<BoundRow> parse_bound_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  REQUIRE(std::getline(in, line));
  REQUIRE(line == "n,van_trees,ceo_lower,ceo_upper,asymptote");
  std::vector<BoundRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    BoundRow r;
    REQUIRE(std::sscanf(line.c_str(), "%lld,%lf,%lf,%lf,%lf", &r.n, &r.vt,
                        &r.lo, &r.up, &r.asym) == 5);
    rows.push_back(r);
  }
  return rows;
}

// Reads the number following "<key>" and an '=' sign in a report printout.
double grab_value(const std::string& out, const std::string& key) {
  const auto pos = out.find(key);
  REQUIRE(pos != std::string::npos);
  const auto eq = out.find('=', pos);
  REQUIRE(eq != std::string::npos);
  return std::stod(out.substr(eq + 1));
}

}  // namespace

TEST_CASE("cli: help text and argument errors") {
  const CmdResult top = run_cmd("--help");
  CHECK(top.status == 0);
  for (const char* sub : {"simulate", "bounds", "check", "fixed-point"}) {
    CHECK(contains(top.out, sub));
  }

  const CmdResult sim = run_cmd("simulate --help");
  CHECK(sim.status == 0);
  for (const char* flag : {"--config", "--out", "--sigma", "--trials",
                           "--seed", "--beta", "--n-max", "--verbose"}) {
    CHECK(contains(sim.out, flag));
  }

  const CmdResult bounds = run_cmd("bounds --help");
  CHECK(bounds.status == 0);
  for (const char* flag :
       {"--sigma", "--sigma-theta", "--i0", "--prior", "--n", "--out"}) {
    CHECK(contains(bounds.out, flag));
  }

  const CmdResult check = run_cmd("check --help");
  CHECK(check.status == 0);
  for (const char* flag : {"--samples", "--seed", "--limit-scale"}) {
    CHECK(contains(check.out, flag));
  }

  const CmdResult fp = run_cmd("fixed-point --help");
  CHECK(fp.status == 0);
  for (const char* flag : {"--prior", "--grid-m", "--tail-mass", "--dump"}) {
    CHECK(contains(fp.out, flag));
  }

  CHECK(run_cmd("").status != 0);                        // no subcommand
  CHECK(run_cmd("transmogrify").status != 0);            // unknown subcommand
  CHECK(run_cmd("bounds --sigma 1 --frobnicate").status != 0);
  CHECK(run_cmd("simulate").status != 0);                // --config required
  CHECK(run_cmd("fixed-point").status != 0);             // --prior required
  CHECK(run_cmd("bounds --sigma-theta 1").status != 0);  // --sigma required
}

TEST_CASE("cli simulate: end-to-end run matches the library") {
  Scratch scratch;
  const fs::path cfg = scratch.write("demo.cfg", kSimConfig);
  const fs::path csv = scratch.file("risk_demo.csv");

  const CmdResult r = run_cmd("simulate --config " + cfg.string() + " --out " +
                              csv.string() + " -v");
  REQUIRE(r.status == 0);
  CHECK(r.err.empty());
  CHECK(contains(r.out, "wrote " + csv.string() + " (2 scheme(s), 3 trials)"));
  CHECK(contains(r.out, "prior: uniform -2 2"));
  CHECK(contains(r.out, "reference pi*sigma^2/2 = 1.570796327"));
  CHECK(contains(r.out,
                 "van Trees floor: undefined for this prior (no location "
                 "Fisher information)"));
  CHECK(contains(r.out, "elapsed:"));
  CHECK(contains(r.out, "scheme"));
  CHECK(contains(r.out, "empirical_mean"));
  CHECK(contains(r.out, "sgd"));

  // The file must be byte-identical to running the same config in process;
  // worker count cannot matter.
  SimConfig config = parse_config_file(cfg.string());
  const RiskCurve curve = run_monte_carlo(config, 1);
  CHECK(slurp(csv) == risk_curve_csv(curve));

  std::istringstream in(slurp(csv));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "n,scheme,mse,stderr,n_mse");
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 6);  // two schemes, three checkpoints each
}

TEST_CASE("cli simulate: reruns are byte-identical, new seeds are not") {
  Scratch scratch;
  const fs::path cfg = scratch.write("demo.cfg", kSimConfig);
  const fs::path a = scratch.file("a.csv");
  const fs::path b = scratch.file("b.csv");
  const fs::path c = scratch.file("c.csv");

  const std::string base = "simulate --config " + cfg.string() +
                           " --trials 1 --seed 7 --out ";
  REQUIRE(run_cmd(base + a.string()).status == 0);
  REQUIRE(run_cmd(base + b.string()).status == 0);
  CHECK(slurp(a) == slurp(b));

  REQUIRE(run_cmd("simulate --config " + cfg.string() +
                  " --trials 1 --seed 8 --out " + c.string())
              .status == 0);
  CHECK(slurp(a) != slurp(c));
}

TEST_CASE("cli simulate: flag overrides beat the config file") {
  Scratch scratch;
  const fs::path cfg = scratch.write("demo.cfg", kSimConfig);
  const fs::path csv = scratch.file("override.csv");

  const CmdResult r = run_cmd("simulate --config " + cfg.string() +
                              " --sigma 2 --trials 2 --seed 11 --beta 0.6 "
                              "--n-max 50 --out " +
                              csv.string());
  REQUIRE(r.status == 0);
  // sigma override shows up in the reference line: pi * 4 / 2.
  CHECK(contains(r.out, "reference pi*sigma^2/2 = 6.283185307"));
  CHECK(contains(r.out, "(2 scheme(s), 2 trials)"));

  // Replicate the override semantics in process: checkpoints beyond the new
  // horizon are dropped before validation.
  SimConfig config = parse_config_file(cfg.string());
  config.sigma = 2.0;
  config.trials = 2;
  config.seed = 11;
  config.beta = 0.6;
  config.n_max = 50;
  std::erase_if(config.checkpoints,
                [&](std::int64_t n) { return n > config.n_max; });
  validate_config(config);
  const RiskCurve curve = run_monte_carlo(config, 1);
  CHECK(slurp(csv) == risk_curve_csv(curve));

  // Without --out the CSV lands in the working directory as risk.csv.
  const CmdResult d = run_in(scratch.dir, "simulate --config " + cfg.string() +
                                              " --trials 1 --seed 3");
  REQUIRE(d.status == 0);
  CHECK(contains(d.out, "wrote risk.csv"));
  CHECK(fs::exists(scratch.dir / "risk.csv"));
}

TEST_CASE("cli simulate: failures name the problem") {
  Scratch scratch;

  const CmdResult missing =
      run_cmd("simulate --config " + scratch.file("nope.cfg").string());
  CHECK(missing.status == 1);
  CHECK(contains(missing.err, "error:"));
  CHECK(contains(missing.err, "nope.cfg"));

  const fs::path bad = scratch.write(
      "bad.cfg", "prior = uniform -1 1\nsigma = -2\n");
  const CmdResult invalid = run_cmd("simulate --config " + bad.string());
  CHECK(invalid.status == 1);
  CHECK(contains(invalid.err, "sigma"));

  // A prior with finite location Fisher information gets a van Trees line.
  const fs::path gauss = scratch.write(
      "gauss.cfg",
      "prior = gaussian 0 2\nn_max = 100\ntrials = 2\ngrid_m = 257\n"
      "schemes = empirical_mean\ncheckpoints = 100\n");
  const CmdResult g = run_cmd("simulate --config " + gauss.string() +
                              " --out " + scratch.file("g.csv").string());
  REQUIRE(g.status == 0);
  CHECK(contains(g.out, "van Trees floor at n=100: mse >="));
  const double floor_val = grab_value(g.out, "mse >");
  CHECK(floor_val == doctest::Approx(van_trees_bound(100, 1.0, 0.25)).epsilon(1e-9));
}

TEST_CASE("cli bounds: single-n rows match the library") {
  // i0 = 0 makes the van Trees curve coincide with the asymptote pi/(2n).
  const CmdResult flat = run_cmd("bounds --sigma 1 --i0 0 --n 100");
  REQUIRE(flat.status == 0);
  const auto rows = parse_bound_csv(flat.out);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].n == 100);
  CHECK(rows[0].vt == doctest::Approx(kPi / 200.0).epsilon(1e-12));
  CHECK(rows[0].asym == doctest::Approx(kPi / 200.0).epsilon(1e-12));
  CHECK(std::isnan(rows[0].lo));  // no sigma_theta given
  CHECK(std::isnan(rows[0].up));

  const CmdResult ceo = run_cmd("bounds --sigma 1 --sigma-theta 1 --n 1000000");
  REQUIRE(ceo.status == 0);
  const auto crows = parse_bound_csv(ceo.out);
  REQUIRE(crows.size() == 1);
  CHECK(1e6 * crows[0].lo == doctest::Approx(4.0 / 3.0).epsilon(1e-3));
  CHECK(1e6 * crows[0].up == doctest::Approx(5.0 / 3.0).epsilon(1e-3));
  CHECK(crows[0].vt == van_trees_bound(1000000, 1.0, 1.0));
  CHECK(crows[0].lo == ceo_lower_bound(1000000, 1.0, 1.0));
  CHECK(crows[0].up == ceo_upper_bound(1000000, 1.0, 1.0));
}

TEST_CASE("cli bounds: default decade grid and prior-derived information") {
  const CmdResult r = run_cmd("bounds --sigma 0.5 --sigma-theta 2");
  REQUIRE(r.status == 0);
  const auto rows = parse_bound_csv(r.out);
  REQUIRE(rows.size() == 6);
  long long n = 10;
  for (const BoundRow& row : rows) {
    CHECK(row.n == n);
    // The CSV stores full-precision doubles, so the round trip is exact.
    CHECK(row.vt == van_trees_bound(row.n, 0.5, 0.25));
    CHECK(row.lo == ceo_lower_bound(row.n, 0.5, 2.0));
    CHECK(row.up == ceo_upper_bound(row.n, 0.5, 2.0));
    CHECK(row.asym == risk_asymptote(row.n, 0.5));
    n *= 10;
  }

  const CmdResult fromprior = run_cmd("bounds --sigma 1 --prior 'cosine2 0 3' --n 100");
  REQUIRE(fromprior.status == 0);
  const auto prows = parse_bound_csv(fromprior.out);
  REQUIRE(prows.size() == 1);
  const auto i0 = prior_location_fisher(parse_prior("cosine2 0 3"));
  REQUIRE(i0.has_value());
  CHECK(prows[0].vt == van_trees_bound(100, 1.0, *i0));

  // --i0 wins over --prior, so a uniform prior beside it is never consulted.
  const CmdResult both =
      run_cmd("bounds --sigma 1 --i0 0.25 --prior 'uniform 0 1' --n 100");
  REQUIRE(both.status == 0);
  CHECK(parse_bound_csv(both.out)[0].vt == van_trees_bound(100, 1.0, 0.25));
}

TEST_CASE("cli bounds: file output and error paths") {
  Scratch scratch;
  const fs::path csv = scratch.file("bounds.csv");
  const CmdResult r =
      run_cmd("bounds --sigma 1 --sigma-theta 1 --out " + csv.string());
  REQUIRE(r.status == 0);
  CHECK(contains(r.out, "wrote " + csv.string() + " (6 row(s))"));
  CHECK(contains(r.out, "at n=1000000: van_trees="));
  const auto rows = parse_bound_csv(slurp(csv));
  CHECK(rows.size() == 6);
  const double reported = grab_value(r.out, "ceo_lower");
  CHECK(reported == doctest::Approx(rows.back().lo).epsilon(1e-9));

  // A uniform prior has no finite location Fisher information, and the
  // message says which hypothesis failed.
  const CmdResult uniform = run_cmd("bounds --sigma 1 --prior 'uniform -3 3'");
  CHECK(uniform.status == 1);
  CHECK(contains(uniform.err, "error:"));
  CHECK(contains(uniform.err, "does not vanish at the endpoints"));

  const CmdResult none = run_cmd("bounds --sigma 1");
  CHECK(none.status == 1);
  CHECK(contains(none.err, "need at least one of --sigma-theta, --i0, --prior"));

  const CmdResult badn = run_cmd("bounds --sigma 1 --i0 0 --n 0");
  CHECK(badn.status == 1);
  CHECK(contains(badn.err, "error:"));
}

TEST_CASE("cli check: audits pass at the published limits") {
  const CmdResult full = run_cmd("check");
  REQUIRE(full.status == 0);
  CHECK(contains(full.out, "[PASS] alternating-weight bound"));
  CHECK(contains(full.out, "[PASS] interval-union fisher bound"));
  CHECK(contains(full.out, "[PASS] probit weight shape"));
  CHECK(contains(full.out, "[PASS] bound monotonicity"));
  CHECK(!contains(full.out, "[FAIL]"));

  // The attained maximum of the weight stays at or below 2/pi.
  const auto pos = full.out.find("alternating-weight bound: max ");
  REQUIRE(pos != std::string::npos);
  const double attained =
      std::stod(full.out.substr(pos + std::string("alternating-weight bound: max ").size()));
  CHECK(attained <= 0.6366198);
  CHECK(attained > 0.5);  // the scan does reach near the extremal point

  // Same seed, same bytes.
  const CmdResult a = run_cmd("check --samples 3000 --seed 7");
  const CmdResult b = run_cmd("check --samples 3000 --seed 7");
  REQUIRE(a.status == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("cli check: fault injection and bad flags") {
  // Tightening the limits below the attainable supremum must trip the scans.
  const CmdResult tight = run_cmd("check --samples 2000 --seed 7 --limit-scale 0.5");
  CHECK(tight.status == 1);
  CHECK(contains(tight.out, "[FAIL]"));

  const CmdResult zero = run_cmd("check --samples 0");
  CHECK(zero.status == 1);
  CHECK(contains(zero.err, "--samples must be >= 1"));

  const CmdResult scale = run_cmd("check --limit-scale 0");
  CHECK(scale.status == 1);
  CHECK(contains(scale.err, "--limit-scale must be > 0"));
}

TEST_CASE("cli fixed-point: named priors hit the known thresholds") {
  const CmdResult gauss = run_cmd("fixed-point --prior 'gaussian 0 1'");
  REQUIRE(gauss.status == 0);
  CHECK(std::abs(grab_value(gauss.out, "tau")) < 1e-6);
  CHECK(grab_value(gauss.out, "m_plus") ==
        doctest::Approx(std::sqrt(2.0 / kPi)).epsilon(1e-4));
  CHECK(grab_value(gauss.out, "m_plus") + grab_value(gauss.out, "m_minus") ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  // The fixed point is solved to adjacent grid evaluations; the reported
  // residual sits at the discretization scale, far below any useful tolerance.
  CHECK(std::abs(grab_value(gauss.out, "residual")) < 1e-6);

  const CmdResult unif = run_cmd("fixed-point --prior 'uniform 0 1'");
  REQUIRE(unif.status == 0);
  CHECK(grab_value(unif.out, "tau") == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(grab_value(unif.out, "m_minus") == doctest::Approx(0.25).epsilon(1e-5));
  CHECK(grab_value(unif.out, "m_plus") == doctest::Approx(0.75).epsilon(1e-5));

  // Location equivariance: gaussian centered at 2 with scale 3.
  const CmdResult wide = run_cmd("fixed-point --prior 'gaussian 2 3'");
  REQUIRE(wide.status == 0);
  CHECK(grab_value(wide.out, "tau") == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(grab_value(wide.out, "m_plus") ==
        doctest::Approx(2.0 + 3.0 * std::sqrt(2.0 / kPi)).epsilon(1e-4));

  const CmdResult cos = run_cmd("fixed-point --prior 'cosine2 0 1'");
  REQUIRE(cos.status == 0);
  CHECK(std::abs(grab_value(cos.out, "tau")) < 1e-6);

  const CmdResult coarse =
      run_cmd("fixed-point --prior 'gaussian 0 1' --grid-m 513 --tail-mass 1e-8");
  CHECK(coarse.status == 0);
}

TEST_CASE("cli fixed-point: density dump and failure paths") {
  Scratch scratch;
  const fs::path dump = scratch.file("density.csv");
  const CmdResult r =
      run_cmd("fixed-point --prior 'gaussian 0 1' --dump " + dump.string());
  REQUIRE(r.status == 0);
  CHECK(contains(r.out, "wrote " + dump.string()));

  // The dump must reproduce the in-process grid bit for bit.
  const GridDensity got = read_density_csv(dump.string());
  const GridDensity want = grid_from_prior(parse_prior("gaussian 0 1"), 4096, 1e-9);
  REQUIRE(got.size() == want.size());
  CHECK(got.lo() == want.lo());
  CHECK(got.hi() == want.hi());
  for (Eigen::Index j = 0; j < got.size(); j += 97) {
    CHECK(got.density()[j] == want.density()[j]);
  }

  // An explicit two-bump density is rejected: the solver's correctness
  // argument needs log-concavity.
  std::ostringstream bimodal;
  bimodal << "t,density\n";
  char row[80];
  for (int j = 0; j < 256; ++j) {
    const double t = -6.0 + 12.0 * j / 255.0;
    const double p = std::exp(-(t - 1.5) * (t - 1.5)) +
                     std::exp(-(t + 1.5) * (t + 1.5));
    std::snprintf(row, sizeof(row), "%.17g,%.17g\n", t, p);
    bimodal << row;
  }
  const fs::path bad = scratch.write("bimodal.csv", bimodal.str());
  const CmdResult reject = run_cmd("fixed-point --prior 'csv " + bad.string() + "'");
  CHECK(reject.status == 1);
  CHECK(contains(reject.err, "not log-concave"));

  const CmdResult gone = run_cmd("fixed-point --prior 'csv /no/such/file.csv'");
  CHECK(gone.status == 1);
  CHECK(contains(gone.err, "cannot open"));
}
