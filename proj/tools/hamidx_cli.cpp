// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hamidx/hamidx.h"

namespace {

using nlohmann::ordered_json;

int exit_code(hamidx_status s) {
  switch (s) {
    case HAMIDX_OK:
      return 0;
    case HAMIDX_E_CONFIG:
    case HAMIDX_E_INVALID_ARGUMENT:
    case HAMIDX_E_CATALOG_MISS:
    case HAMIDX_E_IO:
      return 2;
    case HAMIDX_E_PROPAGATION:
    case HAMIDX_E_NUMERICAL_INTEGRITY:
    case HAMIDX_E_PRECISION:
      return 3;
    case HAMIDX_E_INDEX_UNSTABLE:
      return 4;
    case HAMIDX_E_INTERNAL_CONSISTENCY:
    case HAMIDX_E_EQUIVALENCE_VIOLATION:
      return 5;
    default:
      return 1;
  }
}

int config_failure(const std::string& message) {
  ordered_json diag;
  diag["error"] = "config";
  diag["code"] = static_cast<int>(HAMIDX_E_CONFIG);
  diag["message"] = message;
  std::cerr << diag.dump() << '\n';
  return 2;
}

int library_failure(hamidx_status s) {
  std::cerr << hamidx_last_error_json() << '\n';
  return exit_code(s);
}

struct Common {
  std::string catalog;
  std::string system;
  std::vector<std::string> params;
  std::optional<double> d, c, period, k;
  std::string out;
  std::string trace;
};

void add_common(CLI::App* cmd, Common& c, bool dyadic_k) {
  auto* cat = cmd->add_option("--catalog", c.catalog, "catalog entry name");
  auto* sys = cmd->add_option("--system", c.system, "system definition file (JSON)");
  cat->excludes(sys);
  cmd->add_option("--param", c.params, "catalog parameter NAME=VALUE (repeatable)");
  cmd->add_option("--d", c.d, "catalog parameter d (half dimension)");
  cmd->add_option("--c", c.c, "catalog parameter c");
  cmd->add_option("--period", c.period, "catalog parameter period");
  cmd->add_option("--k", c.k, dyadic_k ? "dyadic level with --scheme dyadic, else catalog parameter k"
                                       : "catalog parameter k");
  cmd->add_option("--out", c.out, "write the JSON report to FILE");
  cmd->add_option("--trace", c.trace, "write a CSV trace to FILE");
}

// Builds the system handle; returns an exit code (0 on success).
int make_system(const Common& c, bool k_is_level, hamidx_system** out) {
  if (c.catalog.empty() == c.system.empty()) return config_failure("give exactly one of --catalog or --system");
  if (!c.system.empty()) {
    if (!c.params.empty() || c.d || c.c || c.period || (c.k && !k_is_level)) {
      return config_failure("catalog parameters need --catalog");
    }
    const hamidx_status s = hamidx_system_from_file(c.system.c_str(), out);
    return s == HAMIDX_OK ? 0 : library_failure(s);
  }
  ordered_json p = ordered_json::object();
  if (c.d) p["d"] = *c.d;
  if (c.c) p["c"] = *c.c;
  if (c.period) p["period"] = *c.period;
  if (c.k && !k_is_level) p["k"] = *c.k;
  for (const auto& kv : c.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) return config_failure("--param expects NAME=VALUE, got '" + kv + "'");
    try {
      std::size_t used = 0;
      const std::string value = kv.substr(eq + 1);
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      p[kv.substr(0, eq)] = v;
    } catch (const std::exception&) {
      return config_failure("--param value is not a number: '" + kv + "'");
    }
  }
  const hamidx_status s = hamidx_system_from_catalog(c.catalog.c_str(), p.dump().c_str(), out);
  return s == HAMIDX_OK ? 0 : library_failure(s);
}

int emit(hamidx_status s, char* report, const Common& c) {
  // Callers must sequence the library call before reading `report`.
  if (report != nullptr) {
    std::cout << report << '\n';
    if (!c.out.empty()) {
      std::ofstream f(c.out);
      if (!f) {
        hamidx_string_free(report);
        return config_failure("cannot write --out file " + c.out);
      }
      f << report << '\n';
    }
    hamidx_string_free(report);
  }
  return s == HAMIDX_OK ? 0 : library_failure(s);
}

struct SystemGuard {
  hamidx_system* sys = nullptr;
  ~SystemGuard() { hamidx_system_free(sys); }
};

bool parse_omega(const std::string& text, double& re, double& im) {
  try {
    std::size_t used = 0;
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
      re = std::stod(text, &used);
      im = 0.0;
      return used == text.size();
    }
    re = std::stod(text.substr(0, comma), &used);
    if (used != comma) return false;
    const std::string rest = text.substr(comma + 1);
    im = std::stod(rest, &used);
    return used == rest.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maslov-type and mean indices of linear Hamiltonian systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hamidx_version()));

  Common c;
  std::optional<double> t0, t1, horizon, lambda_max, tol_lo, tol_hi;
  std::optional<int> theta_samples, n, steps, seed, dichotomy_samples;
  std::optional<std::string> omega, scheme, direction;
  std::optional<std::vector<double>> anchor, z0;
  std::optional<unsigned> threads;
  bool force_epsilon = false, dichotomy = false;

  auto* index = app.add_subcommand("index", "Maslov-type index over [t0, t1]");
  add_common(index, c, false);
  index->add_option("--t0", t0, "start time");
  index->add_option("--t1", t1, "end time");
  index->add_option("--omega", omega, "unit-circle point: RE or RE,IM");
  index->add_option("--anchor", anchor, "anchor matrix M, row-major")->expected(4, 64);
  index->add_flag("--force-epsilon", force_epsilon, "always run the epsilon ladder");

  auto* mean = app.add_subcommand("mean-index", "mean index interval [I_L, I_U]");
  add_common(mean, c, true);
  mean->add_option("--scheme", scheme, "direct | dyadic");
  mean->add_option("--direction", direction, "forward | backward | both");
  mean->add_option("--horizon", horizon, "direct-scheme horizon L");
  mean->add_option("--n", n, "dyadic window count");
  mean->add_option("--theta-samples", theta_samples, "theta grid size");
  mean->add_option("--threads", threads, "worker threads (0 = hardware)");

  auto* rot = app.add_subcommand("rotation", "rotation number (d = 1)");
  add_common(rot, c, false);
  rot->add_option("--horizon", horizon, "horizon");
  rot->add_option("--z0", z0, "initial vector X Y")->expected(2);

  auto* sweep = app.add_subcommand("sweep", "mean index of B + lambda I on a lambda grid");
  add_common(sweep, c, false);
  auto* fred = app.add_subcommand("fredholm", "spectrum test against lambda invariance");
  add_common(fred, c, false);
  for (auto* cmd : {sweep, fred}) {
    cmd->add_option("--lambda-max", lambda_max, "sweep half-width");
    cmd->add_option("--steps", steps, "odd number of lambda values");
    cmd->add_option("--theta-samples", theta_samples, "theta grid size");
    cmd->add_option("--horizon", horizon, "direct-scheme horizon for non-periodic fields");
    cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
  }
  fred->add_option("--tol-lo", tol_lo, "spectrum distance below which the verdict is not_fredholm");
  fred->add_option("--tol-hi", tol_hi, "spectrum distance above which the verdict is fredholm");
  fred->add_flag("--dichotomy", dichotomy, "also check the dichotomy inequalities");
  fred->add_option("--dichotomy-samples", dichotomy_samples, "sampled (s, t) pairs");
  fred->add_option("--seed", seed, "sampling seed");

  auto* self = app.add_subcommand("selftest", "calibration and invariant suites");
  self->add_option("--seed", seed, "seed for the randomized checks");
  self->add_option("--out", c.out, "write the JSON report to FILE");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests are parse "errors" with exit code 0.
    if (e.get_exit_code() == 0) return app.exit(e);
    return config_failure(e.what());
  }

  ordered_json o = ordered_json::object();
  char* report = nullptr;

  if (self->parsed()) {
    if (seed) o["seed"] = *seed;
    {
    const hamidx_status s = hamidx_selftest(o.dump().c_str(), &report);
    return emit(s, report, c);
  }
  }

  const bool dyadic_level = mean->parsed() && scheme && *scheme == "dyadic";
  SystemGuard g;
  if (const int rc = make_system(c, dyadic_level, &g.sys); rc != 0) return rc;
  if (!c.trace.empty()) o[index->parsed() ? "crossings_csv" : "trace_csv"] = c.trace;
  if (threads) o["threads"] = *threads;
  if (theta_samples) o["theta_samples"] = *theta_samples;
  if (horizon) o["horizon"] = *horizon;

  if (index->parsed()) {
    if (t0) o["t0"] = *t0;
    if (t1) o["t1"] = *t1;
    if (omega) {
      double re = 0.0, im = 0.0;
      if (!parse_omega(*omega, re, im)) return config_failure("--omega expects RE or RE,IM, got '" + *omega + "'");
      o["omega_re"] = re;
      o["omega_im"] = im;
    }
    if (anchor) o["anchor"] = *anchor;
    if (force_epsilon) o["force_epsilon"] = true;
    {
    const hamidx_status s = hamidx_index(g.sys, o.dump().c_str(), &report);
    return emit(s, report, c);
  }
  }
  if (mean->parsed()) {
    if (scheme) o["scheme"] = *scheme;
    if (direction) o["direction"] = *direction;
    if (dyadic_level && c.k) {
      if (*c.k != static_cast<int>(*c.k)) return config_failure("--k must be an integer dyadic level");
      o["k"] = static_cast<int>(*c.k);
    }
    if (n) o["n"] = *n;
    {
    const hamidx_status s = hamidx_mean_index(g.sys, o.dump().c_str(), &report);
    return emit(s, report, c);
  }
  }
  if (rot->parsed()) {
    if (z0) o["z0"] = *z0;
    {
    const hamidx_status s = hamidx_rotation(g.sys, o.dump().c_str(), &report);
    return emit(s, report, c);
  }
  }
  if (lambda_max) o["lambda_max"] = *lambda_max;
  if (steps) o["steps"] = *steps;
  if (sweep->parsed()) {
    const hamidx_status s = hamidx_sweep(g.sys, o.dump().c_str(), &report);
    return emit(s, report, c);
  }
  if (tol_lo) o["tol_lo"] = *tol_lo;
  if (tol_hi) o["tol_hi"] = *tol_hi;
  if (dichotomy) o["dichotomy"] = true;
  if (dichotomy_samples) o["dichotomy_samples"] = *dichotomy_samples;
  if (seed) o["seed"] = *seed;
  {
    const hamidx_status s = hamidx_fredholm(g.sys, o.dump().c_str(), &report);
    return emit(s, report, c);
  }
}
