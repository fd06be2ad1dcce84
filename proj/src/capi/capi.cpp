#include "hamidx/hamidx.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "errors.hpp"
#include "fredholm.hpp"
#include "json_out.hpp"
#include "maslov.hpp"
#include "meanindex.hpp"
#include "options.hpp"
#include "rotation.hpp"
#include "selftest.hpp"
#include "systems_io.hpp"

struct hamidx_system {
  hamidx::SymmetricField field;
};

namespace {

using hamidx::Json;
using hamidx::capi::Options;

thread_local std::string last_message;
thread_local std::string last_json;

void clear_error() {
  last_message.clear();
  last_json.clear();
}

hamidx_status record(hamidx_status status, const std::string& name, const std::string& message, Json extra = {}) {
  last_message = message;
  Json diag;
  diag["error"] = name;
  diag["code"] = static_cast<int>(status);
  diag["message"] = message;
  if (extra.is_object()) {
    for (auto& [k, v] : extra.items()) diag[k] = v;
  }
  last_json = hamidx::dump_json_line(diag);
  return status;
}

hamidx_status translate() {
  try {
    throw;
  } catch (const hamidx::PropagationError& e) {
    return record(HAMIDX_E_PROPAGATION, "propagation_failure", e.what(), Json{{"worst_residual", e.worst_residual()}});
  } catch (const hamidx::PrecisionError& e) {
    return record(HAMIDX_E_PRECISION, "precision", e.what(), Json{{"time", e.time()}});
  } catch (const hamidx::IndexUnstableError& e) {
    return record(HAMIDX_E_INDEX_UNSTABLE, "index_unstable", e.what(),
                  Json{{"first", e.first()}, {"second", e.second()}});
  } catch (const hamidx::Error& e) {
    return record(static_cast<hamidx_status>(static_cast<int>(e.code())), hamidx::error_code_name(e.code()), e.what());
  } catch (const Json::exception& e) {
    return record(HAMIDX_E_CONFIG, "config", e.what());
  } catch (const std::bad_alloc&) {
    return record(HAMIDX_E_UNKNOWN, "unknown", "out of memory");
  } catch (const std::exception& e) {
    return record(HAMIDX_E_UNKNOWN, "unknown", e.what());
  } catch (...) {
    return record(HAMIDX_E_UNKNOWN, "unknown", "unrecognized exception");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class Fn>
hamidx_status guarded(Fn&& fn) {
  clear_error();
  try {
    fn();
    return HAMIDX_OK;
  } catch (...) {
    return translate();
  }
}

void need(const void* p, const char* what) {
  hamidx::require(p != nullptr, hamidx::ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

Json system_summary(const hamidx::SymmetricField& f) {
  Json j;
  j["name"] = f.name();
  j["d"] = f.dim_half();
  j["K"] = f.bound();
  j["structure"] = hamidx::structure_kind_name(f.structure().kind);
  if (f.is_periodic()) j["period"] = f.period();
  return j;
}

Json report_head(const char* command, const hamidx::SymmetricField& f, const Options& opts) {
  Json r;
  r["command"] = command;
  r["system"] = system_summary(f);
  r["config"] = opts.effective();
  return r;
}

std::ofstream open_trace(const std::string& path) {
  std::ofstream out(path);
  hamidx::require(out.good(), hamidx::ErrorCode::io, "cannot open trace file " + path);
  out.precision(17);
  return out;
}

Json complex_json(hamidx::Complex c) { return Json{{"re", c.real()}, {"im", c.imag()}, {"modulus", std::abs(c)}}; }

Json estimate_json(const hamidx::MeanIndexEstimate& e) {
  Json j;
  j["lower"] = e.lower;
  j["upper"] = e.upper;
  j["residual_bound"] = e.residual_bound;
  j["residual_rigorous"] = e.residual_rigorous;
  j["scheme"] = hamidx::scheme_name(e.scheme);
  j["direction"] = hamidx::direction_name(e.direction);
  if (e.scheme == hamidx::Scheme::direct) {
    j["horizon"] = e.horizon;
    j["tail_start"] = e.tail_start;
  } else {
    j["k"] = e.k;
    j["n"] = e.n;
    j["tail_start"] = e.tail_start;
    j["f_monotone"] = e.f_monotone;
    if (e.table) j["sandwich_ok"] = e.table->sandwich_ok;
  }
  j["sympl_residual"] = e.sympl_residual;
  j["max_imag"] = e.max_imag;
  return j;
}

void write_estimate_trace(std::ofstream& out, const hamidx::MeanIndexEstimate& e, bool with_direction) {
  for (const auto& [x, v] : e.trace) {
    if (with_direction) out << hamidx::direction_name(e.direction) << ',';
    if (e.scheme == hamidx::Scheme::direct) {
      out << x << ',' << v << '\n';
    } else {
      out << e.k << ',' << x << ',' << v << '\n';
    }
  }
}

hamidx::SweepParams sweep_params(const hamidx::SymmetricField& f, Options& o) {
  hamidx::SweepParams p;
  p.lambda_max = o.number_in("lambda_max", 0.1, 1e-6, 10.0);
  p.steps = o.integer_in("steps", 11, 5, 401);
  hamidx::require(p.steps % 2 == 1, hamidx::ErrorCode::config, "option 'steps' must be odd");
  p.theta.samples = o.integer_in("theta_samples", 256, 16, 1 << 16);
  p.horizon = o.number_in("horizon", 500.0, 10.0, 1e6);
  p.threads = static_cast<unsigned>(o.integer_in("threads", 0, 0, 1024));
  (void)f;
  return p;
}

Json sweep_json(const hamidx::LambdaSweep& s) {
  Json pts = Json::array();
  for (const auto& p : s.points) {
    pts.push_back(Json{{"lambda", p.lambda},
                       {"index", p.index},
                       {"lower", p.lower},
                       {"upper", p.upper},
                       {"residual", p.residual}});
  }
  return pts;
}

void write_sweep_trace(const std::string& path, const hamidx::LambdaSweep& s) {
  auto out = open_trace(path);
  out << "lambda,index,lower,upper,residual\n";
  for (const auto& p : s.points) {
    out << p.lambda << ',' << p.index << ',' << p.lower << ',' << p.upper << ',' << p.residual << '\n';
  }
}

}  // namespace

extern "C" {

const char* hamidx_version(void) { return "0.1.0"; }

const char* hamidx_status_name(hamidx_status status) {
  if (status == HAMIDX_OK) return "ok";
  if (status == HAMIDX_E_UNKNOWN) return "unknown";
  const int code = static_cast<int>(status);
  if (code >= 1 && code <= 16) return hamidx::error_code_name(static_cast<hamidx::ErrorCode>(code));
  return "unknown";
}

const char* hamidx_last_error(void) { return last_message.c_str(); }
const char* hamidx_last_error_json(void) { return last_json.c_str(); }

void hamidx_string_free(char* text) { std::free(text); }

hamidx_status hamidx_catalog_names(char** out_json) {
  return guarded([&] {
    need(out_json, "out_json");
    *out_json = copy_string(hamidx::dump_json_line(Json(hamidx::catalog_names())));
  });
}

hamidx_status hamidx_system_from_catalog(const char* name, const char* params_json, hamidx_system** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = nullptr;
    hamidx::ParamMap params;
    if (params_json != nullptr && *params_json != '\0') {
      const Json p = Json::parse(params_json);
      hamidx::require(p.is_object(), hamidx::ErrorCode::config, "catalog parameters must be a JSON object");
      for (const auto& [k, v] : p.items()) {
        hamidx::require(v.is_number(), hamidx::ErrorCode::config, "catalog parameter '" + k + "' must be numeric");
        params[k] = v.get<double>();
      }
    }
    *out = new hamidx_system{hamidx::catalog(name, params)};
  });
}

hamidx_status hamidx_system_from_json(const char* text, hamidx_system** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = nullptr;
    *out = new hamidx_system{hamidx::parse_system(text)};
  });
}

hamidx_status hamidx_system_from_file(const char* path, hamidx_system** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new hamidx_system{hamidx::parse_system_file(path)};
  });
}

void hamidx_system_free(hamidx_system* system) { delete system; }

int hamidx_system_dim_half(const hamidx_system* system) { return system ? system->field.dim_half() : 0; }

double hamidx_system_bound(const hamidx_system* system) { return system ? system->field.bound() : 0.0; }

hamidx_status hamidx_system_evaluate(const hamidx_system* system, double t, double* out, int capacity) {
  return guarded([&] {
    need(system, "system");
    need(out, "out");
    const hamidx::Mat b = system->field.evaluate(t);
    const auto n = b.rows();
    hamidx::require(capacity >= n * n, hamidx::ErrorCode::invalid_argument, "output buffer too small");
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) out[r * n + c] = b(r, c);
  });
}

hamidx_status hamidx_system_to_json(const hamidx_system* system, char** out_json) {
  return guarded([&] {
    need(system, "system");
    need(out_json, "out_json");
    *out_json = copy_string(hamidx::serialize_system(system->field));
  });
}

hamidx_status hamidx_index(const hamidx_system* system, const char* options_json, char** out_report) {
  return guarded([&] {
    need(system, "system");
    need(out_report, "out_report");
    const auto& f = system->field;
    Options o(options_json, {"t0", "t1", "omega_re", "omega_im", "anchor", "force_epsilon", "crossings_csv"});
    const double t0 = o.number("t0", 0.0);
    const double t1 = o.number("t1", 10.0);
    hamidx::require(t1 > t0, hamidx::ErrorCode::config, "option 't1' must exceed 't0'");
    const double omega_re = o.number("omega_re", 1.0);
    const double omega_im = o.number("omega_im", 0.0);
    const hamidx::Complex omega(omega_re, omega_im);
    hamidx::require(std::abs(std::abs(omega) - 1.0) <= 1e-12, hamidx::ErrorCode::config,
                    "omega must lie on the unit circle");
    const auto anchor = o.numbers("anchor");
    hamidx::IndexOptions io;
    io.force_epsilon = o.flag("force_epsilon", false);
    const auto csv = o.path("crossings_csv");

    const auto path = hamidx::fundamental_solution(f, t0, t1);
    const int n = f.dim();
    hamidx::Mat m = hamidx::Mat::Identity(n, n);
    if (anchor) {
      hamidx::require(static_cast<int>(anchor->size()) == n * n, hamidx::ErrorCode::config,
                      "option 'anchor' needs " + std::to_string(n * n) + " entries");
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m(r, c) = (*anchor)[static_cast<std::size_t>(r * n + c)];
    }
    const hamidx::IndexValue v = hamidx::iota(m, path, omega, io);
    const bool unit = std::abs(omega - hamidx::Complex(1.0, 0.0)) <= 1e-12;

    Json r = report_head("index", f, o);
    Json res;
    res["iota"] = v.value;
    if (!anchor) {
      // With the identity anchor the report also carries i_omega.
      res["i_omega"] = v.value - (unit ? f.dim_half() : 0);
      res["index"] = res["i_omega"];
    } else {
      res["index"] = v.value;
    }
    res["epsilon"] = v.epsilon;
    Json ladder = Json::array();
    for (const auto& [eps, val] : v.ladder) ladder.push_back(Json{{"epsilon", eps}, {"value", val}});
    res["ladder"] = ladder;
    Json cr = Json::array();
    for (const auto& c : v.crossings) {
      cr.push_back(Json{{"time", c.time},
                        {"kernel_dim", c.kernel_dim},
                        {"signature", c.signature},
                        {"contribution", c.contribution},
                        {"d_slope", c.d_slope}});
    }
    res["crossings"] = cr;
    r["result"] = res;
    r["integrity"] = Json{{"sympl_residual", path.sympl_residual()},
                          {"relative_residual", path.relative_residual()},
                          {"max_imag", v.max_imag}};
    if (csv) {
      auto out = open_trace(*csv);
      hamidx::write_crossings_csv(out, v.crossings);
      r["crossings_csv_path"] = *csv;
    }
    *out_report = copy_string(hamidx::dump_json(r));
  });
}

hamidx_status hamidx_mean_index(const hamidx_system* system, const char* options_json, char** out_report) {
  return guarded([&] {
    need(system, "system");
    need(out_report, "out_report");
    const auto& f = system->field;
    Options o(options_json, {"scheme", "direction", "horizon", "k", "n", "theta_samples", "threads", "trace_csv"});
    hamidx::EstimateParams p;
    const std::string scheme = o.choice("scheme", "direct", {"direct", "dyadic"});
    const std::string direction = o.choice("direction", "forward", {"forward", "backward", "both"});
    p.scheme = scheme == "direct" ? hamidx::Scheme::direct : hamidx::Scheme::dyadic;
    if (p.scheme == hamidx::Scheme::direct) {
      p.horizon = o.number_in("horizon", 500.0, 10.0, 1e6);
    } else {
      p.k = o.integer_in("k", 8, 0, 16);
      p.n = o.integer_in("n", 32, 2, 4096);
    }
    p.theta.samples = o.integer_in("theta_samples", 256, 16, 1 << 16);
    p.threads = static_cast<unsigned>(o.integer_in("threads", 0, 0, 1024));
    const auto csv = o.path("trace_csv");

    Json r = report_head("mean-index", f, o);
    std::vector<hamidx::MeanIndexEstimate> runs;
    if (direction != "backward") runs.push_back(hamidx::mean_index_interval(f, hamidx::Direction::forward, p));
    if (direction != "forward") runs.push_back(hamidx::mean_index_interval(f, hamidx::Direction::backward, p));
    const auto& first = runs.front();
    r["lower"] = first.lower;
    r["upper"] = first.upper;
    r["residual_bound"] = first.residual_bound;
    r["scheme"] = scheme;
    if (runs.size() == 1) {
      r["estimate"] = estimate_json(first);
    } else {
      r["forward"] = estimate_json(runs[0]);
      r["backward"] = estimate_json(runs[1]);
      r["direction_gap"] =
          std::max(std::abs(runs[0].lower - runs[1].lower), std::abs(runs[0].upper - runs[1].upper));
    }
    double sympl = 0.0, imag = 0.0;
    for (const auto& e : runs) {
      sympl = std::max(sympl, e.sympl_residual);
      imag = std::max(imag, e.max_imag);
    }
    r["integrity"] = Json{{"sympl_residual", sympl}, {"max_imag", imag}};
    if (csv) {
      auto out = open_trace(*csv);
      const bool both = runs.size() > 1;
      out << (both ? "direction," : "") << (p.scheme == hamidx::Scheme::direct ? "l,value\n" : "k,n,value\n");
      for (const auto& e : runs) write_estimate_trace(out, e, both);
      r["trace_csv_path"] = *csv;
    }
    *out_report = copy_string(hamidx::dump_json(r));
  });
}

hamidx_status hamidx_rotation(const hamidx_system* system, const char* options_json, char** out_report) {
  return guarded([&] {
    need(system, "system");
    need(out_report, "out_report");
    const auto& f = system->field;
    Options o(options_json, {"horizon", "z0", "trace_csv"});
    const double horizon = o.number_in("horizon", 1000.0, 10.0, 1e6);
    hamidx::Vec z0(2);
    z0 << 1.0, 0.0;
    if (const auto z = o.numbers("z0")) {
      hamidx::require(z->size() == 2, hamidx::ErrorCode::config, "option 'z0' needs two entries");
      z0 << (*z)[0], (*z)[1];
    }
    const auto csv = o.path("trace_csv");
    const auto rn = hamidx::rotation_number(f, horizon, z0);
    Json r = report_head("rotation", f, o);
    r["value"] = rn.value;
    r["phi_value"] = rn.phi_value;
    r["trend"] = rn.trend;
    r["horizon"] = rn.horizon;
    r["theta0"] = rn.lift.theta0;
    r["max_increment"] = rn.lift.max_increment;
    r["max_polar_gap"] = rn.max_polar_gap;
    r["integrity"] = Json{{"sympl_residual", rn.sympl_residual}, {"unitary_residual", rn.lift.unitary_residual}};
    if (csv) {
      auto out = open_trace(*csv);
      hamidx::write_lift_csv(out, rn.lift);
      r["trace_csv_path"] = *csv;
    }
    *out_report = copy_string(hamidx::dump_json(r));
  });
}

hamidx_status hamidx_sweep(const hamidx_system* system, const char* options_json, char** out_report) {
  return guarded([&] {
    need(system, "system");
    need(out_report, "out_report");
    const auto& f = system->field;
    Options o(options_json, {"lambda_max", "steps", "theta_samples", "horizon", "threads", "trace_csv"});
    const auto p = sweep_params(f, o);
    const auto csv = o.path("trace_csv");
    const auto s = hamidx::lambda_sweep(f, p);
    Json r = report_head("sweep", f, o);
    r["sweep"] = sweep_json(s);
    r["constancy"] = s.constant;
    r["strictly_increasing"] = s.strictly_increasing;
    r["jumps"] = s.jumps;
    r["spread"] = s.spread;
    r["tolerance"] = s.tolerance;
    r["invariance_radius"] = s.invariance_radius;
    if (csv) {
      write_sweep_trace(*csv, s);
      r["trace_csv_path"] = *csv;
    }
    *out_report = copy_string(hamidx::dump_json(r));
  });
}

hamidx_status hamidx_fredholm(const hamidx_system* system, const char* options_json, char** out_report) {
  return guarded([&] {
    need(system, "system");
    need(out_report, "out_report");
    const auto& f = system->field;
    Options o(options_json, {"lambda_max", "steps", "theta_samples", "horizon", "threads", "trace_csv", "tol_lo",
                             "tol_hi", "dichotomy", "dichotomy_samples", "seed"});
    const auto p = sweep_params(f, o);
    const double tol_lo = o.number_in("tol_lo", 1e-8, 1e-15, 1.0);
    const double tol_hi = o.number_in("tol_hi", 1e-4, 1e-15, 1.0);
    hamidx::require(tol_lo < tol_hi, hamidx::ErrorCode::config, "need tol_lo < tol_hi");
    const bool dichotomy = o.flag("dichotomy", false);
    const int samples = o.integer_in("dichotomy_samples", 10000, 2, 10'000'000);
    const int seed = o.integer_in("seed", 7, 0, 1 << 30);
    const auto csv = o.path("trace_csv");

    const auto v = hamidx::fredholm_verdict(f, p, tol_lo, tol_hi);
    Json r = report_head("fredholm", f, o);
    Json spec = Json::array();
    for (const auto& mu : v.spectrum.spectrum) spec.push_back(complex_json(mu));
    r["spectrum"] = spec;
    r["unit_circle_distance"] = v.spectrum.unit_circle_distance;
    r["pairing_defect"] = v.spectrum.pairing_defect;
    r["verdict"] = hamidx::verdict_name(v.spectrum.verdict);
    r["spectrum_of_limit"] = v.asymptotic;
    r["sweep"] = sweep_json(v.sweep);
    r["constancy"] = v.sweep.constant;
    r["sweep_verdict"] = hamidx::verdict_name(v.sweep_verdict);
    r["agree"] = v.agree;
    r["invariance_radius"] = v.sweep.invariance_radius;
    if (dichotomy) {
      hamidx::DichotomyParams dp;
      dp.samples = samples;
      dp.seed = static_cast<std::uint64_t>(seed);
      const auto d = hamidx::dichotomy_inequality_check(f, dp);
      r["dichotomy"] = Json{{"ok", d.ok},
                            {"beta_spectral", d.beta_spectral},
                            {"beta_fit", d.beta_fit},
                            {"c_fit", d.c_fit},
                            {"c_limit", d.c_limit},
                            {"samples", d.samples},
                            {"violations", d.violations}};
    }
    if (csv) {
      write_sweep_trace(*csv, v.sweep);
      r["trace_csv_path"] = *csv;
    }
    *out_report = copy_string(hamidx::dump_json(r));
  });
}

hamidx_status hamidx_selftest(const char* options_json, char** out_report) {
  return guarded([&] {
    need(out_report, "out_report");
    Options o(options_json, {"seed"});
    const int seed = o.integer_in("seed", 1, 0, 1 << 30);
    Json r = hamidx::capi::run_selftest(static_cast<std::uint64_t>(seed));
    *out_report = copy_string(hamidx::dump_json(r));
    if (!r["passed"].get<bool>()) {
      hamidx::fail(hamidx::ErrorCode::internal_consistency, "selftest: at least one check failed");
    }
  });
}

}  // extern "C"
