#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "hamidx/hamidx.h"

using nlohmann::json;

namespace {

struct Owned {
  char* text = nullptr;
  ~Owned() { hamidx_string_free(text); }
  json parse() const { return json::parse(text); }
};

struct System {
  hamidx_system* sys = nullptr;
  ~System() { hamidx_system_free(sys); }
};

json last_error() { return json::parse(hamidx_last_error_json()); }

}  // namespace

TEST_CASE("catalog listing and lookup") {
  Owned names;
  REQUIRE(hamidx_catalog_names(&names.text) == HAMIDX_OK);
  const auto list = names.parse();
  CHECK(list.size() == 7);

  System s;
  REQUIRE(hamidx_system_from_catalog("rotation_k", R"({"k": 2})", &s.sys) == HAMIDX_OK);
  CHECK(hamidx_system_dim_half(s.sys) == 1);
  CHECK(hamidx_system_bound(s.sys) == doctest::Approx(2.0));
  double b[4] = {};
  REQUIRE(hamidx_system_evaluate(s.sys, 0.3, b, 4) == HAMIDX_OK);
  CHECK(b[0] == doctest::Approx(2.0));
  CHECK(b[1] == doctest::Approx(0.0));
  CHECK(hamidx_system_evaluate(s.sys, 0.3, b, 3) == HAMIDX_E_INVALID_ARGUMENT);

  System miss;
  CHECK(hamidx_system_from_catalog("nope", nullptr, &miss.sys) == HAMIDX_E_CATALOG_MISS);
  CHECK(miss.sys == nullptr);
  CHECK(last_error()["error"] == "catalog_miss");
  CHECK(std::string(hamidx_status_name(HAMIDX_E_CATALOG_MISS)) == "catalog_miss");
}

TEST_CASE("null arguments are rejected") {
  CHECK(hamidx_catalog_names(nullptr) == HAMIDX_E_INVALID_ARGUMENT);
  Owned r;
  CHECK(hamidx_index(nullptr, "{}", &r.text) == HAMIDX_E_INVALID_ARGUMENT);
  CHECK(r.text == nullptr);
}

TEST_CASE("system documents round trip") {
  System a;
  REQUIRE(hamidx_system_from_catalog("periodic_demo", nullptr, &a.sys) == HAMIDX_OK);
  Owned doc;
  REQUIRE(hamidx_system_to_json(a.sys, &doc.text) == HAMIDX_OK);
  System b;
  REQUIRE(hamidx_system_from_json(doc.text, &b.sys) == HAMIDX_OK);
  double x[4], y[4];
  for (double t : {0.0, 0.7, 3.1}) {
    REQUIRE(hamidx_system_evaluate(a.sys, t, x, 4) == HAMIDX_OK);
    REQUIRE(hamidx_system_evaluate(b.sys, t, y, 4) == HAMIDX_OK);
    for (int i = 0; i < 4; ++i) CHECK(x[i] == y[i]);
  }

  System bad;
  const char* asym = R"({"d": 1, "K": 1, "terms": [{"matrix": [[1, 0.5], [0, 1]], "mode": "constant"}]})";
  CHECK(hamidx_system_from_json(asym, &bad.sys) != HAMIDX_OK);
  CHECK(hamidx_system_from_json("{not json", &bad.sys) == HAMIDX_E_CONFIG);
  CHECK(hamidx_system_from_file("/nonexistent/system.json", &bad.sys) != HAMIDX_OK);
}

TEST_CASE("index report") {
  System s;
  REQUIRE(hamidx_system_from_catalog("rotation_k", R"({"k": 1})", &s.sys) == HAMIDX_OK);
  Owned r;
  REQUIRE(hamidx_index(s.sys, R"({"t1": 10, "omega_re": 1})", &r.text) == HAMIDX_OK);
  const auto rep = r.parse();
  CHECK(rep["command"] == "index");
  CHECK(rep["result"]["index"] == 3);
  CHECK(rep["result"]["iota"] == 4);
  CHECK(rep["config"]["t1"] == 10.0);
  CHECK(rep["integrity"]["sympl_residual"].get<double>() <= 1e-8);
}

TEST_CASE("options are validated") {
  System s;
  REQUIRE(hamidx_system_from_catalog("constant_k", nullptr, &s.sys) == HAMIDX_OK);
  Owned r;
  CHECK(hamidx_index(s.sys, R"({"bogus": 1})", &r.text) == HAMIDX_E_CONFIG);
  CHECK(hamidx_index(s.sys, R"({"omega_re": 2})", &r.text) == HAMIDX_E_CONFIG);
  CHECK(hamidx_mean_index(s.sys, R"({"scheme": "spectral"})", &r.text) == HAMIDX_E_CONFIG);
  CHECK(hamidx_mean_index(s.sys, R"({"horizon": -5})", &r.text) == HAMIDX_E_CONFIG);
  CHECK(hamidx_sweep(s.sys, R"({"steps": 10})", &r.text) == HAMIDX_E_CONFIG);
  CHECK(hamidx_index(s.sys, "[1, 2]", &r.text) == HAMIDX_E_CONFIG);
  CHECK(r.text == nullptr);
  CHECK(last_error()["code"] == HAMIDX_E_CONFIG);
}

TEST_CASE("mean index and rotation reports") {
  System s;
  REQUIRE(hamidx_system_from_catalog("constant_k", nullptr, &s.sys) == HAMIDX_OK);
  Owned r;
  REQUIRE(hamidx_mean_index(s.sys, R"({"scheme": "direct", "horizon": 500})", &r.text) == HAMIDX_OK);
  const auto m = r.parse();
  CHECK(m["lower"].get<double>() == doctest::Approx(0.3183).epsilon(0.07));
  CHECK(m["upper"].get<double>() == doctest::Approx(0.3183).epsilon(0.07));

  Owned rot;
  REQUIRE(hamidx_rotation(s.sys, R"({"horizon": 50})", &rot.text) == HAMIDX_OK);
  CHECK(rot.parse()["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fredholm report on the saddle") {
  System s;
  REQUIRE(hamidx_system_from_catalog("hyperbolic", nullptr, &s.sys) == HAMIDX_OK);
  Owned r;
  REQUIRE(hamidx_fredholm(s.sys, R"({"dichotomy": true})", &r.text) == HAMIDX_OK);
  const auto rep = r.parse();
  CHECK(rep["verdict"] == "fredholm");
  CHECK(rep["constancy"] == true);
  CHECK(rep["agree"] == true);
  CHECK(rep["sweep"].size() == 11);
  CHECK(rep["unit_circle_distance"].get<double>() == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("trace files") {
  System s;
  REQUIRE(hamidx_system_from_catalog("rotation_k", nullptr, &s.sys) == HAMIDX_OK);
  const std::string path = "capi_trace_test.csv";
  std::remove(path.c_str());
  Owned r;
  const json opts = {{"t1", 10.0}, {"crossings_csv", path}};
  REQUIRE(hamidx_index(s.sys, opts.dump().c_str(), &r.text) == HAMIDX_OK);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK_FALSE(header.empty());
  in.close();
  std::remove(path.c_str());

  Owned bad;
  const json unwritable = {{"t1", 10.0}, {"crossings_csv", "/nonexistent/dir/x.csv"}};
  CHECK(hamidx_index(s.sys, unwritable.dump().c_str(), &bad.text) == HAMIDX_E_IO);
}

TEST_CASE("selftest passes") {
  Owned r;
  REQUIRE(hamidx_selftest(R"({"seed": 3})", &r.text) == HAMIDX_OK);
  const auto rep = r.parse();
  CHECK(rep["passed"] == true);
  CHECK(rep["checks"].size() == 9);
}
