#include "options.hpp"

#include <cmath>

#include "errors.hpp"

namespace hamidx::capi {

namespace {

[[noreturn]] void bad(const char* key, const std::string& what) {
  fail(ErrorCode::config, std::string("option '") + key + "': " + what);
}

}  // namespace

Options::Options(const char* text, std::initializer_list<const char*> allowed) {
  if (text == nullptr || *text == '\0') {
    given_ = Json::object();
    return;
  }
  try {
    given_ = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::config, std::string("options are not valid JSON: ") + e.what());
  }
  if (!given_.is_object()) fail(ErrorCode::config, "options must be a JSON object");
  for (const auto& [key, value] : given_.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) fail(ErrorCode::config, "unknown option '" + key + "'");
  }
}

const Json* Options::find(const char* key) const {
  const auto it = given_.find(key);
  if (it == given_.end() || it->is_null()) return nullptr;
  return &*it;
}

double Options::number(const char* key, double fallback) {
  double v = fallback;
  if (const Json* j = find(key)) {
    if (!j->is_number()) bad(key, "expected a number");
    v = j->get<double>();
  }
  if (!std::isfinite(v)) bad(key, "must be finite");
  effective_[key] = v;
  return v;
}

double Options::number_in(const char* key, double fallback, double lo, double hi) {
  const double v = number(key, fallback);
  if (v < lo || v > hi) {
    bad(key, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

int Options::integer_in(const char* key, int fallback, int lo, int hi) {
  long v = fallback;
  if (const Json* j = find(key)) {
    if (!j->is_number_integer() && !(j->is_number() && std::floor(j->get<double>()) == j->get<double>())) {
      bad(key, "expected an integer");
    }
    v = j->is_number_integer() ? j->get<long>() : static_cast<long>(j->get<double>());
  }
  if (v < lo || v > hi) {
    bad(key, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  effective_[key] = v;
  return static_cast<int>(v);
}

bool Options::flag(const char* key, bool fallback) {
  bool v = fallback;
  if (const Json* j = find(key)) {
    if (!j->is_boolean()) bad(key, "expected true or false");
    v = j->get<bool>();
  }
  effective_[key] = v;
  return v;
}

std::string Options::choice(const char* key, const char* fallback, std::initializer_list<const char*> choices) {
  std::string v = fallback;
  if (const Json* j = find(key)) {
    if (!j->is_string()) bad(key, "expected a string");
    v = j->get<std::string>();
  }
  bool ok = false;
  std::string list;
  for (const char* c : choices) {
    ok = ok || v == c;
    list += list.empty() ? c : std::string(" | ") + c;
  }
  if (!ok) bad(key, "'" + v + "' is not one of " + list);
  effective_[key] = v;
  return v;
}

std::optional<std::string> Options::path(const char* key) {
  const Json* j = find(key);
  if (j == nullptr) return std::nullopt;
  if (!j->is_string() || j->get<std::string>().empty()) bad(key, "expected a file path");
  effective_[key] = *j;
  return j->get<std::string>();
}

std::optional<std::vector<double>> Options::numbers(const char* key) {
  const Json* j = find(key);
  if (j == nullptr) return std::nullopt;
  if (!j->is_array()) bad(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : *j) {
    if (!e.is_number()) bad(key, "expected an array of numbers");
    out.push_back(e.get<double>());
    if (!std::isfinite(out.back())) bad(key, "entries must be finite");
  }
  effective_[key] = out;
  return out;
}

}  // namespace hamidx::capi
