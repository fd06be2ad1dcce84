#pragma once

#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "json_out.hpp"

namespace hamidx::capi {

/// Typed access to a JSON options object. Every key read is echoed, with its
/// resolved default, into `effective`; keys outside the allowed set are
/// rejected as config errors.
class Options {
 public:
  Options(const char* text, std::initializer_list<const char*> allowed);

  double number(const char* key, double fallback);
  double number_in(const char* key, double fallback, double lo, double hi);
  int integer_in(const char* key, int fallback, int lo, int hi);
  bool flag(const char* key, bool fallback);
  std::string choice(const char* key, const char* fallback, std::initializer_list<const char*> choices);
  std::optional<std::string> path(const char* key);
  std::optional<std::vector<double>> numbers(const char* key);

  const Json& effective() const { return effective_; }

 private:
  const Json* find(const char* key) const;

  Json given_;
  Json effective_ = Json::object();
};

}  // namespace hamidx::capi
