#pragma once

#include <cstdint>

#include "json_out.hpp"

namespace hamidx::capi {

/// Calibration and invariant checks; the report lists each check with its
/// verdict and sets "passed" when all of them hold.
Json run_selftest(std::uint64_t seed);

}  // namespace hamidx::capi
