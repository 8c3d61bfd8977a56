#pragma once

#include <functional>
#include <string>

#include "mpqa/params.hpp"
#include "mpqa/tape.hpp"

namespace mpqa {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;    // empty when nothing was probed
  int worst_index = -1;       // flat index into the worst parameter
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  size_t probes = 0;
};

struct GradCheckOptions {
  double step = 1e-5;          // central difference half-step
  double denom_floor = 1e-4;   // rel = |a-n| / max(|a|, |n|, denom_floor)
  // 0 = probe every entry; otherwise probe at most this many entries per
  // parameter, spread evenly over the flat index range.
  int max_probes_per_param = 0;
  // optional name filter; empty = all parameters
  std::function<bool(const std::string&)> filter;
};

/// Compares tape gradients against central finite differences.
///
/// build_loss must construct a fresh graph on the given tape and return the
/// scalar loss node; it is called once for the analytic pass (followed by
/// backward) and twice per probe for the numeric side. Parameter values are
/// restored after each probe; gradients in the store are left zeroed.
GradCheckReport grad_check(ParameterStore& params,
                           const std::function<Value(Tape&)>& build_loss,
                           const GradCheckOptions& opts = {});

}  // namespace mpqa
