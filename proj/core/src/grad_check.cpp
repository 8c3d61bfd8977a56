#include "mpqa/grad_check.hpp"

#include <cmath>
#include <vector>

namespace mpqa {

GradCheckReport grad_check(ParameterStore& params,
                           const std::function<Value(Tape&)>& build_loss,
                           const GradCheckOptions& opts) {
  params.zero_grad();
  {
    Tape tape;
    Value root = build_loss(tape);
    tape.backward(root);
  }

  // Snapshot analytic gradients before the probes stomp on anything.
  std::vector<Matrix> analytic;
  analytic.reserve(params.count());
  for (const auto& name : params.names()) analytic.push_back(params.get(name).grad);

  auto eval = [&]() {
    Tape tape;
    Value root = build_loss(tape);
    return tape.scalar(root);
  };

  GradCheckReport report;
  const auto& names = params.names();
  for (size_t pi = 0; pi < names.size(); ++pi) {
    if (opts.filter && !opts.filter(names[pi])) continue;
    Parameter& p = params.get(names[pi]);
    const size_t n = p.value.size();
    if (n == 0) continue;

    size_t probes = n;
    if (opts.max_probes_per_param > 0) probes = std::min<size_t>(probes, opts.max_probes_per_param);
    for (size_t k = 0; k < probes; ++k) {
      // evenly spread probe positions; k * n / probes hits every index when
      // probes == n
      const size_t i = k * n / probes;
      const double saved = p.value[i];
      p.value[i] = saved + opts.step;
      const double up = eval();
      p.value[i] = saved - opts.step;
      const double down = eval();
      p.value[i] = saved;

      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = analytic[pi][i];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), opts.denom_floor});
      const double rel = std::fabs(a - numeric) / denom;
      ++report.probes;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = names[pi];
        report.worst_index = static_cast<int>(i);
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }

  params.zero_grad();
  return report;
}

}  // namespace mpqa
