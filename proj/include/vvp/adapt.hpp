/// Bulk marking on the combined cell indicators and the adaptive
/// solve-estimate-mark-refine loop built on newest-vertex bisection.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <vector>

#include "vvp/estimate.hpp"
#include "vvp/mesh.hpp"
#include "vvp/optctl.hpp"

namespace vvp {

/// Minimal-cardinality marked set: cells sorted by descending combined squared
/// indicator (ties by lower id), shortest prefix whose sum reaches theta^2
/// times the total.  Cells with zero indicator are never marked; the returned
/// ids keep the marking order, so the last entry is the smallest contributor.
inline std::vector<int> dorfler_mark(const LocalIndicators& ind, double theta) {
  const int nc = static_cast<int>(ind.eta_y_sq.size());
  std::vector<double> total(nc);
  detail::CompensatedSum sum;
  for (int c = 0; c < nc; ++c) {
    total[c] = ind.eta_y_sq[c] + ind.eta_w_sq[c] + ind.eta_u_sq[c];
    sum.add(total[c]);
  }
  std::vector<int> order(nc);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return total[a] != total[b] ? total[a] > total[b] : a < b; });

  const double target = theta * theta * sum.value();
  std::vector<int> marked;
  detail::CompensatedSum acc;
  for (int c : order) {
    if (acc.value() >= target || total[c] == 0.0) break;
    marked.push_back(c);
    acc.add(total[c]);
  }
  return marked;
}

struct AdaptOptions {
  double theta = 0.5;
  int max_dofs = 100000;  ///< loop stops after the first solve past this size
  FixedPointOptions fixed_point;
};

/// One adaptive iteration: the mesh it solved on, its estimate and errors, and
/// the cells marked for the next refinement (empty on the final iteration).
struct AdaptStep {
  int iteration = 0;
  int dofs_total = 0;
  double h_max = 0.0;
  GlobalEstimate estimate;
  ErrorReport errors;
  bool converged = false;
  double seconds = 0.0;
  Mesh mesh;
  std::vector<int> marked;
};

/// Solve-estimate-mark-refine until the coupled system grows past max_dofs;
/// the factory rebuilds the scheme on each refined mesh.  Always records at
/// least one step; a zero estimate ends the loop (nothing to mark).
template <class SchemeFactory>
std::vector<AdaptStep> adaptive_loop(const Problem& prob, const Mesh& initial,
                                     SchemeFactory&& factory, const AdaptOptions& opt = {}) {
  std::vector<AdaptStep> history;
  Mesh mesh = initial;
  for (int it = 0;; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto scheme = factory(mesh);
    const SolutionBundle bundle =
        fixed_point_solve(scheme, prob, FeFunction(scheme.control), opt.fixed_point);
    const LocalIndicators ind = indicators(scheme, prob, bundle);

    AdaptStep step;
    step.iteration = it;
    step.dofs_total = scheme.layout.size;
    step.h_max = mesh_size(mesh);
    step.estimate = global_estimate(ind);
    step.errors = error_report(scheme, prob, bundle);
    step.converged = bundle.converged;
    step.mesh = mesh;
    if (scheme.layout.size <= opt.max_dofs) step.marked = dorfler_mark(ind, opt.theta);
    step.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool stop = step.marked.empty();
    history.push_back(std::move(step));
    if (stop) break;
    mesh = bisect_refine(mesh, history.back().marked);
  }
  return history;
}

}  // namespace vvp
