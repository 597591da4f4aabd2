#include "adiaprod/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adiaprod::oracle {

PropagatorTable propagate(const HamiltonianSignal& h, const OracleConfig& cfg) {
  if (cfg.substeps < 1) throw std::invalid_argument("oracle substeps must be >= 1");
  const Grid& grid = h.grid();
  const int dim = static_cast<int>(h.sample(0).rows());
  const double step = grid.dt() / cfg.substeps;
  std::vector<Matrix> out;
  out.reserve(grid.size());
  Matrix u = Matrix::Identity(dim, dim);
  out.push_back(u);
  for (int k = 0; k < grid.steps(); ++k) {
    const double t0 = grid[k];
    Matrix h_left = h.sample(k);
    for (int s = 0; s < cfg.substeps; ++s) {
      const double t = t0 + s * step;
      const Matrix h_mid = h.value_at(t + 0.5 * step);
      const Matrix h_right = s + 1 == cfg.substeps ? h.sample(k + 1) : h.value_at(t + step);
      const Matrix k1 = -kI * h_left * u;
      const Matrix k2 = -kI * h_mid * (u + 0.5 * step * k1);
      const Matrix k3 = -kI * h_mid * (u + 0.5 * step * k2);
      const Matrix k4 = -kI * h_right * (u + step * k3);
      u += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      h_left = h_right;
    }
    out.push_back(u);
  }
  return PropagatorTable(grid, std::move(out));
}

Comparison compare(const PropagatorTable& a, const PropagatorTable& b) {
  if (!(a.grid == b.grid) || a.values.size() != b.values.size())
    throw NumericalError(Failure::GridMismatch, "propagator tables use different grids");
  Comparison c;
  c.per_t.reserve(a.values.size());
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    const double d = (a.values[k] - b.values[k]).norm();
    c.per_t.push_back(d);
    c.sup_fro = std::max(c.sup_fro, d);
  }
  c.final_fro = c.per_t.back();
  return c;
}

ConvergenceReport convergence_order(const HamiltonianSignal& h, const OracleConfig& cfg) {
  const int s = std::max(1, cfg.substeps);
  const PropagatorTable u1 = propagate(h, {s});
  const PropagatorTable u2 = propagate(h, {2 * s});
  const PropagatorTable u4 = propagate(h, {4 * s});
  ConvergenceReport r;
  r.coarse_error = compare(u1, u2).sup_fro;
  r.fine_error = compare(u2, u4).sup_fro;
  const double floor = 1e-13 * std::sqrt(static_cast<double>(u1.dim()));
  if (r.coarse_error < floor && r.fine_error < floor) {
    r.exact = true;
    return r;
  }
  r.ratio = r.coarse_error / r.fine_error;
  r.order = std::log2(r.ratio);
  return r;
}

}  // namespace adiaprod::oracle
