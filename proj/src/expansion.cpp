#include "adiaprod/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace adiaprod {

PropagatorTable PropagatorTable::identity(const Grid& g, int dim) {
  return PropagatorTable(g, std::vector<Matrix>(g.size(), Matrix::Identity(dim, dim)));
}

PropagatorTable PropagatorTable::inverse() const {
  std::vector<Matrix> inv;
  inv.reserve(values.size());
  for (const auto& m : values) {
    Eigen::FullPivLU<Matrix> lu(m);
    if (!lu.isInvertible() || lu.rcond() < 1e-13)
      throw NumericalError(Failure::SingularTransform, "propagator table is not invertible");
    inv.push_back(lu.inverse());
  }
  return PropagatorTable(grid, std::move(inv));
}

PropagatorTable operator*(const PropagatorTable& a, const PropagatorTable& b) {
  if (!(a.grid == b.grid)) throw NumericalError(Failure::GridMismatch, "propagator grids differ");
  std::vector<Matrix> out;
  out.reserve(a.values.size());
  for (std::size_t k = 0; k < a.values.size(); ++k) out.push_back(a.values[k] * b.values[k]);
  return PropagatorTable(a.grid, std::move(out));
}

std::string ExpansionStatus::to_string() const {
  switch (kind) {
    case Kind::Terminated: return "Terminated(" + std::to_string(value) + ")";
    case Kind::Truncated: return "Truncated(" + std::to_string(value) + ")";
    case Kind::Cyclic: return "Cyclic(" + std::to_string(value) + ")";
  }
  return "?";
}

LevelTrack track_levels(const HamiltonianSignal& h, double eps_deg) {
  const Grid& grid = h.grid();
  LevelTrack track{grid, {}};
  track.points.reserve(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    BiorthoEigensystem sys = bi_eigensystem(h.sample(k), eps_deg);
    if (k == 0) {
      track.points.push_back(std::move(sys));
      continue;
    }
    const BiorthoEigensystem& prev = track.points[k - 1];
    const std::size_t nlev = prev.levels.size();
    if (sys.levels.size() < nlev)
      throw NumericalError(Failure::LevelCrossing, "levels merge at t=" + std::to_string(grid[k]));
    if (sys.levels.size() > nlev)
      throw NumericalError(Failure::DegeneracyChange, "level splits at t=" + std::to_string(grid[k]));

    BiorthoEigensystem ordered;
    std::vector<bool> used(nlev, false);
    for (std::size_t n = 0; n < nlev; ++n) {
      Complex predicted = prev.levels[n].eigenvalue;
      if (k >= 2) predicted = 2.0 * predicted - track.points[k - 2].levels[n].eigenvalue;
      std::size_t best = nlev;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < nlev; ++j) {
        const double d = std::abs(sys.levels[j].eigenvalue - predicted);
        if (!used[j] && d < best_dist) {
          best = j;
          best_dist = d;
        }
      }
      used[best] = true;
      Level lv = sys.levels[best];
      if (lv.degeneracy() != prev.levels[n].degeneracy())
        throw NumericalError(Failure::DegeneracyChange, "multiplicity changes at t=" + std::to_string(grid[k]));
      // Polar alignment: make <phi(t_k-1)|psi(t_k)> Hermitian positive.
      const Matrix overlap = prev.levels[n].left.adjoint() * lv.right;
      const Matrix w = polar_unitary(overlap);
      lv.right = lv.right * w.adjoint();
      lv.left = lv.left * w.adjoint();
      ordered.levels.push_back(std::move(lv));
    }
    track.points.push_back(std::move(ordered));
  }
  return track;
}

namespace {

// Fourth-order finite difference of samples f(j) at index k of n points.
template <typename F>
Matrix stencil_derivative(F f, int k, int n, double dt) {
  if (n < 5) {
    if (k == 0) return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * dt);
    if (k == n - 1) return (3.0 * f(k) - 4.0 * f(k - 1) + f(k - 2)) / (2.0 * dt);
    return (f(k + 1) - f(k - 1)) / (2.0 * dt);
  }
  const double h = 12.0 * dt;
  if (k == 0) return (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / h;
  if (k == 1) return (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / h;
  if (k == n - 2)
    return (3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4) - f(n - 5)) / h;
  if (k == n - 1)
    return (25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3) - 16.0 * f(n - 4) + 3.0 * f(n - 5)) / h;
  return (f(k - 2) - 8.0 * f(k - 1) + 8.0 * f(k + 1) - f(k + 2)) / h;
}

Matrix invert_k(const Matrix& k) {
  Eigen::FullPivLU<Matrix> lu(k);
  if (!lu.isInvertible() || lu.rcond() < 1e-13)
    throw NumericalError(Failure::SingularK, "dynamical factor is not invertible");
  return lu.inverse();
}

}  // namespace

Couplings coupling_matrices(const LevelTrack& track, int k) {
  const int nlev = track.level_count();
  const int npts = track.grid.size();
  const double dt = track.grid.dt();
  Couplings c;
  c.blocks.assign(nlev, std::vector<Matrix>(nlev));
  for (int m = 0; m < nlev; ++m) {
    const Matrix dpsi = stencil_derivative([&](int j) -> const Matrix& { return track.points[j].levels[m].right; },
                                           k, npts, dt);
    for (int n = 0; n < nlev; ++n) c.blocks[n][m] = kI * track.points[k].levels[n].left.adjoint() * dpsi;
  }
  return c;
}

std::vector<Couplings> coupling_matrices(const LevelTrack& track) {
  std::vector<Couplings> all;
  all.reserve(track.grid.size());
  for (int k = 0; k < track.grid.size(); ++k) all.push_back(coupling_matrices(track, k));
  return all;
}

Couplings derivative_couplings(const LevelTrack& track, const HamiltonianSignal& h, int k) {
  const int nlev = track.level_count();
  const Matrix hdot = h.derivative_sample(k);
  const auto& levels = track.points[k].levels;
  Couplings c;
  c.blocks.assign(nlev, std::vector<Matrix>(nlev));
  for (int n = 0; n < nlev; ++n)
    for (int m = 0; m < nlev; ++m) {
      if (n == m) continue;
      c.blocks[n][m] = kI * (levels[n].left.adjoint() * hdot * levels[m].right) /
                       (levels[m].eigenvalue - levels[n].eigenvalue);
    }
  return c;
}

std::vector<Matrix> dynamical_factor(const LevelTrack& track, const std::vector<Couplings>& couplings, int level) {
  const Grid& grid = track.grid;
  const int npts = grid.size();
  const double dt = grid.dt();
  const int deg = track.degeneracy(level);

  std::vector<Complex> energy(npts);
  for (int k = 0; k < npts; ++k) energy[k] = track.points[k].levels[level].eigenvalue;
  const std::vector<Complex> phase = cumulative_integral(energy, dt);

  // Generator of the path-ordered factor: dP/dt = i A^{nn}(t) P.
  std::vector<Matrix> gen(npts);
  for (int k = 0; k < npts; ++k) gen[k] = kI * couplings[k].blocks[level][level];

  std::vector<Matrix> out(npts);
  if (deg == 1) {
    std::vector<Complex> g(npts);
    for (int k = 0; k < npts; ++k) g[k] = gen[k](0, 0);
    const std::vector<Complex> integral = cumulative_integral(g, dt);
    for (int k = 0; k < npts; ++k) out[k] = Matrix::Constant(1, 1, std::exp(-kI * phase[k] + integral[k]));
    return out;
  }

  // Two-node Gauss-Magnus step, later times multiply from the left.
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  Matrix p = Matrix::Identity(deg, deg);
  out[0] = p;
  for (int k = 0; k + 1 < npts; ++k) {
    const Matrix b1 = interpolate(gen, grid, grid[k] + c1 * dt);
    const Matrix b2 = interpolate(gen, grid, grid[k] + c2 * dt);
    const Matrix omega = 0.5 * dt * (b1 + b2) + (std::sqrt(3.0) / 12.0) * dt * dt * (b2 * b1 - b1 * b2);
    p = matrix_exp(omega) * p;
    out[k + 1] = p;
  }
  for (int k = 0; k < npts; ++k) out[k] *= std::exp(-kI * phase[k]);
  return out;
}

AdiabaticPropagator adiabatic_propagator(const LevelTrack& track, const std::vector<std::vector<Matrix>>& k_factors) {
  const Grid& grid = track.grid;
  const int dim = track.dim();
  const int nlev = track.level_count();
  std::vector<Matrix> fwd(grid.size()), inv(grid.size());
  const auto& start = track.points.front().levels;
  for (int k = 0; k < grid.size(); ++k) {
    Matrix u = Matrix::Zero(dim, dim);
    Matrix ui = Matrix::Zero(dim, dim);
    const auto& now = track.points[k].levels;
    for (int n = 0; n < nlev; ++n) {
      const Matrix& kn = k_factors[n][k];
      u += now[n].right * kn * start[n].left.adjoint();
      ui += start[n].right * invert_k(kn) * now[n].left.adjoint();
    }
    fwd[k] = std::move(u);
    inv[k] = std::move(ui);
  }
  fwd[0] = Matrix::Identity(dim, dim);
  inv[0] = Matrix::Identity(dim, dim);
  return {PropagatorTable(grid, std::move(fwd)), PropagatorTable(grid, std::move(inv))};
}

HamiltonianSignal canonical_transform(const HamiltonianSignal& h, const PropagatorTable& g,
                                      const PropagatorTable& g_inverse) {
  const Grid& grid = h.grid();
  if (!(grid == g.grid) || !(grid == g_inverse.grid))
    throw NumericalError(Failure::GridMismatch, "canonical transform grids differ");
  const std::vector<Matrix> dginv = grid_derivative(g_inverse.values, grid.dt());
  std::vector<Matrix> out(grid.size());
  for (int k = 0; k < grid.size(); ++k)
    out[k] = g[k] * h.sample(k) * g_inverse[k] - kI * g[k] * dginv[k];
  return HamiltonianSignal::tabulated(grid, std::move(out));
}

HamiltonianSignal canonical_transform(const HamiltonianSignal& h, const PropagatorTable& g) {
  return canonical_transform(h, g, g.inverse());
}

namespace {

double max_difference(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, (a[k] - b[k]).norm());
  return worst;
}

// H(t) = s(t) M with fixed M: the adiabatic propagator is exp(-i S(t) M).
std::optional<StepResult> fixed_direction_step(const HamiltonianSignal& h, const ExpansionOptions& opts) {
  const Grid& grid = h.grid();
  const auto& samples = h.samples();
  const int dim = static_cast<int>(samples.front().rows());
  std::size_t kref = 0;
  for (std::size_t k = 0; k < samples.size(); ++k)
    if (samples[k].norm() > samples[kref].norm()) kref = k;
  const double peak = samples[kref].norm();
  if (peak == 0.0) {
    PropagatorTable id = PropagatorTable::identity(grid, dim);
    return StepResult{id, id, h, 0.0, true};
  }
  const Matrix dir = samples[kref] / peak;
  std::vector<Complex> s(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    s[k] = (dir.adjoint() * samples[k]).trace();
    if ((samples[k] - s[k] * dir).norm() > opts.eps_direction * peak) return std::nullopt;
  }
  const std::vector<Complex> integral = cumulative_integral(s, grid.dt());
  std::vector<Matrix> fwd(samples.size()), inv(samples.size()), next(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    fwd[k] = matrix_exp(-kI * integral[k] * dir);
    inv[k] = matrix_exp(kI * integral[k] * dir);
    next[k] = inv[k] * (samples[k] - s[k] * dir) * fwd[k];
  }
  fwd[0] = Matrix::Identity(dim, dim);
  inv[0] = Matrix::Identity(dim, dim);
  PropagatorTable forward(grid, std::move(fwd));
  PropagatorTable inverse(grid, std::move(inv));
  const HamiltonianSignal check = canonical_transform(h, inverse, forward);
  const double disc = max_difference(next, check.samples());
  return StepResult{forward, inverse, HamiltonianSignal::tabulated(grid, std::move(next)), disc, true};
}

}  // namespace

StepResult adiabatic_step(const HamiltonianSignal& h, const ExpansionOptions& opts) {
  if (auto fixed = fixed_direction_step(h, opts)) return std::move(*fixed);

  const Grid& grid = h.grid();
  const LevelTrack track = track_levels(h, opts.eps_deg);
  const std::vector<Couplings> couplings = coupling_matrices(track);
  const int nlev = track.level_count();
  std::vector<std::vector<Matrix>> kf(nlev);
  for (int n = 0; n < nlev; ++n) kf[n] = dynamical_factor(track, couplings, n);
  AdiabaticPropagator u0 = adiabatic_propagator(track, kf);

  const int dim = track.dim();
  const auto& start = track.points.front().levels;
  std::vector<Matrix> next(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    Matrix acc = Matrix::Zero(dim, dim);
    for (int n = 0; n < nlev; ++n) {
      const Matrix kn_inv = invert_k(kf[n][k]);
      for (int m = 0; m < nlev; ++m) {
        if (m == n) continue;
        const Matrix block = -kn_inv * couplings[k].blocks[n][m] * kf[m][k];
        acc += start[n].right * block * start[m].left.adjoint();
      }
    }
    next[k] = std::move(acc);
  }
  const HamiltonianSignal check = canonical_transform(h, u0.inverse, u0.forward);
  const double disc = max_difference(next, check.samples());
  return StepResult{std::move(u0.forward), std::move(u0.inverse), HamiltonianSignal::tabulated(grid, std::move(next)),
                    disc, false};
}

ProductExpansion expand(const HamiltonianSignal& h, const ExpansionOptions& opts) {
  ProductExpansion e;
  const double scale = 1.0 + sup_norm(h);
  const double trunc_tol = opts.eps_trunc * scale;
  const double cycle_tol = opts.eps_cycle * scale;
  e.hamiltonians.push_back(h);
  for (int l = 0; l < opts.max_factors; ++l) {
    StepResult step = adiabatic_step(e.hamiltonians.back(), opts);
    e.factors.push_back(std::move(step.propagator));
    const double residual = sup_norm(step.next);
    e.residual_norms.push_back(residual);
    e.route_discrepancies.push_back(step.route_discrepancy);
    e.hamiltonians.push_back(std::move(step.next));
    if (residual < trunc_tol) {
      e.status = {ExpansionStatus::Kind::Terminated, l};
      return e;
    }
    const auto& latest = e.hamiltonians.back().samples();
    const int newest = static_cast<int>(e.hamiltonians.size()) - 1;
    for (int p = 1; p <= opts.cycle_depth && newest - p >= 0; ++p) {
      if (max_difference(latest, e.hamiltonians[newest - p].samples()) < cycle_tol) {
        e.status = {ExpansionStatus::Kind::Cyclic, p};
        return e;
      }
    }
  }
  e.status = {ExpansionStatus::Kind::Truncated, opts.max_factors};
  return e;
}

Matrix assemble(const ProductExpansion& e, double t, int factors) {
  const Grid& grid = e.factors.front().grid;
  const int k = grid.index_of(t);
  if (k < 0) throw std::invalid_argument("assemble: time is not on the grid");
  const int count = factors < 0 ? static_cast<int>(e.factors.size()) : std::min<int>(factors, e.factors.size());
  Matrix u = Matrix::Identity(e.factors.front().dim(), e.factors.front().dim());
  for (int l = 0; l < count; ++l) u = u * e.factors[l][k];
  return u;
}

PropagatorTable assemble(const ProductExpansion& e, int factors) {
  const Grid& grid = e.factors.front().grid;
  std::vector<Matrix> out(grid.size());
  for (int k = 0; k < grid.size(); ++k) out[k] = assemble(e, grid[k], factors);
  return PropagatorTable(grid, std::move(out));
}

double schrodinger_residual(const HamiltonianSignal& h, const PropagatorTable& u) {
  const std::vector<Matrix> du = grid_derivative(u.values, u.grid.dt());
  double worst = 0.0;
  for (int k = 0; k < u.grid.size(); ++k)
    worst = std::max(worst, (kI * du[k] - h.sample(k) * u[k]).norm());
  return worst;
}

}  // namespace adiaprod
