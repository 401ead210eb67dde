#include "admit/optimizer.hpp"

#include <cmath>
#include <vector>

namespace admit {

void GainBox::validate() const {
  if (!(m_min > 0) || !(k_min > 0) || !(d_min > 0))
    throw ConfigError("GainBox: lower bounds must be > 0");
  if (m_max < m_min || k_max < k_min || d_max < d_min)
    throw ConfigError("GainBox: upper bounds must dominate lower bounds");
}

bool GainBox::contains(const AdmittanceParams& p) const {
  const double tol = 1e-12;
  return (p.m.array() >= m_min * (1 - tol)).all() &&
         (p.m.array() <= m_max * (1 + tol)).all() &&
         (p.k.array() >= k_min * (1 - tol)).all() &&
         (p.k.array() <= k_max * (1 + tol)).all() &&
         (p.d.array() >= d_min * (1 - tol)).all() &&
         (p.d.array() <= d_max * (1 + tol)).all();
}

void OptProblem::validate() const {
  u_init.validate();
  weights.validate();
  box.validate();
  if (eps <= 0) throw ConfigError("OptProblem: eps must be > 0");
  if ((u_init.flat().array() <= eps).any())
    throw ConfigError("OptProblem: u_init must lie strictly above the floor");
  if (budget < 1) throw ConfigError("OptProblem: budget must be >= 1");
  if (dt <= 0) throw ConfigError("OptProblem: dt must be > 0");
  if (window.empty()) throw std::domain_error("OptProblem: empty force window");
}

double rollout_cost(const OptProblem& problem, const Vec& delta_u) {
  const Vec u_flat = problem.u_init.flat() + delta_u;
  if ((u_flat.array() < problem.eps - 1e-15).any())
    throw ConstraintError("rollout_cost: candidate below positivity floor");
  const ParamVector u = ParamVector::from_flat(u_flat);

  const size_t n_steps = problem.window.size();
  std::vector<ErrorState> states;
  states.reserve(n_steps + 1);
  states.push_back(problem.x0);
  ErrorState x = problem.x0;
  for (size_t k = 0; k < n_steps; ++k) {
    x = step_error_dynamics(x, problem.window.replay(k), u, problem.dt);
    states.push_back(x);
  }
  return trajectory_cost(states, problem.dt, problem.weights);
}

namespace {

// Central finite differences of an arbitrary cost, one-sided at the floor.
Vec fd_gradient(const RolloutCost& cost, const Vec& u_flat, const Vec& delta_u,
                double eps, int* evaluations) {
  Vec grad(delta_u.size());
  for (long i = 0; i < delta_u.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(u_flat[i]));
    Vec lo = delta_u, hi = delta_u;
    hi[i] += h;
    double denom = 2.0 * h;
    if (u_flat[i] - h < eps) {
      denom = h;  // one-sided near the floor
    } else {
      lo[i] -= h;
    }
    grad[i] = (cost(hi) - cost(lo)) / denom;
    if (evaluations) *evaluations += 2;
  }
  return grad;
}

}  // namespace

Vec rollout_cost_gradient(const OptProblem& problem, const Vec& delta_u,
                          int* evaluations) {
  const Vec u_flat = problem.u_init.flat() + delta_u;
  return fd_gradient([&](const Vec& du) { return rollout_cost(problem, du); },
                     u_flat, delta_u, problem.eps, evaluations);
}

namespace {

// log-gain vector [log m; log k; log d] per axis <-> flat parameter vector
Vec gains_to_log(const AdmittanceParams& p) {
  const long n = p.m.size();
  Vec g(3 * n);
  g.segment(0, n) = p.m.array().log();
  g.segment(n, n) = p.k.array().log();
  g.segment(2 * n, n) = p.d.array().log();
  return g;
}

Vec log_to_flat(const Vec& g) {
  const long n = g.size() / 3;
  const Vec m = g.segment(0, n).array().exp();
  const Vec k = g.segment(n, n).array().exp();
  const Vec d = g.segment(2 * n, n).array().exp();
  return to_param_vector(AdmittanceParams(m, k, d)).flat();
}

Vec clamp_log(const Vec& g, const GainBox& box) {
  const long n = g.size() / 3;
  Vec out = g;
  out.segment(0, n) =
      g.segment(0, n).cwiseMax(std::log(box.m_min)).cwiseMin(std::log(box.m_max));
  out.segment(n, n) =
      g.segment(n, n).cwiseMax(std::log(box.k_min)).cwiseMin(std::log(box.k_max));
  out.segment(2 * n, n) = g.segment(2 * n, n)
                              .cwiseMax(std::log(box.d_min))
                              .cwiseMin(std::log(box.d_max));
  return out;
}

}  // namespace

OptResult optimize_local(const RolloutCost& cost, const ParamVector& u_init,
                         const GainBox& box, int budget, double trust_radius) {
  const Vec u0 = u_init.flat();
  const long dim = u0.size();

  OptResult res;
  res.delta_u = Vec::Zero(dim);

  int evals = 0;
  const auto cost_at = [&](const Vec& g_pt) {
    ++evals;
    return cost(log_to_flat(g_pt) - u0);
  };

  // Out-of-range starting gains are projected into the box: the online search
  // region doubles as the enforced stable gain range, so the projection itself
  // is part of the first update.
  const Vec g_init = gains_to_log(recover_gains(u_init));
  Vec g = clamp_log(g_init, box);
  // Trust cube centered at the projected start; the snap into the box itself
  // is exempt from the rate limit.
  const Vec g_anchor = g;
  const auto project = [&](const Vec& g_pt) -> Vec {
    Vec out = g_pt;
    if (trust_radius > 0) {
      const Vec lo = g_anchor.array() - trust_radius;
      const Vec hi = g_anchor.array() + trust_radius;
      out = out.cwiseMax(lo).cwiseMin(hi);
    }
    return clamp_log(out, box);
  };
  Vec best_du;
  if (g == g_init) {
    res.cost_before = cost(res.delta_u);
    ++evals;
    best_du = res.delta_u;
  } else {
    best_du = log_to_flat(g) - u0;
    res.cost_before = cost_at(g);
  }
  double best_cost = res.cost_before;

  // Coarse seeding pass: the window cost is cheap and can be multimodal, so
  // scan a small log-spaced grid (full 3-D grid for one axis, greedy
  // per-coordinate sweep otherwise) and descend from the best point found.
  const int kSeedPts = 5;
  const Vec box_lo = clamp_log(Vec::Constant(dim, -1e300), box);
  const Vec box_hi = clamp_log(Vec::Constant(dim, 1e300), box);
  const auto coord_val = [&](long i, int j) {
    return box_lo[i] + (box_hi[i] - box_lo[i]) * j / (kSeedPts - 1);
  };
  if (dim == 3 && budget >= 150 + 2 * static_cast<int>(dim) + 1) {
    Vec g_try(3);
    for (int im = 0; im < kSeedPts; ++im)
      for (int ik = 0; ik < kSeedPts; ++ik)
        for (int id = 0; id < kSeedPts; ++id) {
          g_try << coord_val(0, im), coord_val(1, ik), coord_val(2, id);
          g_try = project(g_try);
          const double c = cost_at(g_try);
          if (c < best_cost) {
            best_cost = c;
            g = g_try;
            best_du = log_to_flat(g_try) - u0;
          }
        }
  } else if (budget >= static_cast<int>(dim) * kSeedPts + 2 * static_cast<int>(dim) + 2) {
    for (long i = 0; i < dim; ++i)
      for (int j = 0; j < kSeedPts; ++j) {
        Vec g_try = g;
        g_try[i] = coord_val(i, j);
        g_try = project(g_try);
        const double c = cost_at(g_try);
        if (c < best_cost) {
          best_cost = c;
          g = g_try;
          best_du = log_to_flat(g_try) - u0;
        }
      }
  }

  double alpha = 0.5;  // log-space step
  while (true) {
    if (evals + 2 * static_cast<int>(dim) + 1 > budget) break;  // out of budget

    // central differences on the log-gains, one-sided at the box faces
    Vec grad(dim);
    for (long i = 0; i < dim; ++i) {
      const double h = 1e-6;
      Vec lo = g, hi = g;
      hi[i] += h;
      lo[i] -= h;
      double denom = 2.0 * h;
      if (project(hi)[i] != hi[i]) {
        hi = g;
        denom = h;
      } else if (project(lo)[i] != lo[i]) {
        lo = g;
        denom = h;
      }
      grad[i] = (cost_at(hi) - cost_at(lo)) / denom;
    }
    const double gnorm = grad.norm();
    if (gnorm < 1e-14) {
      res.converged = true;
      break;
    }
    const Vec dir = -grad / gnorm;

    bool improved = false;
    while (evals < budget && alpha > 1e-7) {
      const Vec g_try = project(g + alpha * dir);
      const double c = cost_at(g_try);
      if (c < best_cost - 1e-15 * (1.0 + best_cost)) {
        g = g_try;
        best_cost = c;
        best_du = log_to_flat(g_try) - u0;
        alpha = std::min(alpha * 1.6, 2.0);
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) {
      // no descent at the resolution limit: treat as a local optimum
      res.converged = alpha <= 1e-7;
      break;
    }
  }

  res.delta_u = best_du;
  res.cost_after = best_cost;
  res.evaluations = evals;
  return res;
}

OptResult optimize_residual(const OptProblem& problem) {
  problem.validate();
  return optimize_local(
      [&](const Vec& du) { return rollout_cost(problem, du); }, problem.u_init,
      problem.box, problem.budget, problem.trust_radius);
}

}  // namespace admit
