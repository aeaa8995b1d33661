#include "seaice/momentum.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

namespace seaice {

namespace {
// |(x, y)| without the overflow guards of std::hypot, which dominate the point loops.
inline double speed(double x, double y) { return std::sqrt(x * x + y * y); }
}  // namespace

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::Picard: return "picard";
    case Scheme::EVP: return "evp";
    case Scheme::MEVP: return "mevp";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "picard" || name == "vp" || name == "VP_PICARD") return Scheme::Picard;
  if (name == "evp" || name == "EVP") return Scheme::EVP;
  if (name == "mevp" || name == "MEVP") return Scheme::MEVP;
  throw std::invalid_argument("unknown solver '" + std::string(name) + "' (expected picard, evp or mevp)");
}

SolverConfig SolverConfig::defaults(Scheme s) {
  SolverConfig c;
  c.scheme = s;
  c.n_sub = s == Scheme::EVP ? 500 : 100;
  return c;
}

void SolverConfig::validate() const {
  if (n_sub < 1) throw std::invalid_argument("solver: n_sub must be >= 1");
  if (!(T_evp > 0.0)) throw std::invalid_argument("solver: T_evp must be positive");
  if (!(alpha >= 1.0) || !(beta >= 1.0)) throw std::invalid_argument("solver: alpha and beta must be >= 1");
  if (!(picard_tol > 0.0 && picard_tol < 1.0)) throw std::invalid_argument("solver: picard_tol must be in (0,1)");
  if (!(linear_tol > 0.0 && linear_tol < 1.0)) throw std::invalid_argument("solver: linear_tol must be in (0,1)");
  if (picard_max < 1) throw std::invalid_argument("solver: picard_max must be >= 1");
  if (linear_solver != "lu" && linear_solver != "ldlt" && linear_solver != "bicgstab")
    throw std::invalid_argument("solver: linear_solver must be ldlt, lu or bicgstab");
  if (cd1_gamma < 0.0) throw std::invalid_argument("solver: cd1_gamma must be >= 0");
  if (picard_anderson < 0) throw std::invalid_argument("solver: picard_anderson must be >= 0");
}

Forcing zero_forcing(const Discretization& op, const ForcingParams& p) {
  Forcing f;
  f.params = p;
  f.wind.assign(op.num_points(), Vec2{});
  f.ocean.assign(op.num_points(), Vec2{});
  return f;
}

std::vector<Vec2> surface_tilt(const Discretization& op, std::span<const double> ssh, double g) {
  std::vector<Vec2> grad_e(op.num_elements());
  const int nq = op.qp_per_element;
  for (int e = 0; e < op.num_elements(); ++e) {
    Vec2 acc;
    for (int q = 0; q < nq; ++q) {
      const int i = e * nq + q;
      for (int k = 0; k < op.elem_num_nodes[e]; ++k) {
        acc.x += op.qp_gx[i][k] * ssh[op.elem_nodes[e][k]] / nq;
        acc.y += op.qp_gy[i][k] * ssh[op.elem_nodes[e][k]] / nq;
      }
    }
    grad_e[e] = acc;
  }
  std::vector<Vec2> out(op.num_points());
  for (int p = 0; p < op.num_points(); ++p) {
    double wsum = 0.0;
    Vec2 acc;
    for (int t = op.point_offsets[p]; t < op.point_offsets[p + 1]; ++t) {
      const int e = op.point_incidence[t] / Discretization::kNodes;
      const double w = op.elem_mass_share[e][op.point_incidence[t] % Discretization::kNodes];
      acc.x += w * grad_e[e].x;
      acc.y += w * grad_e[e].y;
      wsum += w;
    }
    if (wsum > 0.0) out[p] = {-g * acc.x / wsum, -g * acc.y / wsum};
  }
  return out;
}

Vec2 surface_stress(Vec2 v, Vec2 wind, Vec2 ocean, const ForcingParams& p) {
  const double wa = p.rho_a * p.C_a * speed(wind.x, wind.y);
  const Vec2 rel{ocean.x - v.x, ocean.y - v.y};
  const double wo = p.rho_o * p.C_o * speed(rel.x, rel.y);
  return {wa * wind.x + wo * rel.x, wa * wind.y + wo * rel.y};
}

State make_state(const Discretization& op) {
  State s;
  s.v.assign(op.num_points(), Vec2{});
  s.sigma.assign(op.num_qp(), Stress{});
  s.H.assign(op.grid.num_cells(), 0.0);
  s.A.assign(op.grid.num_cells(), 0.0);
  return s;
}

StepCoefficients step_coefficients(const Discretization& op, std::span<const double> H,
                                   std::span<const double> A, const RheoParams& rheo) {
  StepCoefficients c;
  std::vector<double> density(H.size());
  std::vector<double> P0(H.size());
  for (std::size_t i = 0; i < H.size(); ++i) {
    density[i] = rheo.rho_ice * H[i];
    P0[i] = ice_strength_unchecked(H[i], A[i], rheo);
  }
  c.mass = lumped_mass(op, density);
  const std::vector<double> ones(H.size(), 1.0);
  const std::vector<double> area = lumped_mass(op, ones);
  for (std::size_t p = 0; p < c.mass.size(); ++p) c.mass[p] = std::max(c.mass[p], rheo.rho_ice * 1e-4 * area[p]);
  c.ice_area = lumped_mass(op, A);
  c.elem_P0 = element_cell_mean(op, P0);
  return c;
}

void evaluate_rheology(const Discretization& op, std::span<const Vec2> v, std::span<const double> elem_P0,
                       const RheoParams& rheo, std::span<StrainRate> eps, std::span<RheologyEval> r) {
  compute_strain(op, v, eps);
  const int nq = op.qp_per_element;
  const int n = op.num_qp();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) r[i] = evaluate_rheology(eps[i], elem_P0[i / nq], rheo);
}

namespace {

void check_finite(std::span<const Vec2> v, const char* solver, int iteration) {
  for (std::size_t p = 0; p < v.size(); ++p) {
    if (!std::isfinite(v[p].x) || !std::isfinite(v[p].y)) {
      std::ostringstream msg;
      msg << solver << ": non-finite velocity at point " << p << " in iteration " << iteration;
      throw SolverBlowup(msg.str());
    }
  }
}

std::vector<double> element_mean_zeta(const Discretization& op, std::span<const RheologyEval> r) {
  const int nq = op.qp_per_element;
  std::vector<double> z(op.num_elements());
  for (int e = 0; e < op.num_elements(); ++e) {
    double s = 0.0;
    for (int q = 0; q < nq; ++q) s += r[e * nq + q].zeta;
    z[e] = s / nq;
  }
  return z;
}

// Internal force: weak divergence of sigma plus, for CD1, the jump penalty
// with the element-mean zeta of r.
void internal_force(const Discretization& op, std::span<const Stress> sigma, std::span<const Vec2> v,
                    std::span<const RheologyEval> r, double gamma, std::span<Vec2> f) {
  stress_divergence(op, sigma, f);
  if (op.staggering == Staggering::CD1 && gamma > 0.0) {
    const std::vector<double> z = element_mean_zeta(op, r);
    add_cd1_stabilization(op, v, z, gamma, f);
  }
}

Vec2 tilt_at(const Forcing& f, int p) { return f.tilt.empty() ? Vec2{} : f.tilt[p]; }

// Pointwise semi-implicit solve of
//   (m/dts + a c_w) v + m f e_z x v = rhs
Vec2 solve_point(double d, double mf, Vec2 rhs) {
  const double det = d * d + mf * mf;
  return {(d * rhs.x + mf * rhs.y) / det, (d * rhs.y - mf * rhs.x) / det};
}

// One element sweep of an explicit solver: strain, rheology and the stress
// update at every quadrature point, accumulated straight into element nodal
// forces, followed by the point gather and, for CD1, the jump penalty.
template <class StressUpdate>
void explicit_internal_force(const Discretization& op, std::span<const Vec2> v, std::span<const double> elem_P0,
                             const RheoParams& rheo, double gamma, StressUpdate update, std::span<Stress> sigma,
                             std::vector<ElementForces>& ef, std::vector<double>& zeta_elem, std::span<Vec2> f) {
  const int ne = op.num_elements();
  const int nq = op.qp_per_element;
  ef.resize(ne);
  zeta_elem.resize(ne);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) {
    const auto& nodes = op.elem_nodes[e];
    const Vec2 vn[4] = {v[nodes[0]], v[nodes[1]], v[nodes[2]], v[nodes[3]]};
    ElementForces loc{};
    double zsum = 0.0;
    for (int q = 0; q < nq; ++q) {
      const int i = e * nq + q;
      const auto& gx = op.qp_gx[i];
      const auto& gy = op.qp_gy[i];
      StrainRate s;
      s.e11 = gx[0] * vn[0].x + gx[1] * vn[1].x + gx[2] * vn[2].x + gx[3] * vn[3].x;
      s.e22 = gy[0] * vn[0].y + gy[1] * vn[1].y + gy[2] * vn[2].y + gy[3] * vn[3].y;
      s.e12 = 0.5 * (gy[0] * vn[0].x + gy[1] * vn[1].x + gy[2] * vn[2].x + gy[3] * vn[3].x +
                     gx[0] * vn[0].y + gx[1] * vn[1].y + gx[2] * vn[2].y + gx[3] * vn[3].y);
      const RheologyEval r = evaluate_rheology(s, elem_P0[e], rheo);
      zsum += r.zeta;
      const Stress t = update(sigma[i], s, r);
      sigma[i] = t;
      const double w = op.qp_weight[i];
      for (int k = 0; k < 4; ++k) {
        loc[k].x -= w * (t.s11 * gx[k] + t.s12 * gy[k]);
        loc[k].y -= w * (t.s12 * gx[k] + t.s22 * gy[k]);
      }
    }
    ef[e] = loc;
    zeta_elem[e] = zsum / nq;
  }
  gather_element_forces(op, ef, f);
  if (op.staggering == Staggering::CD1 && gamma > 0.0) add_cd1_stabilization(op, v, zeta_elem, gamma, f);
}

}  // namespace

namespace {

std::vector<Vec2> residual_with(const Discretization& op, const StepCoefficients& c, const State& state,
                                const Forcing& forcing, double dt, const SolverConfig& cfg,
                                const RheoParams& rheo, std::span<const Vec2> v) {
  std::vector<StrainRate> eps(op.num_qp());
  std::vector<RheologyEval> r(op.num_qp());
  evaluate_rheology(op, v, c.elem_P0, rheo, eps, r);
  std::vector<Stress> sigma(op.num_qp());
  for (int i = 0; i < op.num_qp(); ++i) sigma[i] = vp_stress(eps[i], r[i]);
  std::vector<Vec2> f(op.num_points());
  internal_force(op, sigma, v, r, cfg.cd1_gamma, f);
  const double fc = forcing.params.f_c;
  std::vector<Vec2> res(op.num_points());
  for (int p = 0; p < op.num_points(); ++p) {
    if (op.on_boundary(p)) continue;
    const double m = c.mass[p];
    const Vec2 tau = surface_stress(v[p], forcing.wind[p], forcing.ocean[p], forcing.params);
    const Vec2 tilt = tilt_at(forcing, p);
    res[p].x = m * (v[p].x - state.v[p].x) / dt - m * fc * v[p].y - f[p].x - c.ice_area[p] * tau.x - m * tilt.x;
    res[p].y = m * (v[p].y - state.v[p].y) / dt + m * fc * v[p].x - f[p].y - c.ice_area[p] * tau.y - m * tilt.y;
  }
  return res;
}

double norm(std::span<const Vec2> r) {
  double s = 0.0;
  for (const Vec2& a : r) s += a.x * a.x + a.y * a.y;
  return std::sqrt(s);
}

}  // namespace

std::vector<Vec2> vp_residual(const Discretization& op, const State& state, const Forcing& forcing,
                              double dt, const SolverConfig& cfg, const RheoParams& rheo,
                              std::span<const Vec2> v) {
  const StepCoefficients c = step_coefficients(op, state.H, state.A, rheo);
  return residual_with(op, c, state, forcing, dt, cfg, rheo, v);
}

SolveReport mevp_solve(const Discretization& op, State& state, const Forcing& forcing, double dt,
                       const SolverConfig& cfg, const RheoParams& rheo, std::span<const Vec2> initial) {
  const StepCoefficients c = step_coefficients(op, state.H, state.A, rheo);
  const int np = op.num_points();
  const ForcingParams& fp = forcing.params;
  std::vector<Vec2> v = initial.empty() ? state.v : std::vector<Vec2>(initial.begin(), initial.end());
  apply_dirichlet(op, v);
  std::vector<ElementForces> ef;
  std::vector<double> zeta_elem;
  std::vector<Vec2> f(np);
  std::vector<Vec2> next(np);
  // Wind stress and the part of the momentum right-hand side fixed during the step.
  std::vector<Vec2> fixed(np);
  for (int p = 0; p < np; ++p) {
    const double wa = fp.rho_a * fp.C_a * speed(forcing.wind[p].x, forcing.wind[p].y);
    const Vec2 tilt = tilt_at(forcing, p);
    fixed[p].x = c.mass[p] * state.v[p].x / dt + c.ice_area[p] * wa * forcing.wind[p].x + c.mass[p] * tilt.x;
    fixed[p].y = c.mass[p] * state.v[p].y / dt + c.ice_area[p] * wa * forcing.wind[p].y + c.mass[p] * tilt.y;
  }
  const double inv_alpha = 1.0 / cfg.alpha;
  const double inv_beta = 1.0 / cfg.beta;
  SolveReport rep;
  rep.scheme = Scheme::MEVP;
  for (int it = 0; it < cfg.n_sub; ++it) {
    explicit_internal_force(
        op, v, c.elem_P0, rheo, cfg.cd1_gamma,
        [inv_alpha](const Stress& s, const StrainRate& eps, const RheologyEval& r) {
          const Stress t = vp_stress(eps, r);
          return Stress{s.s11 + (t.s11 - s.s11) * inv_alpha, s.s22 + (t.s22 - s.s22) * inv_alpha,
                        s.s12 + (t.s12 - s.s12) * inv_alpha};
        },
        state.sigma, ef, zeta_elem, f);
    double dnorm = 0.0;
    double vnorm = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : dnorm, vnorm)
    for (int p = 0; p < np; ++p) {
      if (op.on_boundary(p)) {
        next[p] = {};
        continue;
      }
      const Vec2 o = forcing.ocean[p];
      const double cw = fp.rho_o * fp.C_o * speed(o.x - v[p].x, o.y - v[p].y);
      const double acw = c.ice_area[p] * cw;
      const Vec2 rhs{fixed[p].x + f[p].x + acw * o.x, fixed[p].y + f[p].y + acw * o.y};
      const Vec2 ve = solve_point(c.mass[p] / dt + acw, c.mass[p] * fp.f_c, rhs);
      next[p] = {v[p].x + (ve.x - v[p].x) * inv_beta, v[p].y + (ve.y - v[p].y) * inv_beta};
      const double dx = next[p].x - v[p].x;
      const double dy = next[p].y - v[p].y;
      dnorm += dx * dx + dy * dy;
      vnorm += next[p].x * next[p].x + next[p].y * next[p].y;
    }
    v.swap(next);
    rep.residual = vnorm > 0.0 ? std::sqrt(dnorm / vnorm) : 0.0;
    rep.iterations = it + 1;
  }
  check_finite(v, "mevp", rep.iterations);
  state.v = std::move(v);
  return rep;
}

SolveReport evp_solve(const Discretization& op, State& state, const Forcing& forcing, double dt,
                      const SolverConfig& cfg, const RheoParams& rheo) {
  const StepCoefficients c = step_coefficients(op, state.H, state.A, rheo);
  const int np = op.num_points();
  const ForcingParams& fp = forcing.params;
  const double dts = dt / cfg.n_sub;
  std::vector<Vec2>& v = state.v;
  apply_dirichlet(op, v);
  std::vector<ElementForces> ef;
  std::vector<double> zeta_elem;
  std::vector<Vec2> f(np);
  std::vector<Vec2> fixed(np);
  for (int p = 0; p < np; ++p) {
    const double wa = fp.rho_a * fp.C_a * speed(forcing.wind[p].x, forcing.wind[p].y);
    const Vec2 tilt = tilt_at(forcing, p);
    fixed[p].x = c.ice_area[p] * wa * forcing.wind[p].x + c.mass[p] * tilt.x;
    fixed[p].y = c.ice_area[p] * wa * forcing.wind[p].y + c.mass[p] * tilt.y;
  }
  SolveReport rep;
  rep.scheme = Scheme::EVP;
  for (int it = 0; it < cfg.n_sub; ++it) {
    explicit_internal_force(
        op, v, c.elem_P0, rheo, cfg.cd1_gamma,
        [&](const Stress& s, const StrainRate& eps, const RheologyEval& r) {
          return evp_stress_update(s, eps, r, cfg.T_evp, dts, rheo);
        },
        state.sigma, ef, zeta_elem, f);
    double dnorm = 0.0;
    double vnorm = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : dnorm, vnorm)
    for (int p = 0; p < np; ++p) {
      if (op.on_boundary(p)) continue;
      const Vec2 o = forcing.ocean[p];
      const double cw = fp.rho_o * fp.C_o * speed(o.x - v[p].x, o.y - v[p].y);
      const double acw = c.ice_area[p] * cw;
      const double md = c.mass[p] / dts;
      const Vec2 rhs{md * v[p].x + fixed[p].x + f[p].x + acw * o.x, md * v[p].y + fixed[p].y + f[p].y + acw * o.y};
      const Vec2 nv = solve_point(md + acw, c.mass[p] * fp.f_c, rhs);
      const double dx = nv.x - v[p].x;
      const double dy = nv.y - v[p].y;
      dnorm += dx * dx + dy * dy;
      vnorm += nv.x * nv.x + nv.y * nv.y;
      v[p] = nv;
    }
    rep.residual = vnorm > 0.0 ? std::sqrt(dnorm / vnorm) : 0.0;
    rep.iterations = it + 1;
  }
  check_finite(v, "evp", rep.iterations);
  return rep;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct LinearSystem {
  SpMat A;
  Eigen::VectorXd b;
};

LinearSystem assemble_picard(const Discretization& op, const State& state, const Forcing& forcing, double dt,
                             const SolverConfig& cfg, const StepCoefficients& c,
                             std::span<const Vec2> v, std::span<const RheologyEval> r, bool lag_coriolis) {
  const int np = op.num_points();
  const int nq = op.qp_per_element;
  const ForcingParams& fp = forcing.params;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(op.num_qp()) * 64 + 4 * np);
  for (int e = 0; e < op.num_elements(); ++e) {
    const int nn = op.elem_num_nodes[e];
    const auto& nodes = op.elem_nodes[e];
    for (int q = 0; q < nq; ++q) {
      const int i = e * nq + q;
      const double w = op.qp_weight[i];
      const double zp = (r[i].zeta + r[i].eta) * w;
      const double zm = (r[i].zeta - r[i].eta) * w;
      const double et = r[i].eta * w;
      const auto& gx = op.qp_gx[i];
      const auto& gy = op.qp_gy[i];
      for (int a = 0; a < nn; ++a) {
        if (op.on_boundary(nodes[a])) continue;
        const int ra = 2 * nodes[a];
        for (int b = 0; b < nn; ++b) {
          if (op.on_boundary(nodes[b])) continue;
          const int cb = 2 * nodes[b];
          trip.emplace_back(ra, cb, zp * gx[a] * gx[b] + et * gy[a] * gy[b]);
          trip.emplace_back(ra, cb + 1, zm * gx[a] * gy[b] + et * gy[a] * gx[b]);
          trip.emplace_back(ra + 1, cb, zm * gy[a] * gx[b] + et * gx[a] * gy[b]);
          trip.emplace_back(ra + 1, cb + 1, zp * gy[a] * gy[b] + et * gx[a] * gx[b]);
        }
      }
    }
  }
  if (op.staggering == Staggering::CD1 && cfg.cd1_gamma > 0.0) {
    const std::vector<double> z = element_mean_zeta(op, r);
    for (const JumpFace& jf : op.jump_faces) {
      const double scale = cfg.cd1_gamma * 0.5 * (z[jf.elem_left] + z[jf.elem_right]) * jf.inv_h;
      for (int q = 0; q < JumpFace::kGauss; ++q) {
        const double s = scale * jf.weight[q];
        for (int k = 0; k < JumpFace::kNodes; ++k) {
          if (op.on_boundary(jf.nodes[k])) continue;
          for (int l = 0; l < JumpFace::kNodes; ++l) {
            if (op.on_boundary(jf.nodes[l])) continue;
            const double val = s * jf.coef[q][k] * jf.coef[q][l];
            trip.emplace_back(2 * jf.nodes[k], 2 * jf.nodes[l], val);
            trip.emplace_back(2 * jf.nodes[k] + 1, 2 * jf.nodes[l] + 1, val);
          }
        }
      }
    }
  }

  // Pressure enters the right-hand side through the divergence of -P/2 I.
  std::vector<Stress> sp(op.num_qp());
  for (int i = 0; i < op.num_qp(); ++i) sp[i] = {-0.5 * r[i].P, -0.5 * r[i].P, 0.0};
  std::vector<Vec2> fpress(np);
  stress_divergence(op, sp, fpress);

  LinearSystem sys;
  sys.b = Eigen::VectorXd::Zero(2 * np);
  for (int p = 0; p < np; ++p) {
    if (op.on_boundary(p)) {
      trip.emplace_back(2 * p, 2 * p, 1.0);
      trip.emplace_back(2 * p + 1, 2 * p + 1, 1.0);
      continue;
    }
    const Vec2 o = forcing.ocean[p];
    const double cw = fp.rho_o * fp.C_o * speed(o.x - v[p].x, o.y - v[p].y);
    const double acw = c.ice_area[p] * cw;
    const double m = c.mass[p];
    const double d = m / dt + acw;
    trip.emplace_back(2 * p, 2 * p, d);
    trip.emplace_back(2 * p + 1, 2 * p + 1, d);
    double cor_x = 0.0;
    double cor_y = 0.0;
    if (lag_coriolis) {
      cor_x = m * fp.f_c * v[p].y;
      cor_y = -m * fp.f_c * v[p].x;
    } else {
      trip.emplace_back(2 * p, 2 * p + 1, -m * fp.f_c);
      trip.emplace_back(2 * p + 1, 2 * p, m * fp.f_c);
    }
    const double wa = fp.rho_a * fp.C_a * speed(forcing.wind[p].x, forcing.wind[p].y);
    const Vec2 tilt = tilt_at(forcing, p);
    sys.b[2 * p] =
        m * state.v[p].x / dt + fpress[p].x + c.ice_area[p] * wa * forcing.wind[p].x + acw * o.x + m * tilt.x + cor_x;
    sys.b[2 * p + 1] =
        m * state.v[p].y / dt + fpress[p].y + c.ice_area[p] * wa * forcing.wind[p].y + acw * o.y + m * tilt.y + cor_y;
  }
  sys.A.resize(2 * np, 2 * np);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

}  // namespace

SolveReport picard_vp_solve(const Discretization& op, State& state, const Forcing& forcing, double dt,
                            const SolverConfig& cfg, const RheoParams& rheo) {
  const StepCoefficients c = step_coefficients(op, state.H, state.A, rheo);
  const int np = op.num_points();
  std::vector<Vec2> v = state.v;
  apply_dirichlet(op, v);
  std::vector<StrainRate> eps(op.num_qp());
  std::vector<RheologyEval> r(op.num_qp());
  const bool lag_coriolis = cfg.linear_solver != "lu";
  Eigen::SparseLU<SpMat> lu;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  bool analyzed = false;
  SolveReport rep;
  rep.scheme = Scheme::Picard;
  rep.converged = false;
  const double r0 = norm(residual_with(op, c, state, forcing, dt, cfg, rheo, v));
  double rk = r0;
  rep.history.push_back(r0 > 0.0 ? 1.0 : 0.0);
  if (r0 == 0.0) {
    rep.converged = true;
    rep.iterations = 1;
  }
  const int depth = cfg.picard_anderson;
  std::vector<Eigen::VectorXd> dF;
  std::vector<Eigen::VectorXd> dG;
  Eigen::VectorXd f_prev;
  Eigen::VectorXd g_prev;
  bool have_prev = false;
  for (int k = 1; k <= cfg.picard_max && !rep.converged; ++k) {
    evaluate_rheology(op, v, c.elem_P0, rheo, eps, r);
    const LinearSystem sys = assemble_picard(op, state, forcing, dt, cfg, c, v, r, lag_coriolis);
    Eigen::VectorXd x(2 * np);
    for (int p = 0; p < np; ++p) {
      x[2 * p] = v[p].x;
      x[2 * p + 1] = v[p].y;
    }
    if (cfg.linear_solver == "lu") {
      if (!analyzed) {
        lu.analyzePattern(sys.A);
        analyzed = true;
      }
      lu.factorize(sys.A);
      if (lu.info() != Eigen::Success) throw SolverBlowup("picard: sparse LU factorization failed");
      x = lu.solve(sys.b);
    } else if (cfg.linear_solver == "ldlt") {
      if (!analyzed) {
        ldlt.analyzePattern(sys.A);
        analyzed = true;
      }
      ldlt.factorize(sys.A);
      if (ldlt.info() != Eigen::Success) throw SolverBlowup("picard: LDLT factorization failed");
      x = ldlt.solve(sys.b);
    } else {
      Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<double>> it;
      it.setTolerance(cfg.linear_tol);
      it.setMaxIterations(20 * 2 * np);
      it.compute(sys.A);
      x = it.solveWithGuess(sys.b, x);
    }
    Eigen::VectorXd xk(2 * np);
    for (int p = 0; p < np; ++p) {
      xk[2 * p] = v[p].x;
      xk[2 * p + 1] = v[p].y;
    }
    if (depth > 0) {
      // Anderson mixing of the Picard map G(v_k) = x over the last `depth` iterates.
      const Eigen::VectorXd fk = x - xk;
      if (have_prev) {
        dF.push_back(fk - f_prev);
        dG.push_back(x - g_prev);
        if (static_cast<int>(dF.size()) > depth) {
          dF.erase(dF.begin());
          dG.erase(dG.begin());
        }
      }
      f_prev = fk;
      g_prev = x;
      have_prev = true;
      if (!dF.empty()) {
        const int m = static_cast<int>(dF.size());
        Eigen::MatrixXd F(2 * np, m);
        Eigen::MatrixXd G(2 * np, m);
        for (int j = 0; j < m; ++j) {
          F.col(j) = dF[j];
          G.col(j) = dG[j];
        }
        const Eigen::VectorXd gamma = F.colPivHouseholderQr().solve(fk);
        x -= G * gamma;
      }
    }
    for (int p = 0; p < np; ++p) v[p] = {x[2 * p], x[2 * p + 1]};
    check_finite(v, "picard", k);
    rk = norm(residual_with(op, c, state, forcing, dt, cfg, rheo, v));
    rep.iterations = k;
    rep.residual = rk / r0;
    rep.history.push_back(rep.residual);
    if (rep.residual <= cfg.picard_tol) rep.converged = true;
  }
  // Stress memory stays consistent with the final velocity.
  evaluate_rheology(op, v, c.elem_P0, rheo, eps, r);
  for (int i = 0; i < op.num_qp(); ++i) state.sigma[i] = vp_stress(eps[i], r[i]);
  state.v = std::move(v);
  return rep;
}

SolveReport momentum_step(const Discretization& op, State& state, const Forcing& forcing, double dt,
                          const SolverConfig& cfg, const RheoParams& rheo) {
  switch (cfg.scheme) {
    case Scheme::Picard: return picard_vp_solve(op, state, forcing, dt, cfg, rheo);
    case Scheme::EVP: return evp_solve(op, state, forcing, dt, cfg, rheo);
    case Scheme::MEVP: return mevp_solve(op, state, forcing, dt, cfg, rheo);
  }
  throw std::invalid_argument("momentum_step: unknown scheme");
}

}  // namespace seaice
