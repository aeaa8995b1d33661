#pragma once

#include <algorithm>
#include <cmath>

namespace seaice {

/// Material parameters of the viscous-plastic law with an elliptic yield curve.
struct RheoParams {
  double rho_ice = 900.0;     // kg/m^3
  double P_star = 27500.0;    // N/m^2
  double C = 20.0;            // concentration sensitivity
  double e = 2.0;             // yield-curve axis ratio
  double Delta_min = 2e-9;    // 1/s
  /// Multiplies the replacement pressure; 1 keeps P = P0*Delta/(2(Delta+Delta_min)),
  /// 2 gives the P0*Delta/(Delta+Delta_min) normalization used elsewhere.
  double pressure_factor = 1.0;

  /// Throws std::invalid_argument for non-positive parameters or e < 1.
  void validate() const;
};

/// Symmetric strain-rate tensor (1/s); e12 == e21.
struct StrainRate {
  double e11 = 0.0;
  double e22 = 0.0;
  double e12 = 0.0;
};

/// Symmetric, vertically integrated stress (N/m).
struct Stress {
  double s11 = 0.0;
  double s22 = 0.0;
  double s12 = 0.0;
};

struct RheologyEval {
  double Delta = 0.0;  // 1/s
  double zeta = 0.0;   // N s/m
  double eta = 0.0;    // N s/m
  double P0 = 0.0;     // N/m
  double P = 0.0;      // N/m
};

struct Viscosities {
  double zeta = 0.0;
  double eta = 0.0;
};

inline double delta(const StrainRate& eps, const RheoParams& p) {
  const double ie2 = 1.0 / (p.e * p.e);
  const double d2 = (eps.e11 * eps.e11 + eps.e22 * eps.e22) * (1.0 + ie2) +
                    4.0 * eps.e12 * eps.e12 * ie2 + 2.0 * eps.e11 * eps.e22 * (1.0 - ie2);
  return std::sqrt(std::max(d2, 0.0));
}

/// P0 = P* H exp(-C(1-A)). Throws std::invalid_argument for H < 0 or A outside [0,1].
double ice_strength(double H, double A, const RheoParams& p);

inline double ice_strength_unchecked(double H, double A, const RheoParams& p) {
  return p.P_star * H * std::exp(-p.C * (1.0 - A));
}

inline Viscosities viscosities(double Delta, double P0, const RheoParams& p) {
  const double zeta = P0 / (2.0 * std::sqrt(Delta * Delta + p.Delta_min * p.Delta_min));
  return {zeta, zeta / (p.e * p.e)};
}

inline double replacement_pressure(double Delta, double P0, const RheoParams& p) {
  return p.pressure_factor * P0 * Delta / (2.0 * (Delta + p.Delta_min));
}

inline RheologyEval evaluate_rheology(const StrainRate& eps, double P0, const RheoParams& p) {
  RheologyEval r;
  r.Delta = delta(eps, p);
  const Viscosities v = viscosities(r.Delta, P0, p);
  r.zeta = v.zeta;
  r.eta = v.eta;
  r.P0 = P0;
  r.P = replacement_pressure(r.Delta, P0, p);
  return r;
}

/// sigma = 2 eta eps + (zeta - eta) tr(eps) I - P/2 I
inline Stress vp_stress(const StrainRate& eps, const RheologyEval& r) {
  const double tr = eps.e11 + eps.e22;
  const double iso = (r.zeta - r.eta) * tr - 0.5 * r.P;
  return {2.0 * r.eta * eps.e11 + iso, 2.0 * r.eta * eps.e22 + iso, 2.0 * r.eta * eps.e12};
}

/// One pseudo-time step of the EVP stress equation. The sigma terms are taken
/// at the new level, so every step is a contraction towards vp_stress(eps, r).
/// Trace and deviator decouple:
///   d/dt tr(s) + tr(s)/(2T) + P/(2T) = zeta tr(eps) / T
///   d/dt dev(s) + e^2 dev(s)/(2T)   = zeta dev(eps) / T
inline Stress evp_stress_update(const Stress& sigma, const StrainRate& eps, const RheologyEval& r,
                                double T_evp, double dt_sub, const RheoParams& p) {
  const double k = dt_sub / T_evp;
  const double dev_den = 1.0 + 0.5 * k * p.e * p.e;
  const double s1 = (sigma.s11 + sigma.s22 + k * (r.zeta * (eps.e11 + eps.e22) - 0.5 * r.P)) /
                    (1.0 + 0.5 * k);
  const double s2 = (sigma.s11 - sigma.s22 + k * r.zeta * (eps.e11 - eps.e22)) / dev_den;
  const double s12 = (sigma.s12 + k * r.zeta * eps.e12) / dev_den;
  return {0.5 * (s1 + s2), 0.5 * (s1 - s2), s12};
}

/// sigma + (sigma_VP(eps) - sigma) / alpha
inline Stress mevp_stress_update(const Stress& sigma, const StrainRate& eps, const RheologyEval& r,
                                 double alpha) {
  const Stress target = vp_stress(eps, r);
  const double w = 1.0 / alpha;
  return {sigma.s11 + (target.s11 - sigma.s11) * w, sigma.s22 + (target.s22 - sigma.s22) * w,
          sigma.s12 + (target.s12 - sigma.s12) * w};
}

inline double shear_deformation(const StrainRate& eps) {
  const double d = eps.e11 - eps.e22;
  return std::sqrt(d * d + 4.0 * eps.e12 * eps.e12);
}

}  // namespace seaice
