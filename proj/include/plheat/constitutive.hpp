#pragma once

#include <array>

namespace plheat {

using Vec2 = std::array<double, 2>;

/// Exponent p in (1, inf) and shift kappa >= 0 of the flux (kappa + |xi|)^(p-2) xi.
struct PLaplaceParams {
  double p = 2.0;
  double kappa = 0.0;

  /// Throws std::invalid_argument when p <= 1 or kappa < 0.
  void validate() const;
  /// Conjugate exponent p' = p / (p - 1).
  double conjugate() const { return p / (p - 1.0); }
};

/// Symmetric 2x2 matrix.
struct Sym2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;

  Vec2 apply(const Vec2& v) const { return {xx * v[0] + xy * v[1], xy * v[0] + yy * v[1]}; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
double norm(const Vec2& a);

constexpr double kJacobianRegularization = 1e-10;

/// S(xi) = (kappa + |xi|)^(p-2) xi; S(0) = 0.
Vec2 s_flux(const Vec2& xi, const PLaplaceParams& params);

/// V(xi) = (kappa + |xi|)^((p-2)/2) xi; V(0) = 0.
Vec2 v_transform(const Vec2& xi, const PLaplaceParams& params);

/// Derivative of S at xi, evaluated with a = kappa + max(|xi|, eps_reg):
/// a^(p-2) I + (p-2) a^(p-3) xi xi^T / |xi|.
/// Throws SingularJacobian when a = 0 and p < 2.
Sym2 ds_jacobian(const Vec2& xi, const PLaplaceParams& params, double eps_reg = kJacobianRegularization);

/// phi(t) = int_0^t (kappa + s)^(p-2) s ds.
double phi(double t, const PLaplaceParams& params);
/// phi'(t) = (kappa + t)^(p-2) t.
double phi_prime(double t, const PLaplaceParams& params);
/// phi''(t) = (kappa + t)^(p-3) (kappa + (p-1) t).
double phi_second(double t, const PLaplaceParams& params);

/// Shifted N-function phi_a(t) = int_0^t (kappa + a + s)^(p-2) s ds in closed form.
double phi_shifted(double a, double t, const PLaplaceParams& params);

/// The four mutually equivalent quantities of the equivalence lemma:
/// (S(P)-S(Q)).(P-Q), |V(P)-V(Q)|^2, phi_|P|(|P-Q|), phi''(|P|+|Q|) |P-Q|^2.
/// Throws DegenerateInput when P == Q.
std::array<double, 4> equivalence_quantities(const Vec2& P, const Vec2& Q, const PLaplaceParams& params);

/// Ratios of the first quantity to each of the other three.
std::array<double, 3> equivalence_ratios(const Vec2& P, const Vec2& Q, const PLaplaceParams& params);

/// Smallest C for which (S(P)-S(Q)).(R-Q) <= delta |V(P)-V(Q)|^2 + C |V(R)-V(Q)|^2
/// holds at this sample (may be negative when the inequality holds for every C >= 0).
double young_constant(const Vec2& P, const Vec2& Q, const Vec2& R, double delta, const PLaplaceParams& params);

/// Smallest C for which phi_|a|(t) <= C phi_|b|(t) + delta |V(a)-V(b)|^2 holds at this sample.
double shift_change_constant(const Vec2& a, const Vec2& b, double t, double delta, const PLaplaceParams& params);

}  // namespace plheat
