#include "plheat/constitutive.hpp"

#include <cmath>
#include <stdexcept>

#include "plheat/errors.hpp"

namespace plheat {

namespace {

// base^e for base >= 0; the zero base is only reached with e >= 0 by callers,
// except where the multiplying factor vanishes as well.
double power(double base, double e) {
  if (base == 0.0) return e == 0.0 ? 1.0 : 0.0;
  return std::exp(e * std::log(base));
}

Vec2 sub(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }

}  // namespace

void PLaplaceParams::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must satisfy 1 < p < inf");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be >= 0");
}

double norm(const Vec2& a) { return std::hypot(a[0], a[1]); }

Vec2 s_flux(const Vec2& xi, const PLaplaceParams& params) {
  const double n = norm(xi);
  if (n == 0.0) return {0.0, 0.0};
  const double c = power(params.kappa + n, params.p - 2.0);
  return {c * xi[0], c * xi[1]};
}

Vec2 v_transform(const Vec2& xi, const PLaplaceParams& params) {
  const double n = norm(xi);
  if (n == 0.0) return {0.0, 0.0};
  const double c = power(params.kappa + n, 0.5 * (params.p - 2.0));
  return {c * xi[0], c * xi[1]};
}

Sym2 ds_jacobian(const Vec2& xi, const PLaplaceParams& params, double eps_reg) {
  if (eps_reg < 0.0) throw std::invalid_argument("eps_reg must be >= 0");
  const double n = norm(xi);
  const double a = params.kappa + std::max(n, eps_reg);
  if (a == 0.0) {
    if (params.p < 2.0) throw SingularJacobian("flux derivative is unbounded at a zero gradient");
    const double d = params.p == 2.0 ? 1.0 : 0.0;
    return {d, 0.0, d};
  }
  const double base = power(a, params.p - 2.0);
  Sym2 j{base, 0.0, base};
  if (n > 0.0) {
    const double c = (params.p - 2.0) * base / a / n;
    j.xx += c * xi[0] * xi[0];
    j.xy += c * xi[0] * xi[1];
    j.yy += c * xi[1] * xi[1];
  }
  return j;
}

double phi(double t, const PLaplaceParams& params) { return phi_shifted(0.0, t, params); }

double phi_prime(double t, const PLaplaceParams& params) { return power(params.kappa + t, params.p - 2.0) * t; }

double phi_second(double t, const PLaplaceParams& params) {
  const double b = params.kappa + t;
  return power(b, params.p - 3.0) * (params.kappa + (params.p - 1.0) * t);
}

double phi_shifted(double a, double t, const PLaplaceParams& params) {
  if (t <= 0.0) return 0.0;
  const double p = params.p;
  if (p == 2.0) return 0.5 * t * t;
  const double c = params.kappa + a;
  if (c == 0.0) return power(t, p) / p;

  // With x = t/c: phi = c^p [((1+x)^p - 1)/p - ((1+x)^(p-1) - 1)/(p-1)].
  const double x = t / c;
  const double scale = power(c, p);
  if (x < 0.5) {
    // Taylor series sum_{k>=2} (k-1)(p-2)...(p-k+1)/k! x^k avoids the cancellation.
    double coef = 0.5;
    double xk = x * x;
    double sum = coef * xk;
    for (int k = 2; k < 200; ++k) {
      coef *= k * (p - k) / ((k - 1.0) * (k + 1.0));
      xk *= x;
      const double term = coef * xk;
      sum += term;
      if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    return scale * sum;
  }
  const double l = std::log1p(x);
  return scale * (std::expm1(p * l) / p - std::expm1((p - 1.0) * l) / (p - 1.0));
}

std::array<double, 4> equivalence_quantities(const Vec2& P, const Vec2& Q, const PLaplaceParams& params) {
  const Vec2 d = sub(P, Q);
  const double nd = norm(d);
  if (nd == 0.0) throw DegenerateInput("equivalence quantities need P != Q");
  const Vec2 ds = sub(s_flux(P, params), s_flux(Q, params));
  const Vec2 dv = sub(v_transform(P, params), v_transform(Q, params));
  return {dot(ds, d), dot(dv, dv), phi_shifted(norm(P), nd, params),
          phi_second(norm(P) + norm(Q), params) * nd * nd};
}

std::array<double, 3> equivalence_ratios(const Vec2& P, const Vec2& Q, const PLaplaceParams& params) {
  const auto q = equivalence_quantities(P, Q, params);
  return {q[0] / q[1], q[0] / q[2], q[0] / q[3]};
}

double young_constant(const Vec2& P, const Vec2& Q, const Vec2& R, double delta, const PLaplaceParams& params) {
  const Vec2 ds = sub(s_flux(P, params), s_flux(Q, params));
  const Vec2 dvpq = sub(v_transform(P, params), v_transform(Q, params));
  const Vec2 dvrq = sub(v_transform(R, params), v_transform(Q, params));
  const double lhs = dot(ds, sub(R, Q)) - delta * dot(dvpq, dvpq);
  const double denom = dot(dvrq, dvrq);
  if (denom == 0.0) {
    if (lhs > 0.0) throw DegenerateInput("young inequality sample with R == Q and positive excess");
    return 0.0;
  }
  return lhs / denom;
}

double shift_change_constant(const Vec2& a, const Vec2& b, double t, double delta, const PLaplaceParams& params) {
  const Vec2 dv = sub(v_transform(a, params), v_transform(b, params));
  const double lhs = phi_shifted(norm(a), t, params) - delta * dot(dv, dv);
  const double denom = phi_shifted(norm(b), t, params);
  if (denom == 0.0) return lhs > 0.0 ? INFINITY : 0.0;
  return lhs / denom;
}

}  // namespace plheat
