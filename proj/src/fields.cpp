#include "plheat/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plheat/errors.hpp"
#include "plheat/quadrature.hpp"

namespace plheat {

TimeFactor TimeFactor::power(double coef, double gamma, bool odd) {
  TimeFactor f;
  f.coef_ = coef;
  f.gamma_ = gamma;
  f.odd_ = odd;
  return f;
}

TimeFactor TimeFactor::callable(std::function<double(double)> g) {
  TimeFactor f;
  f.fn_ = std::move(g);
  return f;
}

double TimeFactor::operator()(double t) const {
  if (fn_) return fn_(t);
  if (t == 0.0) {
    if (odd_ || gamma_ > 0.0) return 0.0;
    if (gamma_ == 0.0) return coef_;
    return std::numeric_limits<double>::infinity();
  }
  const double mag = gamma_ == 0.0 ? 1.0 : std::pow(std::abs(t), gamma_);
  return (odd_ && t < 0.0 ? -coef_ : coef_) * mag;
}

TimeFactor operator*(const TimeFactor& a, const TimeFactor& b) {
  if (a.is_power() && b.is_power()) return TimeFactor::power(a.coef_ * b.coef_, a.gamma_ + b.gamma_, a.odd_ != b.odd_);
  return TimeFactor::callable([a, b](double t) { return a(t) * b(t); });
}

std::vector<std::pair<double, double>> time_nodes(const std::vector<LinearPiece>& pieces, int per_piece) {
  const LineRule& rule = gauss_legendre(per_piece);
  std::vector<std::pair<double, double>> nodes;
  for (const LinearPiece& p : split_at_zero(pieces)) {
    const double len = p.b - p.a;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = p.a + len * rule.points[q];
      nodes.emplace_back(s, rule.weights[q] * len * p.at(s));
    }
  }
  return nodes;
}

namespace {

// int_lo^hi s^e ds for 0 <= lo < hi.
double power_moment(double lo, double hi, double e) {
  if (e <= -1.0 && lo == 0.0) throw NonIntegrableForce("time factor is not integrable at t = 0");
  const double k = e + 1.0;
  if (std::abs(k) < 1e-14) return std::log(hi / lo);
  const double hk = std::pow(hi, k);
  const double lk = lo == 0.0 ? 0.0 : std::pow(lo, k);
  return (hk - lk) / k;
}

// int_a^b (wa + slope (s - a)) c sgn(s)^odd |s|^gamma ds over a piece not crossing 0.
double power_piece(const LinearPiece& p, double c, double gamma, bool odd) {
  const double len = p.b - p.a;
  if (len <= 0.0) return 0.0;
  const double near = std::min(std::abs(p.a), std::abs(p.b));
  if (near >= 2.0 * len) {
    // Smooth away from the origin: high-order Gauss is exact to roundoff.
    const LineRule& rule = gauss_legendre(10);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = p.a + len * rule.points[q];
      const double g = (odd && s < 0.0 ? -c : c) * std::pow(std::abs(s), gamma);
      sum += rule.weights[q] * p.at(s) * g;
    }
    return sum * len;
  }
  // Linear weight alpha + beta s, moments of |s|^gamma in the magnitude variable.
  const double beta = (p.wb - p.wa) / len;
  // alpha is the weight at s = 0; take it exactly when the piece ends there.
  const double alpha = p.a == 0.0 ? p.wa : (p.b == 0.0 ? p.wb : p.wa - beta * p.a);
  if (p.a >= 0.0) {
    const double m0 = alpha == 0.0 ? 0.0 : power_moment(p.a, p.b, gamma);
    const double m1 = beta == 0.0 ? 0.0 : power_moment(p.a, p.b, gamma + 1.0);
    return c * (alpha * m0 + beta * m1);
  }
  // s = -r, r in [-b, -a]: sgn(s)^odd = (-1)^odd, s = -r.
  const double lo = -p.b, hi = -p.a;
  const double sign = odd ? -1.0 : 1.0;
  const double m0 = alpha == 0.0 ? 0.0 : power_moment(lo, hi, gamma);
  const double m1 = beta == 0.0 ? 0.0 : power_moment(lo, hi, gamma + 1.0);
  return sign * c * (alpha * m0 - beta * m1);
}

}  // namespace

double TimeFactor::integrate(const std::vector<LinearPiece>& pieces) const {
  if (fn_) {
    double sum = 0.0;
    for (const auto& [s, w] : time_nodes(pieces)) sum += w * fn_(s);
    return sum;
  }
  if (coef_ == 0.0) return 0.0;
  double sum = 0.0;
  for (const LinearPiece& p : split_at_zero(pieces)) {
    const bool touches = p.a == 0.0 || p.b == 0.0;
    if (touches && gamma_ <= -1.0) {
      // Weight vanishing at the origin lowers the singularity by one order.
      const double w0 = p.a == 0.0 ? p.wa : p.wb;
      if (w0 != 0.0 || gamma_ <= -2.0) throw NonIntegrableForce("time factor is not integrable at t = 0");
    }
    if (gamma_ == 0.0 && !odd_) {
      sum += coef_ * 0.5 * (p.wa + p.wb) * (p.b - p.a);
    } else {
      sum += power_piece(p, coef_, gamma_, odd_);
    }
  }
  return sum;
}

TimeSecondMoment::TimeSecondMoment(const VectorField& field, const std::vector<LinearPiece>& pieces)
    : field_(&field) {
  if (field.separable()) {
    const std::size_t n = field.terms.size();
    coefs_.resize(n * n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = k; l < n; ++l) {
        const double c = (field.terms[k].time * field.terms[l].time).integrate(pieces);
        coefs_[k * n + l] = c;
        coefs_[l * n + k] = c;
      }
    }
  } else {
    nodes_ = time_nodes(pieces);
  }
}

double TimeSecondMoment::operator()(Point x) const {
  if (!field_->separable()) return time_average_power(*field_, x, nodes_, 2.0);
  const std::size_t n = field_->terms.size();
  std::vector<Vec2> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = field_->terms[k].space(x);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      sum += coefs_[k * n + l] * (values[k][0] * values[l][0] + values[k][1] * values[l][1]);
    }
  }
  return sum;
}

double time_average_power(const VectorField& field, Point x, const std::vector<std::pair<double, double>>& nodes,
                          double q) {
  double sum = 0.0;
  for (const auto& [s, w] : nodes) {
    const Vec2 v = field(x, s);
    const double n2 = v[0] * v[0] + v[1] * v[1];
    sum += w * (q == 2.0 ? n2 : std::pow(n2, 0.5 * q));
  }
  return sum;
}

}  // namespace plheat
