#pragma once

#include <array>
#include <functional>
#include <type_traits>
#include <vector>

#include "plheat/mesh.hpp"
#include "plheat/timegrid.hpp"

namespace plheat {

/// Scalar function of time. Either a power law c sgn(t)^k |t|^gamma, which is
/// integrated against piecewise-linear weights in closed form, or an arbitrary
/// callable integrated with Gauss-Legendre on each weight piece.
class TimeFactor {
 public:
  static TimeFactor constant(double c) { return power(c, 0.0, false); }
  static TimeFactor power(double coef, double gamma, bool odd);
  static TimeFactor callable(std::function<double(double)> g);

  bool is_power() const { return !fn_; }
  double coef() const { return coef_; }
  double gamma() const { return gamma_; }
  bool odd() const { return odd_; }

  /// Value at t. At t = 0 a power law returns 0 when odd or gamma > 0, coef when
  /// gamma == 0 and +inf otherwise.
  double operator()(double t) const;

  /// int w(s) g(s) ds summed over the pieces. Throws NonIntegrableForce when a
  /// piece touches t = 0 with positive weight and gamma <= -1.
  double integrate(const std::vector<LinearPiece>& pieces) const;

  friend TimeFactor operator*(const TimeFactor& a, const TimeFactor& b);

 private:
  double coef_ = 0.0;
  double gamma_ = 0.0;
  bool odd_ = false;
  std::function<double(double)> fn_;
};

/// Number of Gauss-Legendre nodes per piece for callable time factors.
inline constexpr int kTimeGaussPoints = 5;

/// Gauss nodes and weights of int w(s) g(s) ds over the pieces.
std::vector<std::pair<double, double>> time_nodes(const std::vector<LinearPiece>& pieces,
                                                  int per_piece = kTimeGaussPoints);

using Vec2 = std::array<double, 2>;

/// F(x, t) = sum_k T_k(t) X_k(x), or a generic callable when no terms are given.
template <class Value>
struct SpaceTimeField {
  struct Term {
    TimeFactor time;
    std::function<Value(Point)> space;
  };
  std::vector<Term> terms;
  std::function<Value(Point, double)> generic;

  bool separable() const { return !generic; }

  Value operator()(Point x, double t) const {
    if (generic) return generic(x, t);
    Value v{};
    for (const Term& term : terms) accumulate(v, term.time(t), term.space(x));
    return v;
  }

  static void accumulate(Value& acc, double c, const Value& x) {
    if constexpr (std::is_same_v<Value, double>) {
      acc += c * x;
    } else {
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * x[i];
    }
  }
};

using ScalarField = SpaceTimeField<double>;
using VectorField = SpaceTimeField<Vec2>;

/// Weighted time average int w(s) F(x, s) ds for a fixed weight, evaluated at
/// arbitrary points. Time integrals are computed once at construction.
template <class Value>
class TimeAverage {
 public:
  TimeAverage(const SpaceTimeField<Value>& field, const std::vector<LinearPiece>& pieces) : field_(&field) {
    if (field.separable()) {
      for (const auto& term : field.terms) coefs_.push_back(term.time.integrate(pieces));
    } else {
      nodes_ = time_nodes(pieces);
    }
  }

  Value operator()(Point x) const {
    Value v{};
    if (field_->separable()) {
      for (std::size_t k = 0; k < coefs_.size(); ++k) {
        if (coefs_[k] != 0.0) SpaceTimeField<Value>::accumulate(v, coefs_[k], field_->terms[k].space(x));
      }
    } else {
      for (const auto& [s, w] : nodes_) SpaceTimeField<Value>::accumulate(v, w, field_->generic(x, s));
    }
    return v;
  }

 private:
  const SpaceTimeField<Value>* field_;
  std::vector<double> coefs_;
  std::vector<std::pair<double, double>> nodes_;
};

/// Weighted second moment int w(s) |F(x, s)|^2 ds.
class TimeSecondMoment {
 public:
  TimeSecondMoment(const VectorField& field, const std::vector<LinearPiece>& pieces);
  double operator()(Point x) const;

 private:
  const VectorField* field_;
  std::vector<double> coefs_;  // k * n + l
  std::vector<std::pair<double, double>> nodes_;
};

/// Generic power |F(x, s)|^q averaged in time with Gauss nodes.
double time_average_power(const VectorField& field, Point x, const std::vector<std::pair<double, double>>& nodes,
                          double q);

}  // namespace plheat
