#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <random>

#include "plheat/errors.hpp"
#include "plheat/fields.hpp"
#include "plheat/timegrid.hpp"
#include "plheat/timestepper.hpp"

using namespace plheat;

namespace {

// theta_m from its defining integral: |[max(s, t_{m-1}), min(s + tau, t_{m+1})]| / (2 tau^2),
// with t_{m+1} capped at t_M and the result divided by the capped mass.
double theta_oracle(int m, double s, const TimeGrid& g) {
  const double tau = g.tau();
  const double lo_cap = g.t0 + (m - 1) * tau;
  const double hi_cap = std::min(g.t0 + (m + 1) * tau, g.t_end);
  if (m == 1) {
    const double sp = s - g.t0;
    return (sp >= 0.0 && sp <= 2.0 * tau) ? (2.0 * tau - sp) / (2.0 * tau * tau) : 0.0;
  }
  const double len = std::max(0.0, std::min(s + tau, hi_cap) - std::max(s, lo_cap));
  const double mass = m == g.steps ? tau * tau : 2.0 * tau * tau;
  return len / mass;
}

double gauss10(const LinearPiece& p, const std::function<double(double)>& f) {
  return boost::math::quadrature::gauss<double, 10>::integrate([&](double s) { return p.at(s) * f(s); }, p.a, p.b);
}

// int w(s) g(s) ds with tanh-sinh on each piece split at 0.
double oracle_integral(const std::vector<LinearPiece>& pieces, const std::function<double(double)>& g) {
  boost::math::quadrature::tanh_sinh<double> ts;
  double sum = 0.0;
  for (const LinearPiece& p : split_at_zero(pieces)) sum += ts.integrate([&](double s) { return p.at(s) * g(s); }, p.a, p.b);
  return sum;
}

}  // namespace

TEST(TimeGrid, NodesAndWindows) {
  const TimeGrid g(-0.1, 0.1, 8);
  EXPECT_DOUBLE_EQ(g.tau(), 0.025);
  EXPECT_EQ(g.t(8), 0.1);
  EXPECT_DOUBLE_EQ(g.window_begin(3), g.t(2));
  EXPECT_DOUBLE_EQ(g.window_end(3), g.t(4));
  EXPECT_DOUBLE_EQ(g.window_length(8), g.tau());
  EXPECT_THROW(TimeGrid(0.0, 1.0, 0), std::invalid_argument);
  EXPECT_THROW(TimeGrid(1.0, 1.0, 4), std::invalid_argument);
  EXPECT_THROW(theta_pieces(0, g), std::out_of_range);
  EXPECT_THROW(theta_pieces(9, g), std::out_of_range);
}

TEST(Theta, PlateauInsideStepInterval) {
  const TimeGrid g(0.0, 1.0, 10);
  for (int m = 2; m <= 9; ++m) {
    for (double frac : {0.1, 0.5, 0.9}) {
      const double s = g.t(m - 1) + frac * g.tau();
      EXPECT_NEAR(theta_density(m, s, g), 1.0 / (2.0 * g.tau()), 1e-12);
    }
  }
}

TEST(Theta, FirstWeightEndpoints) {
  for (const TimeGrid& g : {TimeGrid(0.0, 1.0, 10), TimeGrid(-1.0, 1.0, 16)}) {
    const double tau = g.tau();
    EXPECT_NEAR(theta_density(1, g.t0, g), 1.0 / tau, 1e-12 / tau);
    EXPECT_NEAR(theta_density(1, g.t0 + 2.0 * tau, g), 0.0, 1e-12);
  }
}

TEST(Theta, MatchesDefiningIntegral) {
  std::mt19937 rng(7);
  for (const TimeGrid& g : {TimeGrid(0.0, 1.0, 10), TimeGrid(-0.1, 0.1, 12), TimeGrid(-1.0, 1.0, 5)}) {
    std::uniform_real_distribution<double> s(g.t0 - g.tau(), g.t_end + g.tau());
    for (int m = 1; m <= g.steps; ++m) {
      for (int k = 0; k < 50; ++k) {
        const double x = s(rng);
        EXPECT_NEAR(theta_density(m, x, g), theta_oracle(m, x, g), 1e-9 / g.tau()) << "m=" << m << " s=" << x;
      }
    }
  }
}

TEST(Theta, UnitMassAllSteps) {
  for (const TimeGrid& g : {TimeGrid(0.0, 1.0, 7), TimeGrid(-0.1, 0.1, 64), TimeGrid(-1.0, 1.0, 33)}) {
    for (int m = 1; m <= g.steps; ++m) {
      double mass = 0.0;
      for (const LinearPiece& p : theta_pieces(m, g)) mass += gauss10(p, [](double) { return 1.0; });
      EXPECT_NEAR(mass, 1.0, 1e-13) << "m=" << m;
    }
  }
}

TEST(Theta, FirstMomentIsCentreOfMass) {
  const TimeGrid g(-0.3, 0.7, 10);
  const TimeFactor identity = TimeFactor::power(1.0, 1.0, true);
  const double tau = g.tau();
  EXPECT_NEAR(identity.integrate(theta_pieces(1, g)), g.t0 + 2.0 * tau / 3.0, 1e-14);
  for (int m = 2; m < g.steps; ++m) EXPECT_NEAR(identity.integrate(theta_pieces(m, g)), g.t(m) - tau / 2.0, 1e-14);
  EXPECT_NEAR(identity.integrate(theta_pieces(g.steps, g)), g.t(g.steps - 1), 1e-14);
}

TEST(Theta, OddForceVanishesOnSymmetricWeight) {
  // t_3 - tau / 2 = 0 on (-1, 1) with 5 steps.
  const TimeGrid g(-1.0, 1.0, 5);
  EXPECT_NEAR(TimeFactor::power(1.0, -0.5, true).integrate(theta_pieces(3, g)), 0.0, 1e-14);
  EXPECT_GT(std::abs(TimeFactor::power(1.0, -0.5, true).integrate(theta_pieces(2, g))), 0.1);
}

TEST(Theta, WindowPiecesAreMeanWeights) {
  const TimeGrid g(0.0, 1.0, 6);
  for (int m = 1; m <= g.steps; ++m) {
    double mass = 0.0;
    for (const LinearPiece& p : window_pieces(m, g)) mass += gauss10(p, [](double) { return 1.0; });
    EXPECT_NEAR(mass, 1.0, 1e-14);
  }
  EXPECT_EQ(window_pieces(6, g).size(), 1u);
}

TEST(Theta, SplitAtZeroKeepsValues) {
  const auto parts = split_at_zero({{-1.0, 3.0, 2.0, 6.0}});
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_DOUBLE_EQ(parts[0].wb, 3.0);
  EXPECT_DOUBLE_EQ(parts[1].wa, 3.0);
  EXPECT_EQ(split_at_zero({{0.0, 1.0, 1.0, 1.0}}).size(), 1u);
}

TEST(TimeFactor, PowerLawsMatchAdaptiveQuadrature) {
  const std::vector<std::vector<LinearPiece>> weights = {
      {{-0.2, 0.3, 1.0, 2.0}},
      {{0.0, 0.1, 3.0, 0.5}},
      {{-0.05, 0.0, 0.0, 4.0}, {0.0, 0.05, 4.0, 0.0}},
      {{1e-3, 0.4, 1.0, 0.0}},
      {{-2.0, -1.5, 0.3, 0.7}},
      {{-1e-6, 1e-2, 1.0, 1.0}},
  };
  for (double gamma : {-0.9, -0.5, -0.25, 0.0, 0.5, 1.0 / 3.0, 1.5, 2.0}) {
    for (bool odd : {false, true}) {
      const TimeFactor f = TimeFactor::power(1.7, gamma, odd);
      const auto g = [&](double s) { return s == 0.0 ? 0.0 : 1.7 * (odd && s < 0 ? -1.0 : 1.0) * std::pow(std::abs(s), gamma); };
      for (const auto& w : weights) {
        const double ref = oracle_integral(w, g);
        EXPECT_NEAR(f.integrate(w), ref, 1e-11 * std::max(1.0, std::abs(ref))) << "gamma=" << gamma << " odd=" << odd;
      }
    }
  }
}

TEST(TimeFactor, NonIntegrableAtOrigin) {
  EXPECT_THROW(TimeFactor::power(1.0, -1.0, true).integrate({{-0.1, 0.1, 1.0, 1.0}}), NonIntegrableForce);
  EXPECT_THROW(TimeFactor::power(1.0, -1.5, false).integrate({{0.0, 0.1, 1.0, 0.0}}), NonIntegrableForce);
  // Away from the origin every exponent is fine.
  EXPECT_NO_THROW(TimeFactor::power(1.0, -3.0, false).integrate({{0.5, 1.0, 1.0, 1.0}}));
  EXPECT_THROW(power_time_force(1.0), NonIntegrableForce);
  EXPECT_THROW(power_time_force(0.0), NonIntegrableForce);
  EXPECT_NO_THROW(power_time_force(0.5));
}

TEST(TimeFactor, CallableExactForPolynomials) {
  // 5 Gauss points per piece integrate linear weight times degree 8 exactly.
  const TimeFactor f = TimeFactor::callable([](double s) { return std::pow(s, 8) - 3.0 * s * s + 1.0; });
  const std::vector<LinearPiece> w{{-0.5, 0.25, 0.0, 1.0}, {0.25, 1.0, 1.0, 0.5}};
  const auto g = [](double s) { return std::pow(s, 8) - 3.0 * s * s + 1.0; };
  double ref = 0.0;
  for (const auto& p : w) ref += gauss10(p, g);
  EXPECT_NEAR(f.integrate(w), ref, 1e-14);
}

TEST(TimeFactor, ProductOfPowers) {
  const TimeFactor a = TimeFactor::power(2.0, 0.5, true), b = TimeFactor::power(3.0, -0.25, true);
  const TimeFactor c = a * b;
  EXPECT_DOUBLE_EQ(c(0.3), a(0.3) * b(0.3));
  EXPECT_DOUBLE_EQ(c(-0.3), a(-0.3) * b(-0.3));
  EXPECT_TRUE(c.is_power());
}

TEST(DiscreteIdentity, DtaTimesA) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double tau : {1.0, 0.125, 0.01}) {
    std::vector<double> a(40), a2(40);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = u(rng);
      a2[i] = a[i] * a[i];
    }
    const auto da = discrete_derivative(a, tau), da2 = discrete_derivative(a2, tau);
    for (std::size_t m = 1; m < a.size(); ++m) {
      const double lhs = da[m] * a[m], rhs = 0.5 * da2[m] + 0.5 * tau * da[m] * da[m];
      const double scale = std::abs(lhs) + std::abs(rhs);
      EXPECT_LE(std::abs(lhs - rhs), 1e-15 * std::max(1.0, scale));
    }
  }
}
