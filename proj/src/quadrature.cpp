#include "plheat/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include "plheat/errors.hpp"

namespace plheat {

namespace {

constexpr int kMaxDegree = 20;
constexpr int kMaxLinePoints = 64;

struct GaussNodes {
  std::vector<double> x;  // on [-1, 1]
  std::vector<double> w;
};

// Golub-Welsch for the Jacobi weight (1-x)^alpha (1+x)^beta on [-1,1].
GaussNodes gauss_jacobi(int n, double alpha, double beta) {
  Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
  const double ab = alpha + beta;
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + ab;
    jm(k, k) = (k == 0) ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double kk = k + 1.0;
      const double s1 = 2.0 * kk + ab;
      const double num = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab);
      const double den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
      jm(k, k + 1) = jm(k + 1, k) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jm);
  const double mu0 =
      std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) / std::tgamma(ab + 2.0);
  GaussNodes g;
  for (int i = 0; i < n; ++i) {
    g.x.push_back(eig.eigenvalues()(i));
    const double v0 = eig.eigenvectors()(0, i);
    g.w.push_back(mu0 * v0 * v0);
  }
  return g;
}

QuadratureRule build_rule(int d) {
  QuadratureRule rule;
  rule.exactness_degree = d;
  if (d == 1) {
    rule.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
    rule.weights = {1.0};
    return rule;
  }
  const int n = (d + 2) / 2;
  const GaussNodes ju = gauss_jacobi(n, 1.0, 0.0);
  const GaussNodes lv = gauss_jacobi(n, 0.0, 0.0);
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (1.0 + ju.x[i]);
    const double wu = 0.25 * ju.w[i];  // integral of (1-u) g(u) over [0,1]
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (1.0 + lv.x[j]);
      const double wv = 0.5 * lv.w[j];
      const double x = u, y = v * (1.0 - u);
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(2.0 * wu * wv);
    }
  }
  return rule;
}

}  // namespace

const QuadratureRule& triangle_quadrature(int exactness_degree) {
  if (exactness_degree < 1 || exactness_degree > kMaxDegree) {
    throw UnsupportedDegree("quadrature exactness degree must lie in [1, 20], got " +
                            std::to_string(exactness_degree));
  }
  static std::array<QuadratureRule, kMaxDegree + 1> rules;
  static std::array<std::once_flag, kMaxDegree + 1> flags;
  std::call_once(flags[exactness_degree], [&] { rules[exactness_degree] = build_rule(exactness_degree); });
  return rules[exactness_degree];
}

const LineRule& gauss_legendre(int n) {
  if (n < 1 || n > kMaxLinePoints) throw UnsupportedDegree("Gauss-Legendre point count out of range");
  static std::array<LineRule, kMaxLinePoints + 1> rules;
  static std::array<std::once_flag, kMaxLinePoints + 1> flags;
  std::call_once(flags[n], [&] {
    const GaussNodes g = gauss_jacobi(n, 0.0, 0.0);
    LineRule r;
    for (int i = 0; i < n; ++i) {
      r.points.push_back(0.5 * (1.0 + g.x[i]));
      r.weights.push_back(0.5 * g.w[i]);
    }
    rules[n] = std::move(r);
  });
  return rules[n];
}

}  // namespace plheat
