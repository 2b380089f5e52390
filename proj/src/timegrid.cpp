#include "plheat/timegrid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plheat {

TimeGrid::TimeGrid(double start, double end, int m) : t0(start), t_end(end), steps(m) {
  if (m < 1) throw std::invalid_argument("time grid needs at least one step");
  if (!(end > start)) throw std::invalid_argument("time grid needs t_end > t0");
}

namespace {

std::vector<LinearPiece> normalized(std::vector<LinearPiece> pieces) {
  double mass = 0.0;
  for (const auto& p : pieces) mass += 0.5 * (p.wa + p.wb) * (p.b - p.a);
  for (auto& p : pieces) {
    p.wa /= mass;
    p.wb /= mass;
  }
  return pieces;
}

void check_step(int m, const TimeGrid& grid) {
  if (m < 1 || m > grid.steps) throw std::out_of_range("step index out of range");
}

}  // namespace

std::vector<LinearPiece> theta_pieces(int m, const TimeGrid& grid) {
  check_step(m, grid);
  const double tau = grid.tau();
  const double a = grid.window_begin(m), b = grid.window_end(m);
  const bool full = m < grid.steps;
  if (m == 1) return normalized({{a, b, b - a, 0.0}});
  std::vector<LinearPiece> pieces{{grid.t(m - 2), a, 0.0, tau}};
  if (full) {
    pieces.push_back({a, grid.t(m), tau, tau});
    pieces.push_back({grid.t(m), b, tau, 0.0});
  } else {
    pieces.push_back({a, b, tau, 0.0});
  }
  return normalized(std::move(pieces));
}

double theta_density(int m, double sigma, const TimeGrid& grid) {
  for (const LinearPiece& p : theta_pieces(m, grid)) {
    if (sigma >= p.a && sigma <= p.b) return p.at(sigma);
  }
  return 0.0;
}

std::vector<LinearPiece> window_pieces(int m, const TimeGrid& grid) {
  check_step(m, grid);
  const double a = grid.window_begin(m), b = grid.window_end(m);
  const double w = 1.0 / (b - a);
  if (m == grid.steps) return {{a, b, w, w}};
  return {{a, grid.t(m), w, w}, {grid.t(m), b, w, w}};
}

std::vector<LinearPiece> split_at_zero(const std::vector<LinearPiece>& pieces) {
  std::vector<LinearPiece> out;
  for (const LinearPiece& p : pieces) {
    if (p.a < 0.0 && p.b > 0.0) {
      const double w0 = p.at(0.0);
      out.push_back({p.a, 0.0, p.wa, w0});
      out.push_back({0.0, p.b, w0, p.wb});
    } else {
      out.push_back(p);
    }
  }
  return out;
}

std::vector<double> discrete_derivative(const std::vector<double>& a, double tau) {
  std::vector<double> d(a.size(), 0.0);
  for (std::size_t m = 1; m < a.size(); ++m) d[m] = (a[m] - a[m - 1]) / tau;
  return d;
}

}  // namespace plheat
