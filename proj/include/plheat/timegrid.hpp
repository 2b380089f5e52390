#pragma once

#include <vector>

namespace plheat {

/// Uniform partition t_m = t0 + m tau of [t0, t_end] into M steps.
/// J_m = [t_{m-1}, t_{m+1}] for m < M; the last window is truncated to
/// I_M = [t_{M-1}, t_M].
struct TimeGrid {
  double t0 = 0.0;
  double t_end = 1.0;
  int steps = 1;

  TimeGrid() = default;
  TimeGrid(double start, double end, int m);

  double tau() const { return (t_end - t0) / steps; }
  double t(int m) const { return m == steps ? t_end : t0 + m * tau(); }
  double window_begin(int m) const { return t(m - 1); }
  double window_end(int m) const { return m < steps ? t(m + 1) : t(steps); }
  double window_length(int m) const { return window_end(m) - window_begin(m); }
};

/// Linear weight on [a, b] with end values wa, wb.
struct LinearPiece {
  double a = 0.0, b = 0.0;
  double wa = 0.0, wb = 0.0;

  double at(double s) const { return wa + (wb - wa) * (s - a) / (b - a); }
};

/// Piecewise-linear weight theta_m with total mass one, m = 1..M:
///   theta_m(s)  = |[max(s, t_{m-1}), min(s + tau, t_{m+1})]| / (2 tau^2)   (m >= 2)
///   theta_1(s)  = |[max(s, t_0), t_2]| / (2 tau^2) for s >= t_0
/// with the truncated last window, renormalized to mass one.
std::vector<LinearPiece> theta_pieces(int m, const TimeGrid& grid);

double theta_density(int m, double sigma, const TimeGrid& grid);

/// Constant weight 1 / |J_m| on J_m, one piece per half-interval.
std::vector<LinearPiece> window_pieces(int m, const TimeGrid& grid);

/// Splits pieces at s = 0 so that no piece has 0 in its interior.
std::vector<LinearPiece> split_at_zero(const std::vector<LinearPiece>& pieces);

/// d_t a_m = (a_m - a_{m-1}) / tau for a scalar sequence (m >= 1).
std::vector<double> discrete_derivative(const std::vector<double>& a, double tau);

}  // namespace plheat
