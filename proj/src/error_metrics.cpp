#include "plheat/error_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "plheat/errors.hpp"
#include "plheat/quadrature.hpp"

namespace plheat {

namespace {

bool empty(const VectorField& f) { return f.terms.empty() && !f.generic; }

double sq(const Vec2& a, const Vec2& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

void check_snapshots(const Trajectory& traj) {
  if (traj.snapshots.size() != static_cast<std::size_t>(traj.grid.steps) + 1) {
    throw std::invalid_argument("error evaluation needs all snapshots of the trajectory");
  }
}

ErrorReport base_report(const Trajectory& traj) {
  ErrorReport r;
  r.ndof = traj.space->ndof();
  r.M = traj.grid.steps;
  r.h = mesh_quality(traj.space->mesh()).h_max;
  r.tau = traj.grid.tau();
  return r;
}

void finish(ErrorReport& r, const PLaplaceParams& params) {
  r.sq_lp_s = r.lp_s_sum > 0.0 ? std::pow(r.lp_s_sum, 2.0 / params.conjugate()) : 0.0;
}

// Quadrature points of a space with physical coordinates and weights.
struct PointSet {
  const QuadratureRule* rule = nullptr;
  FeSpace::Tabulation tab;
  std::vector<Point> x;
  std::vector<double> w;

  PointSet(const FeSpace& s, int degree) : rule(&triangle_quadrature(degree)), tab(s.tabulate(*rule)) {
    const std::size_t nt = s.mesh().num_triangles();
    x.reserve(nt * rule->size());
    w.reserve(nt * rule->size());
    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t q = 0; q < rule->size(); ++q) {
        x.push_back(s.map_to_physical(t, rule->points[q]));
        w.push_back(rule->weights[q] * s.geometry(t).area);
      }
    }
  }
};

// Time averages of a space-time field at a fixed point set. Spatial factors of
// separable fields are sampled once; only time coefficients change per window.
template <class Value>
class SampledField {
 public:
  SampledField(const SpaceTimeField<Value>& f, const std::vector<Point>& x, bool second_moment)
      : f_(&f), x_(&x), moment_(second_moment) {
    if (!f.separable()) return;
    for (const auto& term : f.terms) {
      std::vector<Value> v(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) v[i] = term.space(x[i]);
      samples_.push_back(std::move(v));
    }
  }

  void set_window(const std::vector<LinearPiece>& pieces) {
    if (!f_->separable()) {
      nodes_ = time_nodes(pieces);
      return;
    }
    const std::size_t n = f_->terms.size();
    coefs_.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) coefs_[k] = f_->terms[k].time.integrate(pieces);
    if (moment_) {
      products_.assign(n * n, 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = k; l < n; ++l) {
          products_[k * n + l] = products_[l * n + k] = (f_->terms[k].time * f_->terms[l].time).integrate(pieces);
        }
      }
    }
  }

  Value mean(std::size_t i) const {
    Value v{};
    if (f_->separable()) {
      for (std::size_t k = 0; k < coefs_.size(); ++k) SpaceTimeField<Value>::accumulate(v, coefs_[k], samples_[k][i]);
    } else {
      for (const auto& [s, w] : nodes_) SpaceTimeField<Value>::accumulate(v, w, f_->generic((*x_)[i], s));
    }
    return v;
  }

  // Mean of |F|^2 (vector fields only).
  double second_moment(std::size_t i) const {
    if (!f_->separable()) return time_average_power(*f_, (*x_)[i], nodes_, 2.0);
    const std::size_t n = coefs_.size();
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) {
        const Vec2& a = samples_[k][i];
        const Vec2& b = samples_[l][i];
        sum += products_[k * n + l] * (a[0] * b[0] + a[1] * b[1]);
      }
    }
    return sum;
  }

 private:
  const SpaceTimeField<Value>* f_;
  const std::vector<Point>* x_;
  bool moment_;
  std::vector<std::vector<Value>> samples_;
  std::vector<double> coefs_;
  std::vector<double> products_;
  std::vector<std::pair<double, double>> nodes_;
};

// t -> |T(t)|^(e-1) T(t)
TimeFactor signed_power(const TimeFactor& f, double e) {
  if (f.is_power()) {
    const double c = f.coef() == 0.0 ? 0.0 : std::pow(std::abs(f.coef()), e - 1.0) * f.coef();
    return TimeFactor::power(c, f.gamma() * e, f.odd());
  }
  return TimeFactor::callable([f, e](double t) {
    const double v = f(t);
    return v == 0.0 ? 0.0 : std::pow(std::abs(v), e - 1.0) * v;
  });
}

}  // namespace

ExactSolution complete(ExactSolution exact, const PLaplaceParams& params) {
  // V and S inherit the separable structure when p = 2 or when kappa = 0 and grad has one term.
  if (params.p == 2.0 && exact.grad.separable()) {
    if (empty(exact.v)) exact.v = exact.grad;
    if (empty(exact.s)) exact.s = exact.grad;
  } else if (params.kappa == 0.0 && exact.grad.separable() && exact.grad.terms.size() == 1) {
    const auto& term = exact.grad.terms.front();
    if (empty(exact.v)) {
      exact.v.terms.push_back({signed_power(term.time, params.p / 2.0),
                               [x = term.space, params](Point pt) { return v_transform(x(pt), params); }});
    }
    if (empty(exact.s)) {
      exact.s.terms.push_back({signed_power(term.time, params.p - 1.0),
                               [x = term.space, params](Point pt) { return s_flux(x(pt), params); }});
    }
  }
  if (empty(exact.v)) {
    exact.v.generic = [grad = exact.grad, params](Point x, double t) { return v_transform(grad(x, t), params); };
  }
  if (empty(exact.s)) {
    exact.s.generic = [grad = exact.grad, params](Point x, double t) { return s_flux(grad(x, t), params); };
  }
  return exact;
}

ErrorReport compute_errors(const Trajectory& traj, const ExactSolution& exact_in, const PLaplaceParams& params,
                           const ErrorOptions& options) {
  check_snapshots(traj);
  const ExactSolution exact = complete(exact_in, params);
  const FeSpace& s = *traj.space;
  const PointSet pts(s, options.quad_degree);
  const int nloc = s.dofs_per_cell();
  const std::size_t nq = pts.rule->size();
  const double pp = params.conjugate();

  SampledField<double> u(exact.u, pts.x, false);
  SampledField<Vec2> v(exact.v, pts.x, true);
  SampledField<Vec2> sf(exact.s, pts.x, false);

  ErrorReport r = base_report(traj);
  std::vector<double> local(nloc);
  for (int m = 1; m <= traj.grid.steps; ++m) {
    const auto pieces = window_pieces(m, traj.grid);
    u.set_window(pieces);
    v.set_window(pieces);
    sf.set_window(pieces);
    const Vector& c = traj.snapshots[m].coeffs;
    double e_u = 0.0, e_v = 0.0, e_var = 0.0, e_s = 0.0;
    for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
      const auto dofs = s.cell_dofs(t);
      for (int i = 0; i < nloc; ++i) local[i] = c[dofs[i]];
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t i = t * nq + q;
        double uh = 0.0;
        for (int k = 0; k < nloc; ++k) uh += local[k] * pts.tab.values[q * nloc + k];
        const Vec2 gh =
            combine_gradient(s.geometry(t), std::span(pts.tab.dlambda).subspan(q * nloc * 3, nloc * 3), local, nloc);
        const double w = pts.w[i];
        const double du = uh - u.mean(i);
        e_u += w * du * du;
        const Vec2 vbar = v.mean(i);
        e_v += w * sq(v_transform(gh, params), vbar);
        e_var += w * std::max(0.0, v.second_moment(i) - (vbar[0] * vbar[0] + vbar[1] * vbar[1]));
        e_s += w * std::pow(std::sqrt(sq(s_flux(gh, params), sf.mean(i))), pp);
      }
    }
    const double tau = traj.grid.tau();
    r.sq_linfty_l2 = std::max(r.sq_linfty_l2, e_u);
    r.sq_l2_v_avg += tau * e_v;
    r.sq_l2_v += tau * (e_v + e_var);
    r.lp_s_sum += tau * e_s;
  }
  finish(r, params);
  return r;
}

struct DiscreteErrorAccumulator::Impl {
  struct Run {
    std::shared_ptr<const Trajectory> traj;
    int k = 1;                                   // reference steps per coarse step
    std::vector<int> coarse_tri;                 // per reference triangle
    std::vector<std::array<double, 3>> lambda;   // per reference quadrature point
    std::map<int, Vector> open;                  // partial window means
    ErrorReport report;
  };

  FeSpacePtr space;
  TimeGrid grid;
  PLaplaceParams params;
  PointSet pts;
  std::vector<Run> runs;
  int next = 0;

  Impl(FeSpacePtr s, TimeGrid g, PLaplaceParams p, const ErrorOptions& o)
      : space(std::move(s)),
        grid(g),
        params(p),
        pts(*space, o.discrete_quad_degree > 0 ? o.discrete_quad_degree : 2 * space->degree()) {}

  void evaluate(Run& run, int m, const Vector& mean) {
    const FeSpace& fine = *space;
    const FeSpace& coarse = *run.traj->space;
    const Vector& c = run.traj->snapshots[m].coeffs;
    const int nf = fine.dofs_per_cell(), nc = coarse.dofs_per_cell();
    const std::size_t nq = pts.rule->size();
    const double pp = params.conjugate();
    std::array<double, 10> lf{}, lc{}, phi{};
    std::array<double, 30> dphi{};
    double e_u = 0.0, e_v = 0.0, e_s = 0.0;
    for (std::size_t t = 0; t < fine.mesh().num_triangles(); ++t) {
      const auto fd = fine.cell_dofs(t);
      for (int i = 0; i < nf; ++i) lf[i] = mean[fd[i]];
      const int ct = run.coarse_tri[t];
      const auto cd = coarse.cell_dofs(ct);
      for (int i = 0; i < nc; ++i) lc[i] = c[cd[i]];
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t i = t * nq + q;
        double ur = 0.0;
        for (int k = 0; k < nf; ++k) ur += lf[k] * pts.tab.values[q * nf + k];
        const Vec2 gr =
            combine_gradient(fine.geometry(t), std::span(pts.tab.dlambda).subspan(q * nf * 3, nf * 3), lf, nf);
        coarse.element().values(run.lambda[i], std::span(phi).first(nc));
        coarse.element().lambda_derivatives(run.lambda[i], std::span(dphi).first(3 * nc));
        double uh = 0.0;
        for (int k = 0; k < nc; ++k) uh += lc[k] * phi[k];
        const Vec2 gh = combine_gradient(coarse.geometry(ct), dphi, lc, nc);
        const double w = pts.w[i];
        e_u += w * (uh - ur) * (uh - ur);
        e_v += w * sq(v_transform(gh, params), v_transform(gr, params));
        e_s += w * std::pow(std::sqrt(sq(s_flux(gh, params), s_flux(gr, params))), pp);
      }
    }
    const double tau = run.traj->grid.tau();
    run.report.sq_linfty_l2 = std::max(run.report.sq_linfty_l2, e_u);
    run.report.sq_l2_v += tau * e_v;
    run.report.lp_s_sum += tau * e_s;
  }
};

DiscreteErrorAccumulator::DiscreteErrorAccumulator(FeSpacePtr ref_space, TimeGrid ref_grid, PLaplaceParams params,
                                                   ErrorOptions options)
    : impl_(std::make_unique<Impl>(std::move(ref_space), ref_grid, params, options)) {}

DiscreteErrorAccumulator::~DiscreteErrorAccumulator() = default;

void DiscreteErrorAccumulator::add(std::shared_ptr<const Trajectory> traj) {
  if (impl_->next != 0) throw std::logic_error("runs must be registered before the reference is streamed");
  check_snapshots(*traj);
  const TimeGrid& g = traj->grid;
  const TimeGrid& rg = impl_->grid;
  const double scale = std::max(std::abs(rg.t0), std::abs(rg.t_end));
  if (std::abs(g.t0 - rg.t0) > 1e-12 * scale || std::abs(g.t_end - rg.t_end) > 1e-12 * scale) {
    throw IncompatibleHierarchy("reference and run cover different time intervals");
  }
  if (rg.steps % g.steps != 0) throw IncompatibleHierarchy("reference steps are not a multiple of the run's steps");

  const Mesh& fine = impl_->space->mesh();
  const Mesh& coarse = traj->space->mesh();
  if (fine.domain() != coarse.domain() || coarse.level() > fine.level()) {
    throw IncompatibleHierarchy("reference mesh is not a refinement of the run's mesh");
  }
  const Mesh* anc = &fine;
  while (anc->level() > coarse.level()) {
    if (!anc->parent()) throw IncompatibleHierarchy("reference mesh lacks the run's level in its hierarchy");
    anc = anc->parent().get();
  }
  if (anc != &coarse) {
    const bool same = anc->num_triangles() == coarse.num_triangles() && anc->num_vertices() == coarse.num_vertices() &&
                      std::equal(anc->vertices().begin(), anc->vertices().end(), coarse.vertices().begin(),
                                 [](Point a, Point b) { return a.x == b.x && a.y == b.y; }) &&
                      anc->triangles() == coarse.triangles();
    if (!same) throw IncompatibleHierarchy("run mesh does not match the reference hierarchy");
  }

  Impl::Run run;
  run.traj = std::move(traj);
  run.k = rg.steps / g.steps;
  run.report = base_report(*run.traj);
  const std::size_t nq = impl_->pts.rule->size();
  run.coarse_tri.resize(fine.num_triangles());
  run.lambda.resize(fine.num_triangles() * nq);
  for (std::size_t t = 0; t < fine.num_triangles(); ++t) {
    const int ct = fine.ancestor(t, coarse.level());
    run.coarse_tri[t] = ct;
    for (std::size_t q = 0; q < nq; ++q) run.lambda[t * nq + q] = barycentric(coarse, ct, impl_->pts.x[t * nq + q]);
  }
  impl_->runs.push_back(std::move(run));
}

void DiscreteErrorAccumulator::observe(int j, const Vector& u_ref) {
  if (j != impl_->next) throw std::logic_error("reference snapshots must arrive in order");
  if (u_ref.size() != static_cast<Eigen::Index>(impl_->space->ndof())) throw SpaceMismatch("reference snapshot size");
  ++impl_->next;
  for (Impl::Run& run : impl_->runs) {
    const int M = run.traj->grid.steps;
    const int k = run.k;
    for (int m = std::max(1, j / k - 1); m <= std::min(M, j / k + 1); ++m) {
      const int lo = (m - 1) * k, hi = std::min(m + 1, M) * k;
      if (j < lo || j > hi) continue;
      const double w = (j == lo || j == hi ? 0.5 : 1.0) / (hi - lo);
      auto [it, fresh] = run.open.try_emplace(m, Vector::Zero(u_ref.size()));
      it->second += w * u_ref;
      if (j == hi) {
        impl_->evaluate(run, m, it->second);
        run.open.erase(it);
      }
    }
  }
}

StepObserver DiscreteErrorAccumulator::observer() {
  return [this](int j, const Vector& u) { observe(j, u); };
}

std::vector<ErrorReport> DiscreteErrorAccumulator::reports() const {
  if (impl_->next != impl_->grid.steps + 1) throw std::logic_error("reference trajectory not fully observed");
  std::vector<ErrorReport> out;
  for (const Impl::Run& run : impl_->runs) {
    ErrorReport r = run.report;
    r.sq_l2_v_avg = r.sq_l2_v;
    finish(r, impl_->params);
    out.push_back(r);
  }
  return out;
}

ErrorReport compute_errors(const Trajectory& traj, const Trajectory& ref, const PLaplaceParams& params,
                           const ErrorOptions& options) {
  check_snapshots(ref);
  DiscreteErrorAccumulator acc(ref.space, ref.grid, params, options);
  acc.add(std::shared_ptr<const Trajectory>(&traj, [](const Trajectory*) {}));
  for (int j = 0; j <= ref.grid.steps; ++j) acc.observe(j, ref.snapshots[j].coeffs);
  return acc.reports().front();
}

ErrorReport compute_errors(const Trajectory& traj, const ReferenceSolution& ref, const PLaplaceParams& params,
                           const ErrorOptions& options) {
  if (const auto* exact = std::get_if<ExactSolution>(&ref)) return compute_errors(traj, *exact, params, options);
  return compute_errors(traj, *std::get<std::shared_ptr<const Trajectory>>(ref), params, options);
}

double err_linfty_l2(const Trajectory& traj, const ReferenceSolution& ref, const PLaplaceParams& params) {
  return compute_errors(traj, ref, params).sq_linfty_l2;
}

std::pair<double, double> err_l2_v(const Trajectory& traj, const ReferenceSolution& ref, const PLaplaceParams& params) {
  const ErrorReport r = compute_errors(traj, ref, params);
  return {r.sq_l2_v, r.sq_l2_v_avg};
}

double err_lp_s(const Trajectory& traj, const ReferenceSolution& ref, const PLaplaceParams& params) {
  return compute_errors(traj, ref, params).sq_lp_s;
}

double field_value(const ErrorReport& r, std::string_view field) {
  double sum = 0.0;
  std::size_t start = 0;
  while (start <= field.size()) {
    const std::size_t plus = std::min(field.find('+', start), field.size());
    const std::string_view name = field.substr(start, plus - start);
    if (name == "sqVerr") {
      sum += r.sq_l2_v;
    } else if (name == "sqVerr1") {
      sum += r.sq_l2_v_avg;
    } else if (name == "sqLinftyError") {
      sum += r.sq_linfty_l2;
    } else if (name == "sqAerr") {
      sum += r.lp_s_sum;
    } else if (name == "sqLpS") {
      sum += r.sq_lp_s;
    } else {
      throw std::invalid_argument("unknown error field '" + std::string(name) + "'");
    }
    start = plus + 1;
  }
  return sum;
}

OrderReport empirical_order(const std::vector<ErrorReport>& reports, std::string_view field, Abscissa against) {
  if (reports.size() < 2) throw InsufficientData("empirical order needs at least two reports");
  std::vector<double> x, y;
  for (const ErrorReport& r : reports) {
    const double a = against == Abscissa::h ? r.h : against == Abscissa::tau ? r.tau : static_cast<double>(r.ndof);
    const double e = field_value(r, field);
    if (!(a > 0.0) || !(e > 0.0)) throw InsufficientData("empirical order needs positive errors and abscissae");
    x.push_back(std::log(a));
    y.push_back(std::log(e));
  }
  OrderReport out;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] == x[i - 1]) throw std::invalid_argument("abscissa repeats between consecutive reports");
    out.slopes.push_back((y[i] - y[i - 1]) / (x[i] - x[i - 1]));
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  out.ls_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

}  // namespace plheat
