#include "cgs/flow.hpp"

#include <algorithm>
#include <cmath>

#include "cgs/linalg.hpp"
#include "cgs/tape.hpp"

namespace cgs {

void FlowConfig::validate() const {
  if (steps_per_unit < 1) throw DimensionError("flow: steps_per_unit must be at least 1");
  if (!(max_time > 0.0) || !(divergence_bound > 0.0)) throw DimensionError("flow: bounds must be positive");
  if (fixed_steps < 0) throw DimensionError("flow: fixed_steps must be non-negative");
}

namespace {

int step_count(double span, const FlowConfig& cfg) {
  if (span > cfg.max_time) throw NumericalError("flow: time exceeds max_time");
  if (cfg.fixed_steps > 0) return cfg.fixed_steps;
  return std::max(1, static_cast<int>(std::ceil(span * cfg.steps_per_unit)));
}

void check_bounds(std::span<const double> x, double bound) {
  for (double c : x) {
    if (!std::isfinite(c) || std::abs(c) > bound) throw NumericalError("flow: trajectory left the divergence bound");
  }
}

}  // namespace

Point flow_real(const VectorField& v, const Point& p, double t, const FlowConfig& cfg) {
  cfg.validate();
  const Tape tape(v.components(), v.chart()->names());
  const std::size_t n = v.size();
  if (p.size() != n) throw DimensionError("flow_real: point dimension does not match chart");
  const int steps = step_count(std::abs(t), cfg);
  const double h = t / steps;

  std::vector<double> x(p.coords().begin(), p.coords().end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (int s = 0; s < steps; ++s) {
    tape.eval(x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    tape.eval(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    tape.eval(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    tape.eval(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    check_bounds(x, cfg.divergence_bound);
  }
  return Point(std::move(x));
}

Point exp_map(const Point& p, const VectorField& v, const FlowConfig& cfg) { return flow_real(v, p, 1.0, cfg); }

Point flow_complex(std::span<const VectorField> fields, const Point& p, std::span<const std::complex<double>> w,
                   const FlowConfig& cfg) {
  cfg.validate();
  if (fields.size() != w.size()) throw DimensionError("flow_complex: one complex time per field");
  if (fields.empty()) return p;
  const ComplexChart& chart = *fields.front().chart();
  const std::size_t n = static_cast<std::size_t>(chart.real_dim());
  const std::size_t cn = n / 2;
  if (p.size() != n) throw DimensionError("flow_complex: point dimension does not match chart");

  std::vector<Expr> coeffs;
  std::vector<Expr> dbar;
  for (const VectorField& f : fields) {
    const ComplexField z = complexify(f);
    for (std::size_t mu = 0; mu < cn; ++mu) {
      coeffs.push_back(z.re[mu]);
      coeffs.push_back(z.im[mu]);
    }
    for (const auto& [re, im] : antiholomorphic_derivatives(z)) {
      dbar.push_back(re);
      dbar.push_back(im);
    }
  }
  const Tape field_tape(coeffs, chart.names());
  const Tape dbar_tape(dbar, chart.names());
  constexpr double kHolomorphyTol = 1e-8;

  using C = std::complex<double>;
  std::vector<double> real_buf(n), vals(coeffs.size()), dvals(dbar.size());
  auto rhs = [&](const std::vector<C>& z, std::vector<C>& out) {
    for (std::size_t mu = 0; mu < cn; ++mu) {
      real_buf[2 * mu] = z[mu].real();
      real_buf[2 * mu + 1] = z[mu].imag();
    }
    field_tape.eval(real_buf, vals);
    std::fill(out.begin(), out.end(), C(0.0, 0.0));
    for (std::size_t a = 0; a < fields.size(); ++a) {
      for (std::size_t mu = 0; mu < cn; ++mu) {
        const C coeff(vals[a * n + 2 * mu], vals[a * n + 2 * mu + 1]);
        out[mu] += w[a] * coeff;
      }
    }
  };
  auto check_holomorphic = [&](const std::vector<C>& z) {
    for (std::size_t mu = 0; mu < cn; ++mu) {
      real_buf[2 * mu] = z[mu].real();
      real_buf[2 * mu + 1] = z[mu].imag();
    }
    dbar_tape.eval(real_buf, dvals);
    for (std::size_t i = 0; i < dvals.size(); i += 2) {
      if (std::hypot(dvals[i], dvals[i + 1]) > kHolomorphyTol) {
        throw RefusalError("flow_complex: field is not holomorphic along the trajectory");
      }
    }
  };

  double span = 0.0;
  for (const C& wa : w) span += std::norm(wa);
  const int steps = step_count(std::sqrt(span), cfg);
  const double h = 1.0 / steps;

  std::vector<C> z(cn), k1(cn), k2(cn), k3(cn), k4(cn), tmp(cn);
  for (std::size_t mu = 0; mu < cn; ++mu) z[mu] = C(p[2 * mu], p[2 * mu + 1]);
  std::vector<double> flat(n);
  for (int s = 0; s < steps; ++s) {
    check_holomorphic(z);
    rhs(z, k1);
    for (std::size_t i = 0; i < cn; ++i) tmp[i] = z[i] + 0.5 * h * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < cn; ++i) tmp[i] = z[i] + 0.5 * h * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < cn; ++i) tmp[i] = z[i] + h * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < cn; ++i) z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    for (std::size_t mu = 0; mu < cn; ++mu) {
      flat[2 * mu] = z[mu].real();
      flat[2 * mu + 1] = z[mu].imag();
    }
    check_bounds(flat, cfg.divergence_bound);
  }
  check_holomorphic(z);
  for (std::size_t mu = 0; mu < cn; ++mu) {
    flat[2 * mu] = z[mu].real();
    flat[2 * mu + 1] = z[mu].imag();
  }
  return Point(std::move(flat));
}

Point flow_complex(const VectorField& v, const Point& p, std::complex<double> w, const FlowConfig& cfg) {
  return flow_complex(std::span<const VectorField>(&v, 1), p, std::span<const std::complex<double>>(&w, 1), cfg);
}

// ---------------------------------------------------------------------------
// Matrix exponential

ComplexMatrix matrix_exp(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("matrix_exp: matrix must be square");
  const Eigen::Index n = a.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);

  // Nilpotent: A^j vanishes exactly for some j <= n, the series terminates.
  {
    ComplexMatrix power = a;
    ComplexMatrix sum = id;
    double factorial = 1.0;
    for (Eigen::Index j = 1; j <= n; ++j) {
      if (power.isZero(0.0)) return sum;
      factorial *= static_cast<double>(j);
      sum += power / factorial;
      power = power * a;
    }
    if (power.isZero(0.0)) return sum;
  }

  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const ComplexMatrix b = a / std::ldexp(1.0, squarings);

  constexpr int kDegree = 18;
  ComplexMatrix result = id;
  for (int j = kDegree; j >= 1; --j) result = id + b * result / static_cast<double>(j);
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

void MatrixGroupSpec::validate(int complex_dim) const {
  if (dim < 1) throw DimensionError("matrix group: dimension must be positive");
  if (static_cast<int>(coordinate_entries.size()) != complex_dim) {
    throw DimensionError("matrix group: one matrix entry per complex coordinate required");
  }
  if (fixed.rows() != dim || fixed.cols() != dim) throw DimensionError("matrix group: fixed entries have wrong size");
  for (std::size_t i = 0; i < coordinate_entries.size(); ++i) {
    const auto [r, c] = coordinate_entries[i];
    if (r < 0 || c < 0 || r >= dim || c >= dim) throw DimensionError("matrix group: entry out of range");
    for (std::size_t j = 0; j < i; ++j) {
      if (coordinate_entries[j] == coordinate_entries[i]) throw DimensionError("matrix group: duplicate entry");
    }
  }
  if (basis.empty()) throw DimensionError("matrix group: empty algebra basis");
  Eigen::MatrixXd flat(dim * dim, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t a = 0; a < basis.size(); ++a) {
    if (basis[a].rows() != dim || basis[a].cols() != dim) throw DimensionError("matrix group: basis matrix size");
    flat.col(static_cast<Eigen::Index>(a)) = basis[a].reshaped();
  }
  if (linalg::numerical_rank(flat) != static_cast<int>(basis.size())) {
    throw DimensionError("matrix group: basis matrices are linearly dependent");
  }
}

ComplexMatrix MatrixGroupSpec::to_matrix(const Point& p) const {
  ComplexMatrix m = fixed;
  for (std::size_t mu = 0; mu < coordinate_entries.size(); ++mu) {
    const auto [r, c] = coordinate_entries[mu];
    m(r, c) = {p[2 * mu], p[2 * mu + 1]};
  }
  return m;
}

Point MatrixGroupSpec::from_matrix(const ComplexMatrix& m, double tol) const {
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      const bool is_coord =
          std::find(coordinate_entries.begin(), coordinate_entries.end(), std::make_pair(r, c)) !=
          coordinate_entries.end();
      if (!is_coord && std::abs(m(r, c) - fixed(r, c)) > tol) {
        throw NumericalError("matrix group: result is not in the coordinate domain");
      }
    }
  }
  std::vector<double> coords;
  for (const auto& [r, c] : coordinate_entries) {
    coords.push_back(m(r, c).real());
    coords.push_back(m(r, c).imag());
  }
  return Point(std::move(coords));
}

std::vector<VectorField> MatrixGroupSpec::left_invariant_fields(const ChartPtr& chart) const {
  // Entry (r, j) of g as (re, im) expressions.
  auto entry = [&](int r, int j) -> std::pair<Expr, Expr> {
    for (std::size_t mu = 0; mu < coordinate_entries.size(); ++mu) {
      if (coordinate_entries[mu] == std::make_pair(r, j)) {
        return {Expr::variable(chart->x_name(static_cast<int>(mu))),
                Expr::variable(chart->y_name(static_cast<int>(mu)))};
      }
    }
    return {Expr::constant(fixed(r, j).real()), Expr::constant(fixed(r, j).imag())};
  };
  std::vector<VectorField> out;
  for (const Eigen::MatrixXd& e : basis) {
    ComplexField z{chart, {}, {}};
    for (const auto& [r, c] : coordinate_entries) {
      Expr re, im;
      for (int j = 0; j < dim; ++j) {
        const double coeff = e(j, c);
        if (coeff == 0.0) continue;
        auto [gre, gim] = entry(r, j);
        re = re + Expr::constant(coeff) * gre;
        im = im + Expr::constant(coeff) * gim;
      }
      z.re.push_back(re);
      z.im.push_back(im);
    }
    out.push_back(realify(z));
  }
  return out;
}

Point complexified_flow_matrix(const MatrixGroupSpec& spec, const Point& g, std::span<const std::complex<double>> v) {
  if (v.size() != spec.basis.size()) throw DimensionError("complexified_flow_matrix: one coefficient per basis element");
  ComplexMatrix algebra = ComplexMatrix::Zero(spec.dim, spec.dim);
  for (std::size_t a = 0; a < v.size(); ++a) algebra += v[a] * spec.basis[a].cast<std::complex<double>>();
  return spec.from_matrix(spec.to_matrix(g) * matrix_exp(algebra));
}

// ---------------------------------------------------------------------------
// Newton solve for the equation of M

Eigen::MatrixXd fd_jacobian(const AmbientMap& f, const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    const Eigen::VectorXd fp = f(xp);
    xp(j) = x(j) - h;
    const Eigen::VectorXd fm = f(xp);
    xp(j) = x(j);
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

EquationSolution equation_map(const AmbientMap& f, int k, const Point& q, const Eigen::VectorXd& initial_guess,
                              const NewtonConfig& cfg) {
  const Eigen::VectorXd target = q.vector();
  if (initial_guess.size() != target.size()) throw DimensionError("equation_map: guess size must match ambient");
  Eigen::VectorXd x = initial_guess;
  Eigen::VectorXd r = f(x) - target;
  double rnorm = r.lpNorm<Eigen::Infinity>();
  int it = 0;
  while (rnorm > cfg.tolerance) {
    if (it >= cfg.max_iterations) throw NumericalError("equation_map: Newton did not converge");
    ++it;
    const Eigen::MatrixXd jac = fd_jacobian(f, x, cfg.fd_step);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) throw NumericalError("equation_map: Jacobian is numerically singular");
    const Eigen::VectorXd step = lu.solve(r);
    double lambda = 1.0;
    bool improved = false;
    for (int halvings = 0; halvings < 30; ++halvings) {
      const Eigen::VectorXd trial = x - lambda * step;
      Eigen::VectorXd rt;
      try {
        rt = f(trial) - target;
      } catch (const Error&) {
        lambda *= 0.5;
        continue;
      }
      const double tn = rt.lpNorm<Eigen::Infinity>();
      if (tn < rnorm) {
        x = trial;
        r = rt;
        rnorm = tn;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) {
      // No decrease is possible: the residual sits at the rounding floor.
      if (rnorm < 1e3 * cfg.tolerance) break;
      throw NumericalError("equation_map: line search failed");
    }
  }
  EquationSolution sol;
  sol.unknowns = x;
  sol.value = -x.tail(k);
  sol.iterations = it;
  sol.residual = rnorm;
  return sol;
}

}  // namespace cgs
