#include "cgs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cgs/linalg.hpp"
#include "cgs/tape.hpp"

namespace cgs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative singular-value cutoff for the dimension counts.
constexpr double kCountCutoff = 1e-9;

// Values of every field at every point: out[j] is the 2N x m matrix at pts[j].
std::vector<Eigen::MatrixXd> batch_fields(std::span<const VectorField> fields, const ComplexChart& chart,
                                          std::span<const Point> pts) {
  const auto n = static_cast<Eigen::Index>(chart.real_dim());
  std::vector<Expr> flat;
  for (const VectorField& f : fields) flat.insert(flat.end(), f.components().begin(), f.components().end());
  std::vector<Eigen::MatrixXd> out;
  if (flat.empty()) {
    out.assign(pts.size(), Eigen::MatrixXd(n, 0));
    return out;
  }
  const Eigen::MatrixXd rows = evaluate_at(flat, chart, pts);
  out.reserve(pts.size());
  for (Eigen::Index j = 0; j < rows.rows(); ++j) {
    Eigen::MatrixXd m(n, static_cast<Eigen::Index>(fields.size()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) m.col(c) = rows.block(j, c * n, 1, n).transpose();
    out.push_back(std::move(m));
  }
  return out;
}

// Per point, the largest Euclidean norm among the given fields.
std::vector<double> max_field_norm(std::span<const VectorField> fields, const ComplexChart& chart,
                                   std::span<const Point> pts) {
  std::vector<double> out(pts.size(), 0.0);
  if (fields.empty()) return out;
  const auto vals = batch_fields(fields, chart, pts);
  for (std::size_t j = 0; j < pts.size(); ++j) out[j] = vals[j].colwise().norm().maxCoeff();
  return out;
}

std::vector<double> max_abs(const Eigen::MatrixXd& vals, std::size_t points) {
  std::vector<double> out(points, 0.0);
  if (vals.cols() == 0) return out;
  for (Eigen::Index j = 0; j < vals.rows(); ++j) out[static_cast<std::size_t>(j)] = vals.row(j).cwiseAbs().maxCoeff();
  return out;
}

// Per point, the largest |e| / max(1, rounding bound of e). Second-order
// identities on ill-conditioned formulas lose digits in proportion to the bound.
std::vector<double> conditioned_residual(std::span<const Expr> exprs, const ComplexChart& chart,
                                         std::span<const Point> pts) {
  std::vector<double> out(pts.size(), 0.0);
  if (exprs.empty()) return out;
  const Eigen::MatrixXd vals = evaluate_at(exprs, chart, pts);
  Env env;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    for (std::size_t i = 0; i < chart.names().size(); ++i) env[chart.names()[i]] = pts[j][i];
    for (std::size_t m = 0; m < exprs.size(); ++m) {
      const double v = std::abs(vals(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m)));
      if (v <= out[j]) continue;  // the ratio cannot exceed |v|
      out[j] = std::max(out[j], v / std::max(1.0, rounding_bound(exprs[m], env)));
    }
  }
  return out;
}

Eigen::MatrixXd j_matrix(int real_dim) {
  Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(real_dim, real_dim);
  for (int i = 0; i < real_dim; i += 2) {
    jm(i + 1, i) = 1.0;   // J d/dx = d/dy
    jm(i, i + 1) = -1.0;  // J d/dy = -d/dx
  }
  return jm;
}

std::vector<Expr> gradient_exprs(const GradientSystem& sys) {
  std::vector<Expr> out;
  for (const Expr& u : sys.u) {
    for (const std::string& name : sys.chart->names()) out.push_back(diff(u, name));
  }
  return out;
}

Eigen::MatrixXd gradient_matrix(const Eigen::MatrixXd& row, Eigen::Index j, int k, int n) {
  Eigen::MatrixXd g(k, n);
  for (int a = 0; a < k; ++a) g.row(a) = row.block(j, static_cast<Eigen::Index>(a) * n, 1, n);
  return g;
}

// Projection residual of each bracket onto span(basis) at each point.
std::vector<double> span_defect(std::span<const VectorField> basis, std::span<const VectorField> brackets,
                                const ComplexChart& chart, std::span<const Point> pts) {
  std::vector<double> out(pts.size(), 0.0);
  if (brackets.empty()) return out;
  const auto b = batch_fields(basis, chart, pts);
  const auto v = batch_fields(brackets, chart, pts);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (linalg::numerical_rank(b[j]) < b[j].cols()) {
      out[j] = kInf;
      continue;
    }
    double worst = 0.0;
    for (Eigen::Index c = 0; c < v[j].cols(); ++c) {
      worst = std::max(worst, linalg::projection_residual(b[j], v[j].col(c)));
    }
    out[j] = worst;
  }
  return out;
}

std::vector<VectorField> pair_brackets(std::span<const VectorField> fields) {
  std::vector<VectorField> out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = i + 1; j < fields.size(); ++j) out.push_back(lie_bracket(fields[i], fields[j]));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Report check_axioms(const GradientSystem& sys, std::span<const Point> pts, double tol) {
  sys.validate();
  const ComplexChart& chart = *sys.chart;
  const auto k = static_cast<std::size_t>(sys.k());
  std::vector<Expr> du, dcu;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      du.push_back(derivative_along(sys.xi[b], sys.u[a]));
      Expr e = dc_expr(sys.u[a], sys.xi[b]);
      if (a == b) e = e - Expr::constant(1.0);
      dcu.push_back(e);
    }
  }
  Report r;
  r.add(make_check("du-vanishes-on-fields", "gradient-system axioms", max_abs(evaluate_at(du, chart, pts), pts.size()),
                   tol));
  r.add(make_check("dc-normalization", "gradient-system axioms", max_abs(evaluate_at(dcu, chart, pts), pts.size()),
                   tol));

  std::vector<VectorField> both = sys.xi;
  const auto jx = sys.j_fields();
  both.insert(both.end(), jx.begin(), jx.end());
  const auto vals = batch_fields(both, chart, pts);
  std::vector<double> rank_res(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    rank_res[j] = std::abs(linalg::numerical_rank(vals[j]) - static_cast<double>(2 * k));
  }
  r.add(make_check("span-rank", "gradient-system axioms", std::move(rank_res), 0.5,
                   "integer deficit of rank{xi, J xi} from 2k"));
  r.add(make_check("complex-distribution-integrable", "gradient-system axioms",
                   span_defect(both, pair_brackets(both), chart, pts), tol));
  return r;
}

Report check_axioms(const GradientSystem& sys, const SampleConfig& sampling, double tol) {
  const auto pts = sample_points(sys, sampling);
  return check_axioms(sys, pts, tol);
}

// ---------------------------------------------------------------------------

bool DecompositionRecord::counts_ok() const {
  return real_rank == expected_real_rank && kernel_in_span == expected_kernel_in_span &&
         kernel_dim == expected_kernel_dim && horizontal_dim == expected_horizontal_dim &&
         total_rank == expected_total_rank;
}

namespace {

bool near_rank_cutoff(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return false;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv(0) == 0.0) return false;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double rel = sv(i) / sv(0);
    if (rel > kCountCutoff * 1e-3 && rel < kCountCutoff * 1e3) return true;
  }
  return false;
}

DecompositionRecord decomposition_at(const Eigen::MatrixXd& fields, const Eigen::MatrixXd& grad, int k, int n_real) {
  const int n = n_real / 2 - k;
  DecompositionRecord d;
  d.expected_real_rank = 2 * k;
  d.expected_kernel_in_span = k;
  d.expected_kernel_dim = 2 * n + k;
  d.expected_horizontal_dim = 2 * n;
  d.expected_total_rank = n_real;

  const Eigen::MatrixXd jm = j_matrix(n_real);
  const Eigen::MatrixXd dc = -grad * jm;
  const Eigen::MatrixXd xi = fields.leftCols(k);
  const Eigen::MatrixXd jxi = fields.rightCols(k);

  d.real_rank = linalg::numerical_rank(fields, kCountCutoff);
  d.kernel_in_span = d.real_rank - linalg::numerical_rank(grad * fields, kCountCutoff);
  d.kernel_dim = n_real - linalg::numerical_rank(grad, kCountCutoff);
  Eigen::MatrixXd stacked(2 * k, n_real);
  stacked << grad, dc;
  d.horizontal_dim = n_real - linalg::numerical_rank(stacked, kCountCutoff);
  const Eigen::MatrixXd h = linalg::null_space(stacked, kCountCutoff);
  Eigen::MatrixXd all(n_real, fields.cols() + h.cols());
  all << fields, h;
  d.total_rank = linalg::numerical_rank(all, kCountCutoff);

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
  d.du_on_span = (grad * xi).cwiseAbs().maxCoeff();
  d.split_j = (grad * jxi + id).cwiseAbs().maxCoeff();
  d.split_dc = (dc * xi - id).cwiseAbs().maxCoeff();
  d.near_cutoff = near_rank_cutoff(fields) || near_rank_cutoff(grad) || near_rank_cutoff(stacked);
  return d;
}

int count_deficit(const DecompositionRecord& d) {
  return std::abs(d.real_rank - d.expected_real_rank) + std::abs(d.kernel_in_span - d.expected_kernel_in_span) +
         std::abs(d.kernel_dim - d.expected_kernel_dim) + std::abs(d.horizontal_dim - d.expected_horizontal_dim) +
         std::abs(d.total_rank - d.expected_total_rank);
}

}  // namespace

DecompositionRecord check_decompositions(const GradientSystem& sys, const Point& p) {
  const auto records = [&] {
    std::vector<VectorField> both = sys.xi;
    const auto jx = sys.j_fields();
    both.insert(both.end(), jx.begin(), jx.end());
    const Eigen::MatrixXd fields = field_values(both, p);
    const auto grads = gradient_exprs(sys);
    const Eigen::MatrixXd row = evaluate_at(grads, *sys.chart, std::span<const Point>(&p, 1));
    return decomposition_at(fields, gradient_matrix(row, 0, sys.k(), sys.chart->real_dim()), sys.k(),
                            sys.chart->real_dim());
  }();
  return records;
}

Report decomposition_checks(const GradientSystem& sys, std::span<const Point> pts, double tol) {
  sys.validate();
  const ComplexChart& chart = *sys.chart;
  std::vector<VectorField> both = sys.xi;
  const auto jx = sys.j_fields();
  both.insert(both.end(), jx.begin(), jx.end());
  const auto fields = batch_fields(both, chart, pts);
  const Eigen::MatrixXd grads = evaluate_at(gradient_exprs(sys), chart, pts);

  std::vector<double> counts(pts.size()), split(pts.size());
  bool near = false;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const auto d = decomposition_at(fields[j], gradient_matrix(grads, static_cast<Eigen::Index>(j), sys.k(),
                                                               chart.real_dim()),
                                    sys.k(), chart.real_dim());
    counts[j] = count_deficit(d);
    split[j] = std::max({d.du_on_span, d.split_j, d.split_dc});
    near = near || d.near_cutoff;
  }
  Report r;
  r.add(make_check("decomposition-dimensions", "tangent space decompositions", std::move(counts), 0.5,
                   "sum of integer deviations of the five dimension counts"));
  r.add(make_check("decomposition-splitting", "tangent space decompositions", std::move(split), tol));
  if (near) r.warnings.push_back("decomposition: a singular value lies near the rank cutoff");
  return r;
}

// ---------------------------------------------------------------------------

Report check_bracket_relations(const GradientSystem& sys, std::span<const Point> pts, double tol) {
  sys.validate();
  const ComplexChart& chart = *sys.chart;
  const auto k = static_cast<std::size_t>(sys.k());
  const auto& xi = sys.xi;
  const auto jxi = sys.j_fields();

  std::vector<VectorField> all_brackets;   // every bracket among xi and J xi
  std::vector<Expr> ddc_identities;        // dd^c u_g(A, B) + d^c u_g([.,.])
  std::vector<VectorField> rho_identities; // sum_g dd^c u_g(A, B) xi_g + [.,.]
  std::vector<VectorField> symmetries;

  auto rho_of = [&](const std::vector<Expr>& coeffs, const VectorField& bracket) {
    std::vector<Expr> c(bracket.components());
    for (std::size_t g = 0; g < k; ++g) {
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = c[i] + coeffs[g] * xi[g][i];
    }
    return VectorField(sys.chart, std::move(c));
  };
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      const VectorField xx = lie_bracket(xi[a], xi[b]);
      const VectorField xj = lie_bracket(xi[a], jxi[b]);
      const VectorField jj = lie_bracket(jxi[a], jxi[b]);
      const VectorField jx = lie_bracket(jxi[a], xi[b]);
      if (a < b) {
        all_brackets.push_back(xx);
        all_brackets.push_back(jj);
      }
      all_brackets.push_back(xj);

      std::vector<Expr> c1, c2, c3;
      for (std::size_t g = 0; g < k; ++g) {
        const Expr& u = sys.u[g];
        c1.push_back(ddc_expr(u, xi[a], xi[b]));
        c2.push_back(ddc_expr(u, jxi[a], jxi[b]));
        c3.push_back(ddc_expr(u, xi[a], jxi[b]));
        ddc_identities.push_back(c1.back() + dc_expr(u, xx));
        ddc_identities.push_back(c2.back() + dc_expr(u, xx));
        ddc_identities.push_back(c3.back() + dc_expr(u, xj));
      }
      rho_identities.push_back(rho_of(c1, xx));
      rho_identities.push_back(rho_of(c2, xx));
      rho_identities.push_back(rho_of(c3, xj));

      symmetries.push_back(jj - xx);
      symmetries.push_back(jx + xj);
    }
  }

  Report r;
  r.add(make_check("brackets-in-real-distribution", "bracket closure of the real distribution",
                   span_defect(xi, all_brackets, chart, pts), tol));
  std::vector<Expr> rho_flat;
  for (const VectorField& f : rho_identities) rho_flat.insert(rho_flat.end(), f.components().begin(), f.components().end());
  r.add(make_check("ddc-bracket-identities", "ddc of U on brackets", conditioned_residual(ddc_identities, chart, pts), tol,
                   "relative to the rounding bound"));
  r.add(make_check("rho-ddc-identities", "representation of ddc identities", conditioned_residual(rho_flat, chart, pts),
                   tol, "relative to the rounding bound"));
  r.add(make_check("real-distribution-integrable", "integrability of the real distribution",
                   span_defect(xi, pair_brackets(xi), chart, pts), tol));
  r.add(make_check("j-bracket-symmetries", "integrability of J on the fields",
                   max_field_norm(symmetries, chart, pts), tol));
  return r;
}

Report check_commutation(const GradientSystem& sys, std::span<const Point> pts, double tol) {
  sys.validate();
  const ComplexChart& chart = *sys.chart;
  const auto k = static_cast<std::size_t>(sys.k());
  const auto jxi = sys.j_fields();
  // [Z_a, Z_b] with Z = (xi - i J xi)/2 has real part ([xi_a, xi_b] - [J xi_a, J xi_b])/4
  // and imaginary part -([xi_a, J xi_b] + [J xi_a, xi_b])/4.
  std::vector<VectorField> re, im;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      re.push_back((lie_bracket(sys.xi[a], sys.xi[b]) - lie_bracket(jxi[a], jxi[b])).scaled(Expr::constant(0.25)));
      im.push_back((lie_bracket(sys.xi[a], jxi[b]) + lie_bracket(jxi[a], sys.xi[b])).scaled(Expr::constant(-0.25)));
    }
  }
  std::vector<double> res(pts.size(), 0.0);
  if (!re.empty()) {
    const auto rv = batch_fields(re, chart, pts);
    const auto iv = batch_fields(im, chart, pts);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      double worst = 0.0;
      for (Eigen::Index c = 0; c < rv[j].cols(); ++c) {
        worst = std::max(worst, std::sqrt(rv[j].col(c).squaredNorm() + iv[j].col(c).squaredNorm()));
      }
      res[j] = worst;
    }
  }
  Report r;
  r.add(make_check("complexified-commutation", "commutation of the complexified representation", std::move(res), tol));
  return r;
}

Classification classify(const GradientSystem& sys, std::span<const Point> pts, double tol) {
  sys.validate();
  const ComplexChart& chart = *sys.chart;
  Classification c;
  for (const VectorField& f : sys.xi) {
    c.holomorphic_residual = std::max(c.holomorphic_residual, is_holomorphic(complexify(f), pts, tol).max_residual);
  }
  const auto jxi = sys.j_fields();
  std::vector<VectorField> brackets;
  const auto k = static_cast<std::size_t>(sys.k());
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a < b) {
        brackets.push_back(lie_bracket(sys.xi[a], sys.xi[b]));
        brackets.push_back(lie_bracket(jxi[a], jxi[b]));
      }
      brackets.push_back(lie_bracket(sys.xi[a], jxi[b]));
    }
  }
  for (double v : max_field_norm(brackets, chart, pts)) c.abelian_residual = std::max(c.abelian_residual, v);
  std::vector<Expr> lap;
  for (const Expr& u : sys.u) lap.push_back(laplacian(u, chart));
  for (double v : max_abs(evaluate_at(lap, chart, pts), pts.size())) c.harmonic_residual = std::max(c.harmonic_residual, v);
  c.holomorphic = c.holomorphic_residual < tol;
  c.abelian = c.abelian_residual < tol;
  c.harmonic = c.harmonic_residual < tol;
  return c;
}

// ---------------------------------------------------------------------------

LevelSetResult check_level_set(const GradientSystem& sys, std::span<const double> value, std::span<const Point> seeds,
                               double tol) {
  sys.validate();
  const ComplexChart& chart = *sys.chart;
  const int k = sys.k();
  const int nr = chart.real_dim();
  if (static_cast<int>(value.size()) != k) throw DimensionError("level set value needs k entries");
  const Tape u_tape(sys.u, chart.names());
  const auto grads = gradient_exprs(sys);
  const Tape g_tape(grads, chart.names());
  const Eigen::Map<const Eigen::VectorXd> target(value.data(), k);

  LevelSetResult out;
  std::vector<double> uval(static_cast<std::size_t>(k)), gval(grads.size());
  for (const Point& seed : seeds) {
    Eigen::VectorXd x = seed.vector();
    bool converged = false;
    try {
      for (int it = 0; it < 50; ++it) {
        u_tape.eval(std::span<const double>(x.data(), x.size()), uval);
        const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(uval.data(), k) - target;
        if (r.lpNorm<Eigen::Infinity>() < 1e-12 * (1.0 + target.lpNorm<Eigen::Infinity>())) {
          converged = true;
          break;
        }
        g_tape.eval(std::span<const double>(x.data(), x.size()), gval);
        const Eigen::MatrixXd g = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            gval.data(), k, nr);
        x -= g.completeOrthogonalDecomposition().solve(r);
        if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 1e6) break;
      }
    } catch (const DomainError&) {
      converged = false;
    }
    if (!converged) continue;
    Point p(x);
    if (sys.in_domain(p)) out.points.push_back(std::move(p));
  }

  std::vector<double> eq_res, rank_res, cr_res;
  const Eigen::MatrixXd jm = j_matrix(nr);
  const int n = sys.n();
  for (const Point& p : out.points) {
    u_tape.eval(p.coords(), uval);
    eq_res.push_back((Eigen::Map<const Eigen::VectorXd>(uval.data(), k) - target).lpNorm<Eigen::Infinity>());
    g_tape.eval(p.coords(), gval);
    const Eigen::MatrixXd g =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(gval.data(), k, nr);
    rank_res.push_back(std::abs(linalg::numerical_rank(g, kCountCutoff) - k));
    const Eigen::MatrixXd t = linalg::null_space(g, kCountCutoff);
    Eigen::MatrixXd both(nr, 2 * t.cols());
    both << t, jm * t;
    const int complex_tangent = static_cast<int>(2 * t.cols()) - linalg::numerical_rank(both, kCountCutoff);
    cr_res.push_back(std::abs(complex_tangent - 2 * n));
  }
  out.empty = out.points.empty();
  const std::string note = out.empty ? "level set empty near the seeds" : std::string{};
  out.report.add(make_check("level-set-equation", "level sets are CR submanifolds", std::move(eq_res), tol, note));
  out.report.add(make_check("level-set-rank", "level sets are CR submanifolds", std::move(rank_res), 0.5, note));
  out.report.add(make_check("level-set-cr-type", "level sets are CR submanifolds", std::move(cr_res), 0.5, note));
  return out;
}

}  // namespace cgs
