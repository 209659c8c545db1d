#include "cgs/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "cgs/linalg.hpp"

namespace cgs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd j_matrix(int real_dim) {
  Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(real_dim, real_dim);
  for (int i = 0; i < real_dim; i += 2) {
    jm(i + 1, i) = 1.0;
    jm(i, i + 1) = -1.0;
  }
  return jm;
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ')';
  return os.str();
}

}  // namespace

void CRInitialData::validate() const {
  if (!chart) throw DimensionError("cr_data: missing chart");
  const auto n2 = static_cast<std::size_t>(chart->real_dim());
  if (k < 1) throw DimensionError("cr_data: k must be positive");
  if (params.empty()) throw DimensionError("cr_data: no parameters");
  if (std::set<std::string>(params.begin(), params.end()).size() != params.size()) {
    throw DimensionError("cr_data: parameter names must be distinct");
  }
  if (sigma.size() != n2) throw DimensionError("cr_data: sigma needs " + std::to_string(n2) + " components");
  if (params.size() + static_cast<std::size_t>(k) != n2) {
    throw DimensionError("cr_data: number of parameters plus k must equal the real dimension");
  }
  if (rho.size() != static_cast<std::size_t>(k)) throw DimensionError("cr_data: need one initial field per basis vector");
  const std::set<std::string> pset(params.begin(), params.end());
  auto check = [&](const Expr& e, const char* what) {
    for (const std::string& v : variables(e)) {
      if (!pset.count(v)) throw DimensionError(std::string("cr_data: ") + what + " uses unknown parameter '" + v + "'");
    }
  };
  for (const Expr& e : sigma) check(e, "sigma");
  for (const auto& r : rho) {
    if (r.size() != n2) throw DimensionError("cr_data: initial field needs " + std::to_string(n2) + " components");
    for (const Expr& e : r) check(e, "initial field");
  }
  if (!extension.empty()) {
    if (extension.size() != static_cast<std::size_t>(k)) throw DimensionError("cr_data: need one extension per field");
    for (const VectorField& f : extension) {
      if (*f.chart() != *chart) throw DimensionError("cr_data: extension lives on another chart");
    }
  }
  if (group) {
    group->validate(chart->complex_dim());
    if (group->basis.size() != static_cast<std::size_t>(k)) throw DimensionError("cr_data: group basis needs k matrices");
  }
  if (!param_anchor.empty() && param_anchor.size() != params.size()) {
    throw DimensionError("cr_data: param_anchor needs one value per parameter");
  }
  for (const Expr& e : domain) {
    for (const std::string& v : variables(e)) {
      if (!chart->index_of(v)) throw DimensionError("cr_data: domain uses unknown coordinate '" + v + "'");
    }
  }
}

std::vector<Point> QueryGrid::points(const ComplexChart& chart, int count_override) const {
  if (base.size() != static_cast<std::size_t>(chart.real_dim())) {
    throw DimensionError("query grid base needs one value per real coordinate");
  }
  std::vector<std::size_t> index;
  std::vector<int> counts;
  for (const QueryAxis& a : axes) {
    const auto idx = chart.index_of(a.coordinate);
    if (!idx) throw DimensionError("query axis uses unknown coordinate '" + a.coordinate + "'");
    const int c = count_override > 0 ? count_override : a.count;
    if (c < 1) throw DimensionError("query axis needs at least one point");
    index.push_back(static_cast<std::size_t>(*idx));
    counts.push_back(c);
  }
  std::vector<Point> out;
  std::vector<int> pos(axes.size(), 0);
  for (;;) {
    std::vector<double> x = base;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const double t = counts[a] == 1 ? 0.5 : static_cast<double>(pos[a]) / (counts[a] - 1);
      x[index[a]] = axes[a].lo + t * (axes[a].hi - axes[a].lo);
    }
    out.emplace_back(std::move(x));
    // Last axis varies fastest.
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++pos[a] < counts[a]) break;
      pos[a] = 0;
      if (a == 0) return out;
    }
    if (axes.empty()) return out;
  }
}

// ---------------------------------------------------------------------------

CauchyMap::CauchyMap(const CRInitialData& data, const CauchyConfig& cfg)
    : data_(std::make_shared<const CRInitialData>(data)), flow_(cfg.flow) {
  data.validate();
  m_ = data.m();
  k_ = data.k;
  n_complex_ = data.chart->complex_dim();
  if (!data.group && data.extension.empty()) {
    throw RefusalError("cr_data: no complexified flow available (give a matrix group or holomorphic extensions)");
  }
  if (!data.group) {
    const std::vector<double> anchor = data.param_anchor.empty() ? std::vector<double>(data.params.size(), 0.0)
                                                                 : data.param_anchor;
    const Tape s(data.sigma, data.params);
    const Point p(s.eval(anchor));
    for (const VectorField& f : data.extension) {
      if (!is_holomorphic(complexify(f), std::span<const Point>(&p, 1), 1e-8).holomorphic) {
        throw RefusalError("cr_data: extension field is not holomorphic");
      }
    }
  }
  if (flow_.fixed_steps == 0) flow_.fixed_steps = flow_.steps_per_unit;
  sigma_tape_ = Tape(data.sigma, data.params);
  std::vector<Expr> ds;
  for (const Expr& e : data.sigma) {
    for (const std::string& p : data.params) ds.push_back(diff(e, p));
  }
  dsigma_tape_ = Tape(ds, data.params);
  std::vector<Expr> rho;
  for (const auto& r : data.rho) rho.insert(rho.end(), r.begin(), r.end());
  rho_tape_ = Tape(rho, data.params);
}

Eigen::VectorXd CauchyMap::sigma(const Eigen::VectorXd& p) const {
  const std::vector<double> v = sigma_tape_.eval(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd CauchyMap::dsigma(const Eigen::VectorXd& p) const {
  const std::vector<double> v = dsigma_tape_.eval(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), real_dim(),
                                                                                                  m_);
}

Eigen::MatrixXd CauchyMap::rho0(const Eigen::VectorXd& p) const {
  const std::vector<double> v = rho_tape_.eval(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
  // stored field by field: column a holds field a
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), real_dim(), k_);
}

bool CauchyMap::in_domain(const Eigen::VectorXd& p) const {
  try {
    const Point s(sigma(p));
    for (const Expr& e : data_->domain) {
      if (!(evaluate_at(e, *data_->chart, s) > 0.0)) return false;
    }
    return true;
  } catch (const Error&) {
    return false;
  }
}

Eigen::VectorXd CauchyMap::operator()(const Eigen::VectorXd& pu) const {
  if (pu.size() != m_ + k_) throw DimensionError("F: argument needs m + k entries");
  const Point start(sigma(pu.head(m_)));
  std::vector<std::complex<double>> w(static_cast<std::size_t>(k_));
  for (int a = 0; a < k_; ++a) w[static_cast<std::size_t>(a)] = {0.0, pu(m_ + a)};
  if (data_->group) return complexified_flow_matrix(*data_->group, start, w).vector();
  return flow_complex(data_->extension, start, w, flow_).vector();
}

AmbientMap CauchyMap::as_function() const {
  return [this](const Eigen::VectorXd& pu) { return (*this)(pu); };
}

CauchyMap build_F(const CRInitialData& data, const CauchyConfig& cfg) { return CauchyMap(data, cfg); }

TransverseResult check_cr_transverse(const CauchyMap& f, std::span<const Eigen::VectorXd> params) {
  TransverseResult r;
  const Eigen::MatrixXd jm = j_matrix(f.real_dim());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Eigen::VectorXd& p = params[i];
    Eigen::MatrixXd frame(f.real_dim(), f.m() + f.k());
    frame << f.dsigma(p), jm * f.rho0(p);
    const int deficit = f.real_dim() - linalg::numerical_rank(frame, 1e-9);
    r.samples.push_back(p);
    r.deficits.push_back(deficit);
    if (deficit != 0 && !r.witness) {
      r.transverse = false;
      r.witness = i;
    }
  }
  return r;
}

std::vector<Eigen::VectorXd> sample_parameters(const CauchyMap& f, const CauchyConfig& cfg) {
  const CRInitialData& d = f.data();
  Eigen::VectorXd anchor = Eigen::VectorXd::Zero(f.m());
  for (std::size_t i = 0; i < d.param_anchor.size(); ++i) anchor(static_cast<Eigen::Index>(i)) = d.param_anchor[i];
  std::vector<Eigen::VectorXd> out;
  if (f.in_domain(anchor)) out.push_back(anchor);
  std::mt19937_64 rng(cfg.seed);
  const long attempts = 100L * std::max(cfg.samples, 1);
  for (long a = 0; a < attempts && static_cast<int>(out.size()) < cfg.samples; ++a) {
    Eigen::VectorXd p(f.m());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      p(i) = anchor(i) + cfg.param_box * (2.0 * unit - 1.0);
    }
    if (f.in_domain(p)) out.push_back(std::move(p));
  }
  if (out.empty()) throw NumericalError("cr_data: no parameter samples inside the domain");
  return out;
}

Eigen::MatrixXd invariant_lift(const CauchyMap& f, const Eigen::VectorXd& pu) {
  const Eigen::VectorXd p = pu.head(f.m());
  const Eigen::MatrixXd c = f.dsigma(p).colPivHouseholderQr().solve(f.rho0(p));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(f.m() + f.k(), f.k());
  h.topRows(f.m()) = c;
  return h;
}

AdaptedFrame compute_PQA(const CauchyMap& f, const Eigen::VectorXd& pu, double h, double det_floor) {
  AdaptedFrame fr;
  fr.pu = pu;
  fr.dF = fd_jacobian(f.as_function(), pu, h);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(fr.dF);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) throw NumericalError("dF is numerically singular");
  fr.j_adapted = lu.solve(j_matrix(f.real_dim()) * fr.dF);
  fr.h_hat = invariant_lift(f, pu);
  const int m = f.m();
  const int k = f.k();
  const Eigen::MatrixXd jh = fr.j_adapted * fr.h_hat;
  fr.P = jh.bottomRows(k);
  fr.Q = fr.j_adapted.block(m, m, k, k);
  const double det = fr.P.determinant();
  if (!(std::abs(det) >= det_floor)) throw NumericalError("det P below the floor: outside the working domain");
  fr.A = fr.P.partialPivLu().solve(fr.Q);
  return fr;
}

ConstructedFields construct_fields(const AdaptedFrame& frame, double tol) {
  const auto k = frame.P.rows();
  const auto n = frame.dF.rows();
  Eigen::MatrixXd eu = Eigen::MatrixXd::Zero(n, k);
  eu.bottomRows(k).setIdentity();
  ConstructedFields out;
  out.xi_adapted = -frame.j_adapted * eu + frame.j_adapted * frame.h_hat * frame.A;
  out.jxi_adapted = eu - frame.h_hat * frame.A;
  out.xi = frame.dF * out.xi_adapted;
  out.jxi = frame.dF * out.jxi_adapted;

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
  const double du = out.xi_adapted.bottomRows(k).cwiseAbs().maxCoeff();
  const double dc = (out.jxi_adapted.bottomRows(k) - id).cwiseAbs().maxCoeff();
  const double scale = 1.0 + out.xi.cwiseAbs().maxCoeff();
  const double jcons = (j_matrix(static_cast<int>(n)) * out.xi - out.jxi).cwiseAbs().maxCoeff() / scale;
  out.internal_residual = std::max({du, dc, jcons});
  if (!(out.internal_residual < tol)) {
    throw NumericalError("construction inconsistency: internal residual " + std::to_string(out.internal_residual));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<VectorField> ambient_fields(const CRInitialData& d) {
  if (!d.extension.empty()) return d.extension;
  return d.group->left_invariant_fields(d.chart);
}

struct QueryWork {
  const CauchyMap& f;
  const CauchyConfig& cfg;
  Eigen::VectorXd anchor;

  EquationSolution solve_at(const Point& q, const Eigen::VectorXd& guess) const {
    try {
      return equation_map(f.as_function(), f.k(), q, guess, cfg.newton);
    } catch (const NumericalError&) {
      if (guess.isApprox(anchor)) throw;
    } catch (const DomainError&) {
      if (guess.isApprox(anchor)) throw;
    }
    return equation_map(f.as_function(), f.k(), q, anchor, cfg.newton);
  }
};

}  // namespace

CauchyResult solve(const CRInitialData& data, std::span<const Point> queries, const CauchyConfig& cfg,
                   const CauchyOracle* oracle) {
  const CauchyMap f(data, cfg);
  const int m = f.m();
  const int k = f.k();
  const int n2 = f.real_dim();
  const Eigen::MatrixXd jm = j_matrix(n2);
  CauchyResult res;

  const auto params = sample_parameters(f, cfg);
  res.transverse = check_cr_transverse(f, params);
  {
    std::string note;
    if (res.transverse.witness) {
      note = "not transverse at parameters " + format_vector(params[*res.transverse.witness]) + ", point " +
             format_vector(f.sigma(params[*res.transverse.witness]));
    }
    res.report.add(make_check("cr-transverse", "CR-transverse initial data", res.transverse.deficits, 0.5, note));
  }
  if (!res.transverse.transverse) return res;

  // Checks along M (u = 0).
  std::vector<double> generator, initial, extension;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
  for (const Eigen::VectorXd& p : params) {
    Eigen::VectorXd pu = Eigen::VectorXd::Zero(m + k);
    pu.head(m) = p;
    try {
      const AdaptedFrame fr = compute_PQA(f, pu, cfg.fd_step, cfg.det_floor);
      const Eigen::MatrixXd rho = f.rho0(p);
      const double gen = std::max((fr.dF.rightCols(k) - jm * rho).cwiseAbs().maxCoeff(),
                                  (f(pu) - f.sigma(p)).cwiseAbs().maxCoeff());
      generator.push_back(gen);
      initial.push_back(std::max((fr.P - id).cwiseAbs().maxCoeff(), fr.Q.cwiseAbs().maxCoeff()));
      const ConstructedFields cf = construct_fields(fr);
      extension.push_back((cf.xi - rho).colwise().norm().maxCoeff());
    } catch (const Error&) {
      generator.push_back(kInf);
      initial.push_back(kInf);
      extension.push_back(kInf);
    }
  }
  res.report.add(make_check("flow-generator", "complexified flow of the initial fields", std::move(generator),
                            cfg.tol_initial_frame));
  res.report.add(make_check("initial-frame", "P = I and Q = 0 on M", std::move(initial), cfg.tol_initial_frame));
  res.report.add(make_check("extension-property", "constructed fields extend the initial fields", std::move(extension),
                            cfg.tol_extension));

  {
    const auto fields = ambient_fields(data);
    double worst = 0.0;
    for (const Eigen::VectorXd& p : params) {
      try {
        worst = std::max(worst, frobenius_defect(fields, Point(f.sigma(p))));
      } catch (const Error&) {
        worst = kInf;
      }
    }
    if (!(worst < cfg.tol_frobenius)) {
      res.report.warnings.push_back("initial distribution is not integrable on the samples (defect " +
                                    std::to_string(worst) + ")");
    }
  }

  QueryWork work{f, cfg, Eigen::VectorXd::Zero(m + k)};
  work.anchor.head(m) = params.front();
  if (!data.param_anchor.empty()) {
    for (int i = 0; i < m; ++i) work.anchor(i) = data.param_anchor[static_cast<std::size_t>(i)];
  }

  std::optional<Tape> oracle_u;
  if (oracle && !oracle->u.empty()) oracle_u.emplace(oracle->u, data.chart->names());

  Eigen::VectorXd guess = work.anchor;
  std::vector<double> du_res, dc_res, stab, orac_u, orac_xi;
  for (const Point& q : queries) {
    CauchyPoint cp;
    cp.query = q;
    try {
      const EquationSolution sol = work.solve_at(q, guess);
      cp.unknowns = sol.unknowns;
      cp.value = sol.value;
      cp.newton_iterations = sol.iterations;
      guess = sol.unknowns;

      const AdaptedFrame fr = compute_PQA(f, sol.unknowns, cfg.fd_step, cfg.det_floor);
      const ConstructedFields cf = construct_fields(fr);
      cp.xi = cf.xi;
      const AdaptedFrame fr2 = compute_PQA(f, sol.unknowns, 0.5 * cfg.fd_step, cfg.det_floor);
      cp.stability = (construct_fields(fr2).xi - cf.xi).cwiseAbs().maxCoeff();

      const double h = cfg.axiom_step;
      const Eigen::VectorXd qv = q.vector();
      auto u_at = [&](const Eigen::VectorXd& x) { return work.solve_at(Point(x), sol.unknowns).value; };
      for (int b = 0; b < k; ++b) {
        const Eigen::VectorXd dxi = (u_at(qv + h * cf.xi.col(b)) - u_at(qv - h * cf.xi.col(b))) / (2.0 * h);
        const Eigen::VectorXd djxi = (u_at(qv + h * cf.jxi.col(b)) - u_at(qv - h * cf.jxi.col(b))) / (2.0 * h);
        cp.du_residual = std::max(cp.du_residual, dxi.cwiseAbs().maxCoeff());
        // d^c u(xi) = -du(J xi)
        Eigen::VectorXd dc = -djxi;
        dc(b) -= 1.0;
        cp.dc_residual = std::max(cp.dc_residual, dc.cwiseAbs().maxCoeff());
      }
      if (oracle_u) {
        const std::vector<double> expect = oracle_u->eval(q.coords());
        cp.oracle_u = (Eigen::Map<const Eigen::VectorXd>(expect.data(), k) - cp.value).cwiseAbs().maxCoeff();
      }
      if (oracle && !oracle->xi.empty()) {
        const Eigen::MatrixXd expect = field_values(oracle->xi, q);
        cp.oracle_xi = (expect - cp.xi).colwise().norm().maxCoeff();
      }
    } catch (const Error& e) {
      cp.error = e.what();
      cp.du_residual = cp.dc_residual = cp.stability = cp.oracle_u = cp.oracle_xi = kInf;
      guess = work.anchor;
    }
    du_res.push_back(cp.du_residual);
    dc_res.push_back(cp.dc_residual);
    stab.push_back(cp.stability);
    orac_u.push_back(cp.oracle_u);
    orac_xi.push_back(cp.oracle_xi);
    res.points.push_back(std::move(cp));
  }
  res.report.add(make_check("axiom-du", "gradient-system axioms", std::move(du_res), cfg.tol_axioms));
  res.report.add(make_check("axiom-dc", "gradient-system axioms", std::move(dc_res), cfg.tol_axioms));
  res.report.add(make_check("fd-stability", "step-size stability of dF", std::move(stab), cfg.tol_stability));
  if (oracle_u) {
    res.report.add(make_check("oracle-gradient-map", "closed-form gradient map", std::move(orac_u), cfg.tol_oracle));
  }
  if (oracle && !oracle->xi.empty()) {
    res.report.add(make_check("oracle-fields", "closed-form representation", std::move(orac_xi), cfg.tol_oracle));
  }
  return res;
}

}  // namespace cgs
