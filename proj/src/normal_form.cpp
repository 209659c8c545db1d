#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "cgs/linalg.hpp"
#include "cgs/tape.hpp"
#include "cgs/verify.hpp"

namespace cgs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd apply_j(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); i += 2) {
    out(i) = -v(i + 1);
    out(i + 1) = v(i);
  }
  return out;
}

}  // namespace

std::vector<int> select_slice(const GradientSystem& sys, const Point& p) {
  const int nr = sys.chart->real_dim();
  std::vector<VectorField> both = sys.xi;
  const auto jx = sys.j_fields();
  both.insert(both.end(), jx.begin(), jx.end());
  Eigen::MatrixXd frame = field_values(both, p);
  std::vector<int> chosen;
  for (int step = 0; step < sys.n(); ++step) {
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(nr, frame.cols());
    int best = -1;
    double best_score = -1.0;
    for (int mu = 0; mu < sys.chart->complex_dim(); ++mu) {
      if (std::find(chosen.begin(), chosen.end(), mu) != chosen.end()) continue;
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(nr, 2);
      e(2 * mu, 0) = 1.0;
      e(2 * mu + 1, 1) = 1.0;
      const Eigen::MatrixXd r = e - q * (q.transpose() * e);
      const double score = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues().minCoeff();
      if (score > best_score) {
        best_score = score;
        best = mu;
      }
    }
    chosen.push_back(best);
    Eigen::MatrixXd grown(nr, frame.cols() + 2);
    grown << frame, Eigen::MatrixXd::Zero(nr, 2);
    grown(2 * best, frame.cols()) = 1.0;
    grown(2 * best + 1, frame.cols() + 1) = 1.0;
    frame = std::move(grown);
  }
  if (linalg::numerical_rank(frame, 1e-9) != nr) throw NumericalError("normal form: slice rank failure");
  return chosen;
}

Point normal_form_phi(const GradientSystem& sys, const Point& base, std::span<const int> slice,
                      std::span<const std::complex<double>> z, std::span<const std::complex<double>> w,
                      const FlowConfig& flow) {
  if (z.size() != slice.size()) throw DimensionError("normal form: one slice coordinate per chosen direction");
  if (w.size() != sys.xi.size()) throw DimensionError("normal form: one complex time per field");
  std::vector<double> x(base.coords().begin(), base.coords().end());
  for (std::size_t j = 0; j < slice.size(); ++j) {
    x[static_cast<std::size_t>(2 * slice[j])] += z[j].real();
    x[static_cast<std::size_t>(2 * slice[j] + 1)] += z[j].imag();
  }
  Point q(std::move(x));
  const auto jx = sys.j_fields();
  for (std::size_t a = w.size(); a-- > 0;) {
    q = flow_real(jx[a], q, w[a].imag(), flow);
    q = flow_real(sys.xi[a], q, w[a].real(), flow);
  }
  return q;
}

NormalForm normal_form(const GradientSystem& sys, std::span<const Point> pts, const NormalFormConfig& cfg) {
  sys.validate();
  const Classification c = classify(sys, pts, cfg.classify_tol);
  if (!c.holomorphic || !c.abelian) {
    throw RefusalError(std::string("normal form needs a holomorphic abelian system (holomorphic: ") +
                       (c.holomorphic ? "yes" : "no") + ", abelian: " + (c.abelian ? "yes" : "no") + ")");
  }
  if (cfg.grid < 1) throw DimensionError("normal form: grid needs at least one point");
  const ComplexChart& chart = *sys.chart;
  const std::size_t k = sys.xi.size();
  const Point base = cfg.base.size() ? cfg.base : Point(std::vector<double>(static_cast<std::size_t>(chart.real_dim())));
  if (base.size() != static_cast<std::size_t>(chart.real_dim())) throw DimensionError("normal form: base point size");
  if (!sys.in_domain(base)) throw DimensionError("normal form: base point outside the domain");

  FlowConfig flow = cfg.flow;
  if (flow.fixed_steps == 0) flow.fixed_steps = flow.steps_per_unit;

  NormalForm nf;
  nf.slice = select_slice(sys, base);
  const std::size_t n = nf.slice.size();
  for (int i = 0; i < cfg.grid; ++i) {
    const double t = cfg.grid == 1 ? 0.5 : static_cast<double>(i) / (cfg.grid - 1);
    const double v = n == 0 ? 0.0 : -cfg.extent + 2.0 * cfg.extent * t;
    nf.grid_x.push_back(v);
    nf.grid_y.push_back(v);
  }

  const Tape u_tape(sys.u, chart.names());
  const auto jx = sys.j_fields();
  std::vector<Tape> xi_tapes;
  for (const VectorField& f : sys.xi) xi_tapes.emplace_back(f.components(), chart.names());

  using C = std::complex<double>;
  auto phi = [&](std::span<const C> z, std::span<const C> w) {
    Point q;
    try {
      q = normal_form_phi(sys, base, nf.slice, z, w, flow);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("normal form: flow escaped (") + e.what() + ")");
    }
    if (!sys.in_domain(q)) throw NumericalError("normal form: the grid leaves the domain; reduce the extent");
    return q;
  };
  auto f_values = [&](std::span<const C> z, std::span<const C> w) {
    const Point q = phi(z, w);
    std::vector<double> u = u_tape.eval(q.coords());
    for (std::size_t a = 0; a < k; ++a) u[a] += w[a].imag();
    return u;
  };
  auto diff_norm = [](const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
  };

  std::optional<Tape> oracle;
  std::vector<std::string> slice_names;
  if (!cfg.oracle.empty()) {
    if (cfg.oracle.size() != k) throw DimensionError("normal form oracle needs k expressions");
    for (int mu : nf.slice) {
      slice_names.push_back(chart.x_name(mu));
      slice_names.push_back(chart.y_name(mu));
    }
    for (const Expr& e : cfg.oracle) {
      for (const std::string& v : variables(e)) {
        if (std::find(slice_names.begin(), slice_names.end(), v) == slice_names.end()) {
          throw DimensionError("normal form oracle uses '" + v + "', which is not a slice coordinate");
        }
      }
    }
    oracle.emplace(cfg.oracle, slice_names);
  }

  const double h = cfg.fd_step;
  const std::vector<C> w_table(k, cfg.table_w);
  std::vector<double> independence, generator, holomorphy, oracle_res;
  for (std::size_t i = 0; i < nf.grid_x.size(); ++i) {
    for (std::size_t j = 0; j < nf.grid_y.size(); ++j) {
      std::vector<C> z(n, C(0.0, 0.0));
      if (n > 0) z[0] = C(nf.grid_x[i], nf.grid_y[j]);
      std::vector<double> fz;
      try {
        fz = f_values(z, w_table);
      } catch (const DomainError& e) {
        throw NumericalError(std::string("normal form: left the domain (") + e.what() + ")");
      }
      nf.f.push_back(fz);

      const std::vector<double> f0 = f_values(z, std::vector<C>(k, C(0.0, 0.0)));
      double ind = diff_norm(fz, f0);
      for (const C& probe : cfg.probes) ind = std::max(ind, diff_norm(f_values(z, std::vector<C>(k, probe)), f0));
      independence.push_back(ind);

      const Point at = phi(z, w_table);
      double gen = 0.0;
      double hol = 0.0;
      for (std::size_t a = 0; a < k; ++a) {
        std::vector<C> wp = w_table, wm = w_table;
        wp[a] += h;
        wm[a] -= h;
        const Eigen::VectorXd dt = (phi(z, wp).vector() - phi(z, wm).vector()) / (2.0 * h);
        const std::vector<double> xv = xi_tapes[a].eval(at.coords());
        gen = std::max(gen, (dt - Eigen::Map<const Eigen::VectorXd>(xv.data(), dt.size())).norm());
        wp = w_table;
        wm = w_table;
        wp[a] += C(0.0, h);
        wm[a] -= C(0.0, h);
        const Eigen::VectorXd du = (phi(z, wp).vector() - phi(z, wm).vector()) / (2.0 * h);
        hol = std::max(hol, (du - apply_j(dt)).norm());
      }
      for (std::size_t s = 0; s < n; ++s) {
        std::vector<C> zp = z, zm = z;
        zp[s] += h;
        zm[s] -= h;
        const Eigen::VectorXd dx = (phi(zp, w_table).vector() - phi(zm, w_table).vector()) / (2.0 * h);
        zp = z;
        zm = z;
        zp[s] += C(0.0, h);
        zm[s] -= C(0.0, h);
        const Eigen::VectorXd dy = (phi(zp, w_table).vector() - phi(zm, w_table).vector()) / (2.0 * h);
        hol = std::max(hol, (dy - apply_j(dx)).norm());
      }
      generator.push_back(gen);
      holomorphy.push_back(hol);

      if (oracle) {
        std::vector<double> in(slice_names.size(), 0.0);
        for (std::size_t s = 0; s < n; ++s) {
          in[2 * s] = z[s].real();
          in[2 * s + 1] = z[s].imag();
        }
        try {
          oracle_res.push_back(diff_norm(oracle->eval(in), fz));
        } catch (const DomainError&) {
          oracle_res.push_back(kInf);
        }
      }
    }
  }
  nf.report.add(make_check("normal-form-independence", "F does not depend on t and u", std::move(independence), cfg.tol));
  nf.report.add(make_check("normal-form-generator", "xi_a = d/dt_a in the new coordinates", std::move(generator),
                           std::max(cfg.tol, 1e-6), "finite differences in t"));
  nf.report.add(make_check("normal-form-holomorphy", "phi is holomorphic", std::move(holomorphy),
                           std::max(cfg.tol, 1e-6), "finite-difference Cauchy-Riemann residual"));
  if (oracle) nf.report.add(make_check("normal-form-oracle", "recovered F", std::move(oracle_res), cfg.oracle_tol));
  return nf;
}

}  // namespace cgs
