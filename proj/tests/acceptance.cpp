// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "cgs/cauchy.hpp"
#include "cgs/error.hpp"
#include "cgs/io/commands.hpp"
#include "cgs/io/gallery.hpp"
#include "cgs/io/system_file.hpp"
#include "cgs/verify.hpp"

using namespace cgs;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s [%2d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
  std::fflush(stdout);
}

VectorField field(const ChartPtr& c, std::initializer_list<const char*> comps) {
  std::vector<Expr> e;
  for (const char* s : comps) e.push_back(parse_expr(s));
  return VectorField(c, std::move(e));
}

std::vector<Point> sample(const GradientSystem& s, int n, std::uint64_t seed, std::vector<Expr> extra = {}) {
  SampleConfig c;
  c.seed = seed;
  c.points = n;
  c.extra_domain = std::move(extra);
  return sample_points(s, c);
}

// Independently typed closed forms.
const char* kHeisXi[3][6] = {{"1", "0", "0", "0", "0", "y2"}, {"0", "0", "1", "0", "x1", "0"}, {"0", "0", "0", "0", "1", "0"}};
const char* kHeisU[3] = {"-y1", "-y2", "-y3 + x1*y2"};

double max_field_gap(const std::vector<VectorField>& a, const std::vector<VectorField>& b, std::span<const Point> pts) {
  double worst = 0.0;
  for (const Point& p : pts) {
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i].at(p) - b[i].at(p)).norm());
  }
  return worst;
}

std::vector<VectorField> heisenberg_oracle(const ChartPtr& c) {
  std::vector<VectorField> out;
  for (const auto& f : kHeisXi) {
    std::vector<Expr> e;
    for (const char* s : f) e.push_back(parse_expr(s));
    out.emplace_back(c, std::move(e));
  }
  return out;
}

}  // namespace

int main() {
  report(1, "Heisenberg axioms at 100 points, < 1e-12, < 1 s", [] {
    const auto t0 = Clock::now();
    const io::SystemFile f = io::load_named("heisenberg");
    const GradientSystem& s = *f.system;
    const auto pts = sample(s, 100, 1);
    double du = 0.0, dc = 0.0;
    for (const Point& p : pts) {
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          du = std::max(du, std::abs(d_apply(s.u[a], s.xi[b], p)));
          dc = std::max(dc, std::abs(dc_apply(s.u[a], s.xi[b], p) - (a == b ? 1.0 : 0.0)));
        }
      }
    }
    const double t = seconds_since(t0);
    const double gap = max_field_gap(s.xi, heisenberg_oracle(s.chart), pts);
    double ugap = 0.0;
    for (const Point& p : pts) {
      for (int a = 0; a < 3; ++a) {
        ugap = std::max(ugap, std::abs(evaluate_at(s.u[a], *s.chart, p) - evaluate_at(parse_expr(kHeisU[a]), *s.chart, p)));
      }
    }
    return Outcome{pts.size() == 100 && du < 1e-12 && dc < 1e-12 && t < 1.0 && gap == 0.0 && ugap == 0.0,
                   fmt("max|du| %.2e, max|dc - delta| %.2e, %.3f s", du, dc, t) +
                       fmt(", gallery vs closed form %.1e/%.1e", gap, ugap)};
  });

  report(2, "Heisenberg bracket table at 100 points, < 1e-12", [] {
    const io::SystemFile f = io::load_named("heisenberg");
    const auto& xi = f.system->xi;
    std::vector<VectorField> jx;
    for (const VectorField& v : xi) jx.push_back(apply_J(v));
    const auto pts = sample(*f.system, 100, 2);
    const VectorField zero = VectorField::zero(f.chart);
    struct Rel {
      const VectorField *a, *b, *expect;
    };
    std::vector<Rel> rel{{&xi[0], &xi[1], &xi[2]}, {&xi[0], &xi[2], &zero}, {&xi[1], &xi[2], &zero},
                         {&jx[0], &jx[1], &xi[2]}, {&jx[0], &jx[2], &zero}, {&jx[1], &jx[2], &zero}};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) rel.push_back({&xi[i], &jx[j], &zero});
    }
    double worst = 0.0;
    for (const Rel& r : rel) {
      const VectorField diff = lie_bracket(*r.a, *r.b) - *r.expect;
      for (const Point& p : pts) worst = std::max(worst, diff.at(p).norm());
    }
    return Outcome{worst < 1e-12, fmt("%.0f relations, max residual %.2e", double(rel.size()), worst)};
  });

  report(3, "Heisenberg harmonic (< 1e-12), affine not harmonic (> 1e-3)", [] {
    const io::SystemFile h = io::load_named("heisenberg");
    double lh = 0.0;
    for (const Point& p : sample(*h.system, 100, 3)) {
      for (const Expr& u : h.system->u) lh = std::max(lh, std::abs(evaluate_at(laplacian(u, *h.chart), *h.chart, p)));
    }
    const io::SystemFile a = io::load_named("affine");
    double la = 0.0;
    for (const Point& p : sample(*a.system, 100, 3)) {
      for (const Expr& u : a.system->u) la = std::max(la, std::abs(evaluate_at(laplacian(u, *a.chart), *a.chart, p)));
    }
    return Outcome{lh < 1e-12 && la > 1e-3, fmt("Heisenberg max|Lap u| %.2e, affine max|Lap u| %.3e", lh, la)};
  });

  report(4, "affine bracket identity at 100 points in [0.5, 2]^2, < 1e-9", [] {
    const io::SystemFile a = io::load_named("affine");
    const auto& xi = a.system->xi;
    const auto pts = sample(*a.system, 100, 4, {parse_expr("x1 - 0.5"), parse_expr("y1 - 0.5"),
                                                parse_expr("2 - x1"), parse_expr("2 - y1")});
    const VectorField lhs = lie_bracket(xi[0], apply_J(xi[0]));
    const Expr coeff = parse_expr("(2*y2/y1)*(x1/y1 - 1/atan(y1/x1))");
    const VectorField rho2 = field(a.chart, {"0", "0", "y1/atan(y1/x1)", "0"});
    const VectorField rhs = rho2.scaled(coeff);
    double worst = 0.0;
    for (const Point& p : pts) worst = std::max(worst, (lhs.at(p) - rhs.at(p)).norm());
    const double gap = max_field_gap({xi[1]}, {rho2}, pts);
    return Outcome{pts.size() == 100 && worst < 1e-9 && gap < 1e-12,
                   fmt("max residual %.2e, gallery field vs closed form %.1e", worst, gap)};
  });

  report(5, "complexified commutation for Heisenberg, affine, line at 100 points, < 1e-9", [] {
    double worst = 0.0;
    bool ok = true;
    for (const char* name : {"heisenberg", "affine", "line"}) {
      const io::SystemFile f = io::load_named(name);
      const auto pts = sample(*f.system, 100, 5);
      const Report r = check_commutation(*f.system, pts, 1e-9);
      ok = ok && r.passed() && pts.size() == 100;
      for (const Check& c : r.checks) worst = std::max(worst, c.max_residual);
    }
    return Outcome{ok && worst < 1e-9, fmt("max residual %.2e", worst)};
  });

  report(6, "Cauchy solver on the line, 21 points in y, < 1e-6", [] {
    const io::SystemFile f = io::load_named("line");
    std::vector<Point> q;
    for (int i = 0; i < 21; ++i) q.emplace_back(std::vector<double>{0.0, -0.5 + 0.05 * i});
    const CauchyResult r = solve(*f.cr, q, {});
    double du = 0.0, dxi = 0.0;
    bool complete = r.points.size() == 21;
    for (const CauchyPoint& p : r.points) {
      if (!p.error.empty()) {
        complete = false;
        continue;
      }
      du = std::max(du, std::abs(p.value(0) + p.query[1]));
      dxi = std::max(dxi, (p.xi.col(0) - Eigen::Vector2d(1.0, 0.0)).norm());
    }
    return Outcome{complete && du < 1e-6 && dxi < 1e-6, fmt("max|U + y| %.2e, max|xi - d/dx| %.2e", du, dxi)};
  });

  report(7, "Cauchy solver on Heisenberg CR data, 5x5x5 grid, < 1e-5, < 30 s", [] {
    const auto t0 = Clock::now();
    const io::SystemFile f = io::load_named("heisenberg-cr");
    std::vector<Point> q;
    const double ys[5] = {-0.4, -0.2, 0.0, 0.2, 0.4};
    for (double a : ys) {
      for (double b : ys) {
        for (double c : ys) q.emplace_back(std::vector<double>{0.25, a, -0.2, b, 0.1, c});
      }
    }
    const CauchyResult r = solve(*f.cr, q, {});
    const double t = seconds_since(t0);
    const auto oracle = heisenberg_oracle(f.chart);
    double du = 0.0, dxi = 0.0, displayed = 0.0, umax = 0.0;
    bool complete = r.points.size() == 125;
    for (const CauchyPoint& p : r.points) {
      if (!p.error.empty()) {
        complete = false;
        continue;
      }
      const double x1 = p.query[0], y1 = p.query[1], y2 = p.query[3], y3 = p.query[5];
      const double lam[3] = {-y1, -y2, -y3 + x1 * y2};
      for (int a = 0; a < 3; ++a) {
        du = std::max(du, std::abs(p.value(a) - lam[a]));
        umax = std::max(umax, std::abs(lam[a]));
        dxi = std::max(dxi, (p.xi.col(a) - oracle[static_cast<std::size_t>(a)].at(p.query)).norm());
      }
      displayed = std::max(displayed, std::abs(p.value(2) + (y3 + x1 * y2)));
    }
    return Outcome{complete && du < 1e-5 && dxi < 1e-5 && t < 30.0 && umax <= 0.5,
                   fmt("max|U - Lambda| %.2e, max|xi - rho| %.2e, %.2f s", du, dxi, t) +
                       fmt(" (u3 = -y3 + x1*y2; the printed -(y3 + x1*y2) is off by %.2e, see ledger)", displayed)};
  });

  report(8, "non-uniqueness: two systems on the line, fields differ by e^0.1 - 1", [] {
    const io::SystemFile a = io::load_named("line");
    const io::SystemFile b = io::load_named("line-alt");
    const Report ra = check_axioms(*a.system, sample(*a.system, 100, 8), 1e-12);
    const Report rb = check_axioms(*b.system, sample(*b.system, 100, 8), 1e-12);
    const Point p(std::vector<double>{0.0, 0.1});
    const double gap = (a.system->xi[0].at(p) - b.system->xi[0].at(p)).norm();
    const double bound = std::exp(0.1) - 1.0;
    return Outcome{ra.passed() && rb.passed() && gap >= bound * (1.0 - 1e-15),
                   fmt("both axiom tables pass at 1e-12; |xi - xi'| at y = 0.1 is %.12f (bound %.12f)", gap, bound)};
  });

  report(9, "normal form: model < 1e-7, rotated < 1e-6, Heisenberg refused", [] {
    const io::SystemFile m = io::load_named("model-k1");
    NormalFormConfig cfg;
    const NormalForm nf = normal_form(*m.system, sample(*m.system, 100, 9), cfg);
    double em = 0.0;
    for (std::size_t i = 0; i < nf.grid_x.size(); ++i) {
      for (std::size_t j = 0; j < nf.grid_y.size(); ++j) {
        const double x = nf.grid_x[i], y = nf.grid_y[j];
        em = std::max(em, std::abs(nf.f[i * nf.grid_y.size() + j][0] - (x * x - y * y)));
      }
    }
    const bool grid_ok = nf.grid_x.size() == 11 && nf.grid_y.size() == 11 && nf.report.passed();

    const io::SystemFile r = io::load_named("model-k1-rotated");
    NormalFormConfig rc;
    rc.tol = 1e-6;
    const NormalForm nr = normal_form(*r.system, sample(*r.system, 100, 9), rc);
    double er = 0.0;
    const bool slice_ok = nr.slice == std::vector<int>{0};
    for (std::size_t i = 0; i < nr.grid_x.size(); ++i) {
      for (std::size_t j = 0; j < nr.grid_y.size(); ++j) {
        const double x = nr.grid_x[i], y = nr.grid_y[j];
        const double a = x - 0.2 * y, b = 0.2 * x + y;
        er = std::max(er, std::abs(nr.f[i * nr.grid_y.size() + j][0] - (a * a - b * b + 0.4 * y)));
      }
    }
    bool refused = false;
    const io::SystemFile h = io::load_named("heisenberg");
    try {
      normal_form(*h.system, sample(*h.system, 100, 9), {});
    } catch (const RefusalError&) {
      refused = true;
    }
    return Outcome{grid_ok && slice_ok && nr.report.passed() && em < 1e-7 && er < 1e-6 && refused,
                   fmt("model %.2e, rotated %.2e, Heisenberg refused: %s", em, er, refused ? "yes" : "no")};
  });

  report(10, "structural derivatives vs central differences, 1000 probes", [] {
    struct Source {
      Expr e;
      std::vector<std::string> vars;
      std::vector<Expr> domain;
    };
    std::vector<Source> pool;
    for (const io::GalleryEntry& g : io::gallery_files()) {
      const io::SystemFile f = io::parse_system(g.text, std::string(g.name));
      const auto& names = f.chart->names();
      if (f.system) {
        for (const Expr& u : f.system->u) pool.push_back({u, names, f.system->domain});
        for (const VectorField& v : f.system->xi) {
          for (const Expr& c : v.components()) pool.push_back({c, names, f.system->domain});
        }
      }
      if (f.cr) {
        for (const Expr& s : f.cr->sigma) pool.push_back({s, f.cr->params, {}});
        for (const auto& r : f.cr->rho) {
          for (const Expr& c : r) pool.push_back({c, f.cr->params, {}});
        }
      }
      for (const Expr& u : f.oracle.u) pool.push_back({u, names, {}});
      for (const Expr& e : f.oracle_f) pool.push_back({e, names, {}});
    }
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    const double h = 1e-5;
    double worst = 0.0;
    int probes = 0, attempts = 0;
    while (probes < 1000 && attempts < 100000) {
      ++attempts;
      const Source& s = pool[rng() % pool.size()];
      Env env;
      for (const std::string& v : s.vars) env[v] = coord(rng);
      const std::string& var = s.vars[rng() % s.vars.size()];
      try {
        bool inside = true;
        for (const Expr& d : s.domain) inside = inside && eval(d, env) > 0.0;
        if (!inside) continue;
        const double exact = eval(diff(s.e, var), env);
        Env plus = env, minus = env;
        plus[var] += h;
        minus[var] -= h;
        const double fd = (eval(s.e, plus) - eval(s.e, minus)) / (2.0 * h);
        worst = std::max(worst, std::abs(exact - fd) / std::max(1.0, std::abs(exact)));
        ++probes;
      } catch (const DomainError&) {
      }
    }
    return Outcome{probes == 1000 && worst < 1e-6,
                   fmt("%.0f probes over %.0f gallery expressions, max rel. err %.2e", probes, double(pool.size()), worst)};
  });

  report(11, "identical seed and config give byte-identical JSON", [] {
    io::CommandOptions opt;
    opt.seed = 7;
    opt.points = 100;
    bool same = true;
    for (const char* name : {"heisenberg", "affine", "broken-demo"}) same = same && io::run_verify(name, opt).json == io::run_verify(name, opt).json;
    same = same && io::run_cauchy("line", opt).json == io::run_cauchy("line", opt).json;
    same = same && io::run_normal_form("model-k1", opt).json == io::run_normal_form("model-k1", opt).json;
    return Outcome{same, same ? std::string("verify, cauchy and normal-form reports match") : std::string("reports differ")};
  });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
