#include "cgs/io/commands.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "cgs/cauchy.hpp"
#include "cgs/io/gallery.hpp"
#include "cgs/io/system_file.hpp"
#include "cgs/verify.hpp"
#include "cgs/version.hpp"
#include "json.hpp"

namespace cgs::io {

namespace {

using Json = nlohmann::ordered_json;

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vec(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
  return out;
}

Json vec(std::span<const double> v) {
  Json out = Json::array();
  for (double x : v) out.push_back(num(x));
  return out;
}

Json columns(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(vec(Eigen::VectorXd(m.col(c))));
  return out;
}

Json check_json(const Check& c) {
  Json j;
  j["name"] = c.name;
  j["paper_anchor"] = c.anchor;
  j["max_residual"] = num(c.max_residual);
  j["tolerance"] = c.tolerance;
  j["pass"] = c.pass;
  j["points"] = c.residuals.size();
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

std::string line_for(const Check& c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s  %-34s max %.3e  tol %.1e", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.max_residual, c.tolerance);
  std::string out = buf;
  if (!c.pass && !c.note.empty()) out += "  (" + c.note + ")";
  return out + "\n";
}

struct Run {
  std::string verdict = "pass";
  std::string message;
  Report report;
  Json details = Json::object();
  std::uint64_t seed = 1;
  int points = 0;
};

CommandResult finish(const std::string& command, const SystemFile& f, Run run) {
  Json doc;
  doc["version"] = kVersion;
  doc["input_digest"] = digest(f.text);
  doc["command"] = command;
  doc["system"] = f.name;
  doc["seed"] = run.seed;
  doc["points"] = run.points;
  Json checks = Json::array();
  for (const Check& c : run.report.checks) checks.push_back(check_json(c));
  doc["checks"] = std::move(checks);
  doc["warnings"] = run.report.warnings;
  if (run.verdict == "pass" && !run.report.passed()) run.verdict = "fail";
  doc["verdict"] = run.verdict;
  if (!run.message.empty()) doc["message"] = run.message;
  doc["details"] = std::move(run.details);

  CommandResult r;
  r.json = doc.dump(2) + "\n";
  r.exit_code = run.verdict == "pass" ? kExitPass : kExitFail;
  r.message = run.message;
  for (const Check& c : run.report.checks) r.summary += line_for(c);
  for (const std::string& w : run.report.warnings) r.summary += "warning: " + w + "\n";
  r.summary += command + " " + f.name + ": " + run.verdict + "\n";
  return r;
}

CommandResult input_error(const std::string& what) {
  CommandResult r;
  r.exit_code = kExitInput;
  r.message = what;
  return r;
}

// Loads, runs `body` and maps exceptions to verdicts and exit codes.
CommandResult guarded(const std::string& command, const std::string& name_or_path,
                      const std::function<void(const SystemFile&, Run&)>& body) {
  SystemFile f;
  try {
    f = load_named(name_or_path);
  } catch (const Error& e) {
    return input_error(e.what());
  }
  Run run;
  try {
    body(f, run);
  } catch (const RefusalError& e) {
    run.verdict = "refused";
    run.message = e.what();
  } catch (const NumericalError& e) {
    run.verdict = "fail";
    run.message = e.what();
  } catch (const DomainError& e) {
    run.verdict = "fail";
    run.message = e.what();
  } catch (const Error& e) {
    return input_error(e.what());
  }
  return finish(command, f, std::move(run));
}

}  // namespace

CommandResult run_verify(const std::string& name_or_path, const CommandOptions& opt) {
  return guarded("verify", name_or_path, [&](const SystemFile& f, Run& run) {
    if (!f.system) throw DimensionError("'" + f.name + "' has no [system] section");
    const GradientSystem& sys = *f.system;
    const FileConfig& c = f.config;
    run.seed = opt.seed.value_or(c.seed.value_or(1));
    run.points = opt.points.value_or(c.points.value_or(100));
    const double tol = opt.tol.value_or(c.tol.value_or(1e-9));
    SampleConfig sc;
    sc.seed = run.seed;
    sc.points = run.points;
    const std::vector<Point> pts = sample_points(sys, sc);

    run.report = check_axioms(sys, pts, tol);
    run.report.append(decomposition_checks(sys, pts, tol));
    run.report.append(check_bracket_relations(sys, pts, tol));
    run.report.append(check_commutation(sys, pts, tol));

    const Classification cl = classify(sys, pts, tol);
    Json cj;
    cj["holomorphic"] = cl.holomorphic;
    cj["abelian"] = cl.abelian;
    cj["harmonic"] = cl.harmonic;
    cj["holomorphic_residual"] = num(cl.holomorphic_residual);
    cj["abelian_residual"] = num(cl.abelian_residual);
    cj["harmonic_residual"] = num(cl.harmonic_residual);
    run.details["classification"] = std::move(cj);

    const DecompositionRecord d = check_decompositions(sys, pts.front());
    Json dj;
    dj["real_rank"] = {d.real_rank, d.expected_real_rank};
    dj["kernel_in_span"] = {d.kernel_in_span, d.expected_kernel_in_span};
    dj["kernel_dim"] = {d.kernel_dim, d.expected_kernel_dim};
    dj["horizontal_dim"] = {d.horizontal_dim, d.expected_horizontal_dim};
    dj["total_rank"] = {d.total_rank, d.expected_total_rank};
    run.details["dimensions_at_first_point"] = std::move(dj);
    run.details["sampled_points"] = pts.size();

    if (c.level_set) {
      const LevelSetResult ls = check_level_set(sys, *c.level_set, pts, std::max(tol, 1e-9));
      run.report.append(ls.report);
      Json lj;
      lj["value"] = *c.level_set;
      lj["points_found"] = ls.points.size();
      lj["empty"] = ls.empty;
      run.details["level_set"] = std::move(lj);
    }
  });
}

CommandResult run_cauchy(const std::string& name_or_path, const CommandOptions& opt) {
  return guarded("cauchy", name_or_path, [&](const SystemFile& f, Run& run) {
    if (!f.cr) throw DimensionError("'" + f.name + "' has no [cr_data] section");
    if (!f.queries) throw DimensionError("'" + f.name + "' declares no query grid");
    const FileConfig& c = f.config;
    CauchyConfig cfg;
    cfg.seed = opt.seed.value_or(c.seed.value_or(1));
    cfg.samples = opt.points.value_or(c.points.value_or(cfg.samples));
    cfg.fd_step = opt.h.value_or(c.fd_step.value_or(cfg.fd_step));
    cfg.newton.tolerance = opt.newton_tol.value_or(c.newton_tol.value_or(cfg.newton.tolerance));
    cfg.tol_oracle = c.oracle_tol.value_or(cfg.tol_oracle);
    if (opt.tol) {
      cfg.tol_axioms = *opt.tol;
      cfg.tol_oracle = *opt.tol;
    } else if (c.tol) {
      cfg.tol_axioms = *c.tol;
    }
    if (c.steps) cfg.flow.steps_per_unit = *c.steps;
    run.seed = cfg.seed;
    run.points = cfg.samples;
    const int grid = opt.grid.value_or(c.grid.value_or(0));
    const std::vector<Point> queries = f.queries->points(*f.chart, grid);

    const bool has_oracle = !f.oracle.u.empty() || !f.oracle.xi.empty();
    if (!f.oracle.u.empty() && static_cast<int>(f.oracle.u.size()) != f.cr->k) {
      throw DimensionError("oracle needs k components u1..uk");
    }
    if (!f.oracle.xi.empty() && static_cast<int>(f.oracle.xi.size()) != f.cr->k) {
      throw DimensionError("oracle needs k fields xi1..xik");
    }
    const CauchyResult res = solve(*f.cr, queries, cfg, has_oracle ? &f.oracle : nullptr);
    run.report = res.report;
    if (!res.transverse.transverse) {
      const Check* t = res.report.find("cr-transverse");
      run.message = "initial data is not CR-transverse" + (t && !t->note.empty() ? ": " + t->note : std::string());
    }
    Json pts = Json::array();
    for (const CauchyPoint& p : res.points) {
      Json j;
      j["query"] = vec(p.query.coords());
      if (!p.error.empty()) {
        j["error"] = p.error;
        pts.push_back(std::move(j));
        continue;
      }
      j["unknowns"] = vec(p.unknowns);
      j["U"] = vec(p.value);
      j["xi"] = columns(p.xi);
      j["newton_iterations"] = p.newton_iterations;
      j["du_residual"] = num(p.du_residual);
      j["dc_residual"] = num(p.dc_residual);
      j["fd_stability"] = num(p.stability);
      if (!f.oracle.u.empty()) j["oracle_u_delta"] = num(p.oracle_u);
      if (!f.oracle.xi.empty()) j["oracle_xi_delta"] = num(p.oracle_xi);
      pts.push_back(std::move(j));
    }
    run.details["transverse"] = res.transverse.transverse;
    run.details["queries"] = std::move(pts);
  });
}

CommandResult run_normal_form(const std::string& name_or_path, const CommandOptions& opt) {
  return guarded("normal-form", name_or_path, [&](const SystemFile& f, Run& run) {
    if (!f.system) throw DimensionError("'" + f.name + "' has no [system] section");
    const GradientSystem& sys = *f.system;
    const FileConfig& c = f.config;
    run.seed = opt.seed.value_or(c.seed.value_or(1));
    run.points = opt.points.value_or(c.points.value_or(100));
    SampleConfig sc;
    sc.seed = run.seed;
    sc.points = run.points;
    const std::vector<Point> pts = sample_points(sys, sc);

    NormalFormConfig cfg;
    if (c.nf_point) cfg.base = Point(*c.nf_point);
    cfg.extent = c.nf_extent.value_or(cfg.extent);
    cfg.grid = opt.grid.value_or(c.nf_grid.value_or(cfg.grid));
    cfg.table_w = c.nf_w.value_or(cfg.table_w);
    cfg.tol = opt.tol.value_or(c.nf_tol.value_or(c.tol.value_or(cfg.tol)));
    cfg.oracle_tol = c.nf_oracle_tol.value_or(cfg.oracle_tol);
    if (opt.h) cfg.fd_step = *opt.h;
    if (c.steps) cfg.flow.steps_per_unit = *c.steps;
    cfg.oracle = f.oracle_f;
    const NormalForm nf = normal_form(sys, pts, cfg);
    run.report = nf.report;
    Json slice = Json::array();
    for (int mu : nf.slice) slice.push_back({f.chart->x_name(mu), f.chart->y_name(mu)});
    run.details["slice"] = std::move(slice);
    run.details["w"] = {cfg.table_w.real(), cfg.table_w.imag()};
    run.details["grid_x"] = vec(nf.grid_x);
    run.details["grid_y"] = vec(nf.grid_y);
    Json table = Json::array();
    for (const auto& row : nf.f) table.push_back(vec(row));
    run.details["F"] = std::move(table);
  });
}

CommandResult run_list() {
  Json doc;
  doc["version"] = kVersion;
  Json items = Json::array();
  CommandResult r;
  for (const GalleryEntry& g : gallery_files()) {
    const SystemFile f = parse_system(g.text, std::string(g.name));
    Json j;
    j["name"] = g.name;
    j["input_digest"] = digest(g.text);
    j["N"] = f.chart->complex_dim();
    Json sections = Json::array();
    if (f.system) sections.push_back("system");
    if (f.cr) sections.push_back("cr_data");
    if (!f.oracle.u.empty() || !f.oracle.xi.empty() || !f.oracle_f.empty()) sections.push_back("oracle");
    j["sections"] = std::move(sections);
    items.push_back(std::move(j));
    r.summary += std::string(g.name) + "\n";
  }
  doc["systems"] = std::move(items);
  r.json = doc.dump(2) + "\n";
  return r;
}

}  // namespace cgs::io
