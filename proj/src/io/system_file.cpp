#include "cgs/io/system_file.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "cgs/io/gallery.hpp"

namespace cgs::io {

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry, std::less<>>;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

Expr expr_at(const std::string& text, std::size_t line) {
  try {
    return parse_expr(text);
  } catch (const ParseError& e) {
    throw FormatError(std::string("in '") + text + "': " + e.what(), line);
  }
}

double number_at(const std::string& text, std::size_t line) {
  const Expr e = expr_at(text, line);
  if (!variables(e).empty()) throw FormatError("expected a number, got '" + text + "'", line);
  try {
    return eval(e, {});
  } catch (const Error& err) {
    throw FormatError(err.what(), line);
  }
}

long integer_at(const std::string& text, std::size_t line) {
  const double v = number_at(text, line);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw FormatError("expected an integer, got '" + text + "'", line);
  return static_cast<long>(v);
}

std::vector<double> numbers_at(const std::string& text, std::size_t line) {
  std::vector<double> out;
  for (const std::string& part : split_top_level(text)) out.push_back(number_at(part, line));
  return out;
}

std::vector<Expr> exprs_at(const std::string& text, std::size_t line) {
  std::vector<Expr> out;
  for (const std::string& part : split_top_level(text)) out.push_back(expr_at(part, line));
  return out;
}

Eigen::MatrixXd matrix_at(const std::string& text, std::size_t line, int dim) {
  const auto rows = split_top_level(text, ';');
  if (static_cast<int>(rows.size()) != dim) throw FormatError("matrix needs " + std::to_string(dim) + " rows", line);
  Eigen::MatrixXd m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const auto vals = numbers_at(rows[static_cast<std::size_t>(r)], line);
    if (static_cast<int>(vals.size()) != dim) {
      throw FormatError("matrix row needs " + std::to_string(dim) + " entries", line);
    }
    for (int c = 0; c < dim; ++c) m(r, c) = vals[static_cast<std::size_t>(c)];
  }
  return m;
}

Entry* find(Section& s, std::string_view key) {
  auto it = s.find(key);
  if (it == s.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

Entry& require(Section& s, std::string_view key, std::string_view section) {
  Entry* e = find(s, key);
  if (!e) throw FormatError("missing key '" + std::string(key) + "' in [" + std::string(section) + "]", 0);
  return *e;
}

void reject_unused(const Section& s, std::string_view section) {
  for (const auto& [key, e] : s) {
    if (!e.used) throw FormatError("unknown key '" + key + "' in [" + std::string(section) + "]", e.line);
  }
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

std::string join_exprs(const std::vector<Expr>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + to_string(v[i]);
  return out;
}

std::string join_names(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

std::string matrix_text(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += "; ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += (c ? ", " : "") + fmt(m(r, c));
  }
  return out;
}

VectorField field_at(const ChartPtr& chart, const Entry& e) {
  std::vector<Expr> comps = exprs_at(e.value, e.line);
  try {
    return VectorField(chart, std::move(comps));
  } catch (const DimensionError& err) {
    throw FormatError(err.what(), e.line);
  }
}

}  // namespace

std::vector<std::string> split_top_level(std::string_view text, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(text.substr(start, i - start)));
      start = i + 1;
    }
  }
  const std::string last = trim(text.substr(start));
  if (!last.empty() || !out.empty()) out.push_back(last);
  return out;
}

SystemFile parse_system(std::string_view text, std::string name) {
  std::map<std::string, Section, std::less<>> sections;
  std::string current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw FormatError("malformed section header", line_no);
      current = trim(std::string_view(line).substr(1, line.size() - 2));
      static const char* known[] = {"chart", "system", "cr_data", "oracle", "config"};
      if (std::find(std::begin(known), std::end(known), current) == std::end(known)) {
        throw FormatError("unknown section [" + current + "]", line_no);
      }
      if (sections.count(current)) throw FormatError("duplicate section [" + current + "]", line_no);
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("expected 'key = value'", line_no);
    if (current.empty()) throw FormatError("key outside any section", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw FormatError("empty key", line_no);
    Section& sec = sections[current];
    if (sec.count(key)) throw FormatError("duplicate key '" + key + "'", line_no);
    sec[key] = Entry{value, line_no, false};
    if (end == text.size()) break;
  }

  SystemFile f;
  f.name = std::move(name);
  f.text = std::string(text);

  // [chart]
  auto chart_it = sections.find("chart");
  if (chart_it == sections.end()) throw FormatError("missing [chart] section", 0);
  {
    Section& s = chart_it->second;
    const Entry& ne = require(s, "N", "chart");
    const long n = integer_at(ne.value, ne.line);
    if (n < 1) throw FormatError("N must be positive", ne.line);
    if (Entry* names = find(s, "names")) {
      auto list = split_top_level(names->value);
      if (static_cast<long>(list.size()) != 2 * n) {
        throw FormatError("names needs " + std::to_string(2 * n) + " coordinate names", names->line);
      }
      try {
        f.chart = std::make_shared<const ComplexChart>(std::move(list));
      } catch (const DimensionError& e) {
        throw FormatError(e.what(), names->line);
      }
    } else {
      f.chart = std::make_shared<const ComplexChart>(static_cast<int>(n));
    }
    reject_unused(s, "chart");
  }

  // [system]
  if (auto it = sections.find("system"); it != sections.end()) {
    Section& s = it->second;
    const Entry& ke = require(s, "k", "system");
    const long k = integer_at(ke.value, ke.line);
    if (k < 1 || k > f.chart->complex_dim()) throw FormatError("k must lie in 1..N", ke.line);
    GradientSystem sys;
    sys.chart = f.chart;
    for (long a = 1; a <= k; ++a) {
      const std::string idx = std::to_string(a);
      sys.xi.push_back(field_at(f.chart, require(s, "xi" + idx, "system")));
      const Entry& ue = require(s, "u" + idx, "system");
      sys.u.push_back(expr_at(ue.value, ue.line));
      for (const std::string& v : variables(sys.u.back())) {
        if (!f.chart->index_of(v)) throw FormatError("unknown coordinate '" + v + "'", ue.line);
      }
    }
    if (Entry* d = find(s, "domain")) sys.domain = exprs_at(d->value, d->line);
    reject_unused(s, "system");
    try {
      sys.validate();
    } catch (const DimensionError& e) {
      throw FormatError(e.what(), ke.line);
    }
    f.system = std::move(sys);
  }

  // [cr_data]
  if (auto it = sections.find("cr_data"); it != sections.end()) {
    Section& s = it->second;
    const Entry& ke = require(s, "k", "cr_data");
    CRInitialData cr;
    cr.chart = f.chart;
    cr.k = static_cast<int>(integer_at(ke.value, ke.line));
    if (cr.k < 1 || cr.k > f.chart->complex_dim()) throw FormatError("k must lie in 1..N", ke.line);
    const Entry& pe = require(s, "params", "cr_data");
    cr.params = split_top_level(pe.value);
    const Entry& se = require(s, "sigma", "cr_data");
    cr.sigma = exprs_at(se.value, se.line);
    for (int a = 1; a <= cr.k; ++a) {
      const Entry& re = require(s, "rho" + std::to_string(a), "cr_data");
      cr.rho.push_back(exprs_at(re.value, re.line));
    }
    for (int a = 1; a <= cr.k; ++a) {
      if (Entry* ee = find(s, "extension" + std::to_string(a))) cr.extension.push_back(field_at(f.chart, *ee));
    }
    if (!cr.extension.empty() && static_cast<int>(cr.extension.size()) != cr.k) {
      throw FormatError("give extension1..extension" + std::to_string(cr.k) + " or none", ke.line);
    }
    if (Entry* ge = find(s, "group_dim")) {
      MatrixGroupSpec g;
      g.dim = static_cast<int>(integer_at(ge->value, ge->line));
      if (g.dim < 1 || g.dim > 16) throw FormatError("group_dim must lie in 1..16", ge->line);
      for (int a = 1; a <= cr.k; ++a) {
        const Entry& be = require(s, "group_basis" + std::to_string(a), "cr_data");
        g.basis.push_back(matrix_at(be.value, be.line, g.dim));
      }
      const Entry& ee = require(s, "group_entries", "cr_data");
      for (const std::string& pair : split_top_level(ee.value, ';')) {
        std::istringstream is(pair);
        long r = 0, c = 0;
        std::string rest;
        if (!(is >> r >> c) || (is >> rest)) throw FormatError("group_entries needs 'row col' pairs", ee.line);
        g.coordinate_entries.emplace_back(static_cast<int>(r - 1), static_cast<int>(c - 1));
      }
      if (Entry* fe = find(s, "group_fixed")) {
        g.fixed = matrix_at(fe->value, fe->line, g.dim).cast<std::complex<double>>();
      } else {
        g.fixed = Eigen::MatrixXcd::Identity(g.dim, g.dim);
      }
      try {
        g.validate(f.chart->complex_dim());
      } catch (const DimensionError& e) {
        throw FormatError(e.what(), ge->line);
      }
      cr.group = std::move(g);
    }
    if (Entry* ae = find(s, "param_anchor")) cr.param_anchor = numbers_at(ae->value, ae->line);
    if (Entry* de = find(s, "domain")) cr.domain = exprs_at(de->value, de->line);
    try {
      cr.validate();
    } catch (const DimensionError& e) {
      throw FormatError(e.what(), ke.line);
    }
    if (Entry* qb = find(s, "query_base")) {
      QueryGrid q;
      q.base = numbers_at(qb->value, qb->line);
      for (int a = 1;; ++a) {
        Entry* qa = find(s, "query_axis" + std::to_string(a));
        if (!qa) break;
        const auto parts = split_top_level(qa->value);
        if (parts.size() != 4) throw FormatError("query axis needs 'coordinate, lo, hi, count'", qa->line);
        QueryAxis axis{parts[0], number_at(parts[1], qa->line), number_at(parts[2], qa->line),
                       static_cast<int>(integer_at(parts[3], qa->line))};
        if (!f.chart->index_of(axis.coordinate)) {
          throw FormatError("query axis uses unknown coordinate '" + axis.coordinate + "'", qa->line);
        }
        if (axis.count < 1) throw FormatError("query axis needs a positive count", qa->line);
        q.axes.push_back(std::move(axis));
      }
      if (q.base.size() != static_cast<std::size_t>(f.chart->real_dim())) {
        throw FormatError("query_base needs one value per real coordinate", qb->line);
      }
      f.queries = std::move(q);
    }
    reject_unused(s, "cr_data");
    f.cr = std::move(cr);
  }

  // [oracle]
  if (auto it = sections.find("oracle"); it != sections.end()) {
    Section& s = it->second;
    auto check_chart_vars = [&](const Expr& e, std::size_t line) {
      for (const std::string& v : variables(e)) {
        if (!f.chart->index_of(v)) throw FormatError("oracle uses unknown coordinate '" + v + "'", line);
      }
    };
    for (int a = 1;; ++a) {
      Entry* ue = find(s, "u" + std::to_string(a));
      if (!ue) break;
      f.oracle.u.push_back(expr_at(ue->value, ue->line));
      check_chart_vars(f.oracle.u.back(), ue->line);
    }
    for (int a = 1;; ++a) {
      Entry* xe = find(s, "xi" + std::to_string(a));
      if (!xe) break;
      f.oracle.xi.push_back(field_at(f.chart, *xe));
    }
    for (int a = 1;; ++a) {
      Entry* fe = find(s, "F" + std::to_string(a));
      if (!fe) break;
      f.oracle_f.push_back(expr_at(fe->value, fe->line));
      check_chart_vars(f.oracle_f.back(), fe->line);
    }
    reject_unused(s, "oracle");
  }

  // [config]
  if (auto it = sections.find("config"); it != sections.end()) {
    Section& s = it->second;
    FileConfig& c = f.config;
    auto positive_int = [](const Entry& e) {
      const long v = integer_at(e.value, e.line);
      if (v < 1) throw FormatError("expected a positive integer", e.line);
      return static_cast<int>(v);
    };
    auto positive = [](const Entry& e) {
      const double v = number_at(e.value, e.line);
      if (!(v > 0.0)) throw FormatError("expected a positive number", e.line);
      return v;
    };
    if (Entry* e = find(s, "seed")) {
      const long v = integer_at(e->value, e->line);
      if (v < 0) throw FormatError("seed must be non-negative", e->line);
      c.seed = static_cast<std::uint64_t>(v);
    }
    if (Entry* e = find(s, "points")) c.points = positive_int(*e);
    if (Entry* e = find(s, "tol")) c.tol = positive(*e);
    if (Entry* e = find(s, "steps")) c.steps = positive_int(*e);
    if (Entry* e = find(s, "level_set")) c.level_set = numbers_at(e->value, e->line);
    if (Entry* e = find(s, "nf_point")) c.nf_point = numbers_at(e->value, e->line);
    if (Entry* e = find(s, "nf_extent")) c.nf_extent = positive(*e);
    if (Entry* e = find(s, "nf_grid")) c.nf_grid = positive_int(*e);
    if (Entry* e = find(s, "nf_w")) {
      const auto v = numbers_at(e->value, e->line);
      if (v.size() != 2) throw FormatError("nf_w needs a real and an imaginary part", e->line);
      c.nf_w = std::complex<double>(v[0], v[1]);
    }
    if (Entry* e = find(s, "nf_tol")) c.nf_tol = positive(*e);
    if (Entry* e = find(s, "nf_oracle_tol")) c.nf_oracle_tol = positive(*e);
    if (Entry* e = find(s, "newton_tol")) c.newton_tol = positive(*e);
    if (Entry* e = find(s, "fd_step")) c.fd_step = positive(*e);
    if (Entry* e = find(s, "grid")) c.grid = positive_int(*e);
    if (Entry* e = find(s, "oracle_tol")) c.oracle_tol = positive(*e);
    if (c.nf_point && c.nf_point->size() != static_cast<std::size_t>(f.chart->real_dim())) {
      throw FormatError("nf_point needs one value per real coordinate", s.at("nf_point").line);
    }
    if (f.system && c.level_set && c.level_set->size() != f.system->u.size()) {
      throw FormatError("level_set needs k values", s.at("level_set").line);
    }
    reject_unused(s, "config");
  }
  if (!f.system && !f.cr) throw FormatError("file needs a [system] or a [cr_data] section", 0);
  return f;
}

SystemFile load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  if (const auto dot = name.rfind('.'); dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return parse_system(ss.str(), name);
}

SystemFile load_named(const std::string& name_or_path) {
  if (std::ifstream(name_or_path).good()) return load(name_or_path);
  std::string stem = name_or_path;
  if (stem.size() > 4 && stem.compare(stem.size() - 4, 4, ".cgs") == 0) stem.resize(stem.size() - 4);
  for (const GalleryEntry& g : gallery_files()) {
    if (g.name == stem) return parse_system(g.text, std::string(g.name));
  }
  return load(name_or_path);
}

std::string serialize(const SystemFile& f) {
  std::ostringstream os;
  os << "[chart]\nN = " << f.chart->complex_dim() << "\nnames = " << join_names(f.chart->names()) << "\n";
  if (f.system) {
    const GradientSystem& s = *f.system;
    os << "\n[system]\nk = " << s.k() << "\n";
    for (int a = 0; a < s.k(); ++a) {
      os << "xi" << a + 1 << " = " << join_exprs(s.xi[static_cast<std::size_t>(a)].components()) << "\n";
    }
    for (int a = 0; a < s.k(); ++a) os << "u" << a + 1 << " = " << to_string(s.u[static_cast<std::size_t>(a)]) << "\n";
    if (!s.domain.empty()) os << "domain = " << join_exprs(s.domain) << "\n";
  }
  if (f.cr) {
    const CRInitialData& c = *f.cr;
    os << "\n[cr_data]\nk = " << c.k << "\nparams = " << join_names(c.params) << "\nsigma = " << join_exprs(c.sigma)
       << "\n";
    for (int a = 0; a < c.k; ++a) os << "rho" << a + 1 << " = " << join_exprs(c.rho[static_cast<std::size_t>(a)]) << "\n";
    for (std::size_t a = 0; a < c.extension.size(); ++a) {
      os << "extension" << a + 1 << " = " << join_exprs(c.extension[a].components()) << "\n";
    }
    if (c.group) {
      const MatrixGroupSpec& g = *c.group;
      os << "group_dim = " << g.dim << "\n";
      for (std::size_t a = 0; a < g.basis.size(); ++a) os << "group_basis" << a + 1 << " = " << matrix_text(g.basis[a]) << "\n";
      os << "group_entries = ";
      for (std::size_t i = 0; i < g.coordinate_entries.size(); ++i) {
        os << (i ? "; " : "") << g.coordinate_entries[i].first + 1 << " " << g.coordinate_entries[i].second + 1;
      }
      os << "\ngroup_fixed = " << matrix_text(g.fixed.real()) << "\n";
    }
    if (!c.param_anchor.empty()) os << "param_anchor = " << join_numbers(c.param_anchor) << "\n";
    if (!c.domain.empty()) os << "domain = " << join_exprs(c.domain) << "\n";
    if (f.queries) {
      os << "query_base = " << join_numbers(f.queries->base) << "\n";
      for (std::size_t a = 0; a < f.queries->axes.size(); ++a) {
        const QueryAxis& q = f.queries->axes[a];
        os << "query_axis" << a + 1 << " = " << q.coordinate << ", " << fmt(q.lo) << ", " << fmt(q.hi) << ", " << q.count
           << "\n";
      }
    }
  }
  if (!f.oracle.u.empty() || !f.oracle.xi.empty() || !f.oracle_f.empty()) {
    os << "\n[oracle]\n";
    for (std::size_t a = 0; a < f.oracle.u.size(); ++a) os << "u" << a + 1 << " = " << to_string(f.oracle.u[a]) << "\n";
    for (std::size_t a = 0; a < f.oracle.xi.size(); ++a) {
      os << "xi" << a + 1 << " = " << join_exprs(f.oracle.xi[a].components()) << "\n";
    }
    for (std::size_t a = 0; a < f.oracle_f.size(); ++a) os << "F" << a + 1 << " = " << to_string(f.oracle_f[a]) << "\n";
  }
  const FileConfig& c = f.config;
  std::ostringstream cs;
  if (c.seed) cs << "seed = " << *c.seed << "\n";
  if (c.points) cs << "points = " << *c.points << "\n";
  if (c.tol) cs << "tol = " << fmt(*c.tol) << "\n";
  if (c.steps) cs << "steps = " << *c.steps << "\n";
  if (c.level_set) cs << "level_set = " << join_numbers(*c.level_set) << "\n";
  if (c.nf_point) cs << "nf_point = " << join_numbers(*c.nf_point) << "\n";
  if (c.nf_extent) cs << "nf_extent = " << fmt(*c.nf_extent) << "\n";
  if (c.nf_grid) cs << "nf_grid = " << *c.nf_grid << "\n";
  if (c.nf_w) cs << "nf_w = " << fmt(c.nf_w->real()) << ", " << fmt(c.nf_w->imag()) << "\n";
  if (c.nf_tol) cs << "nf_tol = " << fmt(*c.nf_tol) << "\n";
  if (c.nf_oracle_tol) cs << "nf_oracle_tol = " << fmt(*c.nf_oracle_tol) << "\n";
  if (c.newton_tol) cs << "newton_tol = " << fmt(*c.newton_tol) << "\n";
  if (c.fd_step) cs << "fd_step = " << fmt(*c.fd_step) << "\n";
  if (c.grid) cs << "grid = " << *c.grid << "\n";
  if (c.oracle_tol) cs << "oracle_tol = " << fmt(*c.oracle_tol) << "\n";
  if (!cs.str().empty()) os << "\n[config]\n" << cs.str();
  return os.str();
}

std::string digest(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cgs::io
