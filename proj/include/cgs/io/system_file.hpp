#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cgs/cauchy.hpp"
#include "cgs/system.hpp"

namespace cgs::io {

/// Malformed system file; the message starts with "line N:" when a line is known.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct FileConfig {
  std::optional<std::uint64_t> seed;
  std::optional<int> points;
  std::optional<double> tol;
  std::optional<int> steps;
  std::optional<std::vector<double>> level_set;
  std::optional<std::vector<double>> nf_point;
  std::optional<double> nf_extent;
  std::optional<int> nf_grid;
  std::optional<std::complex<double>> nf_w;
  std::optional<double> nf_tol;
  std::optional<double> nf_oracle_tol;
  std::optional<double> newton_tol;
  std::optional<double> fd_step;
  std::optional<int> grid;
  std::optional<double> oracle_tol;
};

struct SystemFile {
  std::string name;
  std::string text;                   // source, used for the input digest
  ChartPtr chart;
  std::optional<GradientSystem> system;
  std::optional<CRInitialData> cr;
  std::optional<QueryGrid> queries;
  CauchyOracle oracle;
  std::vector<Expr> oracle_f;         // normal-form oracle over slice coordinate names
  FileConfig config;
};

/// Parses and cross-validates a system file. Throws FormatError,
/// ParseError or DimensionError.
SystemFile parse_system(std::string_view text, std::string name = {});
/// Reads a file from disk.
SystemFile load(const std::string& path);
/// An existing path, otherwise a gallery name ("line" or "line.cgs").
SystemFile load_named(const std::string& name_or_path);

/// Canonical text form; parse_system(serialize(f)) describes the same system.
std::string serialize(const SystemFile& f);

/// FNV-1a 64-bit hash of the text as 16 hex digits.
std::string digest(std::string_view text);

/// Splits at commas outside parentheses.
std::vector<std::string> split_top_level(std::string_view text, char sep = ',');

}  // namespace cgs::io
