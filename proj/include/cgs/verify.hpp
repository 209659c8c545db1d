#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "cgs/flow.hpp"
#include "cgs/report.hpp"
#include "cgs/system.hpp"

namespace cgs {

/// du_a(xi_b) = 0, d^c u_a(xi_b) = delta_ab, rank of {xi, J xi} = 2k and
/// integrability of the span of {xi, J xi}.
Report check_axioms(const GradientSystem& sys, std::span<const Point> pts, double tol);
Report check_axioms(const GradientSystem& sys, const SampleConfig& sampling, double tol);

/// Integer dimension counts and splitting residuals at one point.
struct DecompositionRecord {
  int real_rank = 0;          // rank of {xi, J xi}; expected 2k
  int kernel_in_span = 0;     // dim(span{xi, J xi} ∩ ker dU); expected k
  int kernel_dim = 0;         // dim ker dU; expected 2n + k
  int horizontal_dim = 0;     // dim(ker dU ∩ ker d^c U); expected 2n
  int total_rank = 0;         // rank of {xi, J xi} plus the horizontal space; expected 2N
  int expected_real_rank = 0;
  int expected_kernel_in_span = 0;
  int expected_kernel_dim = 0;
  int expected_horizontal_dim = 0;
  int expected_total_rank = 0;
  double du_on_span = 0.0;    // max |dU(xi_b)|
  double split_j = 0.0;       // max |dU(J xi_b) + e_b|
  double split_dc = 0.0;      // max |d^c U(xi_b) - e_b|
  bool near_cutoff = false;   // a singular value sits close to the rank cutoff

  bool counts_ok() const;
};

DecompositionRecord check_decompositions(const GradientSystem& sys, const Point& p);
Report decomposition_checks(const GradientSystem& sys, std::span<const Point> pts, double tol);

/// Brackets of xi and J xi stay in span{xi}, the three dd^c identities and
/// their images under rho, integrability of span{xi}, and
/// [J xi_a, J xi_b] = [xi_a, xi_b], [J xi_a, xi_b] = -[xi_a, J xi_b].
Report check_bracket_relations(const GradientSystem& sys, std::span<const Point> pts, double tol);

/// [rho^c(e_a), rho^c(e_b)] = 0 for the type-(1,0) fields (xi - i J xi)/2.
Report check_commutation(const GradientSystem& sys, std::span<const Point> pts, double tol);

struct Classification {
  bool holomorphic = false;
  bool abelian = false;
  bool harmonic = false;
  double holomorphic_residual = 0.0;
  double abelian_residual = 0.0;
  double harmonic_residual = 0.0;
};

Classification classify(const GradientSystem& sys, std::span<const Point> pts, double tol);

struct LevelSetResult {
  Report report;
  std::vector<Point> points;   // samples found on the level set
  bool empty = false;
};

/// Points of U^{-1}(value) are located by Gauss-Newton from the seeds; at
/// each one, rank dU = k and the complex tangent T ∩ J T has real
/// dimension 2n. An empty level set passes with a note.
LevelSetResult check_level_set(const GradientSystem& sys, std::span<const double> value, std::span<const Point> seeds,
                               double tol);

// --- normal form -------------------------------------------------------------

struct NormalFormConfig {
  Point base;                                      // p; defaults to the chart origin
  double extent = 0.5;                             // grid covers [-extent, extent]^2
  int grid = 11;                                   // points per axis
  FlowConfig flow{};
  double fd_step = 1e-5;                           // holomorphy and d/dt probes
  std::complex<double> table_w{0.25, 0.25};        // w at which F is tabulated
  std::vector<std::complex<double>> probes{{0.3, 0.0}, {0.0, 0.3}, {-0.2, 0.25}, {0.15, -0.3}};
  double tol = 1e-7;
  double classify_tol = 1e-9;
  std::vector<Expr> oracle;                        // F_a over the slice coordinate names
  double oracle_tol = 1e-6;
};

struct NormalForm {
  std::vector<int> slice;                   // chart complex coordinates spanning the slice
  std::vector<double> grid_x, grid_y;       // grid of the first slice coordinate
  std::vector<std::vector<double>> f;       // f[i * grid + j] = F(grid_x[i] + i grid_y[j]), k values
  Report report;
};

/// phi(z, w) = G^1_{w_1} ∘ ... ∘ G^k_{w_k}(slice(z)), with
/// G^a_{t + iu} = (flow of xi_a for t) ∘ (flow of J xi_a for u).
Point normal_form_phi(const GradientSystem& sys, const Point& base, std::span<const int> slice,
                      std::span<const std::complex<double>> z, std::span<const std::complex<double>> w,
                      const FlowConfig& flow);

/// Greedy choice of n chart coordinates most orthogonal to {xi(p), J xi(p)}.
/// Throws NumericalError if the completed frame is rank deficient.
std::vector<int> select_slice(const GradientSystem& sys, const Point& p);

/// Throws RefusalError unless classify reports holomorphic and abelian on
/// `pts`; throws NumericalError when a flow escapes.
NormalForm normal_form(const GradientSystem& sys, std::span<const Point> pts, const NormalFormConfig& cfg);

}  // namespace cgs
