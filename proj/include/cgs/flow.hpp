#pragma once

#include <complex>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cgs/geometry.hpp"

namespace cgs {

struct FlowConfig {
  int steps_per_unit = 256;        // RK4 steps per unit of |time|
  double max_time = 10.0;          // refuse longer trajectories
  double divergence_bound = 1e6;   // abort when any |coordinate| exceeds it
  int fixed_steps = 0;             // when positive, used for every trajectory regardless of length

  void validate() const;
};

/// Classical fixed-step RK4 solution of dgamma/ds = V(gamma), gamma(0) = p,
/// evaluated at s = t.
Point flow_real(const VectorField& v, const Point& p, double t, const FlowConfig& cfg = {});

/// Exp_p(V): the integral curve of V through p at time 1.
Point exp_map(const Point& p, const VectorField& v, const FlowConfig& cfg = {});

/// Complexified flow for fields whose type-(1,0) part is holomorphic:
/// integrates dz/ds = sum_a w_a Z_a(z) for s in [0, 1] in complex
/// arithmetic. Throws RefusalError when a Z_a fails the holomorphy test
/// (tolerance 1e-8) at any node of the trajectory.
Point flow_complex(std::span<const VectorField> fields, const Point& p, std::span<const std::complex<double>> w,
                   const FlowConfig& cfg = {});
Point flow_complex(const VectorField& v, const Point& p, std::complex<double> w, const FlowConfig& cfg = {});

using ComplexMatrix = Eigen::MatrixXcd;

/// Scaling and squaring with a degree-18 Taylor polynomial once the 1-norm
/// is at most 1/2. A nilpotent argument is summed directly, so the result
/// is the terminating Taylor series.
ComplexMatrix matrix_exp(const ComplexMatrix& a);

/// A matrix group embedded into a chart: complex coordinate mu is stored in
/// matrix entry `coordinate_entries[mu]`; every other entry is fixed.
struct MatrixGroupSpec {
  int dim = 0;
  std::vector<Eigen::MatrixXd> basis;                  // E_1 .. E_k of the real algebra
  std::vector<std::pair<int, int>> coordinate_entries; // (row, col), zero-based
  Eigen::MatrixXcd fixed;                              // values of the non-coordinate entries

  void validate(int complex_dim) const;
  ComplexMatrix to_matrix(const Point& p) const;
  /// Throws NumericalError if a fixed entry deviates by more than `tol`.
  Point from_matrix(const ComplexMatrix& m, double tol = 1e-9) const;
  /// The left-invariant fields g -> g E_a as real fields on the chart.
  std::vector<VectorField> left_invariant_fields(const ChartPtr& chart) const;
};

/// g exp(sum_a V_a E_a), read back into chart coordinates.
Point complexified_flow_matrix(const MatrixGroupSpec& spec, const Point& g, std::span<const std::complex<double>> v);

struct NewtonConfig {
  int max_iterations = 50;
  double tolerance = 1e-11;  // on the max-norm of F(x) - q
  double fd_step = 1e-6;     // central differences for the Jacobian
};

/// Map (p_1..p_m, u_1..u_k) -> ambient point, m + k = real dimension.
using AmbientMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct EquationSolution {
  Eigen::VectorXd unknowns;  // (p, u)
  Eigen::VectorXd value;     // V = -u: the equation of M at q
  int iterations = 0;
  double residual = 0.0;
};

/// Solves F(p, u) = q by damped Newton with a finite-difference Jacobian.
/// `k` is the number of trailing u-unknowns. Throws NumericalError when the
/// Jacobian is singular or the iteration does not converge.
EquationSolution equation_map(const AmbientMap& f, int k, const Point& q, const Eigen::VectorXd& initial_guess,
                              const NewtonConfig& cfg = {});

/// Central-difference Jacobian of `f` at `x`.
Eigen::MatrixXd fd_jacobian(const AmbientMap& f, const Eigen::VectorXd& x, double h);

}  // namespace cgs
