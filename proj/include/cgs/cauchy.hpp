#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cgs/flow.hpp"
#include "cgs/report.hpp"
#include "cgs/tape.hpp"

namespace cgs {

/// A parametrized CR submanifold sigma: R^m -> chart (m = 2n + k) with
/// initial fields rho_0(e_a) along it. The complexified flow comes either
/// from a matrix group (g exp(V)) or from ambient fields extending rho_0
/// whose type-(1,0) parts are holomorphic.
struct CRInitialData {
  ChartPtr chart;
  int k = 0;
  std::vector<std::string> params;
  std::vector<Expr> sigma;                  // 2N expressions in the parameters
  std::vector<std::vector<Expr>> rho;       // k lists of 2N expressions in the parameters
  std::vector<VectorField> extension;       // optional ambient fields, one per e_a
  std::optional<MatrixGroupSpec> group;
  std::vector<double> param_anchor;         // Newton start and first sample
  std::vector<Expr> domain;                 // ambient constraints (> 0) on sigma(p)

  int m() const noexcept { return static_cast<int>(params.size()); }
  void validate() const;
};

struct QueryAxis {
  std::string coordinate;
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;
};

/// Tensor grid around `base`: each axis varies one chart coordinate.
struct QueryGrid {
  std::vector<double> base;
  std::vector<QueryAxis> axes;

  /// `count_override` > 0 replaces every axis count.
  std::vector<Point> points(const ComplexChart& chart, int count_override = 0) const;
};

struct CauchyConfig {
  double fd_step = 1e-6;        // dF by central differences
  NewtonConfig newton{};
  FlowConfig flow{};
  double det_floor = 1e-10;     // |det P| below this is outside the working domain
  double axiom_step = 1e-4;     // finite differences of U along xi and J xi
  double tol_axioms = 1e-5;
  double tol_extension = 1e-8;
  double tol_initial_frame = 1e-6;
  double tol_stability = 1e-6;
  double tol_oracle = 1e-5;
  double tol_frobenius = 1e-9;
  int samples = 20;             // points of M for the checks on M
  std::uint64_t seed = 1;
  double param_box = 0.5;       // samples in anchor + [-box, box]^m
};

/// F(p, u) = complexified flow from sigma(p) at complex time i u.
class CauchyMap {
 public:
  CauchyMap(const CRInitialData& data, const CauchyConfig& cfg);

  int m() const noexcept { return m_; }
  int k() const noexcept { return k_; }
  int real_dim() const noexcept { return 2 * n_complex_; }
  const CRInitialData& data() const noexcept { return *data_; }

  Eigen::VectorXd operator()(const Eigen::VectorXd& pu) const;
  Eigen::VectorXd sigma(const Eigen::VectorXd& p) const;
  /// 2N x m, exact (symbolic) derivative of sigma.
  Eigen::MatrixXd dsigma(const Eigen::VectorXd& p) const;
  /// 2N x k, columns rho_0(e_a)(p).
  Eigen::MatrixXd rho0(const Eigen::VectorXd& p) const;
  bool in_domain(const Eigen::VectorXd& p) const;
  AmbientMap as_function() const;

 private:
  std::shared_ptr<const CRInitialData> data_;
  FlowConfig flow_;
  int m_ = 0;
  int k_ = 0;
  int n_complex_ = 0;
  Tape sigma_tape_;
  Tape dsigma_tape_;
  Tape rho_tape_;
};

CauchyMap build_F(const CRInitialData& data, const CauchyConfig& cfg);

struct TransverseResult {
  bool transverse = true;
  std::vector<Eigen::VectorXd> samples;
  std::vector<double> deficits;              // 2N - rank[dsigma | J rho_0]
  std::optional<std::size_t> witness;        // first failing sample
};

TransverseResult check_cr_transverse(const CauchyMap& f, std::span<const Eigen::VectorXd> params);

/// Seeded samples of parameters (anchor first) whose image satisfies the
/// domain constraints.
std::vector<Eigen::VectorXd> sample_parameters(const CauchyMap& f, const CauchyConfig& cfg);

/// Adapted coordinates of the invariant lifts at (p, u): (c_a(p), 0) with
/// dsigma(p) c_a = rho_0(e_a)(p). Columns, size 2N x k.
Eigen::MatrixXd invariant_lift(const CauchyMap& f, const Eigen::VectorXd& pu);

struct AdaptedFrame {
  Eigen::VectorXd pu;
  Eigen::MatrixXd dF;       // 2N x 2N
  Eigen::MatrixXd j_adapted;
  Eigen::MatrixXd h_hat;    // 2N x k, adapted coordinates
  Eigen::MatrixXd P, Q, A;  // k x k
};

/// P_ab = du_a(J h_b), Q_ab = du_a(J d/du_b), A = P^{-1} Q. Throws
/// NumericalError when |det P| is below `det_floor` or dF is singular.
AdaptedFrame compute_PQA(const CauchyMap& f, const Eigen::VectorXd& pu, double h, double det_floor = 1e-10);

struct ConstructedFields {
  Eigen::MatrixXd xi;          // ambient, 2N x k
  Eigen::MatrixXd jxi;
  Eigen::MatrixXd xi_adapted;
  Eigen::MatrixXd jxi_adapted;
  double internal_residual = 0.0;  // max |du(xi)|, |du(J xi) - delta| in adapted coordinates
};

/// xi_a = -J d/du_a + sum_b A_ba J h_b and J xi_a = d/du_a - sum_b A_ba h_b.
ConstructedFields construct_fields(const AdaptedFrame& frame, double tol = 1e-8);

struct CauchyOracle {
  std::vector<Expr> u;              // expected U components
  std::vector<VectorField> xi;      // expected fields
};

struct CauchyPoint {
  Point query;
  Eigen::VectorXd unknowns;         // (p, u)
  Eigen::VectorXd value;            // U(query)
  Eigen::MatrixXd xi;               // 2N x k
  int newton_iterations = 0;
  double du_residual = 0.0;
  double dc_residual = 0.0;
  double stability = 0.0;
  double oracle_u = 0.0;
  double oracle_xi = 0.0;
  std::string error;                // non-empty when the point failed
};

struct CauchyResult {
  TransverseResult transverse;
  std::vector<CauchyPoint> points;
  Report report;
};

/// Runs the construction at every query. When the data is not CR-transverse
/// the queries are skipped and the failing "cr-transverse" check carries
/// the witness.
CauchyResult solve(const CRInitialData& data, std::span<const Point> queries, const CauchyConfig& cfg,
                   const CauchyOracle* oracle = nullptr);

}  // namespace cgs
