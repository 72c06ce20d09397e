#pragma once

// Recovering a signal from quilted coefficients: dual-frame solve, the relaxed
// frame algorithm, a diagonal preconditioning shortcut and conjugate gradients.

#include <Eigen/Dense>

#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "quiltframe/errors.hpp"
#include "quiltframe/gabor.hpp"
#include "quiltframe/quilt.hpp"
#include "quiltframe/signal.hpp"

namespace quiltframe {

enum class TolMode { update_norm, residual_norm, truth_error };

struct FrameAlgoConfig {
  /// Defaults to 2/(A+B) of the system being inverted.
  std::optional<double> relaxation;
  double tol = 1e-8;
  int max_iter = 10000;
  TolMode tol_mode = TolMode::update_norm;

  void validate() const {
    if (relaxation && !(*relaxation > 0)) throw ConfigError("frame algorithm: relaxation must be positive");
    if (!(tol > 0 && tol < 1)) throw ConfigError("frame algorithm: tol must lie in (0, 1)");
    if (max_iter <= 0) throw ConfigError("frame algorithm: max_iter must be positive");
  }
};

template <typename Real>
struct ReconstructionReport {
  Signal<Real> signal;
  int iterations = 0;
  /// The tol_mode quantity after each iteration.
  std::vector<Real> history;
  /// Final relative error against the true signal, when one was supplied.
  std::optional<Real> epsilon;
  bool converged = false;
  Real relaxation = 0;
};

/// Solves S x = T^* c for the quilt's frame operator S.
template <typename Real, typename Derived>
Signal<Real> dual_frame_reconstruct(const QuiltedSystem<Real>& quilt, const Eigen::MatrixBase<Derived>& c) {
  const ComplexMatrix<Real> S = quilt_frame_operator(quilt);
  if (!frame_bounds(S).is_frame()) throw NotAFrameError("dual_frame_reconstruct: quilt is not a frame");
  const Signal<Real> y = quilt_synthesis(quilt, c);
  Eigen::LLT<ComplexMatrix<Real>> llt(S);
  if (llt.info() != Eigen::Success) throw NotAFrameError("dual_frame_reconstruct: frame operator is not definite");
  return llt.solve(y);
}

/// f_0 = mu y, f_{k+1} = f_k + mu (y - S f_k) with y = T^* c. Runs until the
/// configured error quantity drops below tol; exceeding max_iter is reported,
/// not thrown.
template <typename Real>
ReconstructionReport<Real> frame_algorithm(const ComplexMatrix<Real>& S, const Signal<Real>& y, Real relaxation,
                                           const FrameAlgoConfig& cfg,
                                           const std::optional<Signal<Real>>& truth = std::nullopt) {
  cfg.validate();
  if (S.rows() != y.size() || S.cols() != y.size()) throw DimensionError("frame_algorithm: operator size mismatch");
  if (cfg.tol_mode == TolMode::truth_error && !truth) {
    throw ConfigError("frame_algorithm: truth-error mode needs the true signal");
  }
  if (truth && truth->size() != y.size()) throw DimensionError("frame_algorithm: truth length mismatch");

  ReconstructionReport<Real> report;
  report.relaxation = relaxation;
  const Real y_norm = y.norm();
  if (y_norm == 0) {
    report.signal = Signal<Real>::Zero(y.size());
    report.converged = true;
    if (truth && truth->norm() > 0) report.epsilon = relative_error(report.signal, *truth);
    return report;
  }
  const Real tol = static_cast<Real>(cfg.tol);
  Signal<Real> f = relaxation * y;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Signal<Real> residual = y - S * f;
    const Signal<Real> update = relaxation * residual;
    const Real previous_norm = f.norm();
    f += update;
    Real err = 0;
    switch (cfg.tol_mode) {
      case TolMode::update_norm:
        err = previous_norm > 0 ? update.norm() / previous_norm : std::numeric_limits<Real>::infinity();
        break;
      case TolMode::residual_norm:
        err = (y - S * f).norm() / y_norm;
        break;
      case TolMode::truth_error:
        err = relative_error(f, *truth);
        break;
    }
    report.history.push_back(err);
    report.iterations = k;
    if (err < tol) {
      report.converged = true;
      break;
    }
  }
  report.signal = std::move(f);
  if (truth) report.epsilon = relative_error(report.signal, *truth);
  return report;
}

template <typename Real, typename Derived>
ReconstructionReport<Real> frame_algorithm(const QuiltedSystem<Real>& quilt, const Eigen::MatrixBase<Derived>& c,
                                           const FrameAlgoConfig& cfg,
                                           const std::optional<Signal<Real>>& truth = std::nullopt) {
  cfg.validate();
  const ComplexMatrix<Real> S = quilt_frame_operator(quilt);
  Real relaxation = 0;
  if (cfg.relaxation) {
    relaxation = static_cast<Real>(*cfg.relaxation);
  } else {
    const FrameBounds<Real> bounds = frame_bounds(S);
    if (!bounds.is_frame()) throw NotAFrameError("frame_algorithm: default relaxation needs A > 0");
    relaxation = Real(2) / (bounds.A + bounds.B);
  }
  return frame_algorithm<Real>(S, quilt_synthesis(quilt, c), relaxation, cfg, truth);
}

template <typename Real>
struct PreconditionReport {
  Signal<Real> rec_plain;
  Signal<Real> rec_corrected;
  Real eps_plain = 0;
  Real eps_corrected = 0;
};

/// rec_plain = S r and rec_corrected = S D^{-1} r with D = diag(S): the quilt
/// used directly as if it were Parseval, then with the diagonal correction.
template <typename Real, typename Derived>
PreconditionReport<Real> diag_precondition_reconstruct(const QuiltedSystem<Real>& quilt,
                                                       const Eigen::MatrixBase<Derived>& r) {
  if (r.size() != quilt.length()) throw DimensionError("diag_precondition_reconstruct: length mismatch");
  const ComplexMatrix<Real> S = quilt_frame_operator(quilt);
  const FrameBounds<Real> bounds = frame_bounds(S);
  const RealVector<Real> diagonal = S.diagonal().real();
  if (diagonal.minCoeff() <= static_cast<Real>(kFrameFloor) * bounds.B) {
    throw PreconditionError("diag_precondition_reconstruct: frame operator has a vanishing diagonal entry");
  }
  const Signal<Real> rc = r.template cast<std::complex<Real>>();
  PreconditionReport<Real> report;
  report.rec_plain = S * rc;
  report.rec_corrected = S * rc.cwiseQuotient(diagonal.template cast<std::complex<Real>>());
  report.eps_plain = relative_error(report.rec_plain, rc);
  report.eps_corrected = relative_error(report.rec_corrected, rc);
  return report;
}

template <typename Real>
struct CGResult {
  Signal<Real> x;
  int iterations = 0;
  Real relative_residual = 0;
};

/// Conjugate gradients for a Hermitian positive definite operator given by its
/// action. Stops once ||S x - y|| / ||y|| < tol.
template <typename Real, typename Operator>
CGResult<Real> conjugate_gradient_solve(Operator&& apply, const Signal<Real>& y, Real tol, int max_iter = 10000) {
  CGResult<Real> out;
  out.x = Signal<Real>::Zero(y.size());
  const Real y_norm = y.norm();
  if (y_norm == 0) return out;
  Signal<Real> r = y;
  Signal<Real> p = r;
  Real rr = r.squaredNorm();
  for (int k = 1; k <= max_iter; ++k) {
    const Signal<Real> Sp = apply(p);
    const Real curvature = std::real(p.dot(Sp));
    if (!(curvature > 0)) throw NotAFrameError("conjugate_gradient_solve: operator is not positive definite");
    const Real alpha = rr / curvature;
    out.x += alpha * p;
    r -= alpha * Sp;
    const Real rr_next = r.squaredNorm();
    out.iterations = k;
    out.relative_residual = std::sqrt(rr_next) / y_norm;
    if (out.relative_residual < tol) return out;
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  throw NonConvergenceError("conjugate_gradient_solve: no convergence in " + std::to_string(max_iter) +
                            " iterations (residual " + std::to_string(out.relative_residual) + ")");
}

/// CSV with header iteration,error.
template <typename Real>
void write_history_csv(std::ostream& out, const ReconstructionReport<Real>& report) {
  out << "iteration,error\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::scientific << std::setprecision(17);
  for (std::size_t k = 0; k < report.history.size(); ++k) out << (k + 1) << ',' << report.history[k] << '\n';
  out.flags(flags);
  out.precision(precision);
}

}  // namespace quiltframe
