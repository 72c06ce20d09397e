#pragma once

// Single Gabor frames G(g, aZ x bZ) on C^L.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "quiltframe/errors.hpp"
#include "quiltframe/signal.hpp"

namespace quiltframe {

/// Separable lattice {(n a, m b) : 0 <= n < L/a, 0 <= m < L/b}.
class Lattice {
 public:
  Lattice(Index L, Index a, Index b) : L_(L), a_(a), b_(b) {
    check_length(L);
    if (a <= 0 || b <= 0 || L % a != 0 || L % b != 0) {
      throw ConfigError("lattice steps a=" + std::to_string(a) + ", b=" + std::to_string(b) +
                        " must be positive divisors of L=" + std::to_string(L));
    }
    redundancy_ = static_cast<double>(L) / static_cast<double>(a * b);
  }

  Index length() const { return L_; }
  Index time_step() const { return a_; }
  Index freq_step() const { return b_; }
  Index time_count() const { return L_ / a_; }
  Index freq_count() const { return L_ / b_; }
  Index size() const { return time_count() * freq_count(); }
  double redundancy() const { return redundancy_; }

  bool contains(TFPoint p) const {
    const TFPoint q = reduce(p, L_);
    return q.x % a_ == 0 && q.omega % b_ == 0;
  }

  /// Position of a lattice point in the row-major (time outer) ordering.
  Index index_of(TFPoint p) const {
    const TFPoint q = reduce(p, L_);
    return (q.x / a_) * freq_count() + q.omega / b_;
  }

  TFPoint point(Index index) const {
    return {(index / freq_count()) * a_, (index % freq_count()) * b_};
  }

  bool operator==(const Lattice&) const = default;

 private:
  Index L_;
  Index a_;
  Index b_;
  double redundancy_;
};

inline std::vector<TFPoint> lattice_points(const Lattice& lattice) {
  std::vector<TFPoint> points;
  points.reserve(static_cast<std::size_t>(lattice.size()));
  for (Index n = 0; n < lattice.time_count(); ++n) {
    for (Index m = 0; m < lattice.freq_count(); ++m) {
      points.push_back({n * lattice.time_step(), m * lattice.freq_step()});
    }
  }
  return points;
}

template <typename Real>
struct GaborFrame {
  GaborFrame(Signal<Real> g, Lattice lat, int frame_id = 0)
      : window(std::move(g)), lattice(lat), id(frame_id) {
    if (window.size() != lattice.length()) {
      throw DimensionError("window length " + std::to_string(window.size()) +
                           " does not match lattice length " + std::to_string(lattice.length()));
    }
  }

  Index length() const { return lattice.length(); }

  Signal<Real> window;
  Lattice lattice;
  int id;
};

template <typename Real>
struct FrameBounds {
  Real A = 0;
  Real B = 0;
  /// sqrt(B/A): condition number of the analysis operator. Infinite when A = 0.
  Real cond = std::numeric_limits<Real>::infinity();
  /// B/A: condition number of the frame operator.
  Real ratio = std::numeric_limits<Real>::infinity();

  bool is_frame() const { return A > 0; }
  /// (B - A)/(B + A), the optimal frame-algorithm contraction factor.
  Real contraction() const { return B + A > 0 ? (B - A) / (B + A) : Real(1); }
};

/// Relative eigenvalue floor below which the lower bound counts as zero.
inline constexpr double kFrameFloor = 1e-12;

/// c(n, m) = <f, M_{mb} T_{na} g>, row-major with time outer. One FFT per time
/// shift, sampled at the lattice frequencies.
template <typename Real, typename Derived>
Signal<Real> analysis(const GaborFrame<Real>& frame, const Eigen::MatrixBase<Derived>& f) {
  const Lattice& lat = frame.lattice;
  const Index L = lat.length();
  if (f.size() != L) throw DimensionError("analysis: signal length does not match frame");
  const Signal<Real> fc = f.template cast<std::complex<Real>>();
  Signal<Real> c(lat.size());
  Eigen::FFT<Real> fft;
  Signal<Real> product(L);
  Signal<Real> spectrum(L);
  for (Index n = 0; n < lat.time_count(); ++n) {
    const Index shift = n * lat.time_step();
    for (Index t = 0; t < L; ++t) product(t) = fc(t) * std::conj(frame.window(wrap(t - shift, L)));
    fft.fwd(spectrum, product);
    for (Index m = 0; m < lat.freq_count(); ++m) {
      c(n * lat.freq_count() + m) = spectrum(m * lat.freq_step());
    }
  }
  return c;
}

/// sum_lambda c_lambda pi(lambda) g, the adjoint of analysis().
template <typename Real, typename Derived>
Signal<Real> synthesis(const GaborFrame<Real>& frame, const Eigen::MatrixBase<Derived>& c) {
  const Lattice& lat = frame.lattice;
  const Index L = lat.length();
  if (c.size() != lat.size()) {
    throw DimensionError("synthesis: expected " + std::to_string(lat.size()) +
                         " coefficients, got " + std::to_string(c.size()));
  }
  Signal<Real> f = Signal<Real>::Zero(L);
  Eigen::FFT<Real> fft;
  Signal<Real> spectrum(L);
  Signal<Real> modulated(L);
  for (Index n = 0; n < lat.time_count(); ++n) {
    spectrum.setZero();
    for (Index m = 0; m < lat.freq_count(); ++m) {
      spectrum(m * lat.freq_step()) = static_cast<std::complex<Real>>(c(n * lat.freq_count() + m));
    }
    fft.inv(modulated, spectrum);
    const Index shift = n * lat.time_step();
    for (Index t = 0; t < L; ++t) {
      f(t) += static_cast<Real>(L) * modulated(t) * frame.window(wrap(t - shift, L));
    }
  }
  return f;
}

/// L x N matrix whose columns are the atoms pi(lambda) g in lattice order.
template <typename Real>
ComplexMatrix<Real> synthesis_matrix(const GaborFrame<Real>& frame) {
  const auto points = lattice_points(frame.lattice);
  ComplexMatrix<Real> Phi(frame.length(), static_cast<Index>(points.size()));
  for (std::size_t k = 0; k < points.size(); ++k) {
    Phi.col(static_cast<Index>(k)) = tf_shift(frame.window, points[k]);
  }
  return Phi;
}

/// S = sum_lambda (pi(lambda) g)(pi(lambda) g)^*.
template <typename Real>
ComplexMatrix<Real> frame_operator_matrix(const GaborFrame<Real>& frame) {
  const ComplexMatrix<Real> Phi = synthesis_matrix(frame);
  ComplexMatrix<Real> S = Phi * Phi.adjoint();
  return Real(0.5) * (S + S.adjoint());
}

/// Optimal frame bounds as the extreme eigenvalues of a Hermitian PSD S.
template <typename Derived>
FrameBounds<RealOf<Derived>> frame_bounds(const Eigen::MatrixBase<Derived>& S) {
  using Real = RealOf<Derived>;
  if (S.rows() != S.cols()) throw DimensionError("frame_bounds: operator is not square");
  const ComplexMatrix<Real> H = S.template cast<std::complex<Real>>();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> solver(H, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("frame_bounds: eigensolver failed");
  const auto& ev = solver.eigenvalues();
  FrameBounds<Real> bounds;
  bounds.B = std::max(ev(ev.size() - 1), Real(0));
  bounds.A = std::max(ev(0), Real(0));
  if (bounds.B <= 0 || bounds.A < static_cast<Real>(kFrameFloor) * bounds.B) {
    bounds.A = 0;
    return bounds;
  }
  bounds.ratio = bounds.B / bounds.A;
  bounds.cond = std::sqrt(bounds.ratio);
  return bounds;
}

template <typename Real>
FrameBounds<Real> frame_bounds(const GaborFrame<Real>& frame) {
  return frame_bounds(frame_operator_matrix(frame));
}

namespace detail {

/// Diagonal of S when the window support fits into L/b samples (the painless
/// case); empty otherwise. In that case S = diag(M sum_n |g(t - na)|^2), M = L/b.
template <typename Real>
RealVector<Real> painless_diagonal(const GaborFrame<Real>& frame) {
  const Lattice& lat = frame.lattice;
  const Index L = lat.length();
  const CircularInterval support = support_interval(frame.window);
  if (support.length == 0 || support.length > lat.freq_count()) return {};
  RealVector<Real> d = RealVector<Real>::Zero(L);
  for (Index n = 0; n < lat.time_count(); ++n) {
    const Index shift = n * lat.time_step();
    for (Index t = 0; t < L; ++t) d(t) += std::norm(frame.window(wrap(t - shift, L)));
  }
  d *= static_cast<Real>(lat.freq_count());
  return d;
}

/// S^p g for p = -1 or -1/2, by eigendecomposition of S.
template <typename Real>
Signal<Real> apply_frame_power(const GaborFrame<Real>& frame, Real power) {
  const RealVector<Real> diagonal = painless_diagonal(frame);
  if (diagonal.size() > 0) {
    const Real floor = static_cast<Real>(kFrameFloor) * diagonal.maxCoeff();
    if (diagonal.minCoeff() <= floor) {
      throw NotAFrameError("window translates leave a gap: frame operator is singular");
    }
    Signal<Real> out(frame.length());
    for (Index t = 0; t < frame.length(); ++t) {
      out(t) = frame.window(t) * std::pow(diagonal(t), power);
    }
    return out;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> solver(frame_operator_matrix(frame));
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  const RealVector<Real>& ev = solver.eigenvalues();
  const Real B = ev(ev.size() - 1);
  if (!(B > 0) || ev(0) < static_cast<Real>(kFrameFloor) * B) {
    throw NotAFrameError("frame operator is singular (lower frame bound is zero)");
  }
  const ComplexMatrix<Real>& V = solver.eigenvectors();
  const RealVector<Real> scaled = ev.array().pow(power).matrix();
  const Signal<Real> coords = V.adjoint() * frame.window;
  return V * (scaled.template cast<std::complex<Real>>().asDiagonal() * coords);
}

}  // namespace detail

/// gamma = S^{-1} g; f = sum <f, pi(lambda) gamma> pi(lambda) g.
template <typename Real>
Signal<Real> canonical_dual_window(const GaborFrame<Real>& frame) {
  return detail::apply_frame_power(frame, Real(-1));
}

/// h = S^{-1/2} g; G(h, lattice) is a Parseval frame (A = B = 1).
template <typename Real>
Signal<Real> canonical_tight_window(const GaborFrame<Real>& frame) {
  return detail::apply_frame_power(frame, Real(-0.5));
}

template <typename Real>
GaborFrame<Real> tightened(const GaborFrame<Real>& frame) {
  return GaborFrame<Real>(canonical_tight_window(frame), frame.lattice, frame.id);
}

}  // namespace quiltframe
