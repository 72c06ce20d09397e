#pragma once

// Finite signal space C^L with circular indexing: DFT, time-frequency shifts,
// the full-grid STFT, window generators and error measures.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "quiltframe/errors.hpp"

namespace quiltframe {

using Index = Eigen::Index;

template <typename Real>
using Signal = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using ComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <typename Derived>
using RealOf = typename Eigen::NumTraits<typename Derived::Scalar>::Real;

/// Shorter signals make lattices and partitions degenerate.
inline constexpr Index kMinLength = 4;

inline void check_length(Index L) {
  if (L < kMinLength) {
    throw DimensionError("signal length " + std::to_string(L) + " is below the minimum of " +
                         std::to_string(kMinLength));
  }
}

inline Index wrap(Index v, Index L) {
  const Index r = v % L;
  return r < 0 ? r + L : r;
}

/// Circular distance |v| on Z_L.
inline Index wrapped_distance(Index v, Index L) {
  const Index r = wrap(v, L);
  return std::min(r, L - r);
}

/// A point (x, omega) of the time-frequency grid Z_L x Z_L.
struct TFPoint {
  Index x = 0;
  Index omega = 0;

  auto operator<=>(const TFPoint&) const = default;
};

inline TFPoint reduce(TFPoint p, Index L) { return {wrap(p.x, L), wrap(p.omega, L)}; }

/// exp(2 pi i k / L) for k = 0..L-1; phases are taken from this table with the
/// exponent reduced mod L so large products stay exact.
template <typename Real>
std::vector<std::complex<Real>> unit_roots(Index L) {
  std::vector<std::complex<Real>> roots(static_cast<std::size_t>(L));
  for (Index k = 0; k < L; ++k) {
    const long double angle = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k) /
                              static_cast<long double>(L);
    roots[static_cast<std::size_t>(k)] = {static_cast<Real>(std::cos(angle)),
                                          static_cast<Real>(std::sin(angle))};
  }
  return roots;
}

/// Unnormalized forward DFT: F(w) = sum_t f(t) exp(-2 pi i w t / L).
template <typename Derived>
Signal<RealOf<Derived>> dft(const Eigen::MatrixBase<Derived>& f) {
  using Real = RealOf<Derived>;
  check_length(f.size());
  const Signal<Real> in = f.template cast<std::complex<Real>>();
  Signal<Real> out(in.size());
  Eigen::FFT<Real> fft;
  fft.fwd(out, in);
  return out;
}

/// Inverse DFT carrying the 1/L factor.
template <typename Derived>
Signal<RealOf<Derived>> idft(const Eigen::MatrixBase<Derived>& spectrum) {
  using Real = RealOf<Derived>;
  check_length(spectrum.size());
  const Signal<Real> in = spectrum.template cast<std::complex<Real>>();
  Signal<Real> out(in.size());
  Eigen::FFT<Real> fft;
  fft.inv(out, in);
  return out;
}

/// Circular translation (T_x f)(t) = f(t - x).
template <typename Derived>
Signal<RealOf<Derived>> translate(const Eigen::MatrixBase<Derived>& f, Index x) {
  using Real = RealOf<Derived>;
  const Index L = f.size();
  Signal<Real> out(L);
  for (Index t = 0; t < L; ++t) out(t) = static_cast<std::complex<Real>>(f(wrap(t - x, L)));
  return out;
}

/// pi(lambda) f = M_omega T_x f, i.e. exp(2 pi i omega t / L) f(t - x).
template <typename Derived>
Signal<RealOf<Derived>> tf_shift(const Eigen::MatrixBase<Derived>& f, TFPoint lambda) {
  using Real = RealOf<Derived>;
  const Index L = f.size();
  check_length(L);
  const TFPoint p = reduce(lambda, L);
  Signal<Real> out = translate(f, p.x);
  if (p.omega != 0) {
    const auto roots = unit_roots<Real>(L);
    for (Index t = 0; t < L; ++t) out(t) *= roots[static_cast<std::size_t>((p.omega * t) % L)];
  }
  return out;
}

/// Full-grid STFT V_g f(x, omega) = <f, M_omega T_x g>; rows are time shifts,
/// columns frequency shifts. One FFT per time shift.
template <typename DerivedF, typename DerivedG>
ComplexMatrix<RealOf<DerivedF>> stft(const Eigen::MatrixBase<DerivedF>& f,
                                     const Eigen::MatrixBase<DerivedG>& g) {
  using Real = RealOf<DerivedF>;
  const Index L = f.size();
  if (g.size() != L) {
    throw DimensionError("stft: signal length " + std::to_string(L) + " but window length " +
                         std::to_string(g.size()));
  }
  check_length(L);
  const Signal<Real> fc = f.template cast<std::complex<Real>>();
  const Signal<Real> gc = g.template cast<std::complex<Real>>();
  ComplexMatrix<Real> V(L, L);
  Eigen::FFT<Real> fft;
  Signal<Real> product(L);
  Signal<Real> spectrum(L);
  for (Index x = 0; x < L; ++x) {
    for (Index t = 0; t < L; ++t) product(t) = fc(t) * std::conj(gc(wrap(t - x, L)));
    fft.fwd(spectrum, product);
    V.row(x) = spectrum.transpose();
  }
  return V;
}

/// Periodized Gaussian sum_k exp(-pi (t - L/2 + kL)^2 / (tfr L)), centred at
/// L/2 and normalized to unit l2 norm. tfr = 1 is the L-periodic analogue of
/// exp(-pi x^2); smaller tfr narrows the window in time.
template <typename Real = double>
Signal<Real> periodized_gaussian(Index L, Real tfr = Real(1)) {
  check_length(L);
  if (!(tfr > Real(0))) throw DomainError("periodized_gaussian: tfr must be positive");
  const Index terms = 4 + static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(tfr))));
  const Real pi = std::numbers::pi_v<Real>;
  const Real half = static_cast<Real>(L) / Real(2);
  const Real scale = tfr * static_cast<Real>(L);
  Signal<Real> g(L);
  for (Index t = 0; t < L; ++t) {
    Real sum = 0;
    for (Index k = -terms; k <= terms; ++k) {
      const Real u = static_cast<Real>(t) - half + static_cast<Real>(k * L);
      sum += std::exp(-pi * u * u / scale);
    }
    g(t) = sum;
  }
  g /= g.norm();
  return g;
}

/// Gaussian exp(-pi d^2 / (tfr L)) in the wrapped distance d from t = 0, cut
/// to exact zero for d > half_width. Unit norm.
template <typename Real = double>
Signal<Real> truncated_gaussian(Index L, Index half_width, Real tfr = Real(1)) {
  check_length(L);
  if (half_width < 0 || 2 * half_width + 1 > L) {
    throw ConfigError("truncated_gaussian: support 2*half_width+1 must fit in L");
  }
  const Real pi = std::numbers::pi_v<Real>;
  Signal<Real> g = Signal<Real>::Zero(L);
  for (Index d = -half_width; d <= half_width; ++d) {
    const Real u = static_cast<Real>(d);
    g(wrap(d, L)) = std::exp(-pi * u * u / (tfr * static_cast<Real>(L)));
  }
  g /= g.norm();
  return g;
}

/// Raised cosine cos^2(pi d / (2 (half_width + 1))) around t = 0, strictly
/// positive on [-half_width, half_width] and zero elsewhere. Unit norm.
template <typename Real = double>
Signal<Real> raised_cosine(Index L, Index half_width) {
  check_length(L);
  if (half_width < 0 || 2 * half_width + 1 > L) {
    throw ConfigError("raised_cosine: support 2*half_width+1 must fit in L");
  }
  const Real pi = std::numbers::pi_v<Real>;
  Signal<Real> g = Signal<Real>::Zero(L);
  for (Index d = -half_width; d <= half_width; ++d) {
    const Real c = std::cos(pi * static_cast<Real>(d) / (Real(2) * static_cast<Real>(half_width + 1)));
    g(wrap(d, L)) = c * c;
  }
  g /= g.norm();
  return g;
}

/// Arc [start, start + length) of Z_L (mod L).
struct CircularInterval {
  Index start = 0;
  Index length = 0;

  bool contains(Index t, Index L) const { return wrap(t - start, L) < length; }
  bool full(Index L) const { return length >= L; }
};

/// Smallest arc holding every nonzero sample. Length L when no zero gap exists,
/// length 0 for the zero signal.
template <typename Derived>
CircularInterval support_interval(const Eigen::MatrixBase<Derived>& f) {
  const Index L = f.size();
  Index first_nonzero = -1;
  for (Index t = 0; t < L; ++t) {
    if (f(t) != typename Derived::Scalar(0)) {
      first_nonzero = t;
      break;
    }
  }
  if (first_nonzero < 0) return {0, 0};
  // Longest run of zeros, walking once around the circle from a nonzero sample.
  Index best_gap = 0;
  Index best_gap_end = first_nonzero;
  Index run = 0;
  for (Index k = 1; k <= L; ++k) {
    const Index t = wrap(first_nonzero + k, L);
    if (f(t) == typename Derived::Scalar(0)) {
      ++run;
    } else {
      if (run > best_gap) {
        best_gap = run;
        best_gap_end = t;
      }
      run = 0;
    }
  }
  if (best_gap == 0) return {0, L};
  return {best_gap_end, L - best_gap};
}

/// ||rec - r|| / ||r||.
template <typename DerivedA, typename DerivedB>
RealOf<DerivedA> relative_error(const Eigen::MatrixBase<DerivedA>& rec,
                                const Eigen::MatrixBase<DerivedB>& r) {
  if (rec.size() != r.size()) throw DimensionError("relative_error: length mismatch");
  const auto ref = r.norm();
  if (ref == 0) throw DomainError("relative_error: reference signal is zero");
  return (rec - r).norm() / ref;
}

/// Complex standard normal samples (E|z|^2 = 1).
template <typename Real = double>
Signal<Real> random_signal(Index L, std::mt19937_64& rng) {
  std::normal_distribution<Real> normal(Real(0), Real(1) / std::sqrt(Real(2)));
  Signal<Real> f(L);
  for (Index t = 0; t < L; ++t) {
    const Real re = normal(rng);
    const Real im = normal(rng);
    f(t) = {re, im};
  }
  return f;
}

template <typename Real = double>
Signal<Real> random_signal(Index L, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_signal<Real>(L, rng);
}

}  // namespace quiltframe
