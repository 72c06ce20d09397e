#pragma once

// Quilts with a certified lower frame bound:
//  * stripe systems: one Gabor frame per time stripe of a compactly supported
//    partition of unity, reconstructed by projecting onto the stripes;
//  * finite replacement: atoms of one frame inside a region are swapped for
//    atoms of another frame inside an enlarged region, certified through the
//    defect norm of the replacement map.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "quiltframe/errors.hpp"
#include "quiltframe/gabor.hpp"
#include "quiltframe/quilt.hpp"
#include "quiltframe/signal.hpp"

namespace quiltframe {

// ---------------------------------------------------------------------------
// Partition of unity on the time axis

enum class BumpShape { indicator, raised_cosine };

template <typename Real>
struct PartitionOfUnity {
  Index L = 0;
  std::vector<RealVector<Real>> psi;
  std::vector<CircularInterval> supports;
  Index height = 0;

  Index size() const { return static_cast<Index>(psi.size()); }
};

/// Raw bumps on the given arcs, normalized pointwise so they sum to one.
template <typename Real = double>
PartitionOfUnity<Real> build_bapu(Index L, const std::vector<CircularInterval>& supports, BumpShape shape) {
  check_length(L);
  if (supports.empty()) throw ConfigError("build_bapu: no supports");
  const Real pi = std::numbers::pi_v<Real>;
  PartitionOfUnity<Real> pou{L, {}, supports, 0};
  RealVector<Real> total = RealVector<Real>::Zero(L);
  Eigen::VectorXi count = Eigen::VectorXi::Zero(L);
  for (const CircularInterval& arc : supports) {
    if (arc.length <= 0 || arc.length > L) throw ConfigError("build_bapu: support length must be in [1, L]");
    RealVector<Real> bump = RealVector<Real>::Zero(L);
    for (Index k = 0; k < arc.length; ++k) {
      Real value = 1;
      if (shape == BumpShape::raised_cosine && arc.length < L) {
        const Real s = std::sin(pi * static_cast<Real>(k + 1) / static_cast<Real>(arc.length + 1));
        value = s * s;
      }
      bump(wrap(arc.start + k, L)) = value;
      count(wrap(arc.start + k, L)) += 1;
    }
    total += bump;
    pou.psi.push_back(std::move(bump));
  }
  for (Index t = 0; t < L; ++t) {
    if (count(t) == 0) throw ConfigError("build_bapu: supports leave sample " + std::to_string(t) + " uncovered");
  }
  for (auto& bump : pou.psi) bump = bump.cwiseQuotient(total);
  pou.height = count.maxCoeff();
  return pou;
}

// ---------------------------------------------------------------------------
// Stripe (reduced multi-window) systems

struct Stripe {
  int frame_id = 0;
  /// Lattice time indices n_lower..n_upper (mod L/a); n_upper may exceed the
  /// time count when the stripe wraps.
  Index n_lower = 0;
  Index n_upper = 0;
  /// The window support covers the whole axis, so every time index is kept.
  bool noncompact = false;

  Index time_count() const { return n_upper - n_lower + 1; }
};

template <typename Real>
struct StripeSystem {
  PartitionOfUnity<Real> pou;
  std::vector<GaborFrame<Real>> frames;
  std::vector<Stripe> stripes;
  std::vector<std::string> warnings;

  const GaborFrame<Real>& frame(int id) const {
    for (const auto& f : frames) {
      if (f.id == id) return f;
    }
    throw ConfigError("stripe system has no frame " + std::to_string(id));
  }

  /// Coefficients per stripe: kept time indices times all frequencies.
  Index coefficient_count(std::size_t r) const {
    return stripes[r].time_count() * frame(stripes[r].frame_id).lattice.freq_count();
  }
  Index coefficient_count() const {
    Index total = 0;
    for (std::size_t r = 0; r < stripes.size(); ++r) total += coefficient_count(r);
    return total;
  }
};

/// For each stripe r, the minimal arc of lattice time indices n such that every
/// n outside it has psi_r . T_{na} g == 0 exactly on the grid.
template <typename Real>
StripeSystem<Real> stripe_index_sets(const PartitionOfUnity<Real>& pou, std::vector<GaborFrame<Real>> frames,
                                     const FrameAssignment& assignment) {
  StripeSystem<Real> system{pou, std::move(frames), {}, {}};
  const Index L = pou.L;
  for (const auto& f : system.frames) {
    if (f.length() != L) throw DimensionError("stripe_index_sets: frame length differs from partition");
  }
  std::vector<std::optional<int>> frame_of(static_cast<std::size_t>(pou.size()));
  for (auto [r, j] : assignment.pairs) {
    if (r < 0 || r >= pou.size()) throw ConfigError("assignment references unknown stripe " + std::to_string(r));
    system.frame(j);
    if (frame_of[static_cast<std::size_t>(r)]) {
      throw ConfigError("stripe " + std::to_string(r) + " has more than one frame");
    }
    frame_of[static_cast<std::size_t>(r)] = j;
  }
  for (Index r = 0; r < pou.size(); ++r) {
    if (!frame_of[static_cast<std::size_t>(r)]) throw ConfigError("stripe " + std::to_string(r) + " has no frame");
    const GaborFrame<Real>& frame = system.frame(*frame_of[static_cast<std::size_t>(r)]);
    const Lattice& lat = frame.lattice;
    const RealVector<Real>& psi = pou.psi[static_cast<std::size_t>(r)];
    const CircularInterval window_support = support_interval(frame.window);
    Stripe stripe{frame.id, 0, lat.time_count() - 1, false};
    if (window_support.full(L)) {
      stripe.noncompact = true;
      system.warnings.push_back("stripe " + std::to_string(r) +
                                ": window support covers the whole axis, all time shifts kept");
      system.stripes.push_back(stripe);
      continue;
    }
    std::vector<bool> kept(static_cast<std::size_t>(lat.time_count()), false);
    for (Index n = 0; n < lat.time_count(); ++n) {
      const Index start = window_support.start + n * lat.time_step();
      for (Index k = 0; k < window_support.length; ++k) {
        if (psi(wrap(start + k, L)) != Real(0)) {
          kept[static_cast<std::size_t>(n)] = true;
          break;
        }
      }
    }
    // Minimal arc of kept indices: complement of the longest circular gap.
    const Index N = lat.time_count();
    Index first = -1;
    for (Index n = 0; n < N; ++n) {
      if (kept[static_cast<std::size_t>(n)]) {
        first = n;
        break;
      }
    }
    if (first < 0) throw DegenerateQuiltError("stripe " + std::to_string(r) + " keeps no atoms");
    Index best_gap = 0;
    Index best_end = first;
    Index run = 0;
    for (Index k = 1; k <= N; ++k) {
      const Index n = wrap(first + k, N);
      if (!kept[static_cast<std::size_t>(n)]) {
        ++run;
      } else {
        if (run > best_gap) {
          best_gap = run;
          best_end = n;
        }
        run = 0;
      }
    }
    if (best_gap > 0) {
      stripe.n_lower = best_end;
      stripe.n_upper = best_end + (N - best_gap) - 1;
    }
    system.stripes.push_back(stripe);
  }
  return system;
}

/// c_r(lambda) = <f, pi(lambda) g^{m(r)}> for lambda in each stripe's index set,
/// stripes concatenated, each block time-outer.
template <typename Real, typename Derived>
Signal<Real> stripe_analysis(const StripeSystem<Real>& system, const Eigen::MatrixBase<Derived>& f) {
  Signal<Real> c(system.coefficient_count());
  Index offset = 0;
  for (const Stripe& stripe : system.stripes) {
    const GaborFrame<Real>& frame = system.frame(stripe.frame_id);
    const Lattice& lat = frame.lattice;
    const Signal<Real> full = analysis(frame, f);
    for (Index n = stripe.n_lower; n <= stripe.n_upper; ++n) {
      const Index row = wrap(n, lat.time_count());
      c.segment(offset, lat.freq_count()) = full.segment(row * lat.freq_count(), lat.freq_count());
      offset += lat.freq_count();
    }
  }
  return c;
}

/// Tolerance on |A - 1|, |B - 1| for the Parseval requirement of stripe_reconstruct.
inline constexpr double kParsevalTolerance = 1e-8;

/// f = sum_r psi_r sum_{lambda in X^r} c_r(lambda) pi(lambda) g^{m(r)}. Requires
/// every stripe frame to be Parseval (A = B = 1).
template <typename Real, typename Derived>
Signal<Real> stripe_reconstruct(const StripeSystem<Real>& system, const Eigen::MatrixBase<Derived>& c) {
  if (c.size() != system.coefficient_count()) throw DimensionError("stripe_reconstruct: coefficient count mismatch");
  for (const Stripe& stripe : system.stripes) {
    const FrameBounds<Real> bounds = frame_bounds(system.frame(stripe.frame_id));
    if (std::abs(bounds.A - Real(1)) > kParsevalTolerance || std::abs(bounds.B - Real(1)) > kParsevalTolerance) {
      throw PreconditionError("stripe_reconstruct: frame " + std::to_string(stripe.frame_id) +
                              " is not Parseval; use a dual-frame or iterative solver");
    }
  }
  Signal<Real> f = Signal<Real>::Zero(system.pou.L);
  Index offset = 0;
  for (std::size_t r = 0; r < system.stripes.size(); ++r) {
    const Stripe& stripe = system.stripes[r];
    const GaborFrame<Real>& frame = system.frame(stripe.frame_id);
    const Lattice& lat = frame.lattice;
    Signal<Real> full = Signal<Real>::Zero(lat.size());
    for (Index n = stripe.n_lower; n <= stripe.n_upper; ++n) {
      const Index row = wrap(n, lat.time_count());
      full.segment(row * lat.freq_count(), lat.freq_count()) = c.segment(offset, lat.freq_count());
      offset += lat.freq_count();
    }
    f += system.pou.psi[r].template cast<std::complex<Real>>().cwiseProduct(synthesis(frame, full));
  }
  return f;
}

/// The deduplicated union of the stripe atoms as a quilted system; provenance
/// is the partition into the partition-of-unity supports.
template <typename Real>
QuiltedSystem<Real> stripe_quilt(const StripeSystem<Real>& system) {
  const Index L = system.pou.L;
  std::vector<Region> regions;
  FrameAssignment assignment;
  for (std::size_t r = 0; r < system.stripes.size(); ++r) {
    const CircularInterval& arc = system.pou.supports[r];
    regions.push_back(Region::box(L, arc.start, arc.length, 0, L, static_cast<int>(r)));
    assignment.pairs.emplace_back(static_cast<int>(r), system.stripes[r].frame_id);
  }
  QuiltedSystem<Real> quilt{system.frames, {}, make_partition(L, std::move(regions)), std::move(assignment), 0};
  std::set<QuiltAtom> atoms;
  for (const Stripe& stripe : system.stripes) {
    const Lattice& lat = system.frame(stripe.frame_id).lattice;
    for (Index n = stripe.n_lower; n <= stripe.n_upper; ++n) {
      for (Index m = 0; m < lat.freq_count(); ++m) {
        atoms.insert({stripe.frame_id, {wrap(n, lat.time_count()) * lat.time_step(), m * lat.freq_step()}});
      }
    }
  }
  quilt.atoms.assign(atoms.begin(), atoms.end());
  return quilt;
}

// ---------------------------------------------------------------------------
// Replacement of finitely many atoms

/// Lattice points of a frame inside a region, in lattice order.
inline std::vector<TFPoint> lattice_points_in(const Lattice& lattice, const Region& region) {
  std::vector<TFPoint> points;
  for (const TFPoint& p : lattice_points(lattice)) {
    if (region.contains(p, lattice.length())) points.push_back(p);
  }
  return points;
}

template <typename Real>
ComplexMatrix<Real> atom_matrix(const Signal<Real>& window, const std::vector<TFPoint>& points) {
  ComplexMatrix<Real> Phi(window.size(), static_cast<Index>(points.size()));
  for (std::size_t k = 0; k < points.size(); ++k) Phi.col(static_cast<Index>(k)) = tf_shift(window, points[k]);
  return Phi;
}

/// |F2| x |F1| matrix with entries <pi(lambda) g, pi(mu) h>, i.e. T_{h,F2} T*_{g,F1}.
template <typename Real>
ComplexMatrix<Real> cross_gramian(const Signal<Real>& g, const std::vector<TFPoint>& F1, const Signal<Real>& h,
                                  const std::vector<TFPoint>& F2) {
  if (g.size() != h.size()) throw DimensionError("cross_gramian: windows differ in length");
  return atom_matrix(h, F2).adjoint() * atom_matrix(g, F1);
}

/// Largest squared singular value from the power sequence v, (M^*M) v, (M^*M)^2 v, ...
/// of a fixed pseudo-random start, using the Ritz value on its span (Lanczos with
/// full reorthogonalization) rather than the last iterate alone: plain power
/// iteration stalls when the top singular values cluster. Stops once the Ritz
/// residual is below tol times the estimate, or when the space is exhausted.
template <typename Real>
Real power_iteration_norm_sq(const ComplexMatrix<Real>& M, Real tol = Real(1e-13)) {
  const Index n = M.cols();
  if (n == 0 || M.rows() == 0) return 0;
  std::mt19937_64 rng(0x5eed);
  ComplexMatrix<Real> Q(n, n);
  Signal<Real> q = random_signal<Real>(n, rng);
  q /= q.norm();
  std::vector<Real> alpha, beta;
  Real theta = 0;
  for (Index j = 0; j < n; ++j) {
    Q.col(j) = q;
    Signal<Real> w = M.adjoint() * (M * q);
    alpha.push_back(std::real(q.dot(w)));
    for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).adjoint() * w);
    const Real b = w.norm();

    const Index k = j + 1;
    RealVector<Real> diag = Eigen::Map<const RealVector<Real>>(alpha.data(), k);
    RealVector<Real> sub = RealVector<Real>::Zero(std::max<Index>(k - 1, 1));
    for (Index i = 0; i + 1 < k; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>> es;
    es.computeFromTridiagonal(diag, sub.head(k - 1), Eigen::ComputeEigenvectors);
    theta = es.eigenvalues()(k - 1);
    const Real residual = b * std::abs(es.eigenvectors()(k - 1, k - 1));
    if (theta <= 0) return 0;
    if (residual <= tol * theta || b <= tol * theta) return theta;
    beta.push_back(b);
    q = w / b;
  }
  return theta;
}

template <typename Real>
Real spectral_norm_sq(const ComplexMatrix<Real>& M) {
  if (M.cols() == 0 || M.rows() == 0) return 0;
  Eigen::BDCSVD<ComplexMatrix<Real>> svd(M);
  const Real s = svd.singularValues()(0);
  return s * s;
}

/// Relative tolerance between the SVD and power-iteration norms.
inline constexpr double kNormCrossCheck = 1e-8;

template <typename Real>
struct DefectResult {
  Real C = 0;
  /// The power-iteration estimate of C.
  Real C_power = 0;
  bool certified = false;
};

/// C = ||T*_{g,F1} - T*_{h,F2} Lmap||^2, certified when C < A1/2. The norm is
/// computed twice (SVD and power iteration) and must agree to 1e-8.
template <typename Real>
DefectResult<Real> replacement_defect(const Signal<Real>& g, const std::vector<TFPoint>& F1, const Signal<Real>& h,
                                      const std::vector<TFPoint>& F2, const ComplexMatrix<Real>& Lmap, Real A1) {
  if (Lmap.rows() != static_cast<Index>(F2.size()) || Lmap.cols() != static_cast<Index>(F1.size())) {
    throw DimensionError("replacement_defect: Lmap must be |F2| x |F1|");
  }
  ComplexMatrix<Real> M = atom_matrix(g, F1);
  if (!F2.empty()) M -= atom_matrix(h, F2) * Lmap;
  DefectResult<Real> result;
  result.C = spectral_norm_sq(M);
  result.C_power = power_iteration_norm_sq(M);
  // Absolute floor keeps the check meaningful when C is at rounding level.
  const Real floor = Real(1e-12) * (static_cast<Real>(F1.size()) * g.squaredNorm());
  if (std::abs(result.C - result.C_power) > static_cast<Real>(kNormCrossCheck) * std::max(result.C, floor)) {
    throw NumericalError("replacement_defect: SVD and power iteration disagree (" + std::to_string(result.C) +
                         " vs " + std::to_string(result.C_power) + ")");
  }
  result.certified = result.C < A1 / Real(2);
  return result;
}

template <typename Real>
struct ReplacementPlan {
  Region omega;
  Region omega_star;
  std::vector<TFPoint> F1;
  std::vector<TFPoint> F2;
  ComplexMatrix<Real> Lmap;
  Real A1 = 0;
  Real defect = 0;
  Real defect_power = 0;
  Real Lnorm = 0;
  bool certified = false;
  /// (A1 - 2C) / max(1, 2 ||Lmap||^2) when certified, else 0.
  Real guaranteed_A = 0;
};

/// Tail sum over mu in Lambda^2 outside enlarge(Omega, delta) of
/// max_{lambda in F1} |V_g h(mu - lambda)|.
template <typename Real>
class ReplacementTail {
 public:
  ReplacementTail(const Region& omega, const GaborFrame<Real>& frame1, const GaborFrame<Real>& frame2)
      : omega_(omega), L_(frame1.length()), lattice2_(frame2.lattice) {
    if (frame2.length() != L_) throw DimensionError("replacement frames differ in length");
    const auto F1 = lattice_points_in(frame1.lattice, omega);
    F1_count_ = static_cast<Index>(F1.size());
    const ComplexMatrix<Real> V = stft(frame2.window, frame1.window);
    for (const TFPoint& mu : lattice_points(lattice2_)) {
      Real w = 0;
      for (const TFPoint& lambda : F1) {
        w = std::max(w, std::abs(V(wrap(mu.x - lambda.x, L_), wrap(mu.omega - lambda.omega, L_))));
      }
      weights_.push_back(w);
    }
  }

  Real operator()(Index delta) const {
    const Region grown = enlarge_region(omega_, delta, L_);
    const auto points = lattice_points(lattice2_);
    Real tail = 0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (!grown.contains(points[k], L_)) tail += weights_[k];
    }
    return tail;
  }

  Index F1_count() const { return F1_count_; }

 private:
  Region omega_;
  Index L_;
  Lattice lattice2_;
  Index F1_count_ = 0;
  std::vector<Real> weights_;
};

template <typename Real>
struct OmegaStarChoice {
  Region region;
  Index delta = 0;
  Real tail = 0;
  /// ||h|| sqrt(|F1|) tail, compared against sqrt(A1/2).
  Real bound = 0;
};

/// Smallest isotropic enlargement Omega* = enlarge(Omega, delta) with
/// ||h|| sqrt(|F1|) tail(delta) < sqrt(A1/2).
template <typename Real>
OmegaStarChoice<Real> choose_omega_star(const Region& omega, const GaborFrame<Real>& frame1,
                                        const GaborFrame<Real>& frame2, Real A1) {
  const Real h_norm = frame2.window.norm();
  if (h_norm == 0) throw DomainError("choose_omega_star: replacement window is zero");
  const Index L = frame1.length();
  const ReplacementTail<Real> tail(omega, frame1, frame2);
  const Real target = std::sqrt(std::max(A1, Real(0)) / Real(2));
  const Real scale = h_norm * std::sqrt(static_cast<Real>(tail.F1_count()));
  for (Index delta = 0; delta <= L; ++delta) {
    const Real t = tail(delta);
    const Real bound = scale * t;
    if (bound < target) return {enlarge_region(omega, delta, L), delta, t, bound};
  }
  throw CertificationError("choose_omega_star: no enlargement certifies the replacement (A1 = " +
                           std::to_string(A1) + ")");
}

/// Every grid point of `inner` lies in `outer`.
inline bool region_subset(const Region& inner, const Region& outer, Index L) {
  for (const Rect& r : inner.rects) {
    for (Index x = r.x0; x < r.x1; ++x) {
      for (Index w = r.w0; w < r.w1; ++w) {
        if (!outer.contains({x, w}, L)) return false;
      }
    }
  }
  return true;
}

template <typename Real>
struct Replacement {
  QuiltedSystem<Real> quilt;
  ReplacementPlan<Real> plan;
};

/// {pi(lambda) g : lambda in Lambda^1 \ F1} u {pi(mu) h : mu in F2} with
/// F1 = Lambda^1 n Omega and F2 = Lambda^2 n Omega*. Omega must lie inside
/// Omega*. The quilt's provenance is the covering {complement(Omega) -> frame 1,
/// Omega* -> frame 2}.
template <typename Real>
Replacement<Real> build_replacement(const GaborFrame<Real>& frame1, const GaborFrame<Real>& frame2,
                                    const Region& omega, const Region& omega_star) {
  const Index L = frame1.length();
  if (frame2.length() != L) throw DimensionError("build_replacement: frames differ in length");
  if (frame1.id == frame2.id) throw ConfigError("build_replacement: frames need distinct ids");
  if (!region_subset(omega, omega_star, L)) throw ConfigError("build_replacement: Omega must lie inside Omega*");

  ReplacementPlan<Real> plan;
  plan.omega = omega;
  plan.omega_star = omega_star;
  plan.F1 = lattice_points_in(frame1.lattice, omega);
  plan.F2 = lattice_points_in(frame2.lattice, omega_star);
  plan.A1 = frame_bounds(frame1).A;
  plan.Lmap = cross_gramian(frame1.window, plan.F1, frame2.window, plan.F2);
  plan.Lnorm = spectral_norm_sq(plan.Lmap);
  const DefectResult<Real> defect = replacement_defect(frame1.window, plan.F1, frame2.window, plan.F2, plan.Lmap, plan.A1);
  plan.defect = defect.C;
  plan.defect_power = defect.C_power;
  plan.certified = defect.certified;
  if (plan.certified) plan.guaranteed_A = (plan.A1 - Real(2) * plan.defect) / std::max(Real(1), Real(2) * plan.Lnorm);

  Region keep = complement(omega, L, 0);
  Region star = omega_star;
  star.id = 1;
  Partition partition = make_partition(L, {keep, star});
  QuiltedSystem<Real> quilt = assemble_quilt<Real>({frame1, frame2}, std::move(partition),
                                                   FrameAssignment{{{0, frame1.id}, {1, frame2.id}}}, 0);
  return {std::move(quilt), std::move(plan)};
}

template <typename Real>
struct PerturbationBound {
  Real threshold = 0;
  Real distance_sq = 0;
  bool satisfied = false;
};

/// Same-lattice replacement: frame property holds whenever
/// ||h - g||^2 < A1 / (2 |F1|).
template <typename Real>
PerturbationBound<Real> window_perturbation_bound(const Signal<Real>& g, const Signal<Real>& h,
                                                  const std::vector<TFPoint>& F1, Real A1) {
  if (g.size() != h.size()) throw DimensionError("window_perturbation_bound: windows differ in length");
  PerturbationBound<Real> out;
  out.distance_sq = (h - g).squaredNorm();
  out.threshold = F1.empty() ? std::numeric_limits<Real>::infinity()
                             : A1 / (Real(2) * static_cast<Real>(F1.size()));
  out.satisfied = out.distance_sq < out.threshold;
  return out;
}

}  // namespace quiltframe
