#pragma once

// Quilted Gabor systems: several Gabor frames restricted to the regions of a
// covering of the time-frequency torus Z_L x Z_L, plus the sampling-geometry
// diagnostics behind the Bessel bound.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "quiltframe/errors.hpp"
#include "quiltframe/gabor.hpp"
#include "quiltframe/signal.hpp"

namespace quiltframe {

/// Half-open rectangle [x0, x1) x [w0, w1) with coordinates in [0, L].
struct Rect {
  Index x0 = 0;
  Index x1 = 0;
  Index w0 = 0;
  Index w1 = 0;

  bool empty() const { return x0 >= x1 || w0 >= w1; }
  bool contains(TFPoint p) const { return p.x >= x0 && p.x < x1 && p.omega >= w0 && p.omega < w1; }
  bool operator==(const Rect&) const = default;
};

/// Union of rectangles on the torus. Wrapped boxes are stored split.
struct Region {
  std::vector<Rect> rects;
  int id = 0;

  bool contains(TFPoint p, Index L) const {
    const TFPoint q = reduce(p, L);
    return std::any_of(rects.begin(), rects.end(), [&](const Rect& r) { return r.contains(q); });
  }

  static Region whole(Index L, int id = 0) { return {{Rect{0, L, 0, L}}, id}; }
  static Region empty(int id = 0) { return {{}, id}; }

  /// [x0, x0 + width) x [w0, w0 + height) taken mod L.
  static Region box(Index L, Index x0, Index width, Index w0, Index height, int id = 0);
};

namespace detail {

/// Arc [lo, lo + len) of Z_L as at most two intervals inside [0, L].
inline std::vector<std::pair<Index, Index>> split_arc(Index lo, Index len, Index L) {
  if (len <= 0) return {};
  if (len >= L) return {{0, L}};
  const Index start = wrap(lo, L);
  const Index stop = start + len;
  if (stop <= L) return {{start, stop}};
  return {{start, L}, {0, stop - L}};
}

}  // namespace detail

inline Region Region::box(Index L, Index x0, Index width, Index w0, Index height, int id) {
  Region region{{}, id};
  for (auto [xa, xb] : detail::split_arc(x0, width, L)) {
    for (auto [wa, wb] : detail::split_arc(w0, height, L)) region.rects.push_back({xa, xb, wa, wb});
  }
  return region;
}

/// Grows every rectangle by delta on all four sides, modulo L.
inline Region enlarge_region(const Region& region, Index delta, Index L) {
  if (delta < 0) throw ConfigError("enlarge_region: delta must be nonnegative");
  Region out{{}, region.id};
  for (const Rect& r : region.rects) {
    if (r.empty()) continue;
    const Index width = (r.x1 - r.x0) + 2 * delta;
    const Index height = (r.w1 - r.w0) + 2 * delta;
    for (auto [xa, xb] : detail::split_arc(r.x0 - delta, width, L)) {
      for (auto [wa, wb] : detail::split_arc(r.w0 - delta, height, L)) out.rects.push_back({xa, xb, wa, wb});
    }
  }
  return out;
}

/// Z_L x Z_L minus the region, as rectangles of the compressed grid.
inline Region complement(const Region& region, Index L, int id) {
  std::vector<Index> xs{0, L};
  std::vector<Index> ws{0, L};
  for (const Rect& r : region.rects) {
    xs.insert(xs.end(), {r.x0, r.x1});
    ws.insert(ws.end(), {r.w0, r.w1});
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ws.begin(), ws.end());
  ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
  Region out{{}, id};
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t k = 0; k + 1 < ws.size(); ++k) {
      if (!region.contains({xs[i], ws[k]}, L)) out.rects.push_back({xs[i], xs[i + 1], ws[k], ws[k + 1]});
    }
  }
  return out;
}

/// Number of regions covering each grid point (rows: time, cols: frequency).
inline Eigen::MatrixXi coverage_counts(const std::vector<Region>& regions, Index L) {
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(L, L);
  Eigen::MatrixXi mask(L, L);
  for (const Region& region : regions) {
    mask.setZero();
    for (const Rect& r : region.rects) {
      if (!r.empty()) mask.block(r.x0, r.w0, r.x1 - r.x0, r.w1 - r.w0).setOnes();
    }
    counts += mask;
  }
  return counts;
}

/// A covering of Z_L x Z_L by regions with its height (maximal overlap count).
struct Partition {
  Index L = 0;
  std::vector<Region> regions;
  Index height = 0;

  const Region& region(int id) const {
    for (const Region& r : regions) {
      if (r.id == id) return r;
    }
    throw ConfigError("partition has no region " + std::to_string(id));
  }
};

inline Partition make_partition(Index L, std::vector<Region> regions) {
  check_length(L);
  const Eigen::MatrixXi counts = coverage_counts(regions, L);
  if (counts.minCoeff() < 1) throw ConfigError("partition leaves grid points uncovered");
  std::set<int> ids;
  for (const Region& r : regions) {
    if (!ids.insert(r.id).second) throw ConfigError("duplicate region id " + std::to_string(r.id));
  }
  return {L, std::move(regions), static_cast<Index>(counts.maxCoeff())};
}

/// (L/tile)^2 disjoint square tiles; region id = time block * (L/tile) + frequency block.
inline Partition build_partition_tiles(Index L, Index tile) {
  check_length(L);
  if (tile <= 0 || L % tile != 0) {
    throw ConfigError("tile size " + std::to_string(tile) + " does not divide L=" + std::to_string(L));
  }
  const Index blocks = L / tile;
  std::vector<Region> regions;
  for (Index i = 0; i < blocks; ++i) {
    for (Index k = 0; k < blocks; ++k) {
      regions.push_back({{Rect{i * tile, (i + 1) * tile, k * tile, (k + 1) * tile}},
                         static_cast<int>(i * blocks + k)});
    }
  }
  return make_partition(L, std::move(regions));
}

/// Full-frequency stripes [t_i, t_{i+1}) x [0, L); the last stripe wraps to t_0.
inline Partition build_partition_stripes(Index L, const std::vector<Index>& boundaries) {
  check_length(L);
  if (boundaries.empty()) throw ConfigError("stripes need at least one boundary");
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (boundaries[i] < 0 || boundaries[i] >= L) throw ConfigError("stripe boundary outside [0, L)");
    if (i > 0 && boundaries[i] <= boundaries[i - 1]) {
      throw ConfigError("stripe boundaries must be strictly increasing");
    }
  }
  std::vector<Region> regions;
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    const Index start = boundaries[i];
    const Index stop = i + 1 < boundaries.size() ? boundaries[i + 1] : boundaries.front() + L;
    regions.push_back(Region::box(L, start, stop - start, 0, L, static_cast<int>(i)));
  }
  return make_partition(L, std::move(regions));
}

/// (region id, frame id) pairs; a region may carry several frames.
struct FrameAssignment {
  std::vector<std::pair<int, int>> pairs;
};

struct QuiltAtom {
  int frame_id = 0;
  TFPoint point;

  auto operator<=>(const QuiltAtom&) const = default;
};

template <typename Real>
struct QuiltedSystem {
  std::vector<GaborFrame<Real>> frames;
  /// Sorted by frame id, then time, then frequency; no duplicates.
  std::vector<QuiltAtom> atoms;
  Partition partition;
  FrameAssignment assignment;
  Index delta = 0;

  Index length() const { return partition.L; }
  Index size() const { return static_cast<Index>(atoms.size()); }

  const GaborFrame<Real>& frame(int id) const {
    for (const auto& f : frames) {
      if (f.id == id) return f;
    }
    throw ConfigError("quilt has no frame " + std::to_string(id));
  }

  /// Ids of frames that contribute at least one atom, ascending.
  std::vector<int> used_frames() const {
    std::vector<int> ids;
    for (const QuiltAtom& atom : atoms) {
      if (ids.empty() || ids.back() != atom.frame_id) ids.push_back(atom.frame_id);
    }
    return ids;
  }
};

/// Union over assignment pairs (r, j) of {(j, lambda) : lambda in Lambda^j and
/// in Omega_r grown by delta}, with set semantics.
template <typename Real>
QuiltedSystem<Real> assemble_quilt(std::vector<GaborFrame<Real>> frames, Partition partition,
                                   FrameAssignment assignment, Index delta = 0) {
  const Index L = partition.L;
  if (frames.empty()) throw ConfigError("assemble_quilt: no frames");
  std::set<int> frame_ids;
  for (const auto& f : frames) {
    if (f.length() != L) throw DimensionError("assemble_quilt: frames must share the partition length");
    if (!frame_ids.insert(f.id).second) throw ConfigError("duplicate frame id " + std::to_string(f.id));
  }
  std::set<int> assigned_regions;
  for (auto [r, j] : assignment.pairs) {
    partition.region(r);
    if (!frame_ids.contains(j)) throw ConfigError("assignment references unknown frame " + std::to_string(j));
    assigned_regions.insert(r);
  }
  for (const Region& region : partition.regions) {
    if (!assigned_regions.contains(region.id)) {
      throw ConfigError("region " + std::to_string(region.id) + " has no frame assigned");
    }
  }

  QuiltedSystem<Real> quilt{std::move(frames), {}, std::move(partition), std::move(assignment), delta};
  std::set<QuiltAtom> atoms;
  for (auto [r, j] : quilt.assignment.pairs) {
    const Region grown = enlarge_region(quilt.partition.region(r), delta, L);
    for (const TFPoint& p : lattice_points(quilt.frame(j).lattice)) {
      if (grown.contains(p, L)) atoms.insert({j, p});
    }
  }
  if (atoms.empty()) throw DegenerateQuiltError("quilted system has no atoms");
  quilt.atoms.assign(atoms.begin(), atoms.end());
  return quilt;
}

/// One frame on the whole plane.
template <typename Real>
QuiltedSystem<Real> single_frame_quilt(const GaborFrame<Real>& frame) {
  return assemble_quilt<Real>({frame}, make_partition(frame.length(), {Region::whole(frame.length())}),
                              FrameAssignment{{{0, frame.id}}}, 0);
}

/// L x N matrix of atoms pi(lambda) g^j in quilt order.
template <typename Real>
ComplexMatrix<Real> quilt_synthesis_matrix(const QuiltedSystem<Real>& quilt) {
  ComplexMatrix<Real> Phi(quilt.length(), quilt.size());
  for (Index k = 0; k < quilt.size(); ++k) {
    const QuiltAtom& atom = quilt.atoms[static_cast<std::size_t>(k)];
    Phi.col(k) = tf_shift(quilt.frame(atom.frame_id).window, atom.point);
  }
  return Phi;
}

template <typename Real, typename Derived>
Signal<Real> quilt_analysis(const QuiltedSystem<Real>& quilt, const Eigen::MatrixBase<Derived>& f) {
  if (f.size() != quilt.length()) throw DimensionError("quilt_analysis: signal length does not match quilt");
  Signal<Real> c(quilt.size());
  std::size_t k = 0;
  for (int id : quilt.used_frames()) {
    const GaborFrame<Real>& frame = quilt.frame(id);
    const Signal<Real> full = analysis(frame, f);
    for (; k < quilt.atoms.size() && quilt.atoms[k].frame_id == id; ++k) {
      c(static_cast<Index>(k)) = full(frame.lattice.index_of(quilt.atoms[k].point));
    }
  }
  return c;
}

template <typename Real, typename Derived>
Signal<Real> quilt_synthesis(const QuiltedSystem<Real>& quilt, const Eigen::MatrixBase<Derived>& c) {
  if (c.size() != quilt.size()) {
    throw DimensionError("quilt_synthesis: expected " + std::to_string(quilt.size()) + " coefficients");
  }
  Signal<Real> f = Signal<Real>::Zero(quilt.length());
  std::size_t k = 0;
  for (int id : quilt.used_frames()) {
    const GaborFrame<Real>& frame = quilt.frame(id);
    Signal<Real> full = Signal<Real>::Zero(frame.lattice.size());
    for (; k < quilt.atoms.size() && quilt.atoms[k].frame_id == id; ++k) {
      full(frame.lattice.index_of(quilt.atoms[k].point)) = c(static_cast<Index>(k));
    }
    f += synthesis(frame, full);
  }
  return f;
}

template <typename Real>
ComplexMatrix<Real> quilt_frame_operator(const QuiltedSystem<Real>& quilt) {
  const ComplexMatrix<Real> Phi = quilt_synthesis_matrix(quilt);
  ComplexMatrix<Real> S = Phi * Phi.adjoint();
  return Real(0.5) * (S + S.adjoint());
}

template <typename Real>
FrameBounds<Real> quilt_frame_bounds(const QuiltedSystem<Real>& quilt) {
  return frame_bounds(quilt_frame_operator(quilt));
}

struct SeparationReport {
  /// Minimal l-infinity separation over the used lattices, min_j min(a_j, b_j).
  Index gamma = 0;
  /// Number of separated subsets, one per used frame.
  Index R = 0;
  /// Height of the covering after growing every region by the quilt's delta.
  Index height_delta = 0;
  /// Maximal number of atoms sharing one unit cell of the grid.
  Index point_density = 0;
};

template <typename Real>
SeparationReport separation_report(const QuiltedSystem<Real>& quilt) {
  if (quilt.atoms.empty()) throw DegenerateQuiltError("separation_report: empty quilt");
  SeparationReport report;
  const auto used = quilt.used_frames();
  report.R = static_cast<Index>(used.size());
  report.gamma = quilt.length();
  for (int id : used) {
    const Lattice& lat = quilt.frame(id).lattice;
    report.gamma = std::min({report.gamma, lat.time_step(), lat.freq_step()});
  }
  std::vector<Region> grown;
  for (const Region& r : quilt.partition.regions) grown.push_back(enlarge_region(r, quilt.delta, quilt.length()));
  report.height_delta = coverage_counts(grown, quilt.length()).maxCoeff();
  std::map<TFPoint, Index> multiplicity;
  for (const QuiltAtom& atom : quilt.atoms) {
    report.point_density = std::max(report.point_density, ++multiplicity[atom.point]);
  }
  return report;
}

struct DecayProfile {
  double C = 0;
  double s = 0;
};

/// Smallest C with |V_{g0} g|(z) <= C (1 + |z|^2)^{-s/2} on the whole grid
/// for every window g, where g0 is the periodized Gaussian and |z| uses
/// wrapped coordinates.
template <typename Real>
DecayProfile decay_profile(const std::vector<Signal<Real>>& windows, double s) {
  if (!(s > 2.0)) throw DomainError("decay_profile: exponent s must exceed 2");
  if (windows.empty()) throw ConfigError("decay_profile: no windows");
  const Index L = windows.front().size();
  const Signal<Real> g0 = periodized_gaussian<Real>(L);
  double C = 0;
  for (const auto& g : windows) {
    if (g.size() != L) throw DimensionError("decay_profile: windows must share length");
    const ComplexMatrix<Real> V = stft(g, g0);
    for (Index x = 0; x < L; ++x) {
      const double dx = static_cast<double>(wrapped_distance(x, L));
      for (Index w = 0; w < L; ++w) {
        const double dw = static_cast<double>(wrapped_distance(w, L));
        const double weight = std::pow(1.0 + dx * dx + dw * dw, s / 2.0);
        C = std::max(C, static_cast<double>(std::abs(V(x, w))) * weight);
      }
    }
  }
  return {C, s};
}

/// Upper frame bound C^2 n(delta) (1 + 1/gamma)^2 for a one-dimensional quilt.
template <typename Real>
double bessel_estimate(const QuiltedSystem<Real>& quilt, double C_decay, double s) {
  if (!(s > 2.0)) throw DomainError("bessel_estimate: exponent s must exceed 2");
  const SeparationReport sep = separation_report(quilt);
  const double spread = 1.0 + 1.0 / static_cast<double>(sep.gamma);
  return C_decay * C_decay * static_cast<double>(sep.height_delta) * spread * spread;
}

/// CSV with header frame_id,x,omega, one row per atom in quilt order.
template <typename Real>
void write_lattice_csv(std::ostream& out, const QuiltedSystem<Real>& quilt) {
  out << "frame_id,x,omega\n";
  for (const QuiltAtom& atom : quilt.atoms) {
    out << atom.frame_id << ',' << atom.point.x << ',' << atom.point.omega << '\n';
  }
}

}  // namespace quiltframe
