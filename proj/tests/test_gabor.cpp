#include <doctest.h>

#include "oracles.hpp"

using namespace quiltframe;

namespace {

GaborFrame<double> gaussian_frame(Index L, Index a, Index b, int id = 0, double tfr = 1.0) {
  return GaborFrame<double>(periodized_gaussian<double>(L, tfr), Lattice(L, a, b), id);
}

std::vector<std::tuple<Signal<double>, Index, Index>> atoms_of(const GaborFrame<double>& F) {
  std::vector<std::tuple<Signal<double>, Index, Index>> atoms;
  for (const TFPoint& p : lattice_points(F.lattice)) atoms.emplace_back(F.window, p.x, p.omega);
  return atoms;
}

}  // namespace

TEST_SUITE("gabor") {

TEST_CASE("lattice counts and redundancy") {
  const Lattice l1(144, 4, 8);
  CHECK(l1.size() == 648);
  CHECK(l1.redundancy() == doctest::Approx(4.5));
  const Lattice l2(144, 8, 16);
  CHECK(l2.size() == 162);
  CHECK(l2.redundancy() == doctest::Approx(1.125));
  const auto single = lattice_points(Lattice(8, 8, 8));
  REQUIRE(single.size() == 1);
  CHECK(single[0] == TFPoint{0, 0});
}

TEST_CASE("lattice points are distinct, reduced and ordered time-outer") {
  const Lattice lat(48, 6, 4);
  const auto points = lattice_points(lat);
  CHECK(static_cast<Index>(points.size()) == lat.size());
  std::set<TFPoint> unique(points.begin(), points.end());
  CHECK(unique.size() == points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    CHECK(points[k].x < 48);
    CHECK(points[k].omega < 48);
    CHECK(lat.index_of(points[k]) == static_cast<Index>(k));
    CHECK(lat.point(static_cast<Index>(k)) == points[k]);
    CHECK(lat.contains(points[k]));
  }
  CHECK(points[1] == TFPoint{0, 4});
  CHECK_FALSE(lat.contains({3, 0}));
}

TEST_CASE("lattice validation") {
  CHECK_THROWS_AS(Lattice(144, 5, 8), ConfigError);
  CHECK_THROWS_AS(Lattice(144, 4, 0), ConfigError);
  CHECK_THROWS_AS(Lattice(2, 1, 1), DimensionError);
  CHECK_THROWS_AS(GaborFrame<double>(Signal<double>::Ones(10), Lattice(12, 3, 4)), DimensionError);
}

TEST_CASE("analysis of an atom and of zero") {
  const auto F = gaussian_frame(48, 4, 6);
  const TFPoint p0{8, 12};
  const Signal<double> c = analysis(F, tf_shift(F.window, p0));
  CHECK(std::abs(c(F.lattice.index_of(p0)) - 1.0) < 1e-13);
  CHECK(analysis(F, Signal<double>(Signal<double>::Zero(48))).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(analysis(F, Signal<double>(Signal<double>::Zero(47))), DimensionError);
}

TEST_CASE("analysis equals the stft on lattice points") {
  const auto F = gaussian_frame(48, 4, 6);
  const Signal<double> f = random_signal<double>(48, 21);
  const Signal<double> c = analysis(F, f);
  const ComplexMatrix<double> V = oracle::direct_stft(f, F.window);
  const auto points = lattice_points(F.lattice);
  double dev = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    dev = std::max(dev, std::abs(c(static_cast<Index>(k)) - V(points[k].x, points[k].omega)));
  }
  CHECK(dev < 1e-12);
}

TEST_CASE("synthesis of a unit coefficient and of zero") {
  const auto F = gaussian_frame(48, 4, 6);
  Signal<double> c = Signal<double>::Zero(F.lattice.size());
  const TFPoint p0{12, 30};
  c(F.lattice.index_of(p0)) = 1;
  CHECK((synthesis(F, c) - tf_shift(F.window, p0)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(synthesis(F, Signal<double>(Signal<double>::Zero(F.lattice.size()))).norm() == 0.0);
  CHECK_THROWS_AS(synthesis(F, Signal<double>(Signal<double>::Zero(3))), DimensionError);
}

TEST_CASE("adjointness on random pairs") {
  std::mt19937_64 rng(1);
  const Index steps[][2] = {{2, 3}, {3, 4}, {4, 6}, {6, 4}, {12, 1}};
  for (int trial = 0; trial < 20; ++trial) {
    const auto& ab = steps[trial % 5];
    const auto F = GaborFrame<double>(random_signal<double>(48, rng), Lattice(48, ab[0], ab[1]));
    const Signal<double> f = random_signal<double>(48, rng);
    const Signal<double> c = random_signal<double>(F.lattice.size(), rng);
    const auto lhs = analysis(F, f).dot(c);
    const auto rhs = f.dot(synthesis(F, c));
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(lhs)) * 10);
  }
}

TEST_CASE("frame operator") {
  SUBCASE("full grid is L times identity") {
    const auto F = gaussian_frame(16, 1, 1);
    const ComplexMatrix<double> S = frame_operator_matrix(F);
    CHECK((S - 16.0 * ComplexMatrix<double>::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
    const auto bounds = frame_bounds(S);
    CHECK(bounds.A == doctest::Approx(16.0));
    CHECK(bounds.B == doctest::Approx(16.0));
    CHECK(bounds.cond == doctest::Approx(1.0));
  }
  SUBCASE("hermitian and equal to synthesis after analysis") {
    const auto F = gaussian_frame(48, 4, 6);
    const ComplexMatrix<double> S = frame_operator_matrix(F);
    CHECK((S - S.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
    const Signal<double> f = random_signal<double>(48, 2);
    CHECK((S * f - synthesis(F, analysis(F, f))).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("zero window") {
    const GaborFrame<double> F(Signal<double>::Zero(12), Lattice(12, 3, 4));
    CHECK(frame_operator_matrix(F).cwiseAbs().maxCoeff() == 0.0);
    const auto bounds = frame_bounds(F);
    CHECK(bounds.B == 0.0);
    CHECK_FALSE(bounds.is_frame());
  }
}

TEST_CASE("frame bounds match dense svd of the analysis matrix") {
  const auto F = gaussian_frame(12, 3, 4);
  const auto bounds = frame_bounds(F);
  const auto [A, B] = oracle::svd_bounds(oracle::stacked_analysis(atoms_of(F), 12));
  CHECK(std::abs(bounds.A - A) / A < 1e-9);
  CHECK(std::abs(bounds.B - B) / B < 1e-9);
  CHECK(bounds.cond == doctest::Approx(std::sqrt(B / A)).epsilon(1e-9));
  CHECK(bounds.ratio == doctest::Approx(B / A).epsilon(1e-9));
}

TEST_CASE("undersampled lattice is not a frame") {
  // a b > L: fewer atoms than dimensions
  const auto F = gaussian_frame(12, 4, 4);
  CHECK(F.lattice.redundancy() < 1);
  const auto bounds = frame_bounds(F);
  CHECK(bounds.A == 0.0);
  CHECK(std::isinf(bounds.cond));
  CHECK_FALSE(bounds.is_frame());
  CHECK_THROWS_AS(canonical_dual_window(F), NotAFrameError);
  CHECK_THROWS_AS(canonical_tight_window(F), NotAFrameError);
}

TEST_CASE("frame_bounds rejects non-square input") {
  CHECK_THROWS_AS(frame_bounds(ComplexMatrix<double>::Zero(3, 4)), DimensionError);
}

TEST_CASE("frame inequality on random signals") {
  for (const auto& F : {gaussian_frame(48, 4, 6), gaussian_frame(48, 6, 6), gaussian_frame(48, 2, 12)}) {
    const auto bounds = frame_bounds(F);
    REQUIRE(bounds.is_frame());
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
      const Signal<double> f = random_signal<double>(48, rng);
      const double energy = analysis(F, f).squaredNorm();
      CHECK(energy >= bounds.A * f.squaredNorm() * (1 - 1e-12));
      CHECK(energy <= bounds.B * f.squaredNorm() * (1 + 1e-12));
    }
  }
}

TEST_CASE("canonical dual window reconstructs") {
  const auto F = gaussian_frame(144, 4, 8);
  const GaborFrame<double> dual(canonical_dual_window(F), F.lattice);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 10; ++k) {
    const Signal<double> f = random_signal<double>(144, rng);
    CHECK(relative_error(synthesis(F, analysis(dual, f)), f) < 1e-10);
  }
  // dual of the dual is the original window
  CHECK(relative_error(canonical_dual_window(dual), F.window) < 1e-10);
}

TEST_CASE("dual and tight of an already tight frame") {
  const auto tight = tightened(gaussian_frame(48, 4, 6));
  const GaborFrame<double> scaled(3.0 * tight.window, tight.lattice);
  const double A = frame_bounds(scaled).A;
  CHECK(A == doctest::Approx(9.0));
  CHECK(relative_error(canonical_dual_window(scaled), Signal<double>(scaled.window / A)) < 1e-10);
  CHECK(relative_error(canonical_tight_window(scaled), Signal<double>(scaled.window / std::sqrt(A))) < 1e-10);
}

TEST_CASE("tight windows") {
  for (auto [a, b] : {std::pair<Index, Index>{4, 8}, {8, 4}, {8, 16}, {16, 8}}) {
    const auto F = gaussian_frame(144, a, b);
    const auto T = tightened(F);
    const auto bounds = frame_bounds(T);
    CHECK(bounds.cond <= 1 + 1e-8);
    CHECK(bounds.A == doctest::Approx(1.0).epsilon(1e-9));
    // idempotent up to scale
    const Signal<double> again = canonical_tight_window(T);
    CHECK(relative_error(Signal<double>(again / again.norm()), Signal<double>(T.window / T.window.norm())) < 1e-10);
  }
}

TEST_CASE("painless tightening keeps exact zeros") {
  const GaborFrame<double> F(truncated_gaussian<double>(144, 8), Lattice(144, 4, 8));
  const auto T = tightened(F);
  const CircularInterval before = support_interval(F.window);
  const CircularInterval after = support_interval(T.window);
  CHECK(after.start == before.start);
  CHECK(after.length == before.length);
  CHECK(frame_bounds(T).cond <= 1 + 1e-8);
  // matches the dense S^{-1/2} computation
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<double>> es(frame_operator_matrix(F));
  const Eigen::VectorXd inv_sqrt = es.eigenvalues().array().rsqrt();
  const Signal<double> dense =
      es.eigenvectors() * (inv_sqrt.cast<std::complex<double>>().asDiagonal() * (es.eigenvectors().adjoint() * F.window));
  CHECK(relative_error(T.window, dense) < 1e-10);
}

TEST_CASE("painless gap is reported") {
  // support 3 with a = 4 leaves samples uncovered
  const GaborFrame<double> F(truncated_gaussian<double>(48, 1), Lattice(48, 4, 6));
  CHECK_THROWS_AS(canonical_tight_window(F), NotAFrameError);
}

TEST_CASE("contraction factor") {
  FrameBounds<double> b;
  b.A = 1;
  b.B = 3;
  CHECK(b.contraction() == doctest::Approx(0.5));
}

TEST_CASE("single precision frame") {
  const GaborFrame<float> F(periodized_gaussian<float>(24), Lattice(24, 2, 4));
  const auto bounds = frame_bounds(F);
  CHECK(bounds.is_frame());
  const GaborFrame<float> T = tightened(F);
  CHECK(frame_bounds(T).cond < 1.0f + 1e-3f);
}

}  // TEST_SUITE
