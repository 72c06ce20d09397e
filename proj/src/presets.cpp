#include <atomic>
#include <functional>
#include <thread>

#include "quiltframe/experiments.hpp"

namespace quiltframe::experiments {

namespace {

// Runs fn(0..n-1) on up to `threads` workers; results land in index order, so
// the output does not depend on scheduling.
template <typename T>
std::vector<T> run_indexed(std::size_t n, int threads, const std::function<T(std::size_t)>& fn) {
  std::vector<std::optional<T>> slots(n);
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) slots[i] = fn(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            slots[i] = fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

ReconstructionReport<double> reconstruct_random(const Quilt& quilt, std::uint64_t seed, double tol) {
  const Signal<double> f = random_signal<double>(quilt.length(), seed);
  FrameAlgoConfig cfg;
  cfg.tol = tol;
  return frame_algorithm(quilt, quilt_analysis(quilt, f), cfg, std::optional<Signal<double>>(f));
}

}  // namespace

Frame seed_frame(Index L, Index a, Index b, int id, double tfr, bool tighten) {
  Frame frame(periodized_gaussian<double>(L, tfr), Lattice(L, a, b), id);
  return tighten ? tightened(frame) : frame;
}

Quilt two_stripe_quilt(const Frame& left, const Frame& right, Index delta) {
  const Index L = left.length();
  return assemble_quilt<double>({left, right}, build_partition_stripes(L, {0, L / 2}),
                                FrameAssignment{{{0, left.id}, {1, right.id}}}, delta);
}

Quilt figure1_quilt(const Figure1Setup& setup) {
  const Index blocks = setup.L / setup.tile;
  std::vector<Frame> frames;
  frames.emplace_back(periodized_gaussian<double>(setup.L), setup.lattice0, 0);
  frames.emplace_back(periodized_gaussian<double>(setup.L), setup.lattice1, 1);
  FrameAssignment assignment;
  for (Index i = 0; i < blocks; ++i) {
    for (Index k = 0; k < blocks; ++k) {
      assignment.pairs.emplace_back(static_cast<int>(i * blocks + k), static_cast<int>((i + k) % 2));
    }
  }
  return assemble_quilt<double>(std::move(frames), build_partition_tiles(setup.L, setup.tile), std::move(assignment), 0);
}

std::vector<StripeCase> stripe_cases(std::uint64_t seed, double tol, int threads) {
  struct Setup {
    Index a1, b1, a2, b2;
    bool overlap;
    double cond;
    int iterations;
  };
  static const Setup setups[] = {
      {4, 8, 8, 4, false, 1.6, 21},
      {4, 8, 8, 4, true, 1.4, 17},
      {8, 16, 16, 8, false, 6.4, 322},
      {8, 16, 16, 8, true, 1.5, 18},
  };
  const Index L = kExperimentLength;
  return run_indexed<StripeCase>(std::size(setups), threads, [&](std::size_t i) {
    const Setup& s = setups[i];
    const Quilt quilt = two_stripe_quilt(seed_frame(L, s.a1, s.b1, 1), seed_frame(L, s.a2, s.b2, 2), s.overlap ? 1 : 0);
    StripeCase out;
    out.label = "(" + std::to_string(s.a1) + "," + std::to_string(s.b1) + ")|(" + std::to_string(s.a2) + "," +
                std::to_string(s.b2) + ")" + (s.overlap ? " overlap" : " no-overlap");
    out.redundancy = Lattice(L, s.a1, s.b1).redundancy();
    out.overlap = s.overlap;
    out.bounds = quilt_frame_bounds(quilt);
    out.report = reconstruct_random(quilt, seed, tol);
    out.ref_cond = s.cond;
    out.ref_iterations = s.iterations;
    return out;
  });
}

PreconditionResult precondition(std::uint64_t seed) {
  const Index L = kExperimentLength;
  const Quilt quilt = two_stripe_quilt(seed_frame(L, 8, 16, 1), seed_frame(L, 16, 8, 2), 1);
  PreconditionResult out;
  out.seed = seed;
  out.reference = random_signal<double>(L, seed);
  out.report = diag_precondition_reconstruct(quilt, out.reference);
  return out;
}

Region example2_region() { return Region::box(kExperimentLength, 36, 72, 36, 72); }

Example2Result example2(std::uint64_t seed, double tol, int threads) {
  struct Setup {
    Index a1, b1, a2, b2, delta;
    std::optional<double> cond;
    std::optional<int> iterations;
  };
  static const Setup setups[] = {
      {4, 8, 8, 4, 0, 1.5, 18},
      {4, 8, 8, 4, 8, 1.4, 17},
      {8, 16, 16, 8, 0, std::nullopt, std::nullopt},
      {8, 16, 16, 8, 8, std::nullopt, std::nullopt},
      {8, 16, 16, 8, 16, std::nullopt, std::nullopt},
  };
  const Index L = kExperimentLength;
  const Region omega = example2_region();
  auto cases = run_indexed<ReplacementCase>(std::size(setups), threads, [&](std::size_t i) {
    const Setup& s = setups[i];
    Replacement<double> rep = build_replacement(seed_frame(L, s.a1, s.b1, 1), seed_frame(L, s.a2, s.b2, 2), omega,
                                                enlarge_region(omega, s.delta, L));
    ReplacementCase out;
    out.label = "(" + std::to_string(s.a1) + "," + std::to_string(s.b1) + ")->(" + std::to_string(s.a2) + "," +
                std::to_string(s.b2) + ") delta=" + std::to_string(s.delta);
    out.redundancy = Lattice(L, s.a1, s.b1).redundancy();
    out.delta = s.delta;
    out.bounds = quilt_frame_bounds(rep.quilt);
    out.report = reconstruct_random(rep.quilt, seed, tol);
    out.plan = std::move(rep.plan);
    out.ref_cond = s.cond;
    out.ref_iterations = s.iterations;
    return out;
  });
  Example2Result result;
  for (std::size_t i = 0; i < cases.size(); ++i) (i < 2 ? result.high : result.low).push_back(std::move(cases[i]));
  return result;
}

}  // namespace quiltframe::experiments
