#pragma once

// Reproducible experiment presets and the JSON-configured runner behind the
// quiltframe command line tool. Everything here works in double precision.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "quiltframe/constructions.hpp"
#include "quiltframe/gabor.hpp"
#include "quiltframe/quilt.hpp"
#include "quiltframe/reconstruct.hpp"

namespace quiltframe::experiments {

using Frame = GaborFrame<double>;
using Quilt = QuiltedSystem<double>;
using Bounds = FrameBounds<double>;

/// Signal length of the two-frame experiments.
inline constexpr Index kExperimentLength = 144;
/// Width of the seed Gaussian for the experiment windows (see README).
inline constexpr double kSeedTfr = 0.75;
inline constexpr std::uint64_t kDefaultSeed = 2009;

/// Periodized Gaussian seed window, optionally replaced by its canonical tight window.
Frame seed_frame(Index L, Index a, Index b, int id, double tfr = kSeedTfr, bool tighten = true);

/// Two time stripes [0, L/2) and [L/2, L), frame 1 left and frame 2 right,
/// each grown by delta samples.
Quilt two_stripe_quilt(const Frame& left, const Frame& right, Index delta);

// ---------------------------------------------------------------------------
// Figure 1: quilted lattice of two frames on a checkerboard of tiles.

struct Figure1Setup {
  Index L = 256;
  Index tile = 64;
  Lattice lattice0{256, 4, 16};
  Lattice lattice1{256, 16, 4};
};

Quilt figure1_quilt(const Figure1Setup& setup = {});

// ---------------------------------------------------------------------------
// Two-stripe quilts: condition numbers and frame-algorithm iterations.

struct StripeCase {
  std::string label;
  double redundancy = 0;
  bool overlap = false;
  Bounds bounds;
  ReconstructionReport<double> report;
  double ref_cond = 0;
  int ref_iterations = 0;
};

/// Redundancy 4.5 (a,b) = (4,8) | (8,4) and 1.125 (8,16) | (16,8), each
/// without (delta 0) and with (delta 1) overlap, in that order.
std::vector<StripeCase> stripe_cases(std::uint64_t seed, double tol, int threads = 1);

// ---------------------------------------------------------------------------
// Diagonal preconditioning on the low-redundancy overlap quilt.

struct PreconditionResult {
  std::uint64_t seed = 0;
  Signal<double> reference;
  PreconditionReport<double> report;
  static constexpr double ref_eps_plain = 0.2239;
  static constexpr double ref_eps_corrected = 0.032;
};

PreconditionResult precondition(std::uint64_t seed);

// ---------------------------------------------------------------------------
// Replacement of the atoms in a square region.

struct ReplacementCase {
  std::string label;
  double redundancy = 0;
  Index delta = 0;
  Bounds bounds;
  ReconstructionReport<double> report;
  ReplacementPlan<double> plan;
  std::optional<double> ref_cond;
  std::optional<int> ref_iterations;
};

struct Example2Result {
  std::vector<ReplacementCase> high;  // delta 0, 8
  std::vector<ReplacementCase> low;   // delta 0, 8, 16
};

/// Omega = [36, 108) x [36, 108) at L = 144.
Region example2_region();
Example2Result example2(std::uint64_t seed, double tol, int threads = 1);

// ---------------------------------------------------------------------------
// Verification suite.

struct Check {
  std::string module;
  std::string name;
  Index L = 0;
  double measured = 0;
  double threshold = 0;
  bool passed = false;
};

std::vector<Check> verify();

// ---------------------------------------------------------------------------
// JSON experiment configs.

struct FrameSpec {
  int id = 0;
  std::string window = "gaussian";  // gaussian | truncated_gaussian | raised_cosine
  double tfr = 1.0;
  Index half_width = 0;
  Index a = 1;
  Index b = 1;
  bool tighten = true;
};

struct PartitionSpec {
  std::string type = "stripes";  // stripes | tiles | replacement
  std::vector<Index> boundaries;
  Index tile = 0;
  // replacement: Omega as a box, Omega* = enlarge(Omega, omega_star_delta) or chosen automatically
  Index box_x = 0;
  Index box_width = 0;
  Index box_omega = 0;
  Index box_height = 0;
  std::optional<Index> omega_star_delta;
};

struct ExperimentConfig {
  Index L = kExperimentLength;
  std::vector<FrameSpec> frames;
  PartitionSpec partition;
  std::vector<std::pair<int, int>> assignment;
  Index delta = 0;
  FrameAlgoConfig solver;
  std::uint64_t seed = kDefaultSeed;
};

/// Throws ConfigError on missing or inconsistent fields.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunResult {
  Quilt quilt;
  Bounds bounds;
  ReconstructionReport<double> report;
  std::optional<ReplacementPlan<double>> plan;
};

RunResult run(const ExperimentConfig& config);

/// Builds the frames of a config (window generation and optional tightening).
std::vector<Frame> build_frames(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Serialization helpers.

nlohmann::json region_to_json(const Region& region);
nlohmann::json plan_to_json(const ReplacementPlan<double>& plan);
std::string format_fixed(double value, int decimals);
/// Scientific notation; the default precision round-trips a double.
std::string format_sci(double value, int digits = 17);

}  // namespace quiltframe::experiments
