// quiltframe: reproduces the quilted Gabor frame experiments and runs the
// verification suite.
//
//   quiltframe <figure1|table1|table2|precondition|example2|verify|run>
//              [--config path] [--seed N] [--out dir] [--tol 1e-8] [--threads 1]
//
// Exit codes: 0 success, 1 invariant or certification failure, 2 config error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "quiltframe/experiments.hpp"

namespace fs = std::filesystem;
namespace qx = quiltframe::experiments;
using quiltframe::Index;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

const char* kWindowNote =
    "windows: periodized Gaussian (tfr 0.75), tightened per frame before quilting [assumption]";

struct Options {
  std::string command;
  std::string config;
  std::uint64_t seed = qx::kDefaultSeed;
  bool seed_given = false;
  fs::path out = "quiltframe-out";
  double tol = 1e-8;
  bool tol_given = false;
  int threads = 1;
};

std::ofstream open_csv(const Options& opt, const std::string& name) {
  fs::create_directories(opt.out);
  const fs::path path = opt.out / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_history(const Options& opt, const std::string& name, const quiltframe::ReconstructionReport<double>& r) {
  auto out = open_csv(opt, name);
  out << "iteration,error\n";
  for (std::size_t k = 0; k < r.history.size(); ++k) out << (k + 1) << ',' << qx::format_sci(r.history[k]) << '\n';
}

std::string deviation(double measured, double reference) {
  std::ostringstream s;
  s << std::showpos << std::fixed << std::setprecision(1) << 100.0 * (measured - reference) / reference << '%';
  return s.str();
}

std::string slug(std::string label) {
  for (char& ch : label) {
    if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
  }
  return label;
}

int cmd_figure1(const Options& opt) {
  const qx::Quilt quilt = qx::figure1_quilt();
  {
    auto out = open_csv(opt, "figure1_lattice.csv");
    quiltframe::write_lattice_csv(out, quilt);
  }
  Index counts[2] = {0, 0};
  for (const auto& atom : quilt.atoms) ++counts[atom.frame_id];
  std::cout << "figure1: L=256, 4x4 tiles of 64x64, checkerboard assignment\n"
            << "  frame 0 lattice (a,b)=(4,16): " << counts[0] << " atoms\n"
            << "  frame 1 lattice (a,b)=(16,4): " << counts[1] << " atoms\n"
            << "  total " << quilt.size() << " atoms -> " << (opt.out / "figure1_lattice.csv").string() << '\n';
  return kExitOk;
}

int cmd_table(const Options& opt, bool iterations) {
  const auto cases = qx::stripe_cases(opt.seed, opt.tol, opt.threads);
  const char* name = iterations ? "table2" : "table1";
  std::cout << name << ": two-stripe quilts, L=144, seed " << opt.seed << ", tol " << qx::format_sci(opt.tol, 1) << '\n'
            << "  " << kWindowNote << '\n';
  auto csv = open_csv(opt, std::string(name) + ".csv");
  csv << "configuration,redundancy,overlap,A,B,cond,iterations,converged,ref_cond,ref_iterations\n";
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    std::cout << "  " << std::left << std::setw(28) << c.label << std::right << " redundancy "
              << qx::format_fixed(c.redundancy, 3);
    if (iterations) {
      std::cout << "  iterations " << std::setw(4) << c.report.iterations << " (reference " << c.ref_iterations << ", "
                << deviation(c.report.iterations, c.ref_iterations) << ")"
                << (c.report.converged ? "" : " NOT CONVERGED") << '\n';
      write_history(opt, "table2_history_" + std::to_string(i) + ".csv", c.report);
    } else {
      std::cout << "  cond " << qx::format_fixed(c.bounds.cond, 3) << " (reference " << qx::format_fixed(c.ref_cond, 1)
                << ", " << deviation(c.bounds.cond, c.ref_cond) << ")\n";
    }
    csv << c.label << ',' << qx::format_sci(c.redundancy) << ',' << (c.overlap ? 1 : 0) << ','
        << qx::format_sci(c.bounds.A) << ',' << qx::format_sci(c.bounds.B) << ',' << qx::format_sci(c.bounds.cond)
        << ',' << c.report.iterations << ',' << (c.report.converged ? 1 : 0) << ',' << qx::format_sci(c.ref_cond)
        << ',' << c.ref_iterations << '\n';
  }
  std::cout << "  cond = sqrt(B/A); iterations of the frame algorithm with relaxation 2/(A+B), update-norm stop\n";
  return kExitOk;
}

int cmd_precondition(const Options& opt) {
  const qx::PreconditionResult r = qx::precondition(opt.seed);
  std::cout << "precondition: low-redundancy overlap quilt (8,16)|(16,8), delta 1, L=144, seed " << opt.seed << '\n'
            << "  " << kWindowNote << '\n'
            << "  eps_plain     = " << qx::format_fixed(r.report.eps_plain, 4) << "   (reference "
            << qx::format_fixed(qx::PreconditionResult::ref_eps_plain, 4) << ")\n"
            << "  eps_corrected = " << qx::format_fixed(r.report.eps_corrected, 4) << "   (reference "
            << qx::format_fixed(qx::PreconditionResult::ref_eps_corrected, 4) << ")\n";
  auto csv = open_csv(opt, "precondition_samples.csv");
  csv << "t,r_re,r_im,rec_plain_re,rec_plain_im,rec_corrected_re,rec_corrected_im\n";
  for (Index t = 0; t < r.reference.size(); ++t) {
    csv << t << ',' << qx::format_sci(r.reference(t).real()) << ',' << qx::format_sci(r.reference(t).imag()) << ','
        << qx::format_sci(r.report.rec_plain(t).real()) << ',' << qx::format_sci(r.report.rec_plain(t).imag()) << ','
        << qx::format_sci(r.report.rec_corrected(t).real()) << ','
        << qx::format_sci(r.report.rec_corrected(t).imag()) << '\n';
  }
  return kExitOk;
}

int cmd_example2(const Options& opt) {
  const qx::Example2Result result = qx::example2(opt.seed, opt.tol, opt.threads);
  std::cout << "example2: replacing atoms in Omega = [36,108)x[36,108), L=144, seed " << opt.seed << '\n'
            << "  " << kWindowNote << '\n';
  auto csv = open_csv(opt, "example2.csv");
  csv << "configuration,redundancy,delta,atoms,A,B,cond,iterations,C,A1,certified,guaranteed_A\n";
  nlohmann::json plans = nlohmann::json::array();
  auto emit = [&](const qx::ReplacementCase& c, std::size_t index) {
    std::cout << "  " << std::left << std::setw(26) << c.label << std::right << " cond "
              << qx::format_fixed(c.bounds.cond, 3);
    if (c.ref_cond) std::cout << " (reference " << qx::format_fixed(*c.ref_cond, 1) << ")";
    std::cout << "  iterations " << std::setw(3) << c.report.iterations;
    if (c.ref_iterations) std::cout << " (reference " << *c.ref_iterations << ")";
    std::cout << "  C/A1 " << qx::format_fixed(c.plan.defect / c.plan.A1, 3)
              << (c.plan.certified ? " certified" : " uncertified") << '\n';
    csv << c.label << ',' << qx::format_sci(c.redundancy) << ',' << c.delta << ',' << (c.plan.F2.size()) << ','
        << qx::format_sci(c.bounds.A) << ',' << qx::format_sci(c.bounds.B) << ',' << qx::format_sci(c.bounds.cond)
        << ',' << c.report.iterations << ',' << qx::format_sci(c.plan.defect) << ',' << qx::format_sci(c.plan.A1)
        << ',' << (c.plan.certified ? 1 : 0) << ',' << qx::format_sci(c.plan.guaranteed_A) << '\n';
    write_history(opt, "example2_history_" + std::to_string(index) + "_" + slug(c.label) + ".csv", c.report);
    nlohmann::json plan = qx::plan_to_json(c.plan);
    plan["configuration"] = c.label;
    plans.push_back(plan);
  };
  std::cout << " high redundancy (4.5):\n";
  std::size_t index = 0;
  for (const auto& c : result.high) emit(c, index++);
  std::cout << " low redundancy (1.125), overlap sweep:\n";
  for (const auto& c : result.low) emit(c, index++);
  {
    auto out = open_csv(opt, "example2_plans.json");
    out << plans.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_verify() {
  const auto checks = qx::verify();
  int failures = 0;
  for (const auto& c : checks) {
    if (!c.passed) ++failures;
    std::cout << (c.passed ? "  pass " : "  FAIL ") << std::left << std::setw(14) << c.module << std::setw(30)
              << c.name << std::right << " L=" << std::setw(3) << c.L << "  measured " << qx::format_sci(c.measured, 3)
              << "  threshold " << qx::format_sci(c.threshold, 1) << '\n';
  }
  std::cout << "verify: " << (checks.size() - static_cast<std::size_t>(failures)) << "/" << checks.size()
            << " checks passed\n";
  return failures == 0 ? kExitOk : kExitFailure;
}

int cmd_run(const Options& opt) {
  if (opt.config.empty()) throw quiltframe::ConfigError("run needs --config");
  qx::ExperimentConfig cfg = qx::load_config(opt.config);
  if (opt.seed_given) cfg.seed = opt.seed;
  if (opt.tol_given) cfg.solver.tol = opt.tol;
  const qx::RunResult r = qx::run(cfg);
  std::cout << "run: " << opt.config << ", L=" << cfg.L << ", seed " << cfg.seed << '\n'
            << "  atoms " << r.quilt.size() << ", frames " << r.quilt.used_frames().size() << '\n'
            << "  A " << qx::format_sci(r.bounds.A) << "  B " << qx::format_sci(r.bounds.B) << "  cond "
            << qx::format_fixed(r.bounds.cond, 4) << '\n'
            << "  frame algorithm: " << r.report.iterations << " iterations"
            << (r.report.converged ? "" : " (not converged)") << ", eps "
            << qx::format_fixed(r.report.epsilon.value_or(0.0), 4) << '\n';
  {
    auto out = open_csv(opt, "lattice.csv");
    quiltframe::write_lattice_csv(out, r.quilt);
  }
  write_history(opt, "history.csv", r.report);
  if (r.plan) {
    std::cout << "  replacement: C " << qx::format_sci(r.plan->defect) << ", A1 " << qx::format_sci(r.plan->A1)
              << (r.plan->certified ? ", certified, guaranteed A " + qx::format_sci(r.plan->guaranteed_A)
                                    : ", uncertified")
              << '\n';
    auto out = open_csv(opt, "plan.json");
    out << qx::plan_to_json(*r.plan).dump(2) << '\n';
    if (!r.plan->certified) return kExitFailure;
  }
  return r.report.converged ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quilted Gabor frame experiments"};
  Options opt;
  app.add_option("command", opt.command, "figure1 | table1 | table2 | precondition | example2 | verify | run")
      ->required()
      ->check(CLI::IsMember({"figure1", "table1", "table2", "precondition", "example2", "verify", "run"}));
  app.add_option("--config", opt.config, "JSON experiment config (for run)");
  auto* seed = app.add_option("--seed", opt.seed, "random seed");
  app.add_option("--out", opt.out, "output directory for CSV files")->capture_default_str();
  auto* tol = app.add_option("--tol", opt.tol, "frame algorithm tolerance")->capture_default_str();
  app.add_option("--threads", opt.threads, "worker threads for independent configurations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  opt.seed_given = seed->count() > 0;
  opt.tol_given = tol->count() > 0;
  if (!(opt.tol > 0 && opt.tol < 1)) {
    std::cerr << "error: --tol must lie in (0, 1)\n";
    return kExitConfig;
  }

  try {
    if (opt.command == "figure1") return cmd_figure1(opt);
    if (opt.command == "table1") return cmd_table(opt, false);
    if (opt.command == "table2") return cmd_table(opt, true);
    if (opt.command == "precondition") return cmd_precondition(opt);
    if (opt.command == "example2") return cmd_example2(opt);
    if (opt.command == "verify") return cmd_verify();
    return cmd_run(opt);
  } catch (const quiltframe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
