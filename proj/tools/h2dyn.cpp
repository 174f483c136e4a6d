// h2dyn: calibrate | groundstate | propagate | analyze | pipeline
//
// Exit codes:
//   0  success
//   1  unexpected internal error
//   2  bad command line, configuration or input file (missing reference, parse error)
//   3  calibration bracket failure or imaginary-time non-convergence
//   4  numerical instability during propagation
//   5  analyze on a run directory without a complete manifest
//   6  checkpoint digest does not match the configuration (see --force-resume)

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "h2dyn/error.hpp"
#include "h2dyn/fft.hpp"
#include "h2dyn/pipeline.hpp"

namespace {

enum Exit { ok = 0, internal = 1, input = 2, convergence = 3, stability = 4, incomplete = 5, mismatch = 6 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"H2 wave-packet dynamics in intense few-cycle laser pulses"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 0;
  bool resume = false, force = false, quiet = false;
  std::string output;

  app.add_option("--config", config_path, "configuration file");
  app.add_option("--set", overrides, "override a key, section.key=value (repeatable)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--output", output, "output directory (overrides paths.output_dir)");
  app.add_flag("--resume", resume, "continue propagate from the run checkpoint");
  app.add_flag("--force-resume", force, "resume even if the checkpoint digest differs");
  app.add_flag("-q,--quiet", quiet, "no progress output");

  auto* calibrate = app.add_subcommand("calibrate", "fit alpha(R), beta(R) to the reference curves");
  auto* groundstate = app.add_subcommand("groundstate", "relax the 3D ground state");
  auto* propagate = app.add_subcommand("propagate", "run the laser-driven propagation");
  auto* analyze = app.add_subcommand("analyze", "derive KER peaks and checks from a finished run");
  auto* pipeline = app.add_subcommand("pipeline", "calibrate, groundstate, propagate, analyze (cached)");
  std::string run_dir;
  analyze->add_option("run_dir", run_dir, "run directory (default: configured output directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : input;
  }

  h2dyn::StageOptions opts;
  opts.resume = resume || force;
  opts.allow_digest_mismatch = force;
  if (!quiet)
    opts.log = [](const std::string& m) {
      std::cout << m << std::endl;
    };

  try {
    if (!output.empty()) overrides.push_back("paths.output_dir=" + output);
    if (threads > 0) overrides.push_back("run.threads=" + std::to_string(threads));
    const h2dyn::RunConfig cfg =
        config_path.empty() ? h2dyn::parse_config("", overrides) : h2dyn::load_config(config_path, overrides);
    h2dyn::set_fft_threads(cfg.threads);

    if (*calibrate) h2dyn::run_calibrate(cfg, opts);
    if (*groundstate) h2dyn::run_groundstate(cfg, opts);
    if (*propagate) h2dyn::run_propagate(cfg, opts);
    if (*analyze) h2dyn::run_analyze(run_dir.empty() ? cfg.paths.output_dir : std::filesystem::path(run_dir), opts);
    if (*pipeline) h2dyn::run_pipeline(cfg, opts);
    return ok;
  } catch (const h2dyn::ParseError& e) {
    std::cerr << "h2dyn: configuration error (" << e.key() << "): " << e.what() << '\n';
    return input;
  } catch (const h2dyn::IncompleteRunError& e) {
    std::cerr << "h2dyn: " << e.what() << '\n';
    return incomplete;
  } catch (const h2dyn::DigestMismatch& e) {
    std::cerr << "h2dyn: " << e.what() << "\n  (pass --force-resume to resume anyway)\n";
    return mismatch;
  } catch (const h2dyn::CalibrationError& e) {
    std::cerr << "h2dyn: calibration failed at R = " << e.knot() << ": " << e.what() << '\n';
    return convergence;
  } catch (const h2dyn::ConvergenceError& e) {
    std::cerr << "h2dyn: " << e.what() << " (last energy " << e.last_energy() << ", residual " << e.residual()
              << ")\n";
    return convergence;
  } catch (const h2dyn::StabilityError& e) {
    std::cerr << "h2dyn: unstable propagation: " << e.what() << '\n';
    return stability;
  } catch (const h2dyn::DomainError& e) {
    std::cerr << "h2dyn: " << e.what() << '\n';
    return input;
  } catch (const h2dyn::ConfigError& e) {
    std::cerr << "h2dyn: configuration error: " << e.what() << '\n';
    return input;
  } catch (const h2dyn::IoError& e) {
    std::cerr << "h2dyn: " << e.what() << '\n';
    return input;
  } catch (const std::exception& e) {
    std::cerr << "h2dyn: internal error: " << e.what() << '\n';
    return internal;
  }
}
