// Command-line front end: sweep a parameter grid to CSV/JSONL, run a single
// recovery or detection trial, or evaluate the low-degree bound at one point.
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sbmlab/detection.hpp"
#include "sbmlab/errors.hpp"
#include "sbmlab/graph_io.hpp"
#include "sbmlab/harness.hpp"
#include "sbmlab/it_recovery.hpp"
#include "sbmlab/lowdeg.hpp"
#include "sbmlab/model.hpp"
#include "sbmlab/recovery.hpp"
#include "sbmlab/rng.hpp"

namespace {

struct PointArgs {
  int64_t n = 0;
  int64_t q = 0;
  double d = 0.0;
  double lambda = 0.0;
  uint64_t seed = 0;
};

void add_point_options(CLI::App* cmd, PointArgs& args, bool with_seed = true) {
  cmd->add_option("--n", args.n, "number of vertices")->required();
  cmd->add_option("--q", args.q, "number of communities")->required();
  cmd->add_option("--d", args.d, "average degree")->required();
  cmd->add_option("--lambda", args.lambda, "signal strength")->required();
  if (with_seed) cmd->add_option("--seed", args.seed, "random seed");
}

sbmlab::RecoveryConfig schedule_or_fallback(const sbmlab::ModelParams& p,
                                            sbmlab::WalkPlan plan) {
  try {
    return sbmlab::choose_schedule(p, plan);
  } catch (const sbmlab::EmptyInterval&) {
    return sbmlab::fallback_schedule(p);
  }
}

int run_single_trial(const std::string& algo, const PointArgs& args, int64_t budget,
                     int32_t degree) {
  using Clock = std::chrono::steady_clock;
  const auto p = sbmlab::ModelParams::from_snr(args.n, args.q, args.d, args.lambda);

  if (algo == "lowdeg_bound") {
    std::cout << sbmlab::bound_report_json(sbmlab::corr_bound(degree, p)) << "\n";
    return 0;
  }

  sbmlab::RngStream rng(args.seed);
  const auto g = sbmlab::sample_sbm(p, rng.substream(0));
  if (algo == "detect") {
    std::cout << sbmlab::detection_json(sbmlab::detect_triangle(g, p), p, args.seed) << "\n";
    return 0;
  }

  const auto t0 = Clock::now();
  if (algo == "below_ks" || algo == "above_ks") {
    const bool below = algo == "below_ks";
    const auto cfg = schedule_or_fallback(
        p, below ? sbmlab::WalkPlan::MultiPart : sbmlab::WalkPlan::SinglePart);
    const auto report = below ? sbmlab::recover_below_ks(g, p, cfg, rng.substream(1))
                              : sbmlab::recover_above_ks(g, p, cfg, rng.substream(2));
    const double align = sbmlab::alignment(report.labels, g.truth, p.q);
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    std::cout << sbmlab::recovery_trial_json(p, cfg, args.seed, report, align, ms) << "\n";
    return 0;
  }
  if (algo == "inefficient") {
    const auto report = sbmlab::recover_inefficient(g, p, budget, rng.substream(3));
    const double align = sbmlab::alignment(report.labels, g.truth, p.q);
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    std::cout << sbmlab::it_trial_json(p, args.seed, report, align, ms) << "\n";
    return 0;
  }
  throw sbmlab::ConfigError("unknown algorithm '" + algo + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"block-model laboratory: samplers, recovery, detection, bounds"};
  app.require_subcommand(1);

  // --- sweep ---------------------------------------------------------------
  std::string config_path, csv_path, jsonl_path;
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep from a config file");
  sweep->add_option("--config", config_path, "key = value sweep description")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--csv", csv_path, "also write the aggregated CSV to this file");
  sweep->add_option("--jsonl", jsonl_path, "write one JSON line per trial to this file");

  // --- run -----------------------------------------------------------------
  std::string algo;
  PointArgs run_args;
  int64_t budget = 200000;
  int32_t degree = 8;
  auto* run = app.add_subcommand("run", "run one algorithm on one sampled instance");
  run->add_option("--algo", algo, "below_ks | above_ks | inefficient | detect | lowdeg_bound")
      ->required();
  add_point_options(run, run_args);
  run->add_option("--budget", budget, "partition-search budget");
  run->add_option("--degree", degree, "polynomial degree for the bound");

  // --- detect --------------------------------------------------------------
  PointArgs detect_args;
  std::string law = "sbm";
  auto* detect = app.add_subcommand("detect", "triangle-count distinguisher on a sample");
  add_point_options(detect, detect_args);
  detect->add_option("--law", law, "sample from: sbm | er")
      ->check(CLI::IsMember({"sbm", "er"}));

  // --- lowdeg --------------------------------------------------------------
  int64_t ld_n = 0, ld_q = 0;
  double ld_a = -1.0, ld_b = -1.0, ld_d = -1.0, ld_lambda = 0.0;
  int32_t ld_degree = 8;
  bool ld_exact = false;
  auto* lowdeg = app.add_subcommand("lowdeg", "low-degree correlation bound at one point");
  lowdeg->add_option("--n", ld_n, "number of vertices")->required();
  lowdeg->add_option("--q", ld_q, "number of communities")->required();
  lowdeg->add_option("--a", ld_a, "within-community edge rate");
  lowdeg->add_option("--b", ld_b, "cross-community edge rate");
  auto* ld_d_opt = lowdeg->add_option("--d", ld_d, "average degree");
  auto* ld_l_opt = lowdeg->add_option("--lambda", ld_lambda, "signal strength");
  lowdeg->add_option("--degree", ld_degree, "polynomial degree");
  lowdeg->add_flag("--exact", ld_exact,
                   "also compute the exact small-instance correlation (tiny n only)");

  // --- sample --------------------------------------------------------------
  PointArgs sample_args;
  std::string sample_law = "sbm", out_path;
  auto* sample = app.add_subcommand("sample", "write one sampled graph to a file");
  add_point_options(sample, sample_args);
  sample->add_option("--law", sample_law, "sample from: sbm | er")
      ->check(CLI::IsMember({"sbm", "er"}));
  sample->add_option("--out", out_path, "output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) {
      std::ifstream in(config_path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      const auto spec = sbmlab::parse_sweep_config(buffer.str());
      const auto records = sbmlab::run_sweep(spec);
      const std::string csv = sbmlab::phase_csv(records);
      std::cout << csv;
      if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw sbmlab::IoError("cannot write " + csv_path);
        out << csv;
      }
      if (!jsonl_path.empty()) {
        std::ofstream out(jsonl_path);
        if (!out) throw sbmlab::IoError("cannot write " + jsonl_path);
        for (const auto& r : records) out << sbmlab::trial_record_json(r) << "\n";
      }
      return sbmlab::error_row_count(records) == 0 ? 0 : 1;
    }

    if (run->parsed()) return run_single_trial(algo, run_args, budget, degree);

    if (detect->parsed()) {
      const auto p = sbmlab::ModelParams::from_snr(detect_args.n, detect_args.q,
                                                   detect_args.d, detect_args.lambda);
      sbmlab::RngStream rng(detect_args.seed);
      const auto g = law == "sbm" ? sbmlab::sample_sbm(p, rng.substream(0))
                                  : sbmlab::sample_er(detect_args.n, p.d, rng.substream(0));
      std::cout << sbmlab::detection_json(sbmlab::detect_triangle(g, p), p, detect_args.seed)
                << "\n";
      return 0;
    }

    if (lowdeg->parsed()) {
      const bool by_rates = ld_a >= 0.0 && ld_b >= 0.0;
      const bool by_snr = ld_d_opt->count() > 0 && ld_l_opt->count() > 0;
      if (by_rates == by_snr)
        throw sbmlab::ConfigError("give exactly one of (--a, --b) or (--d, --lambda)");
      const auto p = by_rates
                         ? sbmlab::ModelParams::from_rates(ld_n, ld_q, ld_a, ld_b)
                         : sbmlab::ModelParams::from_snr(ld_n, ld_q, ld_d, ld_lambda);
      auto report = sbmlab::corr_bound(ld_degree, p);
      if (ld_exact) report.corr_exact = sbmlab::corr_exact(p.n, p.q, p.a, p.b, ld_degree);
      std::cout << sbmlab::bound_report_json(report) << "\n";
      return 0;
    }

    if (sample->parsed()) {
      const auto p = sbmlab::ModelParams::from_snr(sample_args.n, sample_args.q,
                                                   sample_args.d, sample_args.lambda);
      sbmlab::RngStream rng(sample_args.seed);
      const auto g = sample_law == "sbm"
                         ? sbmlab::sample_sbm(p, rng.substream(0))
                         : sbmlab::sample_er(sample_args.n, p.d, rng.substream(0));
      sbmlab::save_graph_file(g, out_path);
      std::cout << "wrote " << out_path << " (" << g.edges.size() << " edges)\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
