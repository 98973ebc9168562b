// Experiment driver: seeded, reproducible subcommands emitting JSON or CSV.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "popsim/engine.hpp"
#include "popsim/experiments.hpp"
#include "popsim/privacy.hpp"
#include "popsim/version.hpp"

using nlohmann::json;
using namespace popsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvariant = 2;

struct CliOptions {
  ExperimentConfig cfg;
  std::vector<std::uint32_t> sizes;  // --n (one or more values)
  std::string attack;
  std::string out_path;
  std::string trace_path;
  std::string format = "json";
  std::vector<double> d_values{0.5, 1.0, 2.0, 4.0, 8.0};
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << text;
  if (text.empty() || text.back() != '\n') f << '\n';
}

json config_json(const ExperimentConfig& cfg) {
  json j{{"protocol", cfg.protocol}, {"n", cfg.n},
         {"k", cfg.k},               {"r", cfg.r},
         {"seed", cfg.seed},         {"trials", cfg.trials},
         {"budget", cfg.budget},     {"m", cfg.clock_phases},
         {"p_m1", cfg.p_m1},         {"adversary", cfg.adversary},
         {"leader", cfg.leader}};
  if (!cfg.inputs.empty()) j["inputs"] = cfg.inputs;
  return j;
}

json envelope(const std::string& command, const CliOptions& opt) {
  return json{{"command", command},
              {"version", std::string(kVersion)},
              {"seed", opt.cfg.seed},
              {"config", config_json(opt.cfg)}};
}

json report_json(const AttackReport& r) {
  return json{{"protocol", r.protocol},
              {"attack", r.attack},
              {"n", r.n},
              {"k", r.k},
              {"trials", r.trials},
              {"successes", r.successes},
              {"accuracy", r.accuracy},
              {"baseline", r.baseline},
              {"tv_distance", r.tv_distance},
              {"p_value", r.p_value},
              {"threshold", r.threshold},
              {"verdict", r.verdict}};
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream os;
  os << "feature,count\n";
  std::vector<std::pair<std::string, std::uint64_t>> rows(h.bins.begin(), h.bins.end());
  std::sort(rows.begin(), rows.end());
  for (const auto& [feature, count] : rows) os << '"' << feature << "\"," << count << '\n';
  return os.str();
}

int cmd_run(const CliOptions& opt) {
  ExperimentConfig cfg = opt.cfg;
  cfg.n = opt.sizes.front();
  RunSummary sum = run_once(cfg, !opt.trace_path.empty());
  json j = envelope("run", opt);
  j["config"]["n"] = cfg.n;
  j["converged"] = sum.converged;
  j["steps"] = sum.steps;
  j["parallel_time"] = sum.parallel_time;
  j["output"] = sum.output ? json(*sum.output) : json(nullptr);
  if (sum.answer) j["answer"] = *sum.answer;
  j["ground_truth"] = sum.ground_truth;
  j["agree"] = sum.agree;
  j["inputs"] = sum.inputs;
  if (!opt.trace_path.empty()) {
    std::ofstream f(opt.trace_path);
    if (!f) throw std::runtime_error("cannot open trace file: " + opt.trace_path);
    for (const auto& rec : sum.trace) {
      f << json{{"step", rec.step}, {"i", rec.initiator}, {"j", rec.responder}}.dump() << '\n';
    }
  }
  write_text(opt.out_path, j.dump(2));
  return kExitOk;
}

int cmd_convergence(const CliOptions& opt) {
  ExperimentConfig cfg = opt.cfg;
  if (cfg.trials < 30) throw CLI::ValidationError("--trials", "need at least 30 trials per n");
  ConvergenceResult res = convergence_sweep(cfg, opt.sizes);
  if (opt.format == "csv") {
    std::ostringstream os;
    os << "n,trials,unconverged,median_steps,q1_steps,q3_steps\n";
    for (const auto& row : res.rows) {
      os << row.n << ',' << row.trials << ',' << row.unconverged << ',' << row.median_steps
         << ',' << row.q1_steps << ',' << row.q3_steps << '\n';
    }
    if (res.alpha)
      os << "# fit alpha=" << *res.alpha << " alpha_logn=" << *res.alpha_logn
         << " log_c=" << *res.log_c << '\n';
    write_text(opt.out_path, os.str());
    return kExitOk;
  }
  json j = envelope("convergence", opt);
  j["rows"] = json::array();
  for (const auto& row : res.rows) {
    j["rows"].push_back(json{{"n", row.n},
                             {"trials", row.trials},
                             {"unconverged", row.unconverged},
                             {"median_steps", row.median_steps},
                             {"q1_steps", row.q1_steps},
                             {"q3_steps", row.q3_steps}});
  }
  j["alpha"] = res.alpha ? json(*res.alpha) : json(nullptr);
  j["alpha_logn"] = res.alpha_logn ? json(*res.alpha_logn) : json(nullptr);
  write_text(opt.out_path, j.dump(2));
  return kExitOk;
}

int cmd_privacy(const CliOptions& opt) {
  ExperimentConfig cfg = opt.cfg;
  cfg.n = opt.sizes.front();
  json j = envelope("privacy", opt);
  j["config"]["n"] = cfg.n;
  j["attack"] = opt.attack;

  if (opt.attack == "freshness") {
    double closed = freshness_probability(cfg.n);
    double mc = freshness_estimate(cfg.n, cfg.trials, cfg.seed);
    j["closed_form"] = closed;
    j["monte_carlo"] = mc;
    j["abs_error"] = std::abs(closed - mc);
    write_text(opt.out_path, j.dump(2));
    return kExitOk;
  }

  if (opt.attack == "first-partner") {
    AttackReport rep;
    if (cfg.protocol == "plain") {
      rep = first_partner_plain(cfg.n, cfg.k, cfg.r, cfg.p_m1, cfg.trials, cfg.adversary,
                                cfg.seed);
    } else if (cfg.protocol == "masked") {
      rep = first_partner_masked(cfg.n, cfg.k, cfg.clock_phases, cfg.trials, cfg.adversary,
                                 cfg.seed);
    } else {
      throw CLI::ValidationError("--protocol", "first-partner needs plain or masked");
    }
    j["report"] = report_json(rep);
    write_text(opt.out_path, j.dump(2));
    return kExitOk;
  }

  if (opt.attack == "view-distribution") {
    auto [ia, ib] = distinguisher_input_pair(cfg.n, cfg.k, cfg.adversary, cfg.seed);
    ViewDistConfig vd;
    vd.n = cfg.n;
    vd.k = cfg.k;
    vd.inputs_a = ia;
    vd.inputs_b = ib;
    vd.adversary = cfg.adversary;
    vd.trials = cfg.trials;
    vd.p_m1 = cfg.p_m1;
    vd.clock_phases = cfg.clock_phases;
    vd.seed = cfg.seed;
    ViewDistResult res;
    if (cfg.protocol == "plain") {
      res = view_distribution_plain(vd);
    } else if (cfg.protocol == "masked") {
      res = view_distribution_masked(vd);
    } else {
      throw CLI::ValidationError("--protocol", "view-distribution needs plain or masked");
    }
    if (opt.format == "csv") {
      write_text(opt.out_path, histogram_csv(res.arm_a));
      if (!opt.out_path.empty() && opt.out_path != "-")
        write_text(opt.out_path + ".arm2", histogram_csv(res.arm_b));
      return kExitOk;
    }
    j["report"] = report_json(res.report);
    j["inputs_a"] = ia;
    j["inputs_b"] = ib;
    write_text(opt.out_path, j.dump(2));
    return kExitOk;
  }

  if (opt.attack == "p2p-uniformity") {
    TransferTestResult res = transfer_test(cfg.n, cfg.k, cfg.trials, cfg.seed);
    double min_p = std::min({res.handoff_mask.p_value, res.committed_mask.p_value,
                             res.idle_mask.p_value});
    j["report"] = json{
        {"protocol", "p2p"},
        {"attack", "p2p-uniformity"},
        {"n", cfg.n},
        {"k", cfg.k},
        {"trials", res.trials},
        {"delivered", res.delivered},
        {"undelivered_runs", res.undelivered_runs},
        {"delivery_rate",
         static_cast<double>(res.delivered) / static_cast<double>(res.trials)},
        {"handoff_mask_p", res.handoff_mask.p_value},
        {"committed_mask_p", res.committed_mask.p_value},
        {"idle_mask_p", res.idle_mask.p_value},
        {"verdict", min_p > 0.001 ? "no-evidence" : "leaks"},
    };
    write_text(opt.out_path, j.dump(2));
    return kExitOk;
  }

  throw CLI::ValidationError("--attack", "unknown attack: " + opt.attack);
}

int cmd_probe_bench(const CliOptions& opt) {
  ExperimentConfig cfg = opt.cfg;
  cfg.n = opt.sizes.front();
  std::vector<ProbeBenchPoint> points = probe_bench(cfg.n, opt.d_values, cfg.trials, cfg.seed);
  json j = envelope("probe-bench", opt);
  j["config"]["n"] = cfg.n;
  j["points"] = json::array();
  for (const auto& p : points) {
    j["points"].push_back(json{{"d", p.d}, {"rounds", p.rounds}, {"accuracy", p.accuracy}});
  }
  write_text(opt.out_path, j.dump(2));
  return kExitOk;
}

int cmd_p2p_test(const CliOptions& opt) {
  ExperimentConfig cfg = opt.cfg;
  cfg.n = opt.sizes.front();
  TransferTestResult res = transfer_test(cfg.n, cfg.k, cfg.trials, cfg.seed);
  json j = envelope("p2p-test", opt);
  j["config"]["n"] = cfg.n;
  j["trials"] = res.trials;
  j["delivered"] = res.delivered;
  j["undelivered_runs"] = res.undelivered_runs;
  j["delivery_rate"] = static_cast<double>(res.delivered) / static_cast<double>(res.trials);
  j["handoff_mask"] = json{{"statistic", res.handoff_mask.statistic},
                           {"p_value", res.handoff_mask.p_value},
                           {"samples", res.handoff_mask.samples}};
  j["committed_mask"] = json{{"statistic", res.committed_mask.statistic},
                             {"p_value", res.committed_mask.p_value},
                             {"samples", res.committed_mask.samples}};
  j["idle_mask"] = json{{"statistic", res.idle_mask.statistic},
                        {"p_value", res.idle_mask.p_value},
                        {"samples", res.idle_mask.samples}};
  write_text(opt.out_path, j.dump(2));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Population-protocol simulator and privacy laboratory"};
  app.require_subcommand(1);

  CliOptions opt;
  opt.sizes = {16};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--protocol", opt.cfg.protocol, "Protocol id: plain | masked")
        ->capture_default_str();
    sub->add_option("--n", opt.sizes, "Population size(s)")->capture_default_str();
    sub->add_option("--k", opt.cfg.k, "Modulus (2..64)")->capture_default_str();
    sub->add_option("--r", opt.cfg.r, "Target remainder")->capture_default_str();
    sub->add_option("--seed", opt.cfg.seed, "Root seed (mandatory for reproducibility)")
        ->required();
    sub->add_option("--trials", opt.cfg.trials, "Trial count")->capture_default_str();
    sub->add_option("--budget", opt.cfg.budget, "Step budget (negative = default)")
        ->capture_default_str();
    sub->add_option("--m", opt.cfg.clock_phases, "Phase clock phases")->capture_default_str();
    sub->add_option("--p-m1", opt.cfg.p_m1, "Unit-transfer rule weight for plain protocol")
        ->capture_default_str();
    sub->add_option("--adversary", opt.cfg.adversary, "Observer agent index")
        ->capture_default_str();
    sub->add_option("--leader", opt.cfg.leader, "Leader index (-1 = auto)")
        ->capture_default_str();
    sub->add_option("--inputs", opt.cfg.inputs, "Fixed input values (comma separated)")
        ->delimiter(',');
    sub->add_option("--out", opt.out_path, "Output path (default stdout)");
    sub->add_option("--format", opt.format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
  };

  CLI::App* run = app.add_subcommand("run", "Execute one protocol run");
  add_common(run);
  run->add_option("--trace-out", opt.trace_path, "Write the interaction trace as JSON lines");

  CLI::App* conv = app.add_subcommand("convergence", "Step statistics and scaling fit over n");
  add_common(conv);

  CLI::App* priv = app.add_subcommand("privacy", "Run a privacy experiment");
  add_common(priv);
  priv->add_option("--attack", opt.attack,
                   "first-partner | view-distribution | p2p-uniformity | freshness")
      ->required();

  CLI::App* probe = app.add_subcommand("probe-bench", "Probe accuracy vs round-length factor d");
  add_common(probe);
  probe->add_option("--d", opt.d_values, "Round length factors to sweep")->delimiter(',');

  CLI::App* p2p = app.add_subcommand("p2p-test", "Transfer delivery and uniformity test");
  add_common(p2p);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (opt.sizes.empty()) throw std::invalid_argument("--n must not be empty");
    if (run->parsed()) return cmd_run(opt);
    if (conv->parsed()) return cmd_convergence(opt);
    if (priv->parsed()) return cmd_privacy(opt);
    if (probe->parsed()) return cmd_probe_bench(opt);
    if (p2p->parsed()) return cmd_p2p_test(opt);
    return kExitUsage;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  }
}
