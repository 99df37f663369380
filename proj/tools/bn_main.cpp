#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bn/config.hpp"
#include "bn/diagnostics.hpp"
#include "bn/equilibrium.hpp"
#include "bn/integrator.hpp"
#include "bn/io.hpp"
#include "bn/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace bn;

namespace {

// Exit codes: 0 success, 1 bad input, 2 numerical failure.
constexpr int kBadInput = 1;
constexpr int kNumeric = 2;

json moments_json(const DiagnosticsRecord& r) {
  return {{"time", r.time},   {"mass", r.mass},   {"energy", r.energy}, {"l1_total", r.l1_total},
          {"l1_local", r.l1_local}, {"wsup", r.wsup}, {"supxf", r.supxf},   {"gbeta", r.gbeta}};
}

json fit_json(const BlowupFit& f) {
  return {{"t_star", f.t_star},
          {"c_offset", f.c_offset},
          {"t_lo", f.t_lo},
          {"t_hi", f.t_hi},
          {"residual", f.residual},
          {"exponent", f.exponent},
          {"window_lo", f.window_lo},
          {"window_hi", f.window_hi},
          {"exponent_residual", f.exponent_residual},
          {"origin_exponent", f.origin_exponent}};
}

// A summary.json written by `simulate` is accepted in place of a config file.
RunConfig read_any_config(const std::string& path) {
  if (fs::path(path).extension() != ".json") return load_config(path);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path, 0);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what(), 0);
  }
  if (!doc.contains("config") || !doc["config"].is_object()) throw ConfigError(path + ": no \"config\" object", 0);
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& [key, value] : doc["config"].items()) {
    if (!value.is_string()) throw ConfigError(path + ": config." + key + " must be a string", 0);
    entries.emplace_back(key, value.get<std::string>());
  }
  return config_from_entries(entries);
}

int cmd_simulate(const std::string& config_path) {
  RunConfig cfg;
  InitialState init;
  try {
    cfg = read_any_config(config_path);
    const std::string base = fs::path(config_path).parent_path().string();
    init = make_initial(cfg, base.empty() ? "." : base);
  } catch (const ConfigError& e) {
    std::cerr << config_path;
    if (e.line() > 0) std::cerr << ':' << e.line();
    std::cerr << ": " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return kBadInput;
  }

  RunOptions options;
  options.scheme = cfg.scheme;
  options.quadrature = cfg.quadrature;
  options.remap = cfg.remap_on;
  options.diagnostics = cfg.diagnostics;
  options.snapshot_stride = cfg.snapshot_stride;
  options.resume = init.resume;
  RunResult result = run(init.dist, cfg.controls, options);
  const Trajectory& tr = result.trajectory;

  const fs::path out(cfg.output_dir);
  fs::create_directories(out / "snapshots");
  {
    std::ofstream csv(out / "diagnostics.csv");
    write_diagnostics_csv(csv, tr.records);
  }
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "%04zu.dat", k);
    save_checkpoint((out / "snapshots" / name).string(), tr.snapshots[k]);
  }
  if (!tr.snapshots.empty()) save_checkpoint((out / "final.dat").string(), tr.snapshots.back(), result.state);

  json summary;
  summary["stop_reason"] = to_string(tr.stop_reason);
  if (!tr.fault_message.empty()) summary["fault"] = tr.fault_message;
  summary["steps"] = tr.records.empty() ? 0 : tr.records.size() - 1;
  summary["remap_refusals"] = result.remap_refusals;
  if (!tr.records.empty()) {
    summary["initial"] = moments_json(tr.records.front());
    summary["final"] = moments_json(tr.records.back());
  }
  if (tr.stop_reason == StopReason::blowup_threshold) {
    try {
      summary["blowup_fit"] = fit_json(blowup_fit(tr, cfg.diagnostics.delta));
    } catch (const std::exception& e) {
      summary["blowup_fit"] = {{"error", e.what()}};
    }
  }
  json config = json::object();
  for (const auto& [key, value] : config_entries(cfg)) config[key] = value;
  summary["config"] = config;
  std::ofstream(out / "summary.json") << summary.dump(2) << '\n';

  std::cout << to_string(tr.stop_reason) << " t=" << (tr.records.empty() ? 0.0 : tr.records.back().time) << '\n';
  if (tr.stop_reason == StopReason::numeric_fault) {
    std::cerr << "numeric fault: " << tr.fault_message << '\n';
    return kNumeric;
  }
  return 0;
}

int cmd_equilibrium(double m, double e) {
  if (!(m > 0.0) || !(e > 0.0)) {
    std::cerr << "mass and energy must be positive\n";
    return kNumeric;
  }
  try {
    const BEParams p = fit_equilibrium(m, e);
    json out = {{"alpha", p.alpha},   {"beta", p.beta}, {"m0", p.m0}, {"supercritical", p.supercritical},
                {"critical_mass", critical_mass(e)}};
    std::cout << out.dump(2) << '\n';
    return 0;
  } catch (const std::exception& ex) {
    std::cerr << "equilibrium fit failed: " << ex.what() << '\n';
    return kNumeric;
  }
}

int cmd_verify(const std::string& level_name) {
  const Level level = level_from_string(level_name);
  json report;
  report["level"] = level_name;
  report["checks"] = json::array();
  bool all = true;
  for (const CheckResult& c : run_verify(level)) {
    json metrics = json::object();
    for (const auto& [k, v] : c.metrics) metrics[k] = v;
    report["checks"].push_back(
        {{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}, {"seconds", c.seconds}, {"metrics", metrics}});
    all = all && c.pass;
  }
  report["pass"] = all;
  std::cout << report.dump(2) << '\n';
  return all ? 0 : 1;
}

int cmd_blowup_fit(const std::string& csv_path, double delta, const std::string& snapshot) {
  std::ifstream in(csv_path);
  if (!in) {
    std::cerr << "cannot open " << csv_path << '\n';
    return kBadInput;
  }
  Trajectory tr;
  try {
    tr.records = read_diagnostics_csv(in);
    tr.delta = delta;
    tr.stop_reason = StopReason::blowup_threshold;
    if (!snapshot.empty()) tr.snapshots.push_back(load_checkpoint(snapshot).dist);
    std::cout << fit_json(blowup_fit(tr, delta)).dump(2) << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kNumeric;
  }
}

int cmd_norms(const std::string& path, double beta, double gamma, double alpha, double delta) {
  try {
    const Distribution d = load_checkpoint(path).dist;
    json out = {{"time", d.time},
                {"mass", mass(d)},
                {"energy", energy(d)},
                {"l1_total", integrate(d, 0.0)},
                {"l1_local", local_mass(d, delta)},
                {"wsup", weighted_sup(d, alpha, gamma)},
                {"supxf", sup_xf(d)},
                {"gbeta", gbeta_norm(d, beta)}};
    std::cout << out.dump(2) << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kBadInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isotropic Boltzmann-Nordheim solver"};
  app.require_subcommand(1);

  std::string config_path;
  auto* simulate = app.add_subcommand("simulate", "run a configured simulation");
  simulate->add_option("config", config_path, "config file or summary.json")->required();

  double m = 0.0, e = 0.0;
  auto* equilibrium = app.add_subcommand("equilibrium", "fit equilibrium parameters to mass and energy");
  equilibrium->add_option("--mass", m)->required();
  equilibrium->add_option("--energy", e)->required();

  std::string level = "fast";
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_option("--level", level)->check(CLI::IsMember({"fast", "full"}));

  std::string csv_path, snapshot;
  double delta = 1.0;
  auto* fit = app.add_subcommand("blowup-fit", "fit the blow-up time from a diagnostics file");
  fit->add_option("diagnostics", csv_path)->required();
  fit->add_option("--delta", delta)->required();
  fit->add_option("--snapshot", snapshot, "last snapshot, for the profile exponent");

  std::string norm_path;
  double beta = 1.2, gamma = 9.0, alpha = 0.0, norm_delta = 1.0;
  auto* norms = app.add_subcommand("norms", "norms of a snapshot");
  norms->add_option("snapshot", norm_path)->required();
  norms->add_option("--beta", beta)->required();
  norms->add_option("--gamma", gamma)->required();
  norms->add_option("--alpha", alpha)->required();
  norms->add_option("--delta", norm_delta);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? 0 : kBadInput;
  }

  if (*simulate) return cmd_simulate(config_path);
  if (*equilibrium) return cmd_equilibrium(m, e);
  if (*verify) return cmd_verify(level);
  if (*fit) return cmd_blowup_fit(csv_path, delta, snapshot);
  return cmd_norms(norm_path, beta, gamma, alpha, norm_delta);
}
