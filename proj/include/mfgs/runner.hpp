#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "mfgs/config.hpp"
#include "mfgs/horizon.hpp"
#include "mfgs/stationary.hpp"
#include "mfgs/verification.hpp"

namespace mfgs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitConvergenceFailure = 3;
inline constexpr int kExitVerificationFailure = 4;

namespace detail {

inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline json to_json(const Vec& v) { return json(v); }

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const KKTReport& kkt) {
  return {{"lambda", to_json(Vec(kkt.lambda))},
          {"mu", to_json(kkt.mu)},
          {"stationarity_residual", kkt.stationarity_residual},
          {"complementarity_residual", kkt.complementarity_residual}};
}

inline void write_text(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InvalidInputError("cannot write output file " + path.string());
  out << text;
}

inline void write_json(const std::filesystem::path& path, const json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

inline void write_trajectory_csv(const std::filesystem::path& path,
                                 const HorizonSolution& sol, int s, int N) {
  std::string text = "time,state,m,U";
  for (int i = 1; i <= s; ++i)
    for (int j = 1; j <= s; ++j)
      text += ",P_" + std::to_string(i) + "_" + std::to_string(j);
  text += "\n";
  for (int n = 0; n <= N; ++n) {
    for (int i = 0; i < s; ++i) {
      text += std::to_string(n) + "," + std::to_string(i + 1) + "," +
              csv_double(sol.distributions[n][i]) + "," +
              csv_double(sol.costs[n][i]);
      for (int p = 0; p < s; ++p)
        for (int q = 0; q < s; ++q)
          text += "," + (n < N ? csv_double(sol.strategies[n](p, q))
                               : std::string());
      text += "\n";
    }
  }
  write_text(path, text);
}

inline void write_stationary_csv(const std::filesystem::path& path,
                                 const StationarySolution& sol) {
  const int s = sol.m_bar.size();
  std::string header, row;
  for (int i = 1; i <= s; ++i) header += (i > 1 ? "," : "") + ("m_" + std::to_string(i));
  for (int i = 1; i <= s; ++i) header += ",U_" + std::to_string(i);
  header += ",lambda";
  for (int i = 0; i < s; ++i) row += (i > 0 ? "," : "") + csv_double(sol.m_bar[i]);
  for (int i = 0; i < s; ++i) row += "," + csv_double(sol.u_bar[i]);
  row += "," + csv_double(sol.lambda_bar);
  write_text(path, header + "\n" + row + "\n");
}

inline json failure_json(const RunConfig& cfg, const ConvergenceFailure& e) {
  return {{"command", cfg.command},
          {"seed", cfg.seed},
          {"config", cfg.effective},
          {"error",
           {{"type", "convergence_failure"},
            {"message", e.what()},
            {"residual", e.residual()},
            {"residual_history", e.residual_history()}}}};
}

}  // namespace detail

/// Executes a parsed run configuration, writing artifacts under out_dir.
/// Returns the process exit code (0 ok, 2 config error, 3 convergence
/// failure, 4 verification failure). Wall-clock metadata goes to a sidecar
/// so result files stay byte-reproducible for a given config and seed.
inline int run(const RunConfig& cfg, const std::string& out_dir,
               bool quiet = false) {
  namespace fs = std::filesystem;
  const auto started = std::chrono::system_clock::now();
  const auto tick = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  auto log = [&](const std::string& line) {
    if (!quiet) std::cout << line << "\n";
  };
  auto write_meta = [&]() {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tick)
            .count();
    detail::write_json(
        out / "meta.json",
        {{"started_unix_seconds",
          std::chrono::duration_cast<std::chrono::seconds>(
              started.time_since_epoch())
              .count()},
         {"elapsed_seconds", elapsed}});
  };

  int code = kExitOk;
  if (cfg.command == "solve-horizon") {
    const ProblemInstance instance(cfg.s, cfg.horizon, Distribution(cfg.m0),
                                   CostVector(cfg.terminal_cost), cfg.model);
    HorizonRunInfo info;
    try {
      const HorizonSolution sol = solve_p1(instance, cfg.horizon_cfg, &info);
      const auto [cost_res, evo_res] = residual_p1(sol, instance);
      json solution = {{"fixed_point_residual", sol.fixed_point_residual},
                       {"distributions", json::array()},
                       {"costs", json::array()},
                       {"strategies", json::array()}};
      for (const Distribution& d : sol.distributions)
        solution["distributions"].push_back(detail::to_json(d.values()));
      for (const CostVector& u : sol.costs)
        solution["costs"].push_back(detail::to_json(u.values()));
      for (const StrategyMatrix& P : sol.strategies)
        solution["strategies"].push_back(detail::to_json(P.values()));
      detail::write_json(out / cfg.output.result,
                         {{"command", cfg.command},
                          {"seed", cfg.seed},
                          {"config", cfg.effective},
                          {"iterations", {{"outer", info.outer_iterations}}},
                          {"solution", solution},
                          {"residuals",
                           {{"cost_recursion", cost_res},
                            {"evolution", evo_res}}}});
      detail::write_trajectory_csv(out / cfg.output.trajectory, sol, cfg.s,
                                   cfg.horizon);
      log("solve-horizon: converged, fixed-point residual " +
          detail::csv_double(sol.fixed_point_residual));
    } catch (const ConvergenceFailure& e) {
      detail::write_json(out / cfg.output.result,
                         detail::failure_json(cfg, e));
      log(std::string("solve-horizon: ") + e.what());
      code = kExitConvergenceFailure;
    }
  } else if (cfg.command == "solve-stationary") {
    StationaryRunInfo info;
    try {
      const StationarySolution sol = solve_stationary(
          *cfg.model, cfg.stationary_cfg, Distribution(cfg.m0), &info);
      detail::write_json(
          out / cfg.output.result,
          {{"command", cfg.command},
           {"seed", cfg.seed},
           {"config", cfg.effective},
           {"iterations",
            {{"outer", info.outer_iterations},
             {"rvi_total", info.rvi_iterations_total},
             {"floor_events", info.floor_events}}},
           {"solution",
            {{"m_bar", detail::to_json(sol.m_bar.values())},
             {"u_bar", detail::to_json(sol.u_bar.values())},
             {"lambda_bar", sol.lambda_bar},
             {"strategy", detail::to_json(sol.strategy.values())},
             {"critical_value",
              critical_value(sol.m_bar, sol.strategy, *cfg.model)}}},
           {"residuals",
            {{"cost_equation", sol.residuals.first},
             {"distribution_equation", sol.residuals.second}}}});
      detail::write_stationary_csv(out / cfg.output.stationary, sol);
      log("solve-stationary: converged, lambda " +
          detail::csv_double(sol.lambda_bar));
    } catch (const ConvergenceFailure& e) {
      detail::write_json(out / cfg.output.result,
                         detail::failure_json(cfg, e));
      log(std::string("solve-stationary: ") + e.what());
      code = kExitConvergenceFailure;
    }
  } else if (cfg.command == "oracle") {
    try {
      const Distribution m(cfg.m0);
      const CostVector u(cfg.terminal_cost);
      const verification::GridOracleResult grid =
          verification::grid_oracle_min(m, u, *cfg.model, cfg.oracle_cfg);
      const StageResult stage =
          solve_stage(m, u, *cfg.model, cfg.horizon_cfg.inner);
      detail::write_json(
          out / cfg.output.result,
          {{"command", cfg.command},
           {"seed", cfg.seed},
           {"config", cfg.effective},
           {"grid",
            {{"strategy", detail::to_json(grid.minimizer.values())},
             {"objective", grid.min_value},
             {"points_evaluated", grid.points_evaluated}}},
           {"stage_solver",
            {{"strategy", detail::to_json(stage.strategy.values())},
             {"objective", stage.objective},
             {"iterations", stage.iterations},
             {"kkt", detail::to_json(stage.kkt)}}},
           {"objective_gap", stage.objective - grid.min_value}});
      log("oracle: grid minimum " + detail::csv_double(grid.min_value) +
          ", solver objective " + detail::csv_double(stage.objective));
    } catch (const UnsupportedSizeError& e) {
      std::cerr << "oracle: " << e.what() << "\n";
      write_meta();
      return kExitConfigError;
    }
  } else if (cfg.command == "verify") {
    const std::vector<verification::ProbeReport> probes =
        verification::run_standard_probes(*cfg.model, cfg.s,
                                          cfg.horizon_cfg.inner, cfg.seed);
    bool all_passed = true;
    json items = json::array();
    for (const verification::ProbeReport& p : probes) {
      all_passed = all_passed && p.pass;
      items.push_back(
          {{"name", p.name},
           {"pass", p.pass},
           {"observed", p.observed},
           {"threshold",
            std::isfinite(p.threshold) ? json(p.threshold) : json(nullptr)},
           {"samples", p.samples},
           {"seed", p.seed},
           {"note", p.note}});
      log(std::string(p.pass ? "[pass] " : "[FAIL] ") + p.name +
          " observed " + detail::csv_double(p.observed));
    }
    detail::write_json(out / cfg.output.report,
                       {{"command", cfg.command},
                        {"seed", cfg.seed},
                        {"config", cfg.effective},
                        {"probes", items},
                        {"all_passed", all_passed}});
    if (!all_passed) code = kExitVerificationFailure;
  }

  write_meta();
  return code;
}

}  // namespace mfgs::cli
