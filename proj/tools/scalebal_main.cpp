// Copyright 2026 The scalebal Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scalebal/baselines.hpp"
#include "scalebal/ipm.hpp"
#include "scalebal/matrix.hpp"
#include "scalebal/newton.hpp"
#include "scalebal/objectives.hpp"

namespace {

using nlohmann::json;
using namespace scalebal;

constexpr int kExitOk = 0;
constexpr int kExitIoError = 1;
constexpr int kExitInfeasible = 2;

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

Eigen::VectorXd read_vector(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::vector<double> vals;
  double v;
  while (in >> v) vals.push_back(v);
  if (static_cast<int>(vals.size()) != n) {
    throw ParseError("'" + path + "' holds " + std::to_string(vals.size()) +
                     " values, expected " + std::to_string(n));
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), n);
}

Eigen::VectorXd target_vector(const std::string& spec, int n) {
  if (spec == "uniform") return Eigen::VectorXd::Ones(n);
  return read_vector(spec, n);
}

void write_factors(const std::string& path, const DiagonalFactors& f) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out.precision(17);
  for (Eigen::Index i = 0; i < f.x.size(); ++i) out << f.x[i] << "\n";
  for (Eigen::Index i = 0; i < f.y.size(); ++i) out << f.y[i] << "\n";
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kCapExceeded:
      return "cap_exceeded";
    case SolveStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

json trace_json(const IterationTrace& trace, const std::string& phase) {
  json arr = json::array();
  for (const TraceRecord& r : trace.records) {
    arr.push_back({{"iteration", r.iteration},
                   {"value", r.value},
                   {"grad_norm", r.grad_norm},
                   {"metric", r.metric},
                   {"step_inf", r.step_inf},
                   {"oracle_value", r.oracle_value},
                   {"k", r.k},
                   {"phase", phase}});
  }
  return arr;
}

struct CommonArgs {
  std::string input;
  double eps = 1e-6;
  std::string method = "newton";
  std::string out_path;
  std::string factors_path;
  long seed = 0;
  double max_b = 65536;
  bool trace = false;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--input", args->input, "Matrix Market input file")
      ->required();
  cmd->add_option("--eps", args->eps, "target error");
  cmd->add_option("--out", args->out_path, "JSON report path");
  cmd->add_option("--factors-out", args->factors_path,
                  "log factors output path");
  cmd->add_option("--seed", args->seed, "random seed echoed in the report");
  cmd->add_option("--max-B", args->max_b, "cap for the box doubling");
  cmd->add_flag("--trace", args->trace, "include the iteration trace");
}

json input_json(const std::string& path, const SparseNonnegativeMatrix& a) {
  const MatrixStats st = matrix_stats(a);
  return {{"path", path},
          {"n", a.dim()},
          {"nnz", st.nnz},
          {"entry_sum", st.entry_sum},
          {"min_nonzero", st.min_nonzero},
          {"ratio", st.ratio}};
}

json result_json(const DiagonalFactorsResult& res, double wall_ms) {
  return {{"status", status_name(res.status)},
          {"error", res.error},
          {"kappa", res.kappa},
          {"iterations", res.iterations},
          {"objective", res.objective},
          {"box_bound", res.box_bound},
          {"note", res.note},
          {"wall_time_ms", wall_ms}};
}

void emit_report(const json& report, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write '" + out_path + "'");
    out << report.dump(2) << "\n";
  }
}

DiagonalFactorsResult run_balance(const SparseNonnegativeMatrix& a,
                                  const CommonArgs& args) {
  if (args.method == "newton") {
    SolverConfig cfg;
    cfg.b_cap = args.max_b;
    return solve_balancing(a, args.eps, cfg);
  }
  if (args.method == "ipm") {
    IpmSolverConfig cfg;
    cfg.b_cap = args.max_b;
    return ipm_balance(a, args.eps, cfg);
  }
  if (args.method == "osborne") {
    BaselineConfig cfg;
    cfg.target_error = args.eps;
    return osborne(a, cfg);
  }
  throw InvalidInputError("unknown balance method '" + args.method + "'");
}

DiagonalFactorsResult run_scale(const SparseNonnegativeMatrix& a,
                                const Eigen::VectorXd& r,
                                const Eigen::VectorXd& c,
                                const CommonArgs& args) {
  if (args.method == "newton") {
    SolverConfig cfg;
    cfg.b_cap = args.max_b;
    return solve_scaling(a, r, c, args.eps, cfg);
  }
  if (args.method == "ipm") {
    IpmSolverConfig cfg;
    cfg.b_cap = args.max_b;
    return ipm_scale(a, r, c, args.eps, cfg);
  }
  if (args.method == "sinkhorn") {
    BaselineConfig cfg;
    cfg.target_error = args.eps;
    return sinkhorn(a, r, c, cfg);
  }
  throw InvalidInputError("unknown scale method '" + args.method + "'");
}

int cmd_balance(const CommonArgs& args) {
  const SparseNonnegativeMatrix a = load_matrix_market(args.input);
  const double t0 = now_ms();
  const DiagonalFactorsResult res = run_balance(a, args);
  const double wall = now_ms() - t0;
  if (!args.factors_path.empty()) write_factors(args.factors_path, res.factors);
  json report = {{"task", "balance"},
                 {"input", input_json(args.input, a)},
                 {"method", args.method},
                 {"config",
                  {{"eps", args.eps},
                   {"seed", args.seed},
                   {"max_b", args.max_b},
                   {"trace", args.trace}}},
                 {"result", result_json(res, wall)}};
  if (!args.factors_path.empty()) report["factors_file"] = args.factors_path;
  if (args.trace) report["trace"] = trace_json(res.trace,
                                               args.method == "ipm" ? "ipm"
                                                                    : args.method);
  emit_report(report, args.out_path);
  return res.status == SolveStatus::kConverged ? kExitOk : kExitInfeasible;
}

int cmd_scale(const CommonArgs& args, const std::string& rows,
              const std::string& cols) {
  const SparseNonnegativeMatrix a = load_matrix_market(args.input);
  const Eigen::VectorXd r = target_vector(rows, a.dim());
  const Eigen::VectorXd c = target_vector(cols, a.dim());
  const double t0 = now_ms();
  const DiagonalFactorsResult res = run_scale(a, r, c, args);
  const double wall = now_ms() - t0;
  if (!args.factors_path.empty()) write_factors(args.factors_path, res.factors);
  json report = {{"task", "scale"},
                 {"input", input_json(args.input, a)},
                 {"method", args.method},
                 {"config",
                  {{"eps", args.eps},
                   {"seed", args.seed},
                   {"max_b", args.max_b},
                   {"trace", args.trace},
                   {"rows", rows},
                   {"cols", cols}}},
                 {"result", result_json(res, wall)}};
  if (!args.factors_path.empty()) report["factors_file"] = args.factors_path;
  if (args.trace) report["trace"] = trace_json(res.trace,
                                               args.method == "ipm" ? "ipm"
                                                                    : args.method);
  emit_report(report, args.out_path);
  return res.status == SolveStatus::kConverged ? kExitOk : kExitInfeasible;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_compare(const std::string& input, const std::string& eps_list,
                const std::string& methods_list, const std::string& task,
                const std::string& rows, const std::string& cols,
                const std::string& out_path, bool timings) {
  const SparseNonnegativeMatrix a = load_matrix_market(input);
  Eigen::VectorXd r, c;
  if (task == "scale") {
    r = target_vector(rows, a.dim());
    c = target_vector(cols, a.dim());
  }
  std::ostringstream csv;
  csv << "method,eps,iterations,error,time_ms,status\n";
  bool any_ok = false;
  for (const std::string& method : split_list(methods_list)) {
    for (const std::string& eps_str : split_list(eps_list)) {
      const double eps = std::stod(eps_str);
      CommonArgs args;
      args.eps = eps;
      args.method = method;
      std::string status;
      long iterations = 0;
      double error = std::numeric_limits<double>::quiet_NaN();
      const double t0 = now_ms();
      try {
        const DiagonalFactorsResult res =
            task == "scale" ? run_scale(a, r, c, args) : run_balance(a, args);
        iterations = res.iterations;
        error = res.error;
        status = status_name(res.status);
        if (res.status == SolveStatus::kConverged) any_ok = true;
      } catch (const Error& e) {
        status = "failed";
      }
      const double wall = now_ms() - t0;
      csv << method << "," << eps_str << "," << iterations << ","
          << fmt(error) << "," << (timings ? fmt(wall) : std::string("-"))
          << "," << status << "\n";
    }
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write '" + out_path + "'");
    out << csv.str();
  }
  return any_ok ? kExitOk : kExitInfeasible;
}

int cmd_check(const std::string& input, const std::string& rows,
              const std::string& cols) {
  const SparseNonnegativeMatrix a = load_matrix_market(input);
  const SccDecomposition scc = scc_decompose(a);
  json report = {{"task", "check"},
                 {"input", input_json(input, a)},
                 {"strongly_connected", scc.is_strongly_connected},
                 {"components", scc.components.size()}};
  if (!rows.empty() || !cols.empty()) {
    const Eigen::VectorXd r = target_vector(rows.empty() ? "uniform" : rows,
                                            a.dim());
    const Eigen::VectorXd c = target_vector(cols.empty() ? "uniform" : cols,
                                            a.dim());
    const Scalability s = check_scalable(a, r, c);
    report["scalability"] = s == Scalability::kExact     ? "exact"
                            : s == Scalability::kAlmost ? "almost"
                                                        : "infeasible";
  }
  std::cout << report.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matrix scaling and balancing solver"};
  app.require_subcommand(1);

  CommonArgs bal_args;
  CLI::App* balance = app.add_subcommand("balance", "balance a matrix");
  add_common(balance, &bal_args);
  balance->add_option("--method", bal_args.method, "newton|ipm|osborne");

  CommonArgs sc_args;
  std::string rows = "uniform", cols = "uniform";
  CLI::App* scale = app.add_subcommand("scale", "scale to row/column sums");
  add_common(scale, &sc_args);
  scale->add_option("--method", sc_args.method, "newton|ipm|sinkhorn");
  scale->add_option("--rows", rows, "row sums file or 'uniform'");
  scale->add_option("--cols", cols, "column sums file or 'uniform'");

  std::string cmp_input, cmp_eps = "1e-4", cmp_methods = "newton",
              cmp_task = "balance", cmp_rows = "uniform",
              cmp_cols = "uniform", cmp_out;
  bool cmp_timings = false;
  CLI::App* compare = app.add_subcommand("compare", "method comparison CSV");
  compare->add_option("--input", cmp_input)->required();
  compare->add_option("--eps", cmp_eps, "comma-separated eps list");
  compare->add_option("--methods", cmp_methods, "comma-separated methods");
  compare->add_option("--task", cmp_task, "balance|scale");
  compare->add_option("--rows", cmp_rows);
  compare->add_option("--cols", cmp_cols);
  compare->add_option("--out", cmp_out, "CSV output path");
  compare->add_flag("--timings", cmp_timings,
                    "real wall times (breaks byte-for-byte determinism)");

  std::string chk_input, chk_rows, chk_cols;
  CLI::App* check = app.add_subcommand("check", "feasibility diagnostics");
  check->add_option("--input", chk_input)->required();
  check->add_option("--rows", chk_rows);
  check->add_option("--cols", chk_cols);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitIoError;
  }

  try {
    if (*balance) return cmd_balance(bal_args);
    if (*scale) return cmd_scale(sc_args, rows, cols);
    if (*compare)
      return cmd_compare(cmp_input, cmp_eps, cmp_methods, cmp_task, cmp_rows,
                         cmp_cols, cmp_out, cmp_timings);
    if (*check) return cmd_check(chk_input, chk_rows, chk_cols);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  return kExitIoError;
}
