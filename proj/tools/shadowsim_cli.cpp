// Copyright 2026 The shadowsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "shadowsim/formulas.hpp"
#include "shadowsim/programs.hpp"
#include "shadowsim/sampling.hpp"

namespace {

using namespace shadowsim;

constexpr int kExitBadFlags = 2;
constexpr int kExitSolverFailure = 3;

struct ChannelSpec {
  std::string kind;  // depolarizing | ad | dephasing | identity[:d]
  double p = 0.9;
  int power = 1;
  std::string choi_file;
};

std::string spec_name(const ChannelSpec& s) {
  if (!s.choi_file.empty()) return "choi:" + s.choi_file;
  std::ostringstream os;
  os << s.kind;
  if (s.kind != "identity" && s.kind.rfind("identity:", 0) != 0)
    os << ":p=" << s.p;
  if (s.power != 1) os << "^" << s.power;
  return os.str();
}

ChoiOperator build_channel(const ChannelSpec& s) {
  ChoiOperator base = identity_choi(2);
  if (!s.choi_file.empty()) {
    std::ifstream in(s.choi_file);
    if (!in) throw CLI::ValidationError("cannot open " + s.choi_file);
    nlohmann::json j;
    in >> j;
    base = choi_from_json(j);
  } else if (s.kind == "depolarizing") {
    base = depolarizing_choi(s.p);
  } else if (s.kind == "ad") {
    base = amplitude_damping_choi(s.p);
  } else if (s.kind == "dephasing") {
    base = dephasing_choi(s.p);
  } else if (s.kind == "identity") {
    base = identity_choi(2);
  } else if (s.kind.rfind("identity:", 0) == 0) {
    base = identity_choi(std::stoi(s.kind.substr(9)));
  } else {
    throw CLI::ValidationError("unknown channel kind: " + s.kind);
  }
  return s.power == 1 ? base : tensor_power(base, s.power);
}

SolverOptions env_options() {
  SolverOptions opts;
  if (const char* g = std::getenv("SHADOWSIM_GAP_TOL")) opts.gap_tol = std::stod(g);
  if (const char* r = std::getenv("SHADOWSIM_RES_TOL")) opts.res_tol = std::stod(r);
  return opts;
}

struct Row {
  std::string task;
  std::string source;
  std::string target;
  std::string gamma;
  std::string eps;
  double value = 0.0;
  std::string status = "optimal";
  double gap = 0.0;
  std::string seed;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void emit(const std::vector<Row>& rows, const std::string& format,
          std::ostream& out) {
  if (format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const Row& r : rows) {
      arr.push_back({{"task", r.task},
                     {"source", r.source},
                     {"target", r.target},
                     {"gamma", r.gamma},
                     {"eps", r.eps},
                     {"value", r.value},
                     {"status", r.status},
                     {"gap", r.gap},
                     {"seed", r.seed}});
    }
    out << arr.dump(2) << "\n";
    return;
  }
  out << "task,source,target,gamma,eps,value,status,gap,seed\n";
  for (const Row& r : rows) {
    out << r.task << "," << r.source << "," << r.target << "," << r.gamma
        << "," << r.eps << "," << fmt(r.value) << "," << r.status << ","
        << fmt(r.gap) << "," << r.seed << "\n";
  }
}

void add_channel_flags(CLI::App* cmd, ChannelSpec& spec, const std::string& prefix) {
  cmd->add_option("--" + prefix, spec.kind,
                  "channel kind: depolarizing|ad|dephasing|identity[:d]");
  cmd->add_option("--" + prefix + "-p", spec.p, "noise parameter");
  cmd->add_option("--" + prefix + "-power", spec.power, "tensor power");
  cmd->add_option("--" + prefix + "-choi", spec.choi_file,
                  "JSON Choi file overriding the kind");
}

Row task_row(const std::string& task, const ChannelSpec& src,
             const ChannelSpec& tgt, double gamma, bool has_gamma, double eps,
             bool has_eps, const SolverOptions& opts) {
  Row row;
  row.task = task;
  row.source = spec_name(src);
  row.target = spec_name(tgt);
  if (has_gamma) row.gamma = fmt(gamma);
  if (has_eps) row.eps = fmt(eps);
  if (task == "capacity") {
    TaskResult res = shadow_capacity(build_channel(src), gamma, opts);
    row.target = "";
    row.value = res.value;
    row.status = to_string(res.solution.status);
    row.gap = res.solution.duality_gap;
  } else if (task == "simcost") {
    TaskResult res = shadow_sim_cost(build_channel(tgt), gamma, opts);
    row.source = "";
    row.value = res.value;
    row.status = to_string(res.solution.status);
    row.gap = res.solution.duality_gap;
  } else if (task == "min-error") {
    TaskResult res =
        min_error_ns(build_channel(src), build_channel(tgt), gamma, opts);
    row.value = res.value;
    row.status = to_string(res.solution.status);
    row.gap = res.solution.duality_gap;
  } else if (task == "min-cost") {
    TaskResult res =
        min_cost_ns(build_channel(src), build_channel(tgt), eps, opts);
    row.value = res.value;
    row.status = to_string(res.solution.status);
    row.gap = res.solution.duality_gap;
  } else if (task == "diamond") {
    row.value = diamond_distance({build_channel(src), 1.0},
                                 {build_channel(tgt), 1.0}, opts);
  } else {
    throw CLI::ValidationError("unknown sweep task: " + task);
  }
  return row;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"shadow channel simulation toolbox"};
  app.require_subcommand(1);
  app.fallthrough();
  SolverOptions opts = env_options();
  std::vector<Row> rows;
  std::string format = "csv";
  app.add_option("--format", format, "output format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  ChannelSpec src, tgt;
  double gamma = 1.0, eps = 0.0;

  CLI::App* capacity = app.add_subcommand("capacity", "zero-error capacity");
  add_channel_flags(capacity, src, "channel");
  capacity->add_option("--gamma", gamma, "sampling cost budget");
  capacity->callback([&] {
    rows.push_back(task_row("capacity", src, tgt, gamma, true, 0, false, opts));
  });

  CLI::App* simcost = app.add_subcommand("simcost", "zero-error simulation cost");
  add_channel_flags(simcost, tgt, "channel");
  simcost->add_option("--gamma", gamma, "sampling cost budget");
  simcost->callback([&] {
    rows.push_back(task_row("simcost", src, tgt, gamma, true, 0, false, opts));
  });

  CLI::App* minerr = app.add_subcommand("min-error", "minimum simulation error");
  add_channel_flags(minerr, src, "source");
  add_channel_flags(minerr, tgt, "target");
  minerr->add_option("--gamma", gamma, "sampling cost budget");
  minerr->callback([&] {
    rows.push_back(task_row("min-error", src, tgt, gamma, true, 0, false, opts));
  });

  CLI::App* mincost = app.add_subcommand("min-cost", "minimum sampling cost");
  add_channel_flags(mincost, src, "source");
  add_channel_flags(mincost, tgt, "target");
  mincost->add_option("--eps", eps, "error tolerance");
  mincost->callback([&] {
    rows.push_back(task_row("min-cost", src, tgt, 0, false, eps, true, opts));
  });

  CLI::App* diamond = app.add_subcommand("diamond", "half diamond distance");
  add_channel_flags(diamond, src, "source");
  add_channel_flags(diamond, tgt, "target");
  diamond->callback([&] {
    rows.push_back(task_row("diamond", src, tgt, 0, false, 0, false, opts));
  });

  int sample_d = 2;
  long sample_rounds = 0;
  std::uint64_t sample_seed = 0;
  double sample_eps = 0.05, sample_delta = 0.01;
  std::string trace_file;
  CLI::App* sample = app.add_subcommand(
      "sample", "Monte Carlo run of the zero-error communication code");
  add_channel_flags(sample, src, "source");
  sample->add_option("--d", sample_d, "communicated identity dimension");
  sample->add_option("--rounds", sample_rounds,
                     "round count (default: Hoeffding budget)");
  sample->add_option("--eps", sample_eps, "Hoeffding accuracy");
  sample->add_option("--delta", sample_delta, "Hoeffding failure probability");
  sample->add_option("--seed", sample_seed, "RNG seed");
  sample->add_option("--trace", trace_file, "per-round CSV trace output file");
  sample->callback([&] {
    ChoiOperator n = build_channel(src);
    TaskResult cost = comm_zero_error_cost(n, sample_d, opts);
    Row row;
    row.task = "sample";
    row.source = spec_name(src);
    row.target = "identity:" + std::to_string(sample_d);
    row.seed = std::to_string(sample_seed);
    row.status = to_string(cost.solution.status);
    row.gap = cost.solution.duality_gap;
    if (cost.solution.status == SdpStatus::kOptimal) {
      SamplingPlan plan;
      plan.decomposition = branch_decomposition(*cost.realized_code, n);
      Matrix obs = Matrix::Zero(sample_d, sample_d);
      for (int k = 0; k < sample_d; ++k) obs(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
      plan.observable = obs;
      plan.state = Matrix::Zero(sample_d, sample_d);
      plan.state(0, 0) = 1.0;
      plan.rounds = sample_rounds > 0
                        ? sample_rounds
                        : hoeffding_rounds(plan.decomposition.sampling_cost(),
                                           sample_eps, sample_delta);
      plan.seed = sample_seed;
      plan.record_trace = !trace_file.empty();
      SampleEstimate est = run(plan);
      row.gamma = fmt(est.gamma);
      row.value = est.xi;
      if (!trace_file.empty()) {
        std::ofstream out(trace_file);
        out << "round,sign,outcome\n";
        for (size_t m = 0; m < est.trace.size(); ++m)
          out << m << "," << est.trace[m].sign << ","
              << fmt(est.trace[m].outcome) << "\n";
      }
    }
    rows.push_back(row);
  });

  std::string sweep_task = "min-error";
  double range_min = 1.0, range_max = 1.0;
  int steps = 1, jobs = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "evaluate a task over a range");
  add_channel_flags(sweep, src, "source");
  add_channel_flags(sweep, tgt, "target");
  sweep->add_option("--task", sweep_task,
                    "capacity|simcost|min-error|min-cost|diamond");
  sweep->add_option("--gamma-min", range_min, "range start");
  sweep->add_option("--gamma-max", range_max, "range end");
  sweep->add_option("--eps-min", range_min, "range start (min-cost)");
  sweep->add_option("--eps-max", range_max, "range end (min-cost)");
  sweep->add_option("--steps", steps, "number of grid points")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", jobs, "worker threads")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--out", format, "output format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  sweep->callback([&] {
    if (range_min > range_max)
      throw CLI::ValidationError("range min exceeds max");
    std::vector<Row> grid(static_cast<size_t>(steps));
    std::vector<std::string> errors;
    std::mutex mu;
    std::vector<std::thread> pool;
    std::vector<int> next{0};
    auto worker = [&] {
      for (;;) {
        int idx;
        {
          std::lock_guard<std::mutex> lk(mu);
          if (next[0] >= steps) return;
          idx = next[0]++;
        }
        const double x =
            steps == 1 ? range_min
                       : range_min + (range_max - range_min) * idx / (steps - 1);
        const bool is_eps = sweep_task == "min-cost";
        try {
          grid[static_cast<size_t>(idx)] =
              task_row(sweep_task, src, tgt, x, !is_eps, x, is_eps, opts);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lk(mu);
          errors.push_back(e.what());
        }
      }
    };
    const int n_threads = std::min(jobs, steps);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (!errors.empty()) throw std::runtime_error(errors.front());
    for (Row& r : grid) rows.push_back(std::move(r));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitBadFlags;
  }
  emit(rows, format, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}
