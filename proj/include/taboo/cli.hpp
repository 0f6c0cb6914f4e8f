#pragma once

// Command-line surface. All results go to stdout with fixed 12-decimal
// formatting so runs are byte-reproducible; notices and errors go to
// stderr. Exit codes: 0 success, 1 input or validation failure, 2
// numerical degeneracy.

#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "taboo/chain.hpp"
#include "taboo/green.hpp"
#include "taboo/hitting.hpp"
#include "taboo/lattice.hpp"
#include "taboo/reduction.hpp"
#include "taboo/simulate.hpp"
#include "taboo/value_iteration.hpp"

namespace taboo::cli {

namespace detail {

using taboo::detail::format_fixed12;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void print_green_matrix(std::ostream& out, const std::vector<std::string>& rows,
                               const std::vector<std::string>& cols, const Eigen::MatrixXd& m) {
  out << "cols:";
  for (const auto& label : cols) out << ' ' << label;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << rows[r] << ':';
    for (std::size_t c = 0; c < cols.size(); ++c)
      out << ' '
          << format_fixed12(m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    out << '\n';
  }
}

struct Options {
  std::string file;
  std::string from;
  std::string to;
  std::string taboo_csv;
  std::string method;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  double horizon = 0.0;  // 0 picks the per-chain default
  bool after_exit = false;
  int dim = 3;
  int radius = 1;
  double rate = 1.0;
};

inline void print_value(std::ostream& out, double value, Method method) {
  out << "value=" << format_fixed12(value) << " method=" << method_name(method) << '\n';
}

// Prints every deterministic route that applies; cross-checks the spread.
inline int run_method_all(std::ostream& out, std::ostream& err, const Generator& gen,
                          const HittingQuery& query, const TabooSet& normalized) {
  std::vector<std::pair<Method, double>> values;
  const auto firststep = hitting_prob_firststep(gen, query.to, normalized);
  if (normalized.empty()) {
    values.emplace_back(Method::BaseEmptyTaboo, hitting_prob_base(gen, query.from, query.to).value);
  } else {
    values.emplace_back(Method::Theorem1, hitting_prob_theorem1(gen, query).value);
  }
  values.emplace_back(Method::FirstStep, firststep.values[gen.states().index(query.from)]);
  if (normalized.size() == 1 && !gen.conservative())
    values.emplace_back(Method::Theorem3,
                        singleton_taboo_transient(gen, query.from, query.to,
                                                  normalized.members().front()).value);
  if (normalized.size() >= 2)
    values.emplace_back(Method::Reduction, reduce_to_singleton(gen, query).value);
  const auto vi = value_iteration_hitting(gen, query.to, normalized);
  if (!vi.converged) throw NumericalError("value iteration did not converge");
  values.emplace_back(Method::ValueIteration, vi.values[gen.states().index(query.from)]);

  double spread = 0.0;
  for (const auto& [method, value] : values) {
    print_value(out, value, method);
    for (const auto& [_, other] : values) spread = std::max(spread, std::abs(value - other));
  }
  if (spread > 1e-8) {
    err << "error: methods disagree by " << spread << '\n';
    return 2;
  }
  return 0;
}

}  // namespace detail

/// Runs one CLI invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  detail::Options opt;

  CLI::App app{"hitting probabilities under taboo for continuous-time Markov chains"};
  app.require_subcommand(1);

  auto* cmd_validate = app.add_subcommand("validate", "parse a chain file and report findings");
  cmd_validate->add_option("file", opt.file)->required();

  auto* cmd_hit = app.add_subcommand("hit", "probability of hitting the target before the taboo");
  cmd_hit->add_option("file", opt.file)->required();
  cmd_hit->add_option("--from", opt.from)->required();
  cmd_hit->add_option("--to", opt.to)->required();
  cmd_hit->add_option("--taboo", opt.taboo_csv, "comma-separated taboo states");
  cmd_hit->add_option("--method", opt.method,
                      "theorem1|firststep|theorem3|reduce|mc|vi|all (default by taboo)");
  cmd_hit->add_option("--trials", opt.trials);
  cmd_hit->add_option("--seed", opt.seed);
  cmd_hit->add_option("--horizon", opt.horizon);

  auto* cmd_green = app.add_subcommand("green", "expected occupation times, optionally under taboo");
  cmd_green->add_option("file", opt.file)->required();
  cmd_green->add_option("--taboo", opt.taboo_csv);

  auto* cmd_reduce = app.add_subcommand("reduce", "iterative taboo reduction with a step trace");
  cmd_reduce->add_option("file", opt.file)->required();
  cmd_reduce->add_option("--from", opt.from)->required();
  cmd_reduce->add_option("--to", opt.to)->required();
  cmd_reduce->add_option("--taboo", opt.taboo_csv)->required();

  auto* cmd_simulate = app.add_subcommand("simulate", "seeded Monte-Carlo hitting estimate");
  cmd_simulate->add_option("file", opt.file)->required();
  cmd_simulate->add_option("--from", opt.from)->required();
  cmd_simulate->add_option("--to", opt.to)->required();
  cmd_simulate->add_option("--taboo", opt.taboo_csv);
  cmd_simulate->add_option("--trials", opt.trials)->required();
  cmd_simulate->add_option("--seed", opt.seed)->required();
  cmd_simulate->add_option("--horizon", opt.horizon);
  cmd_simulate->add_flag("--after-exit", opt.after_exit, "clock starts at the first exit");

  auto* cmd_lattice = app.add_subcommand("lattice", "emit a truncated lattice walk chain file");
  cmd_lattice->add_option("--dim", opt.dim)->required();
  cmd_lattice->add_option("--radius", opt.radius)->required();
  cmd_lattice->add_option("--rate", opt.rate);

  std::vector<const char*> argv{"taboo"};
  for (const auto& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (cmd_lattice->parsed()) {
      LatticeSpec spec;
      spec.dim = opt.dim;
      spec.radius = opt.radius;
      spec.rate = opt.rate;
      out << serialize_chain(build_lattice_walk(spec));
      return 0;
    }

    const Generator gen = parse_chain(detail::read_file(opt.file));

    if (cmd_validate->parsed()) {
      const ValidationReport report = validate(gen);
      out << "states: " << gen.size() << '\n';
      out << "conservative: " << (report.conservative ? "true" : "false") << '\n';
      out << "irreducible: " << (report.irreducible ? "true" : "false") << '\n';
      for (const auto& finding : report.findings) out << finding << '\n';
      out << "valid\n";
      return 0;
    }

    TabooSet taboo = TabooSet::from_csv(opt.taboo_csv);
    const TabooSet normalized = taboo.without(opt.to);
    if (!cmd_green->parsed() && normalized.size() != taboo.size())
      err << "notice: target '" << opt.to << "' removed from taboo\n";

    if (cmd_green->parsed()) {
      if (taboo.empty()) {
        const GreenResult green = green_function(gen);
        if (green.recurrent) {
          out << "recurrent\n";
        } else {
          detail::print_green_matrix(out, gen.states().labels(), gen.states().labels(),
                                     green.matrix);
        }
      } else {
        const TabooGreenMatrix green = taboo_green(gen, taboo);
        detail::print_green_matrix(out, green.row_labels, green.col_labels, green.values);
      }
      return 0;
    }

    if (cmd_reduce->parsed()) {
      const HittingQuery query{opt.from, opt.to, taboo};
      try {
        const HittingResult result = reduce_to_singleton(gen, query);
        out << format_reduction_trace(result.trace);
        detail::print_value(out, result.value, Method::Reduction);
        return 0;
      } catch (const ReductionError& e) {
        out << format_reduction_trace(e.partial_trace);
        throw;
      }
    }

    if (cmd_simulate->parsed()) {
      const HittingQuery query{opt.from, opt.to, taboo};
      if (opt.after_exit) {
        const AfterExitEstimate estimate =
            estimate_hitting_after_exit(gen, query, opt.trials, opt.seed, opt.horizon);
        out << "mean=" << detail::format_fixed12(estimate.estimate.mean)
            << " stderr=" << detail::format_fixed12(estimate.estimate.std_error)
            << " trials=" << estimate.estimate.trials
            << " censored=" << estimate.estimate.horizon_censored
            << " p_zero=" << detail::format_fixed12(estimate.zero_time_fraction) << '\n';
      } else {
        const Estimate estimate = estimate_hitting(gen, query, opt.trials, opt.seed, opt.horizon);
        out << "mean=" << detail::format_fixed12(estimate.mean)
            << " stderr=" << detail::format_fixed12(estimate.std_error)
            << " trials=" << estimate.trials << " censored=" << estimate.horizon_censored << '\n';
      }
      return 0;
    }

    // hit
    const HittingQuery query{opt.from, opt.to, taboo};
    std::string method = opt.method;
    if (method.empty()) method = normalized.empty() ? "base" : "theorem1";

    if (method == "all") return detail::run_method_all(out, err, gen, query, normalized);
    if (method == "base") {
      detail::print_value(out, hitting_prob_base(gen, opt.from, opt.to).value,
                          Method::BaseEmptyTaboo);
    } else if (method == "theorem1") {
      detail::print_value(out, hitting_prob_theorem1(gen, query).value, Method::Theorem1);
    } else if (method == "firststep") {
      const auto solution = hitting_prob_firststep(gen, opt.to, normalized);
      detail::print_value(out, solution.values[gen.states().index(opt.from)], Method::FirstStep);
    } else if (method == "theorem3") {
      if (normalized.size() != 1)
        throw std::invalid_argument("theorem3 needs exactly one taboo state");
      detail::print_value(
          out,
          singleton_taboo_transient(gen, opt.from, opt.to, normalized.members().front()).value,
          Method::Theorem3);
    } else if (method == "reduce") {
      detail::print_value(out, reduce_to_singleton(gen, query).value, Method::Reduction);
    } else if (method == "vi") {
      const auto vi = value_iteration_hitting(gen, opt.to, normalized);
      if (!vi.converged) throw NumericalError("value iteration did not converge");
      detail::print_value(out, vi.values[gen.states().index(opt.from)], Method::ValueIteration);
    } else if (method == "mc") {
      const Estimate estimate = estimate_hitting(gen, query, opt.trials, opt.seed, opt.horizon);
      detail::print_value(out, estimate.mean, Method::MonteCarlo);
    } else {
      throw std::invalid_argument("unknown method '" + method + "'");
    }
    return 0;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace taboo::cli
