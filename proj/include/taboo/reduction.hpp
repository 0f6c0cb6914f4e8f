#pragma once

// Iterative taboo reduction: grow a taboo set one state at a time from a
// singleton, or strip the start state out of a taboo, rewriting hitting
// probabilities with the two-ratio update at every step. Each step is
// recorded so a reduction can be audited line by line.

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "taboo/chain.hpp"
#include "taboo/hitting.hpp"

namespace taboo {

/// Degenerate reduction denominator; carries the steps completed so far.
class ReductionError : public NumericalError {
 public:
  ReductionError(const std::string& msg, std::vector<ReductionStep> partial)
      : NumericalError(msg), partial_trace(std::move(partial)) {}
  std::vector<ReductionStep> partial_trace;
};

/// Values keyed by (from, to) label pairs, all under one implied taboo set.
using ValueMap = std::map<std::pair<std::string, std::string>, double>;

namespace detail {

constexpr double kDenominatorFloor = 1e-14;

// The taboo-extension update: rewrites a hitting probability when one more
// state joins the taboo, from four values under the smaller taboo.
inline double taboo_extension_value(double f_xy, double f_xz, double f_zy, double f_yz,
                                    bool strict_return) {
  const double denom = 1.0 - f_yz * f_zy;
  if (denom <= kDenominatorFloor)
    throw NumericalError("taboo-extension denominator vanished");
  return finalize_probability((f_xy - f_xz * f_zy) / denom, strict_return,
                              "taboo-extension value");
}

inline double lookup(const ValueMap& vals, const std::string& from, const std::string& to) {
  auto it = vals.find({from, to});
  if (it == vals.end())
    throw std::invalid_argument("missing value for (" + from + "," + to + ")");
  return it->second;
}

inline std::string format_fixed12(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12f", value);
  return buf;
}

}  // namespace detail

/// Probability under taboo {z} ∪ H from values under H. Requires y,z off
/// the taboo, z != y, and the four entries (x,y) (x,z) (z,y) (y,z) in vals.
inline double add_taboo(const std::string& x, const std::string& y, const std::string& z,
                        const TabooSet& taboo, const ValueMap& vals) {
  if (taboo.empty()) throw std::invalid_argument("taboo set must be nonempty");
  if (z == y) throw std::invalid_argument("added state must differ from the target");
  if (x == z)
    throw std::invalid_argument("query the enlarged taboo directly when the start is added");
  if (taboo.contains(y) || taboo.contains(z))
    throw std::invalid_argument("target and added state must lie outside the taboo");
  return detail::taboo_extension_value(detail::lookup(vals, x, y), detail::lookup(vals, x, z),
                                       detail::lookup(vals, z, y), detail::lookup(vals, y, z),
                                       x == y);
}

/// Probability under H from values under the enlarged taboos {x} ∪ H and
/// {y} ∪ H: vals[(x,y)] holds the start-taboo value, vals[(x,x)] the
/// return value with the target added. Requires x off H and x != y.
inline double remove_start_taboo(const std::string& x, const std::string& y, const TabooSet& taboo,
                                 const ValueMap& vals) {
  if (x == y) throw std::invalid_argument("start and target must differ");
  if (taboo.contains(x)) throw std::invalid_argument("start state must lie outside the taboo");
  const double start_taboo_xy = detail::lookup(vals, x, y);
  const double target_taboo_xx = detail::lookup(vals, x, x);
  const double denom = 1.0 - target_taboo_xx;
  if (denom <= detail::kDenominatorFloor)
    throw NumericalError("start-taboo-removal denominator vanished");
  return detail::finalize_probability(start_taboo_xy / denom, false, "start-taboo-removal value");
}

/// Reduces a multi-state taboo query to singleton-taboo base values and a
/// chain of taboo-extension steps, in taboo declaration order.
inline HittingResult reduce_to_singleton(const Generator& gen, const HittingQuery& query) {
  resolve(gen, query);  // validates labels and the taboo extent
  const TabooSet ordered = query.taboo.without(query.to);
  if (ordered.size() < 2) throw std::invalid_argument("reduction needs at least two taboo states");

  const std::vector<std::string>& order = ordered.members();
  auto dedup_push = [](std::vector<std::string>& list, const std::string& label) {
    for (const auto& existing : list)
      if (existing == label) return;
    list.push_back(label);
  };
  std::vector<std::string> targets{query.to};
  for (std::size_t i = 1; i < order.size(); ++i) dedup_push(targets, order[i]);
  std::vector<std::string> sources{query.from};
  for (const auto& t : targets) dedup_push(sources, t);

  // Base table: singleton taboo {h1}, one occupation column per target.
  TabooSet current({order[0]});
  ValueMap table;
  for (const auto& b : targets) {
    const auto column = theorem1_values(gen, current, b);
    for (const auto& a : sources) table[{a, b}] = column[gen.states().index(a)];
  }

  std::vector<ReductionStep> trace;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const std::string& z = order[i];
    ValueMap next;
    ReductionStep step;
    step.action = ReductionStep::Action::AddTaboo;
    step.added_state = z;
    const std::vector<std::pair<std::string, std::string>> consumed{
        {query.from, query.to}, {query.from, z}, {z, query.to}, {query.to, z}};
    for (const auto& [a, b] : consumed)
      step.inputs.emplace_back(HittingQuery{a, b, current}, detail::lookup(table, a, b));

    // Targets that remain live after this step: the query target plus the
    // taboo states not yet absorbed.
    std::vector<std::string> live{query.to};
    for (std::size_t j = i + 1; j < order.size(); ++j) dedup_push(live, order[j]);
    try {
      for (const auto& b : live)
        for (const auto& a : sources)
          next[{a, b}] = detail::taboo_extension_value(
              detail::lookup(table, a, b), detail::lookup(table, a, z),
              detail::lookup(table, z, b), detail::lookup(table, b, z), a == b);
    } catch (const NumericalError& err) {
      throw ReductionError(err.what(), std::move(trace));
    }
    table = std::move(next);
    current.add(z);
    step.output = {HittingQuery{query.from, query.to, current},
                   detail::lookup(table, query.from, query.to)};
    trace.push_back(std::move(step));
  }

  HittingResult result{HittingQuery{query.from, query.to, ordered},
                       detail::lookup(table, query.from, query.to), Method::Reduction,
                       std::move(trace)};
  return result;
}

/// One line per step, `step <i>: add z=<label> value=<v>`.
inline std::string format_reduction_trace(const std::vector<ReductionStep>& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += "step " + std::to_string(i + 1) + ": add z=" + trace[i].added_state +
           " value=" + detail::format_fixed12(trace[i].output.second) + "\n";
  }
  return out;
}

}  // namespace taboo
