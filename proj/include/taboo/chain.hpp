#pragma once

// Continuous-time Markov chain generators: representation, parsing,
// validation, the embedded jump chain, and taboo restriction.
//
// Chain file format (UTF-8 text, whitespace-separated tokens, '#' comments):
//
//   states: s1 s2 ... sn
//   conservative: true|false
//   rate: <from> <to> <value>        # off-diagonal rate, value >= 0
//   diag: <state> <value>            # optional; derived as -row-sum if absent
//
// A conservative generator has zero row sums; a non-conservative one
// (a truncated window with absorbing exterior) has at least one row with
// strict defect. Diagonals are always negative and finite.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace taboo {

/// Malformed chain file or generator-invariant violation at construction.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical degeneracy: singular restricted generator, vanishing
/// denominator, failed residual check. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Ordered set of state labels with stable indices in declaration order.
class StateSpace {
 public:
  StateSpace() = default;

  explicit StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      const auto& label = labels_[i];
      if (label.empty()) throw ParseError("empty state label");
      if (!index_.emplace(label, i).second)
        throw ParseError("duplicate state '" + label + "'");
    }
  }

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }

  bool contains(const std::string& label) const { return index_.count(label) > 0; }

  std::size_t index(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw std::invalid_argument("unknown state '" + label + "'");
    return it->second;
  }

  bool operator==(const StateSpace& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Forbidden states. Preserves declaration order (it fixes the reduction
/// trace) and drops duplicates.
class TabooSet {
 public:
  TabooSet() = default;

  explicit TabooSet(std::vector<std::string> members) {
    for (auto& m : members) add(std::move(m));
  }

  /// Parses a comma-separated label list ("a,b,c"). Empty text -> empty set.
  static TabooSet from_csv(const std::string& csv) {
    TabooSet set;
    std::string item;
    std::stringstream in(csv);
    while (std::getline(in, item, ',')) {
      if (!item.empty()) set.add(item);
    }
    return set;
  }

  void add(std::string label) {
    if (std::find(members_.begin(), members_.end(), label) == members_.end())
      members_.push_back(std::move(label));
  }

  bool contains(const std::string& label) const {
    return std::find(members_.begin(), members_.end(), label) != members_.end();
  }

  /// Copy with one label removed (used to normalize queries: the target
  /// never stays in the taboo).
  TabooSet without(const std::string& label) const {
    TabooSet out;
    for (const auto& m : members_)
      if (m != label) out.members_.push_back(m);
    return out;
  }

  bool empty() const { return members_.empty(); }
  std::size_t size() const { return members_.size(); }
  const std::vector<std::string>& members() const { return members_; }

 private:
  std::vector<std::string> members_;
};

/// Rate matrix A = (a(x,y)) with negative finite diagonals and nonnegative
/// off-diagonal rates. Immutable after construction; row sums are zero
/// (conservative) or nonpositive (truncated boundary rows carry defect).
class Generator {
 public:
  Generator(StateSpace states, std::vector<std::map<std::size_t, double>> rates,
            std::vector<double> diag, bool conservative)
      : states_(std::move(states)),
        rates_(std::move(rates)),
        diag_(std::move(diag)),
        conservative_(conservative) {
    const std::size_t n = states_.size();
    if (rates_.size() != n || diag_.size() != n)
      throw ParseError("generator row count does not match state count");
    defect_.assign(n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
      if (!std::isfinite(diag_[x]) || diag_[x] >= 0.0)
        throw ParseError("state '" + states_.label(x) + "' needs a finite negative diagonal");
      double row_sum = 0.0;
      for (const auto& [y, value] : rates_[x]) {
        if (y >= n) throw ParseError("rate column out of range");
        if (y == x) throw ParseError("self-rate on state '" + states_.label(x) + "'");
        if (!std::isfinite(value) || value < 0.0)
          throw ParseError("negative rate for (" + states_.label(x) + "," + states_.label(y) + ")");
        row_sum += value;
      }
      const double slack = row_sum + diag_[x];  // must be <= 0 within tolerance
      const double tol = kRowSumTol * std::abs(diag_[x]);
      if (slack > tol)
        throw ParseError("row sum for state '" + states_.label(x) + "' exceeds zero");
      if (conservative_ && slack < -tol)
        throw ParseError("conservative chain but row '" + states_.label(x) + "' has defect");
      defect_[x] = std::max(0.0, -slack);
    }
  }

  static constexpr double kRowSumTol = 1e-12;

  const StateSpace& states() const { return states_; }
  std::size_t size() const { return states_.size(); }
  bool conservative() const { return conservative_; }

  const std::map<std::size_t, double>& row(std::size_t x) const { return rates_.at(x); }
  double diagonal(std::size_t x) const { return diag_.at(x); }
  double exit_rate(std::size_t x) const { return -diag_.at(x); }

  /// Rate mass a row loses to the truncated exterior, in 1/time. Zero on
  /// conservative rows.
  double defect_rate(std::size_t x) const { return defect_.at(x); }

  double rate(std::size_t x, std::size_t y) const {
    const auto& r = rates_.at(x);
    auto it = r.find(y);
    return it == r.end() ? 0.0 : it->second;
  }

  bool operator==(const Generator& other) const {
    return states_ == other.states_ && rates_ == other.rates_ && diag_ == other.diag_ &&
           conservative_ == other.conservative_;
  }

 private:
  StateSpace states_;
  std::vector<std::map<std::size_t, double>> rates_;  // off-diagonal, per row
  std::vector<double> diag_;
  bool conservative_ = false;
  std::vector<double> defect_;
};

/// Embedded discrete jump chain: p(x,z) = a(x,z) / (-a(x,x)) for z != x.
/// Row defect is the per-jump escape probability of truncated chains.
struct JumpKernel {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;  // ordered by target index
  std::vector<double> defect;
};

inline JumpKernel embedded_chain(const Generator& gen) {
  JumpKernel kernel;
  const std::size_t n = gen.size();
  kernel.rows.resize(n);
  kernel.defect.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    const double q = gen.exit_rate(x);
    for (const auto& [z, rate] : gen.row(x)) kernel.rows[x].emplace_back(z, rate / q);
    // derived from the generator's row defect so conservative rows report
    // exactly zero instead of summation roundoff
    kernel.defect[x] = gen.defect_rate(x) / q;
  }
  return kernel;
}

/// A hitting question: reach `to` from `from` while avoiding `taboo`
/// strictly after the first exit. Normalization drops `to` from the taboo.
struct HittingQuery {
  std::string from;
  std::string to;
  TabooSet taboo;
};

/// Index-resolved, normalized query. The taboo is a sorted unique index set
/// that never contains the target.
struct ResolvedQuery {
  std::size_t from = 0;
  std::size_t to = 0;
  std::vector<std::size_t> taboo;  // ascending
  std::vector<char> in_taboo;      // mask over all states
  bool target_dropped_from_taboo = false;
};

/// The single normalization point: every hitting operation resolves its
/// query here before dispatch.
inline ResolvedQuery resolve(const Generator& gen, const HittingQuery& query) {
  ResolvedQuery r;
  r.from = gen.states().index(query.from);
  r.to = gen.states().index(query.to);
  r.in_taboo.assign(gen.size(), 0);
  for (const auto& label : query.taboo.members()) {
    const std::size_t i = gen.states().index(label);
    if (i == r.to) {
      r.target_dropped_from_taboo = true;
      continue;
    }
    if (!r.in_taboo[i]) {
      r.in_taboo[i] = 1;
      r.taboo.push_back(i);
    }
  }
  std::sort(r.taboo.begin(), r.taboo.end());
  if (r.taboo.size() >= gen.size())
    throw std::invalid_argument("taboo set covers the whole state space");
  return r;
}

/// Validation findings. Data, not exceptions: reducible or defective chains
/// are legitimate inputs for some operations and fatal for others.
struct ValidationReport {
  bool irreducible = false;
  bool conservative = false;
  std::vector<std::size_t> defect_rows;
  std::vector<std::string> findings;
};

namespace detail {

// Strong connectivity of the positive-rate digraph: forward and backward
// reachability from state 0 must both cover everything.
inline bool strongly_connected(const Generator& gen) {
  const std::size_t n = gen.size();
  if (n <= 1) return true;
  std::vector<std::vector<std::size_t>> fwd(n), bwd(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (const auto& [y, rate] : gen.row(x)) {
      if (rate > 0.0) {
        fwd[x].push_back(y);
        bwd[y].push_back(x);
      }
    }
  }
  auto reaches_all = [n](const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t x = stack.back();
      stack.pop_back();
      for (std::size_t y : adj[x]) {
        if (!seen[y]) {
          seen[y] = 1;
          ++count;
          stack.push_back(y);
        }
      }
    }
    return count == n;
  };
  return reaches_all(fwd) && reaches_all(bwd);
}

}  // namespace detail

inline ValidationReport validate(const Generator& gen) {
  ValidationReport report;
  report.conservative = gen.conservative();
  report.irreducible = detail::strongly_connected(gen);
  for (std::size_t x = 0; x < gen.size(); ++x) {
    if (gen.defect_rate(x) > Generator::kRowSumTol * std::abs(gen.diagonal(x)))
      report.defect_rows.push_back(x);
  }
  if (!report.irreducible) report.findings.push_back("positive-rate digraph is not strongly connected");
  if (!report.defect_rows.empty()) {
    std::string line = "rows with defect:";
    for (std::size_t i = 0; i < report.defect_rows.size(); ++i) {
      if (i == 10) {
        line += " ... (+" + std::to_string(report.defect_rows.size() - i) + " more)";
        break;
      }
      line += " " + gen.states().label(report.defect_rows[i]);
    }
    report.findings.push_back(line);
  }
  return report;
}

/// Sub-generator on S \ H: off-taboo rates and diagonals unchanged, mass
/// toward H becomes defect. Never conservative unless H is empty.
inline Generator restricted(const Generator& gen, const TabooSet& taboo) {
  if (taboo.empty()) return gen;
  std::vector<char> drop(gen.size(), 0);
  std::size_t dropped = 0;
  for (const auto& label : taboo.members()) {
    const std::size_t i = gen.states().index(label);
    if (!drop[i]) {
      drop[i] = 1;
      ++dropped;
    }
  }
  if (dropped >= gen.size()) throw std::invalid_argument("taboo set covers the whole state space");

  std::vector<std::string> labels;
  std::vector<std::size_t> keep;
  std::vector<std::size_t> local(gen.size(), 0);
  for (std::size_t i = 0; i < gen.size(); ++i) {
    if (!drop[i]) {
      local[i] = keep.size();
      keep.push_back(i);
      labels.push_back(gen.states().label(i));
    }
  }
  std::vector<std::map<std::size_t, double>> rates(keep.size());
  std::vector<double> diag(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    diag[r] = gen.diagonal(keep[r]);
    for (const auto& [y, rate] : gen.row(keep[r]))
      if (!drop[y]) rates[r].emplace(local[y], rate);
  }
  return Generator(StateSpace(std::move(labels)), std::move(rates), std::move(diag), false);
}

/// P_x(tau_x <= t) = 1 - exp(a(x,x) t): the exit-time distribution at x.
inline double exit_time_cdf(const Generator& gen, const std::string& state, double t) {
  if (t < 0.0) throw std::invalid_argument("negative time");
  return 1.0 - std::exp(gen.diagonal(gen.states().index(state)) * t);
}

namespace detail {

inline double parse_number(std::string_view token, const std::string& context) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("bad number '" + std::string(token) + "' in " + context);
  return value;
}

inline std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace detail

/// Parses the chain file format. Diagonals omitted from the file are
/// derived as negative row sums (zero-defect rows).
inline Generator parse_chain(const std::string& text) {
  std::vector<std::string> labels;
  bool have_states = false;
  bool have_flag = false;
  bool conservative = false;
  struct RateEntry {
    std::string from, to;
    double value;
  };
  std::vector<RateEntry> rate_entries;
  std::vector<std::pair<std::string, double>> diag_entries;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string key;
    if (!(tokens >> key)) continue;
    const std::string where = "line " + std::to_string(line_no);

    if (key == "states:") {
      if (have_states) throw ParseError("duplicate states header (" + where + ")");
      std::string label;
      while (tokens >> label) labels.push_back(label);
      if (labels.empty()) throw ParseError("states header lists no states");
      have_states = true;
    } else if (key == "conservative:") {
      if (have_flag) throw ParseError("duplicate conservative line (" + where + ")");
      std::string value;
      if (!(tokens >> value) || (value != "true" && value != "false"))
        throw ParseError("conservative must be true or false (" + where + ")");
      conservative = value == "true";
      have_flag = true;
    } else if (key == "rate:") {
      if (!have_states) throw ParseError("rate before states header (" + where + ")");
      std::string from, to, value;
      if (!(tokens >> from >> to >> value)) throw ParseError("rate needs <from> <to> <value> (" + where + ")");
      rate_entries.push_back({from, to, detail::parse_number(value, where)});
    } else if (key == "diag:") {
      if (!have_states) throw ParseError("diag before states header (" + where + ")");
      std::string state, value;
      if (!(tokens >> state >> value)) throw ParseError("diag needs <state> <value> (" + where + ")");
      diag_entries.emplace_back(state, detail::parse_number(value, where));
    } else {
      throw ParseError("unknown directive '" + key + "' (" + where + ")");
    }
    std::string extra;
    if (tokens >> extra) throw ParseError("trailing token '" + extra + "' (" + where + ")");
  }
  if (!have_states) throw ParseError("missing states header");
  if (!have_flag) throw ParseError("missing conservative line");

  StateSpace states(std::move(labels));
  const std::size_t n = states.size();
  std::vector<std::map<std::size_t, double>> rates(n);
  std::vector<double> row_sum(n, 0.0);
  for (const auto& entry : rate_entries) {
    const std::size_t x = states.index(entry.from);
    const std::size_t y = states.index(entry.to);
    if (x == y) throw ParseError("self-rate on state '" + entry.from + "'; use diag");
    if (entry.value < 0.0 || !std::isfinite(entry.value))
      throw ParseError("negative rate for (" + entry.from + "," + entry.to + ")");
    if (!rates[x].emplace(y, entry.value).second)
      throw ParseError("duplicate rate for (" + entry.from + "," + entry.to + ")");
    row_sum[x] += entry.value;
  }

  std::vector<double> diag(n, std::numeric_limits<double>::quiet_NaN());
  for (const auto& [label, value] : diag_entries) {
    const std::size_t x = states.index(label);
    if (!std::isnan(diag[x])) throw ParseError("duplicate diag for state '" + label + "'");
    if (value >= 0.0 || !std::isfinite(value))
      throw ParseError("state '" + label + "' needs a finite negative diagonal");
    diag[x] = value;
  }
  bool strict_defect = false;
  for (std::size_t x = 0; x < n; ++x) {
    if (std::isnan(diag[x])) {
      if (row_sum[x] <= 0.0)
        throw ParseError("state '" + states.label(x) + "' has no outgoing rate and no diag");
      diag[x] = -row_sum[x];
    }
    if (row_sum[x] + diag[x] < -Generator::kRowSumTol * std::abs(diag[x])) strict_defect = true;
  }
  if (!conservative && !strict_defect)
    throw ParseError("declared non-conservative but every row sums to zero");

  return Generator(std::move(states), std::move(rates), std::move(diag), conservative);
}

/// Canonical serialization: states, flag, rates row-major, then one diag
/// line per state. parse(serialize(gen)) == gen.
inline std::string serialize_chain(const Generator& gen) {
  std::ostringstream out;
  out << "states:";
  for (const auto& label : gen.states().labels()) out << ' ' << label;
  out << "\nconservative: " << (gen.conservative() ? "true" : "false") << '\n';
  for (std::size_t x = 0; x < gen.size(); ++x)
    for (const auto& [y, rate] : gen.row(x))
      out << "rate: " << gen.states().label(x) << ' ' << gen.states().label(y) << ' '
          << detail::format_number(rate) << '\n';
  for (std::size_t x = 0; x < gen.size(); ++x)
    out << "diag: " << gen.states().label(x) << ' ' << detail::format_number(gen.diagonal(x)) << '\n';
  return out.str();
}

}  // namespace taboo
