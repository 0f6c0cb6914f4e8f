#pragma once

// Standard test chains: truncated random walks on Z^d windows with an
// absorbing exterior, and birth-death chains with reflecting ends.

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "taboo/chain.hpp"

namespace taboo {

struct LatticeSpec {
  int dim = 3;       // 1..4
  int radius = 1;    // window half-width in max-norm; 0 keeps only the origin
  double rate = 1.0; // total jump rate per site
  // Offsets with probabilities summing to 1. Empty picks the symmetric
  // nearest-neighbor law, 1/(2 dim) per unit step.
  std::vector<std::pair<std::vector<int>, double>> jump_law;
};

/// Canonical coordinate label, components joined by '_' ("0_0_0", "-1_2_0").
inline std::string lattice_label(const std::vector<int>& coords) {
  std::string label;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (i > 0) label += '_';
    label += std::to_string(coords[i]);
  }
  return label;
}

/// Window walk generator: sites with max-norm <= radius, jumps leaving the
/// window become row defect (absorbing exterior).
inline Generator build_lattice_walk(const LatticeSpec& spec) {
  if (spec.dim < 1 || spec.dim > 4) throw std::invalid_argument("dimension must be 1..4");
  if (spec.radius < 0) throw std::invalid_argument("radius must be nonnegative");
  if (!(spec.rate > 0.0)) throw std::invalid_argument("rate must be positive");

  auto law = spec.jump_law;
  if (law.empty()) {
    const double p = 1.0 / (2.0 * spec.dim);
    for (int axis = 0; axis < spec.dim; ++axis) {
      for (int dir : {+1, -1}) {
        std::vector<int> offset(static_cast<std::size_t>(spec.dim), 0);
        offset[static_cast<std::size_t>(axis)] = dir;
        law.emplace_back(offset, p);
      }
    }
  }
  double law_mass = 0.0;
  for (const auto& [offset, p] : law) {
    if (offset.size() != static_cast<std::size_t>(spec.dim))
      throw std::invalid_argument("offset dimension mismatch");
    bool zero = true;
    int max_component = 0;
    for (int c : offset) {
      if (c != 0) zero = false;
      max_component = std::max(max_component, std::abs(c));
    }
    if (zero) throw std::invalid_argument("zero offset in jump law");
    if (!(p > 0.0)) throw std::invalid_argument("jump probability must be positive");
    if (spec.radius >= 1 && max_component > 2 * spec.radius)
      throw std::invalid_argument("window too small for the jump law");
    law_mass += p;
  }
  if (std::abs(law_mass - 1.0) > 1e-12) throw std::invalid_argument("jump law must sum to 1");

  const int side = 2 * spec.radius + 1;
  std::size_t count = 1;
  for (int axis = 0; axis < spec.dim; ++axis) count *= static_cast<std::size_t>(side);

  auto coords_of = [&](std::size_t index) {
    std::vector<int> coords(static_cast<std::size_t>(spec.dim));
    for (int axis = spec.dim - 1; axis >= 0; --axis) {
      coords[static_cast<std::size_t>(axis)] = static_cast<int>(index % side) - spec.radius;
      index /= static_cast<std::size_t>(side);
    }
    return coords;
  };
  auto index_of = [&](const std::vector<int>& coords) {
    std::size_t index = 0;
    for (int axis = 0; axis < spec.dim; ++axis)
      index = index * static_cast<std::size_t>(side) +
              static_cast<std::size_t>(coords[static_cast<std::size_t>(axis)] + spec.radius);
    return index;
  };

  std::vector<std::string> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = lattice_label(coords_of(i));

  std::vector<std::map<std::size_t, double>> rates(count);
  std::vector<double> diag(count, -spec.rate);
  bool any_defect = false;
  for (std::size_t i = 0; i < count; ++i) {
    const auto site = coords_of(i);
    for (const auto& [offset, p] : law) {
      std::vector<int> neighbor(site);
      bool inside = true;
      for (int axis = 0; axis < spec.dim; ++axis) {
        neighbor[static_cast<std::size_t>(axis)] += offset[static_cast<std::size_t>(axis)];
        if (std::abs(neighbor[static_cast<std::size_t>(axis)]) > spec.radius) inside = false;
      }
      if (inside)
        rates[i][index_of(neighbor)] += spec.rate * p;
      else
        any_defect = true;
    }
  }
  return Generator(StateSpace(std::move(labels)), std::move(rates), std::move(diag), !any_defect);
}

/// Birth-death chain on 0..n with reflecting ends: up[i] drives i -> i+1,
/// down[i] drives i+1 -> i. Conservative by construction.
inline Generator build_birth_death(std::size_t n, const std::vector<double>& up,
                                   const std::vector<double>& down) {
  if (n < 1) throw std::invalid_argument("need at least two states");
  if (up.size() != n || down.size() != n)
    throw std::invalid_argument("rate lists must have one entry per transition");
  for (double r : up)
    if (!(r > 0.0)) throw std::invalid_argument("nonpositive rate");
  for (double r : down)
    if (!(r > 0.0)) throw std::invalid_argument("nonpositive rate");

  std::vector<std::string> labels(n + 1);
  for (std::size_t i = 0; i <= n; ++i) labels[i] = std::to_string(i);
  std::vector<std::map<std::size_t, double>> rates(n + 1);
  std::vector<double> diag(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    rates[i][i + 1] = up[i];
    rates[i + 1][i] = down[i];
  }
  for (std::size_t i = 0; i <= n; ++i) {
    double sum = 0.0;
    for (const auto& [_, r] : rates[i]) sum += r;
    diag[i] = -sum;
  }
  return Generator(StateSpace(std::move(labels)), std::move(rates), std::move(diag), true);
}

}  // namespace taboo
