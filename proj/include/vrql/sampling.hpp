#pragma once

#include "vrql/mdp.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace vrql {

/// One draw of the generative model: a next state for every (s, a).
struct SampleMatrix {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<std::uint32_t> next_state;  // row-major over (s, a)

  SampleMatrix() = default;
  SampleMatrix(std::size_t states, std::size_t actions)
      : num_states(states), num_actions(actions), next_state(states * actions, 0) {}

  std::uint32_t operator()(std::size_t s, std::size_t a) const {
    return next_state[s * num_actions + a];
  }
  std::uint32_t& operator()(std::size_t s, std::size_t a) { return next_state[s * num_actions + a]; }
};

/// Walker/Vose alias table for a single categorical distribution.
/// O(n) construction, O(1) draw from one uniform variate.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(std::span<const double> probabilities);

  /// Maps u in [0, 1) to an outcome index.
  std::uint32_t sample(double u) const noexcept {
    const double scaled = u * static_cast<double>(threshold_.size());
    auto column = static_cast<std::size_t>(scaled);
    if (column >= threshold_.size()) column = threshold_.size() - 1;
    return (scaled - static_cast<double>(column)) < threshold_[column]
               ? static_cast<std::uint32_t>(column)
               : alias_[column];
  }

  std::size_t size() const noexcept { return threshold_.size(); }
  std::span<const double> thresholds() const noexcept { return threshold_; }
  std::span<const std::uint32_t> aliases() const noexcept { return alias_; }

 private:
  std::vector<double> threshold_;
  std::vector<std::uint32_t> alias_;
};

/// Seeded generative model over a fixed MDP.
///
/// Every call to draw() produces one SampleMatrix (one "matrix sample") and
/// bumps a counter. Children created with split() get an independent stream
/// derived from (seed, label) but share the parent's counter, so totals stay
/// global across recentering and inner-loop streams.
///
/// A sampler is single-owner. The alias tables are immutable and shared
/// between a parent and its children.
class GenerativeSampler {
 public:
  GenerativeSampler(const TabularMdp& mdp, std::uint64_t seed);

  SampleMatrix draw();
  void draw_into(SampleMatrix& out);

  GenerativeSampler split(std::string_view label) const;

  std::uint64_t samples_drawn() const noexcept { return *counter_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }

 private:
  GenerativeSampler(std::shared_ptr<const std::vector<AliasTable>> tables, std::size_t states,
                    std::size_t actions, std::uint64_t seed, std::shared_ptr<std::uint64_t> counter);

  double uniform() noexcept { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::shared_ptr<const std::vector<AliasTable>> tables_;
  std::size_t num_states_;
  std::size_t num_actions_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::shared_ptr<std::uint64_t> counter_;
};

/// Validates the MDP and builds per-(s, a) alias tables.
GenerativeSampler build_sampler(const TabularMdp& mdp, std::uint64_t seed);

/// Seed of the child stream for (parent seed, label). Exposed for tests.
std::uint64_t derive_stream_seed(std::uint64_t parent_seed, std::string_view label) noexcept;

}  // namespace vrql
