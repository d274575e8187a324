#include "vrql/sampling.hpp"

#include "vrql/errors.hpp"

#include <array>

namespace vrql {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::mt19937_64 make_engine(std::uint64_t seed) {
  // Expand through seed_seq so nearby seeds do not give correlated states.
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a);
  std::array<std::uint32_t, 4> words{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                                     static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

AliasTable::AliasTable(std::span<const double> probabilities)
    : threshold_(probabilities.size(), 0.0), alias_(probabilities.size(), 0) {
  const std::size_t n = probabilities.size();
  if (n == 0) throw ValidationError("AliasTable: empty distribution");

  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small;
  std::vector<std::uint32_t> large;
  small.reserve(n);
  large.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = probabilities[i] * static_cast<double>(n);
    alias_[i] = static_cast<std::uint32_t>(i);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }

  while (!small.empty() && !large.empty()) {
    const std::uint32_t less = small.back();
    small.pop_back();
    const std::uint32_t more = large.back();
    threshold_[less] = scaled[less];
    alias_[less] = more;
    scaled[more] = (scaled[more] + scaled[less]) - 1.0;
    if (scaled[more] < 1.0) {
      large.pop_back();
      small.push_back(more);
    }
  }
  // Leftovers differ from 1 only by rounding.
  for (std::uint32_t i : large) threshold_[i] = 1.0;
  for (std::uint32_t i : small) threshold_[i] = 1.0;
}

GenerativeSampler::GenerativeSampler(const TabularMdp& mdp, std::uint64_t seed)
    : num_states_(mdp.num_states),
      num_actions_(mdp.num_actions),
      seed_(seed),
      rng_(make_engine(seed)),
      counter_(std::make_shared<std::uint64_t>(0)) {
  validate_mdp(mdp);
  auto tables = std::make_shared<std::vector<AliasTable>>();
  tables->reserve(mdp.num_pairs());
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    for (std::size_t a = 0; a < mdp.num_actions; ++a) tables->emplace_back(mdp.row(s, a));
  }
  tables_ = std::move(tables);
}

GenerativeSampler::GenerativeSampler(std::shared_ptr<const std::vector<AliasTable>> tables,
                                     std::size_t states, std::size_t actions, std::uint64_t seed,
                                     std::shared_ptr<std::uint64_t> counter)
    : tables_(std::move(tables)),
      num_states_(states),
      num_actions_(actions),
      seed_(seed),
      rng_(make_engine(seed)),
      counter_(std::move(counter)) {}

SampleMatrix GenerativeSampler::draw() {
  SampleMatrix out(num_states_, num_actions_);
  draw_into(out);
  return out;
}

void GenerativeSampler::draw_into(SampleMatrix& out) {
  if (out.num_states != num_states_ || out.num_actions != num_actions_) {
    out = SampleMatrix(num_states_, num_actions_);
  }
  const auto& tables = *tables_;
  for (std::size_t i = 0; i < tables.size(); ++i) out.next_state[i] = tables[i].sample(uniform());
  ++*counter_;
}

GenerativeSampler GenerativeSampler::split(std::string_view label) const {
  return GenerativeSampler(tables_, num_states_, num_actions_, derive_stream_seed(seed_, label),
                           counter_);
}

GenerativeSampler build_sampler(const TabularMdp& mdp, std::uint64_t seed) {
  return GenerativeSampler(mdp, seed);
}

std::uint64_t derive_stream_seed(std::uint64_t parent_seed, std::string_view label) noexcept {
  return splitmix64(splitmix64(parent_seed) ^ fnv1a(label));
}

}  // namespace vrql
