#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "mtsplan/plan.hpp"
#include "mtsplan/raytrace.hpp"

namespace mtsplan {

/// Black-box received power feedback: one linear-mW value per user for a phase vector.
class RssOracle {
 public:
  virtual ~RssOracle() = default;
  virtual std::size_t users() const = 0;
  virtual std::vector<double> evaluate(const PhaseVector& phases) const = 0;
};

/// Oracle backed by the cascaded channel model of each user.
class SimulationOracle final : public RssOracle {
 public:
  SimulationOracle(std::vector<ChannelSet> channels, double tx_power_dbm);
  /// Channels of every user position toward the plan's panels.
  static SimulationOracle from_plan(const Scene& scene, const DeploymentPlan& plan,
                                    const std::vector<Vec2>& users);

  std::size_t users() const override { return channels_.size(); }
  std::vector<double> evaluate(const PhaseVector& phases) const override;
  const std::vector<ChannelSet>& channels() const { return channels_; }
  double tx_power_dbm() const { return tx_power_dbm_; }

 private:
  std::vector<ChannelSet> channels_;
  std::vector<std::vector<Complex>> products_;  ///< a_n * b_n per user
  double tx_power_dbm_;
};

/// Adapter for callables (test fixtures, replayed logs).
class FunctionOracle final : public RssOracle {
 public:
  using Fn = std::function<std::vector<double>(const PhaseVector&)>;
  FunctionOracle(std::size_t users, Fn fn) : users_(users), fn_(std::move(fn)) {}
  std::size_t users() const override { return users_; }
  std::vector<double> evaluate(const PhaseVector& phases) const override { return fn_(phases); }

 private:
  std::size_t users_;
  Fn fn_;
};

struct SampleLog {
  std::vector<PhaseVector> samples;
  std::vector<std::vector<double>> rss_mw;  ///< [sample][user]

  std::size_t size() const { return samples.size(); }
  std::size_t users() const { return rss_mw.empty() ? 0 : rss_mw.front().size(); }
  /// Throws ValidationError unless lengths agree and every value is finite and >= 0.
  void validate() const;
};

/// T i.i.d. uniform bit vectors from a 64-bit Mersenne Twister seeded with `seed`.
std::vector<PhaseVector> draw_samples(std::size_t n_atoms, std::size_t T, std::uint64_t seed);

/// Evaluates the oracle on each sample in index order.
SampleLog collect_samples(const RssOracle& oracle, std::vector<PhaseVector> samples);

/// Mean of the user's RSS over samples whose `atom` bit equals `value`; the unconditional
/// mean when no sample matches.
double conditional_sample_mean(const SampleLog& log, std::size_t atom, std::uint8_t value,
                               std::size_t user);

/// Per-atom argmax of the two conditional means (ties to 0).
PhaseVector decide_from_log(const SampleLog& log, std::size_t user);

struct CsmResult {
  PhaseVector solution;
  SampleLog log;
};

CsmResult csm_solve(const RssOracle& oracle, std::size_t n_atoms, std::size_t T,
                    std::uint64_t seed, std::size_t user);

/// Strict per-bit majority; exact ties resolve to 0.
PhaseVector majority_vote(std::span<const PhaseVector> votes);

struct BaselineResult {
  PhaseVector best;
  std::size_t best_index;
  SampleLog log;
};

/// Best sampled vector by minimum-user RSS (first wins on ties).
BaselineResult greedy_baseline(const RssOracle& oracle, std::size_t n_atoms, std::size_t T,
                               std::uint64_t seed);

inline constexpr std::size_t kExhaustiveMaxAtoms = 20;

/// Global argmax of minimum-user RSS over all 2^n vectors; ties to the lexicographically
/// smallest. Throws ValidationError for n_atoms > 20.
PhaseVector exhaustive_solve(const RssOracle& oracle, std::size_t n_atoms);

double min_user(std::span<const double> rss_mw);
double mean_user(std::span<const double> rss_mw);

/// CSV: sample_idx,bits_hex,rss_user0_mw,...
void write_sample_log_csv(std::ostream& out, const SampleLog& log);

}  // namespace mtsplan
