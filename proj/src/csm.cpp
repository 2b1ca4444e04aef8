#include "mtsplan/csm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>

#include "mtsplan/error.hpp"

namespace mtsplan {

SimulationOracle::SimulationOracle(std::vector<ChannelSet> channels, double tx_power_dbm)
    : channels_(std::move(channels)), tx_power_dbm_(tx_power_dbm) {
  products_.reserve(channels_.size());
  for (const auto& ch : channels_) {
    std::vector<Complex> p;
    p.reserve(ch.cascaded.size());
    for (const auto& pair : ch.cascaded) p.push_back(pair.ap_to_atom * pair.atom_to_rx);
    products_.push_back(std::move(p));
  }
}

SimulationOracle SimulationOracle::from_plan(const Scene& scene, const DeploymentPlan& plan,
                                             const std::vector<Vec2>& users) {
  std::vector<ChannelSet> channels;
  channels.reserve(users.size());
  for (const auto& u : users) channels.push_back(cascaded_channels(scene, plan, u));
  return SimulationOracle(std::move(channels), scene.ap().tx_power_dbm);
}

std::vector<double> SimulationOracle::evaluate(const PhaseVector& phases) const {
  std::vector<double> out(channels_.size());
  for (std::size_t u = 0; u < channels_.size(); ++u) {
    const auto& prod = products_[u];
    if (phases.size() != prod.size())
      throw std::invalid_argument("phase vector length does not match the oracle's atom count");
    Complex field = channels_[u].direct;
    for (std::size_t n = 0; n < prod.size(); ++n) field += phases.bits[n] ? -prod[n] : prod[n];
    out[u] = dbm_to_mw(field_to_dbm(field, tx_power_dbm_));
  }
  return out;
}

void SampleLog::validate() const {
  if (rss_mw.size() != samples.size())
    throw ValidationError("sample log has mismatched sample and RSS counts");
  for (std::size_t t = 0; t < samples.size(); ++t) {
    if (samples[t].size() != samples.front().size())
      throw ValidationError("sample log vectors differ in length");
    if (rss_mw[t].size() != rss_mw.front().size())
      throw ValidationError("sample log rows differ in user count");
    for (double v : rss_mw[t])
      if (!std::isfinite(v) || v < 0.0) throw ValidationError("sample log RSS must be finite and >= 0");
  }
}

std::vector<PhaseVector> draw_samples(std::size_t n_atoms, std::size_t T, std::uint64_t seed) {
  if (n_atoms < 1) throw ValidationError("need at least one atom to sample");
  if (T < 1) throw ValidationError("need at least one sample");
  std::mt19937_64 rng(seed);
  std::vector<PhaseVector> out;
  out.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    PhaseVector v(n_atoms);
    std::uint64_t word = 0;
    for (std::size_t n = 0; n < n_atoms; ++n) {
      if (n % 64 == 0) word = rng();
      v.bits[n] = static_cast<std::uint8_t>(word & 1u);
      word >>= 1;
    }
    out.push_back(std::move(v));
  }
  return out;
}

SampleLog collect_samples(const RssOracle& oracle, std::vector<PhaseVector> samples) {
  SampleLog log{std::move(samples), {}};
  log.rss_mw.reserve(log.samples.size());
  for (const auto& s : log.samples) {
    auto rss = oracle.evaluate(s);
    if (rss.size() != oracle.users()) throw StageError("oracle", "returned wrong user count");
    log.rss_mw.push_back(std::move(rss));
  }
  log.validate();
  return log;
}

namespace {

struct ConditionalSums {
  std::vector<double> sum[2];
  std::vector<std::size_t> count[2];
  double total = 0.0;
};

ConditionalSums accumulate(const SampleLog& log, std::size_t user) {
  if (log.size() == 0) throw ValidationError("sample log is empty");
  if (user >= log.users()) throw ValidationError("user index out of range");
  const std::size_t n = log.samples.front().size();
  ConditionalSums s;
  for (int v = 0; v < 2; ++v) {
    s.sum[v].assign(n, 0.0);
    s.count[v].assign(n, 0);
  }
  for (std::size_t t = 0; t < log.size(); ++t) {
    const double r = log.rss_mw[t][user];
    s.total += r;
    const auto& bits = log.samples[t].bits;
    for (std::size_t a = 0; a < n; ++a) {
      s.sum[bits[a]][a] += r;
      ++s.count[bits[a]][a];
    }
  }
  return s;
}

double mean_of(const ConditionalSums& s, std::size_t atom, int value, std::size_t total_count) {
  if (s.count[value][atom] == 0) return s.total / static_cast<double>(total_count);
  return s.sum[value][atom] / static_cast<double>(s.count[value][atom]);
}

}  // namespace

double conditional_sample_mean(const SampleLog& log, std::size_t atom, std::uint8_t value,
                               std::size_t user) {
  if (log.size() == 0) throw ValidationError("sample log is empty");
  if (atom >= log.samples.front().size()) throw ValidationError("atom index out of range");
  double sum = 0.0, total = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < log.size(); ++t) {
    total += log.rss_mw[t][user];
    if (log.samples[t].bits[atom] == value) {
      sum += log.rss_mw[t][user];
      ++count;
    }
  }
  return count == 0 ? total / static_cast<double>(log.size()) : sum / static_cast<double>(count);
}

PhaseVector decide_from_log(const SampleLog& log, std::size_t user) {
  const auto s = accumulate(log, user);
  const std::size_t n = log.samples.front().size();
  PhaseVector out(n);
  for (std::size_t a = 0; a < n; ++a)
    out.bits[a] = mean_of(s, a, 1, log.size()) > mean_of(s, a, 0, log.size()) ? 1 : 0;
  return out;
}

CsmResult csm_solve(const RssOracle& oracle, std::size_t n_atoms, std::size_t T,
                    std::uint64_t seed, std::size_t user) {
  if (user >= oracle.users()) throw ValidationError("user index out of range");
  CsmResult r{{}, collect_samples(oracle, draw_samples(n_atoms, T, seed))};
  r.solution = decide_from_log(r.log, user);
  return r;
}

PhaseVector majority_vote(std::span<const PhaseVector> votes) {
  if (votes.empty()) throw ValidationError("majority vote needs at least one voter");
  const std::size_t n = votes.front().size();
  std::vector<std::size_t> ones(n, 0);
  for (const auto& v : votes) {
    if (v.size() != n) throw std::invalid_argument("votes differ in length");
    for (std::size_t a = 0; a < n; ++a) ones[a] += v.bits[a];
  }
  PhaseVector out(n);
  for (std::size_t a = 0; a < n; ++a) out.bits[a] = 2 * ones[a] > votes.size() ? 1 : 0;
  return out;
}

double min_user(std::span<const double> rss_mw) {
  return *std::min_element(rss_mw.begin(), rss_mw.end());
}

double mean_user(std::span<const double> rss_mw) {
  return std::accumulate(rss_mw.begin(), rss_mw.end(), 0.0) / static_cast<double>(rss_mw.size());
}

BaselineResult greedy_baseline(const RssOracle& oracle, std::size_t n_atoms, std::size_t T,
                               std::uint64_t seed) {
  BaselineResult r{{}, 0, collect_samples(oracle, draw_samples(n_atoms, T, seed))};
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < r.log.size(); ++t) {
    const double v = min_user(r.log.rss_mw[t]);
    if (v > best) {
      best = v;
      r.best_index = t;
    }
  }
  r.best = r.log.samples[r.best_index];
  return r;
}

PhaseVector exhaustive_solve(const RssOracle& oracle, std::size_t n_atoms) {
  if (n_atoms < 1) throw ValidationError("need at least one atom");
  if (n_atoms > kExhaustiveMaxAtoms)
    throw ValidationError("exhaustive search refused for " + std::to_string(n_atoms) +
                          " atoms (limit " + std::to_string(kExhaustiveMaxAtoms) + ")");
  // Counting k upward with bit 0 as the most significant bit visits vectors in
  // lexicographic order, so keeping only strict improvements gives the smallest argmax.
  PhaseVector v(n_atoms), best(n_atoms);
  double best_value = -std::numeric_limits<double>::infinity();
  const std::uint64_t total = std::uint64_t{1} << n_atoms;
  for (std::uint64_t k = 0; k < total; ++k) {
    for (std::size_t i = 0; i < n_atoms; ++i) v.bits[i] = (k >> (n_atoms - 1 - i)) & 1u;
    const auto rss = oracle.evaluate(v);
    const double value = min_user(rss);
    if (value > best_value) {
      best_value = value;
      best = v;
    }
  }
  return best;
}

void write_sample_log_csv(std::ostream& out, const SampleLog& log) {
  out << "sample_idx,bits_hex";
  for (std::size_t u = 0; u < log.users(); ++u) out << ",rss_user" << u << "_mw";
  out << '\n';
  // Linear powers span many decades; scientific notation keeps them exact enough to audit.
  out << std::scientific << std::setprecision(12);
  for (std::size_t t = 0; t < log.size(); ++t) {
    out << t << ',' << to_hex(log.samples[t]);
    for (double v : log.rss_mw[t]) out << ',' << v;
    out << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace mtsplan
