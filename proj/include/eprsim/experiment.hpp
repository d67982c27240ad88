// Copyright 2026 The eprsim Authors.
//
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

// Monte Carlo harness measuring teleportation error under a channel-mixture
// source, plus the closed-form rates it is checked against.
//
// Reproducibility contract: every trial draws from its own RNG stream keyed
// by (seed, trial_index), and per-block partial sums are merged in a fixed
// order, so reports and trial records are identical for any worker count.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "eprsim/errors.hpp"
#include "eprsim/protocol.hpp"
#include "eprsim/qstate.hpp"
#include "eprsim/rng.hpp"
#include "eprsim/source.hpp"

namespace eprsim {

/// Haar-uniform single-particle state from two uniform draws in [0, 1):
/// (a, b) = (cos(theta/2), e^{i phi} sin(theta/2)) with cos(theta) uniform
/// on [-1, 1] and phi uniform on [0, 2 pi).
inline PureState haar_random_qubit(double u1, double u2) {
  if (!(u1 >= 0.0 && u1 < 1.0) || !(u2 >= 0.0 && u2 < 1.0)) {
    fail(ErrorKind::OutOfRange, "draws must lie in [0, 1)");
  }
  const double cos_half = std::sqrt(1.0 - u1);
  const double sin_half = std::sqrt(u1);
  const double phase = 2.0 * std::numbers::pi * u2;
  return make_pure({Complex(cos_half, 0.0), std::polar(sin_half, phase)});
}

/// Input-qubit generator: Haar-uniform, or one fixed state for every trial.
class QubitSampler {
 public:
  static QubitSampler haar() { return QubitSampler(std::nullopt); }

  static QubitSampler fixed(Complex a, Complex b) {
    return QubitSampler(make_pure({a, b}));
  }

  bool is_haar() const { return !fixed_.has_value(); }

  PureState sample(SplitMix64& rng) const {
    if (fixed_) return *fixed_;
    const double u1 = rng.next_unit();
    const double u2 = rng.next_unit();
    return haar_random_qubit(u1, u2);
  }

 private:
  explicit QubitSampler(std::optional<PureState> fixed) : fixed_(std::move(fixed)) {}

  std::optional<PureState> fixed_;
};

struct TrialRecord {
  std::uint64_t trial_index = 0;
  std::string channel_label;
  bool consumed = false;     // Alice ran her Bell measurement
  bool coincidence = false;  // both parties received a particle
  std::optional<BellOutcome> outcome;
  std::optional<double> fidelity;  // present iff coincidence
};

struct ExperimentReport {
  std::string source_name;
  std::uint64_t trials_requested = 0;
  std::uint64_t trials_consumed = 0;
  std::uint64_t coincidences = 0;
  double unconditional_failure_rate = 0.0;
  double postselected_mean_fidelity = 0.0;
  double analytic_failure_rate = 0.0;
  double analytic_postselected_fidelity = 0.0;
  double failure_rate_ci95_low = 0.0;
  double failure_rate_ci95_high = 0.0;
  std::uint64_t seed = 0;
  double fidelity_threshold = 0.0;
};

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval at 95% (z = 1.959964); stays meaningful down to
/// zero observed successes, unlike the normal approximation.
inline ConfidenceInterval binomial_ci95(std::uint64_t successes, std::uint64_t trials) {
  if (trials < 1) fail(ErrorKind::OutOfRange, "trials must be >= 1");
  if (successes > trials) fail(ErrorKind::OutOfRange, "successes exceed trials");
  const double z = 1.959964;
  const double z2 = z * z;
  const double x = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  const double center = (x + z2 / 2.0) / (n + z2);
  const double radius = (z / (n + z2)) * std::sqrt(x * (n - x) / n + z2 / 4.0);
  const double low = center - radius;
  const double high = center + radius;
  return ConfidenceInterval{low < 0.0 ? 0.0 : low, high > 1.0 ? 1.0 : high};
}

namespace detail {

inline bool delivery_consumes(DeliveryKind kind) {
  return kind == DeliveryKind::EntangledPair || kind == DeliveryKind::AliceOnly ||
         kind == DeliveryKind::UncorrelatedPair;
}

inline void check_threshold(double fidelity_threshold) {
  if (!(fidelity_threshold > 0.5 && fidelity_threshold <= 1.0)) {
    fail(ErrorKind::OutOfRange, "fidelity_threshold must lie in (0.5, 1]");
  }
}

}  // namespace detail

/// Expected failure fraction among consumed trials. An AliceOnly emission
/// always fails (Bob has nothing); an uncorrelated pair hands Bob a
/// maximally mixed state whose fidelity is 1/2, below every admissible
/// threshold, so it always fails too.
inline double analytic_failure_rate(const SourceModel& model, double fidelity_threshold = 0.99) {
  detail::check_threshold(fidelity_threshold);
  double entangled = 0.0;
  double alice_only = 0.0;
  double uncorrelated = 0.0;
  for (const SourceChannel& ch : model.channels) {
    switch (ch.delivery) {
      case DeliveryKind::EntangledPair:
        entangled += ch.probability;
        break;
      case DeliveryKind::AliceOnly:
        alice_only += ch.probability;
        break;
      case DeliveryKind::UncorrelatedPair:
        uncorrelated += ch.probability;
        break;
      case DeliveryKind::BobOnly:
      case DeliveryKind::None:
        break;
    }
  }
  const double consumed = entangled + alice_only + uncorrelated;
  if (consumed == 0.0) return 0.0;
  return (alice_only + uncorrelated) / consumed;
}

/// Expected fidelity given a coincidence: entangled pairs teleport exactly,
/// uncorrelated pairs average 1/2.
inline double analytic_postselected_fidelity(const SourceModel& model) {
  double entangled = 0.0;
  double uncorrelated = 0.0;
  for (const SourceChannel& ch : model.channels) {
    if (ch.delivery == DeliveryKind::EntangledPair) entangled += ch.probability;
    if (ch.delivery == DeliveryKind::UncorrelatedPair) uncorrelated += ch.probability;
  }
  const double coincident = entangled + uncorrelated;
  if (coincident == 0.0) {
    fail(ErrorKind::NoCoincidenceChannels, "model has no coincidence channels");
  }
  return (entangled + 0.5 * uncorrelated) / coincident;
}

struct RunOptions {
  std::uint64_t seed = 0;
  int workers = 1;
  double fidelity_threshold = 0.99;
  bool collect_records = false;
};

struct RunOutput {
  ExperimentReport report;
  std::vector<TrialRecord> records;  // in trial order; empty unless requested
};

namespace detail {

struct BlockStats {
  std::uint64_t consumed = 0;
  std::uint64_t coincidences = 0;
  std::uint64_t failures = 0;
  double fidelity_sum = 0.0;
};

// Trials are aggregated in fixed-size blocks; block boundaries do not depend
// on the worker count, so the final merge is bitwise reproducible.
inline constexpr std::uint64_t kTrialsPerBlock = 16384;

inline void run_one_trial(const SourceModel& model, const QubitSampler& sampler,
                          double fidelity_threshold, std::uint64_t seed, std::uint64_t index,
                          BlockStats& stats, TrialRecord* record) {
  SplitMix64 rng = trial_stream(seed, index);
  const PureState input = sampler.sample(rng);
  const std::size_t channel_index = sample_channel_index(model, rng.next_unit());
  const SourceChannel& channel = model.channels[channel_index];

  if (record) {
    record->trial_index = index;
    record->channel_label = channel.label;
  }
  if (!delivery_consumes(channel.delivery)) return;

  ++stats.consumed;
  const double bell_draw = rng.next_unit();
  BellOutcome outcome{};
  std::optional<double> fidelity;
  switch (channel.delivery) {
    case DeliveryKind::EntangledPair: {
      const TeleportResult result = teleport_ideal(input, bell_draw);
      outcome = result.outcome;
      fidelity = fidelity_pure(result.bob_state, input);
      break;
    }
    case DeliveryKind::UncorrelatedPair: {
      const MixedTeleportResult result =
          teleport_with_resource(input, uncorrelated_resource(), bell_draw);
      outcome = result.outcome;
      fidelity = fidelity_mixed(result.bob_state, input);
      break;
    }
    case DeliveryKind::AliceOnly: {
      // Alice's lone particle is maximally mixed, so all four Bell results
      // are equally likely whatever the input state.
      int sampled = static_cast<int>(bell_draw * 4.0);
      if (sampled > 3) sampled = 3;
      outcome = static_cast<BellOutcome>(sampled);
      break;
    }
    default:
      break;
  }

  if (fidelity) {
    ++stats.coincidences;
    stats.fidelity_sum += *fidelity;
    if (*fidelity < fidelity_threshold) ++stats.failures;
  } else {
    ++stats.failures;  // consumed, but Bob received nothing
  }
  if (record) {
    record->consumed = true;
    record->coincidence = fidelity.has_value();
    record->outcome = outcome;
    record->fidelity = fidelity;
  }
}

}  // namespace detail

/// Runs `n` independent trials of the protocol against `model`. Trial t:
/// sample the input qubit, sample an emission channel, and if Alice received
/// a particle run her Bell measurement; when Bob also received one, apply
/// the correction and score the fidelity against the input.
inline RunOutput run_trials(const SourceModel& model, const QubitSampler& sampler,
                            std::uint64_t n, const RunOptions& options) {
  if (n < 1) fail(ErrorKind::OutOfRange, "trials must be >= 1");
  if (options.workers < 1) fail(ErrorKind::OutOfRange, "workers must be >= 1");
  detail::check_threshold(options.fidelity_threshold);
  if (model.channels.empty()) fail(ErrorKind::EmptyModel, "source model has no channels");

  const std::uint64_t num_blocks =
      (n + detail::kTrialsPerBlock - 1) / detail::kTrialsPerBlock;
  std::vector<detail::BlockStats> blocks(num_blocks);
  RunOutput output;
  if (options.collect_records) output.records.resize(n);

  const auto run_block = [&](std::uint64_t block) {
    const std::uint64_t begin = block * detail::kTrialsPerBlock;
    const std::uint64_t end = std::min(n, begin + detail::kTrialsPerBlock);
    for (std::uint64_t t = begin; t < end; ++t) {
      TrialRecord* record = options.collect_records ? &output.records[t] : nullptr;
      detail::run_one_trial(model, sampler, options.fidelity_threshold, options.seed, t,
                            blocks[block], record);
    }
  };

  if (options.workers == 1 || num_blocks == 1) {
    for (std::uint64_t block = 0; block < num_blocks; ++block) run_block(block);
  } else {
    std::atomic<std::uint64_t> next_block{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const int thread_count = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(options.workers), num_blocks));
    pool.reserve(thread_count);
    for (int w = 0; w < thread_count; ++w) {
      pool.emplace_back([&] {
        try {
          while (!failed.load(std::memory_order_relaxed)) {
            const std::uint64_t block = next_block.fetch_add(1);
            if (block >= num_blocks) break;
            run_block(block);
          }
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::uint64_t consumed = 0;
  std::uint64_t coincidences = 0;
  std::uint64_t failures = 0;
  double fidelity_sum = 0.0;
  for (const detail::BlockStats& b : blocks) {
    consumed += b.consumed;
    coincidences += b.coincidences;
    failures += b.failures;
    fidelity_sum += b.fidelity_sum;
  }

  ExperimentReport& report = output.report;
  report.source_name = model.name;
  report.trials_requested = n;
  report.trials_consumed = consumed;
  report.coincidences = coincidences;
  report.unconditional_failure_rate =
      consumed ? static_cast<double>(failures) / static_cast<double>(consumed) : 0.0;
  report.postselected_mean_fidelity =
      coincidences ? fidelity_sum / static_cast<double>(coincidences) : 0.0;
  report.analytic_failure_rate = analytic_failure_rate(model, options.fidelity_threshold);
  try {
    report.analytic_postselected_fidelity = analytic_postselected_fidelity(model);
  } catch (const Error&) {
    report.analytic_postselected_fidelity = 0.0;  // no coincidence channels
  }
  if (consumed) {
    const ConfidenceInterval ci = binomial_ci95(failures, consumed);
    report.failure_rate_ci95_low = ci.low;
    report.failure_rate_ci95_high = ci.high;
  } else {
    report.failure_rate_ci95_low = 0.0;
    report.failure_rate_ci95_high = 1.0;
  }
  report.seed = options.seed;
  report.fidelity_threshold = options.fidelity_threshold;
  return output;
}

}  // namespace eprsim
