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

// Entangled-pair sources modeled as classical mixtures of particle-number
// channels: each emission either delivers the singlet to both parties, a
// lone particle to one of them, an uncorrelated pair, or nothing. Built-in
// tables cover the neutral-pion decay and the two-photon atomic cascade;
// arbitrary tables load from a small JSON schema.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eprsim/errors.hpp"
#include "eprsim/qstate.hpp"

namespace eprsim {

/// What one emission channel actually hands to Alice (particle 2) and Bob
/// (particle 3).
enum class DeliveryKind {
  EntangledPair,
  AliceOnly,
  BobOnly,
  None,
  UncorrelatedPair,
};

inline const char* to_string(DeliveryKind kind) {
  switch (kind) {
    case DeliveryKind::EntangledPair:
      return "entangled_pair";
    case DeliveryKind::AliceOnly:
      return "alice_only";
    case DeliveryKind::BobOnly:
      return "bob_only";
    case DeliveryKind::None:
      return "none";
    case DeliveryKind::UncorrelatedPair:
      return "uncorrelated_pair";
  }
  return "?";
}

struct SourceChannel {
  std::string label;
  double probability = 0.0;
  DeliveryKind delivery = DeliveryKind::None;
};

struct SourceModel {
  std::string name;
  std::vector<SourceChannel> channels;
  bool renormalized = false;
  // Probability sum seen by the last validate() pass, before renormalization.
  double raw_probability_sum = 0.0;
};

inline constexpr double kRenormalizationBand = 1e-3;
// Sums within this distance of 1 are taken at face value; renormalizing them
// would only churn last-ulp noise and flip the flag on every reload.
inline constexpr double kExactSumTolerance = 1e-12;

/// Checks a channel table and renormalizes probabilities when the raw sum is
/// off by at most 1e-3; larger deviations are rejected as malformed.
inline SourceModel validate(SourceModel model) {
  if (model.channels.empty()) {
    fail(ErrorKind::EmptyModel, "source model has no channels");
  }
  double sum = 0.0;
  for (const SourceChannel& ch : model.channels) {
    if (!(ch.probability >= 0.0)) {
      fail(ErrorKind::NegativeProbability,
           "channel \"" + ch.label + "\" has negative probability");
    }
    if (ch.probability > 1.0) {
      fail(ErrorKind::OutOfRange,
           "channel \"" + ch.label + "\" has probability above 1");
    }
    sum += ch.probability;
  }
  if (std::abs(sum - 1.0) > kRenormalizationBand) {
    fail(ErrorKind::ProbabilitySumError,
         "channel probabilities sum to " + std::to_string(sum) +
             ", outside the 1e-3 renormalization band");
  }
  model.raw_probability_sum = sum;
  if (std::abs(sum - 1.0) > kExactSumTolerance) {
    for (SourceChannel& ch : model.channels) ch.probability /= sum;
    model.renormalized = true;
  }
  return model;
}

/// Perfect source: the singlet arrives every time.
inline SourceModel ideal_source() {
  SourceModel model;
  model.name = "ideal";
  model.channels = {{"singlet", 1.0, DeliveryKind::EntangledPair}};
  return validate(std::move(model));
}

/// Neutral-pion decay table. Channel probabilities are the squares of the
/// branching amplitudes 0.9940, 0.1095, 0.0056, 0.00027; the squared sum
/// overshoots 1 by 5.77e-5, which validation absorbs by renormalizing.
/// The Dalitz channel delivers a photon to Alice only; the all-lepton
/// channels deliver nothing she would mistake for a photon.
inline SourceModel pion_source() {
  SourceModel model;
  model.name = "pion";
  model.channels = {
      {"gg", 0.9940 * 0.9940, DeliveryKind::EntangledPair},
      {"gamma_e+e-", 0.1095 * 0.1095, DeliveryKind::AliceOnly},
      {"e+e-e+e-", 0.0056 * 0.0056, DeliveryKind::None},
      {"e+e-", 0.00027 * 0.00027, DeliveryKind::None},
  };
  return validate(std::move(model));
}

/// Two-photon atomic cascade with a four-photon admixture of weight
/// `c2_squared`. In the admixture branch Bob either receives nothing or,
/// with fraction `uncorrelated_fraction`, a photon carrying no correlation
/// to Alice's. Zero-probability channels are omitted.
inline SourceModel cascade_source(double c2_squared, double uncorrelated_fraction = 0.1) {
  if (!(c2_squared >= 0.0 && c2_squared <= 0.01)) {
    fail(ErrorKind::OutOfRange, "c2_squared must lie in [0, 0.01]");
  }
  if (!(uncorrelated_fraction >= 0.0 && uncorrelated_fraction <= 1.0)) {
    fail(ErrorKind::OutOfRange, "uncorrelated_fraction must lie in [0, 1]");
  }
  SourceModel model;
  model.name = "cascade";
  model.channels.push_back({"gg", 1.0 - c2_squared, DeliveryKind::EntangledPair});
  const double missing = (1.0 - uncorrelated_fraction) * c2_squared;
  const double uncorrelated = uncorrelated_fraction * c2_squared;
  if (missing > 0.0) {
    model.channels.push_back({"gggg_bob_missing", missing, DeliveryKind::AliceOnly});
  }
  if (uncorrelated > 0.0) {
    model.channels.push_back(
        {"gggg_uncorrelated", uncorrelated, DeliveryKind::UncorrelatedPair});
  }
  return validate(std::move(model));
}

inline constexpr double kFineStructureAlpha = 1.0 / 137.035999;

/// alpha^order: the rate penalty for radiating `order` extra photons.
inline double suppression_factor(int order, double alpha = kFineStructureAlpha) {
  if (order < 1) fail(ErrorKind::OutOfRange, "order must be >= 1");
  double factor = 1.0;
  for (int i = 0; i < order; ++i) factor *= alpha;
  return factor;
}

/// One sampled emission with its delivered particles. `joint_resource` is
/// present iff both parties received something; a lone Alice-side particle
/// is maximally mixed (the table carries no polarization information).
struct EmissionOutcome {
  std::string channel_label;
  DeliveryKind delivery = DeliveryKind::None;
  std::optional<DensityMatrix> alice_particle;
  std::optional<DensityMatrix> joint_resource;
};

/// Channel selection by cumulative probability; pure in (model, rng_draw).
inline std::size_t sample_channel_index(const SourceModel& model, double rng_draw) {
  double cumulative = 0.0;
  std::size_t index = model.channels.size() - 1;
  for (std::size_t i = 0; i < model.channels.size(); ++i) {
    cumulative += model.channels[i].probability;
    if (rng_draw < cumulative) {
      index = i;
      break;
    }
  }
  while (index > 0 && model.channels[index].probability <= 0.0) --index;
  return index;
}

inline const DensityMatrix& singlet_resource() {
  static const DensityMatrix resource = pure_density(singlet());
  return resource;
}

inline const DensityMatrix& uncorrelated_resource() {
  static const DensityMatrix resource = tensor(maximally_mixed(1), maximally_mixed(1));
  return resource;
}

inline EmissionOutcome sample_emission(const SourceModel& model, double rng_draw) {
  const SourceChannel& channel = model.channels[sample_channel_index(model, rng_draw)];
  EmissionOutcome outcome;
  outcome.channel_label = channel.label;
  outcome.delivery = channel.delivery;
  switch (channel.delivery) {
    case DeliveryKind::EntangledPair:
      outcome.joint_resource = singlet_resource();
      break;
    case DeliveryKind::UncorrelatedPair:
      outcome.joint_resource = uncorrelated_resource();
      break;
    case DeliveryKind::AliceOnly:
      outcome.alice_particle = maximally_mixed(1);
      break;
    case DeliveryKind::BobOnly:
    case DeliveryKind::None:
      break;
  }
  return outcome;
}

namespace detail {

inline std::optional<DeliveryKind> delivery_from_string(const std::string& text) {
  if (text == "entangled_pair") return DeliveryKind::EntangledPair;
  if (text == "alice_only") return DeliveryKind::AliceOnly;
  if (text == "bob_only") return DeliveryKind::BobOnly;
  if (text == "none") return DeliveryKind::None;
  if (text == "uncorrelated_pair") return DeliveryKind::UncorrelatedPair;
  return std::nullopt;
}

}  // namespace detail

/// Parses and validates a source-table document:
///   { "name": "...", "channels": [
///       { "label": "...", "probability": 0.988, "delivery": "entangled_pair" }, ... ] }
/// Probabilities are raw (pre-renormalization) decimals; scientific notation
/// is accepted.
inline SourceModel load_source(const std::string& document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::ParseError, e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::ParseError, "top level must be an object");
  if (!doc.contains("name") || !doc["name"].is_string()) {
    fail(ErrorKind::ParseError, "missing or non-string \"name\"");
  }
  if (!doc.contains("channels") || !doc["channels"].is_array()) {
    fail(ErrorKind::ParseError, "missing or non-array \"channels\"");
  }
  SourceModel model;
  model.name = doc["name"].get<std::string>();
  std::size_t index = 0;
  for (const nlohmann::json& entry : doc["channels"]) {
    const std::string at = "channel " + std::to_string(index);
    if (!entry.is_object()) fail(ErrorKind::ParseError, at + " must be an object");
    if (!entry.contains("label") || !entry["label"].is_string()) {
      fail(ErrorKind::ParseError, at + ": missing or non-string \"label\"");
    }
    if (!entry.contains("probability") || !entry["probability"].is_number()) {
      fail(ErrorKind::ParseError, at + ": missing or non-numeric \"probability\"");
    }
    if (!entry.contains("delivery") || !entry["delivery"].is_string()) {
      fail(ErrorKind::ParseError, at + ": missing or non-string \"delivery\"");
    }
    const std::string delivery_text = entry["delivery"].get<std::string>();
    const auto delivery = detail::delivery_from_string(delivery_text);
    if (!delivery) {
      fail(ErrorKind::ParseError,
           at + ": unknown delivery value \"" + delivery_text + "\"");
    }
    model.channels.push_back(SourceChannel{entry["label"].get<std::string>(),
                                           entry["probability"].get<double>(), *delivery});
    ++index;
  }
  return validate(std::move(model));
}

/// Inverse of load_source for validated models.
inline std::string serialize(const SourceModel& model) {
  nlohmann::ordered_json doc;
  doc["name"] = model.name;
  doc["channels"] = nlohmann::ordered_json::array();
  for (const SourceChannel& ch : model.channels) {
    nlohmann::ordered_json entry;
    entry["label"] = ch.label;
    entry["probability"] = ch.probability;
    entry["delivery"] = to_string(ch.delivery);
    doc["channels"].push_back(entry);
  }
  return doc.dump(2) + "\n";
}

}  // namespace eprsim
