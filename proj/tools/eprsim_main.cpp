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

// eprsim command line: run single teleportation rounds, Monte Carlo
// experiments and closed-form rate queries against built-in or file-loaded
// source models.
//
// Exit codes: 0 success, 1 domain/validation error, 2 file I/O error.

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eprsim/experiment.hpp"
#include "eprsim/protocol.hpp"
#include "eprsim/qstate.hpp"
#include "eprsim/rng.hpp"
#include "eprsim/source.hpp"

namespace {

using namespace eprsim;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 17 significant digits: enough to reparse the exact double.
std::string fmt17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string json_quote(const std::string& text) {
  return nlohmann::json(text).dump();
}

double parse_double(std::string_view text, const std::string& what) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorKind::ParseError, "cannot parse number \"" + std::string(text) + "\" in " + what);
  }
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open \"" + path + "\" for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("error while reading \"" + path + "\"");
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open \"" + path + "\" for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("error while writing \"" + path + "\"");
}

// "cascade:c2=<v>[,u=<v>]" -> cascade_source(c2, u); the model keeps the
// caller's literal ref as its name so reports stay self-describing.
SourceModel parse_cascade_ref(const std::string& ref) {
  const std::string params = ref.size() > 8 ? ref.substr(8) : "";
  if (ref.size() > 7 && ref[7] != ':') {
    fail(ErrorKind::ParseError, "cascade source must look like cascade:c2=<v>,u=<v>");
  }
  std::optional<double> c2;
  std::optional<double> u;
  std::size_t pos = 0;
  while (pos < params.size()) {
    std::size_t comma = params.find(',', pos);
    if (comma == std::string::npos) comma = params.size();
    const std::string item = params.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::ParseError, "cascade parameter \"" + item + "\" is not key=value");
    }
    const std::string key = item.substr(0, eq);
    const double value = parse_double(item.substr(eq + 1), "cascade parameter \"" + key + "\"");
    if (key == "c2") {
      c2 = value;
    } else if (key == "u") {
      u = value;
    } else {
      fail(ErrorKind::ParseError, "unknown cascade parameter \"" + key + "\"");
    }
    pos = comma + 1;
  }
  if (!c2) fail(ErrorKind::ParseError, "cascade source requires c2=<value>");
  SourceModel model = u ? cascade_source(*c2, *u) : cascade_source(*c2);
  model.name = ref;
  return model;
}

bool is_builtin_ref(const std::string& ref) {
  return ref == "ideal" || ref == "pion" || ref.rfind("cascade", 0) == 0;
}

SourceModel resolve_source(const std::string& ref) {
  if (ref == "ideal") return ideal_source();
  if (ref == "pion") return pion_source();
  if (ref.rfind("cascade", 0) == 0) return parse_cascade_ref(ref);
  return load_source(read_file(ref));
}

QubitSampler parse_sampler(const std::string& spec) {
  if (spec == "haar") return QubitSampler::haar();
  if (spec.rfind("fixed:", 0) == 0) {
    const std::string params = spec.substr(6);
    double values[4] = {0, 0, 0, 0};
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
      std::size_t comma = params.find(',', pos);
      const bool last = i == 3;
      if ((comma == std::string::npos) != last) {
        fail(ErrorKind::ParseError,
             "--input fixed takes four comma-separated reals: a_re,a_im,b_re,b_im");
      }
      if (comma == std::string::npos) comma = params.size();
      values[i] = parse_double(params.substr(pos, comma - pos), "--input");
      pos = comma + 1;
    }
    return QubitSampler::fixed(Complex(values[0], values[1]), Complex(values[2], values[3]));
  }
  fail(ErrorKind::ParseError, "--input must be haar or fixed:<a_re>,<a_im>,<b_re>,<b_im>");
}

std::string render_report(const ExperimentReport& r) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"schema_version\": 1,\n";
  os << "  \"source_name\": " << json_quote(r.source_name) << ",\n";
  os << "  \"trials_requested\": " << r.trials_requested << ",\n";
  os << "  \"trials_consumed\": " << r.trials_consumed << ",\n";
  os << "  \"coincidences\": " << r.coincidences << ",\n";
  os << "  \"unconditional_failure_rate\": " << fmt17(r.unconditional_failure_rate) << ",\n";
  os << "  \"postselected_mean_fidelity\": " << fmt17(r.postselected_mean_fidelity) << ",\n";
  os << "  \"analytic_failure_rate\": " << fmt17(r.analytic_failure_rate) << ",\n";
  os << "  \"analytic_postselected_fidelity\": " << fmt17(r.analytic_postselected_fidelity)
     << ",\n";
  os << "  \"failure_rate_ci95_low\": " << fmt17(r.failure_rate_ci95_low) << ",\n";
  os << "  \"failure_rate_ci95_high\": " << fmt17(r.failure_rate_ci95_high) << ",\n";
  os << "  \"seed\": " << r.seed << ",\n";
  os << "  \"fidelity_threshold\": " << fmt17(r.fidelity_threshold) << "\n";
  os << "}\n";
  return os.str();
}

std::string render_trial_log(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  os << "trial_index,channel,consumed,coincidence,outcome,fidelity\n";
  for (const TrialRecord& rec : records) {
    os << rec.trial_index << ',' << rec.channel_label << ','
       << (rec.consumed ? "true" : "false") << ',' << (rec.coincidence ? "true" : "false")
       << ',';
    if (rec.outcome) os << to_string(*rec.outcome);
    os << ',';
    if (rec.fidelity) os << fmt17(*rec.fidelity);
    os << '\n';
  }
  return os.str();
}

int cmd_teleport(double a_re, double a_im, double b_re, double b_im, std::uint64_t seed) {
  const PureState input = make_pure({Complex(a_re, a_im), Complex(b_re, b_im)});
  SplitMix64 rng = trial_stream(seed, 0);
  const TeleportResult result = teleport_ideal(input, rng.next_unit());
  const ClassicalMessage message(result.outcome);
  std::cout << "outcome: " << to_string(result.outcome) << "\n";
  std::cout << "message: " << message.to_string() << "\n";
  std::cout << "bob: (" << fmt17(result.bob_state.amplitude(0).real()) << ","
            << fmt17(result.bob_state.amplitude(0).imag()) << ") ("
            << fmt17(result.bob_state.amplitude(1).real()) << ","
            << fmt17(result.bob_state.amplitude(1).imag()) << ")\n";
  std::cout << "fidelity: " << fmt17(fidelity_pure(result.bob_state, input)) << "\n";
  return 0;
}

struct ExperimentArgs {
  std::string source_ref = "ideal";
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string input = "haar";
  double threshold = 0.99;
  std::string out_path;        // empty = stdout
  std::string trial_log_path;  // empty = none
};

int cmd_experiment(const ExperimentArgs& args) {
  const SourceModel model = resolve_source(args.source_ref);
  const QubitSampler sampler = parse_sampler(args.input);
  RunOptions options;
  options.seed = args.seed;
  options.workers = args.workers;
  options.fidelity_threshold = args.threshold;
  options.collect_records = !args.trial_log_path.empty();
  const RunOutput output = run_trials(model, sampler, args.trials, options);
  const std::string report = render_report(output.report);
  if (args.out_path.empty()) {
    std::cout << report;
  } else {
    write_file(args.out_path, report);
  }
  if (!args.trial_log_path.empty()) {
    write_file(args.trial_log_path, render_trial_log(output.records));
  }
  return 0;
}

int cmd_source_validate(const std::string& ref) {
  SourceModel model;
  try {
    model = resolve_source(ref);
  } catch (const Error& e) {
    std::cout << "invalid: " << e.what() << "\n";
    return 1;
  }
  std::cout << "name: " << model.name << "\n";
  std::cout << "channels:\n";
  for (const SourceChannel& ch : model.channels) {
    std::printf("  %-20s %-24s %s\n", ch.label.c_str(), fmt17(ch.probability).c_str(),
                to_string(ch.delivery));
  }
  char sum_text[64];
  std::snprintf(sum_text, sizeof sum_text, "%.8g", model.raw_probability_sum);
  std::cout << "sum=" << sum_text << (model.renormalized ? ", renormalized" : "") << "\n";
  std::cout << "valid\n";
  return 0;
}

int cmd_source_list() {
  std::cout << "ideal                   perfect singlet pair on every emission\n";
  std::cout << "pion                    neutral-pion decay channel table\n";
  std::cout << "cascade:c2=<v>[,u=<v>]  two-photon cascade with four-photon admixture\n";
  std::cout << "<path>                  JSON channel table (see source schema)\n";
  return 0;
}

int cmd_analytic(const std::string& ref, double threshold) {
  const SourceModel model = resolve_source(ref);
  std::cout << "analytic_failure_rate: " << fmt17(analytic_failure_rate(model, threshold))
            << "\n";
  std::cout << "analytic_postselected_fidelity: "
            << fmt17(analytic_postselected_fidelity(model)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum teleportation over imperfect entangled-pair sources"};
  app.require_subcommand(1);
  int status = 0;

  auto* teleport = app.add_subcommand("teleport", "Run one ideal teleportation round");
  auto t_args = std::make_shared<std::array<double, 4>>(std::array<double, 4>{1, 0, 0, 0});
  auto t_seed = std::make_shared<std::uint64_t>(0);
  teleport->add_option("--a-re", (*t_args)[0], "Re(a) of the input qubit");
  teleport->add_option("--a-im", (*t_args)[1], "Im(a) of the input qubit");
  teleport->add_option("--b-re", (*t_args)[2], "Re(b) of the input qubit");
  teleport->add_option("--b-im", (*t_args)[3], "Im(b) of the input qubit");
  teleport->add_option("--seed", *t_seed, "RNG seed for Alice's measurement");
  teleport->callback([&status, t_args, t_seed] {
    status = cmd_teleport((*t_args)[0], (*t_args)[1], (*t_args)[2], (*t_args)[3], *t_seed);
  });

  auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment");
  auto e_args = std::make_shared<ExperimentArgs>();
  experiment->add_option("--source", e_args->source_ref,
                         "Built-in name (ideal, pion, cascade:c2=<v>,u=<v>) or file path");
  experiment->add_option("--trials", e_args->trials, "Number of trials")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--seed", e_args->seed, "Master seed (default 0)");
  experiment->add_option("--workers", e_args->workers,
                         "Worker threads; results do not depend on this");
  experiment->add_option("--input", e_args->input,
                         "Input qubit: haar or fixed:<a_re>,<a_im>,<b_re>,<b_im>");
  experiment->add_option("--threshold", e_args->threshold,
                         "Fidelity threshold separating success from failure");
  experiment->add_option("--out", e_args->out_path, "Report path (default stdout)");
  experiment->add_option("--trial-log", e_args->trial_log_path, "Optional per-trial CSV path");
  experiment->callback([&status, e_args] { status = cmd_experiment(*e_args); });

  auto* source = app.add_subcommand("source", "Inspect source models");
  source->require_subcommand(1);
  auto* validate_cmd = source->add_subcommand("validate", "Validate a source table");
  auto v_ref = std::make_shared<std::string>();
  validate_cmd->add_option("ref", *v_ref, "Built-in name or file path")->required();
  validate_cmd->callback([&status, v_ref] { status = cmd_source_validate(*v_ref); });
  auto* list_cmd = source->add_subcommand("list", "List built-in source models");
  list_cmd->callback([&status] { status = cmd_source_list(); });

  auto* analytic = app.add_subcommand("analytic", "Print closed-form rates for a source");
  auto a_ref = std::make_shared<std::string>("ideal");
  auto a_threshold = std::make_shared<double>(0.99);
  analytic->add_option("--source", *a_ref, "Built-in name or file path");
  analytic->add_option("--threshold", *a_threshold, "Fidelity threshold");
  analytic->callback(
      [&status, a_ref, a_threshold] { status = cmd_analytic(*a_ref, *a_threshold); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return status;
}
