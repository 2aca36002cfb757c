// Copyright (C) 2026 thzsim contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Batch driver: loads a JSON config (or a named profile), applies command-line
// overrides, runs the requested Monte-Carlo experiment and writes CSV results.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "thz/experiments.hpp"

namespace {

std::vector<double> parse_snr_range(const std::string& text) {
  // "min:step:max" or a comma-separated list.
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double lo = 0, step = 0, hi = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(text);
    if (!(ss >> lo >> c1 >> step >> c2 >> hi) || c1 != ':' || c2 != ':' || step <= 0) {
      throw thz::ConfigError("--snr expects min:step:max with step > 0");
    }
    for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
  } else {
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  }
  if (out.empty()) throw thz::ConfigError("--snr produced an empty grid");
  return out;
}

std::vector<int> parse_bits_list(const std::string& text) {
  std::vector<int> out;
  std::istringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "inf") out.push_back(thz::kInfiniteBits);
    else out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw thz::ConfigError("--adc-bits produced an empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wideband multi-user THz MIMO link simulator"};
  std::string config_path, experiment_name, snr_text, bits_text, psf_name, out_path = "results.csv";
  std::string profile_name;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;

  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--experiment", experiment_name,
                 "nmse_vs_snr|ber_vs_snr|se_vs_snr|adc_sweep|gain_profile|psf_compare");
  app.add_option("--seed", seed, "master RNG seed");
  app.add_option("--snr", snr_text, "SNR grid in dB: min:step:max or comma list");
  app.add_option("--trials", trials, "Monte-Carlo trials per point");
  app.add_option("--adc-bits", bits_text, "ADC sweep list, e.g. 1,2,3,inf");
  app.add_option("--psf", psf_name, "pulse shaping: rrc or rect");
  app.add_option("--out", out_path, "output CSV path");
  app.add_option("--profile", profile_name, "base profile: paper or desk");

  CLI11_PARSE(app, argc, argv);
  seed_set = app.count("--seed") > 0;

  try {
    thz::ParsedConfig parsed;
    if (!config_path.empty()) {
      parsed = thz::parse_config(config_path);
    } else {
      parsed.system = thz::paper_profile();
      parsed.experiment.base = parsed.system;
    }
    if (!profile_name.empty()) {
      if (profile_name == "paper") parsed.system = thz::paper_profile();
      else if (profile_name == "desk") parsed.system = thz::desk_profile();
      else throw thz::ConfigError("--profile expects paper or desk");
      parsed.experiment.base = parsed.system;
    }
    if (!experiment_name.empty()) {
      parsed.experiment.kind = thz::experiment_from_string(experiment_name);
    }
    if (!snr_text.empty()) parsed.experiment.snr_grid_db = parse_snr_range(snr_text);
    if (trials > 0) parsed.experiment.trials = trials;
    if (!bits_text.empty()) parsed.experiment.adc_bits_list = parse_bits_list(bits_text);
    if (!psf_name.empty()) {
      if (psf_name == "rrc") parsed.experiment.base.psf.kind = thz::PsfConfig::Kind::rrc;
      else if (psf_name == "rect") parsed.experiment.base.psf.kind = thz::PsfConfig::Kind::rect;
      else throw thz::ConfigError("--psf expects rrc or rect");
    }
    if (seed_set) parsed.experiment.seed = seed;

    if (parsed.experiment.kind == thz::ExperimentKind::gain_profile) {
      const auto rows = thz::run_gain_profile(parsed.experiment);
      thz::write_gain_profile_csv(rows, out_path);
      std::cout << "wrote " << rows.size() << " gain rows to " << out_path << "\n";
      return 0;
    }

    const thz::ResultTable table = thz::run_experiment(parsed.experiment);
    thz::write_results_csv(table, out_path);
    std::cout << "wrote " << table.rows.size() << " result rows to " << out_path << "\n";
    for (const auto& r : table.rows) {
      std::printf("  %-12s %-22s snr=%6.1f  %s=%.6e  (n=%d, se=%.2e, fail=%d)\n",
                  r.experiment.c_str(), r.method.c_str(), r.snr_db, r.metric.c_str(), r.value,
                  r.trials, r.stderr_value, r.failures);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
