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

#ifndef THZ_EXPERIMENTS_HPP
#define THZ_EXPERIMENTS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "thz/config.hpp"
#include "thz/types.hpp"

namespace thz {

enum class ExperimentKind {
  nmse_vs_snr,
  ber_vs_snr,
  se_vs_snr,
  adc_sweep,
  gain_profile,
  psf_compare,
};

enum class EstimatorKind { hbg_sr, sbl_per_subcarrier, mmv_ls, gsomp };
enum class BeamformerKind { ttd, flat, optimal_digital };

std::string to_string(ExperimentKind k);
std::string to_string(EstimatorKind k);
std::string to_string(BeamformerKind k);
ExperimentKind experiment_from_string(const std::string& s);
EstimatorKind estimator_from_string(const std::string& s);
BeamformerKind beamformer_from_string(const std::string& s);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::nmse_vs_snr;
  std::vector<double> snr_grid_db = {0, 5, 10, 15};
  int trials = 10;
  std::vector<EstimatorKind> estimators = {EstimatorKind::hbg_sr};
  std::vector<BeamformerKind> beamformers = {BeamformerKind::ttd, BeamformerKind::flat};
  std::vector<int> adc_bits_list = {1, 2, 3, kInfiniteBits};  // for adc_sweep
  SystemConfig base;
  std::uint64_t seed = 1;
  // EM settings forwarded to the estimators.
  double em_epsilon = 1e-4;
  int em_max_iterations = 30;

  void validate() const;
};

struct ResultRow {
  std::string experiment;
  std::string method;
  double snr_db = 0.0;
  std::string metric;
  double value = 0.0;
  int trials = 0;
  double stderr_value = 0.0;
  int failures = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

struct GainProfileRow {
  double angle_sine;
  int subcarrier_index;  // 1-based
  double gain;
  std::string method;
};

/// Runs the Monte-Carlo experiment described by `spec`. Deterministic for a
/// fixed (spec, seed): every trial draws from its own substream and the
/// aggregation is an ordered reduction over trial indices.
ResultTable run_experiment(const ExperimentSpec& spec);

/// Array-gain profile rows for the gain_profile experiment kind.
std::vector<GainProfileRow> run_gain_profile(const ExperimentSpec& spec);

/// CSV with header experiment,method,snr_db,metric,value,trials,stderr,failures;
/// values in scientific notation with 9 significant digits.
void write_results_csv(const ResultTable& table, const std::string& path);

/// CSV with header method,angle_sine,subcarrier_index,gain.
void write_gain_profile_csv(const std::vector<GainProfileRow>& rows, const std::string& path);

/// JSON config loader: an empty or absent body yields the full-size default
/// profile. Unknown keys are rejected; invariants enforced on load.
struct ParsedConfig {
  SystemConfig system;
  ExperimentSpec experiment;
};
ParsedConfig parse_config(const std::string& path);
ParsedConfig parse_config_text(const std::string& text);
std::string serialize_config(const ParsedConfig& cfg);

}  // namespace thz

#endif  // THZ_EXPERIMENTS_HPP
