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

#ifndef THZ_CONFIG_HPP
#define THZ_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "thz/types.hpp"

namespace thz {

/// ADC resolution sentinel: adc_bits == kInfiniteBits means no quantization.
inline constexpr int kInfiniteBits = 0;

struct PsfConfig {
  enum class Kind { rrc, rect };
  Kind kind = Kind::rrc;
  double roll_off = 0.80;
  int upsampling = 20;  // samples per symbol period on the evaluation grid
  // Root-raised-cosine support is truncated to +/- rrc_span symbol periods.
  int rrc_span = 4;
};

/// Every scalar dimension and physical parameter of the simulated link.
struct SystemConfig {
  int n_bs = 64;          // receive antennas at the BS
  int n_u = 4;            // transmit antennas per user
  int num_users = 3;      // U
  int n_rf_bs = 8;        // BS RF chains
  int n_rf_u = 2;         // RF chains per user
  int n_s_u = 2;          // data streams per user
  int num_subcarriers = 128;  // K
  int num_pilot_vectors = 123;  // P, must satisfy K = P + D - 1
  int num_blocks = 20;    // M
  int num_taps = 6;       // D
  int num_data_vectors = 100;
  int num_nlos = 3;       // NLoS clusters per user
  int num_rays = 1;       // diffused rays per cluster
  double carrier_freq = 0.65e12;  // Hz
  double bandwidth = 5e9;         // Hz
  int grid_bs = 128;      // receive angular bins G_BS
  int grid_tu = 8;        // transmit angular bins per user G_Tu
  int adc_bits = 3;       // kInfiniteBits for an unquantized receiver
  double pilot_power = 1.0;   // sigma_d^2
  double noise_power = 0.1;   // sigma_n^2
  PsfConfig psf{};
  int tds_per_chain = 2;  // S
  int phase_bits = 4;     // N_Q
  double absorption_coeff = 0.015;  // mu_abs, 1/m
  double distance = 15.0;           // LoS distance, m
  double tx_gain_dbi = 8.0;
  double rx_gain_dbi = 28.0;
  std::uint64_t seed = 1;

  int total_tx_antennas() const { return num_users * n_u; }         // N_T
  int total_streams() const { return num_users * n_s_u; }           // N_s
  int grid_total() const { return num_users * grid_tu; }            // G_T
  int beamspace_size() const { return grid_bs * grid_total(); }     // G_BS * G_T
  double sample_period() const { return 1.0 / bandwidth; }          // T_s
  double carrier_period() const { return 1.0 / carrier_freq; }      // T_c
  bool infinite_adc() const { return adc_bits <= kInfiniteBits; }
  double tx_gain_amplitude() const { return std::pow(10.0, tx_gain_dbi / 20.0); }
  double rx_gain_amplitude() const { return std::pow(10.0, rx_gain_dbi / 20.0); }

  /// Throws ConfigError naming the violated relation.
  void validate() const;
};

/// Table-style reflecting-material description (roughness in mm, absorption
/// in 1/cm as listed; converted to SI inside the physics routines).
struct Material {
  std::string name;
  double roughness_std_mm = 0.0;
  double absorption_coeff_cm = 0.0;
  double refractive_index = 1.0;

  double roughness_std_m() const { return roughness_std_mm * 1e-3; }
  double absorption_coeff_m() const { return absorption_coeff_cm * 1e2; }
  void validate() const;
};

/// Two-component Gaussian mixture over direction sines. Raw (p1, p2) are
/// normalized to a simplex before sampling; nu are component standard
/// deviations and r the component centers.
struct GmmAngleParams {
  double p1 = 0.5, p2 = 0.5;
  double nu1 = 0.1, nu2 = 0.1;
  double r1 = 0.0, r2 = 0.0;

  double weight1() const { return p1 / (p1 + p2); }
  double weight2() const { return p2 / (p1 + p2); }
  void validate() const;
};

/// Built-in material list (six common indoor reflectors).
std::vector<Material> default_materials();

/// Default AoA / AoD mixture parameterizations. The component centers are
/// not standardized; the defaults place them symmetrically at +/-0.35.
GmmAngleParams default_aoa_gmm();
GmmAngleParams default_aod_gmm();

/// Full-size reference configuration.
SystemConfig paper_profile();
/// Reduced configuration sized for CI runtime.
SystemConfig desk_profile();

}  // namespace thz

#endif  // THZ_CONFIG_HPP
