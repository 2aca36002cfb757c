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

#include "thz/config.hpp"

namespace thz {

void SystemConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(n_bs >= 1 && n_u >= 1 && num_users >= 1, "antenna and user counts must be positive");
  require(n_rf_bs >= 1 && n_rf_u >= 1 && n_s_u >= 1, "RF-chain and stream counts must be positive");
  require(num_subcarriers >= 1 && num_taps >= 1 && num_blocks >= 1,
          "K, D and M must be positive");
  require(num_pilot_vectors >= 1, "P must be positive");
  require(carrier_freq > 0 && bandwidth > 0, "carrier_freq and bandwidth must be positive");
  require(pilot_power > 0, "pilot_power must be positive");
  require(noise_power >= 0, "noise_power must be nonnegative");
  require(distance > 0, "distance must be positive");
  require(absorption_coeff >= 0, "absorption_coeff must be nonnegative");
  require(phase_bits >= 1, "phase_bits must be at least 1");
  require(tds_per_chain >= 1, "tds_per_chain must be at least 1");
  require(num_nlos >= 0 && num_rays >= 1, "num_nlos must be >= 0 and num_rays >= 1");
  require(num_data_vectors >= 1, "num_data_vectors must be positive");

  const int n_s = total_streams();
  const int sum_rf_u = num_users * n_rf_u;
  require(n_s_u <= n_rf_u, "streams per user must not exceed per-user RF chains");
  require(n_s <= sum_rf_u, "N_s <= sum_u N_RF^u violated");
  require(sum_rf_u <= n_rf_bs, "sum_u N_RF^u <= N_RF^B violated");
  require(n_rf_bs <= n_bs, "N_RF^B <= N_BS violated");
  require(num_subcarriers == num_pilot_vectors + num_taps - 1,
          "zero-padding relation K = P + D - 1 violated");
  require(grid_tu >= 2 * n_u, "grid size G_Tu >= 2 N_u violated");
  require(grid_bs >= 2 * n_bs, "grid size G_BS >= 2 N_BS violated");
  require(n_bs % tds_per_chain == 0, "N_BS must be divisible by the subarray count S");
  if (psf.kind == PsfConfig::Kind::rrc) {
    require(psf.roll_off >= 0.0 && psf.roll_off <= 1.0, "RRC roll-off must be in [0, 1]");
    require(psf.upsampling >= 1 && psf.rrc_span >= 1, "RRC grid parameters must be positive");
  }
}

void Material::validate() const {
  if (roughness_std_mm < 0) throw ConfigError("material roughness must be nonnegative");
  if (absorption_coeff_cm < 0) throw ConfigError("material absorption must be nonnegative");
  if (refractive_index < 1) throw ConfigError("material refractive index must be >= 1");
}

void GmmAngleParams::validate() const {
  if (p1 < 0 || p2 < 0 || p1 + p2 <= 0) throw ConfigError("GMM weights must be normalizable");
  if (nu1 < 0 || nu2 < 0) throw ConfigError("GMM spreads must be nonnegative");
}

std::vector<Material> default_materials() {
  return {
      {"PC", 0.0, 23.0, 1.52},
      {"PS", 0.002, 2.0, 1.6},
      {"PVC", 0.028, 19.0, 1.68},
      {"Plaster_s1", 0.05, 10.0, 2.0},
      {"Gypsum_plaster", 0.13, 38.0, 1.4},
      {"Plaster_s2", 0.15, 10.0, 2.0},
  };
}

GmmAngleParams default_aoa_gmm() { return {0.724, 2.198, 0.276, 7.297, 0.35, -0.35}; }
GmmAngleParams default_aod_gmm() { return {0.429, 1.811, 0.571, 12.201, 0.35, -0.35}; }

SystemConfig paper_profile() {
  SystemConfig cfg;  // defaults are the full-size values
  cfg.validate();
  return cfg;
}

SystemConfig desk_profile() {
  SystemConfig cfg;
  cfg.n_bs = 16;
  cfg.n_u = 2;
  cfg.num_users = 2;
  cfg.n_rf_bs = 4;
  cfg.n_rf_u = 2;
  // One stream per two-antenna user: the coarse 4-bin transmit grid cannot
  // support two well-conditioned grid-steered streams from this array.
  cfg.n_s_u = 1;
  cfg.num_subcarriers = 16;
  cfg.num_taps = 4;
  cfg.num_pilot_vectors = 13;
  cfg.num_blocks = 10;
  cfg.grid_bs = 32;
  cfg.grid_tu = 4;
  cfg.num_data_vectors = 100;
  cfg.validate();
  return cfg;
}

}  // namespace thz
