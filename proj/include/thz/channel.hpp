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

#ifndef THZ_CHANNEL_HPP
#define THZ_CHANNEL_HPP

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "thz/config.hpp"
#include "thz/types.hpp"

namespace thz {

/// Physical frequency of subcarrier k (1-based, 1 <= k <= K):
/// f_k = f_c + (k - (K+1)/2) * B / K. Throws std::out_of_range.
double subcarrier_frequency(int k_one_based, const SystemConfig& cfg);

/// Beam-squint-aware steering vector for a half-wavelength ULA:
/// entry m = (1/sqrt(n)) * exp(-j*pi*(f/f_c)*m*psi), psi = sin(theta).
CVec array_response(double psi, double f, double f_c, int n);

/// Characteristic impedance Z(f) of a reflecting medium.
cdouble characteristic_impedance(double f, const Material& mat);

struct ReflectionResult {
  cdouble gamma;                        // Fresnel x Rayleigh-roughness product
  bool total_internal_reflection = false;
};

/// First-order reflection coefficient at incidence omega_i in [0, pi/2).
ReflectionResult reflection_coefficient(double f, double omega_i, const Material& mat);

/// Path gain magnitude |alpha|: spreading loss x molecular absorption,
/// optionally scaled by a reflection coefficient for NLoS paths.
double path_gain_magnitude(double f, double ds, double mu_abs,
                           std::optional<cdouble> reflection = std::nullopt);

/// Transmit pulse shape pul(t). Rect is the ideal one-sample tap on
/// [0, T_s); RRC is evaluated on the upsampled grid (T_s / upsampling
/// spacing) truncated to +/- rrc_span symbol periods, with unit energy on
/// that grid.
class PulseShape {
 public:
  static PulseShape rect();
  static PulseShape rrc(double roll_off, int upsampling, int span = 4);
  static PulseShape from_config(const PsfConfig& cfg);

  double operator()(double t, double sample_period) const;
  bool is_rect() const { return kind_ == PsfConfig::Kind::rect; }

 private:
  PsfConfig::Kind kind_ = PsfConfig::Kind::rect;
  int upsampling_ = 1;
  int span_ = 4;
  std::vector<double> taps_;  // RRC values on the upsampled grid
};

/// DFT-domain tap coefficient beta_tau[k] = sum_d pul(d*T_s - tau) *
/// exp(-j*2*pi*k*d/K); k is the 0-based DFT bin.
cdouble pulse_shaping_coeff(double tau, int k, int K, double sample_period,
                            const PulseShape& psf);

/// One draw from the two-component direction-sine mixture; draws outside
/// [-1, 1] are rejected and redrawn.
double sample_angle_gmm(const GmmAngleParams& params, std::mt19937_64& rng);

struct PathParams {
  enum class Kind { LoS, NLoS };
  Kind kind = Kind::LoS;
  double delay = 0.0;        // tau, seconds, in [0, (D-1) T_s]
  double aoa_sine = 0.0;     // receive direction sine
  double aod_sine = 0.0;     // transmit direction sine
  double incidence_angle = 0.0;  // omega_i, NLoS only
  Material material;             // NLoS only
  double distance = 0.0;         // m
  double gain_phase = 0.0;       // varpi, radians
  bool total_internal_reflection = false;
};

struct ChannelRealization {
  // per_user[u][k] is the n_bs x n_u response at subcarrier k (0-based bin).
  std::vector<std::vector<CMat>> per_user;
  std::vector<std::vector<PathParams>> paths;  // per user
  SystemConfig config;

  int num_subcarriers() const { return static_cast<int>(per_user.empty() ? 0 : per_user[0].size()); }
  /// Concatenated N_BS x N_T response [H_1[k] ... H_U[k]].
  CMat concat(int k) const;
  /// Scale every matrix by 1/s (used for large-scale-fading removal).
  void scale(double s);
};

/// Frequency-dependent absorption hook; when absent the configured constant
/// coefficient is used. Bind AbsorptionTable::at for a tabulated profile.
using AbsorptionModel = std::function<double(double)>;

/// Draws path parameters and synthesizes the per-user, per-subcarrier
/// channel. Physical gains (spreading, absorption, reflection, antenna
/// gains in dBi) are applied as linear amplitude factors.
ChannelRealization generate_channel(const SystemConfig& cfg,
                                    const std::vector<Material>& materials,
                                    const GmmAngleParams& gmm_aoa,
                                    const GmmAngleParams& gmm_aod,
                                    std::mt19937_64& rng,
                                    const AbsorptionModel& absorption = {});

/// Deterministic builder from explicit path parameters (planted scenarios).
ChannelRealization channel_from_paths(const SystemConfig& cfg,
                                      const std::vector<std::vector<PathParams>>& paths,
                                      const AbsorptionModel& absorption = {});

/// LoS reference amplitude sqrt(N_u N_BS) * B_T * B_R * |alpha(f_c, ds)|.
/// Dividing a realization by this value expresses the channel relative to
/// the LoS link budget, which is the scale the SNR definition
/// 10*log10(1/sigma_n^2) presumes.
double channel_scale_reference(const SystemConfig& cfg);

}  // namespace thz

#endif  // THZ_CHANNEL_HPP
