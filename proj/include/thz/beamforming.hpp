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

#ifndef THZ_BEAMFORMING_HPP
#define THZ_BEAMFORMING_HPP

#include <random>
#include <utility>
#include <vector>

#include "thz/channel.hpp"
#include "thz/config.hpp"
#include "thz/estimation.hpp"
#include "thz/frontend.hpp"
#include "thz/types.hpp"

namespace thz {

/// Dirichlet kernel sin(N pi x / 2) / sin(pi x / 2); the removable
/// singularities at even integers resolve to +/-N by continuity.
double dirichlet_kernel(int N, double x);

/// Plain normalized array gain |a^H(psi_k, f_k) a(psi_target, f_c)| of an
/// N-element array, i.e. |Xi_N(rho_k psi_k - psi_target)| / N.
double normalized_array_gain(double psi_target, double psi_k, double f_k, double f_c, int N);

/// Subarrayed gain with an extra per-subarray phase progression v_k:
/// (1/N) |Xi_S(P psi_target - rho_k P psi_k - v_k) Xi_P(-psi_target + rho_k psi_k)|.
double normalized_array_gain_ttd(double psi_target, double psi_k, double f_k, double f_c,
                                 int N, int S, int P, double v_k);

/// Per-chain delay schedule for steering sine psi: nonnegative, bounded by
/// (N/2) T_c over psi in [-1, 1].
RVec ttd_delays(double psi, int P, int S, double carrier_period);

/// Minimum delay elements per chain for full-band alignment:
/// max(ceil(N (1 - rho_k)), 1).
int min_td_elements(int N, double rho_k);

struct TTDBeamformer {
  std::vector<double> chain_sines;    // steering sine per RF chain
  std::vector<RVec> delays;           // per chain, length S (seconds)
  std::vector<CMat> w_rf;             // per subcarrier, n_bs x n_rf_bs
  std::vector<std::vector<CMat>> w_bb;  // per subcarrier, per user, n_rf_bs x n_s_u
  bool ttd_enabled = true;
};

/// Frequency-dependent hybrid combiner from selected AoA bins: per chain a
/// carrier-frequency subarray response, per-subarray delay phases, and an
/// SVD baseband stage on the equivalent channel. With enable_ttd = false
/// the delays are zero and the combiner is frequency-flat.
TTDBeamformer build_ttd_hybrid_combiner(const AngleSelection& angles,
                                        const std::vector<CMat>& channel_est,
                                        const SystemConfig& cfg, bool enable_ttd = true);

/// SVD precoder (dominant right-singular columns) and MMSE combiner for one
/// user channel at one subcarrier.
std::pair<CMat, CMat> optimal_digital_baseline(const CMat& H_u_k, double sigma2, int n_s_u);

/// Sum spectral efficiency (1/K) sum_k log2 det(I + (1/N_s) P^-1 H H^H).
double spectral_efficiency(const std::vector<CMat>& H_eff,
                           const std::vector<CMat>& noise_cov, int n_streams);

/// Frequency-flat per-user transmit stage steered at the selected AoD bins
/// (the receive-side construction applied to the transmit grid, S = 1).
std::vector<CMat> build_transmit_precoders(const AngleSelection& angles, const SystemConfig& cfg);

/// Everything the data phase needs: the per-subcarrier effective channels
/// through the true propagation channel, the receiver's believed effective
/// channels, and the per-subcarrier combined noise covariance.
struct EffectiveLink {
  std::vector<CMat> H_eff_true;   // N_s x N_s
  std::vector<CMat> H_eff_rx;     // N_s x N_s, from the CSI handed to the receiver
  std::vector<CMat> noise_cov;    // N_s x N_s
  int n_streams = 0;
};

/// Assembles the effective link for a hybrid combiner + steered precoders.
/// `believed` is the CSI used on the receive side (pass the truth for a
/// genie receiver). Noise covariances follow the Bussgang model with the
/// data-phase signal statistics.
EffectiveLink effective_link(const ChannelRealization& truth,
                             const std::vector<CMat>& believed,
                             const TTDBeamformer& combiner,
                             const std::vector<CMat>& precoders,
                             const SystemConfig& cfg, const QuantizationParams& qp,
                             double sigma_n2);

/// Fully digital reference link (SVD precoders, MMSE combiners, no
/// quantization).
EffectiveLink optimal_digital_link(const ChannelRealization& truth, double sigma_n2);

/// Bit error fraction of 8-PSK Gray-labelled MMSE detection over one link.
double ber_over_link(const EffectiveLink& link, int n_data, std::mt19937_64& rng);

/// 8-PSK Gray-labelled uplink data detection with an MMSE equalizer.
/// Returns the bit error fraction per entry of snr_db.
std::vector<double> ber_simulation(const ChannelRealization& truth,
                                   const std::vector<CMat>& believed,
                                   const TTDBeamformer& combiner,
                                   const std::vector<CMat>& precoders,
                                   const SystemConfig& cfg, const QuantizationParams& qp,
                                   const std::vector<double>& snr_db, int n_data,
                                   std::mt19937_64& rng);

}  // namespace thz

#endif  // THZ_BEAMFORMING_HPP
