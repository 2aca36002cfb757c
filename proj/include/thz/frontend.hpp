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

#ifndef THZ_FRONTEND_HPP
#define THZ_FRONTEND_HPP

#include <random>
#include <vector>

#include "thz/channel.hpp"
#include "thz/config.hpp"
#include "thz/types.hpp"

namespace thz {

/// Bussgang linearization constants for a b-bit scalar ADC.
struct QuantizationParams {
  int bits = kInfiniteBits;
  double rho = 0.0;      // inverse-SNR distortion factor
  double kappa = 1.0;    // Bussgang gain, 1 - rho

  static QuantizationParams infinite();
  static QuantizationParams from_bits(int b);  // throws std::invalid_argument for b <= 0
  static QuantizationParams from_config(const SystemConfig& cfg);
  bool is_infinite() const { return bits <= kInfiniteBits; }
};

/// Constant-modulus matrix with entries scale * exp(j*phi), phi uniform on
/// the 2^n_q-point phase grid.
CMat random_phase_beamformer(int rows, int cols, int n_q, double scale, std::mt19937_64& rng);

/// Per-block training hardware and pilots.
struct BlockFrame {
  std::vector<CMat> f_rf;   // per user, n_u x n_rf_u
  std::vector<CMat> f_bb;   // per user, n_rf_u x n_s_u
  CMat w_rf;                // n_bs x n_rf_bs
  CMat pilots;              // N_s x P stream-level pilot vectors (time domain)
};

struct PilotFrame {
  std::vector<BlockFrame> blocks;  // M of them

  /// Time-domain zero-padded stream pilots for block m: N_s x K.
  CMat padded_pilots(int m, int K) const;
};

/// Draws QPSK pilots and quantized-phase RF stages for all M blocks.
/// During training the baseband combiner W_BB is the first N_s columns of
/// the identity, so only pilots and RF stages are random.
PilotFrame make_pilot_frame(const SystemConfig& cfg, std::mt19937_64& rng);

/// Length-K circular convolution of matrix taps with vector blocks:
/// out(q) = sum_n taps[n] * blocks[(q - n) mod K].
std::vector<CVec> circular_convolve(const std::vector<CMat>& taps,
                                    const std::vector<CVec>& blocks);

struct NoiseCovariances {
  std::vector<CMat> J;          // per block, quantization noise covariance (diagonal)
  std::vector<CMat> P_eta;      // per block, pre-baseband equivalent noise covariance
  CMat R;                       // M N_s x M N_s block diagonal, after baseband combining
  std::vector<RVec> pre_adc_var;  // per block, diag(J~_m): signal variance at each ADC
};

/// Equivalent-noise covariances of the Bussgang-linearized pilot chain.
NoiseCovariances quantized_noise_covariance(const ChannelRealization& channel,
                                            const PilotFrame& frame,
                                            const SystemConfig& cfg,
                                            const QuantizationParams& qp);

/// Grid dictionary: column r (1-based) = array_response(2(r-1)/G - 1, f, f_c, n).
CMat build_dictionary(int G, int n, double f, double f_c);

/// Stacked observation plus everything needed to assemble the per-subcarrier
/// sensing operators on demand.
struct PilotObservation {
  CMat Y;                      // M N_s x K stacked received pilots
  CMat R;                      // M N_s x M N_s equivalent noise covariance
  std::vector<CMat> w_eff;     // per block: N_s x n_bs combined RF stage (W_BB^H Q W_RF^H)
  std::vector<CMat> x_freq;    // per block: N_T x K precoded pilots in the DFT domain
  std::vector<CMat> a_rx;      // per subcarrier: n_bs x G_BS receive dictionary
  std::vector<CMat> a_tx;      // per subcarrier: n_u x G_Tu transmit dictionary (shared by users)
  SystemConfig config;
  // Explicit per-subcarrier operators for synthetic instances and oracle
  // cross-checks; when nonempty they take precedence over factor assembly.
  std::vector<CMat> omega_override;
  std::vector<CMat> delta_override;

  int rows() const { return static_cast<int>(Y.rows()); }
  /// Equivalent sensing matrix Omega_U[k]: M N_s x G_BS G_T.
  CMat omega(int k) const;
  /// Non-sparse sensing matrix Psi_U[k]: M N_s x N_BS N_T.
  CMat psi(int k) const;
  /// Block-diagonal sparsifying dictionary Delta_U[k]: N_BS N_T x G_BS G_T.
  CMat delta(int k) const;
};

enum class QuantizerModel {
  bussgang,     // linear gain plus CN(0, J_m) distortion (the signal model)
  mid_rise,     // true uniform mid-rise quantizer; for validation only
};

struct SimulateOptions {
  QuantizerModel model = QuantizerModel::bussgang;
};

/// Runs the pilot chain: precode, circularly convolve with the channel,
/// analog-combine, quantize, FFT, baseband-combine, stack.
PilotObservation simulate_received_pilots(const ChannelRealization& channel,
                                          const PilotFrame& frame,
                                          const SystemConfig& cfg,
                                          const QuantizationParams& qp,
                                          std::mt19937_64& rng,
                                          const SimulateOptions& opts = {});

}  // namespace thz

#endif  // THZ_FRONTEND_HPP
