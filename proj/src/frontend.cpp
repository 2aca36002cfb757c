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

#include "thz/frontend.hpp"

#include <array>
#include <cmath>

#include "dsp.hpp"
#include "thz/rng.hpp"

namespace thz {

QuantizationParams QuantizationParams::infinite() { return {kInfiniteBits, 0.0, 1.0}; }

QuantizationParams QuantizationParams::from_bits(int b) {
  if (b <= 0) throw std::invalid_argument("ADC bit depth must be >= 1");
  static constexpr std::array<double, 5> kRho = {0.3634, 0.1175, 0.03454, 0.009497, 0.002499};
  const double rho = b <= 5 ? kRho[b - 1] : (kPi * std::sqrt(3.0) / 2.0) * std::pow(2.0, -2 * b);
  return {b, rho, 1.0 - rho};
}

QuantizationParams QuantizationParams::from_config(const SystemConfig& cfg) {
  return cfg.infinite_adc() ? infinite() : from_bits(cfg.adc_bits);
}

CMat random_phase_beamformer(int rows, int cols, int n_q, double scale, std::mt19937_64& rng) {
  if (n_q < 1) throw std::invalid_argument("random_phase_beamformer: phase bits must be >= 1");
  const int levels = 1 << n_q;
  std::uniform_int_distribution<int> pick(0, levels - 1);
  CMat out(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      const double phi = 2.0 * kPi * pick(rng) / levels;
      out(r, c) = scale * cdouble(std::cos(phi), std::sin(phi));
    }
  }
  return out;
}

CMat PilotFrame::padded_pilots(int m, int K) const {
  const CMat& p = blocks.at(m).pilots;
  CMat out = CMat::Zero(p.rows(), K);
  out.leftCols(p.cols()) = p;
  return out;
}

PilotFrame make_pilot_frame(const SystemConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  PilotFrame frame;
  frame.blocks.resize(cfg.num_blocks);
  const double sd = std::sqrt(cfg.pilot_power);
  std::uniform_int_distribution<int> bit(0, 1);
  for (auto& blk : frame.blocks) {
    blk.f_rf.resize(cfg.num_users);
    blk.f_bb.resize(cfg.num_users);
    for (int u = 0; u < cfg.num_users; ++u) {
      blk.f_rf[u] = random_phase_beamformer(cfg.n_u, cfg.n_rf_u, cfg.phase_bits,
                                            1.0 / std::sqrt(cfg.n_u), rng);
      blk.f_bb[u] = CMat::Identity(cfg.n_rf_u, cfg.n_s_u);
    }
    blk.w_rf = random_phase_beamformer(cfg.n_bs, cfg.n_rf_bs, cfg.phase_bits,
                                       1.0 / std::sqrt(cfg.n_bs), rng);
    blk.pilots = CMat(cfg.total_streams(), cfg.num_pilot_vectors);
    const double amp = sd / std::sqrt(2.0);
    for (int p = 0; p < blk.pilots.cols(); ++p) {
      for (int s = 0; s < blk.pilots.rows(); ++s) {
        blk.pilots(s, p) = amp * cdouble(bit(rng) * 2 - 1, bit(rng) * 2 - 1);
      }
    }
  }
  return frame;
}

std::vector<CVec> circular_convolve(const std::vector<CMat>& taps,
                                    const std::vector<CVec>& blocks) {
  const int K = static_cast<int>(taps.size());
  if (static_cast<int>(blocks.size()) != K) {
    throw ShapeError("circular_convolve: taps and blocks must share length K");
  }
  if (K == 0) return {};
  const auto rows = taps[0].rows();
  const auto cols = taps[0].cols();
  for (const auto& t : taps) {
    if (t.rows() != rows || t.cols() != cols) throw ShapeError("circular_convolve: ragged taps");
  }
  for (const auto& b : blocks) {
    if (b.size() != cols) throw ShapeError("circular_convolve: block/tap width mismatch");
  }
  std::vector<CVec> out(K, CVec::Zero(rows));
  for (int q = 0; q < K; ++q) {
    for (int n = 0; n < K; ++n) {
      if (taps[n].isZero(0.0)) continue;
      out[q].noalias() += taps[n] * blocks[((q - n) % K + K) % K];
    }
  }
  return out;
}

namespace {

/// Aggregate pre-combining signal covariance: L_m = sum_u sum_n H_u(n) T_u H_u^H(n).
/// Evaluated in the DFT domain via Parseval: (1/K) sum_k H_u[k] T_u H_u[k]^H.
CMat signal_covariance(const ChannelRealization& channel, const BlockFrame& blk,
                       const SystemConfig& cfg) {
  const int K = cfg.num_subcarriers;
  CMat L = CMat::Zero(cfg.n_bs, cfg.n_bs);
  for (int u = 0; u < cfg.num_users; ++u) {
    const CMat fe = blk.f_rf[u] * blk.f_bb[u];
    const CMat T = cfg.pilot_power * fe * fe.adjoint();
    for (int k = 0; k < K; ++k) {
      const CMat& H = channel.per_user[u][k];
      L.noalias() += H * T * H.adjoint() / static_cast<double>(K);
    }
  }
  return L;
}

}  // namespace

NoiseCovariances quantized_noise_covariance(const ChannelRealization& channel,
                                            const PilotFrame& frame, const SystemConfig& cfg,
                                            const QuantizationParams& qp) {
  const int M = cfg.num_blocks;
  const int Ns = cfg.total_streams();
  NoiseCovariances out;
  out.J.resize(M);
  out.P_eta.resize(M);
  out.pre_adc_var.resize(M);
  out.R = CMat::Zero(M * Ns, M * Ns);
  const double k2 = qp.kappa * qp.kappa;
  const double kq = qp.kappa * (1.0 - qp.kappa);
  for (int m = 0; m < M; ++m) {
    const BlockFrame& blk = frame.blocks[m];
    const CMat L = signal_covariance(channel, blk, cfg);
    const CMat WW = blk.w_rf.adjoint() * blk.w_rf;
    const CMat Jt = blk.w_rf.adjoint() * L * blk.w_rf + cfg.noise_power * WW;
    out.pre_adc_var[m] = Jt.diagonal().real();
    CMat J = CMat::Zero(cfg.n_rf_bs, cfg.n_rf_bs);
    J.diagonal() = (kq * Jt.diagonal().real()).cast<cdouble>();
    out.J[m] = J;
    out.P_eta[m] = k2 * cfg.noise_power * WW + J;
    // Training-phase W_BB selects the first N_s RF chains.
    out.R.block(m * Ns, m * Ns, Ns, Ns) = out.P_eta[m].topLeftCorner(Ns, Ns);
  }
  return out;
}

CMat build_dictionary(int G, int n, double f, double f_c) {
  CMat out(n, G);
  for (int r = 0; r < G; ++r) {
    out.col(r) = array_response(2.0 * r / G - 1.0, f, f_c, n);
  }
  return out;
}

CMat PilotObservation::omega(int k) const {
  if (!omega_override.empty()) return omega_override.at(k);
  const SystemConfig& cfg = config;
  const int M = cfg.num_blocks;
  const int Ns = cfg.total_streams();
  const int gtu = cfg.grid_tu;
  const int gbs = cfg.grid_bs;
  CMat out(M * Ns, cfg.beamspace_size());
  for (int m = 0; m < M; ++m) {
    const CMat left = w_eff[m] * a_rx[k];  // N_s x G_BS
    for (int u = 0; u < cfg.num_users; ++u) {
      const CVec xu = x_freq[m].col(k).segment(u * cfg.n_u, cfg.n_u);
      const CVec row = a_tx[k].adjoint() * xu;  // (x^T A_T^*)^T
      for (int t = 0; t < gtu; ++t) {
        out.block(m * Ns, u * gbs * gtu + t * gbs, Ns, gbs) = row(t) * left;
      }
    }
  }
  return out;
}

CMat PilotObservation::psi(int k) const {
  const SystemConfig& cfg = config;
  const int M = cfg.num_blocks;
  const int Ns = cfg.total_streams();
  CMat out = CMat::Zero(M * Ns, cfg.n_bs * cfg.total_tx_antennas());
  for (int m = 0; m < M; ++m) {
    for (int c = 0; c < cfg.total_tx_antennas(); ++c) {
      out.block(m * Ns, c * cfg.n_bs, Ns, cfg.n_bs) = x_freq[m](c, k) * w_eff[m];
    }
  }
  return out;
}

CMat PilotObservation::delta(int k) const {
  if (!delta_override.empty()) return delta_override.at(k);
  const SystemConfig& cfg = config;
  const int gbs = cfg.grid_bs;
  const int gtu = cfg.grid_tu;
  CMat out = CMat::Zero(cfg.n_bs * cfg.total_tx_antennas(), cfg.beamspace_size());
  for (int u = 0; u < cfg.num_users; ++u) {
    for (int t = 0; t < gtu; ++t) {
      for (int a = 0; a < cfg.n_u; ++a) {
        // kron(conj(A_T), A_B): row block a, column block t.
        out.block(u * cfg.n_bs * cfg.n_u + a * cfg.n_bs, u * gbs * gtu + t * gbs, cfg.n_bs,
                  gbs) = std::conj(a_tx[k](a, t)) * a_rx[k];
      }
    }
  }
  return out;
}

namespace {

// Optimal uniform mid-rise step sizes for a unit-variance Gaussian input.
constexpr std::array<double, 5> kMidRiseStep = {1.596, 0.9957, 0.586, 0.3352, 0.1881};

double quantize_component(double x, double step, int bits) {
  const long long max_level = (1LL << (bits - 1)) - 1;
  long long level = static_cast<long long>(std::floor(x / step));
  if (level > max_level) level = max_level;
  if (level < -max_level - 1) level = -max_level - 1;
  return (level + 0.5) * step;
}

}  // namespace

PilotObservation simulate_received_pilots(const ChannelRealization& channel,
                                          const PilotFrame& frame, const SystemConfig& cfg,
                                          const QuantizationParams& qp, std::mt19937_64& rng,
                                          const SimulateOptions& opts) {
  cfg.validate();
  const int K = cfg.num_subcarriers;
  const int M = cfg.num_blocks;
  const int Ns = cfg.total_streams();
  if (static_cast<int>(frame.blocks.size()) != M) {
    throw ShapeError("simulate_received_pilots: frame block count != M");
  }
  if (opts.model == QuantizerModel::mid_rise && (qp.is_infinite() || qp.bits > 5)) {
    throw std::invalid_argument("mid-rise quantizer mode supports 1..5 bits");
  }

  const NoiseCovariances cov = quantized_noise_covariance(channel, frame, cfg, qp);

  PilotObservation obs;
  obs.config = cfg;
  obs.Y = CMat(M * Ns, K);
  obs.R = cov.R;
  obs.w_eff.resize(M);
  obs.x_freq.resize(M);
  obs.a_rx.resize(K);
  obs.a_tx.resize(K);
  for (int k = 0; k < K; ++k) {
    const double f = subcarrier_frequency(k + 1, cfg);
    obs.a_rx[k] = build_dictionary(cfg.grid_bs, cfg.n_bs, f, cfg.carrier_freq);
    obs.a_tx[k] = build_dictionary(cfg.grid_tu, cfg.n_u, f, cfg.carrier_freq);
  }

  for (int m = 0; m < M; ++m) {
    const BlockFrame& blk = frame.blocks[m];
    // Stream pilots to the DFT domain (unitary convention).
    const CMat g_f = dsp::fft_unitary_rows(frame.padded_pilots(m, K));
    CMat x_f(cfg.total_tx_antennas(), K);
    for (int u = 0; u < cfg.num_users; ++u) {
      x_f.middleRows(u * cfg.n_u, cfg.n_u) =
          blk.f_rf[u] * blk.f_bb[u] * g_f.middleRows(u * cfg.n_s_u, cfg.n_s_u);
    }
    obs.x_freq[m] = x_f;
    obs.w_eff[m] = qp.kappa * blk.w_rf.leftCols(Ns).adjoint();

    // Noiseless receive samples: per-subcarrier products, then back to time.
    CMat r_f(cfg.n_bs, K);
    for (int k = 0; k < K; ++k) r_f.col(k) = channel.concat(k) * x_f.col(k);
    CMat r_t = dsp::ifft_unitary_rows(r_f);

    // Analog combining with thermal noise, drawn per time sample.
    CMat z_t(cfg.n_rf_bs, K);
    for (int q = 0; q < K; ++q) {
      CVec v(cfg.n_bs);
      if (cfg.noise_power > 0.0) {
        for (int a = 0; a < cfg.n_bs; ++a) v(a) = complex_gaussian(rng, cfg.noise_power);
      } else {
        v.setZero();
      }
      z_t.col(q) = blk.w_rf.adjoint() * (r_t.col(q) + v);
    }

    // ADC stage.
    CMat y_t(cfg.n_rf_bs, K);
    if (opts.model == QuantizerModel::bussgang) {
      y_t = qp.kappa * z_t;
      const RVec jd = cov.J[m].diagonal().real();
      if (jd.maxCoeff() > 0.0) {
        for (int q = 0; q < K; ++q) {
          for (int i = 0; i < cfg.n_rf_bs; ++i) {
            if (jd(i) > 0.0) y_t(i, q) += complex_gaussian(rng, jd(i));
          }
        }
      }
    } else {
      for (int i = 0; i < cfg.n_rf_bs; ++i) {
        const double comp_sigma = std::sqrt(std::max(cov.pre_adc_var[m](i), 0.0) / 2.0);
        const double step = kMidRiseStep[qp.bits - 1] * comp_sigma;
        for (int q = 0; q < K; ++q) {
          if (comp_sigma == 0.0) {
            y_t(i, q) = 0.0;
            continue;
          }
          y_t(i, q) = cdouble(quantize_component(z_t(i, q).real(), step, qp.bits),
                              quantize_component(z_t(i, q).imag(), step, qp.bits));
        }
      }
    }

    // FFT per RF chain, then the identity-selection baseband combiner.
    const CMat y_f = dsp::fft_unitary_rows(y_t);
    obs.Y.middleRows(m * Ns, Ns) = y_f.topRows(Ns);
  }
  return obs;
}

}  // namespace thz
