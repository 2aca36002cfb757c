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

#include "thz/beamforming.hpp"

#include <cmath>

#include "thz/rng.hpp"

namespace thz {

double dirichlet_kernel(int N, double x) {
  const double m = std::round(x / 2.0);
  if (std::abs(x - 2.0 * m) < 1e-9) {
    // Removable singularity: limit is N with alternating sign.
    const long long mi = static_cast<long long>(m);
    const bool odd = ((mi % 2 + 2) % 2) * ((N - 1) % 2) % 2 != 0;
    return odd ? -static_cast<double>(N) : static_cast<double>(N);
  }
  return std::sin(N * kPi * x / 2.0) / std::sin(kPi * x / 2.0);
}

double normalized_array_gain(double psi_target, double psi_k, double f_k, double f_c, int N) {
  const double rho = f_k / f_c;
  return std::abs(dirichlet_kernel(N, rho * psi_k - psi_target)) / N;
}

double normalized_array_gain_ttd(double psi_target, double psi_k, double f_k, double f_c,
                                 int N, int S, int P, double v_k) {
  if (S * P != N) throw ShapeError("normalized_array_gain_ttd: N must equal S*P");
  const double rho = f_k / f_c;
  const double arg_sub = P * psi_target - rho * P * psi_k - v_k;
  const double arg_el = -psi_target + rho * psi_k;
  return std::abs(dirichlet_kernel(S, arg_sub) * dirichlet_kernel(P, arg_el)) / N;
}

RVec ttd_delays(double psi, int P, int S, double carrier_period) {
  if (S < 1) throw std::invalid_argument("ttd_delays: S must be >= 1");
  if (std::abs(psi) > 1.0) throw std::invalid_argument("ttd_delays: |psi| must be <= 1");
  RVec t(S);
  const double slope = P * psi / 2.0 * carrier_period;
  const double offset = psi < 0.0 ? (S - 1) * std::abs(slope) : 0.0;
  // max() guards the exact cancellation at s = S-1 against fused rounding.
  for (int s = 0; s < S; ++s) t(s) = std::max(0.0, offset + s * slope);
  return t;
}

int min_td_elements(int N, double rho_k) {
  return std::max(static_cast<int>(std::ceil(N * (1.0 - rho_k))), 1);
}

TTDBeamformer build_ttd_hybrid_combiner(const AngleSelection& angles,
                                        const std::vector<CMat>& channel_est,
                                        const SystemConfig& cfg, bool enable_ttd) {
  if (cfg.n_bs % cfg.tds_per_chain != 0) {
    throw ConfigError("build_ttd_hybrid_combiner: N_BS must be divisible by S");
  }
  const int S = cfg.tds_per_chain;
  const int P = cfg.n_bs / S;
  const int K = static_cast<int>(channel_est.size());
  if (K != cfg.num_subcarriers) throw ShapeError("channel estimate must cover all subcarriers");

  TTDBeamformer bf;
  bf.ttd_enabled = enable_ttd;
  for (int u = 0; u < cfg.num_users; ++u) {
    for (int bin : angles.rx_bins.at(u)) {
      bf.chain_sines.push_back(2.0 * bin / cfg.grid_bs - 1.0);
    }
  }
  const int n_chains = static_cast<int>(bf.chain_sines.size());
  if (n_chains != cfg.n_rf_bs) {
    throw ConfigError("build_ttd_hybrid_combiner: selected bins do not fill all RF chains");
  }
  for (double psi : bf.chain_sines) {
    bf.delays.push_back(enable_ttd ? ttd_delays(psi, P, S, cfg.carrier_period())
                                   : RVec::Zero(S));
  }

  bf.w_rf.resize(K);
  bf.w_bb.assign(K, std::vector<CMat>(cfg.num_users));
  for (int k = 0; k < K; ++k) {
    const double f = subcarrier_frequency(k + 1, cfg);
    CMat W(cfg.n_bs, n_chains);
    for (int i = 0; i < n_chains; ++i) {
      const double psi = bf.chain_sines[i];
      const CVec base = array_response(psi, cfg.carrier_freq, cfg.carrier_freq, cfg.n_bs);
      for (int s = 0; s < S; ++s) {
        // Undo the carrier-frequency inter-subarray progression, then apply
        // the delay phase so the progression tracks f_k instead.
        const double rot = kPi * s * P * psi - 2.0 * kPi * f * bf.delays[i](s);
        const cdouble ph(std::cos(rot), std::sin(rot));
        W.col(i).segment(s * P, P) = ph * base.segment(s * P, P);
      }
    }
    bf.w_rf[k] = W;
    for (int u = 0; u < cfg.num_users; ++u) {
      const CMat Hu = channel_est[k].middleCols(u * cfg.n_u, cfg.n_u);
      const CMat Heq = Hu.adjoint() * W;  // n_u x n_rf_bs
      Eigen::JacobiSVD<CMat> svd(Heq, Eigen::ComputeFullV);
      bf.w_bb[k][u] = svd.matrixV().leftCols(cfg.n_s_u);
    }
  }
  return bf;
}

std::pair<CMat, CMat> optimal_digital_baseline(const CMat& H_u_k, double sigma2, int n_s_u) {
  if (n_s_u > std::min(H_u_k.rows(), H_u_k.cols())) {
    throw std::invalid_argument("optimal_digital_baseline: too many streams for the channel rank");
  }
  Eigen::JacobiSVD<CMat> svd(H_u_k, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const CMat F = svd.matrixV().leftCols(n_s_u);
  const CMat Heq = H_u_k * F;
  const CMat gram = Heq.adjoint() * Heq +
                    sigma2 * n_s_u * CMat::Identity(n_s_u, n_s_u);
  const CMat W = Heq * gram.inverse();
  return {F, W};
}

double spectral_efficiency(const std::vector<CMat>& H_eff,
                           const std::vector<CMat>& noise_cov, int n_streams) {
  if (H_eff.size() != noise_cov.size()) throw ShapeError("spectral_efficiency: size mismatch");
  const int K = static_cast<int>(H_eff.size());
  double se = 0.0;
  for (int k = 0; k < K; ++k) {
    const CMat& P = noise_cov[k];
    Eigen::LLT<CMat> pllt(P);
    if (pllt.info() != Eigen::Success) {
      throw NumericalError("spectral_efficiency: noise covariance not positive definite", k);
    }
    const CMat A = P + H_eff[k] * H_eff[k].adjoint() / n_streams;
    Eigen::LLT<CMat> allt(A);
    double logdet = 0.0;
    for (int i = 0; i < A.rows(); ++i) {
      logdet += 2.0 * (std::log(std::abs(allt.matrixL()(i, i))) -
                       std::log(std::abs(pllt.matrixL()(i, i))));
    }
    se += logdet / std::log(2.0);
  }
  return se / K;
}

std::vector<CMat> build_transmit_precoders(const AngleSelection& angles,
                                           const SystemConfig& cfg) {
  std::vector<CMat> out(cfg.num_users);
  for (int u = 0; u < cfg.num_users; ++u) {
    CMat f_rf(cfg.n_u, cfg.n_rf_u);
    for (int c = 0; c < cfg.n_rf_u; ++c) {
      const int bin = angles.tx_bins.at(u).at(std::min<std::size_t>(c, angles.tx_bins[u].size() - 1));
      const double psi = 2.0 * bin / cfg.grid_tu - 1.0;
      f_rf.col(c) = array_response(psi, cfg.carrier_freq, cfg.carrier_freq, cfg.n_u);
    }
    out[u] = f_rf.leftCols(cfg.n_s_u);
  }
  return out;
}

namespace {

CMat blkdiag_precoder(const std::vector<CMat>& precoders, const SystemConfig& cfg) {
  CMat F = CMat::Zero(cfg.total_tx_antennas(), cfg.total_streams());
  for (int u = 0; u < cfg.num_users; ++u) {
    F.block(u * cfg.n_u, u * cfg.n_s_u, cfg.n_u, cfg.n_s_u) = precoders[u];
  }
  return F;
}

CMat stack_bb(const std::vector<CMat>& w_bb_users, const SystemConfig& cfg) {
  CMat W(cfg.n_rf_bs, cfg.total_streams());
  for (int u = 0; u < cfg.num_users; ++u) {
    W.middleCols(u * cfg.n_s_u, cfg.n_s_u) = w_bb_users[u];
  }
  return W;
}

}  // namespace

EffectiveLink effective_link(const ChannelRealization& truth, const std::vector<CMat>& believed,
                             const TTDBeamformer& combiner, const std::vector<CMat>& precoders,
                             const SystemConfig& cfg, const QuantizationParams& qp,
                             double sigma_n2) {
  const int K = cfg.num_subcarriers;
  const int Ns = cfg.total_streams();
  if (static_cast<int>(believed.size()) != K) throw ShapeError("effective_link: believed CSI size");
  const CMat F = blkdiag_precoder(precoders, cfg);

  // Aggregate ADC input covariance over the band (one ADC per RF chain).
  CMat Jt = CMat::Zero(cfg.n_rf_bs, cfg.n_rf_bs);
  for (int k = 0; k < K; ++k) {
    CMat L = CMat::Zero(cfg.n_bs, cfg.n_bs);
    for (int u = 0; u < cfg.num_users; ++u) {
      const CMat Hu = truth.per_user[u][k];
      const CMat feff = precoders[u];
      L.noalias() += Hu * feff * feff.adjoint() * Hu.adjoint();
    }
    const CMat& W = combiner.w_rf[k];
    Jt.noalias() += (W.adjoint() * (L + sigma_n2 * CMat::Identity(cfg.n_bs, cfg.n_bs)) * W) /
                    static_cast<double>(K);
  }
  CMat J = CMat::Zero(cfg.n_rf_bs, cfg.n_rf_bs);
  J.diagonal() = (qp.kappa * (1.0 - qp.kappa) * Jt.diagonal().real()).cast<cdouble>();

  EffectiveLink link;
  link.n_streams = Ns;
  link.H_eff_true.resize(K);
  link.H_eff_rx.resize(K);
  link.noise_cov.resize(K);
  for (int k = 0; k < K; ++k) {
    const CMat Wbb = stack_bb(combiner.w_bb[k], cfg);
    const CMat W = combiner.w_rf[k] * (qp.kappa * Wbb);  // n_bs x N_s
    link.H_eff_true[k] = W.adjoint() * truth.concat(k) * F;
    link.H_eff_rx[k] = W.adjoint() * believed[k] * F;
    const CMat P_eta =
        qp.kappa * qp.kappa * sigma_n2 * combiner.w_rf[k].adjoint() * combiner.w_rf[k] + J;
    link.noise_cov[k] = Wbb.adjoint() * P_eta * Wbb;
  }
  return link;
}

EffectiveLink optimal_digital_link(const ChannelRealization& truth, double sigma_n2) {
  const SystemConfig& cfg = truth.config;
  const int K = cfg.num_subcarriers;
  EffectiveLink link;
  link.n_streams = cfg.total_streams();
  link.H_eff_true.resize(K);
  link.H_eff_rx.resize(K);
  link.noise_cov.resize(K);
  for (int k = 0; k < K; ++k) {
    CMat W(cfg.n_bs, cfg.total_streams());
    CMat F = CMat::Zero(cfg.total_tx_antennas(), cfg.total_streams());
    for (int u = 0; u < cfg.num_users; ++u) {
      auto [Fu, Wu] = optimal_digital_baseline(truth.per_user[u][k], sigma_n2, cfg.n_s_u);
      F.block(u * cfg.n_u, u * cfg.n_s_u, cfg.n_u, cfg.n_s_u) = Fu;
      W.middleCols(u * cfg.n_s_u, cfg.n_s_u) = Wu;
    }
    link.H_eff_true[k] = W.adjoint() * truth.concat(k) * F;
    link.H_eff_rx[k] = link.H_eff_true[k];
    link.noise_cov[k] = sigma_n2 * W.adjoint() * W;
  }
  return link;
}

namespace {

// 8-PSK with Gray labelling: circle position p carries bits p ^ (p >> 1).
cdouble psk8_symbol(int position) {
  const double phi = 2.0 * kPi * position / 8.0;
  return {std::cos(phi), std::sin(phi)};
}

int psk8_encode_position(int bits3) {
  int p = bits3;
  p ^= p >> 1;
  p ^= p >> 2;
  return p;  // inverse Gray code
}

int psk8_detect_bits(cdouble x) {
  double phi = std::arg(x);
  if (phi < 0) phi += 2.0 * kPi;
  int p = static_cast<int>(std::lround(phi / (2.0 * kPi / 8.0))) % 8;
  return p ^ (p >> 1);
}

}  // namespace

double ber_over_link(const EffectiveLink& link, int n_data, std::mt19937_64& rng) {
  const int K = static_cast<int>(link.H_eff_true.size());
  const int Ns = link.n_streams;
  std::uniform_int_distribution<int> bits(0, 7);
  long long bit_errors = 0;
  long long bit_total = 0;
  for (int k = 0; k < K; ++k) {
    const CMat& H = link.H_eff_true[k];
    const CMat& Hrx = link.H_eff_rx[k];
    CMat C = link.noise_cov[k];
    const double delta = std::max(1e-12 * C.trace().real() / Ns, 1e-32);
    C += delta * CMat::Identity(Ns, Ns);
    const Eigen::LLT<CMat> cllt(C);
    const CMat CiH = cllt.solve(Hrx);
    const CMat G = (Hrx.adjoint() * CiH + CMat::Identity(Ns, Ns)).inverse() * CiH.adjoint();
    for (int d = 0; d < n_data; ++d) {
      CVec s(Ns);
      std::vector<int> tx_bits(Ns);
      for (int i = 0; i < Ns; ++i) {
        tx_bits[i] = bits(rng);
        s(i) = psk8_symbol(psk8_encode_position(tx_bits[i]));
      }
      CVec w(Ns);
      for (int i = 0; i < Ns; ++i) w(i) = complex_gaussian(rng, 1.0);
      const CVec r = H * s + cllt.matrixL() * w;
      const CVec shat = G * r;
      for (int i = 0; i < Ns; ++i) {
        const int rx = psk8_detect_bits(shat(i));
        const int diff = rx ^ tx_bits[i];
        bit_errors += (diff & 1) + ((diff >> 1) & 1) + ((diff >> 2) & 1);
        bit_total += 3;
      }
    }
  }
  return static_cast<double>(bit_errors) / static_cast<double>(bit_total);
}

std::vector<double> ber_simulation(const ChannelRealization& truth,
                                   const std::vector<CMat>& believed,
                                   const TTDBeamformer& combiner,
                                   const std::vector<CMat>& precoders, const SystemConfig& cfg,
                                   const QuantizationParams& qp,
                                   const std::vector<double>& snr_db, int n_data,
                                   std::mt19937_64& rng) {
  std::vector<double> out;
  out.reserve(snr_db.size());
  for (double snr : snr_db) {
    const double sigma_n2 = linear_from_db(-snr);
    out.push_back(ber_over_link(
        effective_link(truth, believed, combiner, precoders, cfg, qp, sigma_n2), n_data, rng));
  }
  return out;
}

}  // namespace thz
