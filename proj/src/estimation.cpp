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

#include "thz/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "thz/channel.hpp"

namespace thz {

namespace {

constexpr double kGammaFloor = 1e-12;
constexpr double kPruneRel = 1e-8;

CMat loaded(const CMat& R) {
  const int n = static_cast<int>(R.rows());
  const double delta = std::max(1e-12 * R.trace().real() / n, 1e-32);
  return R + delta * CMat::Identity(n, n);
}

struct EStepOut {
  CVec mean;
  RVec var_diag;
  double evidence;  // -(log det C + y^H C^{-1} y) for this subcarrier
};

// One E-step with the covariance form C = R + Omega Gamma Omega^H. Valid for
// any R >= 0 (including the noiseless case) and cheap when the group count
// exceeds the measurement count.
EStepOut estep_woodbury(const CMat& omega, const CMat& R, const RVec& gamma, const CVec& y) {
  const int n = static_cast<int>(omega.rows());
  // Scaled atoms B = Omega Gamma^(1/2): C = R + B B^H via a Hermitian rank
  // update, and with Wb = L^-1 B the posterior reads
  //   mean = Gamma^(1/2) Wb^H L^-1 y,  var_g = gamma_g (1 - ||Wb(:,g)||^2).
  const RVec sqrt_gamma = gamma.cwiseMax(0.0).cwiseSqrt();
  CMat B = omega * sqrt_gamma.cast<cdouble>().asDiagonal();
  CMat C = R;
  C.selfadjointView<Eigen::Lower>().rankUpdate(B);
  const double delta = std::max(1e-12 * C.trace().real() / n, 1e-32);
  C += delta * CMat::Identity(n, n);
  Eigen::LLT<CMat> llt(C);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance factorization failed", -1);
  llt.matrixL().solveInPlace(B);           // B <- L^-1 Omega Gamma^(1/2)
  const CVec yt = llt.matrixL().solve(y);  // L^-1 y
  EStepOut out;
  out.mean = (B.adjoint() * yt).cwiseProduct(sqrt_gamma.cast<cdouble>());
  out.var_diag =
      (gamma.array() * (1.0 - B.colwise().squaredNorm().transpose().array())).max(0.0).matrix();
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += 2.0 * std::log(std::abs(llt.matrixL()(i, i)));
  out.evidence = -(logdet + yt.squaredNorm());
  return out;
}

}  // namespace

PosteriorResult posterior_estep(const CMat& omega, const CMat& R, const RVec& gamma,
                                const CVec& y, CMat* cov_out) {
  if (omega.rows() != R.rows() || omega.rows() != y.size() || omega.cols() != gamma.size()) {
    throw ShapeError("posterior_estep: inconsistent dimensions");
  }
  const int n = static_cast<int>(omega.rows());
  const int G = static_cast<int>(omega.cols());
  const bool woodbury = G > n;
  PosteriorResult out;
  if (woodbury) {
    EStepOut e = estep_woodbury(omega, R, gamma, y);
    out.mean = std::move(e.mean);
    out.var_diag = std::move(e.var_diag);
    if (cov_out) {
      CMat C = R;
      C.noalias() += (omega * gamma.cast<cdouble>().asDiagonal()) * omega.adjoint();
      C = loaded(C);
      const CMat GO = gamma.cast<cdouble>().asDiagonal() * omega.adjoint();  // Gamma Omega^H
      *cov_out = CMat(gamma.cast<cdouble>().asDiagonal()) - GO * C.llt().solve(GO.adjoint());
    }
  } else {
    // Information form [Gamma^-1 + Omega^H R^-1 Omega]^-1.
    Eigen::LLT<CMat> rllt(loaded(R));
    const CMat RinvO = rllt.solve(omega);
    CMat A = omega.adjoint() * RinvO;
    A += gamma.cwiseMax(kGammaFloor).cwiseInverse().asDiagonal().toDenseMatrix().cast<cdouble>();
    Eigen::LLT<CMat> allt(A);
    if (allt.info() != Eigen::Success) throw NumericalError("posterior factorization failed", -1);
    const CMat Sigma = allt.solve(CMat::Identity(G, G));
    out.mean = Sigma * (omega.adjoint() * rllt.solve(y));
    out.var_diag = Sigma.diagonal().real().cwiseMax(0.0);
    if (cov_out) *cov_out = Sigma;
  }
  return out;
}

namespace {

// Shared EM core: one hyperparameter per angular group, shared over the
// subcarriers listed in `bins`. Writes posterior means/variances for those
// subcarriers into columns of H_b / post_cov_diag.
void em_group(const PilotObservation& obs, const std::vector<int>& bins,
              const std::vector<CMat>& omegas, double epsilon, int max_iterations,
              CMat& H_b, RMat& post_var, RVec& gamma_out, int& iterations, bool& converged,
              std::vector<ConvergenceTraceRow>* trace) {
  const int G = static_cast<int>(omegas[0].cols());
  const int nb = static_cast<int>(bins.size());
  RVec gamma = RVec::Ones(G);
  std::vector<CVec> means(nb);
  std::vector<RVec> vars(nb);
  converged = false;
  iterations = 0;
  RVec evidence_acc(nb);

  for (int j = 1; j <= max_iterations; ++j) {
    RVec dsum = RVec::Zero(G);
    bool failed = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int b = 0; b < nb; ++b) {
      const int k = bins[b];
      try {
        EStepOut e = estep_woodbury(omegas[b], obs.R, gamma, obs.Y.col(k));
        means[b] = std::move(e.mean);
        vars[b] = std::move(e.var_diag);
        evidence_acc(b) = e.evidence;
      } catch (const std::exception&) {
        failed = true;  // rethrown below; exceptions must not cross the region
      }
    }
    if (failed) throw NumericalError("posterior factorization failed in EM", j);
    for (int b = 0; b < nb; ++b) {
      if (!means[b].allFinite() || !vars[b].allFinite()) {
        throw NumericalError("non-finite posterior in EM", j);
      }
      dsum += vars[b] + means[b].cwiseAbs2();
    }
    const RVec gnew = (dsum / nb).cwiseMax(kGammaFloor);
    const double delta = (gnew - gamma).squaredNorm();
    if (trace) trace->push_back({j, delta, evidence_acc.sum()});
    gamma = gnew;
    iterations = j;
    if (delta <= epsilon) {
      converged = true;
      break;
    }
  }

  for (int b = 0; b < nb; ++b) {
    H_b.col(bins[b]) = means[b];
    post_var.col(bins[b]) = vars[b];
  }
  gamma_out = gamma;
}

std::vector<CMat> cache_omegas(const PilotObservation& obs, const std::vector<int>& bins) {
  std::vector<CMat> out(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) out[i] = obs.omega(bins[i]);
  return out;
}

void prune_groups(CMat& H_b, const RVec& gamma) {
  const double cut = kPruneRel * gamma.maxCoeff();
  for (int g = 0; g < gamma.size(); ++g) {
    if (gamma(g) < cut) H_b.row(g).setZero();
  }
}

}  // namespace

BeamspaceEstimate hbg_sr_estimate(const PilotObservation& obs, const SystemConfig& cfg,
                                  double epsilon, int max_iterations) {
  const int K = cfg.num_subcarriers;
  const int G = static_cast<int>(obs.omega(0).cols());
  std::vector<int> bins(K);
  std::iota(bins.begin(), bins.end(), 0);
  const std::vector<CMat> omegas = cache_omegas(obs, bins);

  BeamspaceEstimate est;
  est.H_b = CMat::Zero(G, K);
  est.post_cov_diag = RMat::Zero(G, K);
  em_group(obs, bins, omegas, epsilon, max_iterations, est.H_b, est.post_cov_diag, est.gamma,
           est.iterations, est.converged, &est.trace);
  prune_groups(est.H_b, est.gamma);
  return est;
}

BeamspaceEstimate sbl_per_subcarrier_estimate(const PilotObservation& obs,
                                              const SystemConfig& cfg, double epsilon,
                                              int max_iterations) {
  const int K = cfg.num_subcarriers;
  const int G = static_cast<int>(obs.omega(0).cols());
  BeamspaceEstimate est;
  est.H_b = CMat::Zero(G, K);
  est.post_cov_diag = RMat::Zero(G, K);
  est.gamma = RVec::Zero(G);
  est.converged = true;
  for (int k = 0; k < K; ++k) {
    const std::vector<int> bins = {k};
    const std::vector<CMat> omegas = cache_omegas(obs, bins);
    RVec gamma_k;
    int iters = 0;
    bool conv = false;
    em_group(obs, bins, omegas, epsilon, max_iterations, est.H_b, est.post_cov_diag, gamma_k,
             iters, conv, nullptr);
    est.gamma += gamma_k / K;  // summary only; supports are per-subcarrier here
    est.iterations = std::max(est.iterations, iters);
    est.converged = est.converged && conv;
  }
  return est;
}

MmvLsEstimate mmv_ls_estimate(const PilotObservation& obs) {
  const int K = obs.config.num_subcarriers;
  MmvLsEstimate out;
  for (int k = 0; k < K; ++k) {
    const CMat psi = obs.psi(k);
    if (k == 0) out.H_vec = CMat(psi.cols(), K);
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(psi);
    if (cod.rank() < psi.cols()) out.used_pseudo_inverse = true;
    out.H_vec.col(k) = cod.solve(obs.Y.col(k));
  }
  return out;
}

BeamspaceEstimate gsomp_estimate(const PilotObservation& obs, int max_support,
                                 double residual_tol) {
  const SystemConfig& cfg = obs.config;
  const int K = cfg.num_subcarriers;
  const int G = static_cast<int>(obs.omega(0).cols());
  if (max_support < 1 || max_support > obs.rows()) {
    throw std::invalid_argument("gsomp_estimate: max_support must be in 1..M*N_s");
  }
  std::vector<int> bins(K);
  std::iota(bins.begin(), bins.end(), 0);
  const std::vector<CMat> omegas = cache_omegas(obs, bins);

  CMat residual = obs.Y;
  const double y_norm = obs.Y.norm();
  std::vector<int> active;
  std::vector<char> in_active(G, 0);
  CMat coeffs;  // |active| x K LS solution on the active set

  // Unit-atom correlations: the sensing columns have uneven norms, so the
  // selection normalizes each atom per subcarrier.
  std::vector<RVec> inv_norm(K);
  for (int k = 0; k < K; ++k) {
    RVec n = omegas[k].colwise().norm().transpose();
    inv_norm[k] = (n.array() > 0.0).select(n.cwiseInverse(), RVec::Zero(G));
  }

  while (static_cast<int>(active.size()) < max_support) {
    if (residual_tol > 0.0 && residual.norm() <= residual_tol * y_norm) break;
    // Joint selection: correlation magnitude summed across subcarriers.
    RVec score = RVec::Zero(G);
    for (int k = 0; k < K; ++k) {
      score += (omegas[k].adjoint() * residual.col(k)).cwiseAbs().cwiseProduct(inv_norm[k]);
    }
    int best = -1;
    double best_score = -1.0;
    for (int g = 0; g < G; ++g) {
      if (!in_active[g] && score(g) > best_score) {
        best_score = score(g);
        best = g;
      }
    }
    if (best < 0) break;
    active.push_back(best);
    in_active[best] = 1;

    const int a = static_cast<int>(active.size());
    coeffs = CMat(a, K);
    for (int k = 0; k < K; ++k) {
      CMat sub(obs.rows(), a);
      for (int i = 0; i < a; ++i) sub.col(i) = omegas[k].col(active[i]);
      Eigen::CompleteOrthogonalDecomposition<CMat> cod(sub);
      coeffs.col(k) = cod.solve(obs.Y.col(k));
      residual.col(k) = obs.Y.col(k) - sub * coeffs.col(k);
    }
  }

  BeamspaceEstimate est;
  est.H_b = CMat::Zero(G, K);
  est.post_cov_diag = RMat::Zero(G, K);
  est.gamma = RVec::Constant(G, kGammaFloor);
  for (std::size_t i = 0; i < active.size(); ++i) {
    est.H_b.row(active[i]) = coeffs.row(static_cast<int>(i));
    est.gamma(active[i]) = est.H_b.row(active[i]).squaredNorm() / K;
  }
  est.iterations = static_cast<int>(active.size());
  est.converged = true;
  return est;
}

std::vector<CMat> reconstruct_channel(const CMat& H_b, const PilotObservation& obs) {
  const SystemConfig& cfg = obs.config;
  const int K = cfg.num_subcarriers;
  if (H_b.rows() != cfg.beamspace_size() || H_b.cols() != K) {
    throw ShapeError("reconstruct_channel: beamspace estimate shape mismatch");
  }
  std::vector<CMat> out(K);
  const int gbs = cfg.grid_bs;
  const int gtu = cfg.grid_tu;
  for (int k = 0; k < K; ++k) {
    CMat full(cfg.n_bs, cfg.total_tx_antennas());
    for (int u = 0; u < cfg.num_users; ++u) {
      // Column-major unvec of the user block into G_BS x G_Tu.
      Eigen::Map<const CMat> hb(H_b.col(k).data() + u * gbs * gtu, gbs, gtu);
      full.middleCols(u * cfg.n_u, cfg.n_u) = obs.a_rx[k] * hb * obs.a_tx[k].adjoint();
    }
    out[k] = std::move(full);
  }
  return out;
}

AngleSelection extract_dominant_angles(const BeamspaceEstimate& est, const SystemConfig& cfg) {
  if (cfg.n_rf_bs % cfg.num_users != 0) {
    throw ConfigError("extract_dominant_angles: N_RF^B must be divisible by the user count");
  }
  const int per_user_rx = cfg.n_rf_bs / cfg.num_users;
  const int gbs = cfg.grid_bs;
  const int gtu = cfg.grid_tu;
  const int block = gbs * gtu;
  AngleSelection sel;
  sel.tx_bins.resize(cfg.num_users);
  sel.rx_bins.resize(cfg.num_users);
  sel.flat_idx.resize(cfg.num_users);
  for (int u = 0; u < cfg.num_users; ++u) {
    std::vector<int> order(block);
    std::iota(order.begin(), order.end(), 0);
    RVec energy(block);
    for (int g = 0; g < block; ++g) energy(g) = est.H_b.row(u * block + g).squaredNorm();
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return energy(a) > energy(b); });
    // Walk the ranking, keeping distinct bins on each side: repeating a bin
    // would steer two chains (or two streams) identically and collapse the
    // combiner rank.
    for (int i = 0; i < block; ++i) {
      const int idx = order[i];
      const int rx = idx % gbs;
      const int tx = idx / gbs;
      if (static_cast<int>(sel.tx_bins[u].size()) < cfg.n_rf_u &&
          std::find(sel.tx_bins[u].begin(), sel.tx_bins[u].end(), tx) ==
              sel.tx_bins[u].end()) {
        sel.tx_bins[u].push_back(tx);
        sel.flat_idx[u].push_back(u * block + idx);
      }
      if (static_cast<int>(sel.rx_bins[u].size()) < per_user_rx &&
          std::find(sel.rx_bins[u].begin(), sel.rx_bins[u].end(), rx) ==
              sel.rx_bins[u].end()) {
        sel.rx_bins[u].push_back(rx);
      }
      if (static_cast<int>(sel.tx_bins[u].size()) >= cfg.n_rf_u &&
          static_cast<int>(sel.rx_bins[u].size()) >= per_user_rx) {
        break;
      }
    }
  }
  return sel;
}

AngleSelection genie_angle_selection(const ChannelRealization& channel, const SystemConfig& cfg) {
  if (cfg.n_rf_bs % cfg.num_users != 0) {
    throw ConfigError("genie_angle_selection: N_RF^B must be divisible by the user count");
  }
  const int per_user_rx = cfg.n_rf_bs / cfg.num_users;
  const int gbs = cfg.grid_bs;
  const int gtu = cfg.grid_tu;
  auto nearest_bin = [](double psi, int G) {
    int r = static_cast<int>(std::lround((psi + 1.0) * G / 2.0));
    return std::clamp(r, 0, G - 1);
  };
  AngleSelection sel;
  sel.tx_bins.resize(cfg.num_users);
  sel.rx_bins.resize(cfg.num_users);
  sel.flat_idx.resize(cfg.num_users);
  for (int u = 0; u < cfg.num_users; ++u) {
    const auto& paths = channel.paths[u];
    std::vector<int> order(paths.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> amp(paths.size());
    for (std::size_t p = 0; p < paths.size(); ++p) {
      const PathParams& pp = paths[p];
      std::optional<cdouble> refl;
      if (pp.kind == PathParams::Kind::NLoS) {
        refl = reflection_coefficient(cfg.carrier_freq, pp.incidence_angle, pp.material).gamma;
      }
      amp[p] = path_gain_magnitude(cfg.carrier_freq, pp.distance, cfg.absorption_coeff, refl);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return amp[a] > amp[b]; });
    auto fill = [&](std::vector<int>& bins, int quota, bool rx) {
      for (int idx : order) {
        if (static_cast<int>(bins.size()) >= quota) break;
        const int b = rx ? nearest_bin(paths[idx].aoa_sine, gbs)
                         : nearest_bin(paths[idx].aod_sine, gtu);
        if (std::find(bins.begin(), bins.end(), b) == bins.end()) bins.push_back(b);
      }
      // Not enough distinct path bins: pad with neighbours of the strongest.
      int offset = 1;
      while (static_cast<int>(bins.size()) < quota) {
        const int G = rx ? gbs : gtu;
        const int base = bins.empty() ? 0 : bins.front();
        const int cand = ((base + offset) % G + G) % G;
        if (std::find(bins.begin(), bins.end(), cand) == bins.end()) bins.push_back(cand);
        ++offset;
      }
    };
    fill(sel.rx_bins[u], per_user_rx, true);
    fill(sel.tx_bins[u], cfg.n_rf_u, false);
    for (int i = 0; i < cfg.n_rf_u; ++i) {
      const int t = sel.tx_bins[u][std::min<std::size_t>(i, sel.tx_bins[u].size() - 1)];
      const int r = sel.rx_bins[u][std::min<std::size_t>(i, sel.rx_bins[u].size() - 1)];
      sel.flat_idx[u].push_back(u * gbs * gtu + t * gbs + r);
    }
  }
  return sel;
}

double bcrlb(const PilotObservation& obs, const RVec& gamma) {
  const SystemConfig& cfg = obs.config;
  if (gamma.size() != obs.omega(0).cols()) throw ShapeError("bcrlb: gamma size mismatch");
  if ((gamma.array() <= 0.0).any()) {
    throw std::invalid_argument("bcrlb: hyperparameters must be positive");
  }
  Eigen::LLT<CMat> rllt(loaded(obs.R));
  double total = 0.0;
  bool singular = false;
  const int K = cfg.num_subcarriers;
  // Scaled form J^-1 = G^(1/2) [G^(1/2) A G^(1/2) + I]^-1 G^(1/2) with
  // A = Omega^H R^-1 Omega: the bracketed matrix stays well conditioned for
  // arbitrarily small hyperparameters.
  const RVec sq = gamma.cwiseSqrt();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : total) reduction(|| : singular)
#endif
  for (int k = 0; k < K; ++k) {
    const CMat omega_s = obs.omega(k) * sq.cast<cdouble>().asDiagonal();
    CMat M = omega_s.adjoint() * rllt.solve(omega_s);
    M += CMat::Identity(M.rows(), M.cols());
    Eigen::LLT<CMat> mllt(M);
    if (mllt.info() != Eigen::Success) {
      singular = true;
      continue;
    }
    const CMat ds = sq.cast<cdouble>().asDiagonal() * obs.delta(k).adjoint();
    total += mllt.matrixL().solve(ds).squaredNorm();
  }
  if (singular) throw NumericalError("bcrlb: singular FIM", -1);
  return total;
}

double nmse_metric(const std::vector<CMat>& H_hat, const std::vector<CMat>& H_true) {
  if (H_hat.size() != H_true.size()) throw ShapeError("nmse_metric: subcarrier count mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < H_hat.size(); ++k) {
    if (H_hat[k].rows() != H_true[k].rows() || H_hat[k].cols() != H_true[k].cols()) {
      throw ShapeError("nmse_metric: matrix shape mismatch");
    }
    num += (H_hat[k] - H_true[k]).squaredNorm();
    den += H_true[k].squaredNorm();
  }
  if (den <= 0.0) throw std::invalid_argument("nmse_metric: zero reference energy");
  return num / den;
}

}  // namespace thz
