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

#ifndef THZ_ESTIMATION_HPP
#define THZ_ESTIMATION_HPP

#include <vector>

#include "thz/frontend.hpp"
#include "thz/types.hpp"

namespace thz {

struct ConvergenceTraceRow {
  int iteration;
  double gamma_delta_sq;  // ||Gamma^(j) - Gamma^(j-1)||_F^2
  double evidence;        // log-evidence proxy (constants dropped)
};

struct BeamspaceEstimate {
  CMat H_b;                 // G_BS G_T x K posterior means
  RVec gamma;               // learned hyperparameters, one per angular group
  RMat post_cov_diag;       // G_BS G_T x K per-subcarrier posterior variances
  int iterations = 0;
  bool converged = false;
  std::vector<ConvergenceTraceRow> trace;
};

/// Single E-step: posterior mean and variance diagonal of h given
/// y = Omega h + eta, h ~ CN(0, diag(gamma)), eta ~ CN(0, R). Uses the
/// direct information form when the group count does not exceed the
/// measurement count and the Woodbury form otherwise; both yield identical
/// results. If cov_out is non-null the full posterior covariance is written.
struct PosteriorResult {
  CVec mean;
  RVec var_diag;
};
PosteriorResult posterior_estep(const CMat& omega, const CMat& R, const RVec& gamma,
                                const CVec& y, CMat* cov_out = nullptr);

/// Hierarchical Bayesian group-sparse regression over all K subcarriers.
/// Hyperparameters are shared across subcarriers (one per angular bin).
BeamspaceEstimate hbg_sr_estimate(const PilotObservation& obs, const SystemConfig& cfg,
                                  double epsilon = 1e-4, int max_iterations = 30);

/// Baseline: the same learner run independently per subcarrier (no shared
/// support), reproducing a conventional per-subcarrier SBL estimator.
BeamspaceEstimate sbl_per_subcarrier_estimate(const PilotObservation& obs,
                                              const SystemConfig& cfg,
                                              double epsilon = 1e-4, int max_iterations = 30);

/// Per-subcarrier least squares over the non-sparse antenna-domain basis.
struct MmvLsEstimate {
  CMat H_vec;                    // N_BS N_T x K, columns vec(H_U[k])
  bool used_pseudo_inverse = false;
};
MmvLsEstimate mmv_ls_estimate(const PilotObservation& obs);

/// Greedy joint-support selection across subcarriers with per-subcarrier
/// LS refits on the active set.
BeamspaceEstimate gsomp_estimate(const PilotObservation& obs, int max_support,
                                 double residual_tol = 0.0);

/// H_U[k] = A_B(f_k) unvec(H_b(:,k)) A_T^H(f_k), per subcarrier.
std::vector<CMat> reconstruct_channel(const CMat& H_b, const PilotObservation& obs);

struct AngleSelection {
  std::vector<std::vector<int>> tx_bins;    // per user, n_rf_u AoD bins (0-based)
  std::vector<std::vector<int>> rx_bins;    // per user, n_rf_bs/U AoA bins (0-based)
  std::vector<std::vector<int>> flat_idx;   // per user, top flat beamspace indices
};

/// Ranks per-user beamspace rows by energy summed over subcarriers and maps
/// the dominant flat indices to AoA/AoD grid bins. Ties break toward the
/// lower flat index.
AngleSelection extract_dominant_angles(const BeamspaceEstimate& est, const SystemConfig& cfg);

/// Genie selection from ground-truth path parameters: per-path bins on the
/// nearest grid point, ranked by received amplitude.
AngleSelection genie_angle_selection(const ChannelRealization& channel, const SystemConfig& cfg);

/// Bayesian Cramer-Rao lower bound Tr(S J^{-1} S^H) on the channel-domain
/// MSE, computed blockwise per subcarrier. gamma must be positive.
double bcrlb(const PilotObservation& obs, const RVec& gamma);

/// Frobenius NMSE summed over subcarriers. Throws on shape mismatch or a
/// zero reference.
double nmse_metric(const std::vector<CMat>& H_hat, const std::vector<CMat>& H_true);

}  // namespace thz

#endif  // THZ_ESTIMATION_HPP
