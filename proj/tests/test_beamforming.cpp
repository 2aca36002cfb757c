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

#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "thz/beamforming.hpp"

using namespace thz;

namespace {

// Direct subarrayed inner-product gain: the triple-sum form that the
// Dirichlet-product expression factorizes.
double direct_gain(double psi_t, double psi_k, double rho, int S, int P, double v_k) {
  cdouble acc(0, 0);
  for (int s = 0; s < S; ++s) {
    for (int p = 0; p < P; ++p) {
      const int n = s * P + p;
      const double phase = kPi * n * psi_t - kPi * rho * n * psi_k - kPi * s * v_k;
      acc += cdouble(std::cos(phase), std::sin(phase));
    }
  }
  return std::abs(acc) / (S * P);
}

}  // namespace

TEST_SUITE("beamforming") {

TEST_CASE("dirichlet kernel") {
  CHECK(dirichlet_kernel(5, 0.0) == 5.0);
  CHECK(dirichlet_kernel(5, 1e-13) == 5.0);
  CHECK(dirichlet_kernel(3, 1.0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(dirichlet_kernel(4, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dirichlet_kernel(3, 2.0) == doctest::Approx(3.0));
  CHECK(dirichlet_kernel(4, 2.0) == doctest::Approx(-4.0));
  // Continuity across the removable singularity.
  for (double eps : {1e-7, 1e-5}) {
    CHECK(dirichlet_kernel(4, 2.0 + eps) == doctest::Approx(-4.0).epsilon(1e-3));
  }
}

TEST_CASE("normalized array gain") {
  const double f_c = 0.65e12;
  SUBCASE("perfectly scaled steering gives unit gain") {
    const double f_k = f_c * 1.05;
    const double rho = f_k / f_c;
    CHECK(normalized_array_gain(0.6, 0.6 / rho, f_k, f_c, 32) == doctest::Approx(1.0));
    CHECK(normalized_array_gain_ttd(0.6, 0.6 / rho, f_k, f_c, 32, 4, 8, 0.0) ==
          doctest::Approx(1.0));
  }
  SUBCASE("uncompensated squint loss at a harsh offset") {
    const double f_k = f_c * 1.1;
    CHECK(normalized_array_gain(1.0, 1.0, f_k, f_c, 64) ==
          doctest::Approx(0.058709214524484514).epsilon(1e-9));
  }
  SUBCASE("the compensating rotation nulls the subarray factor") {
    const double f_k = f_c * 1.004;
    const double rho = f_k / f_c;
    const int S = 2, P = 32;
    const double psi = 0.7;
    const double v_k = (1.0 - rho) * P * psi;
    const double g = normalized_array_gain_ttd(psi, psi, f_k, f_c, 64, S, P, v_k);
    // First factor pinned at S: the residual is the element-level kernel.
    CHECK(g == doctest::Approx(std::abs(dirichlet_kernel(P, (rho - 1) * psi)) / P)
                   .epsilon(1e-12));
  }
  SUBCASE("factorized form equals the direct inner product") {
    const int cases[][2] = {{2, 32}, {4, 16}, {8, 8}, {1, 64}};
    for (const auto& sp : cases) {
      const int S = sp[0], P = sp[1];
      for (double rho : {0.996, 1.0, 1.004}) {
        for (double psi_t : {-0.9, -0.2, 0.5, 1.0}) {
          for (double psi_k : {-0.8, 0.3, 0.9}) {
            for (double v : {0.0, 0.13, -0.4}) {
              const double lib =
                  normalized_array_gain_ttd(psi_t, psi_k, rho * 0.65e12, 0.65e12, S * P, S, P, v);
              CHECK(lib == doctest::Approx(direct_gain(psi_t, psi_k, rho, S, P, v))
                               .epsilon(1e-9));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("delay schedules") {
  const double Tc = 1.0 / 0.65e12;
  SUBCASE("broadside needs no delay") {
    CHECK(ttd_delays(0.0, 32, 2, Tc).norm() == 0.0);
  }
  SUBCASE("endfire schedule for the reference array") {
    const RVec t = ttd_delays(1.0, 32, 2, Tc);
    CHECK(t(0) == 0.0);
    CHECK(t(1) == doctest::Approx(24.615384615384615e-12).epsilon(1e-12));
  }
  SUBCASE("negative angles mirror into a nonnegative schedule") {
    const RVec t = ttd_delays(-1.0, 32, 2, Tc);
    CHECK(t(0) == doctest::Approx(24.615384615384615e-12).epsilon(1e-12));
    CHECK(t(1) == doctest::Approx(0.0));
  }
  SUBCASE("bounded by (N/2) Tc over the whole sine range") {
    const int S = 4, P = 16, N = 64;
    for (double psi = -1.0; psi <= 1.0; psi += 0.05) {
      const RVec t = ttd_delays(psi, P, S, Tc);
      CHECK(t.minCoeff() >= 0.0);
      CHECK(t.maxCoeff() <= N / 2.0 * Tc + 1e-18);
    }
  }
}

TEST_CASE("minimum delay-element count") {
  CHECK(min_td_elements(64, 1.0) == 1);
  CHECK(min_td_elements(64, 0.9) == 7);
  SystemConfig cfg = paper_profile();
  const double rho_lo = subcarrier_frequency(1, cfg) / cfg.carrier_freq;
  CHECK(min_td_elements(64, rho_lo) == 1);
  CHECK(min_td_elements(64, rho_lo) <= cfg.tds_per_chain);
}

TEST_CASE("hybrid combiner construction") {
  SystemConfig cfg = test::mini_config();
  auto [ch, H_b] = test::planted_ongrid_channel(
      cfg, {{0, 12, 1, cdouble(1.0, 0.2), 0.0}, {0, 3, 2, cdouble(0.6, -0.4), 0.0}});
  std::vector<CMat> est;
  for (int k = 0; k < cfg.num_subcarriers; ++k) est.push_back(ch.concat(k));
  AngleSelection sel;
  sel.tx_bins = {{1}};
  sel.rx_bins = {{12, 3}};
  sel.flat_idx = {{1 * cfg.grid_bs + 12}};

  SUBCASE("single-subarray mode is a frequency-flat steering column") {
    SystemConfig flatc = cfg;
    flatc.tds_per_chain = 1;
    const auto bf = build_ttd_hybrid_combiner(sel, est, flatc, true);
    const CVec a0 = array_response(2.0 * 12 / cfg.grid_bs - 1.0, cfg.carrier_freq,
                                   cfg.carrier_freq, cfg.n_bs);
    for (int k = 0; k < flatc.num_subcarriers; ++k) {
      CHECK(test::rel_err(bf.w_rf[k].col(0), a0) < 1e-12);
    }
  }
  SUBCASE("structure invariants") {
    const auto bf = build_ttd_hybrid_combiner(sel, est, cfg, true);
    for (int k = 0; k < cfg.num_subcarriers; ++k) {
      // Constant modulus entries and subcarrier-independent column norms.
      for (int c = 0; c < cfg.n_rf_bs; ++c) {
        for (int r = 0; r < cfg.n_bs; ++r) {
          CHECK(std::abs(bf.w_rf[k](r, c)) ==
                doctest::Approx(1.0 / std::sqrt(cfg.n_bs)).epsilon(1e-12));
        }
      }
      // Orthonormal baseband columns from the SVD factor.
      const CMat gram = bf.w_bb[k][0].adjoint() * bf.w_bb[k][0];
      CHECK(test::rel_err(gram, CMat::Identity(cfg.n_s_u, cfg.n_s_u)) < 1e-10);
      // Delay phases never change the magnitude profile across k.
      CHECK(bf.w_rf[k].colwise().norm().isApprox(bf.w_rf[0].colwise().norm(), 1e-12));
    }
  }
  SUBCASE("misconfigured subarray split throws") {
    SystemConfig bad = cfg;
    bad.tds_per_chain = 3;  // 8 % 3 != 0
    CHECK_THROWS_AS(build_ttd_hybrid_combiner(sel, est, bad, true), ConfigError);
  }
}

TEST_CASE("TTD combiner flattens the gain across the band") {
  // Full-size array profile: N = 64, S = 2, B = 5 GHz at 0.65 THz.
  SystemConfig cfg = paper_profile();
  const int S = cfg.tds_per_chain;
  const int P = cfg.n_bs / S;
  const double psi0 = 0.8;
  double min_ttd = 1.0, min_flat = 1.0;
  for (int k = 1; k <= cfg.num_subcarriers; ++k) {
    const double f = subcarrier_frequency(k, cfg);
    const double rho = f / cfg.carrier_freq;
    const double v = (1.0 - rho) * P * psi0;
    min_ttd = std::min(min_ttd,
                       normalized_array_gain_ttd(psi0, psi0, f, cfg.carrier_freq, 64, S, P, v));
    min_flat = std::min(min_flat, normalized_array_gain(psi0, psi0, f, cfg.carrier_freq, 64));
  }
  CHECK(min_ttd >= 0.95);
  CHECK(min_ttd >= min_flat);
  CHECK(min_flat < min_ttd);  // strict at the band edges for rho != 1
}

TEST_CASE("optimal digital baseline") {
  std::mt19937_64 rng(17);
  SUBCASE("zero-noise limit is zero-forcing") {
    const CMat H = test::random_cmat(4, 4, rng);
    auto [F, W] = optimal_digital_baseline(H, 1e-12, 4);
    const CMat Heq = H * F;
    const CMat zf = Heq * (Heq.adjoint() * Heq).inverse();
    CHECK(test::rel_err(W, zf) < 1e-6);
  }
  SUBCASE("rank-one channel selects the dominant singular pair") {
    const CVec u = test::random_cmat(6, 1, rng);
    const CVec v = test::random_cmat(3, 1, rng);
    const CMat H = u * v.adjoint();
    auto [F, W] = optimal_digital_baseline(H, 0.1, 1);
    // F spans the top right-singular vector.
    CHECK(std::abs(std::abs((F.col(0).adjoint() * v.normalized())(0, 0)) - 1.0) < 1e-10);
    const CMat Heq = H * F;
    CHECK(Heq.norm() == doctest::Approx(H.norm()).epsilon(1e-10));
  }
  SUBCASE("MMSE combiner is a local optimum of the mean squared error") {
    const CMat H = test::random_cmat(5, 3, rng);
    const double sigma2 = 0.2;
    auto [F, W] = optimal_digital_baseline(H, sigma2, 3);
    const CMat Heq = H * F;
    auto mse = [&](const CMat& Wc) {
      // E||s - W^H(Heq s + n)||^2 with unit symbols and CN(0, sigma2 I) noise.
      const CMat E = CMat::Identity(3, 3) - Wc.adjoint() * Heq;
      return E.squaredNorm() + sigma2 * Wc.squaredNorm();
    };
    // The closed form uses sigma^2 N_s; it minimizes the MSE at that load.
    const double base = mse(W);
    for (int t = 0; t < 20; ++t) {
      const CMat Wp = W + 1e-2 * test::random_cmat(5, 3, rng);
      CHECK(mse(Wp) >= base * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("spectral efficiency") {
  SUBCASE("zero channel carries nothing") {
    std::vector<CMat> H = {CMat::Zero(2, 2)};
    std::vector<CMat> P = {CMat::Identity(2, 2)};
    CHECK(spectral_efficiency(H, P, 2) == doctest::Approx(0.0));
  }
  SUBCASE("scalar closed form") {
    for (double sigma2 : {1.0, 0.1, 0.01}) {
      std::vector<CMat> H = {CMat::Constant(1, 1, cdouble(1, 0))};
      std::vector<CMat> P = {CMat::Constant(1, 1, cdouble(sigma2, 0))};
      CHECK(spectral_efficiency(H, P, 1) ==
            doctest::Approx(std::log2(1.0 + 1.0 / sigma2)).epsilon(1e-12));
    }
  }
  SUBCASE("identity effective channel matches the log-det closed form") {
    const int n = 3;
    std::vector<CMat> H = {CMat::Identity(n, n)};
    std::vector<CMat> P = {0.25 * CMat::Identity(n, n)};
    const double expect = n * std::log2(1.0 + 1.0 / (n * 0.25));
    CHECK(spectral_efficiency(H, P, n) == doctest::Approx(expect).epsilon(1e-10));
  }
  SUBCASE("monotone in transmit power") {
    std::mt19937_64 rng(19);
    const CMat H0 = test::random_cmat(3, 3, rng);
    const CMat P = CMat::Identity(3, 3);
    double prev = -1.0;
    for (int i = 0; i < 10; ++i) {
      const double scale = std::pow(10.0, -1.0 + 0.3 * i);
      std::vector<CMat> H = {scale * H0};
      std::vector<CMat> Pv = {P};
      const double se = spectral_efficiency(H, Pv, 3);
      CHECK(se >= prev);
      prev = se;
    }
  }
  SUBCASE("singular noise covariance is rejected") {
    std::vector<CMat> H = {CMat::Identity(2, 2)};
    std::vector<CMat> P = {CMat::Zero(2, 2)};
    CHECK_THROWS_AS(spectral_efficiency(H, P, 2), NumericalError);
  }
}

TEST_CASE("link-level error rates") {
  SystemConfig cfg = test::mini_config();
  cfg.num_users = 1;
  auto [ch, H_b] = test::planted_ongrid_channel(
      cfg, {{0, 12, 1, cdouble(1.0, 0.2), 0.0}, {0, 3, 2, cdouble(0.7, -0.5), 0.0}});
  std::vector<CMat> truth;
  for (int k = 0; k < cfg.num_subcarriers; ++k) truth.push_back(ch.concat(k));
  const auto sel = genie_angle_selection(ch, cfg);
  const auto precoders = build_transmit_precoders(sel, cfg);
  const auto comb = build_ttd_hybrid_combiner(sel, truth, cfg, true);

  SUBCASE("noise-free detection is error free") {
    std::mt19937_64 rng(23);
    const auto ber = ber_simulation(ch, truth, comb, precoders, cfg,
                                    QuantizationParams::infinite(), {200.0}, 50, rng);
    CHECK(ber[0] == 0.0);
  }
  SUBCASE("error rate trends down with SNR") {
    std::mt19937_64 rng(29);
    std::vector<double> acc(3, 0.0);
    const std::vector<double> snrs = {-5.0, 5.0, 15.0};
    for (int t = 0; t < 50; ++t) {
      const auto ber = ber_simulation(ch, truth, comb, precoders, cfg,
                                      QuantizationParams::from_bits(3), snrs, 20, rng);
      for (int i = 0; i < 3; ++i) acc[i] += ber[i];
    }
    CHECK(acc[0] > acc[1]);
    CHECK(acc[1] > acc[2]);
  }
}

}  // TEST_SUITE
