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

#include "thz/channel.hpp"

#include <cmath>

namespace thz {

double subcarrier_frequency(int k, const SystemConfig& cfg) {
  const int K = cfg.num_subcarriers;
  if (k < 1 || k > K) {
    throw std::out_of_range("subcarrier index " + std::to_string(k) + " outside 1.." +
                            std::to_string(K));
  }
  return cfg.carrier_freq + (k - (K + 1) / 2.0) * cfg.bandwidth / K;
}

CVec array_response(double psi, double f, double f_c, int n) {
  if (n < 1) throw std::invalid_argument("array_response: antenna count must be positive");
  if (std::abs(psi) > 1.0) throw std::invalid_argument("array_response: |psi| must be <= 1");
  const double rho = f / f_c;
  CVec a(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int m = 0; m < n; ++m) {
    const double phase = -kPi * rho * m * psi;
    a(m) = scale * cdouble(std::cos(phase), std::sin(phase));
  }
  return a;
}

cdouble characteristic_impedance(double f, const Material& mat) {
  const double xi = mat.absorption_coeff_m();
  const double n = mat.refractive_index;
  const double a = xi * kSpeedOfLight / (4.0 * kPi * f);
  const cdouble eps_rel(n * n - a * a, -2.0 * n * a);
  return std::sqrt(kVacuumPermeability / (kVacuumPermittivity * eps_rel));
}

ReflectionResult reflection_coefficient(double f, double omega_i, const Material& mat) {
  if (omega_i < 0.0 || omega_i >= kPi / 2.0) {
    throw std::invalid_argument("reflection_coefficient: incidence angle must be in [0, pi/2)");
  }
  const cdouble Z = characteristic_impedance(f, mat);
  const double cos_i = std::cos(omega_i);
  const cdouble sin_r = std::sin(omega_i) * Z / kFreeSpaceImpedance;
  const cdouble cos_r = std::sqrt(cdouble(1.0, 0.0) - sin_r * sin_r);
  const cdouble fresnel =
      (Z * cos_i - kFreeSpaceImpedance * cos_r) / (Z * cos_i + kFreeSpaceImpedance * cos_r);
  const double arg = 4.0 * kPi * f * mat.roughness_std_m() * cos_i / kSpeedOfLight;
  const double roughness = std::exp(-0.5 * arg * arg);
  ReflectionResult out;
  out.gamma = fresnel * roughness;
  out.total_internal_reflection = std::abs(sin_r) > 1.0;
  return out;
}

double path_gain_magnitude(double f, double ds, double mu_abs, std::optional<cdouble> reflection) {
  if (ds <= 0.0) throw std::invalid_argument("path_gain_magnitude: distance must be positive");
  if (f <= 0.0) throw std::invalid_argument("path_gain_magnitude: frequency must be positive");
  const double spreading = kSpeedOfLight / (4.0 * kPi * f * ds);
  double mag2 = spreading * spreading * std::exp(-mu_abs * ds);
  if (reflection) mag2 *= std::norm(*reflection);
  return std::sqrt(mag2);
}

namespace {

// Dimensionless root-raised-cosine impulse response (unit symbol period).
double rrc_impulse(double x, double beta) {
  const double eps = 1e-10;
  if (std::abs(x) < eps) {
    return 1.0 - beta + 4.0 * beta / kPi;
  }
  if (beta > 0.0 && std::abs(std::abs(x) - 1.0 / (4.0 * beta)) < eps) {
    const double a = kPi / (4.0 * beta);
    return (beta / std::sqrt(2.0)) *
           ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
  }
  const double num = std::sin(kPi * x * (1.0 - beta)) + 4.0 * beta * x * std::cos(kPi * x * (1.0 + beta));
  const double den = kPi * x * (1.0 - 16.0 * beta * beta * x * x);
  return num / den;
}

}  // namespace

PulseShape PulseShape::rect() {
  PulseShape p;
  p.kind_ = PsfConfig::Kind::rect;
  return p;
}

PulseShape PulseShape::rrc(double roll_off, int upsampling, int span) {
  if (upsampling < 1 || span < 1) throw std::invalid_argument("rrc: invalid grid parameters");
  PulseShape p;
  p.kind_ = PsfConfig::Kind::rrc;
  p.upsampling_ = upsampling;
  p.span_ = span;
  const int half = span * upsampling;
  p.taps_.resize(2 * half + 1);
  double energy = 0.0;
  for (int i = -half; i <= half; ++i) {
    const double v = rrc_impulse(static_cast<double>(i) / upsampling, roll_off);
    p.taps_[i + half] = v;
    energy += v * v;
  }
  const double scale = 1.0 / std::sqrt(energy / upsampling);
  for (double& v : p.taps_) v *= scale;
  return p;
}

PulseShape PulseShape::from_config(const PsfConfig& cfg) {
  if (cfg.kind == PsfConfig::Kind::rect) return rect();
  return rrc(cfg.roll_off, cfg.upsampling, cfg.rrc_span);
}

double PulseShape::operator()(double t, double sample_period) const {
  if (kind_ == PsfConfig::Kind::rect) {
    return (t >= 0.0 && t < sample_period) ? 1.0 : 0.0;
  }
  const long long i = std::llround(t / sample_period * upsampling_);
  const long long half = static_cast<long long>(span_) * upsampling_;
  if (i < -half || i > half) return 0.0;
  return taps_[static_cast<std::size_t>(i + half)];
}

cdouble pulse_shaping_coeff(double tau, int k, int K, double sample_period,
                            const PulseShape& psf) {
  if (tau < 0.0) throw std::invalid_argument("pulse_shaping_coeff: delay must be nonnegative");
  cdouble beta(0.0, 0.0);
  for (int d = 0; d < K; ++d) {
    const double v = psf(d * sample_period - tau, sample_period);
    if (v == 0.0) continue;
    const double phase = -2.0 * kPi * k * d / K;
    beta += v * cdouble(std::cos(phase), std::sin(phase));
  }
  return beta;
}

double sample_angle_gmm(const GmmAngleParams& params, std::mt19937_64& rng) {
  params.validate();
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double w1 = params.weight1();
  for (;;) {
    const bool first = uni(rng) < w1;
    std::normal_distribution<double> comp(first ? params.r1 : params.r2,
                                          first ? params.nu1 : params.nu2);
    const double draw = comp(rng);
    if (std::abs(draw) <= 1.0) return draw;
  }
}

CMat ChannelRealization::concat(int k) const {
  const int nu = config.n_u;
  CMat out(config.n_bs, config.total_tx_antennas());
  for (std::size_t u = 0; u < per_user.size(); ++u) {
    out.middleCols(static_cast<int>(u) * nu, nu) = per_user[u][k];
  }
  return out;
}

void ChannelRealization::scale(double s) {
  for (auto& user : per_user) {
    for (auto& h : user) h /= s;
  }
}

namespace {

ChannelRealization synthesize(const SystemConfig& cfg,
                              const std::vector<std::vector<PathParams>>& paths,
                              const AbsorptionModel& absorption) {
  cfg.validate();
  const int K = cfg.num_subcarriers;
  const PulseShape psf = PulseShape::from_config(cfg.psf);
  const double Ts = cfg.sample_period();
  const double gain_amp = cfg.tx_gain_amplitude() * cfg.rx_gain_amplitude();
  const double los_scale = std::sqrt(static_cast<double>(cfg.n_u) * cfg.n_bs);
  const int n_scatter = cfg.num_nlos * cfg.num_rays;
  const double nlos_scale =
      n_scatter > 0 ? std::sqrt(static_cast<double>(cfg.n_u) * cfg.n_bs / n_scatter) : 0.0;

  ChannelRealization out;
  out.config = cfg;
  out.paths = paths;
  out.per_user.resize(paths.size());
  for (std::size_t u = 0; u < paths.size(); ++u) {
    out.per_user[u].assign(K, CMat::Zero(cfg.n_bs, cfg.n_u));
    for (const PathParams& p : paths[u]) {
      if (p.delay < 0.0 || p.delay > (cfg.num_taps - 1) * Ts + 1e-15) {
        throw ConfigError("path delay outside [0, (D-1) T_s]");
      }
      const bool los = p.kind == PathParams::Kind::LoS;
      const double scale = (los ? los_scale : nlos_scale) * gain_amp;
      const cdouble phase(std::cos(p.gain_phase), std::sin(p.gain_phase));
      for (int k = 0; k < K; ++k) {
        const double f = subcarrier_frequency(k + 1, cfg);
        std::optional<cdouble> refl;
        if (!los) refl = reflection_coefficient(f, p.incidence_angle, p.material).gamma;
        const double mu = absorption ? absorption(f) : cfg.absorption_coeff;
        const double mag = path_gain_magnitude(f, p.distance, mu, refl);
        const cdouble beta = pulse_shaping_coeff(p.delay, k, K, Ts, psf);
        const cdouble amp = scale * mag * phase * beta;
        const CVec ar = array_response(p.aoa_sine, f, cfg.carrier_freq, cfg.n_bs);
        const CVec at = array_response(p.aod_sine, f, cfg.carrier_freq, cfg.n_u);
        out.per_user[u][k].noalias() += amp * ar * at.adjoint();
      }
    }
  }
  for (const auto& user : out.per_user) {
    for (const auto& h : user) {
      if (!h.allFinite()) throw NumericalError("non-finite channel entry", 0);
    }
  }
  return out;
}

}  // namespace

ChannelRealization generate_channel(const SystemConfig& cfg,
                                    const std::vector<Material>& materials,
                                    const GmmAngleParams& gmm_aoa,
                                    const GmmAngleParams& gmm_aod,
                                    std::mt19937_64& rng,
                                    const AbsorptionModel& absorption) {
  cfg.validate();
  if (cfg.num_nlos > 0 && materials.empty()) {
    throw ConfigError("NLoS paths requested but the material table is empty");
  }
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double Ts = cfg.sample_period();
  const double max_delay = (cfg.num_taps - 1) * Ts;

  std::vector<std::vector<PathParams>> paths(cfg.num_users);
  for (int u = 0; u < cfg.num_users; ++u) {
    PathParams los;
    los.kind = PathParams::Kind::LoS;
    los.aoa_sine = sample_angle_gmm(gmm_aoa, rng);
    los.aod_sine = sample_angle_gmm(gmm_aod, rng);
    los.delay = uni(rng) * max_delay;
    los.gain_phase = uni(rng) * 2.0 * kPi;
    los.distance = cfg.distance;
    paths[u].push_back(los);
    for (int z = 0; z < cfg.num_nlos * cfg.num_rays; ++z) {
      PathParams p;
      p.kind = PathParams::Kind::NLoS;
      p.material = materials[static_cast<std::size_t>(uni(rng) * materials.size()) %
                             materials.size()];
      p.incidence_angle = uni(rng) * (kPi / 2.0 - 1e-9);
      // Reflected paths travel farther than the direct one; the paper leaves
      // the geometry unspecified, so the extra length is drawn in [0, 50%].
      p.distance = cfg.distance * (1.0 + 0.5 * uni(rng));
      p.aoa_sine = sample_angle_gmm(gmm_aoa, rng);
      p.aod_sine = sample_angle_gmm(gmm_aod, rng);
      p.delay = uni(rng) * max_delay;
      p.gain_phase = uni(rng) * 2.0 * kPi;
      p.total_internal_reflection =
          reflection_coefficient(cfg.carrier_freq, p.incidence_angle, p.material)
              .total_internal_reflection;
      paths[u].push_back(p);
    }
  }
  return synthesize(cfg, paths, absorption);
}

ChannelRealization channel_from_paths(const SystemConfig& cfg,
                                      const std::vector<std::vector<PathParams>>& paths,
                                      const AbsorptionModel& absorption) {
  if (static_cast<int>(paths.size()) != cfg.num_users) {
    throw ShapeError("channel_from_paths: one path list per user required");
  }
  return synthesize(cfg, paths, absorption);
}

double channel_scale_reference(const SystemConfig& cfg) {
  return std::sqrt(static_cast<double>(cfg.n_u) * cfg.n_bs) * cfg.tx_gain_amplitude() *
         cfg.rx_gain_amplitude() *
         path_gain_magnitude(cfg.carrier_freq, cfg.distance, cfg.absorption_coeff);
}

}  // namespace thz
