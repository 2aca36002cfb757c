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

#include "thz/experiments.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>

#include "thz/beamforming.hpp"
#include "thz/channel.hpp"
#include "thz/estimation.hpp"
#include "thz/frontend.hpp"
#include "thz/rng.hpp"

#include <json.hpp>

namespace thz {

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::nmse_vs_snr: return "nmse_vs_snr";
    case ExperimentKind::ber_vs_snr: return "ber_vs_snr";
    case ExperimentKind::se_vs_snr: return "se_vs_snr";
    case ExperimentKind::adc_sweep: return "adc_sweep";
    case ExperimentKind::gain_profile: return "gain_profile";
    case ExperimentKind::psf_compare: return "psf_compare";
  }
  return "?";
}

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::hbg_sr: return "hbg_sr";
    case EstimatorKind::sbl_per_subcarrier: return "sbl_per_subcarrier";
    case EstimatorKind::mmv_ls: return "mmv_ls";
    case EstimatorKind::gsomp: return "gsomp";
  }
  return "?";
}

std::string to_string(BeamformerKind k) {
  switch (k) {
    case BeamformerKind::ttd: return "ttd";
    case BeamformerKind::flat: return "flat";
    case BeamformerKind::optimal_digital: return "optimal_digital";
  }
  return "?";
}

ExperimentKind experiment_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::nmse_vs_snr, ExperimentKind::ber_vs_snr,
                 ExperimentKind::se_vs_snr, ExperimentKind::adc_sweep,
                 ExperimentKind::gain_profile, ExperimentKind::psf_compare}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown experiment kind: " + s);
}

EstimatorKind estimator_from_string(const std::string& s) {
  for (auto k : {EstimatorKind::hbg_sr, EstimatorKind::sbl_per_subcarrier,
                 EstimatorKind::mmv_ls, EstimatorKind::gsomp}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown estimator: " + s);
}

BeamformerKind beamformer_from_string(const std::string& s) {
  for (auto k : {BeamformerKind::ttd, BeamformerKind::flat, BeamformerKind::optimal_digital}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown beamformer: " + s);
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw ConfigError("experiment trials must be >= 1");
  if (snr_grid_db.empty()) throw ConfigError("experiment snr_grid_db must be nonempty");
  if (kind == ExperimentKind::adc_sweep && adc_bits_list.empty()) {
    throw ConfigError("adc_sweep needs a nonempty adc_bits list");
  }
  base.validate();
}

namespace {

struct TrialFront {
  ChannelRealization channel;  // normalized to the LoS reference scale
  PilotFrame frame;
  PilotObservation obs;
};

TrialFront run_front(const SystemConfig& cfg, std::uint64_t master, std::uint64_t trial,
                     const QuantizationParams& qp) {
  TrialFront tf;
  auto ch_rng = make_stream(master, trial, StreamId::channel);
  tf.channel = generate_channel(cfg, default_materials(), default_aoa_gmm(), default_aod_gmm(),
                                ch_rng);
  tf.channel.scale(channel_scale_reference(cfg));
  auto fr_rng = make_stream(master, trial, StreamId::frame);
  tf.frame = make_pilot_frame(cfg, fr_rng);
  auto nz_rng = make_stream(master, trial, StreamId::noise);
  tf.obs = simulate_received_pilots(tf.channel, tf.frame, cfg, qp, nz_rng);
  return tf;
}

std::vector<CMat> true_concat(const ChannelRealization& ch) {
  std::vector<CMat> out(ch.num_subcarriers());
  for (int k = 0; k < ch.num_subcarriers(); ++k) out[k] = ch.concat(k);
  return out;
}

int default_gsomp_support(const SystemConfig& cfg) {
  const int paths = cfg.num_users * (1 + cfg.num_nlos * cfg.num_rays);
  return std::min(cfg.num_blocks * cfg.total_streams() - 1, 2 * paths);
}

struct EstimateOutput {
  std::vector<CMat> H_hat;
  std::optional<BeamspaceEstimate> beamspace;
};

EstimateOutput run_estimator(EstimatorKind kind, const PilotObservation& obs,
                             const SystemConfig& cfg, const ExperimentSpec& spec) {
  EstimateOutput out;
  switch (kind) {
    case EstimatorKind::hbg_sr: {
      auto est = hbg_sr_estimate(obs, cfg, spec.em_epsilon, spec.em_max_iterations);
      out.H_hat = reconstruct_channel(est.H_b, obs);
      out.beamspace = std::move(est);
      break;
    }
    case EstimatorKind::sbl_per_subcarrier: {
      auto est = sbl_per_subcarrier_estimate(obs, cfg, spec.em_epsilon, spec.em_max_iterations);
      out.H_hat = reconstruct_channel(est.H_b, obs);
      out.beamspace = std::move(est);
      break;
    }
    case EstimatorKind::mmv_ls: {
      auto est = mmv_ls_estimate(obs);
      out.H_hat.resize(cfg.num_subcarriers);
      for (int k = 0; k < cfg.num_subcarriers; ++k) {
        out.H_hat[k] = Eigen::Map<const CMat>(est.H_vec.col(k).data(), cfg.n_bs,
                                              cfg.total_tx_antennas());
      }
      break;
    }
    case EstimatorKind::gsomp: {
      auto est = gsomp_estimate(obs, default_gsomp_support(cfg));
      out.H_hat = reconstruct_channel(est.H_b, obs);
      out.beamspace = std::move(est);
      break;
    }
  }
  return out;
}

struct Accumulator {
  std::vector<double> samples;
  int failures = 0;
};

ResultRow finalize(const std::string& experiment, const std::string& method, double snr,
                   const std::string& metric, const Accumulator& acc) {
  ResultRow row;
  row.experiment = experiment;
  row.method = method;
  row.snr_db = snr;
  row.metric = metric;
  row.trials = static_cast<int>(acc.samples.size());
  row.failures = acc.failures;
  if (!acc.samples.empty()) {
    double mean = 0.0;
    for (double v : acc.samples) mean += v;
    mean /= acc.samples.size();
    double var = 0.0;
    for (double v : acc.samples) var += (v - mean) * (v - mean);
    row.value = mean;
    row.stderr_value = acc.samples.size() > 1
                           ? std::sqrt(var / (acc.samples.size() - 1) / acc.samples.size())
                           : 0.0;
  }
  return row;
}

// Runs `fn(trial)` for every trial, collecting per-method samples in trial
// order so the aggregation does not depend on execution interleaving.
using TrialFn = std::function<std::map<std::string, double>(int trial)>;

void run_trials(const std::string& experiment, double snr, const std::string& metric,
                int trials, const TrialFn& fn, ResultTable& table) {
  std::vector<std::map<std::string, double>> per_trial(trials);
  std::vector<char> failed(trials, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int t = 0; t < trials; ++t) {
    try {
      per_trial[t] = fn(t);
    } catch (const std::exception&) {
      failed[t] = 1;
    }
  }
  std::map<std::string, Accumulator> acc;
  for (int t = 0; t < trials; ++t) {
    if (failed[t]) continue;
    for (const auto& [method, value] : per_trial[t]) acc[method].samples.push_back(value);
  }
  int failures = 0;
  for (int t = 0; t < trials; ++t) failures += failed[t];
  for (auto& [method, a] : acc) {
    a.failures = failures;
    table.rows.push_back(finalize(experiment, method, snr, metric, a));
  }
}

void run_nmse_like(const ExperimentSpec& spec, const SystemConfig& base, ResultTable& table,
                   const std::string& method_suffix = "") {
  const std::string name = to_string(spec.kind);
  for (double snr : spec.snr_grid_db) {
    SystemConfig cfg = base;
    cfg.noise_power = linear_from_db(-snr);
    const QuantizationParams qp = QuantizationParams::from_config(cfg);
    run_trials(name, snr, "nmse", spec.trials,
               [&](int t) {
                 std::map<std::string, double> out;
                 const TrialFront tf = run_front(cfg, spec.seed, t, qp);
                 const auto truth = true_concat(tf.channel);
                 for (EstimatorKind est : spec.estimators) {
                   const auto res = run_estimator(est, tf.obs, cfg, spec);
                   out[to_string(est) + method_suffix] = nmse_metric(res.H_hat, truth);
                 }
                 return out;
               },
               table);
  }
}

void run_link_metrics(const ExperimentSpec& spec, ResultTable& table) {
  const std::string name = to_string(spec.kind);
  const bool want_ber = spec.kind == ExperimentKind::ber_vs_snr;
  for (double snr : spec.snr_grid_db) {
    SystemConfig cfg = spec.base;
    cfg.noise_power = linear_from_db(-snr);
    const double sigma_n2 = cfg.noise_power;
    const QuantizationParams qp = QuantizationParams::from_config(cfg);
    run_trials(name, snr, want_ber ? "ber" : "se", spec.trials,
               [&](int t) {
                 std::map<std::string, double> out;
                 const TrialFront tf = run_front(cfg, spec.seed, t, qp);
                 const auto truth = true_concat(tf.channel);
                 const auto est = hbg_sr_estimate(tf.obs, cfg, spec.em_epsilon,
                                                  spec.em_max_iterations);
                 const auto H_hat = reconstruct_channel(est.H_b, tf.obs);
                 const auto angles = extract_dominant_angles(est, cfg);
                 const auto precoders = build_transmit_precoders(angles, cfg);
                 auto data_rng = make_stream(spec.seed, t, StreamId::data);
                 for (BeamformerKind bf : spec.beamformers) {
                   if (bf == BeamformerKind::optimal_digital) {
                     const auto link = optimal_digital_link(tf.channel, sigma_n2);
                     out["optimal_digital"] =
                         want_ber ? ber_over_link(link, cfg.num_data_vectors, data_rng)
                                  : spectral_efficiency(link.H_eff_true, link.noise_cov,
                                                        link.n_streams);
                     continue;
                   }
                   const bool ttd = bf == BeamformerKind::ttd;
                   const auto comb = build_ttd_hybrid_combiner(angles, H_hat, cfg, ttd);
                   const auto link = effective_link(tf.channel, H_hat, comb, precoders, cfg, qp,
                                                    sigma_n2);
                   out[to_string(bf) + "+hbg_sr"] =
                       want_ber ? ber_over_link(link, cfg.num_data_vectors, data_rng)
                                : spectral_efficiency(link.H_eff_true, link.noise_cov,
                                                      link.n_streams);
                 }
                 if (want_ber) {
                   // Genie-aided reference: true CSI end to end.
                   const auto gangles = genie_angle_selection(tf.channel, cfg);
                   const auto gprec = build_transmit_precoders(gangles, cfg);
                   const auto gcomb = build_ttd_hybrid_combiner(gangles, truth, cfg, true);
                   const auto glink = effective_link(tf.channel, truth, gcomb, gprec, cfg, qp,
                                                     sigma_n2);
                   out["ttd+genie"] = ber_over_link(glink, cfg.num_data_vectors, data_rng);
                 }
                 return out;
               },
               table);
  }
}

void run_adc_sweep(const ExperimentSpec& spec, ResultTable& table) {
  for (int bits : spec.adc_bits_list) {
    ExperimentSpec sub = spec;
    sub.kind = ExperimentKind::adc_sweep;
    sub.base.adc_bits = bits;
    const std::string tag = bits <= kInfiniteBits ? "[b=inf]" : "[b=" + std::to_string(bits) + "]";
    run_nmse_like(sub, sub.base, table, tag);
  }
}

void run_psf_compare(const ExperimentSpec& spec, ResultTable& table) {
  for (PsfConfig::Kind kind : {PsfConfig::Kind::rrc, PsfConfig::Kind::rect}) {
    ExperimentSpec sub = spec;
    sub.base.psf.kind = kind;
    const std::string tag = kind == PsfConfig::Kind::rrc ? "[rrc]" : "[rect]";
    run_nmse_like(sub, sub.base, table, tag);
  }
}

}  // namespace

ResultTable run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ResultTable table;
  switch (spec.kind) {
    case ExperimentKind::nmse_vs_snr:
      run_nmse_like(spec, spec.base, table);
      break;
    case ExperimentKind::ber_vs_snr:
    case ExperimentKind::se_vs_snr:
      run_link_metrics(spec, table);
      break;
    case ExperimentKind::adc_sweep:
      run_adc_sweep(spec, table);
      break;
    case ExperimentKind::psf_compare:
      run_psf_compare(spec, table);
      break;
    case ExperimentKind::gain_profile:
      throw ConfigError("gain_profile produces profile rows; use run_gain_profile");
  }
  return table;
}

std::vector<GainProfileRow> run_gain_profile(const ExperimentSpec& spec) {
  spec.validate();
  const SystemConfig& cfg = spec.base;
  // Planted direction for the profile: the first user's LoS draw.
  auto ch_rng = make_stream(spec.seed, 0, StreamId::channel);
  auto channel = generate_channel(cfg, default_materials(), default_aoa_gmm(),
                                  default_aod_gmm(), ch_rng);
  const double psi0 = channel.paths[0][0].aoa_sine;
  const int S = cfg.tds_per_chain;
  const int P = cfg.n_bs / S;
  std::vector<GainProfileRow> rows;
  const int n_angles = 201;
  for (bool ttd : {true, false}) {
    const RVec delays = ttd ? ttd_delays(psi0, P, S, cfg.carrier_period()) : RVec::Zero(S);
    for (int k = 0; k < cfg.num_subcarriers; ++k) {
      const double f = subcarrier_frequency(k + 1, cfg);
      // Combiner column steered at psi0 with the chosen delay schedule.
      CVec w(cfg.n_bs);
      const CVec base = array_response(psi0, cfg.carrier_freq, cfg.carrier_freq, cfg.n_bs);
      for (int s = 0; s < S; ++s) {
        const double rot = kPi * s * P * psi0 - 2.0 * kPi * f * delays(s);
        w.segment(s * P, P) = cdouble(std::cos(rot), std::sin(rot)) * base.segment(s * P, P);
      }
      for (int a = 0; a < n_angles; ++a) {
        const double psi = -1.0 + 2.0 * a / (n_angles - 1);
        const CVec ar = array_response(psi, f, cfg.carrier_freq, cfg.n_bs);
        rows.push_back({psi, k + 1, std::abs(w.dot(ar)), ttd ? "ttd" : "flat"});
      }
    }
  }
  return rows;
}

void write_results_csv(const ResultTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "experiment,method,snr_db,metric,value,trials,stderr,failures\n";
  char buf[160];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.9g,%s,%.8e,%d,%.8e,%d\n", r.experiment.c_str(),
                  r.method.c_str(), r.snr_db, r.metric.c_str(), r.value, r.trials,
                  r.stderr_value, r.failures);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_gain_profile_csv(const std::vector<GainProfileRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "method,angle_sine,subcarrier_index,gain\n";
  char buf[120];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%d,%.8e\n", r.method.c_str(), r.angle_sine,
                  r.subcarrier_index, r.gain);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Config file handling

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& name, const std::string& why) {
  throw ConfigError("config field '" + name + "': " + why);
}

template <typename T>
void read_field(const json& j, const std::string& name, T& target) {
  if (!j.contains(name)) return;
  try {
    target = j.at(name).get<T>();
  } catch (const json::exception&) {
    bad_field(name, "invalid value");
  }
}

void read_adc_bits(const json& j, const std::string& name, int& target) {
  if (!j.contains(name)) return;
  const json& v = j.at(name);
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") {
      target = kInfiniteBits;
      return;
    }
    bad_field(name, "expected an integer or \"inf\"");
  }
  if (!v.is_number_integer()) bad_field(name, "expected an integer or \"inf\"");
  target = v.get<int>();
}

void check_known_keys(const json& j, const std::vector<std::string>& known,
                      const std::string& scope) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (!ok) throw ConfigError("unknown config field '" + scope + "." + key + "'");
  }
}

SystemConfig system_from_json(const json& j, const SystemConfig& base) {
  SystemConfig cfg = base;
  check_known_keys(
      j,
      {"n_bs", "n_u", "num_users", "n_rf_bs", "n_rf_u", "n_s_u", "num_subcarriers",
       "num_pilot_vectors", "num_blocks", "num_taps", "num_data_vectors", "num_nlos",
       "num_rays", "carrier_freq", "bandwidth", "grid_bs", "grid_tu", "adc_bits",
       "pilot_power", "noise_power", "psf", "tds_per_chain", "phase_bits", "absorption_coeff",
       "distance", "tx_gain_dbi", "rx_gain_dbi", "seed"},
      "system");
  read_field(j, "n_bs", cfg.n_bs);
  read_field(j, "n_u", cfg.n_u);
  read_field(j, "num_users", cfg.num_users);
  read_field(j, "n_rf_bs", cfg.n_rf_bs);
  read_field(j, "n_rf_u", cfg.n_rf_u);
  read_field(j, "n_s_u", cfg.n_s_u);
  read_field(j, "num_subcarriers", cfg.num_subcarriers);
  read_field(j, "num_pilot_vectors", cfg.num_pilot_vectors);
  read_field(j, "num_blocks", cfg.num_blocks);
  read_field(j, "num_taps", cfg.num_taps);
  read_field(j, "num_data_vectors", cfg.num_data_vectors);
  read_field(j, "num_nlos", cfg.num_nlos);
  read_field(j, "num_rays", cfg.num_rays);
  read_field(j, "carrier_freq", cfg.carrier_freq);
  read_field(j, "bandwidth", cfg.bandwidth);
  read_field(j, "grid_bs", cfg.grid_bs);
  read_field(j, "grid_tu", cfg.grid_tu);
  read_adc_bits(j, "adc_bits", cfg.adc_bits);
  read_field(j, "pilot_power", cfg.pilot_power);
  read_field(j, "noise_power", cfg.noise_power);
  read_field(j, "tds_per_chain", cfg.tds_per_chain);
  read_field(j, "phase_bits", cfg.phase_bits);
  read_field(j, "absorption_coeff", cfg.absorption_coeff);
  read_field(j, "distance", cfg.distance);
  read_field(j, "tx_gain_dbi", cfg.tx_gain_dbi);
  read_field(j, "rx_gain_dbi", cfg.rx_gain_dbi);
  read_field(j, "seed", cfg.seed);
  if (j.contains("psf")) {
    const json& p = j.at("psf");
    check_known_keys(p, {"kind", "roll_off", "upsampling", "rrc_span"}, "system.psf");
    if (p.contains("kind")) {
      const std::string kind = p.at("kind").get<std::string>();
      if (kind == "rrc") cfg.psf.kind = PsfConfig::Kind::rrc;
      else if (kind == "rect") cfg.psf.kind = PsfConfig::Kind::rect;
      else bad_field("psf.kind", "expected \"rrc\" or \"rect\"");
    }
    read_field(p, "roll_off", cfg.psf.roll_off);
    read_field(p, "upsampling", cfg.psf.upsampling);
    read_field(p, "rrc_span", cfg.psf.rrc_span);
  }
  cfg.validate();
  return cfg;
}

json system_to_json(const SystemConfig& c) {
  json j;
  j["n_bs"] = c.n_bs;
  j["n_u"] = c.n_u;
  j["num_users"] = c.num_users;
  j["n_rf_bs"] = c.n_rf_bs;
  j["n_rf_u"] = c.n_rf_u;
  j["n_s_u"] = c.n_s_u;
  j["num_subcarriers"] = c.num_subcarriers;
  j["num_pilot_vectors"] = c.num_pilot_vectors;
  j["num_blocks"] = c.num_blocks;
  j["num_taps"] = c.num_taps;
  j["num_data_vectors"] = c.num_data_vectors;
  j["num_nlos"] = c.num_nlos;
  j["num_rays"] = c.num_rays;
  j["carrier_freq"] = c.carrier_freq;
  j["bandwidth"] = c.bandwidth;
  j["grid_bs"] = c.grid_bs;
  j["grid_tu"] = c.grid_tu;
  if (c.infinite_adc()) j["adc_bits"] = "inf";
  else j["adc_bits"] = c.adc_bits;
  j["pilot_power"] = c.pilot_power;
  j["noise_power"] = c.noise_power;
  j["psf"] = {{"kind", c.psf.kind == PsfConfig::Kind::rrc ? "rrc" : "rect"},
              {"roll_off", c.psf.roll_off},
              {"upsampling", c.psf.upsampling},
              {"rrc_span", c.psf.rrc_span}};
  j["tds_per_chain"] = c.tds_per_chain;
  j["phase_bits"] = c.phase_bits;
  j["absorption_coeff"] = c.absorption_coeff;
  j["distance"] = c.distance;
  j["tx_gain_dbi"] = c.tx_gain_dbi;
  j["rx_gain_dbi"] = c.rx_gain_dbi;
  j["seed"] = c.seed;
  return j;
}

ExperimentSpec experiment_from_json(const json& j, const ExperimentSpec& base) {
  ExperimentSpec spec = base;
  check_known_keys(j,
                   {"kind", "snr_grid_db", "trials", "estimators", "beamformers", "adc_bits",
                    "seed", "em_epsilon", "em_max_iterations"},
                   "experiment");
  if (j.contains("kind")) spec.kind = experiment_from_string(j.at("kind").get<std::string>());
  read_field(j, "snr_grid_db", spec.snr_grid_db);
  read_field(j, "trials", spec.trials);
  if (j.contains("estimators")) {
    spec.estimators.clear();
    for (const auto& e : j.at("estimators")) {
      spec.estimators.push_back(estimator_from_string(e.get<std::string>()));
    }
  }
  if (j.contains("beamformers")) {
    spec.beamformers.clear();
    for (const auto& b : j.at("beamformers")) {
      spec.beamformers.push_back(beamformer_from_string(b.get<std::string>()));
    }
  }
  if (j.contains("adc_bits")) {
    spec.adc_bits_list.clear();
    for (const auto& b : j.at("adc_bits")) {
      if (b.is_string() && b.get<std::string>() == "inf") {
        spec.adc_bits_list.push_back(kInfiniteBits);
      } else if (b.is_number_integer()) {
        spec.adc_bits_list.push_back(b.get<int>());
      } else {
        bad_field("experiment.adc_bits", "entries must be integers or \"inf\"");
      }
    }
  }
  read_field(j, "seed", spec.seed);
  read_field(j, "em_epsilon", spec.em_epsilon);
  read_field(j, "em_max_iterations", spec.em_max_iterations);
  return spec;
}

json experiment_to_json(const ExperimentSpec& s) {
  json j;
  j["kind"] = to_string(s.kind);
  j["snr_grid_db"] = s.snr_grid_db;
  j["trials"] = s.trials;
  json est = json::array();
  for (auto e : s.estimators) est.push_back(to_string(e));
  j["estimators"] = est;
  json bf = json::array();
  for (auto b : s.beamformers) bf.push_back(to_string(b));
  j["beamformers"] = bf;
  json bits = json::array();
  for (int b : s.adc_bits_list) {
    if (b <= kInfiniteBits) bits.push_back("inf");
    else bits.push_back(b);
  }
  j["adc_bits"] = bits;
  j["seed"] = s.seed;
  j["em_epsilon"] = s.em_epsilon;
  j["em_max_iterations"] = s.em_max_iterations;
  return j;
}

}  // namespace

ParsedConfig parse_config_text(const std::string& text) {
  json j;
  std::string trimmed;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) trimmed.push_back(c);
  }
  if (trimmed.empty()) {
    j = json::object();
  } else {
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  check_known_keys(j, {"profile", "system", "experiment"}, "");

  ParsedConfig out;
  out.system = paper_profile();
  if (j.contains("profile")) {
    const std::string p = j.at("profile").get<std::string>();
    if (p == "paper") out.system = paper_profile();
    else if (p == "desk") out.system = desk_profile();
    else bad_field("profile", "expected \"paper\" or \"desk\"");
  }
  if (j.contains("system")) out.system = system_from_json(j.at("system"), out.system);
  if (j.contains("experiment")) {
    out.experiment = experiment_from_json(j.at("experiment"), out.experiment);
  }
  out.experiment.base = out.system;
  out.experiment.seed = out.system.seed;
  if (j.contains("experiment") && j.at("experiment").contains("seed")) {
    out.experiment.seed = j.at("experiment").at("seed").get<std::uint64_t>();
  }
  return out;
}

ParsedConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

std::string serialize_config(const ParsedConfig& cfg) {
  json j;
  j["system"] = system_to_json(cfg.system);
  j["experiment"] = experiment_to_json(cfg.experiment);
  return j.dump(2);
}

}  // namespace thz
