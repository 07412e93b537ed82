#include "config.hpp"

namespace uavsim {

using nlohmann::json;

namespace {

// Pulls known keys out of a copied object and rejects leftovers, so typos
// in config files fail loudly instead of silently using defaults.
class Section {
 public:
  Section(const json& j, std::string name) : name_(std::move(name)) {
    if (!j.is_object()) throw Error(Error::Kind::parse, name_ + " must be an object");
    rest_ = j;
  }

  template <typename T>
  void take(const char* key, T& target) {
    auto it = rest_.find(key);
    if (it == rest_.end()) return;
    try {
      target = it->get<T>();
    } catch (const json::exception&) {
      throw Error(Error::Kind::parse, name_ + "." + key + " has the wrong type");
    }
    rest_.erase(it);
  }

  json sub(const char* key) {
    auto it = rest_.find(key);
    if (it == rest_.end()) return json::object();
    json out = *it;
    rest_.erase(it);
    return out;
  }

  void finish() const {
    if (!rest_.empty())
      throw Error(Error::Kind::parse,
                  "unknown key in " + name_ + ": " + rest_.begin().key());
  }

 private:
  std::string name_;
  json rest_;
};

void parse_channel(const json& j, ChannelParams& c) {
  Section s(j, "channel");
  s.take("carrier_hz", c.carrier_hz);
  s.take("bandwidth_hz", c.bandwidth_hz);
  s.take("noise_psd_dbm_hz", c.noise_psd_dbm_hz);
  s.take("antenna_gain_linear", c.antenna_gain_linear);
  s.take("los_a", c.los_a);
  s.take("los_b", c.los_b);
  s.take("excess_loss_los_mu_db", c.excess_loss_los_mu_db);
  s.take("excess_loss_los_sigma_db", c.excess_loss_los_sigma_db);
  s.take("excess_loss_nlos_mu_db", c.excess_loss_nlos_mu_db);
  s.take("excess_loss_nlos_sigma_db", c.excess_loss_nlos_sigma_db);
  s.take("light_speed_m_s", c.light_speed_m_s);
  s.finish();
}

json channel_json(const ChannelParams& c) {
  return json{{"carrier_hz", c.carrier_hz},
              {"bandwidth_hz", c.bandwidth_hz},
              {"noise_psd_dbm_hz", c.noise_psd_dbm_hz},
              {"antenna_gain_linear", c.antenna_gain_linear},
              {"los_a", c.los_a},
              {"los_b", c.los_b},
              {"excess_loss_los_mu_db", c.excess_loss_los_mu_db},
              {"excess_loss_los_sigma_db", c.excess_loss_los_sigma_db},
              {"excess_loss_nlos_mu_db", c.excess_loss_nlos_mu_db},
              {"excess_loss_nlos_sigma_db", c.excess_loss_nlos_sigma_db},
              {"light_speed_m_s", c.light_speed_m_s}};
}

void parse_econ(const json& j, EconomicParams& e) {
  Section s(j, "econ");
  s.take("energy_cost_per_j", e.energy_cost_per_j);
  s.take("ue_payment_per_bit", e.ue_payment_per_bit);
  s.take("hover_power_w", e.hover_power_w);
  s.take("move_power_w", e.move_power_w);
  s.take("p_max_w", e.p_max_w);
  s.finish();
}

json econ_json(const EconomicParams& e) {
  return json{{"energy_cost_per_j", e.energy_cost_per_j},
              {"ue_payment_per_bit", e.ue_payment_per_bit},
              {"hover_power_w", e.hover_power_w},
              {"move_power_w", e.move_power_w},
              {"p_max_w", e.p_max_w}};
}

void parse_learning(const json& j, LearningConfig& l) {
  Section s(j, "learning");
  s.take("slot_s", l.slot_s);
  s.take("learn_window_s", l.learn_window_s);
  s.take("service_interval_s", l.service_interval_s);
  s.take("efficiency", l.efficiency);
  s.take("travel_fraction", l.travel_fraction);
  s.take("grid_cell_m", l.grid_cell_m);
  s.finish();
}

json learning_json(const LearningConfig& l) {
  return json{{"slot_s", l.slot_s},
              {"learn_window_s", l.learn_window_s},
              {"service_interval_s", l.service_interval_s},
              {"efficiency", l.efficiency},
              {"travel_fraction", l.travel_fraction},
              {"grid_cell_m", l.grid_cell_m}};
}

void parse_placement(const json& j, PlacementOptions& p) {
  Section s(j, "placement");
  s.take("altitude_min_m", p.altitude_min_m);
  s.take("altitude_max_m", p.altitude_max_m);
  s.take("p_floor_w", p.p_floor_w);
  s.take("bisect_rel_tol", p.bisect_rel_tol);
  s.take("nelder_mead_iters", p.nelder_mead_iters);
  s.take("restarts", p.restarts);
  s.finish();
}

json placement_json(const PlacementOptions& p) {
  return json{{"altitude_min_m", p.altitude_min_m},
              {"altitude_max_m", p.altitude_max_m},
              {"p_floor_w", p.p_floor_w},
              {"bisect_rel_tol", p.bisect_rel_tol},
              {"nelder_mead_iters", p.nelder_mead_iters},
              {"restarts", p.restarts}};
}

void parse_fit(const json& j, FitOptions& f) {
  Section s(j, "mixture");
  s.take("tol", f.tol);
  s.take("max_iter", f.max_iter);
  s.take("cov_floor", f.cov_floor);
  s.finish();
}

json fit_json(const FitOptions& f) {
  return json{{"tol", f.tol}, {"max_iter", f.max_iter}, {"cov_floor", f.cov_floor}};
}

void parse_sim(const json& j, SimParams& p) {
  Section s(j, "sim");
  s.take("overload_window_s", p.overload_window_s);
  s.take("backoff_s", p.backoff_s);
  s.take("round_hold_s", p.round_hold_s);
  s.take("recharge_s", p.recharge_s);
  s.take("full_energy_j", p.full_energy_j);
  s.take("relisten_power_floor_w", p.relisten_power_floor_w);
  s.take("gmm_components", p.gmm_components);
  s.take("gmf_components", p.gmf_components);
  s.take("stochastic_excess_loss", p.stochastic_excess_loss);
  s.finish();
}

json sim_json(const SimParams& p) {
  return json{{"overload_window_s", p.overload_window_s},
              {"backoff_s", p.backoff_s},
              {"round_hold_s", p.round_hold_s},
              {"recharge_s", p.recharge_s},
              {"full_energy_j", p.full_energy_j},
              {"relisten_power_floor_w", p.relisten_power_floor_w},
              {"gmm_components", p.gmm_components},
              {"gmf_components", p.gmf_components},
              {"stochastic_excess_loss", p.stochastic_excess_loss}};
}

void parse_synth(const json& j, SynthSpec& sp) {
  Section s(j, "synth");
  s.take("bs_cols", sp.bs_cols);
  s.take("bs_rows", sp.bs_rows);
  s.take("bs_spacing_m", sp.bs_spacing_m);
  s.take("cell_m", sp.cell_m);
  s.take("bs_capacity_bps", sp.bs_capacity_bps);
  s.take("background_ue_per_bs", sp.background_ue_per_bs);
  s.take("background_rate_per_ue_bps", sp.background_rate_per_ue_bps);
  s.take("background_interval_s", sp.background_interval_s);
  s.take("hotspot_ue_count", sp.hotspot_ue_count);
  s.take("hotspot_sigma_m", sp.hotspot_sigma_m);
  s.take("hotspot_interval_s", sp.hotspot_interval_s);
  s.take("hotspot_offset_fraction", sp.hotspot_offset_fraction);
  s.take("rho_ratio", sp.rho_ratio);
  s.take("events_per_bs", sp.events_per_bs);
  s.take("horizon_s", sp.horizon_s);
  s.take("fleet_size", sp.fleet_size);
  s.take("uav_speed_m_s", sp.uav_speed_m_s);
  s.take("full_energy_j", sp.full_energy_j);
  s.take("min_initial_energy_fraction", sp.min_initial_energy_fraction);
  s.take("uav_altitude_m", sp.uav_altitude_m);
  s.take("num_clusters", sp.num_clusters);
  s.finish();
}

json synth_json(const SynthSpec& sp) {
  return json{{"bs_cols", sp.bs_cols},
              {"bs_rows", sp.bs_rows},
              {"bs_spacing_m", sp.bs_spacing_m},
              {"cell_m", sp.cell_m},
              {"bs_capacity_bps", sp.bs_capacity_bps},
              {"background_ue_per_bs", sp.background_ue_per_bs},
              {"background_rate_per_ue_bps", sp.background_rate_per_ue_bps},
              {"background_interval_s", sp.background_interval_s},
              {"hotspot_ue_count", sp.hotspot_ue_count},
              {"hotspot_sigma_m", sp.hotspot_sigma_m},
              {"hotspot_interval_s", sp.hotspot_interval_s},
              {"hotspot_offset_fraction", sp.hotspot_offset_fraction},
              {"rho_ratio", sp.rho_ratio},
              {"events_per_bs", sp.events_per_bs},
              {"horizon_s", sp.horizon_s},
              {"fleet_size", sp.fleet_size},
              {"uav_speed_m_s", sp.uav_speed_m_s},
              {"full_energy_j", sp.full_energy_j},
              {"min_initial_energy_fraction", sp.min_initial_energy_fraction},
              {"uav_altitude_m", sp.uav_altitude_m},
              {"num_clusters", sp.num_clusters}};
}

void parse_sweep(const json& j, SweepSpec& s2) {
  Section s(j, "sweep");
  s.take("policies", s2.policies);
  s.take("fleet_sizes", s2.fleet_sizes);
  s.take("ratios", s2.ratios);
  s.take("seed_count", s2.seed_count);
  s.take("base_seed", s2.base_seed);
  s.take("horizon_s", s2.horizon_s);
  s.finish();
}

json sweep_json(const SweepSpec& s) {
  return json{{"policies", s.policies},   {"fleet_sizes", s.fleet_sizes},
              {"ratios", s.ratios},       {"seed_count", s.seed_count},
              {"base_seed", s.base_seed}, {"horizon_s", s.horizon_s}};
}

}  // namespace

void RunConfig::validate() const {
  channel.validate();
  econ.validate();
  learning.validate();
  if (sim.gmm_components < 1 || sim.gmf_components < 1)
    throw invalid("mixture component counts must be >= 1");
  if (sweep.seed_count < 1) throw invalid("sweep needs at least one seed");
  for (const auto& p : sweep.policies) policy_from_string(p);
  if (detect.levels < 1) throw invalid("detect.levels must be >= 1");
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  Section top(j, "config");
  parse_channel(top.sub("channel"), cfg.channel);
  parse_econ(top.sub("econ"), cfg.econ);
  parse_learning(top.sub("learning"), cfg.learning);
  parse_fit(top.sub("mixture"), cfg.sim.fit);
  parse_placement(top.sub("placement"), cfg.sim.placement);
  parse_sim(top.sub("sim"), cfg.sim);
  parse_synth(top.sub("synth"), cfg.synth);
  parse_sweep(top.sub("sweep"), cfg.sweep);
  {
    Section s(top.sub("detect"), "detect");
    s.take("levels", cfg.detect.levels);
    s.take("threshold_sigmas", cfg.detect.threshold_sigmas);
    s.finish();
  }
  {
    Section s(top.sub("ingest"), "ingest");
    s.take("byte_scale", cfg.ingest.byte_scale);
    s.take("cell_m", cfg.ingest.cell_m);
    s.take("pad_m", cfg.ingest.pad_m);
    s.finish();
  }
  {
    Section s(top.sub("learn"), "learn");
    s.take("kmean_ks", cfg.learn.kmean_ks);
    s.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

RunConfig config_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Error::Kind::parse, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["channel"] = channel_json(cfg.channel);
  j["econ"] = econ_json(cfg.econ);
  j["learning"] = learning_json(cfg.learning);
  j["mixture"] = fit_json(cfg.sim.fit);
  j["placement"] = placement_json(cfg.sim.placement);
  j["sim"] = sim_json(cfg.sim);
  j["synth"] = synth_json(cfg.synth);
  j["sweep"] = sweep_json(cfg.sweep);
  j["detect"] = json{{"levels", cfg.detect.levels},
                     {"threshold_sigmas", cfg.detect.threshold_sigmas}};
  j["ingest"] = json{{"byte_scale", cfg.ingest.byte_scale},
                     {"cell_m", cfg.ingest.cell_m},
                     {"pad_m", cfg.ingest.pad_m}};
  j["learn"] = json{{"kmean_ks", cfg.learn.kmean_ks}};
  return j;
}

}  // namespace uavsim
