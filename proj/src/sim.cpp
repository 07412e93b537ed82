#include "sim.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <set>

#include "json.hpp"

namespace uavsim {

using nlohmann::json;

Policy policy_from_string(const std::string& s) {
  if (s == "predictive") return Policy::predictive;
  if (s == "closest") return Policy::closest;
  if (s == "max_energy") return Policy::max_energy;
  throw invalid("unknown policy: " + s);
}

std::string to_string(Policy p) {
  switch (p) {
    case Policy::predictive: return "predictive";
    case Policy::closest: return "closest";
    case Policy::max_energy: return "max_energy";
  }
  return "?";
}

void Scenario::validate() const {
  if (bss.empty()) throw invalid("scenario has no base stations");
  econ.validate();
  channel.validate();
  learning.validate();
  for (const auto& u : fleet) u.validate();
  for (const auto& b : bss) {
    if (b.service_area.empty()) throw invalid("empty service area");
    if (b.capacity_bps <= 0.0) throw invalid("BS capacity must be positive");
  }
  // Service regions partition the shared grid.
  for (size_t i = 0; i < bss.size(); ++i) {
    if (!bss[i].service_area.same_grid(bss[0].service_area))
      throw invalid("service regions must share one grid");
    for (size_t k = i + 1; k < bss.size(); ++k) {
      bool overlap = false;
      bss[i].service_area.for_each_cell([&](int ix, int iy, Vec2) {
        if (bss[k].service_area.cell(ix, iy)) overlap = true;
      });
      if (overlap) throw invalid("service regions overlap");
    }
  }
  for (const auto& s : streams) {
    bool known = false;
    for (const auto& b : bss) known |= b.id == s.bs_id;
    if (!known) throw invalid("record stream for unknown BS");
  }
}

const RecordStream& Scenario::stream_for(int bs_id) const {
  for (const auto& s : streams)
    if (s.bs_id == bs_id) return s;
  static const RecordStream empty;
  return empty;
}

void BroadcastChannel::acquire(int bs_id, double time) {
  pending_.push_back({time, bs_id});
  std::sort(pending_.begin(), pending_.end());
}

std::optional<std::pair<int, double>> BroadcastChannel::try_grant(double now) {
  if (holder_ || pending_.empty()) return std::nullopt;
  const Pending next = pending_.front();
  if (next.time > now) return std::nullopt;
  pending_.erase(pending_.begin());
  holder_ = next.bs_id;
  const double grant = std::max(next.time, free_at_);
  free_at_ = grant;
  return std::make_pair(next.bs_id, grant);
}

void BroadcastChannel::release(int bs_id, double time) {
  if (!holder_ || *holder_ != bs_id)
    throw Error(Error::Kind::runtime, "protocol violation: release without acquire");
  holder_.reset();
  free_at_ = std::max(free_at_, time);
}

std::string LogEvent::to_json_line() const {
  json j;
  j["t"] = time_s;
  j["kind"] = kind;
  if (bs_id >= 0) j["bs"] = bs_id;
  if (uav_id >= 0) j["uav"] = uav_id;
  if (subarea >= 0) j["sub"] = subarea;
  if (engagement >= 0) j["eng"] = engagement;
  if (!payload.empty()) j["data"] = payload;
  return j.dump();
}

std::string MetricsReport::to_json() const {
  json j;
  j["policy"] = policy;
  j["total_capacity_bps"] = total_capacity_bps;
  j["avg_energy_per_uav_j"] = avg_energy_per_uav_j;
  j["avg_service_delay_s"] = avg_service_delay_s;
  j["avg_bs_utility"] = avg_bs_utility;
  j["total_uav_utility"] = total_uav_utility;
  j["detections"] = detections;
  j["rounds_broadcast"] = rounds_broadcast;
  j["engagements_served"] = engagements_served;
  j["rounds_unserved"] = rounds_unserved;
  j["recharges"] = recharges;
  j["fleet_size"] = fleet_size;
  return j.dump(2);
}

std::vector<double> detection_times(const RecordStream& stream, double capacity_bps,
                                    double window_s, double horizon_s) {
  std::vector<double> out;
  if (stream.records.empty()) return out;
  std::map<long, double> offered;
  for (const auto& r : stream.records)
    offered[static_cast<long>(std::floor(r.time_s))] += r.rate_bps;
  const long t_end = static_cast<long>(horizon_s);
  const long window = std::max<long>(1, static_cast<long>(window_s));
  std::deque<double> recent;
  double rolling = 0.0;
  bool armed = true;
  long calm = 0;
  for (long t = 0; t <= t_end; ++t) {
    const auto it = offered.find(t);
    const double load = it == offered.end() ? 0.0 : it->second;
    recent.push_back(load);
    rolling += load;
    if (static_cast<long>(recent.size()) > window) {
      rolling -= recent.front();
      recent.pop_front();
    }
    const bool full = static_cast<long>(recent.size()) == window;
    const bool over = full && rolling / window > capacity_bps;
    if (over && armed) {
      out.push_back(static_cast<double>(t));
      armed = false;
      calm = 0;
    } else if (!over && !armed) {
      if (++calm >= window) armed = true;
    }
  }
  return out;
}

MetricsReport collect_metrics(const std::vector<LogEvent>& log) {
  MetricsReport rep;
  std::set<int> open_engagements;
  bool saw_start = false;
  double delay_sum = 0.0, energy_sum = 0.0, bs_utility_sum = 0.0;
  for (const auto& e : log) {
    if (e.kind == "sim_start") {
      saw_start = true;
      rep.fleet_size = static_cast<int>(e.payload.at("fleet_size"));
      continue;
    }
    if (e.kind == "detection") ++rep.detections;
    if (e.kind == "broadcast") ++rep.rounds_broadcast;
    if (e.kind == "no_feasible") ++rep.rounds_unserved;
    if (e.kind == "recharge_start") ++rep.recharges;
    if (e.kind == "select") open_engagements.insert(e.engagement);
    if (e.kind == "service_end") {
      if (!open_engagements.erase(e.engagement))
        throw Error(Error::Kind::runtime, "truncated log: end without select");
      ++rep.engagements_served;
      rep.total_capacity_bps += e.payload.at("capacity_bps");
      delay_sum += e.payload.at("delay_s");
      energy_sum += e.payload.at("energy_j");
      bs_utility_sum += e.payload.at("bs_utility");
      rep.total_uav_utility += e.payload.at("uav_utility");
    }
  }
  if (!saw_start) throw Error(Error::Kind::runtime, "truncated log: missing sim_start");
  if (!open_engagements.empty())
    throw Error(Error::Kind::runtime, "truncated log: engagement still open");
  if (rep.engagements_served > 0) {
    rep.avg_service_delay_s = delay_sum / rep.engagements_served;
    rep.avg_bs_utility = bs_utility_sum / rep.engagements_served;
  }
  if (rep.fleet_size > 0) rep.avg_energy_per_uav_j = energy_sum / rep.fleet_size;
  return rep;
}

namespace {

struct UavState {
  UavProfile profile;      // position/energy mutate over the run
  double available_at = 0.0;
};

struct SubPlan {
  Region region;
  CellField density;       // normalized over the region
  double demand_bits = 0.0;
  PlacementResult place;
  bool served = false;
};

// One congestion episode being worked by a BS.
struct EventPlan {
  int bs = -1;
  double detect_time = 0.0;
  double deadline = 0.0;
  ContractMenu menu;                // predictive, per-subarea gamma recomputed
  std::vector<SubPlan> subs;        // one entry for baselines
  // Baseline settlement figures.
  double actual_demand_bits = 0.0;
  double proxy_demand_bits = 0.0;
  bool viable = false;
};

struct QueuedEvent {
  double time;
  int rank;   // detection 0, learning 1, grant poll 2, round 3, end 4, recharge 5
  long seq;
  int a = -1;  // bs or uav
  int b = -1;  // event index / engagement id / subarea
  bool operator>(const QueuedEvent& o) const {
    if (time != o.time) return time > o.time;
    if (rank != o.rank) return rank > o.rank;
    if (a != o.a) return a > o.a;
    return seq > o.seq;
  }
};

constexpr int kDetection = 0, kLearningDone = 1, kGrantPoll = 2, kRound = 3,
              kServiceEnd = 4, kRechargeDone = 5;

class Engine {
 public:
  Engine(const Scenario& sc, Policy policy, double horizon,
         std::vector<LogEvent>* log_out)
      : sc_(sc), policy_(policy), horizon_(horizon) {
    log_ = log_out ? log_out : &local_log_;
    log_->clear();
  }

  MetricsReport run();

 private:
  const Scenario& sc_;
  Policy policy_;
  double horizon_;
  std::vector<LogEvent>* log_;
  std::vector<LogEvent> local_log_;

  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, std::greater<>> queue_;
  long seq_ = 0;
  std::vector<UavState> uavs_;
  std::vector<EventPlan> plans_;
  BroadcastChannel channel_;
  std::map<int, std::deque<int>> bs_backlog_;  // bs -> queued event indices
  int next_engagement_ = 0;
  std::map<int, std::pair<int, int>> engagement_target_;  // id -> (event, sub)
  std::map<int, std::map<std::string, double>> pending_end_;

  void push(double time, int rank, int a, int b) {
    queue_.push({time, rank, seq_++, a, b});
  }

  void log(double t, const std::string& kind, int bs, int uav, int sub, int eng,
           std::map<std::string, double> payload = {}) {
    log_->push_back({t, kind, bs, uav, sub, eng, std::move(payload)});
  }

  const BsSite& site(int bs_id) const {
    for (const auto& b : sc_.bss)
      if (b.id == bs_id) return b;
    throw Error(Error::Kind::internal, "unknown BS id");
  }

  std::vector<TransmissionRecord> window_records(int bs_id, double t0,
                                                 double t1) const {
    std::vector<TransmissionRecord> out;
    for (const auto& r : sc_.stream_for(bs_id).records)
      if (r.time_s > t0 && r.time_s <= t1)
        out.push_back({r.rate_bps, r.location, r.time_s - t0});
    return out;
  }

  void schedule_detections();
  void start_event(int bs_id, double detect_time);
  void on_learning_done(double t, int event_idx);
  void poll_channel(double t);
  void on_round(double t, int event_idx);
  void run_predictive_round(double t, EventPlan& plan, int event_idx, int sub_idx);
  void run_baseline_round(double t, EventPlan& plan, int event_idx);
  void finish_hold(double t, EventPlan& plan, int event_idx);
  void on_service_end(double t, int engagement_id, int uav_idx);
  void begin_engagement(double t, EventPlan& plan, int event_idx, int sub_idx,
                        int uav_idx, double travel_s, double power_w,
                        double payment, double theta);
  bool prepare_predictive(double t, EventPlan& plan);
  bool prepare_baseline(EventPlan& plan);
  double realized_capacity(const SpatialPoint& x, double power,
                           const Region& region, const CellField& density,
                           int engagement_id, double service_s) const;
};

void Engine::schedule_detections() {
  for (const auto& b : sc_.bss) {
    for (double t : detection_times(sc_.stream_for(b.id), b.capacity_bps,
                                    sc_.sim.overload_window_s, horizon_))
      push(t, kDetection, b.id, -1);
  }
}

bool Engine::prepare_predictive(double t, EventPlan& plan) {
  const auto& b = site(plan.bs);
  const double tau = sc_.learning.learn_window_s;
  const double T = sc_.learning.service_interval_s;
  auto recs = window_records(plan.bs, plan.detect_time, plan.detect_time + tau);
  if (recs.empty()) return false;
  MixtureModel density;
  Region hotspot;
  try {
    density = estimate_traffic_density(recs, sc_.sim.gmf_components, sc_.learning,
                                       sc_.sim.fit);
    hotspot = detect_hotspot(density, b.service_area);
  } catch (const Error&) {
    return false;  // no hotspot or degenerate window: do not deploy
  }
  const double demand = predict_demand(density, hotspot, T);
  if (demand <= 0.0) return false;

  SplitContext ctx{sc_.channel, sc_.sim.placement, sc_.econ.p_max_w};
  std::vector<std::pair<Region, double>> parts;
  try {
    parts = split_hotspot(density, hotspot, demand, sc_.learning, ctx);
  } catch (const Error&) {
    return false;  // unservable even when split: skip the episode
  }
  for (auto& [region, d] : parts) {
    SubPlan sub;
    sub.region = region;
    sub.density = mixture_field(density, region);
    double mass = 0.0;
    region.for_each_cell([&](int ix, int iy, Vec2) { mass += sub.density.at(ix, iy); });
    if (mass <= 0.0) continue;
    for (auto& v : sub.density.values) v /= mass * region.cell_area();
    sub.demand_bits = d;
    try {
      sub.place = optimal_service_point(sub.region, sub.density, d, T,
                                        sc_.learning.efficiency, sc_.channel,
                                        sc_.econ.p_max_w, sc_.sim.placement);
    } catch (const Error&) {
      continue;
    }
    plan.subs.push_back(std::move(sub));
  }
  return !plan.subs.empty();
}

bool Engine::prepare_baseline(EventPlan& plan) {
  const auto& b = site(plan.bs);
  const double T = sc_.learning.service_interval_s;
  // Full-knowledge view of the episode: the UAV observes the actual UEs on
  // site, and settlement measures the actual served-window traffic. The
  // congested area comes straight from the observed per-cell rate field,
  // not from a fitted model.
  const double win = sc_.learning.learn_window_s + T;
  auto recs = window_records(plan.bs, plan.detect_time, plan.detect_time + win);
  if (recs.empty()) return false;

  const Region& area = b.service_area;
  CellField observed{area, std::vector<double>(
                               static_cast<size_t>(area.nx()) * area.ny(), 0.0)};
  double field_rate = 0.0;
  for (const auto& r : recs) {
    int ix, iy;
    area.locate(r.location, ix, iy);
    if (!area.cell(ix, iy)) continue;
    const double rate = r.rate_bps * sc_.learning.slot_s / win;
    observed.at(ix, iy) += rate / area.cell_area();
    field_rate += rate;
  }
  if (field_rate <= 0.0) return false;
  const double area_avg = field_rate / area.area();
  int px = -1, py = -1;
  double peak = 0.0;
  Region super = area.like();
  area.for_each_cell([&](int ix, int iy, Vec2) {
    const double v = observed.at(ix, iy);
    if (v > area_avg) super.set_cell(ix, iy);
    if (v > peak) {
      peak = v;
      px = ix;
      py = iy;
    }
  });
  if (px < 0 || !super.cell(px, py)) return false;
  const Region hotspot = super.connected_component(px, py);

  SubPlan sub;
  sub.region = hotspot;
  sub.density = observed;
  sub.density.region = hotspot;
  double mass = 0.0;
  hotspot.for_each_cell([&](int ix, int iy, Vec2) { mass += sub.density.at(ix, iy); });
  if (mass <= 0.0) return false;
  for (auto& v : sub.density.values) v /= mass * hotspot.cell_area();

  // Whole-area and hotspot UE tallies from distinct record locations.
  std::set<std::pair<long, long>> all_locs, hot_locs;
  double total_rate = 0.0, hot_rate = 0.0;
  const double h = sc_.learning.grid_cell_m;
  for (const auto& r : recs) {
    const auto key = std::make_pair(static_cast<long>(std::floor(r.location.x / h)),
                                    static_cast<long>(std::floor(r.location.y / h)));
    all_locs.insert(key);
    total_rate += r.rate_bps * sc_.learning.slot_s / win;
    if (hotspot.contains(r.location)) {
      hot_locs.insert(key);
      hot_rate += r.rate_bps * sc_.learning.slot_s / win;
    }
  }
  if (all_locs.empty() || hot_locs.empty()) return false;
  const double rho_i = total_rate / static_cast<double>(all_locs.size());
  plan.proxy_demand_bits = rho_i * static_cast<double>(hot_locs.size()) * T;
  plan.actual_demand_bits = hot_rate * T;
  sub.demand_bits = plan.proxy_demand_bits;

  // Placement happens after arrival; target the proxy per-UE rate.
  try {
    sub.place = optimal_service_point(sub.region, sub.density,
                                      plan.proxy_demand_bits, T,
                                      sc_.learning.efficiency, sc_.channel,
                                      sc_.econ.p_max_w, sc_.sim.placement);
  } catch (const Error&) {
    // Even max power cannot reach the proxy demand: serve flat out.
    sub.place.service_point = {b.position.x, b.position.y,
                               sc_.sim.placement.altitude_min_m};
    CellField d2 = sub.density;
    Vec2 centroid{0, 0};
    double m2 = 0.0;
    hotspot.for_each_cell([&](int ix, int iy, Vec2 c) {
      centroid = centroid + c * d2.at(ix, iy);
      m2 += d2.at(ix, iy);
    });
    centroid = centroid * (1.0 / m2);
    sub.place.service_point = {centroid.x, centroid.y, sc_.sim.placement.altitude_min_m};
    sub.place.min_power_w = sc_.econ.p_max_w;
  }
  plan.subs.push_back(std::move(sub));
  return true;
}

void Engine::start_event(int bs_id, double detect_time) {
  log(detect_time, "detection", bs_id, -1, -1, -1);
  EventPlan plan;
  plan.bs = bs_id;
  plan.detect_time = detect_time;
  const double lag = policy_ == Policy::predictive ? sc_.learning.learn_window_s : 0.0;
  plan.deadline = detect_time + lag + sc_.learning.service_interval_s;
  plans_.push_back(std::move(plan));
  const int idx = static_cast<int>(plans_.size()) - 1;
  if (policy_ == Policy::predictive) {
    push(detect_time + sc_.learning.learn_window_s, kLearningDone, bs_id, idx);
  } else {
    if (prepare_baseline(plans_[idx])) {
      plans_[idx].viable = true;
      channel_.acquire(bs_id, detect_time);
      bs_backlog_[bs_id].push_back(idx);
      push(detect_time, kGrantPoll, bs_id, -1);
    } else {
      log(detect_time, "no_hotspot", bs_id, -1, -1, -1);
    }
  }
}

void Engine::on_learning_done(double t, int event_idx) {
  EventPlan& plan = plans_[event_idx];
  log(t, "learning_done", plan.bs, -1, -1, -1);
  if (prepare_predictive(t, plan)) {
    plan.viable = true;
    channel_.acquire(plan.bs, t);
    bs_backlog_[plan.bs].push_back(event_idx);
    push(t, kGrantPoll, plan.bs, -1);
  } else {
    log(t, "no_hotspot", plan.bs, -1, -1, -1);
  }
}

void Engine::poll_channel(double t) {
  auto grant = channel_.try_grant(t);
  if (!grant) return;
  const auto [bs_id, grant_time] = *grant;
  auto& backlog = bs_backlog_[bs_id];
  if (backlog.empty()) {
    channel_.release(bs_id, grant_time);
    return;
  }
  const int event_idx = backlog.front();
  backlog.pop_front();
  push(std::max(grant_time, t), kRound, bs_id, event_idx);
}

void Engine::on_round(double t, int event_idx) {
  EventPlan& plan = plans_[event_idx];
  if (policy_ == Policy::predictive)
    run_predictive_round(t, plan, event_idx, -1);
  else
    run_baseline_round(t, plan, event_idx);
}

void Engine::run_predictive_round(double t, EventPlan& plan, int event_idx, int) {
  const double T = sc_.learning.service_interval_s;
  const double kappa = sc_.learning.travel_fraction;
  double now = t;
  for (size_t n = 0; n < plan.subs.size(); ++n) {
    SubPlan& sub = plan.subs[n];
    if (sub.served) continue;
    ContractMenu menu = build_menu(sub.demand_bits, T, sc_.econ, kappa);
    log(now, "broadcast", plan.bs, -1, static_cast<int>(n), -1,
        {{"demand_bits", sub.demand_bits},
         {"gamma", menu.gamma},
         {"kappa", kappa},
         {"x", sub.place.service_point.x},
         {"y", sub.place.service_point.y},
         {"z", sub.place.service_point.z}});
    std::vector<UavResponse> replies;
    for (size_t j = 0; j < uavs_.size(); ++j) {
      UavState& u = uavs_[j];
      if (u.available_at > now) continue;
      const double travel = travel_time(u.profile, sub.place.service_point);
      if (travel >= T || travel > kappa * T) continue;
      const TypeValue type = uav_type(sub.demand_bits, T, travel, sc_.econ);
      const double p_avail = max_available_power(u.profile, travel, T, sc_.econ);
      if (menu.power(type.theta) > p_avail) continue;  // UAV-side self filter
      replies.push_back({u.profile.id, type, p_avail});
      log(now, "reply", plan.bs, u.profile.id, static_cast<int>(n), -1,
          {{"theta", type.theta}, {"travel_s", travel}, {"p_avail_w", p_avail}});
    }
    auto chosen = select_optimal_uav(replies, menu, sub.place.min_power_w, sc_.econ,
                                     kappa, T);
    if (chosen) {
      int uav_idx = -1;
      for (size_t j = 0; j < uavs_.size(); ++j)
        if (uavs_[j].profile.id == *chosen) uav_idx = static_cast<int>(j);
      const UavState& u = uavs_[uav_idx];
      const double travel = travel_time(u.profile, sub.place.service_point);
      const TypeValue type = uav_type(sub.demand_bits, T, travel, sc_.econ);
      plan.menu = menu;
      begin_engagement(now, plan, event_idx, static_cast<int>(n), uav_idx, travel,
                       menu.power(type.theta),
                       menu.unit_payment(type.theta) * sub.demand_bits, type.theta);
      sub.served = true;
    } else {
      log(now, "no_feasible", plan.bs, -1, static_cast<int>(n), -1);
    }
    now += sc_.sim.round_hold_s;
  }
  finish_hold(now, plan, event_idx);
}

void Engine::run_baseline_round(double t, EventPlan& plan, int event_idx) {
  const double T = sc_.learning.service_interval_s;
  SubPlan& sub = plan.subs[0];
  const auto& b = site(plan.bs);
  log(t, "broadcast", plan.bs, -1, 0, -1,
      {{"demand_bits", plan.proxy_demand_bits}});
  int best = -1;
  double best_key = 0.0;
  for (size_t j = 0; j < uavs_.size(); ++j) {
    UavState& u = uavs_[j];
    if (u.available_at > t) continue;
    const double to_area = distance(u.profile.position, b.position);
    const double reposition = distance(b.position, sub.place.service_point);
    const double travel = (to_area + reposition) / u.profile.speed_m_s;
    if (travel >= T) continue;
    const double key =
        policy_ == Policy::closest ? -to_area : u.profile.energy_j;
    if (best < 0 || key > best_key ||
        (key == best_key && u.profile.id < uavs_[best].profile.id)) {
      best = static_cast<int>(j);
      best_key = key;
    }
  }
  if (best < 0) {
    log(t, "no_feasible", plan.bs, -1, 0, -1);
  } else {
    const UavState& u = uavs_[best];
    const double travel = (distance(u.profile.position, b.position) +
                           distance(b.position, sub.place.service_point)) /
                          u.profile.speed_m_s;
    const double p_avail = max_available_power(u.profile, travel, T, sc_.econ);
    const double power =
        std::min({sub.place.min_power_w, p_avail, sc_.econ.p_max_w});
    begin_engagement(t, plan, event_idx, 0, best, travel, power,
                     sc_.econ.ue_payment_per_bit * plan.actual_demand_bits, 0.0);
    sub.served = true;
  }
  finish_hold(t + sc_.sim.round_hold_s, plan, event_idx);
}

void Engine::finish_hold(double t, EventPlan& plan, int event_idx) {
  channel_.release(plan.bs, t);
  bool unserved = false;
  for (const auto& s : plan.subs) unserved |= !s.served;
  if (unserved && t + sc_.sim.backoff_s <= plan.deadline) {
    channel_.acquire(plan.bs, t + sc_.sim.backoff_s);
    bs_backlog_[plan.bs].push_back(event_idx);
    push(t + sc_.sim.backoff_s, kGrantPoll, plan.bs, -1);
  }
  push(t, kGrantPoll, -1, -1);
}

double Engine::realized_capacity(const SpatialPoint& x, double power,
                                 const Region& region, const CellField& density,
                                 int engagement_id, double service_s) const {
  if (!sc_.sim.stochastic_excess_loss)
    return hotspot_capacity(x, power, region, density, sc_.channel);
  // Slot-sampled excess loss, one draw per link class per slot, shared
  // across cells; averaged over the service stage.
  const auto& ch = sc_.channel;
  std::mt19937_64 rng(sc_.seed ^ (0x9e3779b97f4a7c15ULL * (engagement_id + 1)));
  std::normal_distribution<double> los(ch.excess_loss_los_mu_db,
                                       ch.excess_loss_los_sigma_db);
  std::normal_distribution<double> nlos(ch.excess_loss_nlos_mu_db,
                                        ch.excess_loss_nlos_sigma_db);
  const int slots = std::max(1, static_cast<int>(service_s / sc_.learning.slot_s));
  struct Cell {
    double fspl_db, p_los, w;
  };
  std::vector<Cell> cells;
  region.for_each_cell([&](int ix, int iy, Vec2 c) {
    const SpatialPoint ue{c.x, c.y, 0.0};
    const double d = distance(x, ue);
    cells.push_back({20.0 * std::log10(4.0 * M_PI * ch.carrier_hz * d /
                                       ch.light_speed_m_s),
                     los_probability(x, ue, ch), density.at(ix, iy)});
  });
  const double noise = ch.noise_power_w();
  double acc = 0.0;
  for (int s = 0; s < slots; ++s) {
    const double xi_los = los(rng), xi_nlos = nlos(rng);
    double slot_cap = 0.0;
    for (const auto& c : cells) {
      const double h_los = std::pow(10.0, (c.fspl_db + xi_los) / 10.0);
      const double h_nlos = std::pow(10.0, (c.fspl_db + xi_nlos) / 10.0);
      const double r_los =
          ch.bandwidth_hz *
          std::log2(1.0 + ch.antenna_gain_linear * power / (h_los * noise));
      const double r_nlos =
          ch.bandwidth_hz *
          std::log2(1.0 + ch.antenna_gain_linear * power / (h_nlos * noise));
      slot_cap += (c.p_los * r_los + (1.0 - c.p_los) * r_nlos) * c.w;
    }
    acc += slot_cap * region.cell_area();
  }
  return acc / slots;
}

void Engine::begin_engagement(double t, EventPlan& plan, int event_idx,
                              int sub_idx, int uav_idx, double travel_s,
                              double power_w, double payment, double theta) {
  const double T = sc_.learning.service_interval_s;
  const double eta = sc_.learning.efficiency;
  UavState& u = uavs_[uav_idx];
  SubPlan& sub = plan.subs[sub_idx];
  const int eng = next_engagement_++;
  engagement_target_[eng] = {event_idx, sub_idx};

  const double service = T - travel_s;
  const double capacity = realized_capacity(sub.place.service_point, power_w,
                                            sub.region, sub.density, eng, service);
  const double energy = sc_.econ.move_power_w * travel_s +
                        (sc_.econ.hover_power_w + power_w) * service;
  const double delay = t + travel_s - plan.detect_time;

  double bs_u, uav_u;
  std::map<std::string, double> extra;
  if (policy_ == Policy::predictive) {
    const TypeValue type = uav_type(sub.demand_bits, T, travel_s, sc_.econ);
    bs_u = bs_utility(plan.menu, theta, type, capacity, sc_.econ, eta, T);
    uav_u = uav_utility(plan.menu, theta, type, sc_.econ);
    // Every executed contract is checked pointwise against the feasibility
    // conditions at the accepted type.
    const double ir_margin = theta * plan.menu.unit_payment(theta) -
                             plan.menu.power(theta) - type.m_offset_w;
    extra["ir_margin"] = ir_margin;
    extra["theta"] = theta;
    extra["gamma"] = plan.menu.gamma;
  } else {
    bs_u = sc_.econ.ue_payment_per_bit * eta * service * capacity - payment;
    uav_u = payment - sc_.econ.energy_cost_per_j * energy;
    extra["actual_demand_bits"] = plan.actual_demand_bits;
    extra["proxy_demand_bits"] = plan.proxy_demand_bits;
  }

  log(t, "select", plan.bs, u.profile.id, sub_idx, eng,
      {{"travel_s", travel_s}, {"power_w", power_w}, {"payment", payment}});
  log(t + travel_s, "arrive", plan.bs, u.profile.id, sub_idx, eng);

  u.available_at = t + T;
  u.profile.busy_until_s = t + T;
  // Position updates on arrival; while engaged the UAV is unavailable.
  u.profile.position = sub.place.service_point;

  std::map<std::string, double> payload{
      {"travel_s", travel_s},   {"service_s", service},
      {"power_w", power_w},     {"capacity_bps", capacity},
      {"energy_j", energy},     {"delay_s", delay},
      {"bs_utility", bs_u},     {"uav_utility", uav_u},
      {"payment", payment},     {"demand_bits", sub.demand_bits},
      {"detect_time_s", plan.detect_time}};
  payload.insert(extra.begin(), extra.end());
  // Stash for the end event.
  pending_end_[eng] = payload;
  push(t + T, kServiceEnd, uav_idx, eng);
}

void Engine::on_service_end(double t, int engagement_id, int uav_idx) {
  UavState& u = uavs_[uav_idx];
  auto payload = pending_end_.at(engagement_id);
  pending_end_.erase(engagement_id);
  const auto [event_idx, sub_idx] = engagement_target_.at(engagement_id);
  const EventPlan& plan = plans_[event_idx];
  u.profile.energy_j = std::max(0.0, u.profile.energy_j - payload.at("energy_j"));
  payload["energy_left_j"] = u.profile.energy_j;
  log(t, "service_end", plan.bs, u.profile.id, sub_idx, engagement_id, payload);

  // Re-listen gate: enough on-board energy for one more full engagement.
  const double T = sc_.learning.service_interval_s;
  const double kappa = sc_.learning.travel_fraction;
  const double need = sc_.econ.move_power_w * kappa * T +
                      (sc_.econ.hover_power_w + sc_.sim.relisten_power_floor_w) *
                          (1.0 - kappa) * T;
  if (u.profile.energy_j < need && !sc_.stations.empty()) {
    double best = std::numeric_limits<double>::infinity();
    SpatialPoint station = sc_.stations.front().position;
    for (const auto& s : sc_.stations) {
      const double d = distance(u.profile.position, s.position);
      if (d < best) {
        best = d;
        station = s.position;
      }
    }
    u.profile.position = station;
    u.available_at = t + sc_.sim.recharge_s;
    log(t, "recharge_start", -1, u.profile.id, -1, -1,
        {{"energy_j", u.profile.energy_j}});
    push(t + sc_.sim.recharge_s, kRechargeDone, uav_idx, -1);
  } else {
    u.available_at = t;
  }
  push(t, kGrantPoll, -1, -1);
}

MetricsReport Engine::run() {
  sc_.validate();
  uavs_.clear();
  for (const auto& u : sc_.fleet) uavs_.push_back({u, 0.0});
  log(0.0, "sim_start", -1, -1, -1, -1,
      {{"fleet_size", static_cast<double>(uavs_.size())},
       {"horizon_s", horizon_},
       {"seed", static_cast<double>(sc_.seed)}});
  schedule_detections();

  while (!queue_.empty()) {
    const QueuedEvent ev = queue_.top();
    queue_.pop();
    if (ev.time > horizon_) {
      // Past the horizon only engagements already under way are closed out,
      // so the log stays complete.
      if (ev.rank == kServiceEnd) on_service_end(ev.time, ev.b, ev.a);
      continue;
    }
    switch (ev.rank) {
      case kDetection: start_event(ev.a, ev.time); break;
      case kLearningDone: on_learning_done(ev.time, ev.b); break;
      case kGrantPoll: poll_channel(ev.time); break;
      case kRound: on_round(ev.time, ev.b); break;
      case kServiceEnd: on_service_end(ev.time, ev.b, ev.a); break;
      case kRechargeDone: {
        UavState& u = uavs_[ev.a];
        u.profile.energy_j = sc_.sim.full_energy_j;
        log(ev.time, "recharge_done", -1, u.profile.id, -1, -1,
            {{"energy_j", u.profile.energy_j}});
        push(ev.time, kGrantPoll, -1, -1);
        break;
      }
      default: throw Error(Error::Kind::internal, "unknown event");
    }
  }
  return collect_metrics(*log_);
}

}  // namespace

MetricsReport run_simulation(const Scenario& scenario, Policy policy,
                             double horizon_s, std::vector<LogEvent>* log_out) {
  Engine engine(scenario, policy, horizon_s, log_out);
  MetricsReport rep = engine.run();
  rep.policy = to_string(policy);
  return rep;
}

}  // namespace uavsim
