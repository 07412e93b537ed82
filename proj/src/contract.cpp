#include "contract.hpp"

#include <algorithm>
#include <cmath>

namespace uavsim {

double travel_time(const UavProfile& uav, const SpatialPoint& service_point) {
  if (uav.speed_m_s <= 0.0) throw invalid("UAV speed must be positive");
  return distance(uav.position, service_point) / uav.speed_m_s;
}

TypeValue uav_type(double demand_bits, double T_s, double travel_time_s,
                   const EconomicParams& econ) {
  if (travel_time_s >= T_s)
    throw invalid("service window exhausted: travel time >= T");
  if (travel_time_s < 0.0) throw invalid("negative travel time");
  TypeValue tv;
  tv.travel_time_s = travel_time_s;
  tv.theta = demand_bits / (econ.energy_cost_per_j * (T_s - travel_time_s));
  tv.m_offset_w =
      econ.move_power_w * travel_time_s / (T_s - travel_time_s) + econ.hover_power_w;
  return tv;
}

double max_available_power(const UavProfile& uav, double travel_time_s,
                           double T_s, const EconomicParams& econ) {
  if (travel_time_s >= T_s) return 0.0;
  const double service = T_s - travel_time_s;
  const double p = (uav.energy_j - econ.move_power_w * travel_time_s -
                    econ.hover_power_w * service) /
                   service;
  return std::max(p, 0.0);
}

ContractMenu build_menu(double demand_bits, double T_s,
                        const EconomicParams& econ, double kappa) {
  if (demand_bits <= 0.0) throw invalid("demand must be positive");
  if (!(kappa > 0.0 && kappa < 1.0)) throw invalid("kappa must be in (0,1)");
  const double alpha = econ.energy_cost_per_j;
  ContractMenu menu;
  menu.demand_bits = demand_bits;
  menu.T_s = T_s;
  menu.gamma = 2.0 * alpha * alpha * T_s * T_s * econ.hover_power_w /
               (demand_bits * demand_bits);
  menu.theta_min = demand_bits / (alpha * T_s);
  menu.theta_max = demand_bits / (alpha * (1.0 - kappa) * T_s);
  return menu;
}

double uav_utility(const ContractMenu& menu, double accepted_theta,
                   const TypeValue& true_type, const EconomicParams& econ) {
  if (!menu.in_interval(accepted_theta))
    throw invalid("accepted type outside the menu interval");
  const double alpha = econ.energy_cost_per_j;
  const double t = true_type.travel_time_s;
  const double service = menu.T_s - t;
  const double payment = menu.unit_payment(accepted_theta) * menu.demand_bits;
  const double energy = (menu.power(accepted_theta) + econ.hover_power_w) * service +
                        econ.move_power_w * t;
  return payment - alpha * energy;
}

double bs_utility(const ContractMenu& menu, double theta,
                  const TypeValue& true_type, double capacity_bps,
                  const EconomicParams& econ, double eta, double T_s) {
  if (!menu.in_interval(theta)) throw invalid("type outside the menu interval");
  const double service = T_s - true_type.travel_time_s;
  return econ.ue_payment_per_bit * eta * service * capacity_bps -
         menu.unit_payment(theta) * menu.demand_bits;
}

IrReport verify_ir(const ContractMenu& menu, const EconomicParams& econ,
                   int grid_size, std::optional<double> fixed_m) {
  if (grid_size < 1) throw invalid("grid_size must be >= 1");
  const double alpha = econ.energy_cost_per_j;
  IrReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_size; ++i) {
    const double frac = grid_size == 1 ? 0.0 : static_cast<double>(i) / (grid_size - 1);
    const double theta = menu.theta_min + frac * (menu.theta_max - menu.theta_min);
    double m_offset;
    if (fixed_m) {
      m_offset = *fixed_m;
    } else {
      const double t = menu.T_s - menu.demand_bits / (alpha * theta);
      m_offset = econ.move_power_w * t / (menu.T_s - t) + econ.hover_power_w;
    }
    const double margin =
        theta * menu.unit_payment(theta) - menu.power(theta) - m_offset;
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.worst_theta = theta;
    }
  }
  rep.pass = rep.min_margin >= -1e-9;
  return rep;
}

IcReport verify_ic(const ContractMenu& menu, int grid_size) {
  if (grid_size < 2) throw invalid("grid_size must be >= 2");
  IcReport rep;
  const double span = menu.theta_max - menu.theta_min;
  const double step = span / (grid_size - 1);
  auto theta_at = [&](int i) { return menu.theta_min + i * step; };

  // Truthfulness: argmax over the grid of theta u(theta') - p(theta').
  rep.argmax_truthful = true;
  rep.max_argmax_offset = 0.0;
  for (int i = 0; i < grid_size; ++i) {
    const double theta = theta_at(i);
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid_size; ++j) {
      const double cand = theta_at(j);
      const double value = theta * menu.unit_payment(cand) - menu.power(cand);
      if (value > best_value) {
        best_value = value;
        best = j;
      }
    }
    const double offset = std::abs(best - i);
    rep.max_argmax_offset = std::max(rep.max_argmax_offset, offset);
    if (offset > 1.0) rep.argmax_truthful = false;
  }

  // Condition (a): u and p nondecreasing across the grid.
  rep.monotone = true;
  for (int i = 0; i + 1 < grid_size; ++i) {
    if (menu.unit_payment(theta_at(i + 1)) - menu.unit_payment(theta_at(i)) < -1e-12 ||
        menu.power(theta_at(i + 1)) - menu.power(theta_at(i)) < -1e-12)
      rep.monotone = false;
  }

  // Condition (c): dp/dtheta = theta du/dtheta, central differences.
  rep.marginal_identity = true;
  rep.worst_identity_error = 0.0;
  for (int i = 1; i + 1 < grid_size; ++i) {
    const double theta = theta_at(i);
    const double dp =
        (menu.power(theta_at(i + 1)) - menu.power(theta_at(i - 1))) / (2.0 * step);
    const double du = (menu.unit_payment(theta_at(i + 1)) -
                       menu.unit_payment(theta_at(i - 1))) /
                      (2.0 * step);
    const double lhs = dp;
    const double rhs = theta * du;
    const double err = std::abs(lhs - rhs) / std::max(1e-300, std::abs(rhs));
    rep.worst_identity_error = std::max(rep.worst_identity_error, err);
    if (err > 1e-6) rep.marginal_identity = false;
  }

  rep.pass = rep.argmax_truthful && rep.monotone && rep.marginal_identity;
  return rep;
}

std::optional<int> select_optimal_uav(const std::vector<UavResponse>& responses,
                                      const ContractMenu& menu,
                                      double min_required_power_w,
                                      const EconomicParams& econ, double kappa,
                                      double T_s) {
  std::optional<int> best;
  double best_theta = std::numeric_limits<double>::infinity();
  for (const auto& r : responses) {
    if (r.type.travel_time_s > kappa * T_s) continue;
    const double p = menu.power(r.type.theta);
    if (p < min_required_power_w) continue;
    if (p > std::min(r.max_power_w, econ.p_max_w)) continue;
    if (r.type.theta < best_theta ||
        (r.type.theta == best_theta && best && r.uav_id < *best)) {
      best_theta = r.type.theta;
      best = r.uav_id;
    }
  }
  return best;
}

}  // namespace uavsim
