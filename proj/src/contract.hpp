#pragma once

#include <optional>
#include <vector>

#include "geometry.hpp"

namespace uavsim {

struct EconomicParams {
  double energy_cost_per_j = 1.2;      // alpha, 1/J
  double ue_payment_per_bit = 1e-7;    // beta, 1/bit
  double hover_power_w = 16.0;         // p_h
  double move_power_w = 20.0;          // m
  double p_max_w = 20.0;

  void validate() const {
    if (energy_cost_per_j <= 0.0 || ue_payment_per_bit <= 0.0 ||
        hover_power_w <= 0.0 || move_power_w <= 0.0 || p_max_w <= 0.0)
      throw invalid("economic parameters must be strictly positive");
  }
};

struct UavProfile {
  int id = 0;
  SpatialPoint position;
  double speed_m_s = 5.0;
  double energy_j = 90000.0;
  double busy_until_s = 0.0;

  void validate() const {
    if (speed_m_s <= 0.0) throw invalid("UAV speed must be positive");
    if (energy_j < 0.0) throw invalid("UAV energy must be nonnegative");
  }
};

/// A UAV's private valuation of one engagement: its type, the travel time
/// behind it, and the per-engagement fixed power-equivalent cost offset.
struct TypeValue {
  double theta = 0.0;          // d / (alpha (T - t))
  double travel_time_s = 0.0;
  double m_offset_w = 0.0;     // m t / (T - t) + p_h
};

/// The menu of Lemma form u(theta) = gamma theta, p(theta) = gamma theta^2/2
/// over the admissible type interval.
struct ContractMenu {
  double gamma = 0.0;
  double demand_bits = 0.0;
  double T_s = 0.0;
  double theta_min = 0.0;
  double theta_max = 0.0;

  double unit_payment(double theta) const { return gamma * theta; }
  double power(double theta) const { return 0.5 * gamma * theta * theta; }
  bool in_interval(double theta) const {
    return theta >= theta_min * (1.0 - 1e-12) && theta <= theta_max * (1.0 + 1e-12);
  }
};

/// Straight-line travel time to the service point.
double travel_time(const UavProfile& uav, const SpatialPoint& service_point);

/// Type and cost offset for a travel time within the service window.
TypeValue uav_type(double demand_bits, double T_s, double travel_time_s,
                   const EconomicParams& econ);

/// Largest transmit power the on-board energy supports over the service
/// stage, floored at zero.
double max_available_power(const UavProfile& uav, double travel_time_s,
                           double T_s, const EconomicParams& econ);

/// Menu with gamma = 2 alpha^2 T^2 p_h / d^2; at theta_min the menu power is
/// exactly the hover power and the boundary type's utility is zero.
ContractMenu build_menu(double demand_bits, double T_s,
                        const EconomicParams& econ, double kappa);

/// UAV-side utility of accepting the item for accepted_theta while being of
/// true_type, in currency units.
double uav_utility(const ContractMenu& menu, double accepted_theta,
                   const TypeValue& true_type, const EconomicParams& econ);

/// BS-side utility of an engagement at the given realized capacity.
double bs_utility(const ContractMenu& menu, double theta,
                  const TypeValue& true_type, double capacity_bps,
                  const EconomicParams& econ, double eta, double T_s);

struct IrReport {
  bool pass = false;
  double min_margin = 0.0;
  double worst_theta = 0.0;
};

struct IcReport {
  bool pass = false;
  bool argmax_truthful = false;     // best response equals the true type
  bool monotone = false;            // condition (a)
  bool marginal_identity = false;   // condition (c)
  double max_argmax_offset = 0.0;   // in grid steps
  double worst_identity_error = 0.0;
};

/// Individual rationality over a uniform type grid. The cost offset is
/// recovered from theta through t(theta) = T - d/(alpha theta) by default;
/// fixed_m pins it instead (the constant-offset check of the feasibility
/// theorem's sufficiency proof).
IrReport verify_ir(const ContractMenu& menu, const EconomicParams& econ,
                   int grid_size, std::optional<double> fixed_m = std::nullopt);

/// Incentive compatibility: the best response over the menu equals the true
/// type at every grid point; also checks menu monotonicity and the marginal
/// identity dp/dtheta = theta du/dtheta by central differences.
IcReport verify_ic(const ContractMenu& menu, int grid_size);

/// One UAV's reply in an association round.
struct UavResponse {
  int uav_id = 0;
  TypeValue type;
  double max_power_w = 0.0;
};

/// Smallest-type selection over the feasible set
/// { p_min <= p(theta) <= min(max_power, p_max), t <= kappa T };
/// ties break toward the lowest id. Empty set yields nothing.
std::optional<int> select_optimal_uav(const std::vector<UavResponse>& responses,
                                      const ContractMenu& menu,
                                      double min_required_power_w,
                                      const EconomicParams& econ, double kappa,
                                      double T_s);

}  // namespace uavsim
