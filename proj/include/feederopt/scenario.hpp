#pragma once

#include "feederopt/text_data.hpp"

#include <string>
#include <vector>

namespace feederopt {

// EV fleet aggregate at one bus. Power quantities in p.u., energy in p.u.*h
// on the scenario's MVA base. travel[t] is the materialized per-step traveling
// consumption (fleet scale already applied).
struct EvFleet {
    int bus = 0;
    double e_min = 0.0;
    double e_max = 0.0;
    double p_charge_max = 0.0;
    double eff_charge = 1.0;
    double eff_discharge = 1.0;
    double e_init_fraction = 0.5;
    std::vector<double> travel;
};

struct SolarUnit {
    int bus = 0;
    double capacity = 0.0;  // p.u. nameplate, scales the availability series
};

// One load point with its materialized per-step demand in p.u.
struct LoadDemand {
    int bus = 0;
    double p_nominal = 0.0;  // p.u. at multiplier 1
    double q_nominal = 0.0;
    std::vector<double> p;
    std::vector<double> q;
};

struct Scenario {
    int horizon = 24;
    double base_mva = 10.0;
    std::vector<double> tou_price;           // $/MWh per step
    std::vector<LoadDemand> demand;
    std::vector<double> solar_availability;  // shared shape, >= 0
    std::vector<SolarUnit> solar;
    std::vector<double> r_charge;            // in [0,1]
    std::vector<double> r_discharge;         // in [0,1]
    std::vector<double> travel_profile;      // dimensionless shape
    std::vector<EvFleet> fleets;

    // Upper bound on unit u's output at step t, p.u.
    double solar_bound(int unit, int t) const {
        return solar[unit].capacity * solar_availability[t];
    }

    void validate() const;  // throws InputError naming the offending field
};

Scenario load_scenario(const TextDocument& doc);
Scenario load_scenario_file(const std::string& path);

// Linear scaling of every fleet extensive quantity (charge cap, energy
// bounds, travel series). level is a fraction; 1 = the reference fleet.
std::vector<EvFleet> scale_penetration(const std::vector<EvFleet>& fleets, double level);

// The four bundled time-of-use layouts as 24-hour price series with a common
// daily mean of 50 $/MWh. Index 0 is flat; 1..3 are three-tier layouts.
std::vector<std::vector<double>> tou_scenarios();

// Price series for layout k (1..4) at the given daily mean.
std::vector<double> tou_price_series(int k, double mean_price);

// Replace the scenario's price series with layout k (1..4), preserving the
// scenario's own daily mean price. Requires a 24-step horizon.
Scenario with_tou(Scenario sc, int k);

}  // namespace feederopt
