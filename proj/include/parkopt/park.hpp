#pragma once

// Physical model of an industrial-park energy hub: storage devices, CHP and
// boiler conversion, the park-level trade limits, and the per-slot dispatch
// record with its balance accounting.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "parkopt/errors.hpp"

namespace parkopt {

enum class Energy : int { Electric = 0, Heat = 1 };
inline constexpr int kEnergyCount = 2;

inline const char* energy_name(Energy e) {
    return e == Energy::Electric ? "E" : "H";
}

// Static parameters of one hub. Energies in MWh per slot, efficiencies
// dimensionless in (0,1].
struct HubParams {
    double b_min = 0.0, b_max = 0.0; // battery energy window
    double w_min = 0.0, w_max = 0.0; // tank energy window
    double c_e_max = 0.0, d_e_max = 0.0; // battery charge/discharge caps
    double c_h_max = 0.0, d_h_max = 0.0; // tank charge/discharge caps
    double eta_ce = 1.0, eta_de = 1.0;   // battery charge/discharge efficiency
    double eta_ch = 1.0, eta_dh = 1.0;   // tank charge/discharge efficiency
    double eta_pg = 0.0, eta_hg = 0.0;   // CHP gas->power, gas->heat
    double eta_bg = 0.0;                 // boiler gas->heat
    double e_chp_max = 0.0, h_chp_max = 0.0; // CHP output caps
    double h_b_max = 0.0;                    // boiler output cap
    double b_init = 0.0, w_init = 0.0;       // horizon-start fill levels

    // Largest gas feed the CHP can burn without exceeding either output cap.
    double chp_gas_cap() const;
    double boiler_gas_cap() const;
    void validate(const std::string& label) const;
};

// One quadratic-utility elastic load: U(x) = a x^2 + b x with a < 0.
struct ElasticLoad {
    double a = -1.0;
    double b = 0.0;
    double x_max = 0.0;
};

// One shiftable-load user. `a`,`b` are the utility coefficients; hub_weight
// splits its electric demand across hubs and must sum to one.
struct UserParams {
    double a = -1.0;
    double b = 0.0;
    std::vector<double> hub_weight;
    double gamma = 0.0;  // shift responsiveness
    double alpha = 1.0;  // shift delay decay
};

// Per-hub slice of the park trade limits. Slices sum to the park totals.
struct TradeShares {
    double e_buy = 0.0;
    double e_sell = 0.0;
    double gas = 0.0;
};

struct ParkConfig {
    std::vector<HubParams> hubs;
    std::vector<UserParams> users;
    // elastic[k][q][energy index]
    std::vector<std::vector<std::array<ElasticLoad, kEnergyCount>>> elastic;
    std::vector<TradeShares> shares;
    // Busbar supply caps per hub and energy.
    std::vector<std::array<double, kEnergyCount>> x_max;
    // Park heat demand split across hubs; must sum to one.
    std::vector<double> heat_share;
    double e_max = 0.0, g_max = 0.0, e_o_max = 0.0;
    // Contract envelope for market prices. Scenario prices must stay inside;
    // the step-size rule and all interval checks key off these.
    double p_e_cap = 0.0;   // upper support of the purchase price
    double p_o_floor = 0.0; // lower support of the sale price
    double shift_cap = 0.15; // largest shiftable fraction per user per slot
    int shift_window = 4;    // forward shift horizon in slots

    std::size_t hub_count() const { return hubs.size(); }
    std::size_t user_count() const { return users.size(); }
    std::size_t elastic_count(std::size_t k) const { return elastic[k].size(); }
    void validate() const;
};

// Fill levels for every hub's battery and tank.
struct StorageState {
    std::vector<double> b;
    std::vector<double> w;
};

inline StorageState initial_storage(const ParkConfig& cfg) {
    StorageState s;
    for (const auto& h : cfg.hubs) {
        s.b.push_back(h.b_init);
        s.w.push_back(h.w_init);
    }
    return s;
}

// Exogenous data for one slot.
struct SlotData {
    double p_e = 0.0, p_g = 0.0, p_o = 0.0;
    std::vector<double> r;    // renewable infeed per hub
    std::vector<double> x_il; // inflexible electric demand per user
    double h_load = 0.0;
    double g_load = 0.0;
};

// Whole-horizon exogenous series, column-wise.
struct ScenarioSeries {
    std::vector<double> p_e, p_g, p_o;
    std::vector<std::vector<double>> r;    // [t][k]
    std::vector<std::vector<double>> x_il; // [t][i]
    std::vector<double> h_load, g_load;

    std::size_t size() const { return p_e.size(); }
    SlotData slot(std::size_t t) const;
    // Throws SchemaError/NegativeValue naming the first offending slot.
    void validate() const;
    double max_p_e() const;
    double min_p_o() const;
};

// Per-hub dispatch decision for one slot.
struct HubDispatch {
    double c_e = 0.0, d_e = 0.0; // battery charge/discharge
    double c_h = 0.0, d_h = 0.0; // tank charge/discharge
    double g_chp = 0.0, g_b = 0.0; // gas burned in CHP / boiler
    double e_buy = 0.0, e_sell = 0.0; // hub slice of park grid trade
    double spill_e = 0.0, spill_h = 0.0; // curtailed surplus

    // Busbar supply identity for the given energy; `renewable` is this
    // hub's infeed (electric only).
    double supply(Energy e, const HubParams& h, double renewable) const;
};

// Full park decision for one slot, including per-agent allocations.
struct Dispatch {
    std::vector<HubDispatch> hub;
    // x_user[k][i][e]: slice of user i's demand served from hub k.
    std::vector<std::vector<std::array<double, kEnergyCount>>> x_user;
    // x_el[k][q][e]: elastic consumption.
    std::vector<std::vector<std::array<double, kEnergyCount>>> x_el;
    double price = 0.0;               // announced shift incentive price
    std::vector<double> shifted_out;  // per user, MWh leaving this slot
    std::vector<double> il_served;    // per user, demand actually served now

    static Dispatch zeros(const ParkConfig& cfg);
    double park_e() const;
    double park_e_o() const;
    double hub_gas() const;
    double demand(std::size_t k, Energy e) const;
};

struct BalanceReport {
    // Signed busbar residuals, supply minus demand, per hub and energy.
    std::vector<std::array<double, kEnergyCount>> hub;
    // Park aggregates over all hubs plus the external trades.
    double e_total = 0.0, h_total = 0.0, g_total = 0.0;
    // Park residuals after subtracting served demand and curtailment.
    double e_res = 0.0, h_res = 0.0, g_res = 0.0;
    double max_abs() const;
};

struct Violation {
    std::string constraint;
    int hub = -1; // -1 for park-level
    double magnitude = 0.0;
    std::string to_string() const;
};

// --- storage and conversion physics -------------------------------------

// One battery step: B' = B + eta_ce*C - D/eta_de. Throws BoundViolation if
// C or D leaves its cap, CapacityViolation if B' leaves [b_min, b_max].
double step_battery(double b, double c, double d, const HubParams& h);
// Tank analogue with the heat-side efficiencies and window.
double step_tank(double w, double c, double d, const HubParams& h);

// CHP outputs (electric, heat) for gas feed g; throws CapacityViolation if
// an output cap is exceeded, BoundViolation for a negative feed.
std::array<double, 2> chp_output(double g, const HubParams& h);
double boiler_output(double g, const HubParams& h);

// --- dispatch accounting --------------------------------------------------

BalanceReport balance_residuals(const Dispatch& d, const SlotData& s,
                                const ParkConfig& cfg);

// Checks every box constraint and the balance residuals (tolerance `tol`).
// Returns an empty vector iff the dispatch is feasible.
std::vector<Violation> validate_dispatch(const Dispatch& d, const SlotData& s,
                                         const ParkConfig& cfg,
                                         double tol = 1e-6);

} // namespace parkopt
