#pragma once

// Shared hand-sized instances for the unit suites. The hub mirrors the
// desk-check numbers used across the tests: a 4 MWh battery and tank with
// unit charge caps, a 10:3.5/4.5 CHP, and an 0.85-efficiency boiler.

#include "parkopt/park.hpp"

namespace parkopt::testing {

inline HubParams desk_hub() {
    HubParams h;
    h.b_min = 0.0;
    h.b_max = 4.0;
    h.w_min = 0.0;
    h.w_max = 4.0;
    h.c_e_max = 1.0;
    h.d_e_max = 1.0;
    h.c_h_max = 1.0;
    h.d_h_max = 1.0;
    h.eta_ce = 0.98;
    h.eta_de = 0.98;
    h.eta_ch = 0.98;
    h.eta_dh = 0.98;
    h.eta_pg = 0.35;
    h.eta_hg = 0.45;
    h.eta_bg = 0.85;
    h.e_chp_max = 3.5;
    h.h_chp_max = 4.5;
    h.h_b_max = 2.0;
    h.b_init = 2.0;
    h.w_init = 2.0;
    return h;
}

// Single-hub park with one elastic load per energy and one user; trade
// shares loose enough that no share ever binds in the desk checks.
inline ParkConfig desk_config() {
    ParkConfig cfg;
    cfg.hubs = {desk_hub()};
    UserParams u;
    u.a = -1.0;
    u.b = 1.0;
    u.hub_weight = {1.0};
    cfg.users = {u};
    ElasticLoad el_e{-1.0, 7.0, 10.0};
    ElasticLoad el_h{-0.5, 0.8, 2.0};
    cfg.elastic = {{{el_e, el_h}}};
    cfg.shares = {{5.0, 5.0, 20.0}};
    cfg.x_max = {{15.0, 10.0}};
    cfg.heat_share = {1.0};
    cfg.e_max = 5.0;
    cfg.e_o_max = 5.0;
    cfg.g_max = 20.0;
    cfg.p_e_cap = 1.5;
    cfg.p_o_floor = 0.2;
    return cfg;
}

inline SlotData quiet_slot(const ParkConfig& cfg) {
    SlotData s;
    s.p_e = 1.0;
    s.p_g = 0.1;
    s.p_o = 0.4;
    s.r.assign(cfg.hub_count(), 0.0);
    s.x_il.assign(cfg.user_count(), 0.0);
    s.h_load = 0.0;
    s.g_load = 0.0;
    return s;
}

// Single hub, no storage headroom, one elastic electric load and a unit
// purchase share: the market clears where the load's marginal utility
// meets the supply cap, so tau* = b - 2*share = 5 by hand.
inline ParkConfig clearing_config() {
    ParkConfig cfg;
    HubParams h;
    h.b_min = 0.0;
    h.b_max = 1.0;
    h.w_min = 0.0;
    h.w_max = 1.0;
    h.eta_pg = 0.35;
    h.eta_hg = 0.45;
    h.eta_bg = 0.85;
    h.e_chp_max = 3.5;
    h.h_chp_max = 4.5;
    h.h_b_max = 2.0;
    h.b_init = 0.5;
    h.w_init = 0.5;
    cfg.hubs = {h};
    ElasticLoad el_e{-1.0, 7.0, 10.0};
    ElasticLoad el_h{-1.0, 0.0, 0.0};
    cfg.elastic = {{{el_e, el_h}}};
    cfg.shares = {{1.0, 0.0, 0.0}};
    cfg.x_max = {{10.0, 5.0}};
    cfg.heat_share = {1.0};
    cfg.e_max = 1.0;
    cfg.e_o_max = 0.0;
    cfg.g_max = 0.0;
    cfg.p_e_cap = 3.6;
    cfg.p_o_floor = 0.2;
    return cfg;
}

inline SlotData clearing_slot() {
    SlotData s;
    s.p_e = 3.0;
    s.p_g = 0.1;
    s.p_o = 0.5;
    s.r = {0.0};
    s.x_il = {};
    return s;
}

// Nothing to do: no loads, no gas path, no utility for consuming, storage
// caps at zero. The unique optimum is the zero dispatch.
inline ParkConfig dead_config() {
    ParkConfig cfg = clearing_config();
    cfg.elastic[0][0][0] = ElasticLoad{-1.0, 0.0, 0.0};
    cfg.elastic[0][0][1] = ElasticLoad{-1.0, 0.0, 0.0};
    return cfg;
}

// Battery-plus-grid park sized so every busbar clearing sits strictly
// inside a smooth supply segment: the busbar cap binds on cheap slots,
// the battery is the whole peak supply, and no decision flips within
// a tolerance band of any clearing price. The multiplier moves on a
// lattice of pitch rho * cap = 1.0; the opening shoulder slot of the
// companion scenario pins that lattice to ..., -2.5, -1.5, -0.5 so no
// reachable flip price lands inside the busbar clearing band.
inline ParkConfig spread_config() {
    ParkConfig cfg;
    HubParams h;
    h.b_min = 0.0;
    h.b_max = 2.0;
    h.c_e_max = 0.4;
    h.d_e_max = 0.4;
    h.eta_ce = 1.0;
    h.eta_de = 1.0;
    h.w_min = 0.0;
    h.w_max = 1.2;
    h.c_h_max = 0.0;
    h.d_h_max = 0.0;
    h.eta_ch = 1.0;
    h.eta_dh = 1.0;
    h.eta_pg = 0.35;
    h.eta_hg = 0.45;
    h.eta_bg = 0.85;
    h.e_chp_max = 0.0;
    h.h_chp_max = 0.0;
    h.h_b_max = 0.0;
    h.b_init = 1.2;
    h.w_init = 0.5;
    cfg.hubs = {h};
    ElasticLoad el_e{-1.0, 2.4, 10.0};
    ElasticLoad el_h{-1.0, 0.0, 0.0};
    cfg.elastic = {{{el_e, el_h}}};
    cfg.shares = {{2.0, 0.0, 0.0}};
    cfg.x_max = {{0.6, 1.0}};
    cfg.heat_share = {1.0};
    cfg.e_max = 2.0;
    cfg.e_o_max = 0.0;
    cfg.g_max = 0.0;
    cfg.p_e_cap = 3.2;
    cfg.p_o_floor = 0.2;
    return cfg;
}

// One shoulder slot to seat the multiplier lattice, then alternating
// 4-slot price blocks; `peak_il` books fixed user demand on the tail of
// each expensive block, where the battery is already spent and a shifted
// unit mostly lands in the next cheap block.
inline ScenarioSeries spread_scenario(int slots, std::size_t users = 0,
                                      double peak_il = 0.0) {
    ScenarioSeries s;
    for (int t = 0; t < slots; ++t) {
        const bool shoulder = t == 0;
        const bool peak = !shoulder && ((t - 1) / 4) % 2 == 1;
        const bool late_peak = peak && (t - 1) % 4 >= 2;
        s.p_e.push_back(shoulder ? 2.5 : (peak ? 3.0 : 1.0));
        s.p_g.push_back(0.1);
        s.p_o.push_back(0.25);
        s.r.push_back({0.0});
        s.x_il.push_back(std::vector<double>(users, late_peak ? peak_il : 0.0));
        s.h_load.push_back(0.0);
        s.g_load.push_back(0.0);
    }
    return s;
}

} // namespace parkopt::testing
