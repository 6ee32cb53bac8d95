#include "parkopt/park.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace parkopt {

namespace {

void check_range(double v, double lo, double hi, const char* what) {
    if (!(v >= lo && v <= hi)) {
        std::ostringstream os;
        os << what << " = " << v << " outside [" << lo << ", " << hi << "]";
        throw BoundViolation(os.str());
    }
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidConfig(msg);
}

} // namespace

double HubParams::chp_gas_cap() const {
    double cap_e = e_chp_max / eta_pg;
    double cap_h = h_chp_max / eta_hg;
    return std::min(cap_e, cap_h);
}

double HubParams::boiler_gas_cap() const { return h_b_max / eta_bg; }

void HubParams::validate(const std::string& label) const {
    require(b_min < b_max, label + ": battery window empty");
    require(w_min < w_max, label + ": tank window empty");
    require(c_e_max >= 0 && d_e_max >= 0 && c_h_max >= 0 && d_h_max >= 0,
            label + ": negative device cap");
    for (double eta : {eta_ce, eta_de, eta_ch, eta_dh})
        require(eta > 0.0 && eta <= 1.0, label + ": storage efficiency outside (0,1]");
    for (double eta : {eta_pg, eta_hg, eta_bg})
        require(eta > 0.0 && eta <= 1.0, label + ": conversion efficiency outside (0,1]");
    require(e_chp_max >= 0 && h_chp_max >= 0 && h_b_max >= 0,
            label + ": negative output cap");
    require(b_init >= b_min && b_init <= b_max, label + ": initial battery fill outside window");
    require(w_init >= w_min && w_init <= w_max, label + ": initial tank fill outside window");
    // The step-size rule divides by this; a nonpositive value means the
    // battery cannot absorb one full charge/discharge swing.
    require(b_max - b_min - d_e_max - c_e_max > 0.0,
            label + ": battery window must exceed one charge+discharge swing");
    // Same swing condition for the tank; the multiplier interval is only
    // closed under the slow step when it holds.
    require(w_max - w_min - d_h_max - c_h_max > 0.0,
            label + ": tank window must exceed one charge+discharge swing");
}

void ParkConfig::validate() const {
    require(!hubs.empty(), "config has no hubs");
    require(elastic.size() == hubs.size(), "elastic loads not per-hub");
    require(shares.size() == hubs.size(), "trade shares not per-hub");
    require(x_max.size() == hubs.size(), "busbar caps not per-hub");
    require(heat_share.size() == hubs.size(), "heat shares not per-hub");
    for (std::size_t k = 0; k < hubs.size(); ++k)
        hubs[k].validate("hub " + std::to_string(k));
    double se = 0, so = 0, sg = 0, sh = 0;
    for (std::size_t k = 0; k < hubs.size(); ++k) {
        require(shares[k].e_buy >= 0 && shares[k].e_sell >= 0 && shares[k].gas >= 0,
                "negative trade share");
        se += shares[k].e_buy;
        so += shares[k].e_sell;
        sg += shares[k].gas;
        require(heat_share[k] >= 0, "negative heat share");
        sh += heat_share[k];
        require(x_max[k][0] > 0 && x_max[k][1] > 0, "busbar cap must be positive");
        for (const auto& el : elastic[k])
            for (const auto& load : el) {
                require(load.a < 0, "elastic utility needs a < 0");
                require(load.x_max >= 0, "elastic cap negative");
            }
    }
    require(std::abs(se - e_max) <= 1e-9 * std::max(1.0, e_max),
            "purchase shares do not sum to the park limit");
    require(std::abs(so - e_o_max) <= 1e-9 * std::max(1.0, e_o_max),
            "sale shares do not sum to the park limit");
    require(sg <= g_max + 1e-9 * std::max(1.0, g_max),
            "gas shares exceed the park limit");
    require(std::abs(sh - 1.0) <= 1e-9, "heat shares do not sum to one");
    for (std::size_t i = 0; i < users.size(); ++i) {
        const auto& u = users[i];
        require(u.a < 0, "user utility needs a < 0");
        require(u.hub_weight.size() == hubs.size(), "user weights not per-hub");
        double sw = 0;
        for (double w : u.hub_weight) {
            require(w >= 0, "negative user weight");
            sw += w;
        }
        if (std::abs(sw - 1.0) > 1e-9)
            throw ShareMismatch("user " + std::to_string(i) +
                                " hub weights sum to " + std::to_string(sw));
        require(u.gamma >= 0, "negative shift responsiveness");
        require(u.alpha > 0, "shift decay must be positive");
    }
    require(p_e_cap > p_o_floor, "price envelope empty");
    require(p_o_floor >= 0, "sale price floor negative");
    require(shift_cap > 0 && shift_cap < 1, "shift cap outside (0,1)");
    require(shift_window >= 1, "shift window must be at least one slot");
}

SlotData ScenarioSeries::slot(std::size_t t) const {
    SlotData s;
    s.p_e = p_e[t];
    s.p_g = p_g[t];
    s.p_o = p_o[t];
    s.r = r[t];
    s.x_il = x_il[t];
    s.h_load = h_load[t];
    s.g_load = g_load[t];
    return s;
}

void ScenarioSeries::validate() const {
    const std::size_t n = p_e.size();
    auto bad = [&](std::size_t t, const std::string& what) {
        return "slot " + std::to_string(t) + ": " + what;
    };
    if (p_g.size() != n || p_o.size() != n || r.size() != n ||
        x_il.size() != n || h_load.size() != n || g_load.size() != n)
        throw SchemaError("scenario columns have unequal lengths");
    for (std::size_t t = 0; t < n; ++t) {
        auto nonneg = [&](double v, const char* what) {
            if (v < 0) throw NegativeValue(bad(t, std::string(what) + " is negative"));
        };
        nonneg(p_e[t], "p_e");
        nonneg(p_g[t], "p_g");
        nonneg(p_o[t], "p_o");
        nonneg(h_load[t], "h_load");
        nonneg(g_load[t], "g_load");
        for (double v : r[t]) nonneg(v, "renewable infeed");
        for (double v : x_il[t]) nonneg(v, "inflexible demand");
        if (p_o[t] > p_e[t])
            throw SchemaError(bad(t, "sale price exceeds purchase price"));
        if (t > 0 && (r[t].size() != r[0].size() || x_il[t].size() != x_il[0].size()))
            throw SchemaError(bad(t, "ragged renewable or demand row"));
    }
}

double ScenarioSeries::max_p_e() const {
    double m = 0;
    for (double v : p_e) m = std::max(m, v);
    return m;
}

double ScenarioSeries::min_p_o() const {
    if (p_o.empty()) return 0;
    double m = p_o[0];
    for (double v : p_o) m = std::min(m, v);
    return m;
}

double HubDispatch::supply(Energy e, const HubParams& h, double renewable) const {
    if (e == Energy::Electric) {
        return h.eta_pg * g_chp + d_e - c_e + (renewable - spill_e) +
               e_buy - e_sell;
    }
    return h.eta_hg * g_chp + h.eta_bg * g_b + d_h - c_h - spill_h;
}

Dispatch Dispatch::zeros(const ParkConfig& cfg) {
    Dispatch d;
    d.hub.resize(cfg.hub_count());
    d.x_user.assign(cfg.hub_count(),
                    std::vector<std::array<double, kEnergyCount>>(
                        cfg.user_count(), {0.0, 0.0}));
    d.x_el.resize(cfg.hub_count());
    for (std::size_t k = 0; k < cfg.hub_count(); ++k)
        d.x_el[k].assign(cfg.elastic_count(k), {0.0, 0.0});
    d.shifted_out.assign(cfg.user_count(), 0.0);
    d.il_served.assign(cfg.user_count(), 0.0);
    return d;
}

double Dispatch::park_e() const {
    double v = 0;
    for (const auto& h : hub) v += h.e_buy;
    return v;
}

double Dispatch::park_e_o() const {
    double v = 0;
    for (const auto& h : hub) v += h.e_sell;
    return v;
}

double Dispatch::hub_gas() const {
    double v = 0;
    for (const auto& h : hub) v += h.g_chp + h.g_b;
    return v;
}

double Dispatch::demand(std::size_t k, Energy e) const {
    double v = 0;
    const int ei = static_cast<int>(e);
    for (const auto& xu : x_user[k]) v += xu[ei];
    for (const auto& xe : x_el[k]) v += xe[ei];
    return v;
}

double step_battery(double b, double c, double d, const HubParams& h) {
    check_range(c, 0.0, h.c_e_max, "battery charge");
    check_range(d, 0.0, h.d_e_max, "battery discharge");
    const double next = b + h.eta_ce * c - d / h.eta_de;
    if (next < h.b_min - 1e-12 || next > h.b_max + 1e-12) {
        std::ostringstream os;
        os << "battery level " << next << " outside [" << h.b_min << ", "
           << h.b_max << "]";
        throw CapacityViolation(os.str());
    }
    return next;
}

double step_tank(double w, double c, double d, const HubParams& h) {
    check_range(c, 0.0, h.c_h_max, "tank charge");
    check_range(d, 0.0, h.d_h_max, "tank discharge");
    const double next = w + h.eta_ch * c - d / h.eta_dh;
    if (next < h.w_min - 1e-12 || next > h.w_max + 1e-12) {
        std::ostringstream os;
        os << "tank level " << next << " outside [" << h.w_min << ", "
           << h.w_max << "]";
        throw CapacityViolation(os.str());
    }
    return next;
}

std::array<double, 2> chp_output(double g, const HubParams& h) {
    if (g < -1e-12) throw BoundViolation("CHP gas feed negative");
    const double e = h.eta_pg * g;
    const double q = h.eta_hg * g;
    if (e > h.e_chp_max + 1e-9 || q > h.h_chp_max + 1e-9) {
        std::ostringstream os;
        os << "CHP output (" << e << ", " << q << ") exceeds caps";
        throw CapacityViolation(os.str());
    }
    return {e, q};
}

double boiler_output(double g, const HubParams& h) {
    if (g < -1e-12) throw BoundViolation("boiler gas feed negative");
    const double q = h.eta_bg * g;
    if (q > h.h_b_max + 1e-9) {
        std::ostringstream os;
        os << "boiler output " << q << " exceeds cap " << h.h_b_max;
        throw CapacityViolation(os.str());
    }
    return q;
}

BalanceReport balance_residuals(const Dispatch& d, const SlotData& s,
                                const ParkConfig& cfg) {
    BalanceReport rep;
    rep.hub.assign(cfg.hub_count(), {0.0, 0.0});
    double spill_e_tot = 0, spill_h_tot = 0;
    for (std::size_t k = 0; k < cfg.hub_count(); ++k) {
        const auto& hd = d.hub[k];
        const auto& hp = cfg.hubs[k];
        const double xe = hd.supply(Energy::Electric, hp, s.r[k]);
        const double xh = hd.supply(Energy::Heat, hp, 0.0);
        rep.hub[k][0] = xe - d.demand(k, Energy::Electric);
        rep.hub[k][1] = xh - d.demand(k, Energy::Heat);
        rep.e_total += hp.eta_pg * hd.g_chp + hd.d_e - hd.c_e + s.r[k];
        rep.h_total += hp.eta_hg * hd.g_chp + hp.eta_bg * hd.g_b + hd.d_h - hd.c_h;
        spill_e_tot += hd.spill_e;
        spill_h_tot += hd.spill_h;
    }
    rep.e_total += d.park_e() - d.park_e_o();
    rep.g_total = d.hub_gas() + s.g_load;
    double served_e = 0, served_h = 0;
    for (std::size_t k = 0; k < cfg.hub_count(); ++k) {
        served_e += d.demand(k, Energy::Electric);
        served_h += d.demand(k, Energy::Heat);
    }
    rep.e_res = rep.e_total - served_e - spill_e_tot;
    rep.h_res = rep.h_total - served_h - spill_h_tot;
    // Gas has no storage or busbar: purchases equal burn plus direct demand.
    rep.g_res = rep.g_total - (d.hub_gas() + s.g_load);
    return rep;
}

double BalanceReport::max_abs() const {
    double m = std::max({std::abs(e_res), std::abs(h_res), std::abs(g_res)});
    for (const auto& h : hub)
        m = std::max({m, std::abs(h[0]), std::abs(h[1])});
    return m;
}

std::string Violation::to_string() const {
    std::ostringstream os;
    os << constraint;
    if (hub >= 0) os << "(hub " << hub << ")";
    os << " by " << magnitude;
    return os.str();
}

std::vector<Violation> validate_dispatch(const Dispatch& d, const SlotData& s,
                                         const ParkConfig& cfg, double tol) {
    std::vector<Violation> out;
    auto check = [&](double v, double lo, double hi, const char* name, int k) {
        if (v < lo - tol) out.push_back({name, k, lo - v});
        if (v > hi + tol) out.push_back({name, k, v - hi});
    };
    for (std::size_t k = 0; k < cfg.hub_count(); ++k) {
        const auto& hd = d.hub[k];
        const auto& hp = cfg.hubs[k];
        const int ki = static_cast<int>(k);
        check(hd.c_e, 0, hp.c_e_max, "ChargeBound", ki);
        check(hd.d_e, 0, hp.d_e_max, "DischargeBound", ki);
        check(hd.c_h, 0, hp.c_h_max, "TankChargeBound", ki);
        check(hd.d_h, 0, hp.d_h_max, "TankDischargeBound", ki);
        check(hd.g_chp, 0, hp.chp_gas_cap(), "ChpGasBound", ki);
        check(hd.g_b, 0, hp.boiler_gas_cap(), "BoilerGasBound", ki);
        check(hd.e_buy, 0, cfg.shares[k].e_buy, "TradeBound(E)", ki);
        check(hd.e_sell, 0, cfg.shares[k].e_sell, "TradeBound(E_o)", ki);
        check(hd.g_chp + hd.g_b, 0, cfg.shares[k].gas, "TradeBound(G)", ki);
        check(hd.spill_e, 0, s.r[k], "SpillBound(E)", ki);
        check(hd.spill_h, 0,
              hp.eta_hg * hp.chp_gas_cap() + hp.h_b_max + hp.d_h_max,
              "SpillBound(H)", ki);
        check(hd.supply(Energy::Electric, hp, s.r[k]), 0, cfg.x_max[k][0],
              "BusBound(E)", ki);
        check(hd.supply(Energy::Heat, hp, 0.0), 0, cfg.x_max[k][1],
              "BusBound(H)", ki);
        for (std::size_t q = 0; q < cfg.elastic_count(k); ++q)
            for (int e = 0; e < kEnergyCount; ++e)
                check(d.x_el[k][q][e], 0, cfg.elastic[k][q][e].x_max,
                      "ElasticBound", ki);
        for (std::size_t i = 0; i < cfg.user_count(); ++i)
            for (int e = 0; e < kEnergyCount; ++e)
                if (d.x_user[k][i][e] < -tol)
                    out.push_back({"UserAllocation", ki, -d.x_user[k][i][e]});
    }
    check(d.park_e(), 0, cfg.e_max, "ParkTrade(E)", -1);
    check(d.park_e_o(), 0, cfg.e_o_max, "ParkTrade(E_o)", -1);
    check(d.hub_gas() + s.g_load, 0, cfg.g_max, "ParkTrade(G)", -1);
    const auto bal = balance_residuals(d, s, cfg);
    for (std::size_t k = 0; k < cfg.hub_count(); ++k)
        for (int e = 0; e < kEnergyCount; ++e)
            if (std::abs(bal.hub[k][e]) > tol)
                out.push_back({std::string("Balance(") +
                                   energy_name(static_cast<Energy>(e)) + ")",
                               static_cast<int>(k), std::abs(bal.hub[k][e])});
    if (std::abs(bal.e_res) > tol) out.push_back({"ParkBalance(E)", -1, std::abs(bal.e_res)});
    if (std::abs(bal.h_res) > tol) out.push_back({"ParkBalance(H)", -1, std::abs(bal.h_res)});
    if (std::abs(bal.g_res) > tol) out.push_back({"ParkBalance(G)", -1, std::abs(bal.g_res)});
    return out;
}

} // namespace parkopt
