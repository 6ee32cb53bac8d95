#include "parkopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parkopt/lp.hpp"

namespace parkopt {

namespace {

constexpr int kDeviceVars = 10; // build_hub_lp variable block per hub
enum Dev { CE = 0, DE, CH, DH, GCHP, GB, EBUY, ESELL, SPE, SPH };

double utility(double a, double b, double x) { return a * x * x + b * x; }

// ---- single-slot QP over all hubs -----------------------------------------

struct SlotQp {
    const ParkConfig* cfg = nullptr;
    const SlotData* s = nullptr;
    std::vector<double> lambda_e, lambda_h;
    std::size_t n = 0;
    std::vector<std::size_t> off;       // hub block offsets
    std::vector<double> lo, hi, lin;    // box + linear objective part
    std::vector<double> qa, qb;         // utility coefficients (elastic vars)
    std::vector<double> fixed_e, fixed_h;
    struct Row {
        std::vector<double> a;
        double rhs = 0.0;
        bool equality = true;
        double norm2 = 0.0;
    };
    std::vector<Row> rows;
    double constant = 0.0; // objective part independent of the variables
};

std::size_t el_index(const SlotQp& qp, std::size_t k, std::size_t q, int e) {
    return qp.off[k] + kDeviceVars + 2 * q + static_cast<std::size_t>(e);
}

SlotQp build_slot_qp(const ParkConfig& cfg, const SlotData& s,
                     const std::vector<double>& lambda_e,
                     const std::vector<double>& lambda_h) {
    SlotQp qp;
    qp.cfg = &cfg;
    qp.s = &s;
    qp.lambda_e = lambda_e;
    qp.lambda_h = lambda_h;
    const std::size_t kk = cfg.hub_count();
    qp.off.resize(kk);
    std::size_t n = 0;
    for (std::size_t k = 0; k < kk; ++k) {
        qp.off[k] = n;
        n += kDeviceVars + 2 * cfg.elastic_count(k);
    }
    qp.n = n;
    qp.lo.assign(n, 0.0);
    qp.hi.assign(n, 0.0);
    qp.lin.assign(n, 0.0);
    qp.qa.assign(n, 0.0);
    qp.qb.assign(n, 0.0);
    qp.fixed_e.assign(kk, 0.0);
    qp.fixed_h.assign(kk, 0.0);

    for (std::size_t k = 0; k < kk; ++k) {
        for (std::size_t i = 0; i < cfg.user_count(); ++i)
            qp.fixed_e[k] += cfg.users[i].hub_weight[k] * s.x_il[i];
        qp.fixed_h[k] = cfg.heat_share[k] * s.h_load;

        const auto& h = cfg.hubs[k];
        const auto& sh = cfg.shares[k];
        const std::size_t o = qp.off[k];
        auto set = [&](std::size_t j, double lo, double hi, double c) {
            qp.lo[o + j] = lo;
            qp.hi[o + j] = hi;
            qp.lin[o + j] = c;
        };
        set(CE, 0, h.c_e_max, lambda_e[k]);
        set(DE, 0, h.d_e_max, -lambda_e[k]);
        set(CH, 0, h.c_h_max, lambda_h[k]);
        set(DH, 0, h.d_h_max, -lambda_h[k]);
        set(GCHP, 0, std::min(h.chp_gas_cap(), sh.gas), s.p_g);
        set(GB, 0, std::min(h.boiler_gas_cap(), sh.gas), s.p_g);
        set(EBUY, 0, sh.e_buy, s.p_e);
        set(ESELL, 0, sh.e_sell, -s.p_o);
        set(SPE, 0, s.r[k], 0.0);
        set(SPH, 0, h.eta_hg * h.chp_gas_cap() + h.h_b_max + h.d_h_max, 0.0);
        for (std::size_t q = 0; q < cfg.elastic_count(k); ++q)
            for (int e = 0; e < kEnergyCount; ++e) {
                const auto& el = cfg.elastic[k][q][e];
                const std::size_t j = el_index(qp, k, q, e);
                qp.lo[j] = 0.0;
                qp.hi[j] = el.x_max;
                qp.qa[j] = el.a;
                qp.qb[j] = el.b;
            }

        if (qp.fixed_e[k] > cfg.x_max[k][0] + 1e-9 ||
            qp.fixed_h[k] > cfg.x_max[k][1] + 1e-9)
            throw InfeasibleProblem("committed demand exceeds the busbar cap");

        // Electric balance: device supply minus elastic consumption equals
        // the committed demand net of the infeed.
        SlotQp::Row re;
        re.a.assign(n, 0.0);
        re.a[o + CE] = -1;
        re.a[o + DE] = 1;
        re.a[o + GCHP] = h.eta_pg;
        re.a[o + EBUY] = 1;
        re.a[o + ESELL] = -1;
        re.a[o + SPE] = -1;
        for (std::size_t q = 0; q < cfg.elastic_count(k); ++q)
            re.a[el_index(qp, k, q, 0)] = -1;
        re.rhs = qp.fixed_e[k] - s.r[k];
        qp.rows.push_back(std::move(re));

        SlotQp::Row rh;
        rh.a.assign(n, 0.0);
        rh.a[o + CH] = -1;
        rh.a[o + DH] = 1;
        rh.a[o + GCHP] = h.eta_hg;
        rh.a[o + GB] = h.eta_bg;
        rh.a[o + SPH] = -1;
        for (std::size_t q = 0; q < cfg.elastic_count(k); ++q)
            rh.a[el_index(qp, k, q, 1)] = -1;
        rh.rhs = qp.fixed_h[k];
        qp.rows.push_back(std::move(rh));

        if (h.chp_gas_cap() + h.boiler_gas_cap() > sh.gas) {
            SlotQp::Row rg;
            rg.a.assign(n, 0.0);
            rg.a[o + GCHP] = 1;
            rg.a[o + GB] = 1;
            rg.rhs = sh.gas;
            rg.equality = false;
            qp.rows.push_back(std::move(rg));
        }
        for (int e = 0; e < kEnergyCount; ++e) {
            double caps = 0.0;
            for (std::size_t q = 0; q < cfg.elastic_count(k); ++q)
                caps += cfg.elastic[k][q][e].x_max;
            const double room =
                cfg.x_max[k][e] - (e == 0 ? qp.fixed_e[k] : qp.fixed_h[k]);
            if (caps > room) {
                SlotQp::Row rb;
                rb.a.assign(n, 0.0);
                for (std::size_t q = 0; q < cfg.elastic_count(k); ++q)
                    rb.a[el_index(qp, k, q, e)] = 1;
                rb.rhs = room;
                rb.equality = false;
                qp.rows.push_back(std::move(rb));
            }
        }
    }
    for (auto& r : qp.rows) {
        r.norm2 = 0.0;
        for (double v : r.a) r.norm2 += v * v;
    }
    qp.constant = s.p_g * s.g_load;
    for (std::size_t i = 0; i < cfg.user_count(); ++i)
        qp.constant -= utility(cfg.users[i].a, cfg.users[i].b, s.x_il[i]);
    return qp;
}

double qp_value(const SlotQp& qp, const std::vector<double>& z) {
    double v = qp.constant;
    for (std::size_t j = 0; j < qp.n; ++j) {
        v += qp.lin[j] * z[j];
        if (qp.qa[j] != 0.0 || qp.qb[j] != 0.0)
            v -= utility(qp.qa[j], qp.qb[j], z[j]);
    }
    return v;
}

void qp_gradient(const SlotQp& qp, const std::vector<double>& z,
                 std::vector<double>* g) {
    g->assign(qp.n, 0.0);
    for (std::size_t j = 0; j < qp.n; ++j) {
        (*g)[j] = qp.lin[j];
        if (qp.qa[j] != 0.0 || qp.qb[j] != 0.0)
            (*g)[j] -= 2.0 * qp.qa[j] * z[j] + qp.qb[j];
    }
}

double row_residual(const SlotQp& qp, const std::vector<double>& z) {
    double worst = 0.0;
    for (const auto& r : qp.rows) {
        double act = 0.0;
        for (std::size_t j = 0; j < qp.n; ++j) act += r.a[j] * z[j];
        const double viol =
            r.equality ? std::abs(act - r.rhs) : std::max(0.0, act - r.rhs);
        worst = std::max(worst, viol);
    }
    return worst;
}

// Dykstra alternating projection onto box \cap rows. Corrections restart at
// every call, which is what makes the limit the exact projection.
void dykstra_project(const SlotQp& qp, std::vector<double>* z) {
    const std::size_t m = qp.rows.size();
    static thread_local std::vector<std::vector<double>> corr;
    corr.assign(m + 1, std::vector<double>(qp.n, 0.0));
    std::vector<double>& y = *z;
    for (int cycle = 0; cycle < 400; ++cycle) {
        double moved = 0.0;
        {
            auto& p = corr[0];
            for (std::size_t j = 0; j < qp.n; ++j) {
                const double w = y[j] + p[j];
                const double nv = std::clamp(w, qp.lo[j], qp.hi[j]);
                p[j] = w - nv;
                moved = std::max(moved, std::abs(nv - y[j]));
                y[j] = nv;
            }
        }
        for (std::size_t i = 0; i < m; ++i) {
            const auto& r = qp.rows[i];
            auto& p = corr[i + 1];
            double act = 0.0;
            for (std::size_t j = 0; j < qp.n; ++j) act += r.a[j] * (y[j] + p[j]);
            double t = (act - r.rhs) / r.norm2;
            if (!r.equality && t < 0.0) t = 0.0;
            for (std::size_t j = 0; j < qp.n; ++j) {
                const double w = y[j] + p[j];
                const double nv = w - t * r.a[j];
                p[j] = w - nv;
                moved = std::max(moved, std::abs(nv - y[j]));
                y[j] = nv;
            }
        }
        if (moved < 1e-13) break;
    }
}

Dispatch dispatch_from(const SlotQp& qp, const std::vector<double>& z) {
    const ParkConfig& cfg = *qp.cfg;
    const SlotData& s = *qp.s;
    Dispatch d = Dispatch::zeros(cfg);
    const std::size_t ii = cfg.user_count();
    for (std::size_t i = 0; i < ii; ++i) d.il_served[i] = s.x_il[i];
    for (std::size_t k = 0; k < cfg.hub_count(); ++k) {
        const std::size_t o = qp.off[k];
        auto& hd = d.hub[k];
        hd.c_e = z[o + CE];
        hd.d_e = z[o + DE];
        hd.c_h = z[o + CH];
        hd.d_h = z[o + DH];
        hd.g_chp = z[o + GCHP];
        hd.g_b = z[o + GB];
        hd.e_buy = z[o + EBUY];
        hd.e_sell = z[o + ESELL];
        hd.spill_e = z[o + SPE];
        hd.spill_h = z[o + SPH];
        for (std::size_t q = 0; q < cfg.elastic_count(k); ++q)
            for (int e = 0; e < kEnergyCount; ++e)
                d.x_el[k][q][e] = z[el_index(qp, k, q, e)];
        for (std::size_t i = 0; i < ii; ++i) {
            d.x_user[k][i][0] = cfg.users[i].hub_weight[k] * s.x_il[i];
            d.x_user[k][i][1] =
                cfg.heat_share[k] * s.h_load / static_cast<double>(ii);
        }
    }
    if (ii == 0 && s.h_load > 0.0)
        throw InvalidConfig("heat load needs at least one user to book against");
    return d;
}

// ---- reduced-space grid ----------------------------------------------------

struct GridDim {
    std::size_t var = 0;
    std::vector<double> values;
};

std::vector<GridDim> grid_dims(const SlotQp& qp, double step) {
    std::vector<GridDim> dims;
    const ParkConfig& cfg = *qp.cfg;
    for (std::size_t k = 0; k < cfg.hub_count(); ++k) {
        const std::size_t o = qp.off[k];
        auto add = [&](std::size_t j) {
            if (qp.hi[j] - qp.lo[j] <= 1e-12) return;
            GridDim d;
            d.var = j;
            for (double v = qp.lo[j]; v < qp.hi[j] - 1e-12; v += step)
                d.values.push_back(v);
            d.values.push_back(qp.hi[j]);
            dims.push_back(std::move(d));
        };
        // Purchases and boiler gas are the balance fillers; everything else
        // with a nonempty range is enumerated.
        add(o + CE);
        add(o + DE);
        add(o + CH);
        add(o + DH);
        add(o + GCHP);
        add(o + ESELL);
        add(o + SPE);
        // Heat spill only matters when the CHP can overproduce heat.
        if (qp.hi[o + GCHP] > 1e-12) {
            GridDim d;
            d.var = o + SPH;
            const double top = cfg.hubs[k].eta_hg * qp.hi[o + GCHP];
            for (double v = 0.0; v < top - 1e-12; v += step)
                d.values.push_back(v);
            d.values.push_back(top);
            if (d.values.size() > 1) dims.push_back(std::move(d));
        }
        for (std::size_t q = 0; q < cfg.elastic_count(k); ++q)
            for (int e = 0; e < kEnergyCount; ++e)
                add(el_index(qp, k, q, e));
    }
    return dims;
}

} // namespace

double oracle_objective(const Dispatch& d, const SlotData& s,
                        const ParkConfig& cfg,
                        const std::vector<double>& lambda_e,
                        const std::vector<double>& lambda_h) {
    double v = slot_cost(d, s, cfg);
    for (std::size_t k = 0; k < cfg.hub_count(); ++k) {
        v += lambda_e[k] * (d.hub[k].c_e - d.hub[k].d_e);
        v += lambda_h[k] * (d.hub[k].c_h - d.hub[k].d_h);
    }
    return v;
}

GridResult brute_force_small(const ParkConfig& cfg, const SlotData& s,
                             const std::vector<double>& lambda_e,
                             const std::vector<double>& lambda_h,
                             const GridOptions& opt) {
    const SlotQp qp = build_slot_qp(cfg, s, lambda_e, lambda_h);
    const auto dims = grid_dims(qp, opt.step);

    double points = 1.0;
    for (const auto& d : dims) points *= static_cast<double>(d.values.size());
    if (points > static_cast<double>(opt.max_points))
        throw GridTooLarge("grid would have " + std::to_string(points) +
                           " points");

    GridResult best;
    best.objective = std::numeric_limits<double>::infinity();
    std::int64_t best_index = -1;

    std::vector<std::size_t> idx(dims.size(), 0);
    std::vector<double> z(qp.n, 0.0);
    const std::int64_t total = static_cast<std::int64_t>(points);
    for (std::int64_t flat = 0; flat < total; ++flat) {
        z.assign(qp.n, 0.0);
        {
            std::int64_t rem = flat;
            for (std::size_t d = 0; d < dims.size(); ++d) {
                const std::int64_t sz =
                    static_cast<std::int64_t>(dims[d].values.size());
                z[dims[d].var] = dims[d].values[rem % sz];
                rem /= sz;
            }
        }
        best.evaluated++;

        bool ok = true;
        for (std::size_t k = 0; k < cfg.hub_count() && ok; ++k) {
            const std::size_t o = qp.off[k];
            const auto& h = cfg.hubs[k];
            double el_e = 0.0, el_h = 0.0;
            for (std::size_t q = 0; q < cfg.elastic_count(k); ++q) {
                el_e += z[el_index(qp, k, q, 0)];
                el_h += z[el_index(qp, k, q, 1)];
            }
            if (qp.fixed_e[k] + el_e > cfg.x_max[k][0] + 1e-9 ||
                qp.fixed_h[k] + el_h > cfg.x_max[k][1] + 1e-9) {
                ok = false;
                break;
            }
            const double need_e = qp.fixed_e[k] + el_e -
                                  (h.eta_pg * z[o + GCHP] + z[o + DE] -
                                   z[o + CE] + s.r[k] - z[o + SPE] -
                                   z[o + ESELL]);
            if (need_e < -1e-9 || need_e > qp.hi[o + EBUY] + 1e-9) {
                ok = false;
                break;
            }
            z[o + EBUY] = std::clamp(need_e, 0.0, qp.hi[o + EBUY]);
            const double need_h =
                qp.fixed_h[k] + el_h -
                (h.eta_hg * z[o + GCHP] + z[o + DH] - z[o + CH] - z[o + SPH]);
            const double gb = need_h / h.eta_bg;
            const double gb_cap = std::min(qp.hi[o + GB],
                                           cfg.shares[k].gas - z[o + GCHP]);
            if (gb < -1e-9 || gb > gb_cap + 1e-9) {
                ok = false;
                break;
            }
            z[o + GB] = std::clamp(gb, 0.0, gb_cap);
        }
        if (!ok) continue;
        best.feasible++;
        const double v = qp_value(qp, z);
        if (v < best.objective) {
            best.objective = v;
            best_index = flat;
        }
    }

    if (best_index < 0)
        throw InfeasibleProblem("no feasible grid point; widen the fillers");

    // Rebuild the winning point.
    z.assign(qp.n, 0.0);
    std::int64_t rem = best_index;
    for (std::size_t d = 0; d < dims.size(); ++d) {
        const std::int64_t sz = static_cast<std::int64_t>(dims[d].values.size());
        z[dims[d].var] = dims[d].values[rem % sz];
        rem /= sz;
    }
    for (std::size_t k = 0; k < cfg.hub_count(); ++k) {
        const std::size_t o = qp.off[k];
        const auto& h = cfg.hubs[k];
        double el_e = 0.0, el_h = 0.0;
        for (std::size_t q = 0; q < cfg.elastic_count(k); ++q) {
            el_e += z[el_index(qp, k, q, 0)];
            el_h += z[el_index(qp, k, q, 1)];
        }
        z[o + EBUY] = std::clamp(
            qp.fixed_e[k] + el_e -
                (h.eta_pg * z[o + GCHP] + z[o + DE] - z[o + CE] + s.r[k] -
                 z[o + SPE] - z[o + ESELL]),
            0.0, qp.hi[o + EBUY]);
        z[o + GB] = std::clamp(
            (qp.fixed_h[k] + el_h -
             (h.eta_hg * z[o + GCHP] + z[o + DH] - z[o + CH] - z[o + SPH])) /
                h.eta_bg,
            0.0, qp.hi[o + GB]);
    }
    best.dispatch = dispatch_from(qp, z);
    return best;
}

OracleResult centralized_subproblem(const ParkConfig& cfg, const SlotData& s,
                                    const std::vector<double>& lambda_e,
                                    const std::vector<double>& lambda_h,
                                    const OracleOptions& opt) {
    const SlotQp qp = build_slot_qp(cfg, s, lambda_e, lambda_h);

    // Feasible-ish start: satisfy the balances through the fillers, then
    // project exactly.
    std::vector<double> z(qp.n, 0.0);
    for (std::size_t k = 0; k < cfg.hub_count(); ++k) {
        const std::size_t o = qp.off[k];
        z[o + SPE] = qp.hi[o + SPE]; // spill the infeed until the solve says otherwise
        z[o + EBUY] = std::clamp(qp.fixed_e[k], 0.0, qp.hi[o + EBUY]);
        z[o + GB] =
            std::clamp(qp.fixed_h[k] / cfg.hubs[k].eta_bg, 0.0, qp.hi[o + GB]);
    }
    dykstra_project(qp, &z);

    std::vector<double> g, trial;
    double f = qp_value(qp, z);
    double step = 1.0;
    double window_drop = 0.0;
    int window_count = 0;
    OracleResult res;
    bool done = false;
    int n = 0;
    for (; n < opt.max_iterations && !done; ++n) {
        qp_gradient(qp, z, &g);

        // Unit-step projected gradient, also the stop certificate.
        trial = z;
        for (std::size_t j = 0; j < qp.n; ++j) trial[j] -= g[j];
        dykstra_project(qp, &trial);
        double pg = 0.0;
        for (std::size_t j = 0; j < qp.n; ++j)
            pg = std::max(pg, std::abs(trial[j] - z[j]));
        res.projected_gradient = pg;
        if (pg <= opt.pgd_tol) {
            res.converged = true;
            break;
        }

        step = std::min(step * 2.0, 1e6);
        double fn = f;
        for (int half = 0; half < 60; ++half) {
            trial = z;
            for (std::size_t j = 0; j < qp.n; ++j) trial[j] -= step * g[j];
            dykstra_project(qp, &trial);
            double dist2 = 0.0;
            for (std::size_t j = 0; j < qp.n; ++j) {
                const double dz = trial[j] - z[j];
                dist2 += dz * dz;
            }
            fn = qp_value(qp, trial);
            if (fn <= f - 0.25 / step * dist2 || dist2 == 0.0) break;
            step *= 0.5;
        }
        window_drop += f - fn;
        window_count++;
        z = trial;
        f = fn;
        if (window_count >= 50) {
            if (window_drop <= opt.obj_tol * std::max(1.0, std::abs(f))) {
                res.converged = true;
                done = true;
            }
            window_drop = 0.0;
            window_count = 0;
        }
    }
    res.iterations = n;
    if (!res.converged)
        throw NotConverged("centralized solve hit the iteration cap");

    res.balance_residual = row_residual(qp, z);
    res.dispatch = dispatch_from(qp, z);
    res.objective = oracle_objective(res.dispatch, s, cfg, lambda_e, lambda_h);

    if (opt.cross_check) {
        const auto dims = grid_dims(qp, 1.0); // step irrelevant for counting
        if (static_cast<int>(dims.size()) <= opt.cross_check_dims) {
            double widest = 0.0;
            for (const auto& d : dims)
                widest = std::max(widest, qp.hi[d.var] - qp.lo[d.var]);
            GridOptions gopt;
            gopt.step = std::max(widest / 12.0, 1e-6);
            const GridResult grid =
                brute_force_small(cfg, s, lambda_e, lambda_h, gopt);
            if (res.objective > grid.objective + 1e-6)
                throw InvariantBroken(
                    "centralized solve sits above the grid bound by " +
                    std::to_string(res.objective - grid.objective));
        }
    }
    return res;
}

// ---- horizon lower bound ---------------------------------------------------

namespace {

struct SlotDual {
    double value = 0.0;
    // Subgradients with respect to the storage multipliers, already
    // efficiency-scaled to match the telescoped dynamics.
    std::vector<double> g_e, g_h;
};

SlotDual slot_dual_value(const ParkConfig& cfg, const SlotData& s,
                         const std::vector<double>& le,
                         const std::vector<double>& lh,
                         std::vector<std::array<double, 2>>* tau,
                         double sigma, double tol, int cap) {
    const std::size_t kk = cfg.hub_count();
    SlotDual out;
    out.g_e.assign(kk, 0.0);
    out.g_h.assign(kk, 0.0);

    std::vector<double> fixed_e(kk, 0.0), fixed_h(kk, 0.0);
    for (std::size_t k = 0; k < kk; ++k) {
        for (std::size_t i = 0; i < cfg.user_count(); ++i)
            fixed_e[k] += cfg.users[i].hub_weight[k] * s.x_il[i];
        fixed_h[k] = cfg.heat_share[k] * s.h_load;
    }

    double constant = s.p_g * s.g_load;
    for (std::size_t i = 0; i < cfg.user_count(); ++i)
        constant -= utility(cfg.users[i].a, cfg.users[i].b, s.x_il[i]);

    for (int n = 0; n < cap; ++n) {
        double value = constant;
        double worst = 0.0;
        for (std::size_t k = 0; k < kk; ++k) {
            const auto& h = cfg.hubs[k];
            HubSubproblemInput in;
            in.hub = h;
            in.p_e = s.p_e;
            in.p_g = s.p_g;
            in.p_o = s.p_o;
            in.lambda_e = 0.0;
            in.lambda_h = 0.0;
            in.tau_e = (*tau)[k][0];
            in.tau_h = (*tau)[k][1];
            in.renewable = s.r[k];
            in.e_buy_cap = cfg.shares[k].e_buy;
            in.e_sell_cap = cfg.shares[k].e_sell;
            in.gas_cap = cfg.shares[k].gas;
            in.x_max_e = cfg.x_max[k][0];
            in.x_max_h = cfg.x_max[k][1];
            BoundedLp lp = build_hub_lp(in);
            // Storage multipliers enter efficiency-scaled so the dualised
            // dynamics telescope exactly across the horizon.
            lp.cost[CE] += le[k] * h.eta_ce;
            lp.cost[DE] -= le[k] / h.eta_de;
            lp.cost[CH] += lh[k] * h.eta_ch;
            lp.cost[DH] -= lh[k] / h.eta_dh;
            const LpSolution sol = solve_bounded_lp(lp);
            const auto& x = sol.x;

            const double hub_val =
                (le[k] * h.eta_ce + (*tau)[k][0]) * x[CE] +
                (-le[k] / h.eta_de - (*tau)[k][0]) * x[DE] +
                (lh[k] * h.eta_ch + (*tau)[k][1]) * x[CH] +
                (-lh[k] / h.eta_dh - (*tau)[k][1]) * x[DH] +
                (s.p_g - (*tau)[k][0] * h.eta_pg - (*tau)[k][1] * h.eta_hg) *
                    x[GCHP] +
                (s.p_g - (*tau)[k][1] * h.eta_bg) * x[GB] +
                (s.p_e - (*tau)[k][0]) * x[EBUY] +
                (-s.p_o + (*tau)[k][0]) * x[ESELL] + (*tau)[k][0] * x[SPE] +
                (*tau)[k][1] * x[SPH];
            value += hub_val - (*tau)[k][0] * s.r[k];
            value += (*tau)[k][0] * fixed_e[k] + (*tau)[k][1] * fixed_h[k];
            out.g_e[k] = h.eta_ce * x[CE] - x[DE] / h.eta_de;
            out.g_h[k] = h.eta_ch * x[CH] - x[DH] / h.eta_dh;

            const double supply_e = h.eta_pg * x[GCHP] + x[DE] - x[CE] +
                                    (s.r[k] - x[SPE]) + x[EBUY] - x[ESELL];
            const double supply_h = h.eta_hg * x[GCHP] + h.eta_bg * x[GB] +
                                    x[DH] - x[CH] - x[SPH];
            double dem_e = fixed_e[k], dem_h = fixed_h[k];
            for (std::size_t q = 0; q < cfg.elastic_count(k); ++q) {
                for (int e = 0; e < kEnergyCount; ++e) {
                    const auto& el = cfg.elastic[k][q][e];
                    const double xs = solve_user_subproblem(
                        (*tau)[k][e], el.a, el.b, el.x_max);
                    value += (*tau)[k][e] * xs - utility(el.a, el.b, xs);
                    (e == 0 ? dem_e : dem_h) += xs;
                }
            }
            const double ge = dem_e - supply_e;
            const double gh = dem_h - supply_h;
            (*tau)[k][0] += sigma * ge;
            (*tau)[k][1] += sigma * gh;
            worst = std::max({worst, sigma * std::abs(ge),
                              sigma * std::abs(gh)});
        }
        out.value = value;
        if (worst < tol) break;
    }
    return out;
}

} // namespace

LowerBoundResult relaxed_lower_bound(const ScenarioSeries& series,
                                     const ParkConfig& cfg,
                                     const LowerBoundOptions& opt) {
    cfg.validate();
    series.validate();
    const std::size_t tt = series.size();
    const std::size_t kk = cfg.hub_count();
    LowerBoundResult out;
    if (tt == 0) return out;

    const StorageState s0 = initial_storage(cfg);
    const double rho = rho_min(cfg, cfg.p_e_cap, cfg.p_o_floor);
    const DualState seed = init_lambda(cfg, rho, s0, series.p_e[0]);
    std::vector<double> le = seed.lambda_e, lh = seed.lambda_h;

    const std::size_t ns = std::min(opt.search_slots, tt);
    std::vector<std::vector<std::array<double, 2>>> cache(
        tt, std::vector<std::array<double, 2>>(kk, {0.0, 0.0}));

    // The dualised constraint is net charge == net discharge per device, so
    // the bound is just the sum of slot dual values: no endpoint term.
    std::vector<double> best_e = le, best_h = lh;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < opt.outer_iterations; ++j) {
        double total = 0.0;
        std::vector<double> ge(kk, 0.0), gh(kk, 0.0);
        for (std::size_t t = 0; t < ns; ++t) {
            const SlotDual d =
                slot_dual_value(cfg, series.slot(t), le, lh, &cache[t],
                                opt.inner_sigma, opt.inner_tol, opt.inner_cap);
            total += d.value;
            for (std::size_t k = 0; k < kk; ++k) {
                ge[k] += d.g_e[k];
                gh[k] += d.g_h[k];
            }
        }
        if (total > best_val) {
            best_val = total;
            best_e = le;
            best_h = lh;
        }
        double norm = 0.0;
        for (std::size_t k = 0; k < kk; ++k)
            norm = std::max({norm, std::abs(ge[k]), std::abs(gh[k])});
        if (norm < 1e-12) break;
        const double step = opt.step0 / (1.0 + j / 8.0);
        for (std::size_t k = 0; k < kk; ++k) {
            le[k] += step * ge[k] / norm;
            lh[k] += step * gh[k] / norm;
        }
        out.outer_iterations = j + 1;
    }
    out.search_value = best_val;

    double value = 0.0;
    for (std::size_t t = 0; t < tt; ++t) {
        const SlotDual d = slot_dual_value(
            cfg, series.slot(t), best_e, best_h, &cache[t], opt.inner_sigma,
            opt.final_inner_tol, opt.final_inner_cap);
        value += d.value;
    }
    out.total = value;
    out.average = value / static_cast<double>(tt);
    out.lambda_e = best_e;
    out.lambda_h = best_h;
    return out;
}

} // namespace parkopt
