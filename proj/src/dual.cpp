#include "parkopt/dual.hpp"

#include <algorithm>
#include <cmath>

namespace parkopt {

double rho_min(const ParkConfig& cfg, double p_e_max, double p_o_min) {
    if (p_e_max < p_o_min)
        throw InvalidConfig("price envelope inverted in step-size rule");
    double r = 0.0;
    for (const auto& h : cfg.hubs) {
        // Denominator positive by HubParams::validate.
        const double denom = h.b_max - h.b_min - h.d_e_max - h.c_e_max;
        r = std::max(r, (p_e_max - p_o_min) / denom);
    }
    return r;
}

DualState init_lambda(const ParkConfig& cfg, double rho,
                      const StorageState& s0, double p_e_0) {
    DualState ds;
    ds.rho = rho;
    const std::size_t kk = cfg.hub_count();
    ds.lambda_e.resize(kk);
    ds.lambda_h.resize(kk);
    for (std::size_t k = 0; k < kk; ++k) {
        const auto& h = cfg.hubs[k];
        ds.lambda_e[k] = rho * (s0.b[k] - h.b_min - h.d_e_max) - p_e_0;
        ds.lambda_h[k] = rho * (s0.w[k] - h.w_min - h.d_h_max);
    }
    ds.tau.assign(kk, {0.0, 0.0});
    ds.tau_prev.assign(kk, {0.0, 0.0});
    return ds;
}

void update_lambda(DualState* ds, const Dispatch& d) {
    for (std::size_t k = 0; k < ds->lambda_e.size(); ++k) {
        ds->lambda_e[k] += ds->rho * (d.hub[k].c_e - d.hub[k].d_e);
        ds->lambda_h[k] += ds->rho * (d.hub[k].c_h - d.hub[k].d_h);
    }
    ds->slot++;
}

StorageState soc_from_lambda(const DualState& ds, const ParkConfig& cfg) {
    StorageState st;
    for (std::size_t k = 0; k < cfg.hub_count(); ++k) {
        const auto& h = cfg.hubs[k];
        const double b =
            (ds.lambda_e[k] + cfg.p_e_cap) / ds.rho + h.b_min + h.d_e_max;
        const double w = ds.lambda_h[k] / ds.rho + h.w_min + h.d_h_max;
        if (b < h.b_min - 1e-9 || b > h.b_max + 1e-9)
            throw InvariantBroken("hub " + std::to_string(k) +
                                  ": implied battery level " +
                                  std::to_string(b) + " outside window");
        if (w < h.w_min - 1e-9 || w > h.w_max + 1e-9)
            throw InvariantBroken("hub " + std::to_string(k) +
                                  ": implied tank level " + std::to_string(w) +
                                  " outside window");
        st.b.push_back(b);
        st.w.push_back(w);
    }
    return st;
}

LambdaInterval lambda_interval_e(const HubParams& h, double rho,
                                 double p_e_max) {
    return {-p_e_max - rho * h.d_e_max,
            rho * (h.b_max - h.b_min) - p_e_max - rho * h.d_e_max};
}

LambdaInterval lambda_interval_h(const HubParams& h, double rho) {
    return {-rho * h.d_h_max, rho * (h.w_max - h.w_min) - rho * h.d_h_max};
}

double theta_update(double theta_prev) {
    return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta_prev * theta_prev));
}

double momentum_combine(double tau, double tau_prev, double theta,
                        double theta_prev) {
    const double eps = (1.0 - theta_prev) / theta;
    return (1.0 - eps) * tau + eps * tau_prev;
}

double tau_gradient(const Dispatch& d, const SlotData& s,
                    const ParkConfig& cfg, std::size_t k, Energy e) {
    const double renewable = e == Energy::Electric ? s.r[k] : 0.0;
    return d.demand(k, e) - d.hub[k].supply(e, cfg.hubs[k], renewable);
}

double solve_user_subproblem(double tau, double a, double b, double bound) {
    const double x = (b - tau) / (-2.0 * a);
    return std::clamp(x, 0.0, bound);
}

namespace {

double utility(double a, double b, double x) { return a * x * x + b * x; }

} // namespace

double slot_cost(const Dispatch& d, const SlotData& s, const ParkConfig& cfg) {
    double c = d.park_e() * s.p_e + (d.hub_gas() + s.g_load) * s.p_g -
               d.park_e_o() * s.p_o;
    for (std::size_t i = 0; i < cfg.user_count(); ++i) {
        const auto& u = cfg.users[i];
        c += d.price * d.shifted_out[i];
        c -= utility(u.a, u.b, s.x_il[i] - d.shifted_out[i]);
    }
    for (std::size_t k = 0; k < cfg.hub_count(); ++k)
        for (std::size_t q = 0; q < cfg.elastic_count(k); ++q)
            for (int e = 0; e < kEnergyCount; ++e) {
                const auto& el = cfg.elastic[k][q][e];
                c -= utility(el.a, el.b, d.x_el[k][q][e]);
            }
    return c;
}

double gap_bound(double rho, const ParkConfig& cfg) {
    double f = 0.0;
    for (const auto& h : cfg.hubs) {
        const double se = std::max(h.c_e_max, h.d_e_max);
        const double sh = std::max(h.c_h_max, h.d_h_max);
        f += 0.5 * se * se + 0.5 * sh * sh;
    }
    return rho * f;
}

ShiftModel shift_model_from(const ParkConfig& cfg) {
    ShiftModel m;
    for (const auto& u : cfg.users) {
        m.alpha.push_back(u.alpha);
        m.gamma.push_back(u.gamma);
    }
    m.eta = cfg.shift_cap;
    m.window = cfg.shift_window;
    return m;
}

namespace {

// Moves *v toward absorbing `want` within [lo, hi]; returns the amount
// actually absorbed.
double absorb(double* v, double lo, double hi, double want) {
    const double nv = std::clamp(*v + want, lo, hi);
    const double took = nv - *v;
    *v = nv;
    return took;
}

// Restores exact busbar balance after the fast loop stops short of a root.
// Storage is never touched here: the slow multiplier step must see the
// device decisions the threshold economics produced.
void project_balance(Dispatch* d, const SlotData& s, const ParkConfig& cfg,
                     double* worst) {
    for (std::size_t k = 0; k < cfg.hub_count(); ++k) {
        auto& hd = d->hub[k];
        const auto& hp = cfg.hubs[k];
        const auto& sh = cfg.shares[k];

        // Electric busbar. res > 0 means excess supply.
        double res = -tau_gradient(*d, s, cfg, k, Energy::Electric);
        if (res > 0) {
            res += absorb(&hd.e_buy, 0.0, sh.e_buy, -res);
            res -= absorb(&hd.e_sell, 0.0, sh.e_sell, res);
            res -= absorb(&hd.spill_e, 0.0, s.r[k], res);
            for (std::size_t q = 0; q < cfg.elastic_count(k) && res > 0; ++q)
                res -= absorb(&d->x_el[k][q][0], 0.0,
                              cfg.elastic[k][q][0].x_max, res);
        } else if (res < 0) {
            res -= absorb(&hd.spill_e, 0.0, s.r[k], res);
            res -= absorb(&hd.e_sell, 0.0, sh.e_sell, res);
            res += absorb(&hd.e_buy, 0.0, sh.e_buy, -res);
            for (std::size_t q = 0; q < cfg.elastic_count(k) && res < 0; ++q)
                res -= absorb(&d->x_el[k][q][0], 0.0,
                              cfg.elastic[k][q][0].x_max, res);
        }
        *worst = std::max(*worst, std::abs(res));

        // Heat busbar.
        res = -tau_gradient(*d, s, cfg, k, Energy::Heat);
        if (res > 0) {
            res += hp.eta_bg *
                   absorb(&hd.g_b, 0.0, hp.boiler_gas_cap(), -res / hp.eta_bg);
            res -= absorb(&hd.spill_h, 0.0,
                          hp.eta_hg * hp.chp_gas_cap() + hp.h_b_max +
                              hp.d_h_max,
                          res);
            for (std::size_t q = 0; q < cfg.elastic_count(k) && res > 0; ++q)
                res -= absorb(&d->x_el[k][q][1], 0.0,
                              cfg.elastic[k][q][1].x_max, res);
        } else if (res < 0) {
            res -= absorb(&hd.spill_h, 0.0,
                          hp.eta_hg * hp.chp_gas_cap() + hp.h_b_max +
                              hp.d_h_max,
                          res);
            double room = std::max(0.0, sh.gas - hd.g_chp - hd.g_b);
            room = std::min(room, hp.boiler_gas_cap() - hd.g_b);
            res += hp.eta_bg * absorb(&hd.g_b, 0.0, hd.g_b + room,
                                      -res / hp.eta_bg);
            for (std::size_t q = 0; q < cfg.elastic_count(k) && res < 0; ++q)
                res -= absorb(&d->x_el[k][q][1], 0.0,
                              cfg.elastic[k][q][1].x_max, res);
        }
        *worst = std::max(*worst, std::abs(res));
    }
}

} // namespace

SlotResult run_slot(DualState* ds, const SlotData& s_in, const SlotContext& ctx,
                    const ParkConfig& cfg, const ShiftModel& model,
                    const SolverConfig& sc) {
    const std::size_t kk = cfg.hub_count();
    const std::size_t ii = cfg.user_count();

    SlotData s = s_in;
    if (sc.ablation == Ablation::NoRenewable)
        std::fill(s.r.begin(), s.r.end(), 0.0);
    const bool storage_on = sc.ablation != Ablation::NoStorage;

    SlotResult out;
    Dispatch& d = out.dispatch;
    d = Dispatch::zeros(cfg);

    // Announce one incentive price covering the forward window, then commit
    // the departures; the caller lands them through its arrival buffer.
    double price = 0.0;
    bool any_gamma = false;
    for (std::size_t i = 0; i < ii; ++i)
        any_gamma = any_gamma || model.gamma[i] > 0.0;
    if (sc.ablation != Ablation::NoIncentive && any_gamma && ctx.p_cap > 0.0) {
        std::vector<double> ua(ii), ub(ii);
        for (std::size_t i = 0; i < ii; ++i) {
            ua[i] = cfg.users[i].a;
            ub[i] = cfg.users[i].b;
        }
        try {
            price = window_incentive_price(s.x_il, ua, ub, model, ctx.p_cap);
        } catch (const DegenerateDenominator&) {
            price = 0.0;
        }
    }
    d.price = price;

    out.landings.assign(ii, std::vector<double>(model.window, 0.0));
    for (std::size_t i = 0; i < ii; ++i) {
        const double budget = model.eta * s.x_il[i];
        double moved = 0.0;
        for (int dd = 1; dd <= model.window; ++dd) {
            const double take =
                std::min(s.x_il[i] * shift_fraction(model, i, price, dd),
                         budget - moved);
            out.landings[i][dd - 1] = take;
            moved += take;
        }
        d.shifted_out[i] = moved;
        const double arr = i < ctx.arrivals.size() ? ctx.arrivals[i] : 0.0;
        d.il_served[i] = s.x_il[i] - moved + arr;
    }

    if (ii == 0 && s.h_load > 0.0)
        throw InvalidConfig("heat load needs at least one user to book against");
    for (std::size_t k = 0; k < kk; ++k)
        for (std::size_t i = 0; i < ii; ++i) {
            d.x_user[k][i][0] = cfg.users[i].hub_weight[k] * d.il_served[i];
            // Fixed heat demand booked evenly; only the hub total matters.
            d.x_user[k][i][1] =
                cfg.heat_share[k] * s.h_load / static_cast<double>(ii);
        }

    // Fast loop: momentum combine, broadcast, agents solve, gradient step.
    auto tau = ds->tau;
    auto tau_prev = ds->tau_prev;
    std::vector<std::array<double, kEnergyCount>> tau_bar(kk);
    double theta = 1.0, theta_prev = 1.0;
    const bool fast = sc.mode == Mode::Fast;

    int iters = 0;
    bool converged = false;
    for (int n = 1; n <= sc.minislot_cap; ++n) {
        iters = n;
        if (fast) {
            const double theta_next = theta_update(theta);
            for (std::size_t k = 0; k < kk; ++k)
                for (int e = 0; e < kEnergyCount; ++e)
                    tau_bar[k][e] = momentum_combine(
                        tau[k][e], tau_prev[k][e], theta_next, theta);
            theta_prev = theta;
            theta = theta_next;
        } else {
            tau_bar = tau;
        }

        for (std::size_t k = 0; k < kk; ++k) {
            HubSubproblemInput in;
            in.hub = cfg.hubs[k];
            in.p_e = s.p_e;
            in.p_g = s.p_g;
            in.p_o = s.p_o;
            in.lambda_e = ds->lambda_e[k];
            in.lambda_h = ds->lambda_h[k];
            in.tau_e = tau_bar[k][0];
            in.tau_h = tau_bar[k][1];
            in.renewable = s.r[k];
            in.e_buy_cap = cfg.shares[k].e_buy;
            in.e_sell_cap = cfg.shares[k].e_sell;
            in.gas_cap = cfg.shares[k].gas;
            in.x_max_e = cfg.x_max[k][0];
            in.x_max_h = cfg.x_max[k][1];
            in.storage_enabled = storage_on;
            d.hub[k] = solve_hub_subproblem(in).d;
            for (std::size_t q = 0; q < cfg.elastic_count(k); ++q)
                for (int e = 0; e < kEnergyCount; ++e) {
                    const auto& el = cfg.elastic[k][q][e];
                    d.x_el[k][q][e] = solve_user_subproblem(
                        tau_bar[k][e], el.a, el.b, el.x_max);
                }
        }

        // Accept only when both the iterate change and the step the gradient
        // alone would take are inside tolerance; the momentum term can cancel
        // a live gradient, and a live gradient is a live balance residual.
        double diff = 0.0;
        for (std::size_t k = 0; k < kk; ++k)
            for (int e = 0; e < kEnergyCount; ++e) {
                const double g =
                    tau_gradient(d, s, cfg, k, static_cast<Energy>(e));
                const double next = tau_bar[k][e] + sc.sigma * g;
                diff = std::max(diff, std::abs(next - tau[k][e]));
                diff = std::max(diff, sc.sigma * std::abs(g));
                tau_prev[k][e] = tau[k][e];
                tau[k][e] = next;
            }
        ds->minislot++;
        if (diff < sc.tol) {
            converged = true;
            break;
        }
    }
    out.iterations = iters;
    out.converged = converged;

    // Physical storage clipping; the busbar projection below re-closes the
    // balance afterwards.
    if (ctx.storage && storage_on) {
        for (std::size_t k = 0; k < kk; ++k) {
            auto& hd = d.hub[k];
            const auto& h = cfg.hubs[k];
            hd.c_e = std::min(
                hd.c_e, std::max(0.0, (h.b_max - ctx.storage->b[k]) / h.eta_ce));
            hd.d_e = std::min(
                hd.d_e,
                std::max(0.0, (ctx.storage->b[k] - h.b_min) * h.eta_de));
            hd.c_h = std::min(
                hd.c_h, std::max(0.0, (h.w_max - ctx.storage->w[k]) / h.eta_ch));
            hd.d_h = std::min(
                hd.d_h,
                std::max(0.0, (ctx.storage->w[k] - h.w_min) * h.eta_dh));
        }
    }

    double worst = 0.0;
    project_balance(&d, s, cfg, &worst);
    out.projection_residual = worst;

    // Storage threshold conformance on the final dispatch. Clipping to the
    // physical window is not a rule exit, so compare against the clipped
    // allowance rather than the raw cap.
    if (storage_on) {
        for (std::size_t k = 0; k < kk; ++k) {
            const auto& hd = d.hub[k];
            const auto& h = cfg.hubs[k];
            double ce = h.c_e_max, de = h.d_e_max;
            double chh = h.c_h_max, dh = h.d_h_max;
            if (ctx.storage) {
                ce = std::min(ce, std::max(0.0, (h.b_max - ctx.storage->b[k]) /
                                                    h.eta_ce));
                de = std::min(de, std::max(0.0, (ctx.storage->b[k] - h.b_min) *
                                                    h.eta_de));
                chh = std::min(chh, std::max(0.0, (h.w_max - ctx.storage->w[k]) /
                                                      h.eta_ch));
                dh = std::min(dh, std::max(0.0, (ctx.storage->w[k] - h.w_min) *
                                                    h.eta_dh));
            }
            if (ds->lambda_e[k] > -s.p_o + 1e-9 && hd.d_e < de - 1e-9)
                out.threshold_violations++;
            if (ds->lambda_e[k] < -s.p_e - 1e-9 && hd.c_e < ce - 1e-9)
                out.threshold_violations++;
            if (ds->lambda_h[k] > 1e-9 && hd.d_h < dh - 1e-9)
                out.threshold_violations++;
            if (ds->lambda_h[k] < -1e-9 && hd.c_h < chh - 1e-9)
                out.threshold_violations++;
        }
    }

    update_lambda(ds, d);
    ds->tau = tau;
    ds->tau_prev = tau;
    ds->theta = theta;
    ds->theta_prev = theta_prev;

    out.cost = slot_cost(d, s_in, cfg);
    return out;
}

HorizonResult run_horizon(const ScenarioSeries& series, const ParkConfig& cfg,
                          const SolverConfig& solver) {
    cfg.validate();
    series.validate();
    const std::size_t tt = series.size();
    const std::size_t kk = cfg.hub_count();
    const std::size_t ii = cfg.user_count();

    HorizonResult hr;
    hr.final_storage = initial_storage(cfg);
    if (tt == 0) return hr;

    if (!series.r.empty() && series.r[0].size() != kk)
        throw SchemaError("renewable columns do not match the hub count");
    if (!series.x_il.empty() && series.x_il[0].size() != ii)
        throw SchemaError("demand columns do not match the user count");
    if (series.max_p_e() > cfg.p_e_cap + 1e-9)
        throw InvalidConfig("scenario purchase price exceeds the declared envelope");
    if (series.min_p_o() < cfg.p_o_floor - 1e-9)
        throw InvalidConfig("scenario sale price undercuts the declared floor");

    const double rho =
        solver.rho ? *solver.rho : rho_min(cfg, cfg.p_e_cap, cfg.p_o_floor);
    DualState ds = init_lambda(cfg, rho, initial_storage(cfg), series.p_e[0]);
    ds.sigma = solver.sigma;
    StorageState st = initial_storage(cfg);
    const ShiftModel model = shift_model_from(cfg);
    const int w1 = cfg.shift_window + 1;
    std::vector<std::vector<double>> ring(w1, std::vector<double>(ii, 0.0));

    double iter_sum = 0.0;
    hr.rows.reserve(tt);
    for (std::size_t t = 0; t < tt; ++t) {
        const SlotData s = series.slot(t);
        SlotContext ctx;
        ctx.arrivals = ring[t % w1];
        ctx.p_cap = cfg.p_e_cap;
        ctx.storage = &st;
        SlotResult res = run_slot(&ds, s, ctx, cfg, model, solver);
        std::fill(ring[t % w1].begin(), ring[t % w1].end(), 0.0);
        for (std::size_t i = 0; i < ii; ++i)
            for (int dd = 1; dd <= model.window; ++dd)
                if (t + dd < tt)
                    ring[(t + dd) % w1][i] += res.landings[i][dd - 1];

        const Dispatch& d = res.dispatch;
        for (std::size_t k = 0; k < kk; ++k) {
            st.b[k] = step_battery(st.b[k], d.hub[k].c_e, d.hub[k].d_e,
                                   cfg.hubs[k]);
            st.w[k] = step_tank(st.w[k], d.hub[k].c_h, d.hub[k].d_h,
                                cfg.hubs[k]);
        }

        hr.flagged_slots += res.converged ? 0 : 1;
        hr.threshold_violations += res.threshold_violations;
        if (res.projection_residual > 1e-7) hr.feasibility_failures++;
        for (std::size_t k = 0; k < kk; ++k) {
            const auto& h = cfg.hubs[k];
            if (!lambda_interval_e(h, rho, cfg.p_e_cap)
                     .contains(ds.lambda_e[k]))
                hr.lemma2_violations++;
            if (!lambda_interval_h(h, rho).contains(ds.lambda_h[k]))
                hr.lemma2_violations++;
            const double bi =
                (ds.lambda_e[k] + cfg.p_e_cap) / rho + h.b_min + h.d_e_max;
            const double wi = ds.lambda_h[k] / rho + h.w_min + h.d_h_max;
            if (bi < h.b_min - 1e-9 || bi > h.b_max + 1e-9) hr.soc_violations++;
            if (wi < h.w_min - 1e-9 || wi > h.w_max + 1e-9) hr.soc_violations++;
        }

        TrajectoryRow row;
        row.t = static_cast<std::int64_t>(t);
        row.cost = res.cost;
        row.iterations = res.iterations;
        row.converged = res.converged;
        row.lambda_e = ds.lambda_e;
        row.lambda_h = ds.lambda_h;
        row.b = st.b;
        row.w = st.w;
        row.e = d.park_e();
        row.g = d.hub_gas() + s.g_load;
        row.e_o = d.park_e_o();
        row.price = d.price;
        hr.rows.push_back(std::move(row));

        hr.total_cost += res.cost;
        iter_sum += res.iterations;
    }
    hr.mean_iterations = iter_sum / static_cast<double>(tt);
    hr.final_storage = st;
    return hr;
}

} // namespace parkopt
