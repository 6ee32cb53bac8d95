#include "parkopt/lp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace parkopt {

namespace {

constexpr double kOptTol = 1e-12;   // reduced-cost optimality threshold
constexpr double kFeasTol = 1e-9;   // bound feasibility slack
constexpr int kPivotCap = 500;

// Columns are the structural columns of `rows` followed by -I slack columns;
// basic values always satisfy A x = 0 exactly up to solve error.
struct Tableau {
    int n = 0, m = 0, total = 0;
    const BoundedLp* lp = nullptr;
    std::vector<double> lo, hi;      // per augmented column
    std::vector<double> cost;        // perturbed costs, slacks zero
    std::vector<int> basis;          // m column indices
    std::vector<bool> at_upper;      // nonbasic bound flags
    std::vector<bool> is_basic;
    std::vector<double> value;       // current value of every column

    double col(int j, int row) const {
        if (j < n) return (*lp).rows[row][j];
        return j - n == row ? -1.0 : 0.0;
    }

    // Solve B z = rhs by Gaussian elimination with partial pivoting.
    void solve_basis(const double* rhs, double* z, bool transpose) const {
        double a[9];
        double b[3];
        for (int r = 0; r < m; ++r) {
            b[r] = rhs[r];
            for (int c = 0; c < m; ++c) {
                const double v = col(basis[c], r);
                a[transpose ? c * m + r : r * m + c] = v;
            }
        }
        int perm[3] = {0, 1, 2};
        for (int k = 0; k < m; ++k) {
            int p = k;
            for (int r = k + 1; r < m; ++r)
                if (std::abs(a[perm[r] * m + k]) > std::abs(a[perm[p] * m + k]))
                    p = r;
            std::swap(perm[k], perm[p]);
            const double piv = a[perm[k] * m + k];
            if (std::abs(piv) < 1e-13) throw NotConverged("singular LP basis");
            for (int r = k + 1; r < m; ++r) {
                const double f = a[perm[r] * m + k] / piv;
                for (int c = k; c < m; ++c) a[perm[r] * m + c] -= f * a[perm[k] * m + c];
                b[perm[r]] -= f * b[perm[k]];
            }
        }
        for (int k = m - 1; k >= 0; --k) {
            double s = b[perm[k]];
            for (int c = k + 1; c < m; ++c) s -= a[perm[k] * m + c] * z[c];
            z[k] = s / a[perm[k] * m + k];
        }
    }

    // Recompute basic values exactly from the nonbasic assignment.
    void refresh_basics() {
        double rhs[3] = {0, 0, 0};
        for (int j = 0; j < total; ++j) {
            if (is_basic[j]) continue;
            value[j] = at_upper[j] ? hi[j] : lo[j];
            for (int r = 0; r < m; ++r) rhs[r] -= col(j, r) * value[j];
        }
        double z[3];
        solve_basis(rhs, z, false);
        for (int r = 0; r < m; ++r) value[basis[r]] = z[r];
    }

    // One simplex pass for the given cost vector. Returns false when no
    // improving column exists (optimal for that cost).
    bool pivot_to_optimum(const std::vector<double>& c, int* pivots) {
        while (true) {
            if (++*pivots > kPivotCap) throw NotConverged("LP pivot cap hit");
            double cb[3], y[3];
            for (int r = 0; r < m; ++r) cb[r] = c[basis[r]];
            solve_basis(cb, y, true);
            int enter = -1;
            int dir = 0;
            for (int j = 0; j < total; ++j) {
                if (is_basic[j]) continue;
                if (hi[j] - lo[j] < kFeasTol) continue; // fixed column
                double rc = c[j];
                for (int r = 0; r < m; ++r) rc -= y[r] * col(j, r);
                if (!at_upper[j] && rc < -kOptTol) { enter = j; dir = +1; break; }
                if (at_upper[j] && rc > kOptTol) { enter = j; dir = -1; break; }
            }
            if (enter < 0) return false;

            double w[3], ecol[3];
            for (int r = 0; r < m; ++r) ecol[r] = col(enter, r);
            solve_basis(ecol, w, false);

            double step = hi[enter] - lo[enter];
            int leave = -1; // index into basis; -1 means bound flip
            int leave_to_upper = 0;
            for (int r = 0; r < m; ++r) {
                const double rate = -dir * w[r]; // d(value[basis[r]])/d(step)
                if (rate < -1e-12) {
                    const double room = value[basis[r]] - lo[basis[r]];
                    const double lim = room / -rate;
                    if (lim < step - 1e-12 ||
                        (lim < step + 1e-12 && (leave < 0 || basis[r] < basis[leave]))) {
                        step = std::max(lim, 0.0);
                        leave = r;
                        leave_to_upper = 0;
                    }
                } else if (rate > 1e-12) {
                    const double room = hi[basis[r]] - value[basis[r]];
                    const double lim = room / rate;
                    if (lim < step - 1e-12 ||
                        (lim < step + 1e-12 && (leave < 0 || basis[r] < basis[leave]))) {
                        step = std::max(lim, 0.0);
                        leave = r;
                        leave_to_upper = 1;
                    }
                }
            }
            if (!std::isfinite(step))
                throw UnboundedProblem("LP is unbounded along a column");

            if (leave < 0) {
                at_upper[enter] = dir > 0;
                refresh_basics();
                continue;
            }
            const int out = basis[leave];
            is_basic[out] = false;
            at_upper[out] = leave_to_upper;
            is_basic[enter] = true;
            basis[leave] = enter;
            at_upper[enter] = false;
            // The new basis plus nonbasic bounds determine the iterate; the
            // ratio limit guarantees the recomputed point stays feasible.
            refresh_basics();
        }
    }
};

} // namespace

LpSolution solve_bounded_lp(const BoundedLp& lp) {
    const int n = static_cast<int>(lp.cost.size());
    const int m = static_cast<int>(lp.rows.size());
    if (m > 3) throw InvalidConfig("LP solver supports at most 3 coupling rows");

    Tableau t;
    t.n = n;
    t.m = m;
    t.total = n + m;
    t.lp = &lp;
    t.lo = lp.lo;
    t.hi = lp.hi;
    t.lo.insert(t.lo.end(), lp.row_lo.begin(), lp.row_lo.end());
    t.hi.insert(t.hi.end(), lp.row_hi.begin(), lp.row_hi.end());
    for (int j = 0; j < t.total; ++j)
        if (t.lo[j] > t.hi[j] + kFeasTol)
            throw InfeasibleProblem("empty variable or row interval");
    t.cost = lp.cost;
    t.cost.resize(t.total, 0.0);
    t.basis.resize(m);
    for (int r = 0; r < m; ++r) t.basis[r] = n + r;
    t.is_basic.assign(t.total, false);
    for (int r = 0; r < m; ++r) t.is_basic[n + r] = true;
    t.at_upper.assign(t.total, false);
    for (int j = 0; j < n && j < static_cast<int>(lp.start_at_upper.size()); ++j)
        t.at_upper[j] = lp.start_at_upper[j];
    t.value.assign(t.total, 0.0);
    t.refresh_basics();

    int pivots = 0;

    // Repair pass: drive slack values back inside their true bounds if the
    // caller's starting assignment violates a coupling row.
    const std::vector<double> true_lo = t.lo;
    const std::vector<double> true_hi = t.hi;
    for (int round = 0; round < 4; ++round) {
        std::vector<double> phase1(t.total, 0.0);
        bool violated = false;
        for (int r = 0; r < m; ++r) {
            const int s = n + r;
            if (t.value[s] > true_hi[s] + kFeasTol) {
                phase1[s] = 1.0;
                t.hi[s] = t.value[s];
                violated = true;
            } else if (t.value[s] < true_lo[s] - kFeasTol) {
                phase1[s] = -1.0;
                t.lo[s] = t.value[s];
                violated = true;
            }
        }
        if (!violated) break;
        t.pivot_to_optimum(phase1, &pivots);
        t.lo = true_lo;
        t.hi = true_hi;
        double worst = 0.0;
        for (int r = 0; r < m; ++r) {
            const int s = n + r;
            worst = std::max({worst, t.value[s] - true_hi[s], true_lo[s] - t.value[s]});
        }
        if (worst <= kFeasTol) {
            // Nonbasic slacks may sit on a widened bound; snap them back.
            for (int r = 0; r < m; ++r) {
                const int s = n + r;
                if (!t.is_basic[s])
                    t.at_upper[s] = std::abs(t.value[s] - true_hi[s]) <
                                    std::abs(t.value[s] - true_lo[s]);
            }
            t.refresh_basics();
            break;
        }
        if (round == 3) throw InfeasibleProblem("coupling rows admit no feasible point");
    }

    t.pivot_to_optimum(t.cost, &pivots);

    LpSolution sol;
    sol.x.assign(t.value.begin(), t.value.begin() + n);
    sol.row_activity.resize(m);
    for (int r = 0; r < m; ++r) sol.row_activity[r] = t.value[n + r];
    double cb[3], y[3] = {0, 0, 0};
    for (int r = 0; r < m; ++r) cb[r] = t.cost[t.basis[r]];
    if (m > 0) t.solve_basis(cb, y, true);
    sol.row_dual.assign(y, y + m);
    sol.objective = 0.0;
    for (int j = 0; j < n; ++j) sol.objective += lp.cost[j] * sol.x[j];
    sol.iterations = pivots;
    return sol;
}

// Variable order: c_e, d_e, c_h, d_h, g_chp, g_b, e_buy, e_sell, spill_e,
// spill_h. Rows: electric busbar, heat busbar, and (only when it can bind)
// the hub's gas share.
BoundedLp build_hub_lp(const HubSubproblemInput& in) {
    const HubParams& h = in.hub;
    const double en = in.storage_enabled ? 1.0 : 0.0;
    const double gc = h.chp_gas_cap();
    const double gb = h.boiler_gas_cap();
    const double spill_h_ub = h.eta_hg * gc + h.h_b_max + h.d_h_max;

    BoundedLp lp;
    lp.lo.assign(10, 0.0);
    lp.hi = {h.c_e_max * en, h.d_e_max * en, h.c_h_max * en, h.d_h_max * en,
             gc,             gb,             in.e_buy_cap,   in.e_sell_cap,
             in.renewable,   spill_h_ub};
    // Tie-break perturbations: deterministic and ordered so the solver
    // prefers less grid trade, then less storage cycling, then less gas,
    // then less spill. Every tier sits above the simplex reduced-cost
    // threshold, or the tie-break would be invisible to the pivot rule.
    const double pt = 1e-8, ps = 1e-9, pg = 1e-10, px = 1e-11;
    lp.cost = {in.lambda_e + in.tau_e + ps,
               -in.lambda_e - in.tau_e + ps,
               in.lambda_h + in.tau_h + ps,
               -in.lambda_h - in.tau_h + ps,
               in.p_g - in.tau_e * h.eta_pg - in.tau_h * h.eta_hg + pg,
               in.p_g - in.tau_h * h.eta_bg + pg,
               in.p_e - in.tau_e + pt,
               -in.p_o + in.tau_e + pt,
               in.tau_e + px,
               in.tau_h + px};
    lp.rows = {
        {-1, 1, 0, 0, h.eta_pg, 0, 1, -1, -1, 0},
        {0, 0, -1, 1, h.eta_hg, h.eta_bg, 0, 0, 0, -1},
    };
    lp.row_lo = {-in.renewable, 0.0};
    lp.row_hi = {in.x_max_e - in.renewable, in.x_max_h};
    if (gc + gb > in.gas_cap) {
        lp.rows.push_back({0, 0, 0, 0, 1, 1, 0, 0, 0, 0});
        lp.row_lo.push_back(0.0);
        lp.row_hi.push_back(in.gas_cap);
    }
    // Starting with all surplus curtailed keeps the busbar rows feasible for
    // any renewable infeed, so the repair pass never runs.
    lp.start_at_upper.assign(10, false);
    lp.start_at_upper[8] = true;
    return lp;
}

HubSubproblemResult solve_hub_subproblem(const HubSubproblemInput& in) {
    const BoundedLp lp = build_hub_lp(in);
    LpSolution s = solve_bounded_lp(lp);

    HubSubproblemResult out;
    out.d.c_e = s.x[0];
    out.d.d_e = s.x[1];
    out.d.c_h = s.x[2];
    out.d.d_h = s.x[3];
    out.d.g_chp = s.x[4];
    out.d.g_b = s.x[5];
    out.d.e_buy = s.x[6];
    out.d.e_sell = s.x[7];
    out.d.spill_e = s.x[8];
    out.d.spill_h = s.x[9];
    out.x_e = s.row_activity[0] + in.renewable;
    out.x_h = s.row_activity[1];
    // Report the economic objective without the tie-break perturbation.
    out.objective = out.d.c_e * (in.lambda_e + in.tau_e) +
                    out.d.d_e * (-in.lambda_e - in.tau_e) +
                    out.d.c_h * (in.lambda_h + in.tau_h) +
                    out.d.d_h * (-in.lambda_h - in.tau_h) +
                    out.d.g_chp * (in.p_g - in.tau_e * in.hub.eta_pg -
                                   in.tau_h * in.hub.eta_hg) +
                    out.d.g_b * (in.p_g - in.tau_h * in.hub.eta_bg) +
                    out.d.e_buy * (in.p_e - in.tau_e) +
                    out.d.e_sell * (-in.p_o + in.tau_e) +
                    out.d.spill_e * in.tau_e + out.d.spill_h * in.tau_h;
    out.iterations = s.iterations;
    return out;
}

} // namespace parkopt
