#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "parkopt/lp.hpp"
#include "parkopt/rng.hpp"

using namespace parkopt;
using testing::desk_hub;

namespace {

// Independent optimality certificate: primal feasibility plus the sign
// pattern of reduced costs against the reported row duals. For a linear
// program this is necessary and sufficient, so it never agrees with a
// wrong answer.
void check_kkt(const BoundedLp& lp, const LpSolution& s, double tol = 1e-7) {
    const std::size_t n = lp.cost.size();
    const std::size_t m = lp.rows.size();
    for (std::size_t j = 0; j < n; ++j) {
        CHECK(s.x[j] >= lp.lo[j] - tol);
        CHECK(s.x[j] <= lp.hi[j] + tol);
    }
    for (std::size_t r = 0; r < m; ++r) {
        double act = 0;
        for (std::size_t j = 0; j < n; ++j) act += lp.rows[r][j] * s.x[j];
        CHECK(act == doctest::Approx(s.row_activity[r]).epsilon(1e-9));
        CHECK(act >= lp.row_lo[r] - tol);
        CHECK(act <= lp.row_hi[r] + tol);
        const bool at_lo = act <= lp.row_lo[r] + tol;
        const bool at_hi = act >= lp.row_hi[r] - tol;
        if (!at_lo && !at_hi) CHECK(std::abs(s.row_dual[r]) <= tol);
        if (at_lo && !at_hi) CHECK(s.row_dual[r] >= -tol);
        if (at_hi && !at_lo) CHECK(s.row_dual[r] <= tol);
    }
    for (std::size_t j = 0; j < n; ++j) {
        double rc = lp.cost[j];
        for (std::size_t r = 0; r < m; ++r) rc -= s.row_dual[r] * lp.rows[r][j];
        const bool at_lo = s.x[j] <= lp.lo[j] + tol;
        const bool at_hi = s.x[j] >= lp.hi[j] - tol;
        if (!at_lo && !at_hi) CHECK(std::abs(rc) <= tol);
        if (at_lo && !at_hi) CHECK(rc >= -tol);
        if (at_hi && !at_lo) CHECK(rc <= tol);
    }
}

} // namespace

TEST_CASE("box-only problems sit on the cheap bounds") {
    BoundedLp lp;
    lp.cost = {1.0, -2.0, 0.5};
    lp.lo = {-1.0, 0.0, 0.0};
    lp.hi = {2.0, 3.0, 1.0};
    const auto s = solve_bounded_lp(lp);
    CHECK(s.x[0] == doctest::Approx(-1.0));
    CHECK(s.x[1] == doctest::Approx(3.0));
    CHECK(s.x[2] == doctest::Approx(0.0));
    CHECK(s.objective == doctest::Approx(-7.0));
}

TEST_CASE("a coupling row forces the cheapest feasible mix") {
    // min x0 + 2 x1 over [0,1]^2 with x0 + x1 in [1.5, 2]: fill the cheap
    // variable first, top up with the expensive one.
    BoundedLp lp;
    lp.cost = {1.0, 2.0};
    lp.lo = {0.0, 0.0};
    lp.hi = {1.0, 1.0};
    lp.rows = {{1.0, 1.0}};
    lp.row_lo = {1.5};
    lp.row_hi = {2.0};
    const auto s = solve_bounded_lp(lp);
    CHECK(s.x[0] == doctest::Approx(1.0));
    CHECK(s.x[1] == doctest::Approx(0.5));
    CHECK(s.objective == doctest::Approx(2.0));
    check_kkt(lp, s);
}

TEST_CASE("repair pass recovers from an infeasible starting corner") {
    // Starting both variables at their upper bound puts the row at 4,
    // above its cap of 1; the solver must walk back before optimizing.
    BoundedLp lp;
    lp.cost = {-1.0, -1.0};
    lp.lo = {0.0, 0.0};
    lp.hi = {2.0, 2.0};
    lp.rows = {{1.0, 1.0}};
    lp.row_lo = {0.0};
    lp.row_hi = {1.0};
    lp.start_at_upper = {true, true};
    const auto s = solve_bounded_lp(lp);
    CHECK(s.row_activity[0] == doctest::Approx(1.0));
    CHECK(s.objective == doctest::Approx(-1.0));
    check_kkt(lp, s);
}

TEST_CASE("hopeless problems raise the right errors") {
    BoundedLp lp;
    lp.cost = {1.0};
    lp.lo = {2.0};
    lp.hi = {1.0};
    CHECK_THROWS_AS(solve_bounded_lp(lp), InfeasibleProblem);

    lp.lo = {0.0};
    lp.hi = {1.0};
    lp.rows = {{1.0}};
    lp.row_lo = {3.0};
    lp.row_hi = {4.0};
    CHECK_THROWS_AS(solve_bounded_lp(lp), InfeasibleProblem);

    BoundedLp ub;
    ub.cost = {-1.0};
    ub.lo = {0.0};
    ub.hi = {std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(solve_bounded_lp(ub), UnboundedProblem);
}

TEST_CASE("random instances satisfy the optimality conditions") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 3 + static_cast<std::size_t>(u01(rng) * 4);
        const std::size_t m = 1 + static_cast<std::size_t>(u01(rng) * 2);
        BoundedLp lp;
        lp.cost.resize(n);
        lp.lo.resize(n);
        lp.hi.resize(n);
        std::vector<double> x0(n);
        for (std::size_t j = 0; j < n; ++j) {
            lp.cost[j] = sample({-2.0, 2.0}, rng);
            lp.lo[j] = sample({-1.0, 0.0}, rng);
            lp.hi[j] = lp.lo[j] + sample({0.5, 2.0}, rng);
            x0[j] = lp.lo[j] + u01(rng) * (lp.hi[j] - lp.lo[j]);
        }
        lp.rows.assign(m, std::vector<double>(n));
        lp.row_lo.resize(m);
        lp.row_hi.resize(m);
        for (std::size_t r = 0; r < m; ++r) {
            double act = 0;
            for (std::size_t j = 0; j < n; ++j) {
                lp.rows[r][j] = sample({-1.0, 1.0}, rng);
                act += lp.rows[r][j] * x0[j];
            }
            // Bracket a known interior point so the instance is feasible.
            lp.row_lo[r] = act - sample({0.05, 1.5}, rng);
            lp.row_hi[r] = act + sample({0.05, 1.5}, rng);
        }
        const auto s = solve_bounded_lp(lp);
        check_kkt(lp, s);
    }
}

TEST_CASE("hub does nothing when every action loses money") {
    HubSubproblemInput in;
    in.hub = desk_hub();
    in.p_e = 1.0;
    in.p_g = 0.1;
    in.p_o = 0.0;
    in.e_buy_cap = 5.0;
    in.e_sell_cap = 5.0;
    in.gas_cap = 20.0;
    in.x_max_e = 15.0;
    in.x_max_h = 10.0;
    const auto r = solve_hub_subproblem(in);
    CHECK(std::abs(r.d.c_e) <= 1e-9);
    CHECK(std::abs(r.d.d_e) <= 1e-9);
    CHECK(std::abs(r.d.c_h) <= 1e-9);
    CHECK(std::abs(r.d.d_h) <= 1e-9);
    CHECK(std::abs(r.d.g_chp) <= 1e-9);
    CHECK(std::abs(r.d.g_b) <= 1e-9);
    CHECK(std::abs(r.d.e_buy) <= 1e-9);
    CHECK(std::abs(r.d.e_sell) <= 1e-9);
    CHECK(std::abs(r.x_e) <= 1e-9);
    CHECK(std::abs(r.x_h) <= 1e-9);
    CHECK(std::abs(r.objective) <= 1e-9);
}

TEST_CASE("surplus renewable flows to the busbar instead of being spilled") {
    HubSubproblemInput in;
    in.hub = desk_hub();
    in.p_e = 1.0;
    in.p_g = 0.1;
    in.p_o = 0.0;
    in.renewable = 2.0;
    in.e_buy_cap = 5.0;
    in.e_sell_cap = 5.0;
    in.gas_cap = 20.0;
    in.x_max_e = 15.0;
    in.x_max_h = 10.0;
    const auto r = solve_hub_subproblem(in);
    CHECK(r.d.spill_e == doctest::Approx(0.0));
    CHECK(r.x_e == doctest::Approx(2.0));
}

TEST_CASE("storage thresholds pin charge and discharge to their caps") {
    // Sample price/multiplier tuples in the regime where the threshold
    // argument is airtight: clearing price inside the market band so the
    // compensating trade is always available, and a running CHP keeping
    // heat spill strictly positive so the tank can trade against it.
    std::mt19937_64 rng(7);
    int n_de = 0, n_ce = 0, n_dh = 0, n_ch = 0;
    for (int trial = 0; trial < 200; ++trial) {
        HubSubproblemInput in;
        in.hub = desk_hub();
        in.p_e = sample({0.8, 1.5}, rng);
        in.p_o = sample({0.2, 0.6}, rng);
        in.p_g = sample({0.02, 0.12}, rng);
        in.tau_e = sample({std::max(in.p_o + 0.05, 0.8), in.p_e}, rng);
        in.tau_h = sample({-0.3, -0.01}, rng);
        in.lambda_e = sample({-2.5, 1.0}, rng);
        in.lambda_h = sample({-1.0, 1.0}, rng);
        in.e_buy_cap = 5.0;
        in.e_sell_cap = 5.0;
        in.gas_cap = 20.0;
        in.x_max_e = 15.0;
        in.x_max_h = 10.0;
        const auto r = solve_hub_subproblem(in);

        const double margin = 1e-3;
        if (in.lambda_e > -in.p_o + margin) {
            CHECK(r.d.d_e == doctest::Approx(in.hub.d_e_max).epsilon(1e-9));
            ++n_de;
        }
        if (in.lambda_e < -in.p_e - margin) {
            CHECK(r.d.c_e == doctest::Approx(in.hub.c_e_max).epsilon(1e-9));
            ++n_ce;
        }
        if (in.lambda_h > margin) {
            CHECK(r.d.d_h == doctest::Approx(in.hub.d_h_max).epsilon(1e-9));
            ++n_dh;
        }
        if (in.lambda_h < -margin) {
            CHECK(r.d.c_h == doctest::Approx(in.hub.c_h_max).epsilon(1e-9));
            ++n_ch;
        }
    }
    // Each branch must actually have been exercised.
    CHECK(n_de >= 30);
    CHECK(n_ce >= 30);
    CHECK(n_dh >= 30);
    CHECK(n_ch >= 30);
}

TEST_CASE("hub results stay inside every box for arbitrary multipliers") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        HubSubproblemInput in;
        in.hub = desk_hub();
        in.p_e = sample({0.5, 2.0}, rng);
        in.p_o = sample({0.0, 0.5}, rng);
        in.p_g = sample({0.02, 0.3}, rng);
        in.tau_e = sample({-1.0, 2.5}, rng);
        in.tau_h = sample({-1.0, 2.5}, rng);
        in.lambda_e = sample({-3.0, 3.0}, rng);
        in.lambda_h = sample({-3.0, 3.0}, rng);
        in.renewable = sample({0.0, 4.0}, rng);
        in.e_buy_cap = 5.0;
        in.e_sell_cap = 5.0;
        in.gas_cap = 20.0;
        in.x_max_e = 15.0;
        in.x_max_h = 10.0;
        const auto r = solve_hub_subproblem(in);
        const auto& d = r.d;
        const auto& h = in.hub;
        CHECK(d.c_e >= -1e-9);
        CHECK(d.c_e <= h.c_e_max + 1e-9);
        CHECK(d.d_e >= -1e-9);
        CHECK(d.d_e <= h.d_e_max + 1e-9);
        CHECK(d.c_h >= -1e-9);
        CHECK(d.c_h <= h.c_h_max + 1e-9);
        CHECK(d.d_h >= -1e-9);
        CHECK(d.d_h <= h.d_h_max + 1e-9);
        CHECK(d.g_chp >= -1e-9);
        CHECK(d.g_chp <= h.chp_gas_cap() + 1e-9);
        CHECK(d.g_b >= -1e-9);
        CHECK(d.g_b <= h.boiler_gas_cap() + 1e-9);
        CHECK(d.e_buy <= in.e_buy_cap + 1e-9);
        CHECK(d.e_sell <= in.e_sell_cap + 1e-9);
        CHECK(d.spill_e <= in.renewable + 1e-9);
        // Busbar identities and caps.
        CHECK(r.x_e ==
              doctest::Approx(d.supply(Energy::Electric, h, in.renewable))
                  .epsilon(1e-9));
        CHECK(r.x_h ==
              doctest::Approx(d.supply(Energy::Heat, h, 0.0)).epsilon(1e-9));
        CHECK(r.x_e >= -1e-7);
        CHECK(r.x_e <= in.x_max_e + 1e-7);
        CHECK(r.x_h >= -1e-7);
        CHECK(r.x_h <= in.x_max_h + 1e-7);
    }
}

TEST_CASE("disabling storage freezes all four storage variables") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        HubSubproblemInput in;
        in.hub = desk_hub();
        in.p_e = 1.0;
        in.p_g = 0.05;
        in.p_o = 0.3;
        in.tau_e = sample({0.8, 1.0}, rng);
        in.tau_h = sample({-0.2, 0.5}, rng);
        in.lambda_e = sample({-2.0, 1.0}, rng);
        in.lambda_h = sample({-1.0, 1.0}, rng);
        in.e_buy_cap = 5.0;
        in.e_sell_cap = 5.0;
        in.gas_cap = 20.0;
        in.x_max_e = 15.0;
        in.x_max_h = 10.0;
        in.storage_enabled = false;
        const auto r = solve_hub_subproblem(in);
        CHECK(r.d.c_e == 0.0);
        CHECK(r.d.d_e == 0.0);
        CHECK(r.d.c_h == 0.0);
        CHECK(r.d.d_h == 0.0);
    }
}
