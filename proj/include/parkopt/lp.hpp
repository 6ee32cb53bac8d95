#pragma once

// Dense bounded-variable simplex for the per-hub dispatch subproblem.
// Problems here are tiny (<= 10 structural variables, <= 3 coupling rows),
// so the solver favours exactness and determinism over sparse machinery:
// Bland's rule throughout, basic values recomputed from scratch each pivot,
// and a fixed lexicographic cost perturbation so ties resolve the same way
// on every run (less trade, then less storage cycling, then less gas).

#include <vector>

#include "parkopt/errors.hpp"
#include "parkopt/park.hpp"

namespace parkopt {

// min cost.x  s.t.  lo <= x <= hi,  row_lo <= rows.x <= row_hi.
struct BoundedLp {
    std::vector<double> cost, lo, hi;
    std::vector<std::vector<double>> rows;
    std::vector<double> row_lo, row_hi;
    // Initial bound for each structural nonbasic (false = lower). The solver
    // repairs an infeasible start, but a feasible one avoids the repair pass.
    std::vector<bool> start_at_upper;
};

struct LpSolution {
    std::vector<double> x;
    std::vector<double> row_activity;
    std::vector<double> row_dual; // multipliers of the coupling rows
    double objective = 0.0;       // unperturbed cost at the solution
    int iterations = 0;
};

// Throws UnboundedProblem, InfeasibleProblem, or NotConverged (pivot cap).
LpSolution solve_bounded_lp(const BoundedLp& lp);

// --- hub dispatch subproblem ----------------------------------------------

struct HubSubproblemInput {
    HubParams hub;
    double p_e = 0.0, p_g = 0.0, p_o = 0.0;
    double lambda_e = 0.0, lambda_h = 0.0; // storage shadow prices
    double tau_e = 0.0, tau_h = 0.0;       // busbar clearing prices
    double renewable = 0.0;
    double e_buy_cap = 0.0, e_sell_cap = 0.0, gas_cap = 0.0;
    double x_max_e = 0.0, x_max_h = 0.0;
    bool storage_enabled = true;
};

struct HubSubproblemResult {
    HubDispatch d;
    double x_e = 0.0, x_h = 0.0; // busbar supplies
    // cost.x at the optimum; the constant -tau_e * renewable is excluded.
    double objective = 0.0;
    int iterations = 0;
};

// Exact minimiser of the hub's slot cost given prices (p_e, p_g, p_o),
// storage shadow prices and busbar prices. Spill variables make the
// subproblem feasible for any renewable infeed.
HubSubproblemResult solve_hub_subproblem(const HubSubproblemInput& in);

// Assembles the LP that solve_hub_subproblem solves; exposed so tests can
// cross-check the simplex against an independent enumeration.
BoundedLp build_hub_lp(const HubSubproblemInput& in);

} // namespace parkopt
