#pragma once

// Two-timescale scheduler: slow stochastic dual updates on the storage
// multipliers (one step per slot) and a fast momentum-accelerated dual
// iteration on the per-hub busbar prices within each slot.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "parkopt/incentive.hpp"
#include "parkopt/lp.hpp"
#include "parkopt/park.hpp"

namespace parkopt {

enum class Mode { Fast, Plain };
enum class Ablation { Full, NoStorage, NoRenewable, NoIncentive };

struct SolverConfig {
    double sigma = 0.2;         // fast-timescale stepsize
    double tol = 0.01;          // stop threshold on successive tau iterates
    int minislot_cap = 200;     // fast iterations per slot before flagging
    std::optional<double> rho;  // slow stepsize; empty = smallest admissible
    Mode mode = Mode::Fast;
    Ablation ablation = Ablation::Full;
};

struct DualState {
    std::vector<double> lambda_e, lambda_h;          // per hub
    std::vector<std::array<double, kEnergyCount>> tau, tau_prev;
    double theta = 1.0, theta_prev = 1.0;
    double rho = 0.0;
    double sigma = 0.2;
    std::int64_t slot = 0;
    std::int64_t minislot = 0;
};

struct LambdaInterval {
    double lo = 0.0, hi = 0.0;
    bool contains(double v, double tol = 1e-9) const {
        return v >= lo - tol && v <= hi + tol;
    }
};

// Smallest slow stepsize for which the multiplier intervals close; the
// envelope prices (p_e_max, p_o_min) must cover every scenario price.
double rho_min(const ParkConfig& cfg, double p_e_max, double p_o_min);

// Multiplier start making the storage level / multiplier bijection hold
// from the first slot.
DualState init_lambda(const ParkConfig& cfg, double rho,
                      const StorageState& s0, double p_e_0);

// One slow step per storage: lambda += rho * (charge - discharge).
void update_lambda(DualState* ds, const Dispatch& d);

// Inverse of the multiplier map; throws InvariantBroken if the implied
// fill level leaves the capacity window.
StorageState soc_from_lambda(const DualState& ds, const ParkConfig& cfg);

LambdaInterval lambda_interval_e(const HubParams& h, double rho,
                                 double p_e_max);
LambdaInterval lambda_interval_h(const HubParams& h, double rho);

// Momentum scalar recursion; theta(0) = 1 and theta(n) >= (n+2)/2.
double theta_update(double theta_prev);

// tau_bar = (1-eps) tau + eps tau_prev with eps = (1-theta_prev)/theta.
double momentum_combine(double tau, double tau_prev, double theta,
                        double theta_prev);

// Demand minus busbar supply for one hub and energy: the fast dual ascent
// direction (and the balance residual with its sign flipped).
double tau_gradient(const Dispatch& d, const SlotData& s,
                    const ParkConfig& cfg, std::size_t k, Energy e);

// argmin of tau*x - (a x^2 + b x) over [0, bound], a < 0.
double solve_user_subproblem(double tau, double a, double b, double bound);

// Realized slot cost: grid purchases plus gas minus sales, plus incentive
// payments net of the served-demand utilities.
double slot_cost(const Dispatch& d, const SlotData& s, const ParkConfig& cfg);

// Theorem-style optimality-gap bound rho * F for the slow timescale.
double gap_bound(double rho, const ParkConfig& cfg);

ShiftModel shift_model_from(const ParkConfig& cfg);

struct SlotContext {
    std::vector<double> arrivals;            // per user, MWh landing now
    double p_cap = 0.0;                      // announced-price ceiling
    const StorageState* storage = nullptr;   // enables physical clipping
};

struct SlotResult {
    Dispatch dispatch;
    int iterations = 0;
    bool converged = true;
    double cost = 0.0;
    // Residual left after projection; nonzero only when every slack path
    // saturated (counts as a feasibility failure upstream).
    double projection_residual = 0.0;
    // landings[i][d-1]: MWh user i moved to slot t+d. The horizon loop
    // feeds these back as arrivals.
    std::vector<std::vector<double>> landings;
    int threshold_violations = 0;
};

// One slot of the online algorithm: fast dual loop to tolerance or cap,
// residual projection onto exact balance, optional storage clipping, then
// a single slow multiplier step. tau warm-starts the next slot.
SlotResult run_slot(DualState* ds, const SlotData& s, const SlotContext& ctx,
                    const ParkConfig& cfg, const ShiftModel& model,
                    const SolverConfig& sc);

struct TrajectoryRow {
    std::int64_t t = 0;
    double cost = 0.0;
    int iterations = 0;
    bool converged = true;
    std::vector<double> lambda_e, lambda_h, b, w;
    double e = 0.0, g = 0.0, e_o = 0.0, price = 0.0;
};

struct HorizonResult {
    std::vector<TrajectoryRow> rows;
    double total_cost = 0.0;
    double mean_iterations = 0.0;
    std::int64_t lemma2_violations = 0;   // multiplier interval exits
    std::int64_t soc_violations = 0;      // implied or physical level exits
    std::int64_t threshold_violations = 0; // storage threshold rule exits
    std::int64_t feasibility_failures = 0; // projection could not close
    std::int64_t flagged_slots = 0;        // mini-slot cap hits
    StorageState final_storage;
};

// Sequential slot loop with physical storage tracking, load-shift arrival
// bookkeeping, and per-slot invariant counting.
HorizonResult run_horizon(const ScenarioSeries& sc, const ParkConfig& cfg,
                          const SolverConfig& solver);

} // namespace parkopt
