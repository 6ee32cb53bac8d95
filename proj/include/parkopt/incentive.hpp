#pragma once

// Incentive-based load shifting: the per-user shifting-fraction model, the
// realized shift matrix and its recovery from aggregate demand deltas,
// willingness estimation, and the closed-form announced-price rule.

#include <cstddef>
#include <vector>

#include "parkopt/errors.hpp"

namespace parkopt {

// Per-user willingness parameters plus the global cap and window. A user
// moves fraction gamma*p/(d+1)^alpha of its flexible demand by d slots for
// announced price p, never exceeding `eta` in total.
struct ShiftModel {
    std::vector<double> alpha;
    std::vector<double> gamma;
    double eta = 0.15;
    int window = 4;

    std::size_t users() const { return alpha.size(); }
};

// A[t][t']: MWh moved from slot t to slot t'. Shifts are forward-only and
// confined to the window; row sums never exceed eta * X_IL(t).
struct ShiftMatrix {
    std::vector<std::vector<double>> a;
    std::size_t slots() const { return a.size(); }
};

// Raw fraction min(gamma_i * p / (d+1)^alpha_i, eta).
double shift_fraction(const ShiftModel& m, std::size_t user, double p, int d);

// Consumption-share weighted aggregate fraction; throws ShareMismatch when
// the shares do not sum to one.
double integral_shift(const ShiftModel& m, const std::vector<double>& beta,
                      double p, int d);

// MWh moved by delay d for price p; zero outside the forward window.
double shifted_amount(double x_il, double p, int d, const ShiftModel& m,
                      const std::vector<double>& beta);

// Realized matrix for a whole horizon: A[t][t+d] = X_IL(t) * R(p(t+d), d),
// with the per-row total capped at eta * X_IL(t) in delay order.
ShiftMatrix forward_shift_matrix(const ShiftModel& m,
                                 const std::vector<double>& beta,
                                 const std::vector<double>& x_il,
                                 const std::vector<double>& prices);

// Net demand change at slot t: arrivals minus departures.
double demand_delta(const ShiftMatrix& a, std::size_t t);

struct ShiftMatrixFit {
    ShiftMatrix matrix;
    std::vector<double> structure; // recovered per-delay factors S(1..W)
    double residual = 0.0;         // norm of the unexplained delta part
};

// Inverts the delta series under the parametrization
// A[t][t'] = X_IL(t) * p(t') * S(t'-t): linear least squares in S with a
// small ridge, nonnegativity by projection. Throws RankDeficient when the
// data cannot pin S down (widen the horizon).
ShiftMatrixFit solve_shift_matrix(const std::vector<double>& deltas,
                                  const std::vector<double>& prices,
                                  const std::vector<double>& x_il, int window);

// Recovers per-user (alpha, gamma) from a realized matrix. `beta` are the
// users' consumption shares; the amplitude is identified only as the
// product beta*gamma, so gamma is reported as that product divided by beta.
// Throws InsufficientData when fewer than two distinct delays are observed
// or the matrix carries no signal.
ShiftModel fit_shift_models(const ShiftMatrix& a,
                            const std::vector<double>& prices,
                            const std::vector<double>& x_il,
                            const std::vector<double>& beta, double eta = 0.15,
                            int window = 4);

// --- announced-price rule ---------------------------------------------------

// Closed-form announced price given per-user price slopes dr_i/dp. Falls
// back to a one-dimensional search of the exact capped objective when the
// cap binds at the closed-form optimum. Throws DegenerateDenominator when
// every slope is zero (no interior optimum exists).
double price_from_slopes(const std::vector<double>& x,
                         const std::vector<double>& a,
                         const std::vector<double>& b,
                         const std::vector<double>& slopes,
                         const ShiftModel& m, double p_cap);

// Price targeting a single destination d slots ahead: slopes are
// gamma_i/(d+1)^alpha_i.
double optimal_incentive_price(const std::vector<double>& x,
                               const std::vector<double>& a,
                               const std::vector<double>& b,
                               const ShiftModel& m, int d, double p_cap);

// One price covering the whole forward window: slopes are the per-user
// window sums. This is what the slot loop announces.
double window_incentive_price(const std::vector<double>& x,
                              const std::vector<double>& a,
                              const std::vector<double>& b,
                              const ShiftModel& m, double p_cap);

// The objective the price rule minimises (payments net of the announced
// utility terms), with caps applied; exposed for oracle cross-checks.
double price_objective(double p, const std::vector<double>& x,
                       const std::vector<double>& a,
                       const std::vector<double>& b,
                       const std::vector<double>& slopes, const ShiftModel& m);

// Derivative of the uncapped objective at p; the closed form is its root.
double price_foc_residual(double p, const std::vector<double>& x,
                          const std::vector<double>& a,
                          const std::vector<double>& b,
                          const std::vector<double>& slopes);

// Total payment: sum over destinations of price times shifted energy.
double incentive_cost(const std::vector<double>& prices,
                      const std::vector<double>& amounts);

} // namespace parkopt
