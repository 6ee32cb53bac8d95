#include "parkopt/incentive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parkopt/numeric.hpp"

namespace parkopt {

namespace {

double delay_factor(double alpha, int d) { return std::pow(d + 1.0, -alpha); }

void check_shares(const std::vector<double>& beta) {
    double s = 0.0;
    for (double b : beta) s += b;
    if (std::abs(s - 1.0) > 1e-9)
        throw ShareMismatch("consumption shares sum to " + std::to_string(s));
}

} // namespace

double shift_fraction(const ShiftModel& m, std::size_t user, double p, int d) {
    const double raw = m.gamma[user] * p * delay_factor(m.alpha[user], d);
    return std::min(raw, m.eta);
}

double integral_shift(const ShiftModel& m, const std::vector<double>& beta,
                      double p, int d) {
    check_shares(beta);
    double r = 0.0;
    for (std::size_t i = 0; i < m.users(); ++i)
        r += beta[i] * shift_fraction(m, i, p, d);
    return r;
}

double shifted_amount(double x_il, double p, int d, const ShiftModel& m,
                      const std::vector<double>& beta) {
    if (d < 1 || d > m.window) return 0.0;
    return x_il * integral_shift(m, beta, p, d);
}

ShiftMatrix forward_shift_matrix(const ShiftModel& m,
                                 const std::vector<double>& beta,
                                 const std::vector<double>& x_il,
                                 const std::vector<double>& prices) {
    const std::size_t t_count = x_il.size();
    ShiftMatrix out;
    out.a.assign(t_count, std::vector<double>(t_count, 0.0));
    for (std::size_t t = 0; t < t_count; ++t) {
        double budget = m.eta * x_il[t];
        for (int d = 1; d <= m.window && t + d < t_count; ++d) {
            const double want = shifted_amount(x_il[t], prices[t + d], d, m, beta);
            const double amt = std::min(want, budget);
            out.a[t][t + d] = amt;
            budget -= amt;
        }
    }
    return out;
}

double demand_delta(const ShiftMatrix& a, std::size_t t) {
    double j = 0.0;
    for (std::size_t s = 0; s < a.slots(); ++s) {
        if (s == t) continue;
        j += a.a[s][t] - a.a[t][s];
    }
    return j;
}

ShiftMatrixFit solve_shift_matrix(const std::vector<double>& deltas,
                                  const std::vector<double>& prices,
                                  const std::vector<double>& x_il, int window) {
    const int t_count = static_cast<int>(deltas.size());
    if (t_count < 2) throw RankDeficient("need at least two slots");
    const int w = window;
    // deltas are linear in the per-delay structure S: J = M S.
    std::vector<std::vector<double>> m_mat(t_count, std::vector<double>(w, 0.0));
    for (int t = 0; t < t_count; ++t)
        for (int d = 1; d <= w; ++d) {
            double v = 0.0;
            if (t - d >= 0) v += x_il[t - d] * prices[t];  // arrivals into t
            if (t + d < t_count) v -= x_il[t] * prices[t + d];  // departures
            m_mat[t][d - 1] = v;
        }
    std::vector<std::vector<double>> gram(w, std::vector<double>(w, 0.0));
    std::vector<double> rhs(w, 0.0);
    for (int t = 0; t < t_count; ++t)
        for (int i = 0; i < w; ++i) {
            rhs[i] += m_mat[t][i] * deltas[t];
            for (int j = 0; j <= i; ++j) gram[i][j] += m_mat[t][i] * m_mat[t][j];
        }
    for (int i = 0; i < w; ++i)
        for (int j = i + 1; j < w; ++j) gram[i][j] = gram[j][i];

    std::vector<double> s;
    if (!cholesky_solve(gram, rhs, &s, 1e-9))
        throw RankDeficient("delta system does not determine the shift structure");
    for (int i = 0; i < w; ++i) gram[i][i] += 1e-8; // ridge for the final solve
    if (!cholesky_solve(gram, rhs, &s))
        throw RankDeficient("regularized system still singular");
    for (double& v : s) v = std::max(v, 0.0);

    ShiftMatrixFit fit;
    fit.structure = s;
    fit.matrix.a.assign(t_count, std::vector<double>(t_count, 0.0));
    for (int t = 0; t < t_count; ++t)
        for (int d = 1; d <= w && t + d < t_count; ++d)
            fit.matrix.a[t][t + d] = x_il[t] * prices[t + d] * s[d - 1];
    double res = 0.0;
    for (int t = 0; t < t_count; ++t) {
        double pred = 0.0;
        for (int i = 0; i < w; ++i) pred += m_mat[t][i] * s[i];
        res += (deltas[t] - pred) * (deltas[t] - pred);
    }
    fit.residual = std::sqrt(res);
    return fit;
}

namespace {

// Per-delay response samples averaged over the horizon: the matrix entry
// divided by X_IL(t) * p(t') isolates sum_i beta_i gamma_i / (d+1)^alpha_i.
struct DelaySamples {
    std::vector<int> delay;
    std::vector<double> value;
    std::vector<double> weight;
};

DelaySamples collect_samples(const ShiftMatrix& a,
                             const std::vector<double>& prices,
                             const std::vector<double>& x_il, int window) {
    const std::size_t t_count = a.slots();
    std::vector<double> sum(window + 1, 0.0);
    std::vector<int> count(window + 1, 0);
    for (std::size_t t = 0; t < t_count; ++t)
        for (int d = 1; d <= window && t + d < t_count; ++d) {
            if (x_il[t] <= 1e-12 || prices[t + d] <= 1e-12) continue;
            sum[d] += a.a[t][t + d] / (x_il[t] * prices[t + d]);
            count[d] += 1;
        }
    DelaySamples s;
    for (int d = 1; d <= window; ++d)
        if (count[d] > 0) {
            s.delay.push_back(d);
            s.value.push_back(sum[d] / count[d]);
            s.weight.push_back(count[d]);
        }
    return s;
}

// Weighted line fit of ln(value) = c0 - alpha * ln(d+1).
bool log_linear_fit(const DelaySamples& s, double* amp, double* alpha) {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    int used = 0;
    for (std::size_t j = 0; j < s.delay.size(); ++j) {
        if (s.value[j] <= 0.0) continue;
        const double x = std::log(s.delay[j] + 1.0);
        const double y = std::log(s.value[j]);
        const double w = s.weight[j];
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
        ++used;
    }
    if (used < 2) return false;
    const double det = sw * sxx - sx * sx;
    if (std::abs(det) < 1e-14) return false;
    const double slope = (sw * sxy - sx * sy) / det;
    const double icept = (sxx * sy - sx * sxy) / det;
    *alpha = -slope;
    *amp = std::exp(icept);
    return true;
}

// Sum-of-power-laws model value(d) = sum_i u_i (d+1)^-alpha_i, fitted by
// Levenberg-Marquardt in log-parameters so positivity holds by construction.
struct PowerSumFit {
    std::vector<double> u, alpha;
    double residual = 0.0;
};

double power_sum_residual(const DelaySamples& s, const std::vector<double>& u,
                          const std::vector<double>& alpha) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < s.delay.size(); ++j) {
        double pred = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            pred += u[i] * delay_factor(alpha[i], s.delay[j]);
        const double e = s.value[j] - pred;
        r2 += s.weight[j] * e * e;
    }
    return r2;
}

PowerSumFit fit_power_sum(const DelaySamples& s, std::size_t users,
                          double seed_amp, double seed_alpha) {
    // Fixed multi-start spreads keep the solve deterministic.
    static const double kSpread[3][2] = {{0.55, 1.6}, {0.75, 1.3}, {0.35, 2.2}};
    PowerSumFit best;
    best.residual = std::numeric_limits<double>::infinity();
    for (int start = 0; start < 3; ++start) {
        const std::size_t n = 2 * users;
        std::vector<double> par(n); // (ln u_i, ln alpha_i)
        for (std::size_t i = 0; i < users; ++i) {
            const double f = users == 1
                                 ? 1.0
                                 : kSpread[start][i % 2] *
                                       (1.0 + 0.17 * static_cast<double>(i / 2));
            par[2 * i] = std::log(std::max(seed_amp / users, 1e-12));
            par[2 * i + 1] = std::log(std::max(seed_alpha * f, 1e-6));
        }
        auto unpack = [&](const std::vector<double>& q, std::vector<double>* u,
                          std::vector<double>* al) {
            u->resize(users);
            al->resize(users);
            for (std::size_t i = 0; i < users; ++i) {
                (*u)[i] = std::exp(q[2 * i]);
                (*al)[i] = std::exp(q[2 * i + 1]);
            }
        };
        std::vector<double> u, al;
        unpack(par, &u, &al);
        double lm = 1e-3;
        double r2 = power_sum_residual(s, u, al);
        for (int it = 0; it < 600; ++it) {
            // Jacobian of residuals w.r.t. log-parameters.
            const std::size_t m = s.delay.size();
            std::vector<std::vector<double>> jtj(n, std::vector<double>(n, 0.0));
            std::vector<double> jtr(n, 0.0);
            for (std::size_t j = 0; j < m; ++j) {
                double pred = 0.0;
                std::vector<double> grad(n, 0.0);
                for (std::size_t i = 0; i < users; ++i) {
                    const double f = delay_factor(al[i], s.delay[j]);
                    pred += u[i] * f;
                    grad[2 * i] = u[i] * f;
                    grad[2 * i + 1] =
                        -u[i] * f * std::log(s.delay[j] + 1.0) * al[i];
                }
                const double e = s.value[j] - pred;
                for (std::size_t p = 0; p < n; ++p) {
                    jtr[p] += s.weight[j] * grad[p] * e;
                    for (std::size_t q = 0; q <= p; ++q)
                        jtj[p][q] += s.weight[j] * grad[p] * grad[q];
                }
            }
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t q = p + 1; q < n; ++q) jtj[p][q] = jtj[q][p];
            bool stepped = false;
            for (int tries = 0; tries < 12 && !stepped; ++tries) {
                auto damped = jtj;
                for (std::size_t p = 0; p < n; ++p)
                    damped[p][p] += lm * (1.0 + jtj[p][p]);
                std::vector<double> dq;
                if (cholesky_solve(damped, jtr, &dq)) {
                    std::vector<double> trial = par;
                    for (std::size_t p = 0; p < n; ++p)
                        trial[p] += std::clamp(dq[p], -2.0, 2.0);
                    std::vector<double> tu, tal;
                    unpack(trial, &tu, &tal);
                    const double tr2 = power_sum_residual(s, tu, tal);
                    if (tr2 < r2) {
                        par = trial;
                        u = tu;
                        al = tal;
                        r2 = tr2;
                        lm = std::max(lm * 0.4, 1e-12);
                        stepped = true;
                        break;
                    }
                }
                lm *= 4.0;
            }
            if (!stepped || r2 < 1e-24) break;
        }
        if (r2 < best.residual) {
            best.residual = r2;
            best.u = u;
            best.alpha = al;
        }
    }
    return best;
}

} // namespace

ShiftModel fit_shift_models(const ShiftMatrix& a,
                            const std::vector<double>& prices,
                            const std::vector<double>& x_il,
                            const std::vector<double>& beta, double eta,
                            int window) {
    const DelaySamples s = collect_samples(a, prices, x_il, window);
    double amp = 0, alpha = 0;
    std::size_t positive = 0;
    for (double v : s.value)
        if (v > 0.0) ++positive;
    if (s.delay.size() < 2 || positive < 2 || !log_linear_fit(s, &amp, &alpha))
        throw InsufficientData("need signal at two distinct delays to fit");

    ShiftModel out;
    out.eta = eta;
    out.window = window;
    const std::size_t users = beta.size();
    if (users <= 1) {
        const double share = users == 1 ? beta[0] : 1.0;
        out.alpha = {alpha};
        out.gamma = {share > 0 ? amp / share : 0.0};
        return out;
    }
    PowerSumFit fit = fit_power_sum(s, users, amp, alpha);
    // The aggregate response only identifies unordered (amplitude, alpha)
    // pairs; report them in increasing-alpha order.
    std::vector<std::size_t> order(users);
    for (std::size_t i = 0; i < users; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return fit.alpha[x] < fit.alpha[y];
    });
    for (std::size_t i = 0; i < users; ++i) {
        out.alpha.push_back(fit.alpha[order[i]]);
        const double share = beta[i];
        out.gamma.push_back(share > 1e-12 ? fit.u[order[i]] / share : 0.0);
    }
    return out;
}

namespace {

double capped_response(double slope, double p, double eta) {
    return std::min(slope * p, eta);
}

} // namespace

double price_objective(double p, const std::vector<double>& x,
                       const std::vector<double>& a,
                       const std::vector<double>& b,
                       const std::vector<double>& slopes, const ShiftModel& m) {
    double f = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = capped_response(slopes[i], p, m.eta);
        const double moved = x[i] * r;
        const double kept = x[i] - moved;
        // The announced-price rule prices against this form of the utility
        // terms; the realized slot cost uses the standard quadratic.
        f += p * moved - (a[i] * kept * kept - b[i] * kept);
    }
    return f;
}

double price_foc_residual(double p, const std::vector<double>& x,
                          const std::vector<double>& a,
                          const std::vector<double>& b,
                          const std::vector<double>& slopes) {
    double g = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xs = x[i] * slopes[i];
        g += xs * (2.0 * p + 2.0 * a[i] * (x[i] - xs * p) - b[i]);
    }
    return g;
}

double price_from_slopes(const std::vector<double>& x,
                         const std::vector<double>& a,
                         const std::vector<double>& b,
                         const std::vector<double>& slopes,
                         const ShiftModel& m, double p_cap) {
    double num = 0.0, den = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xs = x[i] * slopes[i];
        mass += std::abs(xs);
        num += xs * (2.0 * a[i] * x[i] - b[i]);
        den += xs * (2.0 * a[i] * x[i] * slopes[i] - 2.0);
    }
    if (mass < 1e-15 || std::abs(den) < 1e-12)
        throw DegenerateDenominator("no interior optimum for the announced price");
    double p = std::clamp(num / den, 0.0, p_cap);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (slopes[i] * p >= m.eta - 1e-12 && x[i] > 0.0) {
            // A cap binds: the closed form is invalid, search the exact
            // capped objective instead (unimodal for a < 0).
            return golden_section(
                [&](double q) { return price_objective(q, x, a, b, slopes, m); },
                0.0, p_cap, 300);
        }
    }
    return p;
}

double optimal_incentive_price(const std::vector<double>& x,
                               const std::vector<double>& a,
                               const std::vector<double>& b,
                               const ShiftModel& m, int d, double p_cap) {
    std::vector<double> slopes(m.users());
    for (std::size_t i = 0; i < m.users(); ++i)
        slopes[i] = m.gamma[i] * delay_factor(m.alpha[i], d);
    return price_from_slopes(x, a, b, slopes, m, p_cap);
}

double window_incentive_price(const std::vector<double>& x,
                              const std::vector<double>& a,
                              const std::vector<double>& b,
                              const ShiftModel& m, double p_cap) {
    std::vector<double> slopes(m.users(), 0.0);
    for (std::size_t i = 0; i < m.users(); ++i)
        for (int d = 1; d <= m.window; ++d)
            slopes[i] += m.gamma[i] * delay_factor(m.alpha[i], d);
    return price_from_slopes(x, a, b, slopes, m, p_cap);
}

double incentive_cost(const std::vector<double>& prices,
                      const std::vector<double>& amounts) {
    if (prices.size() != amounts.size())
        throw BoundViolation("price and amount schedules differ in length");
    double c = 0.0;
    for (std::size_t j = 0; j < prices.size(); ++j) c += prices[j] * amounts[j];
    return c;
}

} // namespace parkopt
