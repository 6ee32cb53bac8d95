#include "parkopt/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace parkopt {

bool cholesky_solve(std::vector<std::vector<double>> g, std::vector<double> b,
                    std::vector<double>* x, double pivot_tol) {
    const std::size_t n = g.size();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, g[i][i]);
    if (scale <= 0.0) return false;
    for (std::size_t k = 0; k < n; ++k) {
        double piv = g[k][k];
        for (std::size_t j = 0; j < k; ++j) piv -= g[k][j] * g[k][j];
        if (piv < pivot_tol * scale) return false;
        g[k][k] = std::sqrt(piv);
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = g[i][k];
            for (std::size_t j = 0; j < k; ++j) v -= g[i][j] * g[k][j];
            g[i][k] = v / g[k][k];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        for (std::size_t j = 0; j < i; ++j) v -= g[i][j] * b[j];
        b[i] = v / g[i][i];
    }
    x->assign(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double v = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) v -= g[j][ii] * (*x)[j];
        (*x)[ii] = v / g[ii][ii];
    }
    return true;
}

double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, int iters) {
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace parkopt
