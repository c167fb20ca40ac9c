#include "movingns/quadrature.hpp"

#include <cmath>

#include "movingns/errors.hpp"

namespace movingns {

QuadratureRule QuadratureRule::gauss_legendre(int order) {
    if (order < 1) throw ValidationError("quadrature order must be >= 1");
    QuadratureRule rule;
    rule.order = order;
    rule.nodes_1d.resize(static_cast<size_t>(order));
    rule.weights_1d.resize(static_cast<size_t>(order));

    // Newton iteration for the roots of P_n on [-1,1], Chebyshev initial guess.
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        // map [-1,1] -> (0,1), nodes ascending
        rule.nodes_1d[static_cast<size_t>(i)] = 0.5 * (1.0 - x);
        rule.nodes_1d[static_cast<size_t>(n - 1 - i)] = 0.5 * (1.0 + x);
        rule.weights_1d[static_cast<size_t>(i)] = 0.5 * w;
        rule.weights_1d[static_cast<size_t>(n - 1 - i)] = 0.5 * w;
    }

    rule.nodes.reserve(static_cast<size_t>(n) * n);
    rule.weights.reserve(static_cast<size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            rule.nodes.push_back({rule.nodes_1d[static_cast<size_t>(a)],
                                  rule.nodes_1d[static_cast<size_t>(b)]});
            rule.weights.push_back(rule.weights_1d[static_cast<size_t>(a)] *
                                   rule.weights_1d[static_cast<size_t>(b)]);
        }
    return rule;
}

}  // namespace movingns
