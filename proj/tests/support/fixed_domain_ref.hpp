#pragma once

// Independently coded fixed-domain assembly: plain Dirichlet stiffness and
// the standard convective trilinear form on the unit square, written with
// direct element evaluation and none of the metric/covariant machinery.
// This is the oracle the moving-domain assembly must reproduce when the
// map is the identity.

#include <vector>

#include "movingns/quadrature.hpp"
#include "movingns/stream_basis.hpp"

namespace fixed_domain_ref {

using movingns::QuadratureRule;
using movingns::StreamElement;
using movingns::Vec2;

struct PlainBasis {
    int m = 0;
    std::vector<double> value;  // [j][i][q]
    std::vector<double> grad;   // [j][i][k][q]
    int nq = 0;

    double v(int j, int i, int q) const { return value[(static_cast<size_t>(j) * 2 + i) * nq + q]; }
    double g(int j, int i, int k, int q) const {
        return grad[((static_cast<size_t>(j) * 2 + i) * 2 + k) * nq + q];
    }
};

// orthonormal fields w_j = sum_a R[j][a] e_a sampled with direct evaluation
inline PlainBasis build_plain_basis(const std::vector<StreamElement>& elems,
                                    const std::vector<double>& R, const QuadratureRule& quad) {
    PlainBasis b;
    b.m = static_cast<int>(elems.size());
    b.nq = quad.size();
    b.value.assign(static_cast<size_t>(b.m) * 2 * b.nq, 0.0);
    b.grad.assign(static_cast<size_t>(b.m) * 4 * b.nq, 0.0);
    for (int j = 0; j < b.m; ++j)
        for (int a = 0; a <= j; ++a) {
            const double c = R[static_cast<size_t>(j) * b.m + a];
            if (c == 0.0) continue;
            for (int q = 0; q < b.nq; ++q) {
                const Vec2& y = quad.nodes[static_cast<size_t>(q)];
                const Vec2 val = elems[static_cast<size_t>(a)].value(y);
                double de[2][2];
                elems[static_cast<size_t>(a)].deriv(y, de);
                for (int i = 0; i < 2; ++i) {
                    b.value[(static_cast<size_t>(j) * 2 + i) * b.nq + q] +=
                        c * val[static_cast<size_t>(i)];
                    for (int k = 0; k < 2; ++k)
                        b.grad[((static_cast<size_t>(j) * 2 + i) * 2 + k) * b.nq + q] +=
                            c * de[i][k];
                }
            }
        }
    return b;
}

// S[j][k] = int grad w_j : grad w_k
inline std::vector<double> plain_stiffness(const PlainBasis& b, const QuadratureRule& quad) {
    std::vector<double> s(static_cast<size_t>(b.m) * b.m, 0.0);
    for (int j = 0; j < b.m; ++j)
        for (int k = 0; k < b.m; ++k) {
            double acc = 0.0;
            for (int q = 0; q < b.nq; ++q) {
                double dot = 0.0;
                for (int i = 0; i < 2; ++i)
                    for (int l = 0; l < 2; ++l) dot += b.g(j, i, l, q) * b.g(k, i, l, q);
                acc += quad.weights[static_cast<size_t>(q)] * dot;
            }
            s[static_cast<size_t>(j) * b.m + k] = acc;
        }
    return s;
}

// T[j][k][l] = int ((w_k . grad) w_l) . w_j
inline std::vector<double> plain_trilinear(const PlainBasis& b, const QuadratureRule& quad) {
    std::vector<double> t(static_cast<size_t>(b.m) * b.m * b.m, 0.0);
    for (int j = 0; j < b.m; ++j)
        for (int k = 0; k < b.m; ++k)
            for (int l = 0; l < b.m; ++l) {
                double acc = 0.0;
                for (int q = 0; q < b.nq; ++q) {
                    double term = 0.0;
                    for (int i = 0; i < 2; ++i)
                        term += (b.v(k, 0, q) * b.g(l, i, 0, q) + b.v(k, 1, q) * b.g(l, i, 1, q)) *
                                b.v(j, i, q);
                    acc += quad.weights[static_cast<size_t>(q)] * term;
                }
                t[(static_cast<size_t>(j) * b.m + k) * b.m + l] = acc;
            }
    return t;
}

}  // namespace fixed_domain_ref
