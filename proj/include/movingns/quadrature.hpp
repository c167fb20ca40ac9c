#pragma once

#include <vector>

#include "movingns/types.hpp"

namespace movingns {

/// Tensor-product Gauss-Legendre rule on the open unit square (0,1)^2.
/// Weights are positive and sum to 1 (the area); the 1D rule is exact for
/// polynomials up to degree 2*order-1 per axis.
struct QuadratureRule {
    int order = 0;                      // nodes per axis
    std::vector<double> nodes_1d;       // on (0,1)
    std::vector<double> weights_1d;
    std::vector<Vec2> nodes;            // order^2 tensor nodes, x-major
    std::vector<double> weights;

    static QuadratureRule gauss_legendre(int order);

    int size() const { return static_cast<int>(nodes.size()); }
};

}  // namespace movingns
