#pragma once

#include <vector>

#include "movingns/quadrature.hpp"
#include "movingns/types.hpp"

namespace movingns {

/// Two closed-form stream-function ladders on the unit square.
///
/// standard: psi_{pq} = sin^2(p pi y1) sin^2(q pi y2). Analytic norms,
/// but every element is even about both midlines of the square, and on
/// that parity class the convective projections <(u.grad)v, w> vanish
/// identically -- the projected dynamics carry no nonlinearity.
///
/// mixed: psi_{pq} = sin(pi y1) sin(p pi y1) sin(pi y2) sin(q pi y2).
/// Coincides with the standard family at (p,q) = (1,1); the parity class
/// alternates with p and q, so all four classes appear and the convective
/// tensor is genuinely nonzero. Use this family for anything exercising
/// the nonlinear term.
enum class StreamFamily { standard, mixed };

/// One divergence-free element of the reference basis, generated by its
/// stream function through e = (d psi/d y2, -d psi/d y1). The element and
/// its first derivatives vanish on the boundary of the unit square.
struct StreamElement {
    int p = 1, q = 1;
    StreamFamily family = StreamFamily::standard;

    double psi(const Vec2& y) const;
    Vec2 value(const Vec2& y) const;
    void deriv(const Vec2& y, double de[2][2]) const;          // de[i][k] = d e^i / d y^k
    void second_deriv(const Vec2& y, double d2e[2][2][2]) const;  // [i][k][l]
};

/// First m elements ordered by p+q, then p.
std::vector<StreamElement> raw_stream_basis(int m, StreamFamily family = StreamFamily::standard);

/// Raw basis tabulated at quadrature nodes. Spatial fields are
/// time-independent, so one table serves every time node.
class StreamTable {
  public:
    StreamTable(const std::vector<StreamElement>& elems, const QuadratureRule& quad);

    int m() const { return m_; }
    int nq() const { return nq_; }

    double val(int a, int i, int q) const { return value_[(static_cast<size_t>(a) * 2 + i) * nq_ + q]; }
    double grad(int a, int i, int k, int q) const {
        return grad_[((static_cast<size_t>(a) * 2 + i) * 2 + k) * nq_ + q];
    }
    double hess(int a, int i, int k, int l, int q) const {
        return hess_[(((static_cast<size_t>(a) * 2 + i) * 2 + k) * 2 + l) * nq_ + q];
    }

    const std::vector<StreamElement>& elements() const { return elems_; }

  private:
    int m_, nq_;
    std::vector<StreamElement> elems_;
    std::vector<double> value_;  // [a][i][q]
    std::vector<double> grad_;   // [a][i][k][q]
    std::vector<double> hess_;   // [a][i][k][l][q]
};

}  // namespace movingns
