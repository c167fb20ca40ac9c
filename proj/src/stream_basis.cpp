#include "movingns/stream_basis.hpp"

#include <cmath>

#include "movingns/errors.hpp"

namespace movingns {

namespace {

// 1D factor of the stream function with its first three derivatives:
// standard sin^2(k pi x), mixed sin(pi x) sin(k pi x)
struct Block {
    double v, d1, d2, d3;
    Block(StreamFamily family, int k, double x) {
        if (family == StreamFamily::standard) {
            const double a = M_PI * k;
            const double s = std::sin(a * x);
            const double s2 = std::sin(2.0 * a * x);
            const double c2 = std::cos(2.0 * a * x);
            v = s * s;
            d1 = a * s2;
            d2 = 2.0 * a * a * c2;
            d3 = -4.0 * a * a * a * s2;
        } else {
            const double a = M_PI, b = M_PI * k;
            const double sa = std::sin(a * x), ca = std::cos(a * x);
            const double sb = std::sin(b * x), cb = std::cos(b * x);
            v = sa * sb;
            d1 = a * ca * sb + b * sa * cb;
            d2 = -(a * a + b * b) * v + 2.0 * a * b * ca * cb;
            d3 = -(a * a + b * b) * d1 - 2.0 * a * b * (a * sa * cb + b * ca * sb);
        }
    }
};

}  // namespace

double StreamElement::psi(const Vec2& y) const {
    return Block(family, p, y[0]).v * Block(family, q, y[1]).v;
}

Vec2 StreamElement::value(const Vec2& y) const {
    const Block f(family, p, y[0]), g(family, q, y[1]);
    return {f.v * g.d1, -f.d1 * g.v};
}

void StreamElement::deriv(const Vec2& y, double de[2][2]) const {
    const Block f(family, p, y[0]), g(family, q, y[1]);
    de[0][0] = f.d1 * g.d1;
    de[0][1] = f.v * g.d2;
    de[1][0] = -f.d2 * g.v;
    de[1][1] = -f.d1 * g.d1;
}

void StreamElement::second_deriv(const Vec2& y, double d2e[2][2][2]) const {
    const Block f(family, p, y[0]), g(family, q, y[1]);
    d2e[0][0][0] = f.d2 * g.d1;
    d2e[0][0][1] = f.d1 * g.d2;
    d2e[0][1][0] = f.d1 * g.d2;
    d2e[0][1][1] = f.v * g.d3;
    d2e[1][0][0] = -f.d3 * g.v;
    d2e[1][0][1] = -f.d2 * g.d1;
    d2e[1][1][0] = -f.d2 * g.d1;
    d2e[1][1][1] = -f.d1 * g.d2;
}

std::vector<StreamElement> raw_stream_basis(int m, StreamFamily family) {
    if (m < 1) throw ValidationError("basis.m must be >= 1");
    std::vector<StreamElement> out;
    out.reserve(static_cast<size_t>(m));
    int s = 2;
    while (static_cast<int>(out.size()) < m) {
        for (int p = 1; p < s && static_cast<int>(out.size()) < m; ++p)
            out.push_back({p, s - p, family});
        ++s;
    }
    return out;
}

StreamTable::StreamTable(const std::vector<StreamElement>& elems, const QuadratureRule& quad)
    : m_(static_cast<int>(elems.size())), nq_(quad.size()), elems_(elems) {
    value_.resize(static_cast<size_t>(m_) * 2 * nq_);
    grad_.resize(static_cast<size_t>(m_) * 4 * nq_);
    hess_.resize(static_cast<size_t>(m_) * 8 * nq_);
    for (int a = 0; a < m_; ++a) {
        for (int q = 0; q < nq_; ++q) {
            const Vec2& y = quad.nodes[static_cast<size_t>(q)];
            const Vec2 v = elems_[static_cast<size_t>(a)].value(y);
            double de[2][2], d2e[2][2][2];
            elems_[static_cast<size_t>(a)].deriv(y, de);
            elems_[static_cast<size_t>(a)].second_deriv(y, d2e);
            for (int i = 0; i < 2; ++i) {
                value_[(static_cast<size_t>(a) * 2 + i) * nq_ + q] = v[static_cast<size_t>(i)];
                for (int k = 0; k < 2; ++k) {
                    grad_[((static_cast<size_t>(a) * 2 + i) * 2 + k) * nq_ + q] = de[i][k];
                    for (int l = 0; l < 2; ++l)
                        hess_[(((static_cast<size_t>(a) * 2 + i) * 2 + k) * 2 + l) * nq_ + q] =
                            d2e[i][k][l];
                }
            }
        }
    }
}

}  // namespace movingns
