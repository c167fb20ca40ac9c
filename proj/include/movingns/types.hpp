#pragma once

#include <array>
#include <cmath>

namespace movingns {

using Vec2 = std::array<double, 2>;

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double c, const Vec2& a) { return {c * a[0], c * a[1]}; }
inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }

struct Mat2 {
    double m[2][2];

    static Mat2 identity() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }
    static Mat2 zero() { return {{{0.0, 0.0}, {0.0, 0.0}}}; }

    double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

    Mat2 transpose() const { return {{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}}; }

    Mat2 inverse() const {
        const double d = det();
        return {{{m[1][1] / d, -m[0][1] / d}, {-m[1][0] / d, m[0][0] / d}}};
    }

    // row-vector action: (v M)^j = sum_i v^i M[i][j]
    Vec2 apply_left(const Vec2& v) const {
        return {v[0] * m[0][0] + v[1] * m[1][0], v[0] * m[0][1] + v[1] * m[1][1]};
    }

    // column action: (M v)^i = sum_j M[i][j] v^j
    Vec2 apply(const Vec2& v) const {
        return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
    }

    Mat2 mul(const Mat2& o) const {
        Mat2 r = zero();
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) r.m[i][j] += m[i][k] * o.m[k][j];
        return r;
    }

    double max_abs_diff(const Mat2& o) const {
        double r = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r = std::max(r, std::abs(m[i][j] - o.m[i][j]));
        return r;
    }
};

// t[l][i][j], symmetric in (i,j) when built from map Hessians
struct Tensor222 {
    double t[2][2][2];
    static Tensor222 zero() { return Tensor222{{{{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}}}; }
};

// t[l][i][j][a]
struct Tensor2222 {
    double t[2][2][2][2];
    static Tensor2222 zero() {
        Tensor2222 r;
        for (auto& a : r.t)
            for (auto& b : a)
                for (auto& c : b)
                    for (auto& d : c) d = 0.0;
        return r;
    }
};

}  // namespace movingns
