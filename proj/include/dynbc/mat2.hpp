#ifndef DYNBC_MAT2_HPP
#define DYNBC_MAT2_HPP

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dynbc {

struct Vec2 {
    double x0 = 0.0, x1 = 0.0;

    double& operator[](int i) { return i == 0 ? x0 : x1; }
    double operator[](int i) const { return i == 0 ? x0 : x1; }

    Vec2 operator+(const Vec2& o) const { return {x0 + o.x0, x1 + o.x1}; }
    Vec2 operator-(const Vec2& o) const { return {x0 - o.x0, x1 - o.x1}; }
    Vec2 operator*(double s) const { return {x0 * s, x1 * s}; }
    Vec2& operator+=(const Vec2& o) { x0 += o.x0; x1 += o.x1; return *this; }

    double norm() const { return std::hypot(x0, x1); }
    double max_abs() const { return std::max(std::abs(x0), std::abs(x1)); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Row-major 2x2 matrix.
struct Mat22 {
    double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;

    static Mat22 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat22 diag(double d0, double d1) { return {d0, 0.0, 0.0, d1}; }

    Mat22 operator+(const Mat22& o) const { return {a00 + o.a00, a01 + o.a01, a10 + o.a10, a11 + o.a11}; }
    Mat22 operator-(const Mat22& o) const { return {a00 - o.a00, a01 - o.a01, a10 - o.a10, a11 - o.a11}; }
    Mat22 operator*(double s) const { return {a00 * s, a01 * s, a10 * s, a11 * s}; }
    Mat22& operator+=(const Mat22& o) { a00 += o.a00; a01 += o.a01; a10 += o.a10; a11 += o.a11; return *this; }

    Vec2 operator*(const Vec2& v) const {
        return {a00 * v.x0 + a01 * v.x1, a10 * v.x0 + a11 * v.x1};
    }
    Mat22 operator*(const Mat22& o) const {
        return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
                a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
    }

    double det() const { return a00 * a11 - a01 * a10; }
    double trace() const { return a00 + a11; }
    double max_abs() const {
        return std::max(std::max(std::abs(a00), std::abs(a01)), std::max(std::abs(a10), std::abs(a11)));
    }

    Mat22 inverse() const {
        const double d = det();
        if (d == 0.0) throw std::runtime_error("Mat22::inverse: singular matrix");
        const double id = 1.0 / d;
        return {a11 * id, -a01 * id, -a10 * id, a00 * id};
    }

    // Spectral (2-)norm via the singular values of a 2x2 matrix.
    double opnorm() const {
        const double q = a00 * a00 + a01 * a01 + a10 * a10 + a11 * a11;
        const double d = det();
        const double disc = std::max(0.0, q * q - 4.0 * d * d);
        return std::sqrt(0.5 * (q + std::sqrt(disc)));
    }

    // Condition number in the 2-norm; +inf when singular.
    double cond() const {
        const double q = a00 * a00 + a01 * a01 + a10 * a10 + a11 * a11;
        const double d = det();
        const double disc = std::max(0.0, q * q - 4.0 * d * d);
        const double smax2 = 0.5 * (q + std::sqrt(disc));
        const double smin2 = 0.5 * (q - std::sqrt(disc));
        if (smin2 <= 0.0) return std::numeric_limits<double>::infinity();
        return std::sqrt(smax2 / smin2);
    }

    Vec2 solve(const Vec2& b) const { return inverse() * b; }
};

inline Mat22 operator*(double s, const Mat22& m) { return m * s; }

// Outer product u v^T.
inline Mat22 outer(const Vec2& u, const Vec2& v) {
    return {u.x0 * v.x0, u.x0 * v.x1, u.x1 * v.x0, u.x1 * v.x1};
}

} // namespace dynbc

#endif
