#include <cmath>
#include <vector>

#include "dynbc/semigroup.hpp"

namespace dynbc {

namespace {

// Dense LU with partial pivoting; the boundary rows break the tridiagonal
// band so a banded solver buys little at these sizes.
class DenseLU {
public:
    explicit DenseLU(std::vector<double> a, int n) : a_(std::move(a)), piv_(n), n_(n) {
        for (int i = 0; i < n_; ++i) piv_[i] = i;
        for (int col = 0; col < n_; ++col) {
            int p = col;
            double best = std::abs(at(col, col));
            for (int r = col + 1; r < n_; ++r) {
                const double v = std::abs(at(r, col));
                if (v > best) {
                    best = v;
                    p = r;
                }
            }
            if (best == 0.0) throw numerical_error("fd_solve: singular step matrix");
            if (p != col) {
                for (int c = 0; c < n_; ++c) std::swap(at(p, c), at(col, c));
                std::swap(piv_[p], piv_[col]);
            }
            const double d = at(col, col);
            for (int r = col + 1; r < n_; ++r) {
                const double m = at(r, col) / d;
                at(r, col) = m;
                if (m == 0.0) continue;
                for (int c = col + 1; c < n_; ++c) at(r, c) -= m * at(col, c);
            }
        }
    }

    void solve(const std::vector<double>& b, std::vector<double>& x) const {
        for (int i = 0; i < n_; ++i) x[i] = b[piv_[i]];
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < i; ++j) x[i] -= at(i, j) * x[j];
        for (int i = n_ - 1; i >= 0; --i) {
            for (int j = i + 1; j < n_; ++j) x[i] -= at(i, j) * x[j];
            x[i] /= at(i, i);
        }
    }

private:
    double& at(int r, int c) { return a_[static_cast<std::size_t>(r) * n_ + c]; }
    double at(int r, int c) const { return a_[static_cast<std::size_t>(r) * n_ + c]; }

    std::vector<double> a_;
    std::vector<int> piv_;
    int n_;
};

} // namespace

SpaceTimeField fd_solve(const BoundaryFunction& f, double mu, double sigma, double T, int n_space,
                        double dt, int out_stride) {
    if (!(dt > 0.0) || !(T >= dt)) throw std::invalid_argument("fd_solve: need 0 < dt <= T");
    if (n_space < 16) throw std::invalid_argument("fd_solve: n_space >= 16 required");
    const double h = 1.0 / n_space;
    // cell Peclet guard: centered advection oscillates past |mu| h = 1
    if (std::abs(mu) * h > 1.0)
        throw std::invalid_argument("fd_solve: grid too coarse for the drift (|mu|/n_space > 1)");

    const int n = n_space + 1;
    const int M = static_cast<int>(std::llround(T / dt));
    if (M < 1 || std::abs(M * dt - T) > 1e-9 * T)
        throw std::invalid_argument("fd_solve: T must be an integer multiple of dt");
    const int stride = out_stride > 0 ? out_stride : std::max(1, M / 200);

    // generator rows: interior centered differences, boundary rows are the
    // endpoint ODEs with second-order one-sided derivatives
    std::vector<double> L(static_cast<std::size_t>(n) * n, 0.0);
    auto at = [&](int r, int c) -> double& { return L[static_cast<std::size_t>(r) * n + c]; };
    for (int i = 1; i < n - 1; ++i) {
        at(i, i - 1) = 0.5 / (h * h) - mu / (2.0 * h);
        at(i, i) = -1.0 / (h * h);
        at(i, i + 1) = 0.5 / (h * h) + mu / (2.0 * h);
    }
    at(0, 0) = 3.0 * sigma / (2.0 * h);
    at(0, 1) = -2.0 * sigma / h;
    at(0, 2) = sigma / (2.0 * h);
    at(n - 1, n - 1) = 3.0 * sigma / (2.0 * h);
    at(n - 1, n - 2) = -2.0 * sigma / h;
    at(n - 1, n - 3) = sigma / (2.0 * h);

    // trapezoid step (I - dt/2 L) u+ = (I + dt/2 L) u, with two backward-Euler
    // startup steps to damp the corner transient of incompatible data
    std::vector<double> lhs(L.size()), rhs_mat(L.size()), lhs_be(L.size());
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double v = 0.5 * dt * L[static_cast<std::size_t>(r) * n + c];
            lhs[static_cast<std::size_t>(r) * n + c] = (r == c ? 1.0 : 0.0) - v;
            rhs_mat[static_cast<std::size_t>(r) * n + c] = (r == c ? 1.0 : 0.0) + v;
            lhs_be[static_cast<std::size_t>(r) * n + c] = (r == c ? 1.0 : 0.0) - 2.0 * v;
        }
    DenseLU lu(std::move(lhs), n);
    DenseLU lu_be(std::move(lhs_be), n);
    const int rannacher_steps = 2;

    std::vector<double> u(n), b(n), unew(n);
    u[0] = f.f0();
    u[n - 1] = f.f1();
    for (int i = 1; i < n - 1; ++i) u[i] = f.value(i * h);

    SpaceTimeField field;
    field.nodes.resize(n);
    for (int i = 0; i < n; ++i) field.nodes[i] = i * h;
    field.times.push_back(0.0);
    field.values.push_back(u);

    for (int j = 1; j <= M; ++j) {
        if (j <= rannacher_steps) {
            lu_be.solve(u, unew);
        } else {
            for (int r = 0; r < n; ++r) {
                double s = 0.0;
                const double* row = &rhs_mat[static_cast<std::size_t>(r) * n];
                for (int c = 0; c < n; ++c) s += row[c] * u[c];
                b[r] = s;
            }
            lu.solve(b, unew);
        }
        u.swap(unew);
        if (j % stride == 0 || j == M) {
            field.times.push_back(j * dt);
            field.values.push_back(u);
        }
    }
    return field;
}

} // namespace dynbc
