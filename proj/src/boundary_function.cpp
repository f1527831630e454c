#include "dynbc/boundary_function.hpp"

#include <cmath>
#include <stdexcept>

namespace dynbc {

BoundaryFunction BoundaryFunction::from_callable(std::function<double(double)> f, double f0,
                                                 double f1, int n) {
    if (n < 2) throw std::invalid_argument("BoundaryFunction: need n >= 2");
    BoundaryFunction b;
    b.callable_ = std::move(f);
    b.n_ = n;
    b.f0_ = f0;
    b.f1_ = f1;
    if (!std::isfinite(b.sup_norm()))
        throw std::invalid_argument("BoundaryFunction: profile is not bounded");
    return b;
}

BoundaryFunction BoundaryFunction::from_grid(std::vector<double> interior, double f0, double f1,
                                             double max_jump) {
    if (interior.size() < 1) throw std::invalid_argument("BoundaryFunction: empty interior grid");
    BoundaryFunction b;
    b.n_ = static_cast<int>(interior.size()) + 1;
    b.grid_ = std::move(interior);
    b.f0_ = f0;
    b.f1_ = f1;
    for (double v : b.grid_)
        if (!std::isfinite(v)) throw std::invalid_argument("BoundaryFunction: non-finite node value");
    if (!std::isfinite(f0) || !std::isfinite(f1))
        throw std::invalid_argument("BoundaryFunction: non-finite boundary value");
    if (max_jump > 0.0) {
        for (std::size_t i = 0; i + 1 < b.grid_.size(); ++i)
            if (std::abs(b.grid_[i + 1] - b.grid_[i]) > max_jump)
                throw std::invalid_argument("BoundaryFunction: adjacent-node jump exceeds modulus");
    }
    return b;
}

BoundaryFunction BoundaryFunction::constant(double c, int n) {
    return from_callable([c](double) { return c; }, c, c, n);
}

double BoundaryFunction::value(double x) const {
    if (callable_) return callable_(x);
    // Piecewise linear through the interior nodes i/n; the short end segments
    // extend the nearest interior segment.
    const int m = static_cast<int>(grid_.size());  // = n-1 interior nodes
    const double h = 1.0 / n_;
    if (m == 1) return grid_[0];
    double s = x / h - 1.0;  // index coordinate relative to first node
    int i = static_cast<int>(std::floor(s));
    if (i < 0) i = 0;
    if (i > m - 2) i = m - 2;
    const double w = s - i;
    return grid_[i] * (1.0 - w) + grid_[i + 1] * w;
}

double BoundaryFunction::sup_norm() const {
    double s = std::max(std::abs(f0_), std::abs(f1_));
    if (callable_) {
        const int samples = std::max(2001, 4 * n_);
        for (int i = 1; i < samples; ++i)
            s = std::max(s, std::abs(callable_(static_cast<double>(i) / samples)));
    } else {
        for (double v : grid_) s = std::max(s, std::abs(v));
    }
    return s;
}

double BoundaryFunction::interior_min(int samples) const {
    double m = value(0.5);
    for (int i = 1; i < samples; ++i)
        m = std::min(m, value(static_cast<double>(i) / samples));
    return m;
}

} // namespace dynbc
