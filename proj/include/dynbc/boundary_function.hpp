#ifndef DYNBC_BOUNDARY_FUNCTION_HPP
#define DYNBC_BOUNDARY_FUNCTION_HPP

#include <functional>
#include <vector>

namespace dynbc {

/// Element of the state space: a bounded interior profile on (0,1) plus two
/// boundary values that are free to disagree with the interior limits.
/// The interior is either a closed-form callable or node values on the open
/// uniform grid i/n, i = 1..n-1 (piecewise-linear in between).
class BoundaryFunction {
public:
    BoundaryFunction() = default;

    static BoundaryFunction from_callable(std::function<double(double)> f, double f0, double f1,
                                          int n = 200);
    static BoundaryFunction from_grid(std::vector<double> interior, double f0, double f1,
                                      double max_jump = 0.0);
    static BoundaryFunction constant(double c, int n = 200);
    static BoundaryFunction zero(int n = 200) { return constant(0.0, n); }

    /// Interior value at x in (0,1).
    double value(double x) const;
    double boundary(int k) const { return k == 0 ? f0_ : f1_; }
    double f0() const { return f0_; }
    double f1() const { return f1_; }

    int n() const { return n_; }
    bool has_callable() const { return static_cast<bool>(callable_); }

    /// Sup norm over interior samples and both boundary slots.
    double sup_norm() const;

    /// Interior minimum over a sample grid (boundary slots not included).
    double interior_min(int samples = 2001) const;

private:
    std::function<double(double)> callable_;
    std::vector<double> grid_;  // interior node values when no callable
    int n_ = 0;                 // panel count; interior nodes are i/n, i=1..n-1
    double f0_ = 0.0, f1_ = 0.0;
};

} // namespace dynbc

#endif
