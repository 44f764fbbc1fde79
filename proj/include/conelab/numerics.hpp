#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace conelab {

inline constexpr double PI = 3.14159265358979323846264338327950288;

/// Volume of the unit m-sphere S^m embedded in R^{m+1}.
double unit_sphere_volume(int m);

/// Volume of the unit ball in R^n, i.e. unit_sphere_volume(n-1)/n.
double unit_ball_volume(int n);

inline double pow2(double x) { return std::exp2(x); }

/// Log-uniform grid on [a, b] with the given density per decade.
/// Always contains both endpoints; never fewer than 8 points.
std::vector<double> log_grid(double a, double b, int per_decade);

/// Ordinary least-squares slope of y against x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Adaptive Gauss-Kronrod (G7/K15) quadrature on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, double abs_tol = 0.0, int max_depth = 48);

/// Same, but substitutes t = log(s); suitable for wide positive ranges.
double integrate_log(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-12);

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Fixed-order Gauss-Legendre nodes/weights on [-1, 1], order 5 and 7.
struct GaussRule {
    std::vector<double> x, w;
};
const GaussRule& gauss5();
const GaussRule& gauss7();

/// Integral of exp(L(s)) over [a, b] returned as a log, with L evaluated at
/// Gauss nodes.  Used for cumulative mode integrals that under/overflow.
double panel_log_integral(const std::function<double(double)>& L, double a, double b);

/// Cubic Hermite evaluation on one interval from endpoint values/derivatives.
double hermite_value(double x0, double y0, double d0, double x1, double y1, double d1, double x);
double hermite_derivative(double x0, double y0, double d0, double x1, double y1, double d1, double x);

/// Cumulative integral of exp(L(t)) dt on a fixed grid, kept in log form.
/// Supports a power-law head below the first node: if exp(L(t)) behaves like
/// e^{p t} as t -> -inf (p > 0), the head integral is exp(L(t0))/p.
class LogIntegralTable {
public:
    LogIntegralTable() = default;
    LogIntegralTable(std::vector<double> t, std::function<double(double)> L,
                     double head_power = 0);

    /// log of the integral of exp(L) over (-inf, tq]; head included when set.
    double log_upto(double tq) const;
    /// log of the integral over [ta, tb].
    double log_between(double ta, double tb) const;

    const std::vector<double>& nodes() const { return t_; }

private:
    double log_partial(std::size_t i, double tq) const;  // [t_[i], tq]

    std::vector<double> t_, cum_;
    std::function<double(double)> L_;
    double log_head_ = -std::numeric_limits<double>::infinity();
};

/// Sampled scalar field on an increasing grid with derivatives; piecewise
/// cubic Hermite evaluation.
class SampledField {
public:
    SampledField() = default;
    SampledField(std::vector<double> grid, std::vector<double> value, std::vector<double> deriv);

    double operator()(double x) const;
    double derivative(double x) const;
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return value_; }
    const std::vector<double>& derivs() const { return deriv_; }
    std::size_t interval_of(double x) const;

private:
    std::vector<double> grid_, value_, deriv_;
};

/// Dormand-Prince 5(4) adaptive integrator.  Integrates y' = f(x, y) from
/// grid.front() to grid.back(), storing the state at every grid node.
/// Output row i is the state at grid[i].
std::vector<std::vector<double>> integrate_ode(
    const std::function<void(double, const double*, double*)>& rhs, int dim,
    const std::vector<double>& grid, const std::vector<double>& y0,
    double rel_tol = 1e-10, double abs_tol = 1e-14);

/// Finite-difference weights for the m-th derivative at x0 from arbitrary
/// nodes (Fornberg's algorithm).  weights[j] multiplies the sample at x[j].
std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m);

/// Monotone root solve of f on [lo, hi] by bisection polished with Newton
/// (derivative optional).  Requires a sign change.
double solve_monotone(const std::function<double(double)>& f, double lo, double hi,
                      double x_tol, const std::function<double(double)>& df = nullptr);

/// Deterministic uniform generator; identical streams on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    /// Uniform double in [0, 1).
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * next_double(); }
    int uniform_int(int a, int b) {  // inclusive range
        return a + static_cast<int>(next_u64() % static_cast<std::uint64_t>(b - a + 1));
    }

private:
    std::uint64_t state_;
};

}  // namespace conelab
