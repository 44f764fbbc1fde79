#pragma once

#include <vector>

#include "conelab/cone.hpp"

namespace conelab {

struct SingleWarpMetric;
struct RadialMode;

/// Weighted exponential system for the discrete comparison inequality:
/// nonnegative weights w_i on ascending exponents alpha_i with alpha_1 = 0,
/// compared against a level alpha > 0.
struct WeightSystem {
    std::vector<double> weights;
    std::vector<double> exponents;
    double alpha = 0;

    void validate() const;
};

/// Verdicts for the implication
///   sum w_i <= sum 2^{2(alpha - alpha_i)} w_i
///     ==>  sum 2^{-2 alpha_i} w_i <= sum 2^{2(alpha - 2 alpha_i)} w_i
/// with the equality case characterised by support on alpha_i = alpha.
struct Lemma31Report {
    bool hypothesis_holds = false;
    bool conclusion_holds = false;
    bool equality_case = false;
    double hypothesis_lhs = 0, hypothesis_rhs = 0;
    double conclusion_lhs = 0, conclusion_rhs = 0;
};

Lemma31Report lemma31(const WeightSystem& ws);

/// Three-level comparison of the ball average J at radii (r, r/2, r/4):
/// premise J(r) <= 2^{2 alpha} J(r/2), conclusion J(r/2) <= 2^{2 alpha} J(r/4).
struct ThreeCirclesReport {
    double r = 0;
    double alpha = 0;
    double j_r = 0, j_half = 0, j_quarter = 0;
    bool premise = false;
    bool conclusion = false;
    /// premise implies conclusion at this radius
    bool implication = true;
};

/// Closed-form cone variant.  Requires alpha off the degree spectrum within
/// the given tolerance (throws std::domain_error citing the nearest element).
ThreeCirclesReport three_circles_J(const ConeSpace& cone, const ConeHarmonic& h,
                                   double r, double alpha, double spectrum_tol = 1e-6);

/// Level-set variant with I in place of J; additionally requires u to vanish
/// at the vertex (no constant term).
ThreeCirclesReport three_circles_I(const ConeSpace& cone, const ConeHarmonic& h,
                                   double r, double alpha, double spectrum_tol = 1e-6);

/// Ball average of a separated harmonic phi(rt) psi(theta) on a warped model;
/// geodesic balls about the pole are coordinate balls.
double j_function_numeric(const SingleWarpMetric& metric, const RadialMode& mode, double r);

/// Numeric variants on rotationally symmetric models.
ThreeCirclesReport three_circles_J(const SingleWarpMetric& metric, const RadialMode& mode,
                                   double r, double alpha, double spectrum_tol = 1e-6);
ThreeCirclesReport three_circles_I(const SingleWarpMetric& metric, const RadialMode& mode,
                                   double r, double alpha, double spectrum_tol = 1e-6);

/// Dyadic iteration of the three-circles step from radius k0: step j checks
/// J(k0 2^j) <= 2^{2 alpha} J(k0 2^{j-1}); the resulting envelope is
/// J(r) <= (r/k0)^{2 alpha} * 2^{2 alpha} * J(k0).
struct CascadeReport {
    std::vector<double> radii;
    std::vector<bool> step_ok;
    bool all_steps = false;
    int first_failure = -1;           // index into radii, -1 when none
    double envelope_constant = 0;     // 2^{2 alpha} J(k0)
    double max_ratio = 0;             // max J(r) / [(r/k0)^{2 alpha} J(k0)]
    bool envelope_ok = false;         // max_ratio <= 2^{2 alpha}
};

/// J given at the dyadic radii k0 * 2^j, j = 0..m.
CascadeReport cascade(const std::vector<double>& j_values, double alpha, double k0);
/// Same from log J; robust when far levels underflow.
CascadeReport cascade_from_log(const std::vector<double>& log_j_values, double alpha, double k0);

}  // namespace conelab
