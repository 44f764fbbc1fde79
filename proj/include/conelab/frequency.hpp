#pragma once

#include <memory>
#include <string>
#include <vector>

#include "conelab/cone.hpp"
#include "conelab/dirichlet.hpp"
#include "conelab/profiles.hpp"

namespace conelab {

/// Volume data of the model: V_M = lim V(r)/r^n, the unit-ball volume of
/// Euclidean n-space, and their ratio (1 on Euclidean space, < 1 otherwise).
struct AmbientConstants {
    int n = 3;
    double v_m = 0;
    double v0n1 = 0;
    double ratio = 0;      // v_m / v0n1
    bool maximal = false;  // v_m > 0
};

AmbientConstants ambient_constants(const SingleWarpMetric& metric);

/// Tangent cone at infinity of a model with a linear asymptote, carrying the
/// sphere spectrum up to degree alpha_cover.
ConeSpace tangent_cone(const SingleWarpMetric& metric, double alpha_cover);

/// Radial Green's function with pole at the origin and the distance-like
/// reparametrisation b = (c G)^{1/(2-n)}, c = V_M / V0^n(1).
///
/// Only defined on models of maximal volume growth; bounded warp profiles are
/// parabolic (the tail integral of f^{1-n} diverges) and the constructor
/// throws.
class GreenRadial {
  public:
    explicit GreenRadial(const SingleWarpMetric& metric, int per_decade = 512);

    double green(double rt) const;      // G(rt)
    double b(double rt) const;          // (c G)^{1/(2-n)}
    double bprime(double rt) const;     // db/drt = b f^{1-n} / G
    double b_inverse(double r) const;   // rt with b(rt) = r, to 1e-12 relative

    double pole_slope() const;          // lim b/rt at the pole
    double tail_start() const { return split_; }
    const SingleWarpMetric& metric() const { return metric_; }

  private:
    double tail(double rt) const;
    double outward(double rt) const;  // integral of f^{1-n} from rt to the split

    SingleWarpMetric metric_;
    double c_ = 0;
    bool exact_cone_ = false;
    double beta_ = 1;
    double split_ = 0;       // affine tail is exact past here
    double intercept_ = 0;   // f ~ beta rt + intercept
    std::vector<double> grid_, cum_;  // cum_[i]: integral of f^{1-n} over [grid_[i], split_]
    double r_min_ = 0;
};

/// Frequency curves of a separated mode: weighted L2 quantities
///   I(r) = r^{1-n} int_{b=r} phi^2 b' f^{n-1} S
///   D(r) = r^{2-n} int_{b<r} |grad u|^2
///   E(r) = r^{2-n} int_{b<r} |grad u|^2 b'^2   (drift-weighted)
///   F(r) = r^{3-n} int_{b=r} phi'^2 b' f^{n-1} S
/// together with freq = D/I and the defect W = E/I.
struct FrequencyCurves {
    int n = 3;
    int k = 0;
    double alpha = 0;          // cone exponent of the mode, when defined
    bool rho_surrogate = false;  // b replaced by rho on non-maximal models

    std::vector<double> r;
    std::vector<double> log_i, log_d, log_e, log_f;
    std::vector<double> i, d, e, f, freq, w;

    class Engine;
    std::shared_ptr<const Engine> engine;

    double log_i_at(double r) const;
    double log_d_at(double r) const;
    double log_e_at(double r) const;
    double log_f_at(double r) const;
    double freq_at(double r) const;
    double w_at(double r) const;
};

FrequencyCurves frequency_curve(const SingleWarpMetric& metric, const RadialMode& mode,
                                double r_min, double r_max, int per_decade = 64);

/// Max over interior sample radii of the relative defect in I'(r) = 2 D(r)/r,
/// from centred log-log differences of I.
double check_derivative_identity(const FrequencyCurves& curves);

/// Integral over [r, factor r] of the negative part of (ln W)'(t) dt,
/// computed by centered differences on a log grid of the sampled W.  Always
/// <= 0; identically 0 where W is nondecreasing (single modes on exact cones).
double w_defect(const FrequencyCurves& curves, double r, double factor = 2);

/// Scan for the doubling property D(factor r) <= bound * D(r).
struct DScanReport {
    double factor = 0, bound = 0;
    std::vector<double> tested;
    std::vector<double> qualifying;
    double largest_qualifying = 0;   // 0 when none
    bool all_qualify = false;
};

DScanReport d_doubling_scan(const FrequencyCurves& curves, double factor, double bound);

/// log(D(r)/E(r)); nonnegative where |grad b| <= 1.
double e_over_d(const FrequencyCurves& curves, double r);

/// Growth-of-D from growth-of-I:
///   I(2 factor_d r) <= gamma I(r/2)  ==>  D(factor_d r) <= 2^{n-2} gamma D(r).
struct DGrowthReport {
    bool premise = false;
    bool conclusion = false;
    bool implication = true;
    double premise_margin = 0;      // log rhs - log lhs
    double conclusion_margin = 0;
};

DGrowthReport d_growth_from_i(const FrequencyCurves& curves, double r, double gamma,
                              double factor_d = 4);

/// sup of freq over [r_min, r_max] against the threshold mult * d.
struct FrequencyBoundReport {
    double sup_freq = 0;
    double argmax = 0;
    double bound = 0;
    bool pass = false;
};

FrequencyBoundReport frequency_bound_scan(const FrequencyCurves& curves, double d,
                                          double r_min, double r_max, double mult = 5);

/// Boundedness ledger over the dyadic radii r_j = r0 2^j of the two interior
/// estimates
///   sup_{b <= (1-theta) r} |u|^2      <= C I(r)
///   r^2 sup_{b <= (1-theta) r} |grad u|^2 <= C I(r)
/// (the gradient sup is the separated upper envelope
/// phi'^2 max psi^2 + (phi/f)^2 max|grad psi|^2).  Passes when both ratio
/// sequences have max/min below spread_tol.
struct SupRatioReport {
    std::vector<double> radii;
    std::vector<double> u_ratio;     // sup |u|^2 / I(r)
    std::vector<double> grad_ratio;  // r^2 sup |grad u|^2 / I(r)
    double u_spread = 0;
    double grad_spread = 0;
    bool pass = false;
};

SupRatioReport sup_ratio_check(const SingleWarpMetric& metric, const RadialMode& mode,
                               double theta, double r0, int levels, double spread_tol = 1e2);

}  // namespace conelab
