#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace conelab {

/// Parameters of the doubly warped model over the Hopf fibration.  The warp
/// profiles are sin(a r)/a on [0, delta] glued C^2 to
///   frak_f(x) = c1 - c2 exp(-c3 x)            (fiber direction)
///   frak_h(x) = c0 + c4 x - c5 exp(-c6 x)     (base direction)
/// with x = r - delta.
struct NiParameters {
    double a = 0, delta = 0;
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0, c6 = 0;

    /// The reference choice: a = 1/(2*sqrt 3), delta = 2*pi/sqrt 3,
    /// (c0..c6) = (13/4, 4, 1, 1/2, 1/4, 1/4, 1).
    static NiParameters reference();

    /// Throws std::domain_error unless every field is positive.
    void validate() const;
};

/// Result of checking the eight structural constraints of NiParameters.
/// Residuals are signed, lhs - rhs in the orientation written above each
/// constraint; equalities hold within tolerance, inequalities as stated.
struct NiAssumptionReport {
    std::array<double, 8> residual{};
    std::array<bool, 8> holds{};
    bool all_hold = false;
    double tolerance = 1e-12;
};

NiAssumptionReport check_ni_assumptions(const NiParameters& p, double tolerance = 1e-12);

/// Derives the remaining parameters from the free triple (c2, c3, c6):
/// c1 and a from the sphere-cap matching, delta from the gluing angle, c5 and
/// c4 from the base-direction matching, c0 from the offset constraint.
/// Throws std::domain_error naming the failing constraint when the triple is
/// infeasible (c2*c3 >= 1 or c6 <= c3).  The inequality constraint
/// c0 >= 3*c2 + c5 (equivalently c1 >= 4*c2) is reported, not thrown.
NiParameters derive_ni_parameters(double c2, double c3, double c6);

/// Declared behaviour of a warp profile at infinity.
struct Asymptote {
    bool linear = false;
    double slope = 0;       // valid when linear
    double intercept = 0;   // valid when linear
    double limit = 0;       // valid when bounded
};

/// A radial warp profile f(r) on [0, inf).  Piecewise closed form with
/// explicit derivatives up to second order.
class WarpProfile {
public:
    enum class Kind { ExactCone, AsymConical, Ding, NiFiber, NiBase, Custom };

    /// f(r) = beta * r.  The pole is singular unless beta = 1.
    static WarpProfile exact_cone(double beta);
    /// f(r) = beta*r + (1-beta)*(1 - exp(-r)); smooth positive warp with
    /// f(0) = 0, f'(0) = 1 and slope beta at infinity.
    static WarpProfile asym_conical(double beta);
    /// The compact-perturbation profile: a - b*exp(-1/(1-(r+3^{-1/4})^2)) up
    /// to r = 1 - 3^{-1/4}, constant a beyond.  a and b are fixed so that
    /// f(0) = 0 and f'(0) = 1.
    static WarpProfile ding();
    static WarpProfile ni_fiber(const NiParameters& p);
    static WarpProfile ni_base(const NiParameters& p);

    struct Piece {
        double r_end;  // right edge of validity; infinity for the last piece
        std::function<double(double, int)> eval;  // (r, order 0|1|2)
    };
    static WarpProfile custom(std::vector<Piece> pieces, Asymptote asympt);

    /// f, f' or f'' at radius r >= 0.  Throws std::domain_error for r < 0 or
    /// order outside 0..2.
    double eval(double r, int order = 0) const;

    /// Closed form of one piece extended to arbitrary r; used to compare
    /// one-sided limits at joins.
    double eval_piece(std::size_t index, double r, int order) const;
    std::size_t piece_count() const { return pieces_.size(); }

    Kind kind() const { return kind_; }
    const Asymptote& asymptote() const { return asymptote_; }
    /// Interior gluing radii (empty for single-piece profiles).
    const std::vector<double>& joins() const { return joins_; }
    /// Parameters, where applicable.
    double beta() const { return beta_; }
    const NiParameters& ni() const;

    /// Constants of the compact-perturbation profile.
    static double ding_plateau();  // a
    static double ding_join();     // 1 - 3^{-1/4}

private:
    WarpProfile() = default;
    Kind kind_ = Kind::Custom;
    double beta_ = 1.0;
    std::optional<NiParameters> ni_;
    std::vector<Piece> pieces_;
    std::vector<double> joins_;
    Asymptote asymptote_;
};

/// One-sided mismatches (left minus right) of f, f', f'' at one gluing radius.
struct GluingResidual {
    double r = 0;
    std::array<double, 3> delta{};
};

/// Closed-form one-sided derivatives on both sides of every join.
std::vector<GluingResidual> c2_gluing_residuals(const WarpProfile& profile);

/// Rotationally symmetric metric dr^2 + f(r)^2 * g_{S^{n-1}}.
struct SingleWarpMetric {
    int n = 3;
    WarpProfile profile = WarpProfile::exact_cone(1.0);

    void validate() const;
};

/// The dimension-8 doubly warped metric dr^2 + f^2 k1 + h^2 k2 over the Hopf
/// fibration (fiber S^3, base S^4 with one-quarter round metric).
struct DoublyWarpedMetric {
    NiParameters params;

    WarpProfile fiber() const { return WarpProfile::ni_fiber(params); }
    WarpProfile base() const { return WarpProfile::ni_base(params); }
    static constexpr int dimension = 8;
    /// Product of the fiber and scaled-base cross-section volumes: pi^4/3.
    static double level_coefficient();
};

/// Sectional curvatures of the doubly warped metric in the five coordinate
/// 2-plane families.
struct SectionalSample {
    double r = 0;
    double k_x1x2 = 0;  // two fiber directions
    double k_xy = 0;    // mixed fiber/base
    double k_y1y2 = 0;  // two base directions
    double k_rx = 0;    // radial/fiber
    double k_ry = 0;    // radial/base
};

SectionalSample sectional_components_doubly(const DoublyWarpedMetric& metric, double r);

/// Ricci curvature of a single warp metric in the radial and tangential
/// directions.
struct RicciSample {
    double r = 0;
    double ric_rr = 0;
    double ric_tan = 0;
};

RicciSample ricci_components_single(const SingleWarpMetric& metric, double r);

/// Volume of the geodesic ball of radius r about the pole.
double volume(const SingleWarpMetric& metric, double r);
double volume(const DoublyWarpedMetric& metric, double r);

/// Least-squares slope of log V against log r over a log-spaced sample of
/// the window [r_lo, r_hi].
double growth_degree(const SingleWarpMetric& metric, double r_lo, double r_hi,
                     int per_decade = 16);
double growth_degree(const DoublyWarpedMetric& metric, double r_lo, double r_hi,
                     int per_decade = 16);

/// lim V(r)/r^n together with the Euclidean reference value.
struct VolumeRatio {
    double v_m = 0;     // asymptotic ratio
    double v0n1 = 0;    // unit-ball volume in the model space
    bool maximal = false;
};

VolumeRatio asymptotic_volume_ratio(const SingleWarpMetric& metric);
VolumeRatio asymptotic_volume_ratio(const DoublyWarpedMetric& metric);

}  // namespace conelab
