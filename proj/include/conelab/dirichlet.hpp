#pragma once

#include <string>
#include <vector>

#include "conelab/numerics.hpp"
#include "conelab/profiles.hpp"
#include "conelab/three_circles.hpp"

namespace conelab {

/// Cross-sectional factor of a separated mode: the L2 mass, sup and gradient
/// sup of the (unit-sphere-normalised) eigenfunction psi_k on S^{n-1}.
struct AngularData {
    int k = 0;
    double lambda = 0;      // eigenvalue on the unit sphere S^{n-1}
    double l2_mass = 0;     // integral of psi^2 over S^{n-1}
    double max_abs = 0;     // sup |psi|
    double grad_max = 0;    // sup |grad psi| on the unit sphere
};

AngularData angular_mode(int n, int k);

/// Radial factor of a separated harmonic u = phi(rt) psi_k(theta), solved in
/// the scale-free variables (log phi, rt phi'/phi) so that pure power modes are
/// integrated without error and extreme growth never overflows.
///
/// grid/log_phi/big_g always span the full requested range; phi/dphi are the
/// materialised values exp(log_phi), truncated to the prefix on which they are
/// representable (overflowed marks a proper prefix).
struct RadialMode {
    int n = 3;
    int k = 0;
    double lambda = 0;   // angular eigenvalue
    double gamma = 0;    // vanishing order at the pole
    AngularData angular;

    std::vector<double> grid;      // rt, log-uniform
    std::vector<double> log_phi;   // log phi(rt)
    std::vector<double> big_g;     // rt * phi'(rt) / phi(rt)
    std::vector<double> big_g_dot; // d big_g / d log rt, for interpolation

    std::vector<double> phi;       // prefix of exp(log_phi)
    std::vector<double> dphi;      // prefix of phi' = phi * big_g / rt
    bool overflowed = false;
    double solved_max = 0;         // last radius with representable phi

    double norm_radius = 1;        // phi(norm_radius) = 1 at construction

    double log_phi_at(double r) const;
    double big_g_at(double r) const;   // rt phi'/phi
    double g_at(double r) const;       // phi'/phi
    double phi_at(double r) const;
    double dphi_at(double r) const;

    void shift_log(double delta);  // rescale phi by exp(delta)
};

/// Regular solution on [0, r_max], normalised phi(1) = 1 (requires r_max >= 1).
RadialMode solve_radial_mode(const SingleWarpMetric& metric, int k, double r_max,
                             int per_decade = 512, double rel_tol = 1e-10);

/// Dirichlet-normalised solution on [0, R]: phi(R) = 1.
RadialMode dirichlet_mode(const SingleWarpMetric& metric, int k, double big_r,
                          int per_decade = 512, double rel_tol = 1e-10);

/// Cached cumulative integrals of a separated mode over coordinate balls,
/// kept in log form so extreme levels neither overflow nor underflow.
class ModeAverages {
  public:
    ModeAverages(const SingleWarpMetric& metric, const RadialMode& mode);

    double log_mass(double r) const;    // log int_{B_r} u^2
    double log_volume(double r) const;  // log nu(B_r)
    double log_j(double r) const;       // log_mass - log_volume
    double r_max() const { return r_max_; }

  private:
    LogIntegralTable mass_, vol_;
    double log_angular_ = 0;
    double r_max_ = 0;
};

/// Rescales the mode so that J(r_norm) = 1; returns the applied log factor.
/// Degenerate when J underflows so badly the factor is not representable.
double normalize_by_j(const SingleWarpMetric& metric, RadialMode& mode, double r_norm);

/// Max over interior grid nodes of the radial equation residual
/// |phi'' + (n-1)(f'/f) phi' - (lambda/f^2) phi| / scale from divided
/// differences on the materialised prefix.
double harmonicity_residual(const SingleWarpMetric& metric, const RadialMode& mode);

/// Doubling scan of J over [r0 * R, R]: checks J(r) <= 2^{2d} J(r/2).
struct DoublingScanReport {
    std::vector<double> radii;
    std::vector<double> margins;   // log[2^{2d} J(r/2)] - log J(r)
    std::vector<bool> ok;
    bool all_ok = false;
    double first_failure = 0;      // 0 when none
    double threshold = 0;          // smallest radius past which all pass
};

DoublingScanReport lemma53_scan(const SingleWarpMetric& metric, const RadialMode& mode,
                                double d, double r0, double big_r, int samples = 65);

/// Pointwise envelope |u| <= C rho^d over [r_lo, r_hi] for the separated mode;
/// flags divergence when the fitted constant is still growing at r_hi.
struct EnvelopeReport {
    double constant = 0;
    double log_constant = 0;
    double argmax = 0;
    bool diverging = false;
};

EnvelopeReport growth_envelope(const SingleWarpMetric& metric, const RadialMode& mode,
                               double d, double r_lo, double r_hi);

/// Growth classification of the regular mode: fits log phi against log rt
/// (polynomial, slope = degree) and against rt (exponential, slope = rate) and
/// keeps the better fit over the top decade.
struct GrowthClass {
    bool polynomial = false;
    double degree = 0;       // fitted when polynomial
    double rate = 0;         // fitted when exponential
    double fit_residual = 0; // rms residual of the chosen fit
};

GrowthClass growth_classification(const SingleWarpMetric& metric, int k, double r_max = 200);

/// One exhaustion level of the existence pipeline.
struct PipelineLevel {
    int index = 0;
    double big_r = 0;
    bool solved = false;
    bool normalized = false;
    double norm_log_factor = 0;
    DoublingScanReport doubling;
    CascadeReport cascade;
    EnvelopeReport envelope;
    double sup_diff = -1;          // sup distance to previous level, -1 at level 1
    std::string note;
};

struct PipelineReport {
    bool success = false;
    int exit_code = 2;             // 0 pass, 1 verification failure, 2 precondition
    std::string failing_stage;     // empty on success
    std::string precondition_note;

    int n = 3;
    int k = 1;
    double d = 0;
    double k0 = 0;
    int levels_requested = 0;

    std::vector<PipelineLevel> levels;

    double compact_radius = 0;     // rt with b = k0 (rho fallback when flagged)
    bool rho_compact = false;
    double j_at_norm = 0;          // J(k0/2) after normalisation (1 when normalised)
    bool vanishes_at_pole = false;
    double final_sup = 0;          // sup |u| on the compact at the last level
};

/// Runs the exhaustion: for R_i = k0 2^i solve the Dirichlet mode, normalise by
/// J(k0/2), scan the doubling inequality on [r0 R_i, R_i], cascade down to k0,
/// bound |u| <= C rho^d on [k0/4, R_i/2], then track sup-convergence on the
/// compact {b <= k0} and certify the limit is nonconstant.
PipelineReport existence_pipeline(const SingleWarpMetric& metric, int k, double d,
                                  double k0 = 2, int levels = 6, double r0 = 0.25,
                                  double sup_tol = 1e-6);

}  // namespace conelab
