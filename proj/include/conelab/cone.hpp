#pragma once

#include <string>
#include <vector>

namespace conelab {

/// Discrete spectrum of the cross-section Laplacian, ascending, starting at
/// eigenvalue zero with multiplicity one, together with the total measure of
/// the cross-section.  Sphere-backed spectra remember their geometry so that
/// explicit eigenfunctions are available.
struct CrossSectionSpectrum {
    struct Entry {
        double lambda = 0;
        int multiplicity = 1;
    };
    std::vector<Entry> entries;
    double mass = 0;

    // populated by sphere_spectrum; sphere_dim = 0 means "abstract"
    int sphere_dim = 0;
    double sphere_radius = 0;

    void validate() const;
};

/// First `count` eigenvalues of the round sphere S^m scaled to radius beta:
/// lambda_k = k (k + m - 1) / beta^2 with the spherical-harmonic
/// multiplicities; mass = beta^m * Vol(S^m).
CrossSectionSpectrum sphere_spectrum(int m, double beta, int count);

/// Metric cone C(X) of homogeneity power kappa >= 2 over a cross-section
/// known through its spectrum.
struct ConeSpace {
    double kappa = 0;
    CrossSectionSpectrum cross_section;

    void validate() const;
};

/// Positive root alpha of alpha (kappa + alpha - 2) = lambda.
double exponent_of(double lambda, double kappa);
/// Inverse map: lambda = alpha (kappa + alpha - 2).
double eigenvalue_of(double alpha, double kappa);

/// Homogeneity degrees of the harmonic expansion, one per spectrum entry.
struct DegreeSpectrum {
    struct Entry {
        double alpha = 0;
        int multiplicity = 1;
    };
    std::vector<Entry> entries;
};

DegreeSpectrum degree_spectrum(const ConeSpace& cone, int count = -1);

struct SpectrumMembership {
    bool member = false;
    double distance = 0;
    double nearest = 0;
};

SpectrumMembership is_in_degree_spectrum(const ConeSpace& cone, double alpha,
                                         double tolerance = 1e-6);

/// Measure of the ball of radius r about the vertex: mass * r^kappa / kappa.
double conic_ball_measure(const ConeSpace& cone, double r);

/// Finite harmonic expansion sum_i c_i r^{alpha_i} phi_i with phi_i an
/// L^2-orthonormal eigenfunction for spectrum entry `mode`.  A mode index may
/// repeat up to its multiplicity (distinct eigenfunctions in one eigenspace).
struct ConeHarmonic {
    struct Term {
        double c = 0;
        int mode = 0;
    };
    std::vector<Term> terms;

    void validate(const ConeSpace& cone) const;
};

/// Max over spectrum terms of the relative defect of the radial Laplacian
/// identity, checked by centered finite differences with step r * 1e-4.
double cone_laplacian_residual(const ConeSpace& cone, const ConeHarmonic& h, double r);

/// Ball average of u^2 under the conic measure:
/// (kappa / mass) * sum c_i^2 r^{2 alpha_i} / (2 alpha_i + kappa).
double cone_J(const ConeSpace& cone, const ConeHarmonic& h, double r);

/// Level-set and energy functionals in closed form.
double cone_I(const ConeSpace& cone, const ConeHarmonic& h, double r);
double cone_D(const ConeSpace& cone, const ConeHarmonic& h, double r);
/// cone_D / cone_I; throws std::domain_error for the zero harmonic.
double cone_frequency(const ConeSpace& cone, const ConeHarmonic& h, double r);

/// Classical three-level maximum check M(r/2)^2 <= M(r) M(r/4) with
/// M(s) = max over the sampled cross-section of |u(s, .)|.  Available for
/// circle and 2-sphere cross-sections (axis-symmetric eigenfunctions).
bool hadamard_check(const ConeSpace& cone, const ConeHarmonic& h, double r,
                    int samples = 4096);

/// Axis-symmetric L^2-normalized eigenfunction of spectrum entry `mode`
/// evaluated at polar angle theta, for sphere cross-sections.
double sphere_mode_value(const CrossSectionSpectrum& spec, int mode, double theta);

}  // namespace conelab
