#include "conelab/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "conelab/numerics.hpp"

namespace conelab {

void CrossSectionSpectrum::validate() const {
    if (entries.empty()) throw std::domain_error("CrossSectionSpectrum: empty spectrum");
    if (!(mass > 0.0)) throw std::domain_error("CrossSectionSpectrum: mass must be positive");
    if (entries.front().lambda != 0.0 || entries.front().multiplicity != 1)
        throw std::domain_error(
            "CrossSectionSpectrum: spectrum must start at eigenvalue 0 with multiplicity 1");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].multiplicity < 1)
            throw std::domain_error("CrossSectionSpectrum: multiplicities must be positive");
        if (i > 0 && !(entries[i].lambda > entries[i - 1].lambda))
            throw std::domain_error("CrossSectionSpectrum: eigenvalues must increase");
    }
}

CrossSectionSpectrum sphere_spectrum(int m, double beta, int count) {
    if (m < 1) throw std::domain_error("sphere_spectrum: sphere dimension must be positive");
    if (!(beta > 0.0)) throw std::domain_error("sphere_spectrum: radius must be positive");
    if (count < 1) throw std::domain_error("sphere_spectrum: need at least one eigenvalue");
    CrossSectionSpectrum s;
    s.sphere_dim = m;
    s.sphere_radius = beta;
    s.mass = std::pow(beta, m) * unit_sphere_volume(m);
    for (int k = 0; k < count; ++k) {
        CrossSectionSpectrum::Entry e;
        e.lambda = k * (k + m - 1) / (beta * beta);
        if (k == 0) {
            e.multiplicity = 1;
        } else if (m == 1) {
            e.multiplicity = 2;
        } else {
            // dim of degree-k spherical harmonics on S^m
            double v = 2.0 * k + m - 1.0;
            for (int j = 1; j <= m - 2; ++j) v *= (k + j) / static_cast<double>(j + 1);
            e.multiplicity = static_cast<int>(std::lround(v));
        }
        s.entries.push_back(e);
    }
    s.validate();
    return s;
}

void ConeSpace::validate() const {
    if (!(kappa >= 2.0)) throw std::domain_error("ConeSpace: power must be at least 2");
    cross_section.validate();
}

double exponent_of(double lambda, double kappa) {
    if (!(kappa >= 2.0)) throw std::domain_error("exponent_of: power must be at least 2");
    if (!(lambda >= 0.0)) throw std::domain_error("exponent_of: eigenvalue must be nonnegative");
    double s = kappa - 2.0;
    return 0.5 * (-s + std::sqrt(s * s + 4.0 * lambda));
}

double eigenvalue_of(double alpha, double kappa) {
    if (!(kappa >= 2.0)) throw std::domain_error("eigenvalue_of: power must be at least 2");
    if (!(alpha >= 0.0)) throw std::domain_error("eigenvalue_of: degree must be nonnegative");
    return alpha * (kappa + alpha - 2.0);
}

DegreeSpectrum degree_spectrum(const ConeSpace& cone, int count) {
    cone.validate();
    int available = static_cast<int>(cone.cross_section.entries.size());
    if (count < 0 || count > available) count = available;
    DegreeSpectrum d;
    for (int i = 0; i < count; ++i) {
        const auto& e = cone.cross_section.entries[i];
        d.entries.push_back({exponent_of(e.lambda, cone.kappa), e.multiplicity});
    }
    return d;
}

SpectrumMembership is_in_degree_spectrum(const ConeSpace& cone, double alpha,
                                         double tolerance) {
    DegreeSpectrum d = degree_spectrum(cone);
    SpectrumMembership m;
    m.distance = std::numeric_limits<double>::infinity();
    for (const auto& e : d.entries) {
        double dist = std::abs(e.alpha - alpha);
        if (dist < m.distance) {
            m.distance = dist;
            m.nearest = e.alpha;
        }
    }
    m.member = m.distance <= tolerance;
    return m;
}

double conic_ball_measure(const ConeSpace& cone, double r) {
    cone.validate();
    if (!(r >= 0.0)) throw std::domain_error("conic_ball_measure: radius must be nonnegative");
    return cone.cross_section.mass * std::pow(r, cone.kappa) / cone.kappa;
}

void ConeHarmonic::validate(const ConeSpace& cone) const {
    int count = static_cast<int>(cone.cross_section.entries.size());
    std::vector<int> used(count, 0);
    for (const Term& t : terms) {
        if (t.mode < 0 || t.mode >= count)
            throw std::out_of_range("ConeHarmonic: mode index outside the truncated spectrum");
        ++used[t.mode];
    }
    for (int i = 0; i < count; ++i)
        if (used[i] > cone.cross_section.entries[i].multiplicity)
            throw std::domain_error(
                "ConeHarmonic: more terms on one eigenvalue than its multiplicity");
}

double cone_laplacian_residual(const ConeSpace& cone, const ConeHarmonic& h, double r) {
    cone.validate();
    h.validate(cone);
    if (!(r > 0.0)) throw std::domain_error("cone_laplacian_residual: radius must be positive");
    double step = r * 1e-4;
    double worst = 0.0;
    for (const auto& t : h.terms) {
        double lambda = cone.cross_section.entries[t.mode].lambda;
        double alpha = exponent_of(lambda, cone.kappa);
        auto u = [alpha](double s) { return std::pow(s, alpha); };
        double d2 = (u(r + step) - 2.0 * u(r) + u(r - step)) / (step * step);
        double d1 = (u(r + step) - u(r - step)) / (2.0 * step);
        double radial = d2 + (cone.kappa - 1.0) / r * d1;
        double angular = lambda / (r * r) * u(r);
        double scale = std::max({std::abs(radial), std::abs(angular), 1e-300});
        worst = std::max(worst, std::abs(radial - angular) / scale);
    }
    return worst;
}

namespace {

double term_alpha(const ConeSpace& cone, const ConeHarmonic::Term& t) {
    return exponent_of(cone.cross_section.entries[t.mode].lambda, cone.kappa);
}

}  // namespace

double cone_J(const ConeSpace& cone, const ConeHarmonic& h, double r) {
    cone.validate();
    h.validate(cone);
    if (!(r > 0.0)) throw std::domain_error("cone_J: radius must be positive");
    double sum = 0.0;
    for (const auto& t : h.terms) {
        double alpha = term_alpha(cone, t);
        sum += t.c * t.c * std::pow(r, 2.0 * alpha) / (2.0 * alpha + cone.kappa);
    }
    return cone.kappa / cone.cross_section.mass * sum;
}

double cone_I(const ConeSpace& cone, const ConeHarmonic& h, double r) {
    cone.validate();
    h.validate(cone);
    if (!(r > 0.0)) throw std::domain_error("cone_I: radius must be positive");
    double sum = 0.0;
    for (const auto& t : h.terms) sum += t.c * t.c * std::pow(r, 2.0 * term_alpha(cone, t));
    return sum;
}

double cone_D(const ConeSpace& cone, const ConeHarmonic& h, double r) {
    cone.validate();
    h.validate(cone);
    if (!(r > 0.0)) throw std::domain_error("cone_D: radius must be positive");
    double sum = 0.0;
    for (const auto& t : h.terms) {
        double alpha = term_alpha(cone, t);
        sum += t.c * t.c * alpha * std::pow(r, 2.0 * alpha);
    }
    return sum;
}

double cone_frequency(const ConeSpace& cone, const ConeHarmonic& h, double r) {
    double i = cone_I(cone, h, r);
    if (i == 0.0)
        throw std::domain_error("cone_frequency: undefined for the zero harmonic");
    return cone_D(cone, h, r) / i;
}

namespace {

double legendre(int k, double x) {
    if (k == 0) return 1.0;
    double pm = 1.0, p = x;
    for (int j = 2; j <= k; ++j) {
        double next = ((2.0 * j - 1.0) * x * p - (j - 1.0) * pm) / j;
        pm = p;
        p = next;
    }
    return p;
}

}  // namespace

double sphere_mode_value(const CrossSectionSpectrum& spec, int mode, double theta) {
    if (spec.sphere_dim != 1 && spec.sphere_dim != 2)
        throw std::domain_error(
            "sphere_mode_value: explicit eigenfunctions available for circle and "
            "2-sphere cross-sections only");
    if (mode < 0 || mode >= static_cast<int>(spec.entries.size()))
        throw std::out_of_range("sphere_mode_value: no such mode");
    double beta = spec.sphere_radius;
    if (spec.sphere_dim == 1) {
        if (mode == 0) return 1.0 / std::sqrt(2.0 * PI * beta);
        return std::cos(mode * theta) / std::sqrt(PI * beta);
    }
    double nk = std::sqrt((2.0 * mode + 1.0) / (4.0 * PI * beta * beta));
    return nk * legendre(mode, std::cos(theta));
}

bool hadamard_check(const ConeSpace& cone, const ConeHarmonic& h, double r, int samples) {
    cone.validate();
    h.validate(cone);
    if (!(r > 0.0)) throw std::domain_error("hadamard_check: radius must be positive");
    if (samples < 16) throw std::invalid_argument("hadamard_check: too few samples");
    double period = cone.cross_section.sphere_dim == 1 ? 2.0 * PI : PI;
    auto level_max = [&](double s) {
        double m = 0.0;
        for (int i = 0; i <= samples; ++i) {
            double theta = period * i / samples;
            double u = 0.0;
            for (const auto& t : h.terms)
                u += t.c * std::pow(s, term_alpha(cone, t)) *
                     sphere_mode_value(cone.cross_section, t.mode, theta);
            m = std::max(m, std::abs(u));
        }
        return m;
    };
    double m1 = level_max(r), m2 = level_max(r / 2), m4 = level_max(r / 4);
    return m2 * m2 <= m1 * m4 * (1.0 + 1e-12);
}

}  // namespace conelab
