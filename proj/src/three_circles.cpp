#include "conelab/three_circles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "conelab/dirichlet.hpp"
#include "conelab/frequency.hpp"

namespace conelab {

namespace {

constexpr double kRelSlack = 1e-12;
constexpr double kLogSlack = 1e-10;

bool leq_rel(double lhs, double rhs) {
    return lhs <= rhs + kRelSlack * std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

bool eq_rel(double lhs, double rhs) {
    return std::abs(lhs - rhs) <= kRelSlack * std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

void require_off_spectrum(const ConeSpace& cone, double alpha, double tol) {
    SpectrumMembership m = is_in_degree_spectrum(cone, alpha, tol);
    if (m.member) {
        std::ostringstream os;
        os << "three_circles: comparison exponent " << alpha
           << " lies on the degree spectrum (nearest element " << m.nearest << ")";
        throw std::domain_error(os.str());
    }
}

ThreeCirclesReport compare_levels(double r, double alpha, double v_r, double v_half,
                                  double v_quarter) {
    ThreeCirclesReport rep;
    rep.r = r;
    rep.alpha = alpha;
    rep.j_r = v_r;
    rep.j_half = v_half;
    rep.j_quarter = v_quarter;
    double gain = std::exp2(2 * alpha);
    rep.premise = leq_rel(v_r, gain * v_half);
    rep.conclusion = leq_rel(v_half, gain * v_quarter);
    rep.implication = !rep.premise || rep.conclusion;
    return rep;
}

}  // namespace

void WeightSystem::validate() const {
    if (weights.empty()) throw std::invalid_argument("WeightSystem: empty");
    if (weights.size() != exponents.size())
        throw std::invalid_argument("WeightSystem: weights/exponents size mismatch");
    if (exponents.front() != 0.0)
        throw std::invalid_argument("WeightSystem: exponents must start at 0");
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0)) throw std::invalid_argument("WeightSystem: negative weight");
        if (i > 0 && !(exponents[i] > exponents[i - 1]))
            throw std::invalid_argument("WeightSystem: exponents must be strictly ascending");
    }
    if (!(alpha > 0)) throw std::invalid_argument("WeightSystem: comparison level must be positive");
}

Lemma31Report lemma31(const WeightSystem& ws) {
    ws.validate();
    Lemma31Report rep;
    for (std::size_t i = 0; i < ws.weights.size(); ++i) {
        double w = ws.weights[i], ai = ws.exponents[i];
        rep.hypothesis_lhs += w;
        rep.hypothesis_rhs += std::exp2(2 * (ws.alpha - ai)) * w;
        rep.conclusion_lhs += std::exp2(-2 * ai) * w;
        rep.conclusion_rhs += std::exp2(2 * (ws.alpha - 2 * ai)) * w;
    }
    rep.hypothesis_holds = leq_rel(rep.hypothesis_lhs, rep.hypothesis_rhs);
    rep.conclusion_holds = leq_rel(rep.conclusion_lhs, rep.conclusion_rhs);
    rep.equality_case = eq_rel(rep.conclusion_lhs, rep.conclusion_rhs);
    return rep;
}

ThreeCirclesReport three_circles_J(const ConeSpace& cone, const ConeHarmonic& h,
                                   double r, double alpha, double spectrum_tol) {
    cone.validate();
    h.validate(cone);
    if (!(r > 0)) throw std::domain_error("three_circles_J: radius must be positive");
    if (!(alpha > 0)) throw std::domain_error("three_circles_J: exponent must be positive");
    require_off_spectrum(cone, alpha, spectrum_tol);
    return compare_levels(r, alpha, cone_J(cone, h, r), cone_J(cone, h, r / 2),
                          cone_J(cone, h, r / 4));
}

ThreeCirclesReport three_circles_I(const ConeSpace& cone, const ConeHarmonic& h,
                                   double r, double alpha, double spectrum_tol) {
    cone.validate();
    h.validate(cone);
    if (!(r > 0)) throw std::domain_error("three_circles_I: radius must be positive");
    if (!(alpha > 0)) throw std::domain_error("three_circles_I: exponent must be positive");
    require_off_spectrum(cone, alpha, spectrum_tol);
    for (const auto& term : h.terms)
        if (term.mode == 0 && term.c != 0)
            throw std::domain_error("three_circles_I: harmonic must vanish at the vertex");
    return compare_levels(r, alpha, cone_I(cone, h, r), cone_I(cone, h, r / 2),
                          cone_I(cone, h, r / 4));
}

double j_function_numeric(const SingleWarpMetric& metric, const RadialMode& mode, double r) {
    ModeAverages avg(metric, mode);
    return std::exp(avg.log_j(r));
}

ThreeCirclesReport three_circles_J(const SingleWarpMetric& metric, const RadialMode& mode,
                                   double r, double alpha, double spectrum_tol) {
    if (!(r > 0)) throw std::domain_error("three_circles_J: radius must be positive");
    require_off_spectrum(tangent_cone(metric, alpha + 2), alpha, spectrum_tol);
    ModeAverages avg(metric, mode);
    ThreeCirclesReport rep;
    rep.r = r;
    rep.alpha = alpha;
    double lr = avg.log_j(r), lh = avg.log_j(r / 2), lq = avg.log_j(r / 4);
    rep.j_r = std::exp(lr);
    rep.j_half = std::exp(lh);
    rep.j_quarter = std::exp(lq);
    double gain = 2 * alpha * std::log(2.0);
    rep.premise = lr <= lh + gain + kLogSlack;
    rep.conclusion = lh <= lq + gain + kLogSlack;
    rep.implication = !rep.premise || rep.conclusion;
    return rep;
}

ThreeCirclesReport three_circles_I(const SingleWarpMetric& metric, const RadialMode& mode,
                                   double r, double alpha, double spectrum_tol) {
    if (!(r > 0)) throw std::domain_error("three_circles_I: radius must be positive");
    if (mode.k < 1) throw std::domain_error("three_circles_I: mode must vanish at the pole");
    require_off_spectrum(tangent_cone(metric, alpha + 2), alpha, spectrum_tol);
    FrequencyCurves curves = frequency_curve(metric, mode, r / 8, r * 1.5, 16);
    ThreeCirclesReport rep;
    rep.r = r;
    rep.alpha = alpha;
    double lr = curves.log_i_at(r), lh = curves.log_i_at(r / 2), lq = curves.log_i_at(r / 4);
    rep.j_r = std::exp(lr);
    rep.j_half = std::exp(lh);
    rep.j_quarter = std::exp(lq);
    double gain = 2 * alpha * std::log(2.0);
    rep.premise = lr <= lh + gain + kLogSlack;
    rep.conclusion = lh <= lq + gain + kLogSlack;
    rep.implication = !rep.premise || rep.conclusion;
    return rep;
}

CascadeReport cascade_from_log(const std::vector<double>& log_j_values, double alpha, double k0) {
    if (log_j_values.size() < 2)
        throw std::invalid_argument("cascade: need at least two dyadic levels");
    if (!(k0 > 0) || !(alpha > 0)) throw std::domain_error("cascade: k0 and alpha must be positive");
    CascadeReport rep;
    std::size_t m = log_j_values.size();
    rep.radii.resize(m);
    rep.step_ok.assign(m, true);
    double gain = 2 * alpha * std::log(2.0);
    rep.all_steps = true;
    double max_log_ratio = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
        rep.radii[j] = k0 * std::ldexp(1.0, static_cast<int>(j));
        if (j > 0) {
            bool ok = log_j_values[j] <= log_j_values[j - 1] + gain + kLogSlack;
            rep.step_ok[j] = ok;
            if (!ok && rep.first_failure < 0) rep.first_failure = static_cast<int>(j);
            rep.all_steps = rep.all_steps && ok;
        }
        double lr = log_j_values[j] - log_j_values[0] - gain * static_cast<double>(j);
        max_log_ratio = std::max(max_log_ratio, lr);
    }
    rep.envelope_constant = std::exp(gain + log_j_values[0]);
    rep.max_ratio = std::exp(max_log_ratio);
    rep.envelope_ok = max_log_ratio <= gain + kLogSlack;
    return rep;
}

CascadeReport cascade(const std::vector<double>& j_values, double alpha, double k0) {
    std::vector<double> logs(j_values.size());
    for (std::size_t i = 0; i < j_values.size(); ++i) {
        if (!(j_values[i] > 0)) throw std::domain_error("cascade: J values must be positive");
        logs[i] = std::log(j_values[i]);
    }
    return cascade_from_log(logs, alpha, k0);
}

}  // namespace conelab
