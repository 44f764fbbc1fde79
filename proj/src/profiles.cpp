#include "conelab/profiles.hpp"

#include <cmath>
#include <stdexcept>

#include "conelab/numerics.hpp"

namespace conelab {

NiParameters NiParameters::reference() {
    NiParameters p;
    p.a = 1.0 / (2.0 * std::sqrt(3.0));
    p.delta = 2.0 * PI / std::sqrt(3.0);
    p.c0 = 13.0 / 4.0;
    p.c1 = 4.0;
    p.c2 = 1.0;
    p.c3 = 0.5;
    p.c4 = 0.25;
    p.c5 = 0.25;
    p.c6 = 1.0;
    return p;
}

void NiParameters::validate() const {
    const double vals[] = {a, delta, c0, c1, c2, c3, c4, c5, c6};
    const char* names[] = {"a", "delta", "c0", "c1", "c2", "c3", "c4", "c5", "c6"};
    for (int i = 0; i < 9; ++i)
        if (!(vals[i] > 0.0))
            throw std::domain_error(std::string("NiParameters: ") + names[i] +
                                    " must be positive");
}

NiAssumptionReport check_ni_assumptions(const NiParameters& p, double tolerance) {
    p.validate();
    NiAssumptionReport rep;
    rep.tolerance = tolerance;

    // (assp 1)  a = sqrt(c2 c3^2 / (c1 - c2))
    rep.residual[0] = (p.c1 > p.c2)
                          ? p.a - std::sqrt(p.c2 * p.c3 * p.c3 / (p.c1 - p.c2))
                          : std::numeric_limits<double>::infinity();
    // (assp 2)  c1 = c2 + (1 - c2^2 c3^2) / (c2 c3^2)
    rep.residual[1] = p.c1 - (p.c2 + (1.0 - p.c2 * p.c2 * p.c3 * p.c3) / (p.c2 * p.c3 * p.c3));
    // (assp 3)  delta = arcsin(a (c1 - c2)) / a
    double arg = p.a * (p.c1 - p.c2);
    rep.residual[2] = (std::abs(arg) <= 1.0)
                          ? p.delta - std::asin(arg) / p.a
                          : std::numeric_limits<double>::infinity();
    // (assp 4)  c0 - c5 = c1 - c2
    rep.residual[3] = (p.c0 - p.c5) - (p.c1 - p.c2);
    // (assp 5)  c5 c6^2 = c2 c3^2
    rep.residual[4] = p.c5 * p.c6 * p.c6 - p.c2 * p.c3 * p.c3;
    // (assp 6)  c4 + c5 c6 = c2 c3
    rep.residual[5] = (p.c4 + p.c5 * p.c6) - p.c2 * p.c3;
    // (assp 7)  c6 > c3, strict
    rep.residual[6] = p.c6 - p.c3;
    // (assp 8)  c0 >= 3 c2 + c5
    rep.residual[7] = p.c0 - (3.0 * p.c2 + p.c5);

    for (int i = 0; i < 6; ++i) rep.holds[i] = std::abs(rep.residual[i]) <= tolerance;
    rep.holds[6] = rep.residual[6] > 0.0;
    rep.holds[7] = rep.residual[7] >= -tolerance;
    rep.all_hold = true;
    for (bool h : rep.holds) rep.all_hold = rep.all_hold && h;
    return rep;
}

NiParameters derive_ni_parameters(double c2, double c3, double c6) {
    if (!(c2 > 0.0) || !(c3 > 0.0) || !(c6 > 0.0))
        throw std::domain_error("derive_ni_parameters: c2, c3, c6 must be positive");
    if (!(c2 * c3 < 1.0))
        throw std::domain_error(
            "derive_ni_parameters: (assp 2) infeasible, c2*c3 must be below 1 "
            "for c1 - c2 to be positive");
    if (!(c6 > c3))
        throw std::domain_error(
            "derive_ni_parameters: (assp 7) infeasible, c6 must exceed c3");

    NiParameters p;
    p.c2 = c2;
    p.c3 = c3;
    p.c6 = c6;
    p.c1 = c2 + (1.0 - c2 * c2 * c3 * c3) / (c2 * c3 * c3);
    p.a = std::sqrt(c2 * c3 * c3 / (p.c1 - c2));
    p.delta = std::asin(p.a * (p.c1 - p.c2)) / p.a;
    p.c5 = c2 * c3 * c3 / (c6 * c6);
    p.c4 = c2 * c3 - p.c5 * c6;
    p.c0 = p.c5 + (p.c1 - p.c2);
    p.validate();
    return p;
}

namespace {

double ni_cap(double a, double r, int order) {
    switch (order) {
        case 0: return std::sin(a * r) / a;
        case 1: return std::cos(a * r);
        default: return -a * std::sin(a * r);
    }
}

double ni_tail_f(const NiParameters& p, double x, int order) {
    double e = std::exp(-p.c3 * x);
    switch (order) {
        case 0: return p.c1 - p.c2 * e;
        case 1: return p.c2 * p.c3 * e;
        default: return -p.c2 * p.c3 * p.c3 * e;
    }
}

double ni_tail_h(const NiParameters& p, double x, int order) {
    double e = std::exp(-p.c6 * x);
    switch (order) {
        case 0: return p.c0 + p.c4 * x - p.c5 * e;
        case 1: return p.c4 + p.c5 * p.c6 * e;
        default: return -p.c5 * p.c6 * p.c6 * e;
    }
}

// Mollifier branch of the compact perturbation: a - b*exp(-1/(1-s^2)) with
// s = r + 3^{-1/4}; the branch ends where s reaches 1.
double ding_branch(double a, double b, double r, int order) {
    double q = std::pow(3.0, -0.25);
    double s = r + q;
    double w = 1.0 - s * s;
    if (w <= 0.0) return order == 0 ? a : 0.0;  // one-sided limit at the join
    double e = std::exp(-1.0 / w);
    switch (order) {
        case 0: return a - b * e;
        case 1: return b * e * 2.0 * s / (w * w);
        default: return -b * e * 2.0 * (3.0 * s * s * s * s - 1.0) / (w * w * w * w);
    }
}

}  // namespace

double WarpProfile::ding_plateau() {
    double t = 1.0 - 1.0 / std::sqrt(3.0);
    return t * t / (2.0 * std::pow(3.0, -0.25));
}

double WarpProfile::ding_join() { return 1.0 - std::pow(3.0, -0.25); }

WarpProfile WarpProfile::exact_cone(double beta) {
    if (!(beta > 0.0)) throw std::domain_error("exact_cone: slope must be positive");
    WarpProfile p;
    p.kind_ = Kind::ExactCone;
    p.beta_ = beta;
    p.asymptote_ = {true, beta, 0.0, 0.0};
    p.pieces_.push_back({std::numeric_limits<double>::infinity(),
                         [beta](double r, int order) {
                             return order == 0 ? beta * r : (order == 1 ? beta : 0.0);
                         }});
    return p;
}

WarpProfile WarpProfile::asym_conical(double beta) {
    if (!(beta > 0.0) || !(beta <= 1.0))
        throw std::domain_error("asym_conical: slope must lie in (0, 1]");
    WarpProfile p;
    p.kind_ = Kind::AsymConical;
    p.beta_ = beta;
    p.asymptote_ = {true, beta, 1.0 - beta, 0.0};
    p.pieces_.push_back({std::numeric_limits<double>::infinity(),
                         [beta](double r, int order) {
                             switch (order) {
                                 case 0: return beta * r - (1.0 - beta) * std::expm1(-r);
                                 case 1: return beta + (1.0 - beta) * std::exp(-r);
                                 default: return -(1.0 - beta) * std::exp(-r);
                             }
                         }});
    return p;
}

WarpProfile WarpProfile::ding() {
    WarpProfile p;
    p.kind_ = Kind::Ding;
    double a = ding_plateau();
    double t = 1.0 - 1.0 / std::sqrt(3.0);
    double b = a * std::exp(1.0 / t);
    double join = ding_join();
    p.joins_ = {join};
    p.asymptote_ = {false, 0.0, 0.0, a};
    p.pieces_.push_back({join, [a, b](double r, int order) { return ding_branch(a, b, r, order); }});
    p.pieces_.push_back({std::numeric_limits<double>::infinity(),
                         [a](double, int order) { return order == 0 ? a : 0.0; }});
    return p;
}

WarpProfile WarpProfile::ni_fiber(const NiParameters& params) {
    params.validate();
    WarpProfile p;
    p.kind_ = Kind::NiFiber;
    p.ni_ = params;
    p.joins_ = {params.delta};
    p.asymptote_ = {false, 0.0, 0.0, params.c1};
    NiParameters q = params;
    p.pieces_.push_back({params.delta,
                         [q](double r, int order) { return ni_cap(q.a, r, order); }});
    p.pieces_.push_back({std::numeric_limits<double>::infinity(),
                         [q](double r, int order) { return ni_tail_f(q, r - q.delta, order); }});
    return p;
}

WarpProfile WarpProfile::ni_base(const NiParameters& params) {
    params.validate();
    WarpProfile p;
    p.kind_ = Kind::NiBase;
    p.ni_ = params;
    p.joins_ = {params.delta};
    p.asymptote_ = {true, params.c4, params.c0 - params.c4 * params.delta, 0.0};
    NiParameters q = params;
    p.pieces_.push_back({params.delta,
                         [q](double r, int order) { return ni_cap(q.a, r, order); }});
    p.pieces_.push_back({std::numeric_limits<double>::infinity(),
                         [q](double r, int order) { return ni_tail_h(q, r - q.delta, order); }});
    return p;
}

WarpProfile WarpProfile::custom(std::vector<Piece> pieces, Asymptote asympt) {
    if (pieces.empty()) throw std::invalid_argument("WarpProfile::custom: no pieces");
    WarpProfile p;
    p.kind_ = Kind::Custom;
    p.asymptote_ = asympt;
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i) p.joins_.push_back(pieces[i].r_end);
    p.pieces_ = std::move(pieces);
    return p;
}

double WarpProfile::eval(double r, int order) const {
    if (r < 0.0) throw std::domain_error("WarpProfile::eval: radius must be nonnegative");
    if (order < 0 || order > 2)
        throw std::domain_error("WarpProfile::eval: order must be 0, 1 or 2");
    for (const Piece& piece : pieces_)
        if (r <= piece.r_end) return piece.eval(r, order);
    return pieces_.back().eval(r, order);
}

const NiParameters& WarpProfile::ni() const {
    if (!ni_) throw std::logic_error("WarpProfile: no doubly warped parameters attached");
    return *ni_;
}

double WarpProfile::eval_piece(std::size_t index, double r, int order) const {
    if (index >= pieces_.size())
        throw std::out_of_range("WarpProfile::eval_piece: no such piece");
    return pieces_[index].eval(r, order);
}

std::vector<GluingResidual> c2_gluing_residuals(const WarpProfile& profile) {
    std::vector<GluingResidual> out;
    const auto& joins = profile.joins();
    for (std::size_t j = 0; j < joins.size(); ++j) {
        GluingResidual g;
        g.r = joins[j];
        for (int order = 0; order <= 2; ++order)
            g.delta[order] = profile.eval_piece(j, g.r, order) -
                             profile.eval_piece(j + 1, g.r, order);
        out.push_back(g);
    }
    return out;
}

void SingleWarpMetric::validate() const {
    if (n < 3) throw std::domain_error("SingleWarpMetric: dimension must be at least 3");
}

double DoublyWarpedMetric::level_coefficient() { return PI * PI * PI * PI / 3.0; }

SectionalSample sectional_components_doubly(const DoublyWarpedMetric& metric, double r) {
    if (!(r > 0.0))
        throw std::domain_error("sectional_components_doubly: radius must be positive");
    WarpProfile fp = metric.fiber(), hp = metric.base();
    double f = fp.eval(r, 0), df = fp.eval(r, 1), ddf = fp.eval(r, 2);
    double h = hp.eval(r, 0), dh = hp.eval(r, 1), ddh = hp.eval(r, 2);
    SectionalSample s;
    s.r = r;
    s.k_x1x2 = 1.0 / (f * f) - (df / f) * (df / f);
    s.k_xy = f * f / (h * h * h * h) - df * dh / (f * h);
    s.k_y1y2 = 4.0 / (h * h) - 3.0 * f * f / (h * h * h * h) - (dh / h) * (dh / h);
    s.k_rx = -ddf / f;
    s.k_ry = -ddh / h;
    return s;
}

RicciSample ricci_components_single(const SingleWarpMetric& metric, double r) {
    metric.validate();
    if (!(r > 0.0))
        throw std::domain_error("ricci_components_single: radius must be positive");
    double f = metric.profile.eval(r, 0);
    double df = metric.profile.eval(r, 1);
    double ddf = metric.profile.eval(r, 2);
    RicciSample s;
    s.r = r;
    s.ric_rr = -(metric.n - 1) * ddf / f;
    s.ric_tan = -ddf / f + (metric.n - 2) * (1.0 - df * df) / (f * f);
    return s;
}

namespace {

double volume_of_density(const std::function<double(double)>& density, double r) {
    if (!(r >= 0.0)) throw std::domain_error("volume: radius must be nonnegative");
    if (r == 0.0) return 0.0;
    double head_end = std::min(r, 1.0);
    double v = integrate(density, 0.0, head_end, 1e-12);
    if (r > 1.0) v += integrate_log(density, 1.0, r, 1e-12);
    return v;
}

}  // namespace

double volume(const SingleWarpMetric& metric, double r) {
    metric.validate();
    double area = unit_sphere_volume(metric.n - 1);
    const WarpProfile& f = metric.profile;
    int n = metric.n;
    return volume_of_density(
        [&f, n, area](double s) { return area * std::pow(f.eval(s, 0), n - 1); }, r);
}

double volume(const DoublyWarpedMetric& metric, double r) {
    WarpProfile f = metric.fiber(), h = metric.base();
    double c = DoublyWarpedMetric::level_coefficient();
    return volume_of_density(
        [&f, &h, c](double s) {
            double fv = f.eval(s, 0), hv = h.eval(s, 0);
            return c * fv * fv * fv * hv * hv * hv * hv;
        },
        r);
}

namespace {

template <typename Metric>
double growth_degree_impl(const Metric& metric, double r_lo, double r_hi, int per_decade) {
    if (!(r_lo > 0.0) || !(r_hi > r_lo))
        throw std::domain_error("growth_degree: need 0 < r_lo < r_hi");
    std::vector<double> rs = log_grid(r_lo, r_hi, per_decade);
    std::vector<double> lx(rs.size()), ly(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
        lx[i] = std::log(rs[i]);
        ly[i] = std::log(volume(metric, rs[i]));
    }
    return least_squares_slope(lx, ly);
}

}  // namespace

double growth_degree(const SingleWarpMetric& metric, double r_lo, double r_hi, int per_decade) {
    return growth_degree_impl(metric, r_lo, r_hi, per_decade);
}

double growth_degree(const DoublyWarpedMetric& metric, double r_lo, double r_hi, int per_decade) {
    return growth_degree_impl(metric, r_lo, r_hi, per_decade);
}

VolumeRatio asymptotic_volume_ratio(const SingleWarpMetric& metric) {
    metric.validate();
    VolumeRatio v;
    v.v0n1 = unit_ball_volume(metric.n);
    const Asymptote& a = metric.profile.asymptote();
    if (a.linear && a.slope > 0.0) {
        v.v_m = unit_sphere_volume(metric.n - 1) * std::pow(a.slope, metric.n - 1) / metric.n;
        v.maximal = true;
    }
    return v;
}

VolumeRatio asymptotic_volume_ratio(const DoublyWarpedMetric&) {
    VolumeRatio v;
    v.v0n1 = unit_ball_volume(DoublyWarpedMetric::dimension);
    // the base warp grows linearly but the fiber warp is bounded, so the
    // volume degree is 5 < 8 and the top-order ratio vanishes
    v.v_m = 0.0;
    v.maximal = false;
    return v;
}

}  // namespace conelab
