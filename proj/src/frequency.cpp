#include "conelab/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace conelab {

namespace {
constexpr double kPoleRadius = 1e-6;
}

AmbientConstants ambient_constants(const SingleWarpMetric& metric) {
    metric.validate();
    AmbientConstants amb;
    amb.n = metric.n;
    VolumeRatio vr = asymptotic_volume_ratio(metric);
    amb.v_m = vr.v_m;
    amb.v0n1 = unit_ball_volume(metric.n);
    amb.ratio = vr.v_m / amb.v0n1;
    amb.maximal = vr.maximal;
    return amb;
}

ConeSpace tangent_cone(const SingleWarpMetric& metric, double alpha_cover) {
    metric.validate();
    Asymptote asym = metric.profile.asymptote();
    if (!asym.linear)
        throw std::domain_error(
            "tangent_cone: warp has no linear asymptote, so there is no conical tangent at "
            "infinity");
    double beta = asym.slope;
    int n = metric.n, kk = 0;
    while (kk < 100000) {
        double lambda = static_cast<double>(kk) * (kk + n - 2) / (beta * beta);
        if (exponent_of(lambda, n) > alpha_cover) break;
        ++kk;
    }
    ConeSpace cone;
    cone.kappa = n;
    cone.cross_section = sphere_spectrum(n - 1, beta, kk + 1);
    return cone;
}

GreenRadial::GreenRadial(const SingleWarpMetric& metric, int per_decade) : metric_(metric) {
    metric_.validate();
    AmbientConstants amb = ambient_constants(metric_);
    if (!amb.maximal)
        throw std::domain_error(
            "GreenRadial: model is parabolic (bounded warp has non-maximal volume growth and the "
            "tail integral of f^{1-n} diverges), no positive Green's function exists");
    c_ = amb.ratio;
    int n = metric_.n;
    const WarpProfile& f = metric_.profile;
    Asymptote asym = f.asymptote();
    beta_ = asym.slope;
    intercept_ = asym.intercept;
    exact_cone_ = f.kind() == WarpProfile::Kind::ExactCone;
    r_min_ = kPoleRadius;
    if (exact_cone_) {
        split_ = 1.0;
        return;
    }

    double s = 1.0;
    while (s < 1e8) {
        double affine = beta_ * s + intercept_;
        if (std::abs(f.eval(s) - affine) <= 1e-12 * affine) break;
        s *= 2.0;
    }
    if (s >= 1e8)
        throw std::runtime_error("GreenRadial: warp does not approach its affine asymptote");
    split_ = s;

    grid_ = log_grid(r_min_, split_, per_decade);
    // cum_[i] holds the integral of f^{1-n} from grid_[i] out to the split
    // radius, accumulated tail-first so no entry is a difference of large
    // terms.  Each panel is integrated in log radius.
    cum_.assign(grid_.size(), 0.0);
    auto density = [&f, n](double tt) {
        double x = std::exp(tt);
        return (1 - n) * std::log(f.eval(x)) + tt;
    };
    for (std::size_t i = grid_.size() - 1; i-- > 0;) {
        double piece =
            std::exp(panel_log_integral(density, std::log(grid_[i]), std::log(grid_[i + 1])));
        cum_[i] = cum_[i + 1] + piece;
    }
}

double GreenRadial::outward(double rt) const {
    int n = metric_.n;
    const WarpProfile& f = metric_.profile;
    auto density = [&f, n](double tt) {
        double x = std::exp(tt);
        return (1 - n) * std::log(f.eval(x)) + tt;
    };
    if (rt < r_min_) {
        double lo = std::log(rt), hi = std::log(r_min_);
        int panels = static_cast<int>(std::ceil((hi - lo) / 0.05));
        double below = 0.0;
        for (int j = 0; j < panels; ++j) {
            double a = lo + (hi - lo) * j / panels;
            double b = lo + (hi - lo) * (j + 1) / panels;
            below += std::exp(panel_log_integral(density, a, b));
        }
        return below + cum_.front();
    }
    auto it = std::upper_bound(grid_.begin(), grid_.end(), rt);
    std::size_t i = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
    i = std::min(i, grid_.size() - 2);
    double rest = rt >= grid_[i + 1]
                      ? 0.0
                      : std::exp(panel_log_integral(density, std::log(rt), std::log(grid_[i + 1])));
    return cum_[i + 1] + rest;
}

double GreenRadial::tail(double rt) const {
    int n = metric_.n;
    return std::pow(beta_ * rt + intercept_, 2 - n) / (beta_ * (n - 2));
}

double GreenRadial::green(double rt) const {
    if (!(rt > 0)) throw std::domain_error("GreenRadial: radius must be positive");
    int n = metric_.n;
    if (exact_cone_) return std::pow(beta_, 1 - n) * std::pow(rt, 2 - n);
    if (rt >= split_) return (n - 2) * tail(rt);
    return (n - 2) * (outward(rt) + tail(split_));
}

double GreenRadial::b(double rt) const {
    if (exact_cone_) return rt;
    int n = metric_.n;
    return std::exp(std::log(c_ * green(rt)) / (2 - n));
}

double GreenRadial::bprime(double rt) const {
    if (exact_cone_) return 1.0;
    int n = metric_.n;
    double g = green(rt);
    return b(rt) * std::pow(metric_.profile.eval(rt), 1 - n) / g;
}

double GreenRadial::pole_slope() const {
    if (exact_cone_) return 1.0;
    return std::pow(c_, 1.0 / (2 - metric_.n));
}

double GreenRadial::b_inverse(double r) const {
    if (!(r > 0)) throw std::domain_error("GreenRadial: b-level must be positive");
    if (exact_cone_) return r;
    double hi = r * 1.0000001;
    while (b(hi) < r) hi *= 2;
    double lo = r / (2 * pole_slope());
    while (b(lo) > r) lo /= 2;
    auto fn = [&](double x) { return b(x) - r; };
    auto dfn = [&](double x) { return bprime(x); };
    return solve_monotone(fn, lo, hi, 1e-14 * std::max(r, 1.0), dfn);
}

class FrequencyCurves::Engine {
  public:
    Engine(const SingleWarpMetric& metric, RadialMode mode, std::shared_ptr<const GreenRadial> green)
        : metric_(metric), mode_(std::move(mode)), green_(std::move(green)) {
        n_ = metric_.n;
        log_s_ = std::log(mode_.angular.l2_mass);
        std::vector<double> t(mode_.grid.size());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::log(mode_.grid[i]);
        // The tables call back into the engine lazily; Engine objects are
        // heap-owned by FrequencyCurves and never copied, so `this` is stable.
        auto grad_density = [this](double tt) {
            double r = std::exp(tt);
            double ff = metric_.profile.eval(r);
            double g = mode_.big_g_at(r) / r;
            double en = g * g + mode_.lambda / (ff * ff);
            if (!(en > 0)) return -std::numeric_limits<double>::infinity();
            return 2 * mode_.log_phi_at(r) + std::log(en) + (n_ - 1) * std::log(ff) + tt;
        };
        auto weighted = [this, grad_density](double tt) {
            return grad_density(tt) + 2 * log_bprime(std::exp(tt));
        };
        double head = mode_.k >= 1 ? 2 * mode_.gamma + n_ - 2 : 0.0;
        dirichlet_ = LogIntegralTable(t, grad_density, head);
        weighted_ = LogIntegralTable(t, weighted, head);
    }

    double rt_of(double r) const {
        double rt = green_ ? green_->b_inverse(r) : r;
        if (rt > mode_.grid.back() * (1 + 1e-9))
            throw std::out_of_range("frequency: radius beyond the solved mode range");
        return rt;
    }

    double log_bprime(double rt) const { return green_ ? std::log(green_->bprime(rt)) : 0.0; }

    double log_i(double r) const {
        double rt = rt_of(r);
        double ff = metric_.profile.eval(rt);
        return (1 - n_) * std::log(r) + 2 * mode_.log_phi_at(rt) + log_bprime(rt) +
               (n_ - 1) * std::log(ff) + log_s_;
    }

    double log_f(double r) const {
        double rt = rt_of(r);
        double ff = metric_.profile.eval(rt);
        double g = mode_.big_g_at(rt) / rt;
        if (!(std::abs(g) > 0)) return -std::numeric_limits<double>::infinity();
        return (3 - n_) * std::log(r) + 2 * (mode_.log_phi_at(rt) + std::log(std::abs(g))) +
               log_bprime(rt) + (n_ - 1) * std::log(ff) + log_s_;
    }

    double log_d(double r) const {
        double rt = rt_of(r);
        return (2 - n_) * std::log(r) + dirichlet_.log_upto(std::log(rt)) + log_s_;
    }

    double log_e(double r) const {
        double rt = rt_of(r);
        return (2 - n_) * std::log(r) + weighted_.log_upto(std::log(rt)) + log_s_;
    }

    double freq(double r) const { return std::exp(log_d(r) - log_i(r)); }
    double w(double r) const { return std::exp(log_e(r) - log_i(r)); }

    bool surrogate() const { return green_ == nullptr; }
    const RadialMode& mode() const { return mode_; }
    const SingleWarpMetric& metric() const { return metric_; }

  private:
    SingleWarpMetric metric_;
    RadialMode mode_;
    std::shared_ptr<const GreenRadial> green_;
    LogIntegralTable dirichlet_, weighted_;
    int n_ = 3;
    double log_s_ = 0;
};

double FrequencyCurves::log_i_at(double rr) const { return engine->log_i(rr); }
double FrequencyCurves::log_d_at(double rr) const { return engine->log_d(rr); }
double FrequencyCurves::log_e_at(double rr) const { return engine->log_e(rr); }
double FrequencyCurves::log_f_at(double rr) const { return engine->log_f(rr); }
double FrequencyCurves::freq_at(double rr) const { return engine->freq(rr); }
double FrequencyCurves::w_at(double rr) const { return engine->w(rr); }

FrequencyCurves frequency_curve(const SingleWarpMetric& metric, const RadialMode& mode,
                                double r_min, double r_max, int per_decade) {
    if (!(r_min > 0) || !(r_max > r_min))
        throw std::domain_error("frequency_curve: need 0 < r_min < r_max");
    AmbientConstants amb = ambient_constants(metric);
    std::shared_ptr<const GreenRadial> green;
    if (amb.maximal) green = std::make_shared<const GreenRadial>(metric);
    FrequencyCurves curves;
    curves.n = metric.n;
    curves.k = mode.k;
    curves.rho_surrogate = !amb.maximal;
    Asymptote asym = metric.profile.asymptote();
    if (asym.linear) {
        double lambda = mode.lambda / (asym.slope * asym.slope);
        curves.alpha = exponent_of(lambda, metric.n);
    }
    curves.engine = std::make_shared<const FrequencyCurves::Engine>(metric, mode, green);

    curves.r = log_grid(r_min, r_max, per_decade);
    std::size_t m = curves.r.size();
    curves.log_i.resize(m);
    curves.log_d.resize(m);
    curves.log_e.resize(m);
    curves.log_f.resize(m);
    curves.i.resize(m);
    curves.d.resize(m);
    curves.e.resize(m);
    curves.f.resize(m);
    curves.freq.resize(m);
    curves.w.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        double r = curves.r[j];
        curves.log_i[j] = curves.engine->log_i(r);
        curves.log_d[j] = curves.engine->log_d(r);
        curves.log_e[j] = curves.engine->log_e(r);
        curves.log_f[j] = curves.engine->log_f(r);
        curves.i[j] = std::exp(curves.log_i[j]);
        curves.d[j] = std::exp(curves.log_d[j]);
        curves.e[j] = std::exp(curves.log_e[j]);
        curves.f[j] = std::exp(curves.log_f[j]);
        curves.freq[j] = std::exp(curves.log_d[j] - curves.log_i[j]);
        curves.w[j] = std::exp(curves.log_e[j] - curves.log_i[j]);
    }
    return curves;
}

double check_derivative_identity(const FrequencyCurves& curves) {
    if (curves.r.size() < 3) throw std::invalid_argument("check_derivative_identity: curve too short");
    double worst = 0.0;
    const double h = 1e-4;
    double span = std::log((1 + h) / (1 - h));
    for (std::size_t j = 1; j + 1 < curves.r.size(); ++j) {
        double r = curves.r[j];
        double slope = (curves.engine->log_i(r * (1 + h)) - curves.engine->log_i(r * (1 - h))) / span;
        double target = 2 * curves.engine->freq(r);
        double res = std::abs(slope - target) / std::max(1.0, std::abs(target));
        worst = std::max(worst, res);
    }
    return worst;
}

double w_defect(const FrequencyCurves& curves, double r, double factor) {
    if (!(factor > 1)) throw std::domain_error("w_defect: factor must exceed 1");
    double s0 = std::log(r), s1 = std::log(factor * r);
    int m = std::max(32, static_cast<int>(std::ceil(64 * (s1 - s0) / std::log(10.0))));
    double ds = (s1 - s0) / m;
    double prev = std::log(curves.engine->w(r));
    double defect = 0.0;
    for (int i = 1; i <= m; ++i) {
        double cur = std::log(curves.engine->w(std::exp(s0 + i * ds)));
        double slope = (cur - prev) / ds;
        if (slope < 0) defect += slope * ds;
        prev = cur;
    }
    return defect;
}

DScanReport d_doubling_scan(const FrequencyCurves& curves, double factor, double bound) {
    if (!(factor > 1) || !(bound > 0))
        throw std::domain_error("d_doubling_scan: factor must exceed 1 and bound must be positive");
    DScanReport rep;
    rep.factor = factor;
    rep.bound = bound;
    double lb = std::log(bound);
    for (double r : curves.r) {
        double top = factor * r;
        if (top > curves.r.back() * (1 + 1e-12)) break;
        rep.tested.push_back(r);
        if (curves.engine->log_d(top) <= curves.engine->log_d(r) + lb + 1e-10) {
            rep.qualifying.push_back(r);
            rep.largest_qualifying = r;
        }
    }
    rep.all_qualify = !rep.tested.empty() && rep.qualifying.size() == rep.tested.size();
    return rep;
}

double e_over_d(const FrequencyCurves& curves, double r) {
    return curves.engine->log_d(r) - curves.engine->log_e(r);
}

DGrowthReport d_growth_from_i(const FrequencyCurves& curves, double r, double gamma,
                              double factor_d) {
    if (!(gamma > 0) || !(factor_d > 1))
        throw std::domain_error("d_growth_from_i: need gamma > 0 and factor > 1");
    DGrowthReport rep;
    int n = curves.n;
    double lg = std::log(gamma);
    double p_lhs = curves.engine->log_i(2 * factor_d * r);
    double p_rhs = lg + curves.engine->log_i(r / 2);
    double c_lhs = curves.engine->log_d(factor_d * r);
    double c_rhs = (n - 2) * std::log(2.0) + lg + curves.engine->log_d(r);
    rep.premise_margin = p_rhs - p_lhs;
    rep.conclusion_margin = c_rhs - c_lhs;
    rep.premise = rep.premise_margin >= -1e-10;
    rep.conclusion = rep.conclusion_margin >= -1e-10;
    rep.implication = !rep.premise || rep.conclusion;
    return rep;
}

FrequencyBoundReport frequency_bound_scan(const FrequencyCurves& curves, double d,
                                          double r_min, double r_max, double mult) {
    if (!(d > 0)) throw std::domain_error("frequency_bound_scan: degree must be positive");
    double lo = std::max(r_min, curves.r.front());
    double hi = std::min(r_max, curves.r.back());
    if (!(hi > lo)) throw std::domain_error("frequency_bound_scan: empty window");
    FrequencyBoundReport rep;
    rep.bound = mult * d;
    std::vector<double> g = log_grid(lo, hi, 128);
    for (double r : g) {
        double fr = curves.engine->freq(r);
        if (fr > rep.sup_freq) {
            rep.sup_freq = fr;
            rep.argmax = r;
        }
    }
    rep.pass = rep.sup_freq <= rep.bound * (1 + 1e-12);
    return rep;
}

SupRatioReport sup_ratio_check(const SingleWarpMetric& metric, const RadialMode& mode,
                               double theta, double r0, int levels, double spread_tol) {
    if (!(theta > 0) || !(theta < 1))
        throw std::domain_error("sup_ratio_check: theta must lie in (0, 1)");
    if (levels < 2) throw std::invalid_argument("sup_ratio_check: need at least two levels");
    AmbientConstants amb = ambient_constants(metric);
    std::shared_ptr<const GreenRadial> green;
    if (amb.maximal) green = std::make_shared<const GreenRadial>(metric);
    FrequencyCurves curves = frequency_curve(metric, mode, r0 / 2, r0 * std::exp2(levels), 8);

    const double neg_inf = -std::numeric_limits<double>::infinity();
    double log_max_psi = std::log(mode.angular.max_abs);
    double log_max_grad =
        mode.angular.grad_max > 0 ? std::log(mode.angular.grad_max) : neg_inf;

    // log of the pointwise envelope phi'^2 max psi^2 + (phi/f)^2 max|grad psi|^2
    auto log_grad_sq = [&](double rt, double lphi, double g) {
        double radial = std::abs(g) > 0
                            ? 2 * (lphi + std::log(std::abs(g)) - std::log(rt) + log_max_psi)
                            : neg_inf;
        double angular = 2 * (lphi - std::log(metric.profile.eval(rt)) + log_max_grad);
        return log_add_exp(radial, angular);
    };

    SupRatioReport rep;
    double u_lo = std::numeric_limits<double>::infinity(), u_hi = 0;
    double g_lo = std::numeric_limits<double>::infinity(), g_hi = 0;
    for (int j = 0; j < levels; ++j) {
        double r = r0 * std::exp2(j);
        double level = (1 - theta) * r;
        double rt = green ? green->b_inverse(level) : level;
        if (rt > mode.grid.back() * (1 + 1e-9))
            throw std::out_of_range("sup_ratio_check: level beyond the solved mode range");
        double best_u = mode.log_phi_at(rt);
        double best_g = log_grad_sq(rt, mode.log_phi_at(rt), mode.big_g_at(rt));
        for (std::size_t i = 0; i < mode.grid.size() && mode.grid[i] <= rt; ++i) {
            best_u = std::max(best_u, mode.log_phi[i]);
            best_g = std::max(best_g, log_grad_sq(mode.grid[i], mode.log_phi[i], mode.big_g[i]));
        }
        double log_i = curves.log_i_at(r);
        double ur = std::exp(2 * (best_u + log_max_psi) - log_i);
        double gr = best_g == neg_inf ? 0.0 : std::exp(2 * std::log(r) + best_g - log_i);
        rep.radii.push_back(r);
        rep.u_ratio.push_back(ur);
        rep.grad_ratio.push_back(gr);
        u_lo = std::min(u_lo, ur);
        u_hi = std::max(u_hi, ur);
        g_lo = std::min(g_lo, gr);
        g_hi = std::max(g_hi, gr);
    }
    rep.u_spread = u_hi / u_lo;
    rep.grad_spread = g_lo > 0 ? g_hi / g_lo : (g_hi > 0 ? std::numeric_limits<double>::infinity() : 1.0);
    rep.pass = rep.u_spread <= spread_tol && rep.grad_spread <= spread_tol;
    return rep;
}

}  // namespace conelab
