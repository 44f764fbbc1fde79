#include "conelab/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "conelab/cone.hpp"
#include "conelab/frequency.hpp"

namespace conelab {

namespace {

constexpr double kPoleRadius = 1e-6;
constexpr double kLogSlack = 1e-10;
constexpr double kExpCutoff = 709.0;

double gegenbauer(int k, double nu, double x) {
    if (k == 0) return 1.0;
    double prev = 1.0, cur = 2 * nu * x;
    for (int j = 2; j <= k; ++j) {
        double next = (2 * x * (j + nu - 1) * cur - (j + 2 * nu - 2) * prev) / j;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// weight-h norm: integral over [-1,1] of C_k^nu(x)^2 (1-x^2)^{nu-1/2} dx
double gegenbauer_norm(int k, double nu) {
    double lg = std::log(PI) + (1 - 2 * nu) * std::log(2.0) + std::lgamma(k + 2 * nu) -
                std::lgamma(k + 1.0) - std::log(k + nu) - 2 * std::lgamma(nu);
    return std::exp(lg);
}

struct LineFit {
    double slope = 0, intercept = 0, rms = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit out;
    std::size_t m = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double den = m * sxx - sx * sx;
    out.slope = (m * sxy - sx * sy) / den;
    out.intercept = (sy - out.slope * sx) / m;
    double ss = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double e = y[i] - (out.slope * x[i] + out.intercept);
        ss += e * e;
    }
    out.rms = std::sqrt(ss / m);
    return out;
}

std::vector<double> mode_grid(double r_max, int per_decade) {
    std::vector<double> g = log_grid(kPoleRadius, r_max, per_decade);
    if (r_max >= 1.0) {
        // snap the nearest node to exactly 1 so normalisation there is exact
        std::size_t best = 0;
        double err = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < g.size(); ++i) {
            double e = std::abs(std::log(g[i]));
            if (e < err) {
                err = e;
                best = i;
            }
        }
        g[best] = 1.0;
    }
    return g;
}

void materialize(RadialMode& mode) {
    std::size_t m = mode.grid.size(), prefix = m;
    for (std::size_t i = 0; i < m; ++i)
        if (mode.log_phi[i] > kExpCutoff) {
            prefix = i;
            break;
        }
    mode.phi.resize(prefix);
    mode.dphi.resize(prefix);
    for (std::size_t i = 0; i < prefix; ++i) {
        mode.phi[i] = std::exp(mode.log_phi[i]);
        mode.dphi[i] = mode.phi[i] * mode.big_g[i] / mode.grid[i];
    }
    mode.overflowed = prefix < m;
    mode.solved_max = prefix > 0 ? mode.grid[prefix - 1] : 0.0;
}

RadialMode solve_mode(const SingleWarpMetric& metric, int k, const std::vector<double>& grid,
                      double rel_tol) {
    metric.validate();
    if (k < 0) throw std::domain_error("solve_radial_mode: mode index must be nonnegative");
    int n = metric.n;
    RadialMode mode;
    mode.n = n;
    mode.k = k;
    mode.lambda = static_cast<double>(k) * (k + n - 2);
    mode.gamma = exponent_of(mode.lambda, n);
    mode.angular = angular_mode(n, k);
    mode.grid = grid;
    std::size_t m = grid.size();
    mode.log_phi.assign(m, 0.0);
    mode.big_g.assign(m, 0.0);
    mode.big_g_dot.assign(m, 0.0);

    if (k == 0) {
        materialize(mode);
        return mode;
    }

    const WarpProfile& f = metric.profile;
    double lambda = mode.lambda, gamma = mode.gamma;
    auto coeffs = [&](double r, double& a, double& b) {
        double ff = f.eval(r), fp = f.eval(r, 1);
        double q = r / ff;
        a = lambda * q * q;
        b = (n - 1) * r * fp / ff - 1.0;
    };
    auto rhs = [&](double t, const double* y, double* dy) {
        double r = std::exp(t), a, b;
        coeffs(r, a, b);
        dy[0] = y[1];
        dy[1] = a - b * y[1] - y[1] * y[1];
    };

    std::vector<double> tg(m);
    for (std::size_t i = 0; i < m; ++i) tg[i] = std::log(grid[i]);

    double a0 = f.eval(0.0, 2);
    double c1 = -a0 * (gamma * (n - 1) * 0.5 + lambda) / (2 * gamma + n - 1);
    std::vector<double> y0 = {0.0, gamma + c1 * grid.front()};

    auto rows = integrate_ode(rhs, 2, tg, y0, rel_tol, 1e-14);
    for (std::size_t i = 0; i < m; ++i) {
        mode.log_phi[i] = rows[i][0];
        mode.big_g[i] = rows[i][1];
        double a, b;
        coeffs(grid[i], a, b);
        mode.big_g_dot[i] = a - b * mode.big_g[i] - mode.big_g[i] * mode.big_g[i];
    }
    materialize(mode);
    return mode;
}

std::size_t locate(const std::vector<double>& grid, double r) {
    auto it = std::upper_bound(grid.begin(), grid.end(), r);
    std::size_t i = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
    return std::min(i, grid.size() - 2);
}

}  // namespace

AngularData angular_mode(int n, int k) {
    if (n < 3) throw std::domain_error("angular_mode: dimension must be at least 3");
    if (k < 0) throw std::domain_error("angular_mode: mode index must be nonnegative");
    AngularData a;
    a.k = k;
    a.lambda = static_cast<double>(k) * (k + n - 2);
    if (k == 0) {
        a.l2_mass = unit_sphere_volume(n - 1);
        a.max_abs = 1.0;
        a.grad_max = 0.0;
        return a;
    }
    double nu = 0.5 * (n - 2);
    double h = unit_sphere_volume(n - 2) * gegenbauer_norm(k, nu);
    double norm = 1.0 / std::sqrt(h);
    a.l2_mass = 1.0;
    a.max_abs = norm * gegenbauer(k, nu, 1.0);
    double gmax = 0.0;
    const int samples = 4096;
    for (int i = 0; i <= samples; ++i) {
        double theta = PI * i / samples;
        double x = std::cos(theta);
        double dpsi = -norm * std::sin(theta) * 2 * nu * gegenbauer(k - 1, nu + 1, x);
        gmax = std::max(gmax, std::abs(dpsi));
    }
    a.grad_max = gmax;
    return a;
}

double RadialMode::log_phi_at(double r) const {
    double t = std::log(r);
    if (r <= grid.front())
        return log_phi.front() + big_g.front() * (t - std::log(grid.front()));
    std::size_t i = locate(grid, r);
    return hermite_value(std::log(grid[i]), log_phi[i], big_g[i], std::log(grid[i + 1]),
                         log_phi[i + 1], big_g[i + 1], t);
}

double RadialMode::big_g_at(double r) const {
    if (r <= grid.front()) return big_g.front();
    std::size_t i = locate(grid, r);
    return hermite_value(std::log(grid[i]), big_g[i], big_g_dot[i], std::log(grid[i + 1]),
                         big_g[i + 1], big_g_dot[i + 1], std::log(r));
}

double RadialMode::g_at(double r) const { return big_g_at(r) / r; }

double RadialMode::phi_at(double r) const { return std::exp(log_phi_at(r)); }

double RadialMode::dphi_at(double r) const { return phi_at(r) * g_at(r); }

void RadialMode::shift_log(double delta) {
    for (double& v : log_phi) v += delta;
    materialize(*this);
}

RadialMode solve_radial_mode(const SingleWarpMetric& metric, int k, double r_max,
                             int per_decade, double rel_tol) {
    if (!(r_max >= 1.0))
        throw std::invalid_argument("solve_radial_mode: range must reach the unit radius");
    RadialMode mode = solve_mode(metric, k, mode_grid(r_max, per_decade), rel_tol);
    std::size_t j = locate(mode.grid, 1.0);
    if (mode.grid[j] != 1.0) ++j;
    mode.shift_log(-mode.log_phi[j]);
    mode.norm_radius = 1.0;
    return mode;
}

RadialMode dirichlet_mode(const SingleWarpMetric& metric, int k, double big_r,
                          int per_decade, double rel_tol) {
    if (!(big_r > kPoleRadius * 10))
        throw std::invalid_argument("dirichlet_mode: boundary radius too small");
    RadialMode mode = solve_mode(metric, k, mode_grid(big_r, per_decade), rel_tol);
    mode.shift_log(-mode.log_phi.back());
    mode.norm_radius = big_r;
    return mode;
}

ModeAverages::ModeAverages(const SingleWarpMetric& metric, const RadialMode& mode) {
    metric.validate();
    int n = metric.n;
    r_max_ = mode.grid.back();
    std::vector<double> t(mode.grid.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::log(mode.grid[i]);

    // The tables evaluate their densities lazily, so the lambdas own a shared
    // snapshot of the metric and mode rather than referencing the arguments.
    struct Payload {
        SingleWarpMetric metric;
        RadialMode mode;
    };
    auto pay = std::make_shared<const Payload>(Payload{metric, mode});
    auto mass_l = [pay, n](double tt) {
        double r = std::exp(tt);
        return 2 * pay->mode.log_phi_at(r) + (n - 1) * std::log(pay->metric.profile.eval(r)) + tt;
    };
    auto vol_l = [pay, n](double tt) {
        double r = std::exp(tt);
        return (n - 1) * std::log(pay->metric.profile.eval(r)) + tt;
    };
    mass_ = LogIntegralTable(t, mass_l, 2 * mode.gamma + n);
    vol_ = LogIntegralTable(t, vol_l, static_cast<double>(n));
    log_angular_ = std::log(mode.angular.l2_mass) - std::log(unit_sphere_volume(n - 1));
}

double ModeAverages::log_mass(double r) const {
    if (!(r > 0)) throw std::domain_error("ModeAverages: radius must be positive");
    if (r > r_max_ * (1 + 1e-12))
        throw std::out_of_range("ModeAverages: radius beyond the solved range");
    return mass_.log_upto(std::log(r)) + log_angular_;
}

double ModeAverages::log_volume(double r) const {
    if (!(r > 0)) throw std::domain_error("ModeAverages: radius must be positive");
    if (r > r_max_ * (1 + 1e-12))
        throw std::out_of_range("ModeAverages: radius beyond the solved range");
    return vol_.log_upto(std::log(r));
}

double ModeAverages::log_j(double r) const { return log_mass(r) - log_volume(r); }

double normalize_by_j(const SingleWarpMetric& metric, RadialMode& mode, double r_norm) {
    ModeAverages avg(metric, mode);
    double lj = avg.log_j(r_norm);
    if (!std::isfinite(lj))
        throw std::runtime_error("normalize_by_j: ball average is degenerate at this radius");
    mode.shift_log(-0.5 * lj);
    return -0.5 * lj;
}

double harmonicity_residual(const SingleWarpMetric& metric, const RadialMode& mode) {
    const WarpProfile& f = metric.profile;
    int n = metric.n;
    std::size_t m = mode.phi.size();
    if (m < 5) throw std::runtime_error("harmonicity_residual: solved prefix too short");
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < m; ++i) {
        bool usable = true;
        for (std::size_t j = i - 2; j <= i + 2; ++j)
            if (!(mode.phi[j] > 0) || !std::isfinite(mode.phi[j])) usable = false;
        if (!usable) continue;
        std::vector<double> x(mode.grid.begin() + i - 2, mode.grid.begin() + i + 3);
        std::vector<double> w1 = fd_weights(mode.grid[i], x, 1);
        std::vector<double> w2 = fd_weights(mode.grid[i], x, 2);
        double d1 = 0, d2 = 0;
        for (int j = 0; j < 5; ++j) {
            d1 += w1[j] * mode.phi[i - 2 + j];
            d2 += w2[j] * mode.phi[i - 2 + j];
        }
        double r = mode.grid[i], ff = f.eval(r), fp = f.eval(r, 1);
        double drift = (n - 1) * fp / ff * d1;
        double angular = mode.lambda / (ff * ff) * mode.phi[i];
        double res = std::abs(d2 + drift - angular);
        double scale = std::max({std::abs(d2), std::abs(drift), std::abs(angular), 1e-300});
        worst = std::max(worst, res / scale);
    }
    return worst;
}

DoublingScanReport lemma53_scan(const SingleWarpMetric& metric, const RadialMode& mode,
                                double d, double r0, double big_r, int samples) {
    if (!(d > 0)) throw std::domain_error("lemma53_scan: degree must be positive");
    if (!(r0 > 0) || !(r0 < 1)) throw std::domain_error("lemma53_scan: need 0 < r0 < 1");
    if (samples < 2) throw std::invalid_argument("lemma53_scan: need at least two samples");
    ModeAverages avg(metric, mode);
    DoublingScanReport rep;
    double lo = r0 * big_r, hi = big_r;
    double gain = 2 * d * std::log(2.0);
    rep.radii.resize(samples);
    rep.margins.resize(samples);
    rep.ok.assign(samples, false);
    rep.all_ok = true;
    int last_fail = -1;
    for (int j = 0; j < samples; ++j) {
        double r = lo * std::pow(hi / lo, static_cast<double>(j) / (samples - 1));
        rep.radii[j] = r;
        double margin = avg.log_j(r / 2) + gain - avg.log_j(r);
        rep.margins[j] = margin;
        bool ok = margin >= -kLogSlack;
        rep.ok[j] = ok;
        if (!ok) {
            rep.all_ok = false;
            if (rep.first_failure == 0) rep.first_failure = r;
            last_fail = j;
        }
    }
    rep.threshold = last_fail + 1 < samples ? rep.radii[last_fail + 1] : 0.0;
    return rep;
}

EnvelopeReport growth_envelope(const SingleWarpMetric& metric, const RadialMode& mode,
                               double d, double r_lo, double r_hi) {
    (void)metric;
    if (!(r_lo > 0) || !(r_hi > r_lo))
        throw std::domain_error("growth_envelope: need 0 < r_lo < r_hi");
    if (r_hi > mode.grid.back() * (1 + 1e-12))
        throw std::out_of_range("growth_envelope: range beyond the solved mode");
    double log_max_psi = std::log(mode.angular.max_abs);
    EnvelopeReport rep;
    double best = -std::numeric_limits<double>::infinity();
    double best_half = best;
    double t_lo = std::log(r_lo), t_hi = std::log(r_hi), t_mid = 0.5 * (t_lo + t_hi);
    const int samples = 512;
    for (int i = 0; i <= samples; ++i) {
        double t = t_lo + (t_hi - t_lo) * i / samples;
        double r = std::exp(t);
        double v = mode.log_phi_at(r) + log_max_psi - d * t;
        if (v > best) {
            best = v;
            rep.argmax = r;
        }
        if (t <= t_mid) best_half = std::max(best_half, v);
    }
    rep.log_constant = best;
    rep.constant = std::exp(best);
    bool at_edge = rep.argmax >= std::exp(t_hi - 0.02 * (t_hi - t_lo));
    rep.diverging = at_edge && best > best_half + std::log(4.0);
    return rep;
}

GrowthClass growth_classification(const SingleWarpMetric& metric, int k, double r_max) {
    if (k < 1) throw std::domain_error("growth_classification: mode must be nonconstant");
    RadialMode mode = solve_radial_mode(metric, k, r_max, 128);
    double lo = r_max / 10.0;
    std::vector<double> ts, rs, us;
    for (std::size_t i = 0; i < mode.grid.size(); ++i) {
        if (mode.grid[i] < lo) continue;
        ts.push_back(std::log(mode.grid[i]));
        rs.push_back(mode.grid[i]);
        us.push_back(mode.log_phi[i]);
    }
    LineFit in_log = fit_line(ts, us);
    LineFit in_lin = fit_line(rs, us);
    double span = std::max(1.0, std::abs(us.back() - us.front()));
    GrowthClass out;
    if (in_log.rms / span <= in_lin.rms / span) {
        out.polynomial = true;
        out.degree = in_log.slope;
        out.fit_residual = in_log.rms / span;
    } else {
        out.polynomial = false;
        out.rate = in_lin.slope;
        out.fit_residual = in_lin.rms / span;
    }
    return out;
}

PipelineReport existence_pipeline(const SingleWarpMetric& metric, int k, double d,
                                  double k0, int levels, double r0, double sup_tol) {
    PipelineReport rep;
    rep.n = metric.n;
    rep.k = k;
    rep.d = d;
    rep.k0 = k0;
    rep.levels_requested = levels;

    auto precondition_fail = [&](const std::string& why) {
        rep.success = false;
        rep.exit_code = 2;
        rep.failing_stage = "preconditions";
        rep.precondition_note = why;
        return rep;
    };

    metric.validate();
    if (k < 1) return precondition_fail("mode index must be at least 1 for a nonconstant limit");
    if (!(d > 0)) return precondition_fail("growth degree must be positive");
    if (!(k0 >= 1)) return precondition_fail("base radius k0 must be at least 1");
    if (levels < 2) return precondition_fail("need at least two exhaustion levels");
    if (!(r0 > 0) || !(r0 <= 0.5))
        return precondition_fail("scan fraction r0 must lie in (0, 1/2]");

    AmbientConstants amb = ambient_constants(metric);
    bool have_cone = metric.profile.asymptote().linear;
    if (have_cone) {
        ConeSpace cone = tangent_cone(metric, d + 2);
        SpectrumMembership mem = is_in_degree_spectrum(cone, d, 1e-6);
        if (mem.member) {
            std::ostringstream os;
            os << "degree " << d << " lies on the tangent-cone spectrum (nearest " << mem.nearest
               << ")";
            return precondition_fail(os.str());
        }
        double beta = metric.profile.beta();
        double lambda = static_cast<double>(k) * (k + metric.n - 2) / (beta * beta);
        double alpha_k = exponent_of(lambda, metric.n);
        if (alpha_k > d) {
            std::ostringstream os;
            os << "selected mode grows with exponent " << alpha_k << " above the target degree "
               << d;
            return precondition_fail(os.str());
        }
    }

    std::shared_ptr<GreenRadial> green;
    if (amb.maximal) {
        green = std::make_shared<GreenRadial>(metric);
        rep.compact_radius = green->b_inverse(k0);
    } else {
        rep.rho_compact = true;
        rep.compact_radius = k0;
    }

    std::vector<double> probe = log_grid(1e-4, rep.compact_radius, 48);
    std::vector<double> prev_values;
    double log_max_psi = std::log(angular_mode(metric.n, k).max_abs);

    bool ok = true;
    for (int i = 1; i <= levels && ok; ++i) {
        PipelineLevel lvl;
        lvl.index = i;
        lvl.big_r = k0 * std::ldexp(1.0, i);
        RadialMode mode = dirichlet_mode(metric, k, lvl.big_r);
        lvl.solved = true;

        try {
            lvl.norm_log_factor = normalize_by_j(metric, mode, k0 / 2);
            lvl.normalized = true;
        } catch (const std::exception& e) {
            lvl.note = e.what();
            rep.failing_stage = "normalize(level " + std::to_string(i) + ")";
            ok = false;
            rep.levels.push_back(lvl);
            break;
        }

        ModeAverages avg(metric, mode);
        if (i == levels) rep.j_at_norm = std::exp(avg.log_j(k0 / 2));

        lvl.doubling = lemma53_scan(metric, mode, d, r0, lvl.big_r);
        if (!lvl.doubling.all_ok) {
            rep.failing_stage = "doubling(level " + std::to_string(i) + ")";
            lvl.note = "doubling inequality fails at r = " + std::to_string(lvl.doubling.first_failure);
            ok = false;
        }

        if (ok) {
            std::vector<double> logs;
            for (int j = 0; k0 * std::ldexp(1.0, j) <= lvl.big_r * (1 + 1e-12); ++j)
                logs.push_back(avg.log_j(k0 * std::ldexp(1.0, j)));
            lvl.cascade = cascade_from_log(logs, d, k0);
            if (!lvl.cascade.all_steps || !lvl.cascade.envelope_ok) {
                rep.failing_stage = "cascade(level " + std::to_string(i) + ")";
                ok = false;
            }
        }

        if (ok) {
            lvl.envelope = growth_envelope(metric, mode, d, k0 / 4, lvl.big_r / 2);
            if (lvl.envelope.diverging) {
                rep.failing_stage = "envelope(level " + std::to_string(i) + ")";
                ok = false;
            }
        }

        if (ok) {
            std::vector<double> values(probe.size());
            double sup = 0.0;
            for (std::size_t p = 0; p < probe.size(); ++p) {
                values[p] = std::exp(mode.log_phi_at(probe[p]) + log_max_psi);
                sup = std::max(sup, values[p]);
            }
            rep.final_sup = sup;
            if (!prev_values.empty()) {
                double diff = 0.0;
                for (std::size_t p = 0; p < probe.size(); ++p)
                    diff = std::max(diff, std::abs(values[p] - prev_values[p]));
                lvl.sup_diff = diff;
            }
            prev_values = std::move(values);
        }

        rep.levels.push_back(lvl);
    }

    if (ok) {
        const PipelineLevel& last = rep.levels.back();
        if (!(last.sup_diff >= 0) || last.sup_diff > sup_tol) {
            rep.failing_stage = "sup-convergence";
            ok = false;
        }
    }
    if (ok) {
        rep.vanishes_at_pole = k >= 1;
        if (!(rep.final_sup > 0) || std::abs(rep.j_at_norm - 1.0) > 1e-6) {
            rep.failing_stage = "nonconstancy";
            ok = false;
        }
    }

    rep.success = ok;
    rep.exit_code = ok ? 0 : 1;
    return rep;
}

}  // namespace conelab
