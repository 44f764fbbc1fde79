#include "conelab/numerics.hpp"

#include <algorithm>
#include <array>

namespace conelab {

double unit_sphere_volume(int m) {
    if (m < 0) throw std::domain_error("unit_sphere_volume: dimension must be nonnegative");
    return 2.0 * std::pow(PI, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

double unit_ball_volume(int n) {
    if (n < 1) throw std::domain_error("unit_ball_volume: dimension must be positive");
    return unit_sphere_volume(n - 1) / n;
}

std::vector<double> log_grid(double a, double b, int per_decade) {
    if (!(a > 0.0) || !(b > a)) throw std::domain_error("log_grid: need 0 < a < b");
    if (per_decade < 1) throw std::domain_error("log_grid: density must be positive");
    double la = std::log10(a), lb = std::log10(b);
    int count = std::max(8, static_cast<int>(std::ceil((lb - la) * per_decade)) + 1);
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
        g[i] = std::pow(10.0, la + (lb - la) * i / (count - 1));
    g.front() = a;
    g.back() = b;
    return g;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares_slope: need two samples");
    double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= n; my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw std::invalid_argument("least_squares_slope: degenerate abscissae");
    return sxy / sxx;
}

namespace {

// Gauss-Kronrod 7-15 pair on [-1, 1].
constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr std::array<double, 4> gauss7_w = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct GKResult {
    double value;
    double error;
};

GKResult gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::array<double, 15> fv{};
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kronrod_x[i]);
        fv[14 - i] = f(c + h * kronrod_x[i]);
    }
    fv[7] = f(c);
    double k = 0;
    for (int i = 0; i < 7; ++i) k += kronrod_w[i] * (fv[i] + fv[14 - i]);
    k += kronrod_w[7] * fv[7];
    double g = gauss7_w[3] * fv[7];
    for (int i = 0; i < 3; ++i) g += gauss7_w[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    return {k * h, std::abs(k - g) * h};
}

double integrate_impl(const std::function<double(double)>& f, double a, double b,
                      double tol, int depth, int max_depth) {
    GKResult r = gauss_kronrod(f, a, b);
    if (r.error <= tol || depth >= max_depth) return r.value;
    double c = 0.5 * (a + b);
    return integrate_impl(f, a, c, 0.5 * tol, depth + 1, max_depth) +
           integrate_impl(f, c, b, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_tol, int max_depth) {
    if (a == b) return 0.0;
    GKResult whole = gauss_kronrod(f, a, b);
    double tol = std::max(abs_tol, rel_tol * std::abs(whole.value));
    if (tol == 0.0) tol = rel_tol;
    if (whole.error <= tol) return whole.value;
    return integrate_impl(f, a, b, tol, 0, max_depth);
}

double integrate_log(const std::function<double(double)>& f, double a, double b,
                     double rel_tol) {
    if (!(a > 0.0) || !(b > a)) throw std::domain_error("integrate_log: need 0 < a < b");
    auto g = [&f](double t) {
        double s = std::exp(t);
        return f(s) * s;
    };
    return integrate(g, std::log(a), std::log(b), rel_tol);
}

const GaussRule& gauss5() {
    static const GaussRule r = {
        {-0.906179845938663992797626878299393, -0.538469310105683091036314420700208, 0.0,
         0.538469310105683091036314420700208, 0.906179845938663992797626878299393},
        {0.236926885056189087514264040719917, 0.478628670499366468041291514835638,
         0.568888888888888888888888888888889, 0.478628670499366468041291514835638,
         0.236926885056189087514264040719917}};
    return r;
}

const GaussRule& gauss7() {
    static const GaussRule r = {
        {-0.949107912342758524526189684047851, -0.741531185599394439863864773280788,
         -0.405845151377397166906606412076961, 0.0,
         0.405845151377397166906606412076961, 0.741531185599394439863864773280788,
         0.949107912342758524526189684047851},
        {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
         0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
         0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
         0.129484966168869693270611432679082}};
    return r;
}

double panel_log_integral(const std::function<double(double)>& L, double a, double b) {
    const GaussRule& g = gauss5();
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::array<double, 5> vals{};
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        vals[i] = L(c + h * g.x[i]);
        m = std::max(m, vals[i]);
    }
    if (m == -std::numeric_limits<double>::infinity()) return m;
    double s = 0;
    for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * std::exp(vals[i] - m);
    return m + std::log(s * h);
}

LogIntegralTable::LogIntegralTable(std::vector<double> t, std::function<double(double)> L,
                                   double head_power)
    : t_(std::move(t)), L_(std::move(L)) {
    if (t_.size() < 2) throw std::invalid_argument("LogIntegralTable: need at least 2 nodes");
    cum_.assign(t_.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 1; i < t_.size(); ++i)
        cum_[i] = log_add_exp(cum_[i - 1], panel_log_integral(L_, t_[i - 1], t_[i]));
    if (head_power > 0) log_head_ = L_(t_.front()) - std::log(head_power);
}

double LogIntegralTable::log_partial(std::size_t i, double tq) const {
    if (tq <= t_[i]) return -std::numeric_limits<double>::infinity();
    return panel_log_integral(L_, t_[i], tq);
}

double LogIntegralTable::log_upto(double tq) const {
    if (t_.empty()) throw std::runtime_error("LogIntegralTable: empty");
    if (tq < t_.front()) {
        // extrapolate the head power law downward
        if (log_head_ == -std::numeric_limits<double>::infinity()) return log_head_;
        return log_head_ + (L_(tq) - L_(t_.front()));
    }
    auto it = std::upper_bound(t_.begin(), t_.end(), tq);
    std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
    if (i >= t_.size() - 1 && tq >= t_.back()) i = t_.size() - 1;
    double base = log_add_exp(log_head_, cum_[std::min(i, t_.size() - 1)]);
    if (tq > t_[std::min(i, t_.size() - 1)])
        base = log_add_exp(base, log_partial(std::min(i, t_.size() - 1), tq));
    return base;
}

double LogIntegralTable::log_between(double ta, double tb) const {
    if (tb <= ta) return -std::numeric_limits<double>::infinity();
    double hi = log_upto(tb), lo = log_upto(ta);
    if (lo == -std::numeric_limits<double>::infinity()) return hi;
    double diff = hi + std::log1p(-std::exp(std::min(lo - hi, 0.0)));
    return diff;
}

double hermite_value(double x0, double y0, double d0, double x1, double y1, double d1, double x) {
    double h = x1 - x0, t = (x - x0) / h;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

double hermite_derivative(double x0, double y0, double d0, double x1, double y1, double d1, double x) {
    double h = x1 - x0, t = (x - x0) / h;
    double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * d0 +
            (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * h * d1) / h;
}

SampledField::SampledField(std::vector<double> grid, std::vector<double> value,
                           std::vector<double> deriv)
    : grid_(std::move(grid)), value_(std::move(value)), deriv_(std::move(deriv)) {
    if (grid_.size() < 2 || grid_.size() != value_.size() || grid_.size() != deriv_.size())
        throw std::invalid_argument("SampledField: inconsistent arrays");
    for (std::size_t i = 1; i < grid_.size(); ++i)
        if (!(grid_[i] > grid_[i - 1]))
            throw std::invalid_argument("SampledField: grid must increase");
}

std::size_t SampledField::interval_of(double x) const {
    if (x < grid_.front() || x > grid_.back())
        throw std::out_of_range("SampledField: abscissa outside sampled range");
    auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid_.begin());
    if (i == 0) return 0;
    if (i >= grid_.size()) return grid_.size() - 2;
    return i - 1;
}

double SampledField::operator()(double x) const {
    std::size_t i = interval_of(x);
    return hermite_value(grid_[i], value_[i], deriv_[i], grid_[i + 1], value_[i + 1], deriv_[i + 1], x);
}

double SampledField::derivative(double x) const {
    std::size_t i = interval_of(x);
    return hermite_derivative(grid_[i], value_[i], deriv_[i], grid_[i + 1], value_[i + 1], deriv_[i + 1], x);
}

namespace {

// Dormand-Prince coefficients.
constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double dp_b5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                             -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double dp_b4[7] = {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640,
                             -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace

std::vector<std::vector<double>> integrate_ode(
    const std::function<void(double, const double*, double*)>& rhs, int dim,
    const std::vector<double>& grid, const std::vector<double>& y0,
    double rel_tol, double abs_tol) {
    if (static_cast<int>(y0.size()) != dim)
        throw std::invalid_argument("integrate_ode: initial state has wrong dimension");
    if (grid.size() < 2) throw std::invalid_argument("integrate_ode: need at least two nodes");

    std::vector<std::vector<double>> out;
    out.reserve(grid.size());
    out.push_back(y0);

    std::vector<double> y = y0, yt(dim), y5(dim), y4(dim);
    std::vector<std::vector<double>> k(7, std::vector<double>(dim));

    double x = grid.front();
    double h = (grid[1] - grid[0]);
    const int max_steps = 2000000;
    int steps = 0;

    for (std::size_t node = 1; node < grid.size(); ++node) {
        double target = grid[node];
        while (x < target) {
            if (++steps > max_steps) throw std::runtime_error("integrate_ode: step limit exceeded");
            h = std::min(h, target - x);
            rhs(x, y.data(), k[0].data());
            bool rejected = true;
            while (rejected) {
                for (int s = 1; s < 7; ++s) {
                    for (int d = 0; d < dim; ++d) {
                        double acc = 0;
                        for (int j = 0; j < s; ++j) acc += dp_a[s][j] * k[j][d];
                        yt[d] = y[d] + h * acc;
                    }
                    rhs(x + dp_c[s] * h, yt.data(), k[s].data());
                }
                double err = 0;
                for (int d = 0; d < dim; ++d) {
                    double a5 = 0, a4 = 0;
                    for (int s = 0; s < 7; ++s) {
                        a5 += dp_b5[s] * k[s][d];
                        a4 += dp_b4[s] * k[s][d];
                    }
                    y5[d] = y[d] + h * a5;
                    y4[d] = y[d] + h * a4;
                    double sc = abs_tol + rel_tol * std::max(std::abs(y[d]), std::abs(y5[d]));
                    double e = (y5[d] - y4[d]) / sc;
                    err += e * e;
                }
                err = std::sqrt(err / dim);
                if (!std::isfinite(err)) {
                    h *= 0.25;
                    if (h < 1e-300) throw std::runtime_error("integrate_ode: step underflow");
                    continue;
                }
                double factor = (err == 0.0) ? 5.0
                                             : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                if (err <= 1.0) {
                    x += h;
                    y = y5;
                    h *= factor;
                    rejected = false;
                } else {
                    h *= factor;
                    if (h < 1e-300) throw std::runtime_error("integrate_ode: step underflow");
                }
            }
        }
        out.push_back(y);
        x = target;  // suppress drift
    }
    return out;
}

std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m) {
    // B. Fornberg, Mathematics of Computation 51 (1988).
    int n = static_cast<int>(x.size());
    if (n < m + 1) throw std::invalid_argument("fd_weights: not enough nodes");
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int s = mn; s >= 1; --s)
                    c[i][s] = c1 * (s * c[i - 1][s - 1] - c5 * c[i - 1][s]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int s = mn; s >= 1; --s)
                c[j][s] = (c4 * c[j][s] - s * c[j][s - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

double solve_monotone(const std::function<double(double)>& f, double lo, double hi,
                      double x_tol, const std::function<double(double)>& df) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw std::domain_error("solve_monotone: no sign change in bracket");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (df) {
            // one Newton trial from the midpoint, kept only if it stays bracketed
            double fm = f(mid), dm = df(mid);
            if (dm != 0.0) {
                double trial = mid - fm / dm;
                if (trial > lo && trial < hi) mid = trial;
            }
        }
        double fm = f(mid);
        if (fm == 0.0 || hi - lo < x_tol) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace conelab
