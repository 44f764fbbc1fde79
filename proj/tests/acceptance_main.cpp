// Acceptance gate: one line per criterion, nonzero exit if any fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "conelab/cone.hpp"
#include "conelab/dirichlet.hpp"
#include "conelab/frequency.hpp"
#include "conelab/numerics.hpp"
#include "conelab/profiles.hpp"
#include "conelab/three_circles.hpp"

namespace fs = std::filesystem;
using namespace conelab;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

Outcome criterion_assumptions() {
    NiAssumptionReport rep = check_ni_assumptions(NiParameters::reference(), 1e-12);
    double worst = 0;
    for (int i : {0, 1, 2, 3, 4, 5}) worst = std::max(worst, std::abs(rep.residual[i]));
    for (int i = 0; i < 8; ++i)
        if (!rep.holds[i]) return {false, "assumption " + std::to_string(i + 1) + " fails"};
    if (worst >= 1e-12) return {false, "worst equality residual " + fmt("%.2e", worst)};
    if (rep.residual[7] != 0.0)
        return {false, "eighth assumption not exact, residual " + fmt("%.2e", rep.residual[7])};
    return {true, "worst equality residual " + fmt("%.2e", worst) + ", eighth exact"};
}

double worst_gluing(const WarpProfile& p) {
    double worst = 0;
    for (const GluingResidual& g : c2_gluing_residuals(p))
        for (double d : g.delta) worst = std::max(worst, std::abs(d));
    return worst;
}

Outcome criterion_gluing() {
    DoublyWarpedMetric ni{NiParameters::reference()};
    double wf = worst_gluing(ni.fiber());
    double wh = worst_gluing(ni.base());
    double wd = worst_gluing(WarpProfile::ding());
    if (wf >= 1e-12 || wh >= 1e-12)
        return {false, "doubly warped seams " + fmt("%.2e", std::max(wf, wh))};
    if (wd >= 1e-10) return {false, "bounded-warp seam " + fmt("%.2e", wd)};
    return {true, "seam residuals " + fmt("%.2e", std::max(wf, wh)) + " and " + fmt("%.2e", wd)};
}

Outcome criterion_sectional() {
    DoublyWarpedMetric ni{NiParameters::reference()};
    auto min_at = [&ni](int per_decade) {
        double mn = std::numeric_limits<double>::infinity();
        for (double r : log_grid(1e-3, 200.0, per_decade)) {
            SectionalSample s = sectional_components_doubly(ni, r);
            mn = std::min({mn, s.k_x1x2, s.k_xy, s.k_y1y2, s.k_rx, s.k_ry});
        }
        return mn;
    };
    double m1 = min_at(1887), m2 = min_at(3774);
    if (m1 <= 0) return {false, "minimum component " + fmt("%.3e", m1)};
    double drift = std::abs(m2 - m1) / m1;
    if (drift > 0.01) return {false, "minimum drifts by " + fmt("%.1f", 100 * drift) + "%"};
    return {true, "minimum " + fmt("%.3e", m1) + ", refinement drift " + fmt("%.2e", drift)};
}

Outcome criterion_growth() {
    double d_ni = growth_degree(DoublyWarpedMetric{NiParameters::reference()}, 1e3, 1e6);
    if (std::abs(d_ni - 5.0) > 0.05) return {false, "doubly warped degree " + fmt("%.4f", d_ni)};
    double d_ding = growth_degree(SingleWarpMetric{3, WarpProfile::ding()}, 10.0, 1e4);
    if (std::abs(d_ding - 1.0) > 0.05) return {false, "bounded-warp degree " + fmt("%.4f", d_ding)};
    for (int n : {3, 4, 5}) {
        double d = growth_degree(SingleWarpMetric{n, WarpProfile::exact_cone(1.0)}, 1e3, 1e6);
        if (std::abs(d - n) > 1e-12)
            return {false, "flat degree off by " + fmt("%.2e", std::abs(d - n))};
    }
    return {true, fmt("%.4f", d_ni) + " and " + fmt("%.4f", d_ding) + ", flat degrees exact"};
}

Outcome criterion_weight_systems() {
    SplitMix64 rng(424242u);
    int held = 0;
    for (int i = 0; i < 10000; ++i) {
        WeightSystem ws;
        int m = rng.uniform_int(1, 8);
        double e = 0;
        for (int j = 0; j < m; ++j) {
            ws.exponents.push_back(e);
            ws.weights.push_back(rng.uniform(0.0, 5.0));
            e += rng.uniform(0.05, 2.0);
        }
        ws.alpha = rng.uniform(0.2, 5.0);
        ws.validate();
        Lemma31Report rep = lemma31(ws);
        if (rep.hypothesis_holds) {
            ++held;
            if (!rep.conclusion_holds)
                return {false, "implication broken at draw " + std::to_string(i)};
        }
    }
    if (held == 0 || held == 10000)
        return {false, "degenerate sample, hypothesis held " + std::to_string(held) + " times"};
    for (int i = 0; i < 100; ++i) {
        double alpha = rng.uniform(0.3, 4.0);
        WeightSystem ws{{0.0, rng.uniform(0.1, 10.0)}, {0.0, alpha}, alpha};
        Lemma31Report rep = lemma31(ws);
        if (!rep.equality_case || rep.hypothesis_lhs != rep.hypothesis_rhs ||
            rep.conclusion_lhs != rep.conclusion_rhs)
            return {false, "equality case " + std::to_string(i) + " not detected exactly"};
    }
    return {true, "hypothesis held in " + std::to_string(held) + "/10000 draws, no violations"};
}

Outcome criterion_cone_three_circles() {
    SplitMix64 rng(898989u);
    double worst_oracle = 0;
    for (int draw = 0; draw < 1000; ++draw) {
        ConeSpace cone;
        cone.kappa = rng.uniform(2.0, 10.0);
        cone.cross_section.mass = rng.uniform(0.5, 20.0);
        cone.cross_section.entries.push_back({0.0, 1});
        int n_entries = rng.uniform_int(2, 8);
        double lam = 0;
        for (int i = 0; i < n_entries; ++i) {
            lam += rng.uniform(0.5, 6.0);
            cone.cross_section.entries.push_back({lam, rng.uniform_int(1, 4)});
        }
        cone.validate();

        ConeHarmonic h;
        std::vector<int> used(cone.cross_section.entries.size(), 0);
        int terms = rng.uniform_int(1, 8);
        for (int t = 0; t < terms; ++t) {
            int k = rng.uniform_int(1, n_entries);
            if (used[k] >= cone.cross_section.entries[k].multiplicity) continue;
            ++used[k];
            double c = rng.uniform(0.2, 2.0) * (rng.next_double() < 0.5 ? -1.0 : 1.0);
            h.terms.push_back({c, k});
        }
        if (h.terms.empty()) h.terms.push_back({1.0, 1});

        double alpha;
        do {
            alpha = rng.uniform(0.1, 6.0);
        } while (is_in_degree_spectrum(cone, alpha, 1e-6).distance <= 1e-6);

        for (double r : {0.5, 1.5, 4.0}) {
            if (!three_circles_J(cone, h, r, alpha).implication)
                return {false, "J implication broken at draw " + std::to_string(draw)};
            if (!three_circles_I(cone, h, r, alpha).implication)
                return {false, "I implication broken at draw " + std::to_string(draw)};
        }

        if (draw % 10 == 0) {
            DegreeSpectrum ds = degree_spectrum(cone);
            double r = 2.0;
            // ball quadrature of the squared expansion against the closed form
            auto integrand = [&](double s) {
                double i_val = 0;
                for (const auto& term : h.terms) {
                    double a = ds.entries[term.mode].alpha;
                    i_val += term.c * term.c * std::pow(s, 2 * a);
                }
                return i_val * std::pow(s, cone.kappa - 1);
            };
            double quad = cone.kappa / (cone.cross_section.mass * std::pow(r, cone.kappa)) *
                          integrate(integrand, 0.0, r, 1e-13);
            double closed = cone_J(cone, h, r);
            worst_oracle = std::max(worst_oracle, std::abs(quad - closed) / closed);
        }
    }
    if (worst_oracle > 1e-8)
        return {false, "quadrature disagreement " + fmt("%.2e", worst_oracle)};
    return {true, "1000 draws clean, worst quadrature gap " + fmt("%.2e", worst_oracle)};
}

Outcome criterion_frequency_identities() {
    struct Case {
        int n;
        double beta;
        int k;
    };
    double worst_freq = 0, worst_ident = 0, worst_i1 = 0, worst_slope = 0;
    for (const Case& c : {Case{3, 1.0, 1}, Case{3, 1.0, 2}, Case{3, 0.8, 1}, Case{3, 0.8, 2},
                          Case{4, 1.0, 1}}) {
        SingleWarpMetric m{c.n, WarpProfile::exact_cone(c.beta)};
        double alpha =
            exponent_of(c.k * (c.k + c.n - 2) / (c.beta * c.beta), static_cast<double>(c.n));
        RadialMode mode = solve_radial_mode(m, c.k, 130.0);
        FrequencyCurves curves = frequency_curve(m, mode, 0.5, 100.0, 32);
        for (double f : curves.freq) worst_freq = std::max(worst_freq, std::abs(f - alpha));
        worst_ident = std::max(worst_ident, check_derivative_identity(curves));

        AmbientConstants amb = ambient_constants(m);
        RadialMode zero = solve_radial_mode(m, 0, 130.0);
        FrequencyCurves one = frequency_curve(m, zero, 0.5, 100.0, 16);
        double target = amb.n * amb.v_m;
        for (double v : one.i) worst_i1 = std::max(worst_i1, std::abs(v - target) / target);

        GreenRadial green(m);
        for (double r : log_grid(1e-3, 1e3, 64))
            worst_slope = std::max(worst_slope, green.bprime(r));
    }
    if (worst_freq >= 1e-8) return {false, "frequency deviates by " + fmt("%.2e", worst_freq)};
    if (worst_ident >= 1e-4) return {false, "derivative identity " + fmt("%.2e", worst_ident)};
    if (worst_i1 >= 1e-4) return {false, "constant-mode level " + fmt("%.2e", worst_i1)};
    if (worst_slope > 1.0 + 1e-6) return {false, "level slope " + fmt("%.9f", worst_slope)};

    GreenRadial asym(SingleWarpMetric{3, WarpProfile::asym_conical(0.8)});
    double ratio = asym.b(1e3) / 1e3;
    if (std::abs(ratio - 1.0) > 1e-3)
        return {false, "level/distance ratio " + fmt("%.6f", ratio) + " at r=1e3"};
    return {true, "freq dev " + fmt("%.1e", worst_freq) + ", identity " + fmt("%.1e", worst_ident) +
                      ", slope max " + fmt("%.9f", worst_slope) + ", b/rho-1 " +
                      fmt("%.1e", std::abs(ratio - 1.0))};
}

Outcome criterion_frequency_bound() {
    SingleWarpMetric m{3, WarpProfile::asym_conical(0.8)};
    std::string note;
    for (int k = 1; k <= 3; ++k) {
        double alpha = exponent_of(k * (k + 1) / 0.64, 3.0);
        RadialMode mode = solve_radial_mode(m, k, 4096.0);
        FrequencyCurves curves = frequency_curve(m, mode, 1.0, 1e3, 32);
        double sup = 0;
        for (double f : curves.freq) sup = std::max(sup, f);
        if (sup > 5 * alpha)
            return {false, "mode " + std::to_string(k) + " sup " + fmt("%.4f", sup)};
        double dev = std::abs(curves.freq.back() - alpha);
        if (dev > 1e-3)
            return {false, "mode " + std::to_string(k) + " endpoint off by " + fmt("%.2e", dev)};
        note += (k > 1 ? ", " : "") + fmt("%.4f", sup) + "<=" + fmt("%.4f", 5 * alpha);
    }
    return {true, "sup vs cap: " + note};
}

Outcome criterion_existence() {
    PipelineReport flat = existence_pipeline(SingleWarpMetric{3, WarpProfile::exact_cone(1.0)},
                                             1, 1.3);
    if (!flat.success || flat.exit_code != 0) return {false, "flat run failed"};
    if (std::abs(flat.j_at_norm - 1.0) > 1e-10)
        return {false, "flat normalisation off by " + fmt("%.2e", flat.j_at_norm - 1.0)};
    if (!flat.vanishes_at_pole || flat.final_sup <= 0) return {false, "flat limit degenerate"};
    if (flat.levels.size() != 6) return {false, "flat run used wrong level count"};

    double d = exponent_of(2.0 / 0.64, 3.0) + 0.3;
    PipelineReport conic = existence_pipeline(SingleWarpMetric{3, WarpProfile::asym_conical(0.8)},
                                              1, d);
    if (!conic.success || conic.exit_code != 0) return {false, "conical run failed"};
    if (std::abs(conic.j_at_norm - 1.0) > 1e-10)
        return {false, "conical normalisation off by " + fmt("%.2e", conic.j_at_norm - 1.0)};
    if (!conic.vanishes_at_pole || conic.final_sup <= 0)
        return {false, "conical limit degenerate"};

    PipelineReport ding = existence_pipeline(SingleWarpMetric{3, WarpProfile::ding()}, 1, 2.0);
    if (ding.exit_code != 1 || ding.failing_stage != "doubling(level 1)")
        return {false, "expected the bounded warp to fail its first doubling scan, got '" +
                           ding.failing_stage + "'"};
    return {true, "two successes, bounded warp fails at " + ding.failing_stage};
}

Outcome criterion_ding_ricci() {
    SingleWarpMetric m{3, WarpProfile::ding()};
    double mn = std::numeric_limits<double>::infinity();
    for (double r : log_grid(1e-3, 3.0, 2877)) {
        RicciSample s = ricci_components_single(m, r);
        mn = std::min({mn, s.ric_rr, s.ric_tan});
    }
    if (mn < -1e-9) return {false, "minimum component " + fmt("%.3e", mn)};
    return {true, "minimum component " + fmt("%.3e", mn)};
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return "<missing " + path + ">";
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Outcome criterion_reproducibility() {
    fs::path base = fs::temp_directory_path() / "conelab-acceptance";
    fs::remove_all(base);
    fs::create_directories(base);
    auto write = [&base](const std::string& name, const std::string& text) {
        std::ofstream f(base / name, std::ios::binary);
        f << text;
        return (base / name).string();
    };
    struct Scenario {
        std::string cmd;
        std::string cfg;
    };
    std::vector<Scenario> scenarios = {
        {"frequency", write("freq.json", R"({"metric":{"kind":"euclidean"},)"
                                         R"("operation":{"r_max":20}})")},
        {"existence", write("exist.json", R"({"metric":{"kind":"euclidean"},)"
                                          R"("operation":{"k":1,"d":1.5}})")},
        {"three-circles", write("tc.json", R"({"metric":{"kind":"euclidean"},)"
                                           R"("operation":{"alpha":1.5,"r_max":16}})")},
        {"curvature", write("ni.json", R"({"metric":{"kind":"ni"}})")},
    };
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        std::string digests[2];
        std::vector<std::string> artifact_bytes[2];
        for (int pass = 0; pass < 2; ++pass) {
            std::string out = (base / (scenarios[s].cmd + "-" + std::to_string(pass))).string();
            std::string cmd = std::string("env -u CONELAB_OUT ") + CONELAB_BIN_PATH + " " +
                              scenarios[s].cmd + " --config " + scenarios[s].cfg + " --out " +
                              out + " >/dev/null 2>&1";
            int status = std::system(cmd.c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
                return {false, scenarios[s].cmd + " exited with an error"};
            nlohmann::json man = nlohmann::json::parse(slurp(out + "/run.json"));
            digests[pass] = man["config_digest"].get<std::string>();
            for (const nlohmann::json& a : man["artifacts"])
                artifact_bytes[pass].push_back(
                    slurp(out + "/" + a["path"].get<std::string>()));
        }
        if (digests[0] != digests[1])
            return {false, scenarios[s].cmd + " digests differ between reruns"};
        if (artifact_bytes[0] != artifact_bytes[1])
            return {false, scenarios[s].cmd + " artifacts differ between reruns"};
    }
    return {true, std::to_string(scenarios.size()) + " scenarios byte-identical on rerun"};
}

struct Criterion {
    int id;
    const char* desc;
    double limit_s;  // 0 disables the cap
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    std::vector<Criterion> checks = {
        {1, "reference doubly-warped parameters clear the eight assumptions", 1.0,
         criterion_assumptions},
        {2, "profile seams are C2 to closed-form residuals", 1.0, criterion_gluing},
        {3, "sectional components of the doubly warped model stay positive", 10.0,
         criterion_sectional},
        {4, "volume growth degrees match their targets", 10.0, criterion_growth},
        {5, "weighted three-level inequality holds on 10^4 seeded systems", 5.0,
         criterion_weight_systems},
        {6, "cone three-circles implication and closed forms on 10^3 draws", 30.0,
         criterion_cone_three_circles},
        {7, "frequency identities on flat and exact-cone models", 60.0,
         criterion_frequency_identities},
        {8, "frequency stays under five times the degree on the conical model", 60.0,
         criterion_frequency_bound},
        {9, "existence pipeline succeeds twice and fails where expected", 60.0,
         criterion_existence},
        {10, "bounded-warp Ricci components stay above -1e-9", 5.0, criterion_ding_ricci},
        {11, "reruns are byte-identical with equal digests", 0.0, criterion_reproducibility},
    };

    int failed = 0;
    for (const Criterion& c : checks) {
        auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (out.ok && c.limit_s > 0 && secs > c.limit_s) {
            out.ok = false;
            out.detail += "; exceeded " + fmt("%.0f", c.limit_s) + " s budget";
        }
        if (!out.ok) ++failed;
        std::printf("criterion %2d: %s  %s  [%s]  (%.2f s)\n", c.id, out.ok ? "PASS" : "FAIL",
                    c.desc, out.detail.c_str(), secs);
    }
    std::printf("acceptance: %d/%d criteria passed\n", static_cast<int>(checks.size()) - failed,
                static_cast<int>(checks.size()));
    return failed == 0 ? 0 : 1;
}
