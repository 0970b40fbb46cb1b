// SPDX-License-Identifier: Apache-2.0
#include "giniflow/metric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "giniflow/density.hpp"
#include "giniflow/gini.hpp"
#include "giniflow/simd.hpp"

namespace giniflow {
namespace {

// sum_i q_i a_i b_i
double wdot(std::span<const double> a, std::span<const double> b, const Grid& g) {
    const auto& q = g.weights();
    std::vector<double> qa(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) qa[i] = q[i] * a[i];
    return simd::dot(qa, b);
}

double l2norm(std::span<const double> a, const Grid& g) { return std::sqrt(wdot(a, a, g)); }

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + m, v.end());
    double r = v[m];
    if (v.size() % 2 == 0) r = 0.5 * (r + *std::max_element(v.begin(), v.begin() + m));
    return r;
}

}  // namespace

std::vector<double> project_compatible(std::span<const double> h, const Grid& g) {
    require_size(h, g, "project_compatible");
    const std::vector<double> one(g.size(), 1.0);
    const auto& x = g.nodes();
    const double a00 = wdot(one, one, g), a01 = wdot(one, x, g), a11 = wdot(x, x, g);
    const double b0 = wdot(one, h, g), b1 = wdot(x, h, g);
    const double det = a00 * a11 - a01 * a01;
    const double c0 = (b0 * a11 - b1 * a01) / det;
    const double c1 = (a00 * b1 - a01 * b0) / det;
    std::vector<double> out(h.begin(), h.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= c0 + c1 * x[i];
    return out;
}

std::vector<double> double_antiderivative(std::span<const double> u, const Grid& g) {
    require_size(u, g, "double_antiderivative");
    const auto& q = g.weights();
    std::vector<double> psi(u.size(), 0.0);
    double slope = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        slope += q[i] * u[i];
        psi[i + 1] = psi[i] + g.h() * slope;
    }
    return psi;
}

MetricSolveResult solve_weighted_biharmonic(std::span<const double> w, std::span<const double> h,
                                            const Grid& g, double rel_floor) {
    require_size(w, g, "solve_weighted_biharmonic weight");
    require_size(h, g, "solve_weighted_biharmonic datum");
    MetricSolveResult r;
    double wmax = 0.0, habs = 0.0, xhabs = 0.0;
    const auto& q = g.weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] >= 0.0) || !std::isfinite(w[i]))
            throw std::invalid_argument("solve_weighted_biharmonic: weight must be >= 0 (node " +
                                        std::to_string(i) + ")");
        wmax = std::max(wmax, w[i]);
        habs += q[i] * std::abs(h[i]);
        xhabs += q[i] * std::abs(g.node(i) * h[i]);
    }
    if (!(wmax > 0.0)) throw std::invalid_argument("solve_weighted_biharmonic: weight vanishes");
    const std::vector<double> one(g.size(), 1.0);
    r.compat_m0 = std::abs(wdot(one, h, g));
    r.compat_m1 = std::abs(wdot(g.nodes(), h, g));
    if (r.compat_m0 > 1e-8 * std::max(1.0, habs) || r.compat_m1 > 1e-8 * std::max(1.0, xhabs)) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "incompatible datum: |int h| = %.3e, |int x h| = %.3e (project it onto "
                      "the complement of affine functions first)",
                      r.compat_m0, r.compat_m1);
        throw std::invalid_argument(buf);
    }
    r.v = double_antiderivative(h, g);
    const double floor = rel_floor * wmax;
    r.u.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        double wi = w[i];
        if (wi < floor) {
            wi = floor;
            if (i > 0 && i + 1 < w.size()) r.floor_active_interior = true;
        }
        r.u[i] = r.v[i] / wi;
    }
    r.norm_sq = wdot(r.v, r.u, g);
    return r;
}

double dual_norm(std::span<const double> w, std::span<const double> h, const Grid& g) {
    return std::sqrt(solve_weighted_biharmonic(w, h, g).norm_sq);
}

double dual_inner_product(std::span<const double> w, std::span<const double> f,
                          std::span<const double> gdat, const Grid& g) {
    const auto a = solve_weighted_biharmonic(w, f, g);
    const auto b = solve_weighted_biharmonic(w, gdat, g);
    return 0.5 * (wdot(a.v, b.u, g) + wdot(b.v, a.u, g));
}

PairingForms pairing_forms(std::span<const double> w, std::span<const double> f,
                           std::span<const double> gdat, const Grid& g) {
    const auto a = solve_weighted_biharmonic(w, f, g);
    const auto b = solve_weighted_biharmonic(w, gdat, g);
    const auto psi_f = double_antiderivative(a.u, g);
    const auto phi_g = double_antiderivative(b.u, g);
    return {wdot(a.v, b.u, g), wdot(f, phi_g, g), wdot(gdat, psi_f, g)};
}

std::vector<double> cd_gradient(std::span<const double> dF, std::span<const double> D,
                                const Grid& g) {
    require_size(D, g, "cd_gradient D");
    auto inner = second_derivative(dF, g);
    for (std::size_t i = 0; i < inner.size(); ++i) inner[i] *= D[i];
    return flux_divergence(inner, g);
}

GradientFlowReport verify_gradient_flow(const PdeTrajectory& tr, const TransactionKernel& k,
                                        double gamma, double max_richardson) {
    const auto& S = tr.snapshots;
    const auto& ts = tr.snapshot_t;
    if (S.size() < 5) throw std::invalid_argument("verify_gradient_flow: need >= 5 snapshots");
    const Grid& g = tr.grid;
    const DiffusionOperator op(k, g, gamma);
    const std::size_t n = g.size();
    GradientFlowReport r;

    std::vector<double> G(S.size());
    for (std::size_t j = 0; j < S.size(); ++j) G[j] = 2.0 * scaled_gini(S[j], g) + 1.0;

    std::vector<double> rdot(n), rdot2(n), diff(n);
    for (std::size_t j = 2; j + 2 < S.size(); ++j) {
        const double span1 = ts[j + 1] - ts[j - 1];
        const double span2 = ts[j + 2] - ts[j - 2];
        for (std::size_t i = 0; i < n; ++i) {
            rdot[i] = (S[j + 1][i] - S[j - 1][i]) / span1;
            rdot2[i] = (S[j + 2][i] - S[j - 2][i]) / span2;
        }
        const double nrm = l2norm(rdot, g);
        for (std::size_t i = 0; i < n; ++i) diff[i] = rdot2[i] - rdot[i];
        r.richardson.push_back(nrm > 0.0 ? l2norm(diff, g) / nrm : 0.0);

        const auto D = op.apply(S[j]);
        const auto grad = cd_gradient(frechet_gini(S[j], g), D, g);
        for (std::size_t i = 0; i < n; ++i) diff[i] = rdot[i] - grad[i];
        const double dres = l2norm(diff, g);
        r.residual.push_back(nrm > 0.0 ? dres / nrm : dres);

        const double dG = (G[j + 1] - G[j - 1]) / span1;
        const double nsq = nrm > 0.0 ? solve_weighted_biharmonic(D, rdot, g).norm_sq : 0.0;
        const double gap = std::abs(dG - 2.0 * nsq);
        r.energy_defect.push_back(dG != 0.0 ? gap / std::abs(dG) : gap);
        r.dgini_dt.push_back(dG);
        r.norm_sq.push_back(nsq);
        r.t.push_back(ts[j]);
    }
    const double rich = median(r.richardson);
    if (rich > max_richardson) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "snapshot cadence too coarse for time differencing (median Richardson "
                      "ratio %.3g > %.3g)",
                      rich, max_richardson);
        throw std::runtime_error(buf);
    }
    r.median_residual = median(r.residual);
    r.median_energy_defect = median(r.energy_defect);
    return r;
}

double conserved_quantities_check(const PdeTrajectory& tr, std::span<const double> eta) {
    const Grid& g = tr.grid;
    require_size(eta, g, "conserved_quantities_check");
    double scale = 0.0;
    for (double e : eta) scale = std::max(scale, std::abs(e));
    for (std::size_t i = 1; i + 1 < eta.size(); ++i)
        if (std::abs(eta[i - 1] - 2.0 * eta[i] + eta[i + 1]) > 1e-9 * std::max(scale, 1.0))
            throw std::invalid_argument("conserved_quantities_check: eta is not affine");
    if (tr.snapshots.empty()) return 0.0;
    std::vector<double> f(eta.size());
    auto pair = [&](const std::vector<double>& rho) {
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = eta[i] * rho[i];
        return integrate(f, g);
    };
    const double base = pair(tr.snapshots.front());
    double drift = 0.0;
    for (const auto& s : tr.snapshots) drift = std::max(drift, std::abs(pair(s) - base));
    return drift;
}

CurveAction curve_action(const std::vector<std::vector<double>>& path,
                         std::span<const double> times, const Grid& g, WeightMode mode,
                         const DiffusionOperator* op) {
    if (path.size() != times.size())
        throw std::invalid_argument("curve_action: path and times differ in length");
    if (mode == WeightMode::DiffusionOfRho && op == nullptr)
        throw std::invalid_argument("curve_action: D weight needs a diffusion operator");
    CurveAction a;
    const std::size_t n = g.size();
    std::vector<double> mid(n), dot(n);
    for (std::size_t j = 0; j + 1 < path.size(); ++j) {
        const double dt = times[j + 1] - times[j];
        if (!(dt > 0.0)) throw std::invalid_argument("curve_action: times must increase");
        for (std::size_t i = 0; i < n; ++i) {
            mid[i] = 0.5 * (path[j][i] + path[j + 1][i]);
            dot[i] = (path[j + 1][i] - path[j][i]) / dt;
        }
        bool zero = std::all_of(dot.begin(), dot.end(), [](double d) { return d == 0.0; });
        double nsq = 0.0;
        if (!zero) {
            const std::vector<double> w = mode == WeightMode::Rho ? mid : op->apply(mid);
            nsq = solve_weighted_biharmonic(w, dot, g).norm_sq;
        }
        a.segment_norm.push_back(std::sqrt(nsq));
        a.action += dt * nsq;
        a.length += dt * std::sqrt(nsq);
    }
    return a;
}

std::vector<std::vector<double>> linear_path(std::span<const double> a, std::span<const double> b,
                                             std::size_t K) {
    if (K == 0 || a.size() != b.size()) throw std::invalid_argument("linear_path: bad arguments");
    std::vector<std::vector<double>> p(K + 1, std::vector<double>(a.size()));
    for (std::size_t j = 0; j <= K; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(K);
        for (std::size_t i = 0; i < a.size(); ++i) p[j][i] = (1.0 - t) * a[i] + t * b[i];
    }
    return p;
}

std::vector<double> random_m1_density(const Grid& g, Rng& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const int bumps = 2 + static_cast<int>(rng() % 3);
        std::vector<double> raw(g.size(), 0.05 + 0.25 * U(rng));
        for (int b = 0; b < bumps; ++b) {
            const double c = g.w_max() * (0.05 + 0.6 * U(rng));
            const double s = 0.1 + 0.4 * U(rng);
            const double amp = 0.5 + 1.5 * U(rng);
            for (std::size_t i = 0; i < raw.size(); ++i) {
                const double z = (g.node(i) - c) / s;
                raw[i] += amp * std::exp(-0.5 * z * z);
            }
        }
        try {
            auto d = tilt_to_m1(g, raw);
            if (*std::min_element(d.values().begin(), d.values().end()) > 0.0) return d.values();
        } catch (const std::invalid_argument&) {
        }
    }
    throw std::runtime_error("random_m1_density: could not draw a positive M1 density");
}

TransportReport transport_inequality_suite(Rng& rng, std::size_t n_trials, double tol) {
    if (n_trials < 1) throw std::invalid_argument("transport_inequality_suite: n_trials >= 1");
    const Grid g(3.0, 301);
    constexpr std::size_t K = 64;
    const std::vector<double> dx(g.size(), 1.0);
    std::vector<double> times(K + 1);
    for (std::size_t j = 0; j <= K; ++j) times[j] = static_cast<double>(j) / K;

    TransportReport r;
    r.tol = tol;
    for (std::size_t trial = 0; trial < n_trials; ++trial) {
        const auto lam = random_m1_density(g, rng);
        const auto nu = random_m1_density(g, rng);
        std::vector<double> f(g.size());
        double beta = INFINITY, lo = INFINITY, hi = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] = nu[i] - lam[i];
            beta = std::min(beta, nu[i] / lam[i]);
            lo = std::min({lo, lam[i], nu[i]});
            hi = std::max({hi, lam[i], nu[i]});
        }
        f = project_compatible(f, g);  // removes roundoff left by the tilt

        const double n_lam = dual_norm(lam, f, g);
        const double n_nu = dual_norm(nu, f, g);
        const double n_dx = dual_norm(dx, f, g);
        const auto path = linear_path(lam, nu, K);
        const auto act = curve_action(path, times, g, WeightMode::Rho);
        const double root_action = std::sqrt(act.action);

        const double sa = n_nu - std::pow(beta, -0.5) * n_lam;
        const double sb = act.length - 2.0 * n_lam;
        const double sc = root_action - std::pow(lo, -0.5) * n_dx;
        const double sd = std::pow(hi, -0.5) * n_dx - root_action;
        r.max_slack_a = trial == 0 ? sa : std::max(r.max_slack_a, sa);
        r.max_slack_b = trial == 0 ? sb : std::max(r.max_slack_b, sb);
        r.max_slack_c = trial == 0 ? sc : std::max(r.max_slack_c, sc);
        r.max_slack_d = trial == 0 ? sd : std::max(r.max_slack_d, sd);
        r.violations_a += sa > tol;
        r.violations_b += sb > tol;
        r.violations_c += sc > tol;
        r.violations_d += sd > tol;
        r.sqrt_action_exceeds_b += root_action > 2.0 * n_lam + tol;
        ++r.trials;

        if (trial == 0) {
            r.equality_identity = std::abs(dual_norm(lam, f, g) - n_lam);
            for (double b : {0.25, 4.0}) {
                std::vector<double> scaled(lam);
                for (double& v : scaled) v *= b;
                const double lhs = dual_norm(scaled, f, g);
                const double rhs = std::pow(b, -0.5) * n_lam;
                r.equality_scaling = std::max(r.equality_scaling, std::abs(lhs - rhs) / rhs);
            }
        }
    }
    return r;
}

FourthMomentReport fourth_moment_check(const std::vector<std::vector<double>>& path,
                                       std::span<const double> times, const Grid& g, double tol) {
    if (path.size() != times.size() || path.size() < 2)
        throw std::invalid_argument("fourth_moment_check: need >= 2 path points with times");
    FourthMomentReport r;
    const std::size_t n = g.size();
    const auto& x = g.nodes();
    const auto& q = g.weights();
    const double h2 = g.h() * g.h();
    std::vector<double> mid(n), dot(n);
    for (std::size_t j = 0; j + 1 < path.size(); ++j) {
        const double dt = times[j + 1] - times[j];
        for (std::size_t i = 0; i < n; ++i) {
            mid[i] = 0.5 * (path[j][i] + path[j + 1][i]);
            dot[i] = (path[j + 1][i] - path[j][i]) / dt;
        }
        ++r.segments;
        const double root_a = std::sqrt(moment(path[j], g, 4));
        const double root_b = std::sqrt(moment(path[j + 1], g, 4));
        const double lhs = std::abs(root_b - root_a) / dt;
        if (std::all_of(dot.begin(), dot.end(), [](double d) { return d == 0.0; })) {
            r.violations += lhs > tol;
            continue;
        }
        const auto sol = solve_weighted_biharmonic(mid, dot, g);
        const double rhs = 6.0 * std::sqrt(sol.norm_sq);
        r.violations += lhs > rhs + tol;
        if (rhs > 0.0) r.max_ratio = std::max(r.max_ratio, lhs / rhs);

        double m4dot = 0.0, scale = 0.0, x2v = 0.0, v0 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x2 = x[i] * x[i];
            m4dot += q[i] * x2 * x2 * dot[i];
            scale += q[i] * x2 * x2 * std::abs(dot[i]);
            x2v += q[i] * x2 * sol.v[i];
            v0 += q[i] * sol.v[i];
        }
        const double discrete = 12.0 * x2v + 2.0 * h2 * v0;
        if (scale > 0.0) {
            r.max_identity_rel = std::max(r.max_identity_rel, std::abs(m4dot - discrete) / scale);
            r.max_continuum_identity_rel =
                std::max(r.max_continuum_identity_rel, std::abs(m4dot - 12.0 * x2v) / scale);
        }
    }
    return r;
}

}  // namespace giniflow
