// SPDX-License-Identifier: Apache-2.0
#include "giniflow/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "giniflow/gini.hpp"
#include "giniflow/simd.hpp"

namespace giniflow {

void validate(const SchemeConfig& s) {
    if (s.dt && !(*s.dt > 0.0)) throw std::invalid_argument("pde.dt must be > 0 or \"auto\"");
    if (!(s.T > 0.0)) throw std::invalid_argument("pde.T must be > 0");
    if (!(s.safety > 0.0 && s.safety <= 1.0))
        throw std::invalid_argument("pde.safety must lie in (0, 1]");
}

double stable_dt(std::span<const double> D, const Grid& g, double safety, double T) {
    double dmax = 0.0;
    for (double d : D) dmax = std::max(dmax, d);
    if (!(dmax > 0.0)) return T;
    return safety * g.h() * g.h() / (2.0 * dmax);
}

double stable_dt(const DensityField& rho, const TransactionKernel& k, double gamma, double safety,
                 double T) {
    return stable_dt(diffusion_coefficient(k, rho, gamma), rho.grid(), safety, T);
}

std::vector<double> flux_divergence(std::span<const double> Psi, const Grid& g) {
    require_size(Psi, g, "flux_divergence");
    const std::size_t n = Psi.size();
    const double ih2 = 1.0 / (g.h() * g.h());
    std::vector<double> p(Psi.begin(), Psi.end());
    p.front() = 0.0;
    p.back() = 0.0;
    std::vector<double> out(n);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = ((p[i + 1] - p[i]) - (p[i] - p[i - 1])) * ih2;
    out[0] = 2.0 * (p[1] - p[0]) * ih2;
    out[n - 1] = 2.0 * (p[n - 2] - p[n - 1]) * ih2;
    return out;
}

std::vector<double> pde_rhs(std::span<const double> rho, std::span<const double> D, const Grid& g) {
    require_size(rho, g, "pde_rhs");
    require_size(D, g, "pde_rhs D");
    std::vector<double> phi(rho.size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = D[i] * rho[i];
    return flux_divergence(phi, g);
}

namespace {

void update(std::span<const double> rho, std::span<const double> D, const Grid& g, double dt,
            std::vector<double>& phi, std::vector<double>& coef, std::span<double> out) {
    const std::size_t n = rho.size();
    for (std::size_t i = 0; i < n; ++i) phi[i] = D[i] * rho[i];
    phi.front() = 0.0;
    phi.back() = 0.0;
    const double c = dt / (g.h() * g.h());
    std::fill(coef.begin(), coef.end(), c);
    simd::active().flux_update(rho.data(), phi.data(), coef.data(), out.data(), n);
    out[0] = rho[0] + 2.0 * c * (phi[1] - phi[0]);
    out[n - 1] = rho[n - 1] + 2.0 * c * (phi[n - 2] - phi[n - 1]);
}

}  // namespace

std::vector<double> step_pde(std::span<const double> rho, std::span<const double> D,
                             const Grid& g, double dt) {
    require_size(rho, g, "step_pde");
    require_size(D, g, "step_pde D");
    if (!(dt > 0.0)) throw std::invalid_argument("step_pde: dt must be > 0");
    std::vector<double> phi(rho.size()), coef(rho.size()), out(rho.size());
    update(rho, D, g, dt, phi, coef, out);
    return out;
}

std::vector<double> step_pde(const DensityField& rho, const TransactionKernel& k, double gamma,
                             double dt) {
    const auto D = diffusion_coefficient(k, rho, gamma);
    return step_pde(rho.span(), D, rho.grid(), dt);
}

PdeTrajectory solve(const DensityField& rho0, const TransactionKernel& k, double gamma,
                    const SchemeConfig& scheme) {
    validate(scheme);
    check_gamma(gamma);
    if (!rho0.in_m1(1e-6))
        throw std::invalid_argument("solve: initial density not in M1 within 1e-6 (m0 = " +
                                    std::to_string(rho0.m0()) +
                                    ", m1 = " + std::to_string(rho0.m1()) + ")");
    const Grid& g = rho0.grid();
    const std::size_t n = g.size();
    const DiffusionOperator op(k, g, gamma);

    PdeTrajectory tr{g, gamma, k.name};
    std::vector<double> rho = rho0.values(), next(n), D(n), phi(n), coef(n);
    double t = 0.0;
    tr.min_density = *std::min_element(rho.begin(), rho.end());

    auto record = [&](bool snapshot) {
        tr.t.push_back(t);
        tr.gini.push_back(2.0 * scaled_gini(rho, g) + 1.0);
        tr.m0.push_back(moment(rho, g, 0));
        tr.m1.push_back(moment(rho, g, 1));
        tr.m4.push_back(moment(rho, g, 4));
        if (snapshot) {
            tr.snapshot_t.push_back(t);
            tr.snapshots.push_back(rho);
        }
    };
    record(true);

    // Relative slack so that t lands on T exactly instead of leaving a sliver.
    const double t_eps = 1e-12 * scheme.T;
    while (t < scheme.T - t_eps) {
        op.apply(rho, D);
        double dt = scheme.dt ? *scheme.dt : stable_dt(D, g, scheme.safety, scheme.T);
        if (t + dt > scheme.T - t_eps) dt = scheme.T - t;
        update(rho, D, g, dt, phi, coef, next);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = next[i];
            if (!std::isfinite(v) || std::abs(v) > scheme.blowup) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "blow-up at step %zu, t = %.6g, node %zu (rho = %.3e)",
                              tr.steps + 1, t + dt, i, v);
                throw StabilityError(buf);
            }
            if (v < -scheme.negative_tol) {
                char buf[200];
                std::snprintf(buf, sizeof buf,
                              "negative density %.3e at node %zu, step %zu, t = %.6g (dt = %.3e); "
                              "time step exceeds the stability bound",
                              v, i, tr.steps + 1, t + dt, dt);
                throw StabilityError(buf);
            }
        }
        rho.swap(next);
        t += dt;
        ++tr.steps;
        tr.min_density = std::min(tr.min_density, *std::min_element(rho.begin(), rho.end()));
        const bool last = !(t < scheme.T - t_eps);
        const bool snap = last || (scheme.snapshot_every > 0 && tr.steps % scheme.snapshot_every == 0);
        record(snap);
    }
    tr.tail_mass_end = tail_mass(DensityField(g, rho, scheme.negative_tol));
    return tr;
}

}  // namespace giniflow
