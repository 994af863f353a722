#include "hnnflow/dispatch.hpp"

#include <cmath>
#include <stdexcept>

#include "hnnflow/activation.hpp"
#include "hnnflow/errors.hpp"
#include "hnnflow/geometry.hpp"
#include "hnnflow/rng.hpp"

namespace hnnflow {

void DispatchProblem::validate() const {
    if (n_g < 1) throw std::invalid_argument("dispatch: need at least one generator");
    const auto sz = static_cast<std::size_t>(n_g);
    if (p.size() != sz || x0.size() != sz || y0.size() != sz)
        throw std::invalid_argument("dispatch: field dimensions disagree with n_g");
    for (int i = 0; i < n_g; ++i) {
        if (x0[i] != 0.0 && x0[i] != 1.0)
            throw std::invalid_argument("dispatch: x0 must be binary");
        if (y0[i] < 0.0 || y0[i] > 1.0 || (x0[i] == 0.0 && y0[i] != 0.0))
            throw std::invalid_argument("dispatch: y0 must lie in [0,1] and vanish off x0");
    }
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("dispatch: weights must be positive");
    if (!(pi_d > 0.0)) throw std::invalid_argument("dispatch: demand must be positive");
    if (!(r > 0.0)) throw std::invalid_argument("dispatch: augmentation weight must be positive");
    if (!(h_hopfield > 0.0) || !(h_dual > 0.0) || !(tol > 0.0) || !(outer_tol > 0.0))
        throw std::invalid_argument("dispatch: steps and tolerances must be positive");
    if (max_subiters < 1 || max_outers < 1)
        throw std::invalid_argument("dispatch: iteration caps must be positive");
}

DispatchProblem draw_dispatch_data(unsigned long long seed, int n_g) {
    if (n_g < 1) throw std::invalid_argument("dispatch: need at least one generator");
    SeqRng rng(seed);
    DispatchProblem prob;
    prob.n_g = n_g;
    prob.p.resize(n_g);
    for (int i = 0; i < n_g; ++i) prob.p[i] = rng.uniform01();
    prob.c1 = rng.uniform01_open();
    prob.c2 = rng.uniform01_open();
    prob.x0.resize(n_g);
    for (int i = 0; i < n_g; ++i) prob.x0[i] = std::round(rng.uniform01());
    prob.y0.resize(n_g);
    for (int i = 0; i < n_g; ++i) prob.y0[i] = rng.uniform01() * prob.x0[i];
    double total = 0.0;
    for (int i = 0; i < n_g; ++i) total += prob.y0[i];
    const double u = rng.uniform01();
    prob.pi_d = (1.0 + 0.1 * (u - 0.5)) * total;
    prob.validate();
    return prob;
}

double dispatch_cost(const DispatchProblem& prob, const std::vector<double>& x,
                     const std::vector<double>& y) {
    const auto sz = static_cast<std::size_t>(prob.n_g);
    if (x.size() != sz || y.size() != sz)
        throw std::invalid_argument("dispatch_cost: dimension mismatch");
    double lin = 0.0, sw = 0.0, ramp = 0.0;
    for (int i = 0; i < prob.n_g; ++i) {
        lin += prob.p[i] * y[i];
        const double dx = x[i] - prob.x0[i];
        const double dy = y[i] - prob.y0[i];
        sw += dx * dx;
        ramp += dy * dy;
    }
    return lin + 0.5 * prob.c1 * sw + 0.5 * prob.c2 * ramp;
}

double aug_lagrangian(const DispatchProblem& prob, const std::vector<double>& z,
                      double lambda1, double lambda2, std::vector<double>* grad,
                      double* r1_out, double* r2_out) {
    const int n = prob.n_g;
    if (z.size() != static_cast<std::size_t>(2 * n))
        throw std::invalid_argument("aug_lagrangian: state dimension mismatch");
    const double* x = z.data();
    const double* y = z.data() + n;
    double r1 = -prob.pi_d, r2 = -prob.pi_d;
    for (int i = 0; i < n; ++i) {
        r1 += x[i] * y[i];
        r2 += y[i];
    }
    double value = lambda1 * r1 + lambda2 * r2 + 0.5 * prob.r * (r1 * r1 + r2 * r2);
    for (int i = 0; i < n; ++i) {
        const double dx = x[i] - prob.x0[i];
        const double dy = y[i] - prob.y0[i];
        value += prob.p[i] * y[i] + 0.5 * prob.c1 * dx * dx + 0.5 * prob.c2 * dy * dy;
    }
    if (grad) {
        grad->resize(2 * n);
        const double w1 = lambda1 + prob.r * r1;
        for (int i = 0; i < n; ++i) {
            (*grad)[i] = prob.c1 * (x[i] - prob.x0[i]) + w1 * y[i];
            (*grad)[n + i] = prob.p[i] + prob.c2 * (y[i] - prob.y0[i]) + w1 * x[i] +
                             lambda2 + prob.r * r2;
        }
    }
    if (r1_out) *r1_out = r1;
    if (r2_out) *r2_out = r2;
    return value;
}

DispatchResult dual_hopfield_solve(const DispatchProblem& prob, const std::vector<double>& z0,
                                   double lambda1_init, double lambda2_init) {
    prob.validate();
    const int n = prob.n_g;
    if (z0.size() != static_cast<std::size_t>(2 * n))
        throw std::invalid_argument("dual_hopfield_solve: z0 dimension mismatch");

    DispatchResult res;
    res.lambda1 = lambda1_init;
    res.lambda2 = lambda2_init;
    std::vector<double> z(2 * n), znew(2 * n);
    for (int i = 0; i < 2 * n; ++i) z[i] = clamp_unit(z0[i]);

    std::vector<std::vector<double>> snapshots;
    const double h = prob.h_hopfield;

    for (int outer = 0; outer < prob.max_outers; ++outer) {
        // Hopfield sub-iterations: simultaneous metric gradient steps on z
        for (int it = 0; it < prob.max_subiters; ++it) {
            const double* x = z.data();
            const double* y = z.data() + n;
            double r1 = -prob.pi_d, r2 = -prob.pi_d;
            for (int i = 0; i < n; ++i) {
                r1 += x[i] * y[i];
                r2 += y[i];
            }
            const double w1 = res.lambda1 + prob.r * r1;
            double maxd = 0.0;
            for (int i = 0; i < n; ++i) {
                const double gx = prob.c1 * (x[i] - prob.x0[i]) + w1 * y[i];
                const double gy = prob.p[i] + prob.c2 * (y[i] - prob.y0[i]) + w1 * x[i] +
                                  res.lambda2 + prob.r * r2;
                const double nx = clamp_unit(x[i] - h * 2.0 * x[i] * (1.0 - x[i]) * gx);
                const double ny = clamp_unit(y[i] - h * 2.0 * y[i] * (1.0 - y[i]) * gy);
                maxd = std::max(maxd, std::abs(nx - x[i]));
                maxd = std::max(maxd, std::abs(ny - y[i]));
                znew[i] = nx;
                znew[n + i] = ny;
            }
            z.swap(znew);
            ++res.inner_total;
            if (maxd < prob.tol) break;
        }

        double r1, r2;
        const double lval = aug_lagrangian(prob, z, res.lambda1, res.lambda2, nullptr, &r1, &r2);
        snapshots.push_back(z);
        res.trace.push_back({0.0, 0.0, r1, r2, lval});
        res.r1 = r1;
        res.r2 = r2;
        res.outers = outer + 1;
        if (std::abs(r1) < prob.outer_tol && std::abs(r2) < prob.outer_tol) {
            res.converged = true;
            break;
        }
        res.lambda1 += prob.h_dual * r1;
        res.lambda2 += prob.h_dual * r2;
    }

    res.z = z;
    const std::vector<double> x(z.begin(), z.begin() + n);
    const std::vector<double> y(z.begin() + n, z.end());
    res.cost = dispatch_cost(prob, x, y);
    int near = 0;
    for (int i = 0; i < n; ++i)
        if (std::abs(x[i] - std::round(x[i])) < 0.05) ++near;
    res.round_frac = static_cast<double>(near) / n;

    // distance traces against the converged point, in the beta = 1 geometry
    const Activation act = Activation::soft_projection(std::vector<double>(2 * n, 1.0));
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        double d2 = 0.0;
        for (int i = 0; i < 2 * n; ++i) {
            const double d = snapshots[k][i] - z[i];
            d2 += d * d;
        }
        res.trace[k].dist_l2 = std::sqrt(d2);
        res.trace[k].dist_geo = distance(act, snapshots[k], z);
    }
    return res;
}

ProtocolResult run_dispatch_protocol(const DispatchProblem& prob, unsigned long long seed,
                                     int n_restarts, bool parallel) {
    prob.validate();
    if (n_restarts < 1) throw std::invalid_argument("dispatch protocol: need restarts >= 1");
    ProtocolResult out;
    out.problem = prob;
    out.restarts.resize(n_restarts);

    const int n2 = 2 * prob.n_g;
#pragma omp parallel for if (parallel) schedule(dynamic)
    for (int k = 0; k < n_restarts; ++k) {
        SeqRng rng(key4(seed, 0x7D15u, static_cast<std::uint64_t>(k), 0));
        const double l1 = rng.uniform(-1.0, 1.0);
        const double l2 = rng.uniform(-1.0, 1.0);
        std::vector<double> z0(n2);
        for (int i = 0; i < n2; ++i) z0[i] = clamp_unit(rng.uniform01());
        out.restarts[k] = dual_hopfield_solve(prob, z0, l1, l2);
    }

    out.n_converged = 0;
    out.min_round_frac = 1.0;
    for (const auto& r : out.restarts) {
        if (r.converged) ++out.n_converged;
        out.min_round_frac = std::min(out.min_round_frac, r.round_frac);
    }
    return out;
}

ProtocolResult run_dispatch_protocol(unsigned long long seed, int n_g, int n_restarts,
                                     bool parallel) {
    return run_dispatch_protocol(draw_dispatch_data(seed, n_g), seed, n_restarts, parallel);
}

} // namespace hnnflow
