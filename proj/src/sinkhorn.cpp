#include "hnnflow/sinkhorn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hnnflow/errors.hpp"
#include "hnnflow/geometry.hpp"
#include "hnnflow/rng.hpp"

namespace hnnflow {

void ProxParams::validate() const {
    if (!(eps > 0.0)) throw std::invalid_argument("prox: eps must be positive");
    if (!(h > 0.0)) throw std::invalid_argument("prox: h must be positive");
    if (T < 0.0) throw std::invalid_argument("prox: negative temperature");
    if (max_fixed_point_iters < 1) throw std::invalid_argument("prox: iteration cap too small");
    if (!(fp_tol > 0.0)) throw std::invalid_argument("prox: fp_tol must be positive");
}

CostMatrix cost_matrix(const Activation& act,
                       const std::vector<std::vector<double>>& prev,
                       const std::vector<std::vector<double>>& next, bool parallel) {
    if (prev.size() != next.size())
        throw std::invalid_argument("cost_matrix: clouds must have equal particle counts");
    const int count = static_cast<int>(prev.size());
    const int dim = act.dim();
    // flat coordinates turn every pairwise distance into a plain difference,
    // so the N x N block costs O(n N^2) instead of N^2 quadratures
    std::vector<double> up(static_cast<std::size_t>(dim) * count);
    std::vector<double> un(static_cast<std::size_t>(dim) * count);
    for (int p = 0; p < count; ++p) {
        if (static_cast<int>(prev[p].size()) != dim || static_cast<int>(next[p].size()) != dim)
            throw std::invalid_argument("cost_matrix: point dimension mismatch");
        for (int i = 0; i < dim; ++i) {
            up[static_cast<std::size_t>(i) * count + p] = flat_coord(act, i, prev[p][i]);
            un[static_cast<std::size_t>(i) * count + p] = flat_coord(act, i, next[p][i]);
        }
    }
    CostMatrix cm;
    cm.n = count;
    cm.c.assign(static_cast<std::size_t>(count) * count, 0.0);
    std::vector<double> row_max(count, 0.0);
#pragma omp parallel for if (parallel) schedule(static)
    for (int p = 0; p < count; ++p) {
        double* row = cm.c.data() + static_cast<std::size_t>(p) * count;
        double m = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double upi = up[static_cast<std::size_t>(i) * count + p];
            const double* uni = un.data() + static_cast<std::size_t>(i) * count;
            for (int q = 0; q < count; ++q) {
                const double d = upi - uni[q];
                row[q] += d * d;
            }
        }
        for (int q = 0; q < count; ++q) m = std::max(m, row[q]);
        row_max[p] = m;
    }
    for (int p = 0; p < count; ++p) cm.max_cost = std::max(cm.max_cost, row_max[p]);
    return cm;
}

namespace {

double logsumexp(const std::vector<double>& x) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : x) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double v : x) acc += std::exp(v - m);
    return m + std::log(acc);
}

// log(K exp(w)) with K = exp(-C/(2 eps)), dense logsumexp sweep
void log_matvec_lse(const CostMatrix& cm, double inv2eps, bool transpose,
                    const std::vector<double>& w, std::vector<double>& out, bool parallel) {
    const int count = cm.n;
    out.resize(count);
#pragma omp parallel for if (parallel) schedule(static)
    for (int p = 0; p < count; ++p) {
        double m = -std::numeric_limits<double>::infinity();
        for (int q = 0; q < count; ++q) {
            const double lk = -(transpose ? cm.at(q, p) : cm.at(p, q)) * inv2eps;
            m = std::max(m, lk + w[q]);
        }
        double acc = 0.0;
        for (int q = 0; q < count; ++q) {
            const double lk = -(transpose ? cm.at(q, p) : cm.at(p, q)) * inv2eps;
            acc += std::exp(lk + w[q] - m);
        }
        out[p] = m + std::log(acc);
    }
}

// plain-domain variant over a precomputed kernel, valid when K cannot underflow
void log_matvec_plain(const std::vector<double>& kernel, int count, bool transpose,
                      const std::vector<double>& w, std::vector<double>& out, bool parallel) {
    std::vector<double> ew(count);
    for (int q = 0; q < count; ++q) ew[q] = std::exp(w[q]);
    out.resize(count);
#pragma omp parallel for if (parallel) schedule(static)
    for (int p = 0; p < count; ++p) {
        double acc = 0.0;
        if (transpose) {
            const double* col = kernel.data() + p;
            for (int q = 0; q < count; ++q)
                acc += col[static_cast<std::size_t>(q) * count] * ew[q];
        } else {
            const double* row = kernel.data() + static_cast<std::size_t>(p) * count;
            for (int q = 0; q < count; ++q) acc += row[q] * ew[q];
        }
        out[p] = std::log(acc);
    }
}

struct FixedPointOut {
    bool finite = true;
    bool converged = false;
    int iters = 0;
    double residual = 0.0;
};

template <class LogMatvec>
FixedPointOut run_fixed_point(const ProxParams& params, const std::vector<double>& log_mu,
                              const std::vector<double>& f_new, const LogMatvec& matvec,
                              std::vector<double>& lu, std::vector<double>& lv) {
    const int count = static_cast<int>(log_mu.size());
    const double denom = params.eps + params.h * params.T;
    std::vector<double> lkv(count), lktu(count), shifted(count);
    FixedPointOut out;
    for (int it = 1; it <= params.max_fixed_point_iters; ++it) {
        out.iters = it;
        matvec(false, lv, lkv);
        double delta = 0.0;
        for (int p = 0; p < count; ++p) {
            const double next = log_mu[p] - lkv[p];
            delta = std::max(delta, std::abs(next - lu[p]));
            lu[p] = next;
        }
        matvec(true, lu, lktu);
        for (int q = 0; q < count; ++q)
            shifted[q] = -(params.h * f_new[q] + params.h * params.T * lktu[q]) / denom;
        std::vector<double> probe(count);
        for (int q = 0; q < count; ++q) probe[q] = shifted[q] + lktu[q];
        const double shift = logsumexp(probe);
        for (int q = 0; q < count; ++q) {
            const double next = shifted[q] - shift;
            delta = std::max(delta, std::abs(next - lv[q]));
            lv[q] = next;
        }
        for (int q = 0; q < count; ++q)
            if (!std::isfinite(lu[q]) || !std::isfinite(lv[q])) {
                out.finite = false;
                return out;
            }
        if (delta < params.fp_tol) {
            matvec(false, lv, lkv);
            double res = 0.0;
            for (int p = 0; p < count; ++p)
                res = std::max(res, std::abs(std::exp(lu[p] + lkv[p]) - std::exp(log_mu[p])));
            out.residual = res;
            if (res < params.fp_tol) {
                out.converged = true;
                return out;
            }
        }
        out.residual = delta;
    }
    return out;
}

} // namespace

JkoResult jko_step(const ProxParams& params, const std::vector<double>& masses_prev,
                   const CostMatrix& cost, const std::vector<double>& f_new,
                   std::vector<double>* warm_log_u, std::vector<double>* warm_log_v,
                   bool parallel) {
    params.validate();
    const int count = cost.n;
    if (static_cast<int>(masses_prev.size()) != count ||
        static_cast<int>(f_new.size()) != count)
        throw std::invalid_argument("jko_step: size mismatch");
    double total = 0.0;
    for (double m : masses_prev) {
        if (m < 0.0) throw std::invalid_argument("jko_step: negative mass");
        total += m;
    }
    if (std::abs(total - 1.0) > 1e-10)
        throw std::invalid_argument("jko_step: input masses must sum to one");

    std::vector<double> log_mu(count);
    for (int p = 0; p < count; ++p) log_mu[p] = std::log(std::max(masses_prev[p], 1e-300));

    JkoResult res;
    res.log_u.assign(count, 0.0);
    res.log_v.assign(count, 0.0);
    if (warm_log_u && static_cast<int>(warm_log_u->size()) == count) res.log_u = *warm_log_u;
    if (warm_log_v && static_cast<int>(warm_log_v->size()) == count) res.log_v = *warm_log_v;

    const double inv2eps = 1.0 / (2.0 * params.eps);
    FixedPointOut fp;
    const bool plain_ok = cost.max_cost * inv2eps < 500.0;
    if (plain_ok) {
        std::vector<double> kernel(cost.c.size());
        for (std::size_t i = 0; i < kernel.size(); ++i)
            kernel[i] = std::max(std::exp(-cost.c[i] * inv2eps), 1e-300);
        auto mv = [&](bool transpose, const std::vector<double>& w, std::vector<double>& o) {
            log_matvec_plain(kernel, count, transpose, w, o, parallel);
        };
        fp = run_fixed_point(params, log_mu, f_new, mv, res.log_u, res.log_v);
    }
    if (!plain_ok || !fp.finite) {
        res.log_u.assign(count, 0.0);
        res.log_v.assign(count, 0.0);
        res.used_log_domain = true;
        auto mv = [&](bool transpose, const std::vector<double>& w, std::vector<double>& o) {
            log_matvec_lse(cost, inv2eps, transpose, w, o, parallel);
        };
        fp = run_fixed_point(params, log_mu, f_new, mv, res.log_u, res.log_v);
    }
    res.iters = fp.iters;
    res.residual = fp.residual;
    if (!fp.converged)
        throw numeric_error("jko_step: fixed point stalled, residual " +
                            std::to_string(fp.residual) + " after " +
                            std::to_string(fp.iters) + " iterations");

    // rho = v .* K^T u, assembled in the log domain and renormalized once
    std::vector<double> lktu(count);
    if (res.used_log_domain) {
        log_matvec_lse(cost, inv2eps, true, res.log_u, lktu, parallel);
    } else {
        std::vector<double> kernel(cost.c.size());
        for (std::size_t i = 0; i < kernel.size(); ++i)
            kernel[i] = std::max(std::exp(-cost.c[i] * inv2eps), 1e-300);
        log_matvec_plain(kernel, count, true, res.log_u, lktu, parallel);
    }
    res.masses.resize(count);
    double sum = 0.0;
    for (int q = 0; q < count; ++q) {
        res.masses[q] = std::exp(res.log_v[q] + lktu[q]);
        sum += res.masses[q];
    }
    for (double& m : res.masses) m /= sum;

    if (warm_log_u) *warm_log_u = res.log_u;
    if (warm_log_v) *warm_log_v = res.log_v;
    return res;
}

double kkt_residual(const ProxParams& params, const std::vector<double>& f_new,
                    const JkoResult& result) {
    const int count = static_cast<int>(result.masses.size());
    if (static_cast<int>(f_new.size()) != count)
        throw std::invalid_argument("kkt_residual: size mismatch");
    std::vector<double> t(count);
    double mean = 0.0;
    for (int q = 0; q < count; ++q) {
        t[q] = params.h * f_new[q] +
               params.h * params.T * (1.0 + std::log(result.masses[q])) +
               params.eps * result.log_v[q];
        mean += t[q];
    }
    mean /= count;
    double worst = 0.0;
    for (int q = 0; q < count; ++q) worst = std::max(worst, std::abs(t[q] - mean));
    return worst;
}

DiffuseResult diffuse_run(const DiffusionParams& params, const ProxParams& prox, int steps,
                          int record_every, bool timing, bool parallel) {
    params.validate();
    prox.validate();
    if (steps < 0) throw std::invalid_argument("diffuse_run: negative step count");
    const int n = params.act.dim();
    const int count = params.N;

    SeqRng rng(key4(params.seed, 0xC10DULL, 0, 0));
    std::vector<std::vector<double>> locs(count, std::vector<double>(n));
    for (int p = 0; p < count; ++p)
        for (int i = 0; i < n; ++i) locs[p][i] = clamp_unit(rng.uniform01());
    std::vector<double> masses(count, 1.0 / count);

    DiffuseResult out;
    auto snapshot = [&](int k) {
        WeightedCloud c;
        c.locations = locs;
        c.masses = masses;
        c.step_index = k;
        out.snapshots.push_back(std::move(c));
    };
    auto energy = [&]() {
        WeightedCloud c;
        c.locations = locs;
        c.masses = masses;
        return free_energy(c, params.obj, params.T);
    };
    snapshot(0);
    out.runtime.push_back({0, 0, 0.0, energy(), 0.0});

    std::vector<double> warm_lu, warm_lv, f_new(count);
    for (int k = 1; k <= steps; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::vector<double>> next = em_step(params, locs, k - 1, parallel);
        const CostMatrix cm = cost_matrix(params.act, locs, next, parallel);
        for (int p = 0; p < count; ++p) f_new[p] = params.obj.value(next[p]);
        JkoResult jr = jko_step(prox, masses, cm, f_new, &warm_lu, &warm_lv, parallel);
        locs = std::move(next);
        masses = std::move(jr.masses);
        double ms = 0.0;
        if (timing) {
            const auto t1 = std::chrono::steady_clock::now();
            ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
        out.runtime.push_back({k, jr.iters, jr.residual, energy(), ms});
        if (record_every > 0 && k % record_every == 0 && k != steps) snapshot(k);
    }
    if (steps > 0) snapshot(steps);
    return out;
}

} // namespace hnnflow
