#include "hnnflow/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "hnnflow/errors.hpp"
#include "hnnflow/rng.hpp"

namespace hnnflow {

void DiffusionParams::validate() const {
    if (obj.n != act.dim())
        throw std::invalid_argument("diffusion: objective and activation dimensions differ");
    if (!(T > 0.0)) throw std::invalid_argument("diffusion: temperature must be positive");
    if (!(h > 0.0)) throw std::invalid_argument("diffusion: step must be positive");
    if (N < 1) throw std::invalid_argument("diffusion: need at least one particle");
}

void WeightedCloud::validate(int n) const {
    if (locations.size() != masses.size())
        throw std::invalid_argument("cloud: locations and masses disagree");
    double total = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (static_cast<int>(locations[i].size()) != n)
            throw std::invalid_argument("cloud: point dimension mismatch");
        require_interior(locations[i]);
        if (masses[i] < 0.0) throw std::invalid_argument("cloud: negative mass");
        total += masses[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("cloud: masses must sum to one");
}

void sde_drift_diffusion(const Activation& act, const Objective& obj, double T,
                         const std::vector<double>& x, std::vector<double>& drift,
                         std::vector<double>& diffusion) {
    if (obj.n != act.dim())
        throw std::invalid_argument("diffusion: objective and activation dimensions differ");
    if (static_cast<int>(x.size()) != act.dim())
        throw std::invalid_argument("diffusion: point dimension mismatch");
    require_interior(x);
    if (T < 0.0) throw std::invalid_argument("diffusion: negative temperature");
    const int n = act.dim();
    drift.resize(n);
    diffusion.resize(n);
    std::vector<double> grad(n);
    obj.gradient(x, grad);
    for (int i = 0; i < n; ++i) {
        const double ginv = act.metric_inv(i, x[i]);
        drift[i] = -ginv * grad[i] + T * act.metric_inv_prime(i, x[i]);
        diffusion[i] = std::sqrt(2.0 * T * ginv);
    }
}

std::vector<std::vector<double>> em_step(const DiffusionParams& params,
                                         const std::vector<std::vector<double>>& locations,
                                         int step_index, bool parallel) {
    params.validate();
    const int n = params.act.dim();
    const int count = static_cast<int>(locations.size());
    std::vector<std::vector<double>> out(count);
    const double sqrt_h = std::sqrt(params.h);
#pragma omp parallel for if (parallel) schedule(static)
    for (int p = 0; p < count; ++p) {
        std::vector<double> drift(n), diff(n);
        sde_drift_diffusion(params.act, params.obj, params.T, locations[p], drift, diff);
        std::vector<double> next(n);
        for (int i = 0; i < n; ++i) {
            const double dw = sqrt_h * counter_normal(params.seed, step_index, p, i);
            next[i] = clamp_unit(locations[p][i] + params.h * drift[i] + diff[i] * dw);
        }
        out[p] = std::move(next);
    }
    return out;
}

double gibbs_density(const Objective& obj, double T, const std::vector<double>& x) {
    if (!(T > 0.0)) throw std::invalid_argument("gibbs: temperature must be positive");
    return std::exp(-obj(x) / T);
}

double gibbs_partition(const Objective& obj, double T, int resolution) {
    if (!(T > 0.0)) throw std::invalid_argument("gibbs: temperature must be positive");
    if (obj.n > 3)
        throw std::invalid_argument("gibbs_partition: tensor quadrature supports n <= 3");
    if (resolution < 2) throw std::invalid_argument("gibbs_partition: resolution too small");
    const int n = obj.n;
    const int nodes = resolution + 1;
    const double dx = 1.0 / resolution;
    std::vector<int> idx(n, 0);
    std::vector<double> x(n);
    double acc = 0.0;
    while (true) {
        double w = 1.0;
        for (int i = 0; i < n; ++i) {
            x[i] = idx[i] * dx;
            if (idx[i] == 0 || idx[i] == resolution) w *= 0.5;
        }
        acc += w * std::exp(-obj.value(x) / T);
        int i = 0;
        for (; i < n; ++i) {
            if (++idx[i] < nodes) break;
            idx[i] = 0;
        }
        if (i == n) break;
    }
    return acc * std::pow(dx, n);
}

double free_energy(const WeightedCloud& cloud, const Objective& obj, double T) {
    const int n = obj.n;
    cloud.validate(n);
    if (T < 0.0) throw std::invalid_argument("free_energy: negative temperature");
    const int count = static_cast<int>(cloud.locations.size());

    double energy = 0.0;
    for (int i = 0; i < count; ++i)
        if (cloud.masses[i] > 0.0) energy += cloud.masses[i] * obj.value(cloud.locations[i]);
    if (T == 0.0 || count == 1) return energy;

    // degenerate-cloud guard: entropy volumes collapse when points coincide
    int dup = 0;
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < count; ++j) {
            if (j == i) continue;
            double d2 = 0.0;
            for (int d = 0; d < n; ++d) {
                const double dd = cloud.locations[i][d] - cloud.locations[j][d];
                d2 += dd * dd;
            }
            if (d2 < 1e-28) {
                ++dup;
                break;
            }
        }
    }
    if (2 * dup > count)
        std::fprintf(stderr,
                     "hnnflow: free_energy cloud has %d/%d duplicated points; the entropy "
                     "estimate is unreliable\n",
                     dup, count);

    const int k = std::min(8, count - 1);
    const double cn = n == 1 ? 2.0 : (n == 2 ? 3.14159265358979323846 : 4.18879020478639098);
    if (n > 3) throw std::invalid_argument("free_energy: entropy estimate supports n <= 3");

    double entropy = 0.0;
    std::vector<double> dist2(count);
    for (int i = 0; i < count; ++i) {
        if (cloud.masses[i] <= 0.0) continue;
        for (int j = 0; j < count; ++j) {
            double d2 = 0.0;
            for (int d = 0; d < n; ++d) {
                const double dd = cloud.locations[i][d] - cloud.locations[j][d];
                d2 += dd * dd;
            }
            dist2[j] = d2;
        }
        dist2[i] = std::numeric_limits<double>::infinity();
        std::nth_element(dist2.begin(), dist2.begin() + (k - 1), dist2.end());
        const double rk = std::sqrt(dist2[k - 1]);
        const double vol = std::max(cn * std::pow(rk, n) / k, 1e-300);
        entropy += cloud.masses[i] * std::log(cloud.masses[i] / vol);
    }
    return energy + T * entropy;
}

std::vector<double> fpk_gibbs(const Objective& obj, double T, int cells) {
    if (obj.n != 1) throw std::invalid_argument("fpk: one-dimensional only");
    if (!(T > 0.0)) throw std::invalid_argument("fpk: temperature must be positive");
    std::vector<double> rho(cells);
    const double dx = 1.0 / cells;
    double total = 0.0;
    std::vector<double> x(1);
    for (int j = 0; j < cells; ++j) {
        x[0] = (j + 0.5) * dx;
        rho[j] = std::exp(-obj.value(x) / T);
        total += rho[j] * dx;
    }
    for (double& v : rho) v /= total;
    return rho;
}

double fpk_free_energy(const std::vector<double>& rho, const Objective& obj, double T) {
    const int cells = static_cast<int>(rho.size());
    const double dx = 1.0 / cells;
    double acc = 0.0;
    std::vector<double> x(1);
    for (int j = 0; j < cells; ++j) {
        x[0] = (j + 0.5) * dx;
        double term = rho[j] * obj.value(x);
        if (rho[j] > 0.0) term += T * rho[j] * std::log(rho[j]);
        acc += term * dx;
    }
    return acc;
}

FpkResult fpk_grid_solve(const Activation& act, const Objective& obj, double T, int cells,
                         double t_final, const std::vector<double>* rho0) {
    if (act.dim() != 1 || obj.n != 1)
        throw std::invalid_argument("fpk_grid_solve: one-dimensional only");
    if (cells < 200) throw std::invalid_argument("fpk_grid_solve: need at least 200 cells");
    if (!(T > 0.0)) throw std::invalid_argument("fpk_grid_solve: temperature must be positive");
    if (!(t_final >= 0.0)) throw std::invalid_argument("fpk_grid_solve: negative horizon");
    if (rho0 && static_cast<int>(rho0->size()) != cells)
        throw std::invalid_argument("fpk_grid_solve: initial density size mismatch");

    FpkResult res;
    const double dx = 1.0 / cells;
    res.xs.resize(cells);
    std::vector<double> big_m(cells);
    std::vector<double> x(1);
    for (int j = 0; j < cells; ++j) {
        res.xs[j] = (j + 0.5) * dx;
        x[0] = res.xs[j];
        big_m[j] = std::exp(-obj.value(x) / T);
    }
    res.rho = rho0 ? *rho0 : fpk_gibbs(obj, T, cells);

    // face coefficient A = T g^-1 Mtilde / dx^2, with the geometric-mean mobility
    std::vector<double> face_a(cells - 1);
    double max_rate = 0.0;
    for (int j = 0; j + 1 < cells; ++j) {
        const double xf = (j + 1) * dx;
        const double ginv = act.metric_inv(0, xf);
        face_a[j] = T * ginv * std::sqrt(big_m[j] * big_m[j + 1]) / (dx * dx);
    }
    for (int j = 0; j < cells; ++j) {
        double rate = 0.0;
        if (j > 0) rate += face_a[j - 1] / big_m[j];
        if (j + 1 < cells) rate += face_a[j] / big_m[j];
        max_rate = std::max(max_rate, rate);
    }
    if (t_final == 0.0 || max_rate == 0.0) {
        res.mass_initial = res.mass_final = 0.0;
        for (double v : res.rho) res.mass_initial += v * dx;
        res.mass_final = res.mass_initial;
        res.free_energy_initial = res.free_energy_final = fpk_free_energy(res.rho, obj, T);
        return res;
    }
    const double dt_stable = 0.4 / max_rate;
    res.steps = static_cast<int>(std::ceil(t_final / dt_stable));
    res.dt = t_final / res.steps;

    for (double v : res.rho) res.mass_initial += v * dx;
    res.free_energy_initial = fpk_free_energy(res.rho, obj, T);
    double f_prev = res.free_energy_initial;

    std::vector<double> eta(cells), next(cells);
    for (int s = 0; s < res.steps; ++s) {
        for (int j = 0; j < cells; ++j) eta[j] = res.rho[j] / big_m[j];
        for (int j = 0; j < cells; ++j) {
            double div = 0.0;
            if (j + 1 < cells) div += face_a[j] * (eta[j + 1] - eta[j]);
            if (j > 0) div -= face_a[j - 1] * (eta[j] - eta[j - 1]);
            next[j] = res.rho[j] + res.dt * div;
        }
        res.rho.swap(next);
        const double f_now = fpk_free_energy(res.rho, obj, T);
        res.max_step_rise = std::max(res.max_step_rise, f_now - f_prev);
        f_prev = f_now;
    }
    res.free_energy_final = f_prev;
    for (double v : res.rho) res.mass_final += v * dx;
    return res;
}

} // namespace hnnflow
