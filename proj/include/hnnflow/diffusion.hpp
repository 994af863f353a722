#pragma once
#include <cstdint>
#include <vector>

#include "hnnflow/activation.hpp"
#include "hnnflow/objectives.hpp"

namespace hnnflow {

struct DiffusionParams {
    Activation act;
    Objective obj;
    double T = 25.0;
    double h = 1e-4;
    int N = 500;
    std::uint64_t seed = 0;

    DiffusionParams(Activation a, Objective o) : act(std::move(a)), obj(std::move(o)) {}
    void validate() const;
};

struct WeightedCloud {
    std::vector<std::vector<double>> locations;
    std::vector<double> masses; // nonnegative, sums to 1
    int step_index = 0;

    void validate(int n) const;
};

// drift_i = -g^ii df/dx_i + T dg^ii/dx_i, diffusion_i = sqrt(2 T g^ii)
void sde_drift_diffusion(const Activation& act, const Objective& obj, double T,
                         const std::vector<double>& x, std::vector<double>& drift,
                         std::vector<double>& diffusion);

// Euler-Maruyama sweep over all particles; noise is addressed by
// (seed, step_index, particle, dim) so any schedule gives the same cloud
std::vector<std::vector<double>> em_step(const DiffusionParams& params,
                                         const std::vector<std::vector<double>>& locations,
                                         int step_index, bool parallel = false);

double gibbs_density(const Objective& obj, double T, const std::vector<double>& x);
double gibbs_partition(const Objective& obj, double T, int resolution); // n <= 3

// mass-weighted f plus T times a k-nearest-neighbor entropy estimate (k = 8);
// the kNN volume makes this biased but consistent across steps of one run
double free_energy(const WeightedCloud& cloud, const Objective& obj, double T);

struct FpkResult {
    std::vector<double> xs;  // cell centers
    std::vector<double> rho; // final density
    int steps = 0;
    double dt = 0.0;
    double mass_initial = 0.0, mass_final = 0.0;
    double free_energy_initial = 0.0, free_energy_final = 0.0;
    double max_step_rise = 0.0; // largest one-step increase of the free energy
};

// 1-D conservative finite-volume solver for the weighted heat flow of the
// density; zero-flux walls, explicit Euler with automatic sub-stepping
FpkResult fpk_grid_solve(const Activation& act, const Objective& obj, double T, int cells,
                         double t_final, const std::vector<double>* rho0 = nullptr);

std::vector<double> fpk_gibbs(const Objective& obj, double T, int cells);
double fpk_free_energy(const std::vector<double>& rho, const Objective& obj, double T);

} // namespace hnnflow
