#pragma once
#include <vector>

#include "hnnflow/activation.hpp"
#include "hnnflow/diffusion.hpp"

namespace hnnflow {

struct ProxParams {
    double eps = 0.1;  // entropic regularization
    double h = 1e-4;   // proximal time step
    double T = 25.0;   // temperature
    int max_fixed_point_iters = 5000;
    double fp_tol = 1e-9;

    void validate() const;
};

// squared geodesic distances between two clouds of equal size, row = previous
struct CostMatrix {
    int n = 0;
    std::vector<double> c; // row-major, c[p*n + q]
    double max_cost = 0.0;

    double at(int p, int q) const { return c[static_cast<std::size_t>(p) * n + q]; }
};

CostMatrix cost_matrix(const Activation& act,
                       const std::vector<std::vector<double>>& prev,
                       const std::vector<std::vector<double>>& next, bool parallel = false);

struct JkoResult {
    std::vector<double> masses;
    std::vector<double> log_u, log_v; // scaling vectors, for warm starts and KKT checks
    int iters = 0;
    double residual = 0.0;
    bool used_log_domain = false;
};

// one entropic proximal update of the masses: minimize
//   <C,M>/2 + eps <M,log M> + h (<f,rho> + T <rho,log rho>)
// over couplings M with row marginal masses_prev and free column marginal rho
JkoResult jko_step(const ProxParams& params, const std::vector<double>& masses_prev,
                   const CostMatrix& cost, const std::vector<double>& f_new,
                   std::vector<double>* warm_log_u = nullptr,
                   std::vector<double>* warm_log_v = nullptr, bool parallel = false);

// stationarity defect of the returned masses: spread of the quantity that the
// optimality conditions force to be constant across atoms
double kkt_residual(const ProxParams& params, const std::vector<double>& f_new,
                    const JkoResult& result);

struct DiffuseStepRow {
    int k = 0;
    int fp_iters = 0;
    double fp_residual = 0.0;
    double free_energy = 0.0;
    double step_ms = 0.0;
};

struct DiffuseResult {
    std::vector<WeightedCloud> snapshots;
    std::vector<DiffuseStepRow> runtime;
};

// the full stochastic pipeline: Euler-Maruyama locations, proximal masses
DiffuseResult diffuse_run(const DiffusionParams& params, const ProxParams& prox, int steps,
                          int record_every, bool timing, bool parallel);

} // namespace hnnflow
