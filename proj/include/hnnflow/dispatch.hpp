#pragma once
#include <vector>

namespace hnnflow {

// economic load dispatch: pick on/off states x and outputs y for n_g units,
// trading switching and ramp penalties against marginal cost, subject to the
// delivered-power and total-output demand constraints
struct DispatchProblem {
    int n_g = 0;
    std::vector<double> p;  // marginal cost, in [0,1]
    double c1 = 1.0;        // switching weight
    double c2 = 1.0;        // ramp weight
    std::vector<double> x0; // binary initial on/off pattern
    std::vector<double> y0; // initial outputs, zero where x0 is zero
    double pi_d = 0.0;      // demand
    double r = 1.0;         // augmentation weight
    double h_hopfield = 1e-2;
    double h_dual = 1e-1;
    double tol = 1e-7;      // inner stop: successive-iterate change
    int max_subiters = 10000;
    double outer_tol = 1e-3;
    int max_outers = 500;

    void validate() const;
};

// deterministic data generator; one seeded stream, fixed draw order
DispatchProblem draw_dispatch_data(unsigned long long seed, int n_g);

double dispatch_cost(const DispatchProblem& prob, const std::vector<double>& x,
                     const std::vector<double>& y);

// augmented Lagrangian in the stacked variable z = (x; y); fills grad if non-null
double aug_lagrangian(const DispatchProblem& prob, const std::vector<double>& z,
                      double lambda1, double lambda2, std::vector<double>* grad,
                      double* r1_out = nullptr, double* r2_out = nullptr);

struct DispatchOuterRow {
    double dist_geo;  // to the converged point, filled after the solve
    double dist_l2;
    double r1, r2;
    double l_value;
};

struct DispatchResult {
    bool converged = false;
    int outers = 0;
    long long inner_total = 0;
    std::vector<double> z;  // final stacked point
    double lambda1 = 0.0, lambda2 = 0.0;
    double r1 = 0.0, r2 = 0.0;
    double cost = 0.0;              // dispatch_cost at the final point
    double round_frac = 0.0;        // fraction of x within 0.05 of its rounding
    std::vector<DispatchOuterRow> trace;
};

// dual ascent on the multipliers with Hopfield sub-iterations on z
DispatchResult dual_hopfield_solve(const DispatchProblem& prob, const std::vector<double>& z0,
                                   double lambda1_init, double lambda2_init);

struct ProtocolResult {
    DispatchProblem problem;
    std::vector<DispatchResult> restarts;
    int n_converged = 0;
    double min_round_frac = 0.0;
};

// Monte Carlo restarts over the multiplier initialization; restart k draws its
// own substream so the parallel and serial paths agree bit for bit
ProtocolResult run_dispatch_protocol(unsigned long long seed, int n_g, int n_restarts,
                                     bool parallel);
ProtocolResult run_dispatch_protocol(const DispatchProblem& prob, unsigned long long seed,
                                     int n_restarts, bool parallel);

} // namespace hnnflow
