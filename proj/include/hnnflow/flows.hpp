#pragma once
#include <vector>

#include "hnnflow/activation.hpp"
#include "hnnflow/objectives.hpp"

namespace hnnflow {

struct FlowTrace {
    std::vector<std::vector<double>> iterates;
    std::vector<double> f_values;
    std::vector<double> dist_geo; // to the reference point, if one was given
    std::vector<double> dist_l2;
    std::vector<double> step_ms;  // zeros when timing is disabled
};

// x' = x - h G(x)^-1 grad f(x), clamped to stay interior
std::vector<double> natural_gradient_step(const Activation& act, const Objective& obj,
                                          const std::vector<double>& x, double h);

enum class HnnForm { primal, hidden };

// fixed-step RK4 for xdot = -G(x)^-1 grad f(x); the hidden form integrates the
// pre-activation state and maps through sigma, which is the same flow
FlowTrace hnn_ode_integrate(const Activation& act, const Objective& obj,
                            const std::vector<double>& x0, double h, int steps,
                            HnnForm form = HnnForm::primal);

// x' = argmin over the cube of 1/2 d_G(x,.)^2 + h f(.), by damped Newton with
// five starts; decoupling per coordinate comes from the product geometry
std::vector<double> finite_prox_step(const Activation& act, const Objective& obj,
                                     const std::vector<double>& x, double h);

enum class DescentMethod { natural, mirror, prox };

FlowTrace run_descent(const Activation& act, const Objective& obj, DescentMethod method,
                      const std::vector<double>& x0, double h, int steps,
                      const std::vector<double>* ref, bool timing);

} // namespace hnnflow
