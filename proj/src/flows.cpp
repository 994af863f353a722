#include "hnnflow/flows.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "hnnflow/errors.hpp"
#include "hnnflow/geometry.hpp"
#include "hnnflow/mirror.hpp"

namespace hnnflow {
namespace {

void check_setup(const Activation& act, const Objective& obj, const std::vector<double>& x) {
    if (obj.n != act.dim())
        throw std::invalid_argument("flows: objective and activation dimensions differ");
    if (static_cast<int>(x.size()) != act.dim())
        throw std::invalid_argument("flows: point dimension mismatch");
}

void require_finite(const std::vector<double>& g) {
    for (double v : g)
        if (!std::isfinite(v)) throw numeric_error("flows: non-finite gradient");
}

double l2(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

} // namespace

std::vector<double> natural_gradient_step(const Activation& act, const Objective& obj,
                                          const std::vector<double>& x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("natural_gradient_step: h must be positive");
    check_setup(act, obj, x);
    require_interior(x);
    std::vector<double> grad(x.size()), g(x.size()), ginv(x.size());
    obj.gradient(x, grad);
    require_finite(grad);
    act.metric_at(x, g, ginv);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = clamp_unit(x[i] - h * ginv[i] * grad[i]);
    return out;
}

FlowTrace hnn_ode_integrate(const Activation& act, const Objective& obj,
                            const std::vector<double>& x0, double h, int steps,
                            HnnForm form) {
    if (!(h > 0.0)) throw std::invalid_argument("hnn_ode_integrate: h must be positive");
    if (steps < 0) throw std::invalid_argument("hnn_ode_integrate: negative step count");
    check_setup(act, obj, x0);
    require_interior(x0);

    const int n = act.dim();
    FlowTrace tr;
    tr.iterates.reserve(steps + 1);

    std::vector<double> grad(n), g(n), ginv(n), pc(n);
    auto rhs_primal = [&](const std::vector<double>& p, std::vector<double>& v) {
        for (int i = 0; i < n; ++i) pc[i] = clamp_unit(p[i]);
        obj.gradient(pc, grad);
        require_finite(grad);
        act.metric_at(pc, g, ginv);
        for (int i = 0; i < n; ++i) v[i] = -ginv[i] * grad[i];
    };
    auto rhs_hidden = [&](const std::vector<double>& s, std::vector<double>& v) {
        for (int i = 0; i < n; ++i) pc[i] = act.sigma(i, s[i]);
        obj.gradient(pc, grad);
        require_finite(grad);
        for (int i = 0; i < n; ++i) v[i] = -grad[i];
    };

    std::vector<double> state = form == HnnForm::primal ? x0 : act.invert(x0);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    auto record = [&]() {
        std::vector<double> x(n);
        if (form == HnnForm::primal)
            x = state;
        else
            for (int i = 0; i < n; ++i) x[i] = act.sigma(i, state[i]);
        tr.f_values.push_back(obj(x));
        tr.dist_geo.push_back(0.0);
        tr.dist_l2.push_back(0.0);
        tr.step_ms.push_back(0.0);
        tr.iterates.push_back(std::move(x));
    };
    record();

    int pinned = 0;
    for (int k = 0; k < steps; ++k) {
        auto rhs = [&](const std::vector<double>& p, std::vector<double>& v) {
            if (form == HnnForm::primal)
                rhs_primal(p, v);
            else
                rhs_hidden(p, v);
        };
        rhs(state, k1);
        for (int i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k1[i];
        rhs(tmp, k2);
        for (int i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k2[i];
        rhs(tmp, k3);
        for (int i = 0; i < n; ++i) tmp[i] = state[i] + h * k3[i];
        rhs(tmp, k4);
        bool clamped = false;
        for (int i = 0; i < n; ++i) {
            double next = state[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (form == HnnForm::primal) {
                const double c = clamp_unit(next);
                if (c != next) clamped = true;
                next = c;
            }
            state[i] = next;
        }
        pinned = clamped ? pinned + 1 : 0;
        if (pinned >= 10)
            throw numeric_error(
                "hnn_ode_integrate: iterate pinned to the cube boundary for 10 consecutive "
                "steps");
        record();
    }
    return tr;
}

namespace {

struct ProxWork {
    const Activation& act;
    const Objective& obj;
    const std::vector<double>& ux; // flat coordinates of the base point
    double h;

    double phi(const std::vector<double>& xi, std::vector<double>& u_out) const {
        double acc = 0.0;
        for (int i = 0; i < act.dim(); ++i) {
            u_out[i] = flat_coord(act, i, xi[i]);
            const double d = u_out[i] - ux[i];
            acc += 0.5 * d * d;
        }
        return acc + h * obj.value(xi);
    }
};

// one damped-Newton run; returns true and fills xi/phi_out on convergence
bool prox_newton(const ProxWork& w, std::vector<double> xi, std::vector<double>& best,
                 double& phi_out) {
    const int n = w.act.dim();
    std::vector<double> u(n), grad(n), r(n), d(n), trial(n), utrial(n);
    double phi = w.phi(xi, u);
    for (int iter = 0; iter < 500; ++iter) {
        w.obj.gradient(xi, grad);
        require_finite(grad);
        double rmax = 0.0;
        for (int i = 0; i < n; ++i) {
            const double gi = w.act.metric(i, xi[i]);
            const double sq = std::sqrt(gi);
            r[i] = (u[i] - w.ux[i]) * sq + w.h * grad[i];
            rmax = std::max(rmax, std::abs(r[i]));
        }
        if (rmax < 1e-11) {
            best = xi;
            phi_out = phi;
            return true;
        }
        double slope = 0.0;
        for (int i = 0; i < n; ++i) {
            const double gi = w.act.metric(i, xi[i]);
            const double sq = std::sqrt(gi);
            const double gamma = w.act.christoffel(i, xi[i]);
            double delta = std::min({1e-4, xi[i] - clamp_margin, 1.0 - clamp_margin - xi[i]});
            double fd2 = 0.0;
            if (delta > 1e-7) {
                std::vector<double> xp = xi, xm = xi;
                xp[i] += delta;
                xm[i] -= delta;
                fd2 = (w.obj.value(xp) - 2.0 * w.obj.value(xi) + w.obj.value(xm)) /
                      (delta * delta);
            }
            double hess = gi + (u[i] - w.ux[i]) * sq * gamma + w.h * fd2;
            if (!(hess > 1e-12 * gi)) hess = gi; // metric fallback when curvature fails
            d[i] = -r[i] / hess;
            slope += r[i] * d[i];
        }
        double t = 1.0;
        bool accepted = false;
        for (; t > 1e-14; t *= 0.5) {
            for (int i = 0; i < n; ++i) trial[i] = clamp_unit(xi[i] + t * d[i]);
            const double phit = w.phi(trial, utrial);
            if (phit <= phi + 1e-4 * t * slope || phit < phi) {
                xi = trial;
                u = utrial;
                phi = phit;
                accepted = true;
                break;
            }
        }
        if (!accepted) return false;
    }
    return false;
}

} // namespace

std::vector<double> finite_prox_step(const Activation& act, const Objective& obj,
                                     const std::vector<double>& x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_prox_step: h must be positive");
    check_setup(act, obj, x);
    require_interior(x);
    const int n = act.dim();
    std::vector<double> ux(n);
    for (int i = 0; i < n; ++i) ux[i] = flat_coord(act, i, x[i]);
    const ProxWork w{act, obj, ux, h};

    std::vector<std::vector<double>> starts;
    starts.push_back(x);
    for (int v = 0; v < 4; ++v) {
        std::vector<double> s(n);
        for (int i = 0; i < n; ++i) {
            double off = v < 2 ? 0.05 : (i % 2 == 0 ? 0.05 : -0.05);
            if (v % 2 == 1) off = -off;
            s[i] = clamp_unit(x[i] + off);
        }
        starts.push_back(std::move(s));
    }

    bool found = false;
    double best_phi = 0.0;
    std::vector<double> best(n), cand(n);
    for (const auto& s : starts) {
        double phi = 0.0;
        if (prox_newton(w, s, cand, phi)) {
            if (!found || phi < best_phi) {
                best = cand;
                best_phi = phi;
                found = true;
            }
        }
    }
    if (!found)
        throw numeric_error("finite_prox_step: inner solver failed to converge from any start");
    return best;
}

FlowTrace run_descent(const Activation& act, const Objective& obj, DescentMethod method,
                      const std::vector<double>& x0, double h, int steps,
                      const std::vector<double>* ref, bool timing) {
    check_setup(act, obj, x0);
    require_interior(x0);
    if (steps < 0) throw std::invalid_argument("run_descent: negative step count");

    std::unique_ptr<MirrorMapPair> pair;
    std::vector<double> z;
    if (method == DescentMethod::mirror) {
        std::vector<double> b = act.beta();
        if (act.kind() == ActKind::logistic)
            for (double& v : b) v *= 0.5;
        else if (act.kind() == ActKind::tabulated)
            throw std::invalid_argument("run_descent: the mirror method needs a closed-form "
                                        "activation");
        pair = std::make_unique<MirrorMapPair>(MirrorMapPair::bit_entropy(std::move(b)));
        z = pair->to_dual(x0);
    }
    GradEval grad_fn = [&obj](const std::vector<double>& p) { return obj.grad(p); };

    FlowTrace tr;
    std::vector<double> x = x0;
    auto record = [&](double ms) {
        tr.f_values.push_back(obj(x));
        tr.dist_geo.push_back(ref ? distance(act, x, *ref) : 0.0);
        tr.dist_l2.push_back(ref ? l2(x, *ref) : 0.0);
        tr.step_ms.push_back(ms);
        tr.iterates.push_back(x);
    };
    record(0.0);
    for (int k = 0; k < steps; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        switch (method) {
        case DescentMethod::natural:
            x = natural_gradient_step(act, obj, x, h);
            break;
        case DescentMethod::mirror:
            z = mirror_step(*pair, grad_fn, z, h);
            x = pair->to_primal(z);
            break;
        case DescentMethod::prox:
            x = finite_prox_step(act, obj, x, h);
            break;
        }
        double ms = 0.0;
        if (timing) {
            const auto t1 = std::chrono::steady_clock::now();
            ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
        record(ms);
    }
    return tr;
}

} // namespace hnnflow
