#include "hnnflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "hnnflow/errors.hpp"

namespace hnnflow {
namespace {

constexpr double kQuadTol = 1e-10;
constexpr double kPi = 3.14159265358979323846;

template <class F>
double adapt(const F& f, double a, double fa, double b, double fb, double m, double fm,
             double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adapt(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

double arc_integral(const Activation& act, int i, double a, double b) {
    return adaptive_simpson(
        [&](double t) { return std::sqrt(act.metric(i, t)); }, a, b, kQuadTol);
}

void check_pair(const Activation& act, const std::vector<double>& x,
                const std::vector<double>& y) {
    if (static_cast<int>(x.size()) != act.dim() || static_cast<int>(y.size()) != act.dim())
        throw std::invalid_argument("geometry: point dimension mismatch");
    require_interior(x);
    require_interior(y);
}

} // namespace

double flat_coord(const Activation& act, int i, double x) {
    require_interior(x);
    switch (act.kind()) {
    case ActKind::soft_projection:
        return std::sqrt(2.0 / act.beta()[i]) * std::asin(std::sqrt(x));
    case ActKind::logistic:
        return 2.0 / std::sqrt(act.beta()[i]) * std::asin(std::sqrt(x));
    case ActKind::tabulated:
        return arc_integral(act, i, 0.5, x);
    }
    throw std::logic_error("unreachable");
}

double flat_coord_inverse(const Activation& act, int i, double u) {
    if (act.kind() == ActKind::tabulated) {
        double lo = 1e-11, hi = 1.0 - 1e-11;
        double flo = flat_coord(act, i, lo), fhi = flat_coord(act, i, hi);
        if (u <= flo) return lo;
        if (u >= fhi) return hi;
        for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (flat_coord(act, i, mid) < u)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }
    const double scale = act.kind() == ActKind::soft_projection
                             ? std::sqrt(act.beta()[i] / 2.0)
                             : 0.5 * std::sqrt(act.beta()[i]);
    double theta = u * scale;
    if (theta < -1e-9 || theta > 0.5 * kPi + 1e-9)
        throw std::domain_error("flat coordinate outside the image of (0,1)");
    theta = std::clamp(theta, 0.0, 0.5 * kPi);
    const double s = std::sin(theta);
    return s * s;
}

double coord_distance(const Activation& act, int i, double x, double y) {
    require_interior(x);
    require_interior(y);
    if (act.kind() == ActKind::tabulated) return coord_distance_quadrature(act, i, x, y);
    return std::abs(flat_coord(act, i, y) - flat_coord(act, i, x));
}

double coord_distance_quadrature(const Activation& act, int i, double x, double y) {
    require_interior(x);
    require_interior(y);
    return std::abs(arc_integral(act, i, x, y));
}

double distance(const Activation& act,
                const std::vector<double>& x, const std::vector<double>& y) {
    check_pair(act, x, y);
    double acc = 0.0;
    for (int i = 0; i < act.dim(); ++i) {
        const double d = coord_distance(act, i, x[i], y[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

double distance_quadrature(const Activation& act,
                           const std::vector<double>& x, const std::vector<double>& y) {
    check_pair(act, x, y);
    double acc = 0.0;
    for (int i = 0; i < act.dim(); ++i) {
        const double d = coord_distance_quadrature(act, i, x[i], y[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

double flat_coord_self_check(const Activation& act) {
    static const double probes[][2] = {{0.11, 0.5}, {0.25, 0.75}, {0.37, 0.93}};
    double worst = 0.0;
    for (int i = 0; i < act.dim(); ++i) {
        for (const auto& p : probes) {
            const double closed = coord_distance(act, i, p[0], p[1]);
            const double quad = coord_distance_quadrature(act, i, p[0], p[1]);
            const double rel = std::abs(closed - quad) / std::max(std::abs(quad), 1e-300);
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

std::vector<double> GeodesicCurve::eval(const Activation& act, double t) const {
    const int n = static_cast<int>(x.size());
    std::vector<double> out(n);
    if (!u0.empty()) {
        for (int i = 0; i < n; ++i)
            out[i] = flat_coord_inverse(act, i, u0[i] + t * (u1[i] - u0[i]));
        return out;
    }
    // shooting output: piecewise-linear in the stored samples
    if (t <= ts.front()) return samples.front();
    if (t >= ts.back()) return samples.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
    for (int i = 0; i < n; ++i)
        out[i] = (1.0 - w) * samples[j - 1][i] + w * samples[j][i];
    return out;
}

std::vector<double> GeodesicCurve::eval_deriv(const Activation& act, double t) const {
    const int n = static_cast<int>(x.size());
    std::vector<double> out(n);
    if (!u0.empty()) {
        const std::vector<double> p = eval(act, t);
        for (int i = 0; i < n; ++i)
            out[i] = (u1[i] - u0[i]) / std::sqrt(act.metric(i, p[i]));
        return out;
    }
    const double h = 1e-6;
    const double a = std::clamp(t - h, 0.0, 1.0);
    const double b = std::clamp(t + h, 0.0, 1.0);
    const std::vector<double> pa = eval(act, a);
    const std::vector<double> pb = eval(act, b);
    for (int i = 0; i < n; ++i) out[i] = (pb[i] - pa[i]) / (b - a);
    return out;
}

GeodesicCurve geodesic_solve(const Activation& act, const std::vector<double>& x,
                             const std::vector<double>& y, int samples) {
    check_pair(act, x, y);
    if (samples < 2) throw std::invalid_argument("geodesic: need at least 2 samples");
    GeodesicCurve c;
    c.x = x;
    c.y = y;
    c.u0.resize(x.size());
    c.u1.resize(x.size());
    for (int i = 0; i < act.dim(); ++i) {
        c.u0[i] = flat_coord(act, i, x[i]);
        c.u1[i] = flat_coord(act, i, y[i]);
    }
    c.ts.resize(samples);
    c.samples.resize(samples);
    for (int j = 0; j < samples; ++j) {
        c.ts[j] = static_cast<double>(j) / (samples - 1);
        c.samples[j] = c.eval(act, c.ts[j]);
    }
    c.samples.front() = x;
    c.samples.back() = y;
    return c;
}

namespace {

// gamma'' = -Gamma(gamma) gamma'^2, one RK4 trajectory; returns endpoint position
double shoot_once(const Activation& act, int i, double x0, double v0, int nsteps,
                  std::vector<double>* record, int stride) {
    double p = x0, v = v0;
    const double h = 1.0 / nsteps;
    if (record) (*record)[0] = p;
    auto accel = [&](double pos, double vel) {
        const double pc = std::clamp(pos, 1e-11, 1.0 - 1e-11);
        return -act.christoffel(i, pc) * vel * vel;
    };
    for (int k = 0; k < nsteps; ++k) {
        const double k1p = v, k1v = accel(p, v);
        const double k2p = v + 0.5 * h * k1v, k2v = accel(p + 0.5 * h * k1p, v + 0.5 * h * k1v);
        const double k3p = v + 0.5 * h * k2v, k3v = accel(p + 0.5 * h * k2p, v + 0.5 * h * k2v);
        const double k4p = v + h * k3v, k4v = accel(p + h * k3p, v + h * k3v);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (p < -0.5) return -1e9;
        if (p > 1.5) return 1e9;
        if (record && (k + 1) % stride == 0) (*record)[(k + 1) / stride] = p;
    }
    return p;
}

} // namespace

GeodesicCurve geodesic_shoot(const Activation& act, const std::vector<double>& x,
                             const std::vector<double>& y, int samples) {
    check_pair(act, x, y);
    if (samples < 2) throw std::invalid_argument("geodesic: need at least 2 samples");
    const int segs = samples - 1;
    const int stride = std::max(1, (800 + segs - 1) / segs);
    const int nsteps = segs * stride;

    GeodesicCurve c;
    c.x = x;
    c.y = y;
    c.ts.resize(samples);
    for (int j = 0; j < samples; ++j) c.ts[j] = static_cast<double>(j) / segs;
    c.samples.assign(samples, std::vector<double>(act.dim()));

    std::vector<double> record(samples);
    for (int i = 0; i < act.dim(); ++i) {
        const double du = flat_coord(act, i, y[i]) - flat_coord(act, i, x[i]);
        // the flat chart makes the endpoint monotone in the slope, so bisection is safe
        const double v_guess = du * std::sqrt(act.metric_inv(i, x[i]));
        double lo = std::min(0.0, 2.0 * v_guess) - 1e-12;
        double hi = std::max(0.0, 2.0 * v_guess) + 1e-12;
        double v = v_guess;
        double endp = shoot_once(act, i, x[i], v, nsteps, &record, stride);
        int it = 0;
        for (; it < 200 && std::abs(endp - y[i]) >= 1e-10; ++it) {
            if (endp < y[i])
                lo = v;
            else
                hi = v;
            v = 0.5 * (lo + hi);
            endp = shoot_once(act, i, x[i], v, nsteps, &record, stride);
        }
        if (std::abs(endp - y[i]) >= 1e-10)
            throw numeric_error("geodesic shooting stalled: coordinate " + std::to_string(i) +
                                ", endpoint miss " + std::to_string(std::abs(endp - y[i])));
        for (int j = 0; j < samples; ++j) c.samples[j][i] = record[j];
        c.samples[0][i] = x[i];
        c.samples[samples - 1][i] = y[i];
    }
    return c;
}

double geodesic_residual(const Activation& act, const GeodesicCurve& curve, int i, double t) {
    const double h = 1e-3;
    if (t - 2.0 * h < 0.0 || t + 2.0 * h > 1.0)
        throw std::invalid_argument("geodesic residual needs t in [2e-3, 1-2e-3]");
    double p[5];
    for (int k = -2; k <= 2; ++k) p[k + 2] = curve.eval(act, t + k * h)[i];
    const double vel = (p[0] - 8.0 * p[1] + 8.0 * p[3] - p[4]) / (12.0 * h);
    const double acc =
        (-p[0] + 16.0 * p[1] - 30.0 * p[2] + 16.0 * p[3] - p[4]) / (12.0 * h * h);
    return acc + act.christoffel(i, p[2]) * vel * vel;
}

Geometry::Geometry(Activation act) : act_(std::move(act)) {
    const double worst = flat_coord_self_check(act_);
    if (worst > 1e-6)
        std::fprintf(stderr,
                     "hnnflow: closed-form arc length disagrees with quadrature "
                     "(relative mismatch %.3e)\n",
                     worst);
}

double Geometry::distance(const std::vector<double>& x, const std::vector<double>& y) const {
    return hnnflow::distance(act_, x, y);
}

double Geometry::distance_quadrature(const std::vector<double>& x,
                                     const std::vector<double>& y) const {
    return hnnflow::distance_quadrature(act_, x, y);
}

double Geometry::coord_distance(int i, double x, double y) const {
    return hnnflow::coord_distance(act_, i, x, y);
}

double Geometry::flat_coord(int i, double x) const { return hnnflow::flat_coord(act_, i, x); }

double Geometry::flat_coord_inverse(int i, double u) const {
    return hnnflow::flat_coord_inverse(act_, i, u);
}

} // namespace hnnflow
