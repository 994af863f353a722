#pragma once
#include <vector>

#include "hnnflow/activation.hpp"

namespace hnnflow {

// The diagonal metric makes the cube a metric product of n intervals, and the
// change of variable u_i(x) = integral of sqrt(g_ii) flattens each factor, so
// geodesics are straight lines in u and the distance separates per coordinate.

double flat_coord(const Activation& act, int i, double x);
double flat_coord_inverse(const Activation& act, int i, double u);

// per-coordinate geodesic distance, closed form where one exists
double coord_distance(const Activation& act, int i, double x, double y);
// adaptive-Simpson arc length (abs tol 1e-10); the authoritative value
double coord_distance_quadrature(const Activation& act, int i, double x, double y);

double distance(const Activation& act,
                const std::vector<double>& x, const std::vector<double>& y);
double distance_quadrature(const Activation& act,
                           const std::vector<double>& x, const std::vector<double>& y);

// largest relative closed-form vs quadrature mismatch over a fixed probe set
double flat_coord_self_check(const Activation& act);

struct GeodesicCurve {
    std::vector<double> x, y;                 // endpoints
    std::vector<double> ts;                   // sample parameters in [0,1]
    std::vector<std::vector<double>> samples; // samples[j] = curve(ts[j])
    // analytic evaluation data (flat-coordinate endpoints); empty for shooting output
    std::vector<double> u0, u1;

    std::vector<double> eval(const Activation& act, double t) const;
    std::vector<double> eval_deriv(const Activation& act, double t) const;
};

GeodesicCurve geodesic_solve(const Activation& act, const std::vector<double>& x,
                             const std::vector<double>& y, int samples);
// independent check: two-point BVP by RK4 shooting with bisection on the initial slope
GeodesicCurve geodesic_shoot(const Activation& act, const std::vector<double>& x,
                             const std::vector<double>& y, int samples);

// residual of the geodesic equation at an interior parameter, via 4th-order stencils
double geodesic_residual(const Activation& act, const GeodesicCurve& curve, int i, double t);

// convenience wrapper that runs the closed-form self-check once on construction
class Geometry {
public:
    explicit Geometry(Activation act);
    const Activation& act() const { return act_; }
    double distance(const std::vector<double>& x, const std::vector<double>& y) const;
    double distance_quadrature(const std::vector<double>& x, const std::vector<double>& y) const;
    double coord_distance(int i, double x, double y) const;
    double flat_coord(int i, double x) const;
    double flat_coord_inverse(int i, double u) const;

private:
    Activation act_;
};

} // namespace hnnflow
