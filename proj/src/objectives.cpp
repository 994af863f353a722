#include "hnnflow/objectives.hpp"

#include <memory>
#include <stdexcept>
#include <utility>

namespace hnnflow {

namespace {
void check_dim(int n, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != n)
        throw std::invalid_argument("objective: point dimension mismatch");
}
} // namespace

double Objective::operator()(const std::vector<double>& x) const {
    check_dim(n, x);
    return value(x);
}

std::vector<double> Objective::grad(const std::vector<double>& x) const {
    check_dim(n, x);
    std::vector<double> g(x.size());
    gradient(x, g);
    return g;
}

Objective himmelblau_scaled() {
    Objective o;
    o.n = 2;
    o.name = "himmelblau";
    o.value = [](const std::vector<double>& x) {
        const double X = 10.0 * x[0] - 5.0;
        const double Y = 10.0 * x[1] - 5.0;
        const double a = X * X + Y - 11.0;
        const double b = X + Y * Y - 7.0;
        return a * a + b * b;
    };
    o.gradient = [](const std::vector<double>& x, std::vector<double>& g) {
        const double X = 10.0 * x[0] - 5.0;
        const double Y = 10.0 * x[1] - 5.0;
        const double a = X * X + Y - 11.0;
        const double b = X + Y * Y - 7.0;
        g[0] = 20.0 * (2.0 * a * X + b);
        g[1] = 20.0 * (a + 2.0 * b * Y);
    };
    return o;
}

const std::vector<std::vector<double>>& himmelblau_minima() {
    static const std::vector<std::vector<double>> m = {
        {0.8, 0.7},
        {0.2194882254906499, 0.8131312518250573},
        {0.1220689887798499, 0.1716813663563683},
        {0.8584428340330492, 0.3151873974621954},
    };
    return m;
}

Objective quadratic(std::vector<double> center) {
    Objective o;
    o.n = static_cast<int>(center.size());
    o.name = "quadratic";
    auto c = std::make_shared<std::vector<double>>(std::move(center));
    o.value = [c](const std::vector<double>& x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - (*c)[i];
            acc += 0.5 * d * d;
        }
        return acc;
    };
    o.gradient = [c](const std::vector<double>& x, std::vector<double>& g) {
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] - (*c)[i];
    };
    return o;
}

Objective linear(std::vector<double> slope) {
    Objective o;
    o.n = static_cast<int>(slope.size());
    o.name = "linear";
    auto a = std::make_shared<std::vector<double>>(std::move(slope));
    o.value = [a](const std::vector<double>& x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) acc += (*a)[i] * x[i];
        return acc;
    };
    o.gradient = [a](const std::vector<double>& x, std::vector<double>& g) {
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = (*a)[i];
    };
    return o;
}

Objective constant(int n, double level) {
    Objective o;
    o.n = n;
    o.name = "constant";
    o.value = [level](const std::vector<double>&) { return level; };
    o.gradient = [](const std::vector<double>&, std::vector<double>& g) {
        for (auto& v : g) v = 0.0;
    };
    return o;
}

} // namespace hnnflow
