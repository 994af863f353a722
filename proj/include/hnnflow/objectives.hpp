#pragma once
#include <functional>
#include <string>
#include <vector>

namespace hnnflow {

// objective on (0,1)^n with an analytic gradient
struct Objective {
    int n = 0;
    std::string name;
    std::function<double(const std::vector<double>&)> value;
    std::function<void(const std::vector<double>&, std::vector<double>&)> gradient;

    double operator()(const std::vector<double>& x) const;
    std::vector<double> grad(const std::vector<double>& x) const;
};

// Himmelblau's function mapped onto the unit square via X = 10 x1 - 5, Y = 10 x2 - 5
Objective himmelblau_scaled();
// the four interior minimizers of himmelblau_scaled, in the unit square
const std::vector<std::vector<double>>& himmelblau_minima();

Objective quadratic(std::vector<double> center);          // 1/2 ||x - center||^2
Objective linear(std::vector<double> slope);              // slope . x
Objective constant(int n, double level);

} // namespace hnnflow
