#include "hnnflow/mirror.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "hnnflow/activation.hpp"
#include "hnnflow/errors.hpp"

namespace hnnflow {
namespace {

double softplus(double t) {
    return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

} // namespace

MirrorMapPair::MirrorMapPair(bool euclidean, int n, std::vector<double> beta, double kappa,
                             double c)
    : euclidean_(euclidean), n_(n), beta_(std::move(beta)), kappa_(kappa), const_(c) {}

MirrorMapPair MirrorMapPair::euclidean(int n) {
    if (n < 1) throw std::invalid_argument("mirror: dimension must be positive");
    return MirrorMapPair(true, n, std::vector<double>(n, 1.0), 0.0, 0.0);
}

MirrorMapPair MirrorMapPair::bit_entropy(std::vector<double> beta, double kappa,
                                         double additive_const) {
    if (beta.empty()) throw std::invalid_argument("mirror: dimension must be positive");
    for (double b : beta)
        if (!(b > 0.0)) throw std::invalid_argument("mirror: steepness must be positive");
    return MirrorMapPair(false, static_cast<int>(beta.size()), std::move(beta), kappa,
                         additive_const);
}

void MirrorMapPair::check_dim(std::size_t got) const {
    if (static_cast<int>(got) != n_)
        throw std::invalid_argument("mirror: argument dimension mismatch");
}

double MirrorMapPair::psi(const std::vector<double>& z) const {
    check_dim(z.size());
    double acc = 0.0;
    if (euclidean_) {
        for (double v : z) acc += 0.5 * v * v;
        return acc;
    }
    for (int i = 0; i < n_; ++i) {
        const double tb = 2.0 * beta_[i];
        acc += softplus(tb * z[i]) / tb;
    }
    return acc;
}

double MirrorMapPair::psi_star(const std::vector<double>& x) const {
    check_dim(x.size());
    double acc = 0.0;
    if (euclidean_) {
        for (double v : x) acc += 0.5 * v * v;
        return acc;
    }
    require_interior(x);
    double prod = 1.0;
    for (int i = 0; i < n_; ++i) {
        const double xi = x[i];
        acc += (xi * std::log(xi) + (1.0 - xi) * std::log(1.0 - xi)) / (2.0 * beta_[i]);
        prod *= xi;
    }
    return acc + kappa_ * prod + const_;
}

std::vector<double> MirrorMapPair::grad_psi(const std::vector<double>& z) const {
    check_dim(z.size());
    if (euclidean_) return z;
    std::vector<double> g(n_);
    for (int i = 0; i < n_; ++i) g[i] = sigmoid(2.0 * beta_[i] * z[i]);
    return g;
}

std::vector<double> MirrorMapPair::grad_psi_star(const std::vector<double>& x) const {
    check_dim(x.size());
    if (euclidean_) return x;
    require_interior(x);
    std::vector<double> g(n_);
    for (int i = 0; i < n_; ++i)
        g[i] = std::log(x[i] / (1.0 - x[i])) / (2.0 * beta_[i]);
    if (kappa_ != 0.0) {
        for (int i = 0; i < n_; ++i) {
            double prod = 1.0;
            for (int j = 0; j < n_; ++j)
                if (j != i) prod *= x[j];
            g[i] += kappa_ * prod;
        }
    }
    return g;
}

std::vector<double> MirrorMapPair::to_dual(const std::vector<double>& x) const {
    check_dim(x.size());
    if (euclidean_) return x;
    require_interior(x);
    std::vector<double> z(n_);
    for (int i = 0; i < n_; ++i)
        z[i] = std::log(x[i] / (1.0 - x[i])) / (2.0 * beta_[i]);
    return z;
}

std::vector<double> MirrorMapPair::to_primal(const std::vector<double>& z) const {
    check_dim(z.size());
    if (euclidean_) return z;
    std::vector<double> x(n_);
    for (int i = 0; i < n_; ++i) x[i] = sigmoid(2.0 * beta_[i] * z[i]);
    return x;
}

double MirrorMapPair::bregman(BregmanBranch which, const std::vector<double>& a,
                              const std::vector<double>& b) const {
    check_dim(a.size());
    check_dim(b.size());
    double va, vb;
    std::vector<double> gb;
    if (which == BregmanBranch::psi) {
        va = psi(a);
        vb = psi(b);
        gb = grad_psi(b);
    } else {
        va = psi_star(a);
        vb = psi_star(b);
        gb = grad_psi_star(b);
    }
    double dot = 0.0;
    for (int i = 0; i < n_; ++i) dot += gb[i] * (a[i] - b[i]);
    const double d = va - vb - dot;
    if (d < 0.0 && d > -1e-12) return 0.0;
    return d;
}

std::vector<double> mirror_step(const MirrorMapPair& pair, const GradEval& grad_f,
                                const std::vector<double>& z, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("mirror_step: h must be positive");
    if (pair.is_euclidean()) {
        const std::vector<double> g = grad_f(z);
        if (static_cast<int>(g.size()) != pair.dim())
            throw std::invalid_argument("mirror_step: gradient dimension mismatch");
        std::vector<double> out(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (!std::isfinite(g[i])) throw numeric_error("mirror_step: non-finite gradient");
            out[i] = z[i] - h * g[i];
        }
        return out;
    }
    const std::vector<double> x = pair.to_primal(z);
    const std::vector<double> g = grad_f(x);
    if (static_cast<int>(g.size()) != pair.dim())
        throw std::invalid_argument("mirror_step: gradient dimension mismatch");
    // move in the primal chart with the inverse-metric scaling, then chart back;
    // this keeps the dual recursion in exact lockstep with the primal one
    std::vector<double> ximg(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(g[i])) throw numeric_error("mirror_step: non-finite gradient");
        const double ginv = 2.0 * pair.beta()[i] * x[i] * (1.0 - x[i]);
        ximg[i] = clamp_unit(x[i] - h * ginv * g[i]);
    }
    return pair.to_dual(ximg);
}

} // namespace hnnflow
