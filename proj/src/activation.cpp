#include "hnnflow/activation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hnnflow {

void require_interior(double x) {
    if (!(x > boundary_margin) || !(x < 1.0 - boundary_margin))
        throw std::domain_error("point too close to the unit-cube boundary: " + std::to_string(x));
}

void require_interior(const std::vector<double>& x) {
    for (double v : x) require_interior(v);
}

double clamp_unit(double x) {
    return std::min(1.0 - clamp_margin, std::max(clamp_margin, x));
}

TabulatedSigma::TabulatedSigma(std::vector<double> s, std::vector<double> y)
    : s_(std::move(s)), y_(std::move(y)) {
    const std::size_t n = s_.size();
    if (n < 2 || y_.size() != n)
        throw std::invalid_argument("tabulated activation needs >= 2 matching samples");
    for (std::size_t k = 0; k + 1 < n; ++k)
        if (!(s_[k] < s_[k + 1]) || !(y_[k] < y_[k + 1]))
            throw std::invalid_argument("tabulated activation samples must be strictly increasing");

    // Fritsch-Carlson slopes: start from secant averages, then limit so the
    // interpolant is monotone on every interval
    std::vector<double> d(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) d[k] = (y_[k + 1] - y_[k]) / (s_[k + 1] - s_[k]);
    m_.assign(n, 0.0);
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (std::size_t k = 1; k + 1 < n; ++k) m_[k] = 0.5 * (d[k - 1] + d[k]);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double a = m_[k] / d[k], b = m_[k + 1] / d[k];
        const double r2 = a * a + b * b;
        if (r2 > 9.0) {
            const double t = 3.0 / std::sqrt(r2);
            m_[k] = t * a * d[k];
            m_[k + 1] = t * b * d[k];
        }
    }
}

int TabulatedSigma::find_interval(double s) const {
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    int k = static_cast<int>(it - s_.begin()) - 1;
    return std::clamp(k, 0, static_cast<int>(s_.size()) - 2);
}

double TabulatedSigma::value(double s) const {
    if (s <= s_.front()) return y_.front() + m_.front() * (s - s_.front());
    if (s >= s_.back()) return y_.back() + m_.back() * (s - s_.back());
    const int k = find_interval(s);
    const double hx = s_[k + 1] - s_[k], t = (s - s_[k]) / hx;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * hx * m_[k]
         + (-2 * t3 + 3 * t2) * y_[k + 1] + (t3 - t2) * hx * m_[k + 1];
}

double TabulatedSigma::deriv(double s) const {
    if (s <= s_.front()) return m_.front();
    if (s >= s_.back()) return m_.back();
    const int k = find_interval(s);
    const double hx = s_[k + 1] - s_[k], t = (s - s_[k]) / hx;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * y_[k] + (3 * t2 - 4 * t + 1) * hx * m_[k]
          + (-6 * t2 + 6 * t) * y_[k + 1] + (3 * t2 - 2 * t) * hx * m_[k + 1]) / hx;
}

double TabulatedSigma::second_deriv(double s) const {
    if (s <= s_.front() || s >= s_.back()) return 0.0;
    const int k = find_interval(s);
    const double hx = s_[k + 1] - s_[k], t = (s - s_[k]) / hx;
    return ((12 * t - 6) * y_[k] + (6 * t - 4) * hx * m_[k]
          + (-12 * t + 6) * y_[k + 1] + (6 * t - 2) * hx * m_[k + 1]) / (hx * hx);
}

double TabulatedSigma::inverse(double x) const {
    // bracket in s, including the linear extensions
    double lo = s_.front(), hi = s_.back();
    if (x < y_.front()) lo = s_.front() - (y_.front() - x) / m_.front() - 1.0;
    if (x > y_.back()) hi = s_.back() + (x - y_.back()) / m_.back() + 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (value(mid) < x ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Activation::Activation(ActKind kind, int n, std::vector<double> beta,
                       std::shared_ptr<const TabulatedSigma> tab)
    : kind_(kind), n_(n), beta_(std::move(beta)), tab_(std::move(tab)) {
    if (n_ <= 0) throw std::invalid_argument("activation dimension must be positive");
    if (kind_ != ActKind::tabulated) {
        if (static_cast<int>(beta_.size()) != n_)
            throw std::invalid_argument("beta vector length must equal the dimension");
        for (double b : beta_)
            if (!(b > 0.0)) throw std::invalid_argument("beta entries must be positive");
    }
}

Activation Activation::soft_projection(std::vector<double> beta) {
    const int n = static_cast<int>(beta.size());
    return Activation(ActKind::soft_projection, n, std::move(beta), nullptr);
}

Activation Activation::logistic(std::vector<double> beta) {
    const int n = static_cast<int>(beta.size());
    return Activation(ActKind::logistic, n, std::move(beta), nullptr);
}

Activation Activation::tabulated(int n, std::vector<double> s, std::vector<double> y) {
    auto tab = std::make_shared<const TabulatedSigma>(std::move(s), std::move(y));
    return Activation(ActKind::tabulated, n, {}, std::move(tab));
}

Activation Activation::identity(int n) {
    return tabulated(n, {0.0, 0.25, 0.5, 0.75, 1.0}, {0.0, 0.25, 0.5, 0.75, 1.0});
}

void Activation::check_dim(std::size_t got) const {
    if (static_cast<int>(got) != n_)
        throw std::invalid_argument("dimension mismatch: expected " + std::to_string(n_)
                                    + ", got " + std::to_string(got));
}

double Activation::sigma(int i, double s) const {
    switch (kind_) {
        case ActKind::soft_projection: return 0.5 * std::tanh(beta_[i] * (s - 0.5)) + 0.5;
        case ActKind::logistic: return 1.0 / (1.0 + std::exp(-beta_[i] * s));
        case ActKind::tabulated: return tab_->value(s);
    }
    return 0.0;
}

double Activation::sigma_prime(int i, double s) const {
    switch (kind_) {
        case ActKind::soft_projection: {
            const double c = std::cosh(beta_[i] * (s - 0.5));
            return 0.5 * beta_[i] / (c * c);
        }
        case ActKind::logistic: {
            const double v = sigma(i, s);
            return beta_[i] * v * (1.0 - v);
        }
        case ActKind::tabulated: return tab_->deriv(s);
    }
    return 0.0;
}

double Activation::sigma_inverse(int i, double x) const {
    require_interior(x);
    switch (kind_) {
        case ActKind::soft_projection: return 0.5 + std::atanh(2.0 * x - 1.0) / beta_[i];
        case ActKind::logistic: return std::log(x / (1.0 - x)) / beta_[i];
        case ActKind::tabulated: return tab_->inverse(x);
    }
    return 0.0;
}

std::vector<double> Activation::apply(const std::vector<double>& hidden) const {
    check_dim(hidden.size());
    std::vector<double> out(n_);
    for (int i = 0; i < n_; ++i) out[i] = sigma(i, hidden[i]);
    return out;
}

std::vector<double> Activation::invert(const std::vector<double>& x) const {
    check_dim(x.size());
    std::vector<double> out(n_);
    for (int i = 0; i < n_; ++i) out[i] = sigma_inverse(i, x[i]);
    return out;
}

double Activation::metric(int i, double x) const {
    return 1.0 / metric_inv(i, x);
}

double Activation::metric_inv(int i, double x) const {
    require_interior(x);
    switch (kind_) {
        case ActKind::soft_projection: return 2.0 * beta_[i] * x * (1.0 - x);
        case ActKind::logistic: return beta_[i] * x * (1.0 - x);
        case ActKind::tabulated: return tab_->deriv(tab_->inverse(x));
    }
    return 0.0;
}

double Activation::metric_inv_prime(int i, double x) const {
    require_interior(x);
    switch (kind_) {
        case ActKind::soft_projection: return 2.0 * beta_[i] * (1.0 - 2.0 * x);
        case ActKind::logistic: return beta_[i] * (1.0 - 2.0 * x);
        case ActKind::tabulated: {
            // d/dx sigma'(s(x)) = sigma''(s) / sigma'(s)
            const double s = tab_->inverse(x);
            return tab_->second_deriv(s) / tab_->deriv(s);
        }
    }
    return 0.0;
}

double Activation::christoffel(int i, double x) const {
    require_interior(x);
    switch (kind_) {
        case ActKind::soft_projection:
        case ActKind::logistic:
            return (2.0 * x - 1.0) / (2.0 * x * (1.0 - x));
        case ActKind::tabulated: {
            // d/dx log sqrt(g) = -sigma''(s(x)) / (2 sigma'(s(x))^2)
            const double s = tab_->inverse(x);
            const double d1 = tab_->deriv(s);
            return -tab_->second_deriv(s) / (2.0 * d1 * d1);
        }
    }
    return 0.0;
}

void Activation::metric_at(const std::vector<double>& x,
                           std::vector<double>& g, std::vector<double>& g_inv) const {
    check_dim(x.size());
    g.resize(n_);
    g_inv.resize(n_);
    for (int i = 0; i < n_; ++i) {
        g_inv[i] = metric_inv(i, x[i]);
        g[i] = 1.0 / g_inv[i];
    }
}

std::vector<double> Activation::christoffel_at(const std::vector<double>& x) const {
    check_dim(x.size());
    std::vector<double> out(n_);
    for (int i = 0; i < n_; ++i) out[i] = christoffel(i, x[i]);
    return out;
}

} // namespace hnnflow
