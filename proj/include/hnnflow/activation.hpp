#pragma once
#include <memory>
#include <string>
#include <vector>

namespace hnnflow {

enum class ActKind { soft_projection, logistic, tabulated };

// monotone cubic (Fritsch-Carlson) through strictly increasing samples,
// linearly extended beyond the sampled range so the map stays a bijection
class TabulatedSigma {
public:
    TabulatedSigma(std::vector<double> s, std::vector<double> y);
    double value(double s) const;
    double deriv(double s) const;
    double second_deriv(double s) const;
    double inverse(double x) const; // bisection to 1e-12
    double s_min() const { return s_.front(); }
    double s_max() const { return s_.back(); }
    double y_min() const { return y_.front(); }
    double y_max() const { return y_.back(); }

private:
    int find_interval(double s) const;
    std::vector<double> s_, y_, m_; // nodes, values, node slopes
};

// componentwise activation x = sigma(s) on (0,1)^n and the diagonal metric it induces
class Activation {
public:
    static Activation soft_projection(std::vector<double> beta);
    static Activation logistic(std::vector<double> beta);
    static Activation tabulated(int n, std::vector<double> s, std::vector<double> y);
    // tabulated straight ramp sigma(s) = s on (0,1); induces the identity metric
    static Activation identity(int n);

    int dim() const { return n_; }
    ActKind kind() const { return kind_; }
    const std::vector<double>& beta() const { return beta_; }

    double sigma(int i, double s) const;
    double sigma_prime(int i, double s) const;
    double sigma_inverse(int i, double x) const; // x interior, 1e-12 round trip

    std::vector<double> apply(const std::vector<double>& hidden) const;
    std::vector<double> invert(const std::vector<double>& x) const;

    // diagonal metric entries; all reject points within 1e-12 of the boundary
    double metric(int i, double x) const;           // g_ii = 1/sigma'(sigma^-1(x))
    double metric_inv(int i, double x) const;       // g^ii
    double metric_inv_prime(int i, double x) const; // d g^ii / dx
    double christoffel(int i, double x) const;      // Gamma^i_ii = d/dx log sqrt(g_ii)
    void metric_at(const std::vector<double>& x,
                   std::vector<double>& g, std::vector<double>& g_inv) const;
    std::vector<double> christoffel_at(const std::vector<double>& x) const;

private:
    Activation(ActKind kind, int n, std::vector<double> beta,
               std::shared_ptr<const TabulatedSigma> tab);
    void check_dim(std::size_t got) const;

    ActKind kind_;
    int n_;
    std::vector<double> beta_;
    std::shared_ptr<const TabulatedSigma> tab_;
};

// throws std::domain_error when x is outside (boundary_margin, 1 - boundary_margin)
void require_interior(double x);
void require_interior(const std::vector<double>& x);
inline constexpr double boundary_margin = 1e-12;
inline constexpr double clamp_margin = 1e-9; // dynamics clamp iterates to [clamp_margin, 1-clamp_margin]
double clamp_unit(double x);

} // namespace hnnflow
