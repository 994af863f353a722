#pragma once
#include <functional>
#include <vector>

namespace hnnflow {

enum class BregmanBranch { psi, psi_star };

// Legendre pair: psi on the dual space, psi_star on the primal cube.
// bit_entropy couples the logistic-type convex potential with weighted bit
// entropy; euclidean is the self-dual pair psi = psi_star = squared norm / 2.
class MirrorMapPair {
public:
    static MirrorMapPair euclidean(int n);
    static MirrorMapPair bit_entropy(std::vector<double> beta, double kappa = 0.0,
                                     double additive_const = 0.0);

    int dim() const { return n_; }
    bool is_euclidean() const { return euclidean_; }
    const std::vector<double>& beta() const { return beta_; }
    double kappa() const { return kappa_; }

    double psi(const std::vector<double>& z) const;
    double psi_star(const std::vector<double>& x) const;
    std::vector<double> grad_psi(const std::vector<double>& z) const;
    std::vector<double> grad_psi_star(const std::vector<double>& x) const;

    // coordinate charts between the primal cube and the dual space
    std::vector<double> to_dual(const std::vector<double>& x) const;
    std::vector<double> to_primal(const std::vector<double>& z) const;

    double bregman(BregmanBranch which, const std::vector<double>& a,
                   const std::vector<double>& b) const;

private:
    MirrorMapPair(bool euclidean, int n, std::vector<double> beta, double kappa, double c);
    void check_dim(std::size_t got) const;

    bool euclidean_;
    int n_;
    std::vector<double> beta_;
    double kappa_;
    double const_;
};

using GradEval = std::function<std::vector<double>(const std::vector<double>&)>;

// one mirror-descent update in the dual chart; for the bit-entropy pair the
// primal image reproduces the metric gradient step exactly
std::vector<double> mirror_step(const MirrorMapPair& pair, const GradEval& grad_f,
                                const std::vector<double>& z, double h);

} // namespace hnnflow
