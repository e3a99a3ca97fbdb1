#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace pat::testing {

// Test-side log densities, written without the library's code paths.
inline double dense_gaussian_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov) {
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
    const Eigen::VectorXd d = x - mu;
    return -0.5 * d.dot(lu.solve(d)) - 0.5 * std::log(lu.determinant()) -
           0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi);
}

inline double mixture_logpdf_1d(double x, const std::vector<double>& w, const std::vector<double>& mu,
                         const std::vector<double>& var, double sigma) {
    double p = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double v = var[k] + sigma * sigma;
        p += w[k] * std::exp(-(x - mu[k]) * (x - mu[k]) / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
    }
    return std::log(p);
}

inline Eigen::MatrixXd dense_gmrf_precision(std::size_t side, double beta, double tau) {
    const auto n = static_cast<Eigen::Index>(side * side);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    const auto link = [&](Eigen::Index a, Eigen::Index b) {
        q(a, a) += beta;
        q(b, b) += beta;
        q(a, b) -= beta;
        q(b, a) -= beta;
    };
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
            const auto p = static_cast<Eigen::Index>(i * side + j);
            if (j + 1 < side) link(p, p + 1);
            if (i + 1 < side) link(p, p + static_cast<Eigen::Index>(side));
        }
    }
    q.diagonal().array() += tau;
    return q;
}

// Isotropic mixture in n dimensions, perturbed by sigma.
inline double mixture_logpdf(const std::vector<double>& x, const std::vector<double>& w,
                             const std::vector<std::vector<double>>& mu, const std::vector<double>& var, double sigma) {
    std::vector<double> terms;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double v = var[k] + sigma * sigma;
        double d2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - mu[k][i]) * (x[i] - mu[k][i]);
        terms.push_back(std::log(w[k]) - d2 / (2.0 * v) -
                        0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi * v));
    }
    double top = terms[0];
    for (double t : terms) top = std::max(top, t);
    double s = 0.0;
    for (double t : terms) s += std::exp(t - top);
    return top + std::log(s);
}

}  // namespace pat::testing
