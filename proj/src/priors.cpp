#include "pat/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pat/error.hpp"

namespace pat {

NoiseSchedule::NoiseSchedule(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
    if (sigmas_.size() < 2) throw ConfigError("noise schedule needs at least two levels");
    for (std::size_t i = 0; i < sigmas_.size(); ++i) {
        if (!(sigmas_[i] > 0.0) || !std::isfinite(sigmas_[i])) throw ConfigError("noise levels must be positive");
        if (i > 0 && !(sigmas_[i] < sigmas_[i - 1])) throw ConfigError("noise levels must strictly decrease");
    }
}

NoiseSchedule make_schedule(std::size_t levels, double sigma_min, double sigma_max) {
    if (levels < 2) throw ConfigError("schedule needs L >= 2");
    if (!(sigma_min > 0.0) || !(sigma_max > sigma_min) || !std::isfinite(sigma_max))
        throw ConfigError("schedule needs 0 < sigma_min < sigma_max");
    std::vector<double> s(levels);
    const double ratio = sigma_min / sigma_max;
    for (std::size_t i = 0; i < levels; ++i)
        s[i] = sigma_max * std::pow(ratio, static_cast<double>(i) / static_cast<double>(levels - 1));
    s.front() = sigma_max;
    s.back() = sigma_min;
    return NoiseSchedule(std::move(s));
}

void ScoreModel::check_dims(std::span<const double> x, std::span<const double> out) const {
    if (x.size() != dim() || out.size() != dim()) throw ShapeError("score input length does not match prior");
}

// --- Gaussian ---------------------------------------------------------------

GaussianPrior::GaussianPrior(std::vector<double> mean, Covariance covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    if (mean_.empty()) throw ConfigError("Gaussian prior needs a non-empty mean");
    const std::size_t n = mean_.size();
    if (const auto* iso = std::get_if<Isotropic>(&covariance_)) {
        if (!(iso->variance > 0.0)) throw ConfigError("variance must be positive");
    } else if (const auto* diag = std::get_if<Diagonal>(&covariance_)) {
        if (diag->size() != n) throw ShapeError("diagonal covariance length does not match mean");
        for (double v : *diag)
            if (!(v > 0.0)) throw ConfigError("variances must be positive");
    } else {
        const auto& dense = std::get<Dense>(covariance_);
        if (static_cast<std::size_t>(dense.rows()) != n || static_cast<std::size_t>(dense.cols()) != n)
            throw ShapeError("dense covariance shape does not match mean");
        if (!dense.isApprox(dense.transpose(), 1e-12)) throw ConfigError("covariance must be symmetric");
        Eigen::LLT<Dense> llt(dense);
        if (llt.info() != Eigen::Success) throw ConfigError("covariance must be positive-definite");
    }
}

void GaussianPrior::score(std::span<const double> x, double sigma, std::span<double> out) const {
    check_dims(x, out);
    const std::size_t n = dim();
    const double s2 = sigma * sigma;
    if (const auto* iso = std::get_if<Isotropic>(&covariance_)) {
        const double denom = iso->variance + s2;
        for (std::size_t i = 0; i < n; ++i) out[i] = -(x[i] - mean_[i]) / denom;
    } else if (const auto* diag = std::get_if<Diagonal>(&covariance_)) {
        for (std::size_t i = 0; i < n; ++i) out[i] = -(x[i] - mean_[i]) / ((*diag)[i] + s2);
    } else {
        Dense c = std::get<Dense>(covariance_);
        c.diagonal().array() += s2;
        Eigen::VectorXd diff(n);
        for (std::size_t i = 0; i < n; ++i) diff[i] = x[i] - mean_[i];
        const Eigen::VectorXd z = c.llt().solve(diff);
        for (std::size_t i = 0; i < n; ++i) out[i] = -z[i];
    }
}

double GaussianPrior::log_density(std::span<const double> x, double sigma) const {
    if (x.size() != dim()) throw ShapeError("log_density input length does not match prior");
    const std::size_t n = dim();
    const double s2 = sigma * sigma;
    double quad = 0.0;
    double logdet = 0.0;
    if (const auto* iso = std::get_if<Isotropic>(&covariance_)) {
        const double v = iso->variance + s2;
        for (std::size_t i = 0; i < n; ++i) quad += (x[i] - mean_[i]) * (x[i] - mean_[i]) / v;
        logdet = static_cast<double>(n) * std::log(v);
    } else if (const auto* diag = std::get_if<Diagonal>(&covariance_)) {
        for (std::size_t i = 0; i < n; ++i) {
            const double v = (*diag)[i] + s2;
            quad += (x[i] - mean_[i]) * (x[i] - mean_[i]) / v;
            logdet += std::log(v);
        }
    } else {
        Dense c = std::get<Dense>(covariance_);
        c.diagonal().array() += s2;
        Eigen::LLT<Dense> llt(c);
        Eigen::VectorXd diff(n);
        for (std::size_t i = 0; i < n; ++i) diff[i] = x[i] - mean_[i];
        quad = diff.dot(llt.solve(diff));
        logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }
    return -0.5 * quad - 0.5 * logdet;
}

// --- Gaussian mixture ---------------------------------------------------------

GmmPrior::GmmPrior(std::vector<double> weights, std::vector<std::vector<double>> means, std::vector<double> variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
    if (weights_.empty()) throw ConfigError("mixture needs at least one component");
    if (means_.size() != weights_.size() || variances_.size() != weights_.size())
        throw ShapeError("mixture weights, means and variances differ in length");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w > 0.0)) throw ConfigError("mixture weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("mixture weights must sum to 1");
    const std::size_t n = means_.front().size();
    if (n == 0) throw ConfigError("mixture means must be non-empty");
    for (const auto& m : means_)
        if (m.size() != n) throw ShapeError("mixture means differ in length");
    for (double v : variances_)
        if (!(v > 0.0)) throw ConfigError("mixture variances must be positive");
}

std::vector<double> GmmPrior::component_logs(std::span<const double> x, double sigma) const {
    const std::size_t n = dim();
    std::vector<double> logs(weights_.size());
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const double v = variances_[k] + sigma * sigma;
        double d2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) d2 += (x[i] - means_[k][i]) * (x[i] - means_[k][i]);
        logs[k] = std::log(weights_[k]) - 0.5 * d2 / v - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi * v);
    }
    return logs;
}

void GmmPrior::score(std::span<const double> x, double sigma, std::span<double> out) const {
    check_dims(x, out);
    const auto logs = component_logs(x, sigma);
    const double top = *std::max_element(logs.begin(), logs.end());
    double norm = 0.0;
    for (double l : logs) norm += std::exp(l - top);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < logs.size(); ++k) {
        const double resp = std::exp(logs[k] - top) / norm;
        const double v = variances_[k] + sigma * sigma;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= resp * (x[i] - means_[k][i]) / v;
    }
}

double GmmPrior::log_density(std::span<const double> x, double sigma) const {
    if (x.size() != dim()) throw ShapeError("log_density input length does not match prior");
    const auto logs = component_logs(x, sigma);
    const double top = *std::max_element(logs.begin(), logs.end());
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - top);
    return top + std::log(acc);
}

// --- GMRF -----------------------------------------------------------------------

GmrfPrior::GmrfPrior(std::size_t side, double beta, double tau) : side_(side), beta_(beta), tau_(tau) {
    if (side < 1) throw ConfigError("GMRF side must be positive");
    if (!(beta > 0.0)) throw ConfigError("GMRF beta must be positive");
    if (!(tau > 0.0)) throw ConfigError("GMRF tau must be positive");
}

void GmrfPrior::apply_precision(std::span<const double> x, std::span<double> out) const {
    const std::size_t n = side_;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t p = i * n + j;
            const double v = x[p];
            double lap = 0.0;
            if (i > 0) lap += v - x[p - n];
            if (i + 1 < n) lap += v - x[p + n];
            if (j > 0) lap += v - x[p - 1];
            if (j + 1 < n) lap += v - x[p + 1];
            out[p] = beta_ * lap + tau_ * v;
        }
    }
}

void GmrfPrior::score(std::span<const double> x, double sigma, std::span<double> out) const {
    check_dims(x, out);
    const std::size_t n = dim();
    if (sigma == 0.0) {
        apply_precision(x, out);
        for (double& v : out) v = -v;
        return;
    }

    // Solve (I + sigma^2 Q) z = x by conjugate gradients, then out = -Q z.
    const double s2 = sigma * sigma;
    std::vector<double> z(n, 0.0), r(x.begin(), x.end()), p(x.begin(), x.end()), ap(n);
    double rr = 0.0;
    for (double v : r) rr += v * v;
    const double target = kCgTolerance * kCgTolerance * rr;
    const std::size_t max_iter = 10 * n;
    std::size_t iter = 0;
    while (rr > target) {
        if (iter++ >= max_iter) throw NumericalError("GMRF conjugate gradient did not converge");
        apply_precision(p, ap);
        double pap = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ap[i] = p[i] + s2 * ap[i];
            pap += p[i] * ap[i];
        }
        const double step = rr / pap;
        double rr_next = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] += step * p[i];
            r[i] -= step * ap[i];
            rr_next += r[i] * r[i];
        }
        const double beta = rr_next / rr;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        rr = rr_next;
    }
    apply_precision(z, out);
    for (double& v : out) v = -v;
}

double GmrfPrior::log_density(std::span<const double> x, double sigma) const {
    // -1/2 x^T (Q^-1 + sigma^2 I)^-1 x, which is 1/2 <x, score(x)>.
    std::vector<double> s(dim());
    score(x, sigma, s);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += x[i] * s[i];
    return 0.5 * acc;
}

}  // namespace pat
