#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace pat {

// Geometric sequence of noise levels, largest first.
class NoiseSchedule {
public:
    explicit NoiseSchedule(std::vector<double> sigmas);

    const std::vector<double>& sigmas() const noexcept { return sigmas_; }
    std::size_t size() const noexcept { return sigmas_.size(); }
    double operator[](std::size_t i) const { return sigmas_[i]; }
    double sigma_max() const { return sigmas_.front(); }
    double sigma_min() const { return sigmas_.back(); }

private:
    std::vector<double> sigmas_;
};

// sigmas[i] = sigma_max * (sigma_min/sigma_max)^(i/(L-1)); endpoints exact.
NoiseSchedule make_schedule(std::size_t levels = 500, double sigma_min = 0.01, double sigma_max = 100.0);

// Score of a prior perturbed by N(0, sigma^2 I). This is where a learned
// noise-conditional network would plug in.
class ScoreModel {
public:
    virtual ~ScoreModel() = default;

    virtual std::size_t dim() const = 0;
    virtual void score(std::span<const double> x, double sigma, std::span<double> out) const = 0;
    // Log density of the perturbed prior up to an x-independent constant.
    virtual double log_density(std::span<const double> x, double sigma) const = 0;

    std::vector<double> score(std::span<const double> x, double sigma) const {
        std::vector<double> out(x.size());
        score(x, sigma, out);
        return out;
    }

protected:
    void check_dims(std::span<const double> x, std::span<const double> out) const;
};

class GaussianPrior final : public ScoreModel {
public:
    struct Isotropic {
        double variance;
    };
    using Diagonal = std::vector<double>;
    using Dense = Eigen::MatrixXd;
    using Covariance = std::variant<Isotropic, Diagonal, Dense>;

    GaussianPrior(std::vector<double> mean, Covariance covariance);

    std::size_t dim() const override { return mean_.size(); }
    void score(std::span<const double> x, double sigma, std::span<double> out) const override;
    double log_density(std::span<const double> x, double sigma) const override;
    using ScoreModel::score;

    const std::vector<double>& mean() const noexcept { return mean_; }
    const Covariance& covariance() const noexcept { return covariance_; }

private:
    std::vector<double> mean_;
    Covariance covariance_;
};

class GmmPrior final : public ScoreModel {
public:
    GmmPrior(std::vector<double> weights, std::vector<std::vector<double>> means, std::vector<double> variances);

    std::size_t dim() const override { return means_.front().size(); }
    void score(std::span<const double> x, double sigma, std::span<double> out) const override;
    double log_density(std::span<const double> x, double sigma) const override;
    using ScoreModel::score;

private:
    // log w_k + log N(x; mu_k, (v_k + sigma^2) I) for every component.
    std::vector<double> component_logs(std::span<const double> x, double sigma) const;

    std::vector<double> weights_;
    std::vector<std::vector<double>> means_;
    std::vector<double> variances_;
};

// Zero-mean Gaussian Markov random field on a side x side grid with
// precision Q = beta * L + tau * I, L the 4-neighbour graph Laplacian.
class GmrfPrior final : public ScoreModel {
public:
    GmrfPrior(std::size_t side, double beta, double tau);

    std::size_t dim() const override { return side_ * side_; }
    void score(std::span<const double> x, double sigma, std::span<double> out) const override;
    double log_density(std::span<const double> x, double sigma) const override;
    using ScoreModel::score;

    std::size_t side() const noexcept { return side_; }
    double beta() const noexcept { return beta_; }
    double tau() const noexcept { return tau_; }

    // out = Q x
    void apply_precision(std::span<const double> x, std::span<double> out) const;

    // Relative residual target and iteration cap (10 n) of the CG solve.
    static constexpr double kCgTolerance = 1e-10;

private:
    std::size_t side_;
    double beta_;
    double tau_;
};

}  // namespace pat
