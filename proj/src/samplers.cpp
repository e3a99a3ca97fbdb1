#include "pat/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "pat/error.hpp"
#include "pat/format.hpp"
#include "pat/metrics.hpp"

namespace pat {

RotationPolicy parse_rotation_policy(std::string_view name) {
    if (name == "fixed") return RotationPolicy::fixed;
    if (name == "cycle") return RotationPolicy::cycle;
    if (name == "random") return RotationPolicy::random;
    throw ConfigError("unknown rotation policy '" + std::string(name) + "'");
}

InitMode parse_init_mode(std::string_view name) {
    if (name == "zeros") return InitMode::zeros;
    if (name == "adjoint") return InitMode::adjoint;
    if (name == "random") return InitMode::random;
    throw ConfigError("unknown init mode '" + std::string(name) + "'");
}

std::string_view to_string(RotationPolicy policy) {
    switch (policy) {
        case RotationPolicy::fixed: return "fixed";
        case RotationPolicy::cycle: return "cycle";
        case RotationPolicy::random: return "random";
    }
    return "unknown";
}

std::string_view to_string(InitMode mode) {
    switch (mode) {
        case InitMode::zeros: return "zeros";
        case InitMode::adjoint: return "adjoint";
        case InitMode::random: return "random";
    }
    return "unknown";
}

void ReconConfig::validate() const {
    if (steps_per_scale < 1) throw ConfigError("steps_per_scale must be at least 1");
    if (!(eps0 > 0.0) || !std::isfinite(eps0)) throw ConfigError("eps0 must be positive");
    if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
    if (!(guidance_anneal >= 0.0)) throw ConfigError("guidance anneal c must be non-negative");
    if (!(alpha >= -1.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [-1, 1]");
    const double smin = schedule.sigma_min();
    if (!(gamma * gamma + guidance_anneal * smin * smin > 0.0))
        throw ConfigError("gamma^2 + c*sigma^2 vanishes; likelihood weight undefined");
}

namespace {

void check_problem(const ModelMatrix& a, const ChannelMask& mask, const SensorData& y) {
    if (mask.n_ch() != a.geometry().n_ch) throw ShapeError("mask channel count does not match model matrix");
    if (y.n_ch() != a.geometry().n_ch || y.n_t() != a.geometry().n_t)
        throw ShapeError("measurements do not match model matrix");
}

// grad = A^T M (y - M A x) / weight, with scratch reused across steps.
struct GuidanceWorkspace {
    std::vector<double> residual;
};

double likelihood_weight(double gamma, double sigma, double c) {
    const double w = gamma * gamma + c * sigma * sigma;
    if (!(w > 0.0)) throw ConfigError("gamma^2 + c*sigma^2 must be positive");
    return w;
}

void guidance_values(const ModelMatrix& a, const ChannelMask& mask, std::span<const double> y,
                     std::span<const double> x, double weight, GuidanceWorkspace& ws, std::span<double> grad) {
    ws.residual.resize(a.rows());
    a.multiply(x, ws.residual);
    for (std::size_t i = 0; i < ws.residual.size(); ++i) ws.residual[i] = y[i] - ws.residual[i];
    apply_mask_inplace(mask, ws.residual, a.geometry().n_t);
    a.multiply_transpose(ws.residual, grad);
    for (double& g : grad) g /= weight;
}

// ||M A x - y|| for already-masked y.
double fidelity_norm(const ModelMatrix& a, const ChannelMask& mask, std::span<const double> y,
                     std::span<const double> x, std::vector<double>& scratch) {
    scratch.resize(a.rows());
    a.multiply(x, scratch);
    apply_mask_inplace(mask, scratch, a.geometry().n_t);
    double acc = 0.0;
    for (std::size_t i = 0; i < scratch.size(); ++i) {
        const double d = scratch[i] - y[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

class RotationChooser {
public:
    RotationChooser(const ReconConfig& config, std::size_t n_ch)
        : policy_(config.rotation_policy), fixed_(config.fixed_rotation), n_ch_(n_ch), rng_(config.rotation_seed) {}

    RotationIndex next(std::size_t scale_index) {
        switch (policy_) {
            case RotationPolicy::fixed:
                return RotationIndex(static_cast<std::int64_t>(fixed_), n_ch_);
            case RotationPolicy::cycle:
                return RotationIndex(static_cast<std::int64_t>(scale_index % (n_ch_ - 1) + 1), n_ch_);
            case RotationPolicy::random:
                return RotationIndex(static_cast<std::int64_t>(1 + rng_.below(n_ch_ - 1)), n_ch_);
        }
        throw ConfigError("unknown rotation policy");
    }

private:
    RotationPolicy policy_;
    std::size_t fixed_;
    std::size_t n_ch_;
    Rng rng_;
};

// x <- x + alpha * adjoint_scale * A^T residual, residual already computed.
void apply_correction(const ModelMatrix& a, std::span<const double> residual, double alpha, std::span<double> x,
                      std::vector<double>& scratch) {
    if (alpha == 0.0) return;
    scratch.resize(a.cols());
    a.multiply_transpose(residual, scratch);
    const double k = alpha * a.adjoint_scale();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += k * scratch[i];
}

SamplerResult run_sampler(const ModelMatrix& a, const ChannelMask& mask, const SensorData& y_in,
                          const ScoreModel& prior, const ReconConfig& config, const ImageGrid* ground_truth,
                          bool correct) {
    config.validate();
    check_problem(a, mask, y_in);
    if (prior.dim() != a.cols()) throw ShapeError("prior dimension does not match image size");
    if (ground_truth && ground_truth->side() != a.grid_side()) throw ShapeError("ground truth side mismatch");

    const std::size_t n = a.cols();
    const SensorData y = apply_mask(mask, y_in);
    Rng rng(config.seed);
    RotationChooser chooser(config, a.geometry().n_ch);

    std::vector<double> x(n, 0.0);
    switch (config.init) {
        case InitMode::zeros: break;
        case InitMode::adjoint: {
            const ImageGrid back = apply_adjoint(a, y);
            std::copy(back.values().begin(), back.values().end(), x.begin());
            break;
        }
        case InitMode::random:
            for (double& v : x) v = config.schedule.sigma_max() * rng.normal();
            break;
    }

    std::vector<double> score(n), guidance(n), scratch_img, scratch_data, residual(a.rows());
    GuidanceWorkspace gws;
    EquivarianceWorkspace ews;
    std::optional<double> peak;
    if (ground_truth) peak = data_range_of(*ground_truth);

    TraceRecord trace;
    trace.entries.reserve(config.schedule.size());
    const double sigma_last = config.schedule.sigma_min();
    for (std::size_t i = 0; i < config.schedule.size(); ++i) {
        const double sigma = config.schedule[i];
        const double eps = step_size(config.eps0, sigma, sigma_last);
        const double weight = likelihood_weight(config.gamma, sigma, config.guidance_anneal);
        for (std::size_t t = 0; t < config.steps_per_scale; ++t) {
            prior.score(x, sigma, score);
            guidance_values(a, mask, y.values(), x, weight, gws, guidance);
            ald_step(x, score, guidance, eps, &rng);
        }

        const RotationIndex r = chooser.next(i);
        TraceEntry entry{};
        entry.sigma = sigma;
        entry.equiv_before = equivariance_residual_values(a, x, r, ews, residual);
        if (correct) {
            apply_correction(a, residual, config.alpha, x, scratch_img);
            entry.equiv_after = config.alpha == 0.0 ? entry.equiv_before
                                                    : equivariance_residual_values(a, x, r, ews, residual);
        } else {
            entry.equiv_after = entry.equiv_before;
        }
        entry.fidelity_norm = fidelity_norm(a, mask, y.values(), x, scratch_data);
        if (ground_truth) entry.psnr = psnr_values(ground_truth->values(), x, *peak);
        trace.entries.push_back(entry);
    }
    return {ImageGrid(a.grid_side(), a.pixel_size(), std::move(x)), std::move(trace)};
}

}  // namespace

ImageGrid likelihood_gradient(const ModelMatrix& a, const ChannelMask& mask, const SensorData& y, const ImageGrid& x,
                              double gamma, double sigma, double c) {
    check_problem(a, mask, y);
    if (x.side() != a.grid_side()) throw ShapeError("image side does not match model matrix");
    const double weight = likelihood_weight(gamma, sigma, c);
    std::vector<double> grad(a.cols());
    GuidanceWorkspace ws;
    const SensorData ym = apply_mask(mask, y);
    guidance_values(a, mask, ym.values(), x.values(), weight, ws, grad);
    return ImageGrid(x.side(), x.pixel_size(), std::move(grad));
}

void ald_step(std::span<double> x, std::span<const double> score, std::span<const double> guidance, double eps,
              Rng* rng) {
    if (!(eps > 0.0)) throw ConfigError("Langevin step size must be positive");
    if (score.size() != x.size() || guidance.size() != x.size()) throw ShapeError("Langevin step length mismatch");
    const double noise = std::sqrt(2.0 * eps);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += eps * (score[i] + guidance[i]);
        if (rng) x[i] += noise * rng->normal();
    }
}

ImageGrid ald_step(const ImageGrid& x, std::span<const double> score, std::span<const double> guidance, double eps,
                   Rng* rng) {
    ImageGrid out = x;
    ald_step(out.values(), score, guidance, eps, rng);
    return out;
}

double step_size(double eps0, double sigma_i, double sigma_last) {
    const double ratio = sigma_i / sigma_last;
    return eps0 * ratio * ratio;
}

double masked_norm_sq(const ModelMatrix& a, const ChannelMask& mask, std::size_t iterations) {
    if (mask.n_ch() != a.geometry().n_ch) throw ShapeError("mask channel count does not match model matrix");
    std::vector<double> x(a.cols(), 1.0), y(a.rows());
    double lambda = 0.0;
    for (std::size_t it = 0; it < iterations; ++it) {
        double norm = 0.0;
        for (double v : x) norm += v * v;
        norm = std::sqrt(norm);
        if (!(norm > 0.0)) return 0.0;
        for (double& v : x) v /= norm;
        a.multiply(x, y);
        apply_mask_inplace(mask, y, a.geometry().n_t);
        lambda = 0.0;
        for (double v : y) lambda += v * v;
        a.multiply_transpose(y, x);
    }
    return lambda;
}

double stable_base_step(const ModelMatrix& a, const ChannelMask& mask, const NoiseSchedule& schedule, double gamma,
                        double c, double safety) {
    if (!(safety > 0.0)) throw ConfigError("step safety factor must be positive");
    const double norm = masked_norm_sq(a, mask);
    if (!(norm > 0.0)) throw ConfigError("masked forward operator is zero; no step size bound");
    const double last = schedule.sigma_min();
    double worst = 0.0;
    for (double s : schedule.sigmas()) worst = std::max(worst, step_size(1.0, s, last) / likelihood_weight(gamma, s, c));
    return safety / (norm * worst);
}

ImageGrid rcc_correction(const ImageGrid& x, const ModelMatrix& a, const RotationIndex& r, double alpha) {
    if (!(alpha >= -1.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [-1, 1]");
    if (x.side() != a.grid_side()) throw ShapeError("image side does not match model matrix");
    EquivarianceWorkspace ws;
    std::vector<double> residual(a.rows()), scratch;
    ImageGrid out = x;
    if (alpha == 0.0) return out;
    equivariance_residual_values(a, x.values(), r, ws, residual);
    apply_correction(a, residual, alpha, out.values(), scratch);
    return out;
}

SamplerResult run_langevin(const ModelMatrix& a, const ChannelMask& mask, const SensorData& y,
                           const ScoreModel& prior, const ReconConfig& config, const ImageGrid* ground_truth) {
    return run_sampler(a, mask, y, prior, config, ground_truth, false);
}

SamplerResult run_rcc_sgm(const ModelMatrix& a, const ChannelMask& mask, const SensorData& y,
                          const ScoreModel& prior, const ReconConfig& config, const ImageGrid* ground_truth) {
    return run_sampler(a, mask, y, prior, config, ground_truth, true);
}

void write_trace_csv(const TraceRecord& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PersistenceError("cannot open for writing", path.string());
    out << "scale_index,sigma,fidelity_norm,equiv_before,equiv_after,psnr\n";
    for (std::size_t i = 0; i < trace.entries.size(); ++i) {
        const auto& e = trace.entries[i];
        out << i << ',' << format_real(e.sigma) << ',' << format_real(e.fidelity_norm) << ','
            << format_real(e.equiv_before) << ',' << format_real(e.equiv_after) << ',';
        if (e.psnr) out << format_psnr(*e.psnr);
        out << '\n';
    }
    if (!out) throw PersistenceError("write failed", path.string());
}

}  // namespace pat
