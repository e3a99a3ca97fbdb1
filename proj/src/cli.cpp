#include "pat/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "pat/error.hpp"
#include "pat/format.hpp"
#include "pat/metrics.hpp"
#include "pat/tensor_io.hpp"

namespace pat::cli {

namespace fs = std::filesystem;

// --- settings ----------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Settings parse_settings(std::istream& in, const std::string& origin) {
    Settings settings;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        settings[section.empty() ? key : section + "." + key] = value;
    }
    return settings;
}

Settings load_settings(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    return parse_settings(in, path.string());
}

// --- typed access ------------------------------------------------------------------

namespace {

class Reader {
public:
    explicit Reader(const Settings& s) : s_(s) {}

    bool has(const std::string& key) const { return s_.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback) const {
        const auto it = s_.find(key);
        return it == s_.end() ? fallback : it->second;
    }

    double real(const std::string& key, double fallback) const {
        const auto it = s_.find(key);
        if (it == s_.end()) return fallback;
        double v = 0.0;
        const auto& t = it->second;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
            throw ConfigError(key + ": expected a finite number, got '" + t + "'");
        return v;
    }

    std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
        const auto it = s_.find(key);
        if (it == s_.end()) return fallback;
        std::uint64_t v = 0;
        const auto& t = it->second;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || ptr != t.data() + t.size())
            throw ConfigError(key + ": expected a non-negative integer, got '" + t + "'");
        return v;
    }

    std::vector<double> reals(const std::string& key, double fallback) const {
        const auto it = s_.find(key);
        if (it == s_.end()) return {fallback};
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            Settings one{{key, item}};
            out.push_back(Reader(one).real(key, 0.0));
        }
        return out;
    }

private:
    const Settings& s_;
};

// Rethrows any library ConfigError with the offending key prefixed.
template <typename F>
auto with_key(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

}  // namespace

ChannelMask RunConfig::make_channel_mask() const {
    return make_mask(pattern, n_keep, geometry.n_ch, mask_seed, view_offset);
}

std::unique_ptr<ScoreModel> RunConfig::make_prior() const {
    const std::size_t n = grid_side * grid_side;
    if (prior == "gmrf") return std::make_unique<GmrfPrior>(grid_side, prior_beta, prior_tau);
    return std::make_unique<GaussianPrior>(std::vector<double>(n, prior_mean),
                                           GaussianPrior::Isotropic{prior_variance});
}

RunConfig make_run_config(const Settings& settings) {
    const Reader r(settings);
    RunConfig c;
    c.grid_side = r.count("grid.side", 64);
    c.pixel_size = r.real("grid.pixel_size", 0.1);
    if (c.grid_side < 2) throw ConfigError("grid.side must be at least 2");
    if (!(c.pixel_size > 0.0)) throw ConfigError("grid.pixel_size must be positive");

    const std::size_t n_ch = r.count("geometry.n_ch", 64);
    const std::size_t n_t = r.count("geometry.n_t", recommended_time_bins(c.grid_side));
    if (n_ch < 4 || n_ch % 4 != 0) throw ConfigError("geometry.n_ch must be a positive multiple of 4");
    if (n_t < 2) throw ConfigError("geometry.n_t must be at least 2");
    c.geometry = with_key("geometry", [&] {
        return fit_geometry(c.grid_side, c.pixel_size, n_ch, n_t, r.real("geometry.radius_factor", 1.25),
                            r.real("geometry.sound_speed", 1.5));
    });
    c.geometry.radius = r.real("geometry.radius", c.geometry.radius);
    c.geometry.dt = r.real("geometry.dt", c.geometry.dt);
    c.geometry.t0 = r.real("geometry.t0", c.geometry.t0);
    with_key("geometry", [&] {
        c.geometry.validate(c.grid_side, c.pixel_size);
        return 0;
    });
    if (r.has("geometry.adjoint_scale") && r.str("geometry.adjoint_scale", "") == "geometric") {
        c.adjoint_scale = geometric_adjoint_scale(c.geometry);
    } else if (r.has("geometry.adjoint_scale") && r.str("geometry.adjoint_scale", "") != "calibrated") {
        c.adjoint_scale = r.real("geometry.adjoint_scale", 1.0);
        if (!(*c.adjoint_scale > 0.0)) throw ConfigError("geometry.adjoint_scale must be positive");
    }

    c.pattern = with_key("mask.pattern", [&] { return parse_pattern(r.str("mask.pattern", "uniform")); });
    c.n_keep = r.count("mask.n_keep", n_ch);
    if (c.n_keep < 1 || c.n_keep > n_ch)
        throw ConfigError("mask.n_keep must lie in [1, " + std::to_string(n_ch) + "], got " + std::to_string(c.n_keep));
    c.mask_seed.value = r.count("mask.seed", 0);
    c.view_offset = r.count("mask.view_offset", 0);

    c.noise_std = r.real("measurement.noise_std", 0.0);
    if (!(c.noise_std >= 0.0)) throw ConfigError("measurement.noise_std must be non-negative");
    c.noise_seed.value = r.count("measurement.noise_seed", 0);

    c.method = r.str("method.name", "linear");
    if (c.method != "linear" && c.method != "tv" && c.method != "langevin" && c.method != "rcc")
        throw ConfigError("method.name: unknown method '" + c.method + "' (linear, tv, langevin, rcc)");

    auto& rc = c.recon;
    rc.schedule = with_key("method.levels", [&] {
        return make_schedule(r.count("method.levels", 500), r.real("method.sigma_min", 0.01),
                             r.real("method.sigma_max", 10.0));
    });
    rc.steps_per_scale = r.count("method.steps", 5);
    c.auto_eps0 = r.str("method.eps0", "auto") == "auto";
    rc.eps0 = c.auto_eps0 ? 1.0 : r.real("method.eps0", 0.0);
    c.step_safety = r.real("method.step_safety", c.step_safety);
    if (!(c.step_safety > 0.0)) throw ConfigError("method.step_safety must be positive");
    rc.gamma = r.real("method.gamma", 0.0);
    rc.guidance_anneal = r.real("method.anneal", 100.0);
    rc.alpha = r.real("method.alpha", 0.0);
    rc.rotation_policy = with_key("method.rotation", [&] { return parse_rotation_policy(r.str("method.rotation", "random")); });
    rc.fixed_rotation = r.count("method.rotation_index", 1);
    rc.init = with_key("method.init", [&] { return parse_init_mode(r.str("method.init", "adjoint")); });
    rc.seed.value = r.count("method.seed", 0);
    rc.rotation_seed = r.has("method.rotation_seed") ? RngSeed{r.count("method.rotation_seed", 0)}
                                                     : derive_seed(rc.seed, 1);
    with_key("method", [&] {
        rc.validate();
        return 0;
    });

    c.tv.lambda = r.real("tv.lambda", 2000.0);
    c.tv.tol = r.real("tv.tol", 2e-4);
    c.tv.max_iter = r.count("tv.max_iter", 200);
    if (!(c.tv.lambda > 0.0) || !(c.tv.tol > 0.0) || c.tv.max_iter < 1)
        throw ConfigError("tv.lambda, tv.tol and tv.max_iter must be positive");

    c.prior = r.str("prior.kind", "gmrf");
    if (c.prior != "gmrf" && c.prior != "gaussian")
        throw ConfigError("prior.kind: unknown prior '" + c.prior + "' (gmrf, gaussian)");
    c.prior_beta = r.real("prior.beta", 1000.0);
    c.prior_tau = r.real("prior.tau", 1.0);
    c.prior_mean = r.real("prior.mean", 0.0);
    c.prior_variance = r.real("prior.variance", 1.0);
    with_key("prior", [&] {
        c.make_prior();
        return 0;
    });
    return c;
}

void resolve_step(RunConfig& config, const ModelMatrix& a, const ChannelMask& mask) {
    if (!config.auto_eps0) return;
    config.recon.eps0 = stable_base_step(a, mask, config.recon.schedule, config.recon.gamma,
                                         config.recon.guidance_anneal, config.step_safety);
    config.auto_eps0 = false;
}

ImageGrid reconstruct(const RunConfig& config, const ModelMatrix& a, const ChannelMask& mask, const SensorData& y,
                      const ImageGrid* ground_truth, TraceRecord* trace) {
    if (config.method == "linear") return reconstruct_linear(a, mask, y);
    if (config.method == "tv") return tv_denoise(reconstruct_linear(a, mask, y), config.tv);
    RunConfig resolved = config;
    resolve_step(resolved, a, mask);
    const auto prior = config.make_prior();
    auto result = config.method == "rcc" ? run_rcc_sgm(a, mask, y, *prior, resolved.recon, ground_truth)
                                         : run_langevin(a, mask, y, *prior, resolved.recon, ground_truth);
    if (trace) *trace = std::move(result.trace);
    return std::move(result.image);
}

// --- command plumbing ----------------------------------------------------------------

namespace {

struct Flag {
    const char* name;
    const char* key;
    const char* help;
};

// Flags shared by every command that builds a problem.
const std::vector<Flag> kProblemFlags = {
    {"--side", "grid.side", "image side in pixels"},
    {"--pixel-size", "grid.pixel_size", "pixel size in mm"},
    {"--n-ch", "geometry.n_ch", "transducer channels on the ring"},
    {"--n-t", "geometry.n_t", "time samples per channel"},
    {"--radius", "geometry.radius", "ring radius in mm"},
    {"--sound-speed", "geometry.sound_speed", "speed of sound in mm/us"},
    {"--dt", "geometry.dt", "sample interval in us"},
    {"--t0", "geometry.t0", "time of first sample in us"},
    {"--adjoint-scale", "geometry.adjoint_scale", "back-projection scale: calibrated | geometric | number"},
    {"--pattern", "mask.pattern", "uniform | random | limited_view"},
    {"--channels", "mask.n_keep", "number of measured channels"},
    {"--mask-seed", "mask.seed", "seed of the random mask"},
    {"--view-offset", "mask.view_offset", "first channel of a limited view"},
    {"--noise-std", "measurement.noise_std", "measurement noise std"},
    {"--noise-seed", "measurement.noise_seed", "measurement noise seed"},
};

const std::vector<Flag> kMethodFlags = {
    {"--method", "method.name", "linear | tv | langevin | rcc"},
    {"--levels", "method.levels", "number of noise scales"},
    {"--sigma-min", "method.sigma_min", "smallest noise scale"},
    {"--sigma-max", "method.sigma_max", "largest noise scale"},
    {"--steps", "method.steps", "Langevin steps per scale"},
    {"--eps0", "method.eps0", "step size at the smallest scale, or auto"},
    {"--step-safety", "method.step_safety", "stiffness bound used by eps0=auto"},
    {"--gamma", "method.gamma", "measurement noise level in the likelihood"},
    {"--anneal", "method.anneal", "likelihood annealing factor c"},
    {"--alpha", "method.alpha", "rotation-consistency weight in [-1, 1]"},
    {"--rotation", "method.rotation", "fixed | cycle | random"},
    {"--rotation-index", "method.rotation_index", "rotation for the fixed policy"},
    {"--rotation-seed", "method.rotation_seed", "seed of the random rotation policy"},
    {"--init", "method.init", "zeros | adjoint | random"},
    {"--seed", "method.seed", "sampler seed"},
    {"--tv-lambda", "tv.lambda", "TV fidelity weight (larger is weaker smoothing)"},
    {"--tv-tol", "tv.tol", "TV dual tolerance"},
    {"--tv-max-iter", "tv.max_iter", "TV iteration cap"},
    {"--prior", "prior.kind", "gmrf | gaussian"},
    {"--beta", "prior.beta", "GMRF smoothness weight"},
    {"--tau", "prior.tau", "GMRF ridge"},
    {"--prior-mean", "prior.mean", "Gaussian prior mean"},
    {"--prior-variance", "prior.variance", "Gaussian prior variance"},
};

class Command {
public:
    Command(CLI::App& parent, const char* name, const char* description) : app_(parent.add_subcommand(name, description)) {
        app_->add_option("--config", config_path_, "key = value settings file");
    }

    void add(const std::vector<Flag>& flags) {
        for (const auto& f : flags) add(f);
    }

    void add(const Flag& f) {
        values_.push_back(std::make_unique<std::string>());
        options_.push_back({app_->add_option(f.name, *values_.back(), f.help), f.key, values_.back().get()});
    }

    CLI::App* app() const { return app_; }

    // Config file first, then flags on top.
    Settings settings() const {
        Settings s;
        if (!config_path_.empty()) s = load_settings(config_path_);
        for (const auto& o : options_)
            if (o.option->count() > 0) s[o.key] = *o.value;
        return s;
    }

private:
    struct Bound {
        CLI::Option* option;
        std::string key;
        std::string* value;
    };

    CLI::App* app_;
    std::string config_path_;
    std::vector<std::unique_ptr<std::string>> values_;
    std::vector<Bound> options_;
};

fs::path require_path(const Reader& r, const std::string& key, const char* flag) {
    const auto p = r.str(key, "");
    if (p.empty()) throw ConfigError(std::string(flag) + " is required");
    return p;
}

fs::path require_existing(const Reader& r, const std::string& key, const char* flag) {
    auto p = require_path(r, key, flag);
    if (!fs::exists(p)) throw ConfigError(std::string(flag) + ": file not found: " + p.string());
    return p;
}

ModelMatrix build_matrix(const RunConfig& c) {
    return build_model_matrix(c.geometry, c.grid_side, c.pixel_size, c.adjoint_scale);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw PersistenceError("cannot open for writing", path.string());
    out << text;
    if (!out) throw PersistenceError("write failed", path.string());
}

std::string fmt_real(double v) { return format_real(v); }

std::string fmt_short(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// Lines of a manifest, resolved against its directory.
std::vector<std::vector<std::string>> read_manifest(const fs::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw PersistenceError("cannot open manifest", manifest.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        std::stringstream ss(line);
        std::vector<std::string> fields;
        std::string f;
        while (ss >> f) fields.push_back(f);
        rows.push_back(std::move(fields));
    }
    return rows;
}

fs::path resolve(const fs::path& base_file, const std::string& entry) {
    const fs::path p(entry);
    return p.is_absolute() ? p : base_file.parent_path() / p;
}

// --- phantom ---------------------------------------------------------------------------

int cmd_phantom(const Command& cmd, bool centered, std::ostream& out) {
    const Settings s = cmd.settings();
    const Reader r(s);
    PhantomSpec spec;
    spec.kind = with_key("phantom.kind", [&] { return parse_phantom_kind(r.str("phantom.kind", "disks")); });
    spec.side = r.count("phantom.side", 64);
    spec.pixel_size = r.real("grid.pixel_size", 0.1);
    spec.margin = r.real("phantom.margin", spec.margin);
    spec.seed.value = r.count("phantom.seed", 0);
    spec.count = r.count("phantom.count", spec.count);
    spec.radius_min = r.real("phantom.radius_min", spec.radius_min);
    spec.radius_max = r.real("phantom.radius_max", spec.radius_max);
    spec.thickness = r.real("phantom.thickness", spec.thickness);
    spec.centered = centered || r.str("phantom.centered", "false") == "true";
    spec.validate();

    if (r.has("phantom.n")) {
        const auto dir = require_path(r, "paths.out_dir", "--out-dir");
        const auto entries = make_dataset(spec, r.count("phantom.n", 0), dir);
        out << "wrote " << entries.size() << " phantoms to " << dir.string() << "\n";
        return 0;
    }
    const auto path = require_path(r, "paths.output", "--out");
    save_container(path, make_phantom(spec));
    out << "wrote " << path.string() << "\n";
    return 0;
}

// --- simulate -----------------------------------------------------------------------------

int cmd_simulate(const Command& cmd, std::ostream& out) {
    const Settings s = cmd.settings();
    const Reader r(s);
    const RunConfig c = make_run_config(s);
    const auto input = require_existing(r, "paths.input", "--input");
    const auto output = require_path(r, "paths.output", "--out");
    const fs::path mask_out = r.str("paths.mask_out", output.string() + ".mask.txt");

    const ImageGrid x = load_image(input, c.pixel_size);
    if (x.side() != c.grid_side)
        throw ConfigError("grid.side is " + std::to_string(c.grid_side) + " but the phantom side is " +
                          std::to_string(x.side()));
    const ModelMatrix a = build_matrix(c);
    const ChannelMask mask = c.make_channel_mask();
    save_container(output, simulate_measurement(a, x, mask, c.noise_std, c.noise_seed));
    save_mask(mask, mask_out);
    out << "wrote " << output.string() << " and " << mask_out.string() << "\n";
    return 0;
}

// --- reconstruct ---------------------------------------------------------------------------

int cmd_reconstruct(const Command& cmd, std::ostream& out) {
    const Settings s = cmd.settings();
    const Reader r(s);
    const RunConfig c = make_run_config(s);
    const auto input = require_existing(r, "paths.input", "--input");
    const auto output = require_path(r, "paths.output", "--out");
    std::optional<fs::path> mask_path, truth_path;
    if (r.has("paths.mask")) mask_path = require_existing(r, "paths.mask", "--mask");
    if (r.has("paths.ground_truth")) truth_path = require_existing(r, "paths.ground_truth", "--ground-truth");

    const SensorData y = load_sensor(input);
    const ModelMatrix a = build_matrix(c);
    if (y.n_ch() != a.geometry().n_ch || y.n_t() != a.geometry().n_t)
        throw ConfigError("sensor file is " + std::to_string(y.n_ch()) + "x" + std::to_string(y.n_t()) +
                          " but the geometry expects " + std::to_string(a.geometry().n_ch) + "x" +
                          std::to_string(a.geometry().n_t));
    const ChannelMask mask = mask_path ? load_mask(*mask_path) : c.make_channel_mask();
    std::optional<ImageGrid> truth;
    if (truth_path) truth = load_image(*truth_path, c.pixel_size);

    TraceRecord trace;
    const ImageGrid image = reconstruct(c, a, mask, y, truth ? &*truth : nullptr, &trace);
    save_container(output, image);
    if (r.has("paths.pgm")) export_pgm(image, r.str("paths.pgm", ""));
    if (c.method == "langevin" || c.method == "rcc")
        write_trace_csv(trace, r.str("paths.trace", output.string() + ".trace.csv"));
    out << "wrote " << output.string() << "\n";
    return 0;
}

// --- eval ------------------------------------------------------------------------------------

int cmd_eval(const Command& cmd, std::ostream& out, std::ostream& err) {
    const Settings s = cmd.settings();
    const Reader r(s);
    const auto manifest = require_existing(r, "paths.manifest", "--manifest");
    const auto output = require_path(r, "paths.output", "--out");
    const std::string label = r.str("eval.method", "");
    const std::string channels = r.str("mask.n_keep", "");
    const std::string pattern = r.str("mask.pattern", "");
    const std::optional<double> peak = r.has("eval.peak") ? std::optional(r.real("eval.peak", 1.0)) : std::nullopt;

    const auto rows = read_manifest(manifest);
    std::vector<std::string> missing;
    for (const auto& row : rows) {
        if (row.size() < 2) throw ConfigError("manifest lines need '<reconstruction> <ground truth>'");
        for (std::size_t k = 0; k < 2; ++k)
            if (!fs::exists(resolve(manifest, row[k]))) missing.push_back(resolve(manifest, row[k]).string());
    }
    if (!missing.empty()) {
        err << "missing files:\n";
        for (const auto& m : missing) err << "  " << m << "\n";
        return 1;
    }

    std::string csv = "sample_id,method,channels,pattern,psnr,ssim\n";
    std::vector<double> psnrs, ssims;
    for (const auto& row : rows) {
        const ImageGrid recon = load_image(resolve(manifest, row[0]));
        const ImageGrid truth = load_image(resolve(manifest, row[1]));
        double range = peak.value_or(data_range_of(truth));
        if (!(range > 0.0)) range = 1.0;
        const double p = psnr(truth, recon, range);
        SsimParams params;
        params.data_range = range;
        const double q = ssim(truth, recon, params);
        psnrs.push_back(p);
        ssims.push_back(q);
        csv += fs::path(row[0]).stem().string() + "," + label + "," + channels + "," + pattern + "," +
               format_psnr(p) + "," + fmt_real(q) + "\n";
    }
    if (!rows.empty()) {
        const auto summary = [](const std::vector<double>& v) {
            const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
            if (std::isinf(mean)) return fmt_short(mean);
            double var = 0.0;
            for (double e : v) var += (e - mean) * (e - mean);
            const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
            return fmt_short(mean) + "±" + fmt_short(sd);
        };
        csv += "mean±std," + label + "," + channels + "," + pattern + "," + summary(psnrs) + "," + summary(ssims) + "\n";
    }
    write_text(output, csv);
    out << "evaluated " << rows.size() << " pairs\n";
    return 0;
}

// --- sweep -------------------------------------------------------------------------------------

struct Trial {
    double alpha, eps0, gamma, c;
    std::size_t steps;
};

int cmd_sweep(const Command& cmd, std::ostream& out) {
    const Settings s = cmd.settings();
    const Reader r(s);
    RunConfig base = make_run_config(s);
    const auto manifest = require_existing(r, "paths.manifest", "--manifest");
    const auto output = require_path(r, "paths.output", "--out");
    const ModelMatrix a = build_matrix(base);
    const ChannelMask mask = base.make_channel_mask();
    resolve_step(base, a, mask);

    const auto alphas = r.reals("sweep.alpha", base.recon.alpha);
    const auto eps0s = r.reals("sweep.eps0", base.recon.eps0);
    const auto gammas = r.reals("sweep.gamma", base.recon.gamma);
    const auto cs = r.reals("sweep.anneal", base.recon.guidance_anneal);
    const auto steps = r.reals("sweep.steps", static_cast<double>(base.recon.steps_per_scale));
    const std::string search = r.str("sweep.search", "grid");
    if (search != "grid" && search != "random") throw ConfigError("sweep.search must be grid or random");
    if (alphas.empty() || eps0s.empty() || gammas.empty() || cs.empty() || steps.empty())
        throw ConfigError("sweep parameter space is empty");
    for (double t : steps)
        if (t < 1.0 || t != std::floor(t)) throw ConfigError("sweep.steps entries must be positive integers");

    std::vector<Trial> trials;
    if (search == "grid") {
        for (double a : alphas)
            for (double e : eps0s)
                for (double g : gammas)
                    for (double c : cs)
                        for (double t : steps) trials.push_back({a, e, g, c, static_cast<std::size_t>(t)});
    } else {
        const std::size_t n = r.count("sweep.trials", 0);
        if (n == 0) throw ConfigError("sweep.trials must be positive for random search");
        Rng rng(RngSeed{r.count("sweep.seed", 0)});
        const auto pick = [&](const std::vector<double>& v) {
            const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            return *lo + (*hi - *lo) * rng.uniform();
        };
        for (std::size_t i = 0; i < n; ++i) {
            Trial t{pick(alphas), pick(eps0s), pick(gammas), pick(cs), 0};
            const auto [lo, hi] = std::minmax_element(steps.begin(), steps.end());
            t.steps = static_cast<std::size_t>(*lo) + rng.below(static_cast<std::uint64_t>(*hi - *lo) + 1);
            trials.push_back(t);
        }
    }
    for (const auto& t : trials) {
        ReconConfig rc = base.recon;
        rc.alpha = t.alpha;
        rc.eps0 = t.eps0;
        rc.gamma = t.gamma;
        rc.guidance_anneal = t.c;
        rc.steps_per_scale = t.steps;
        with_key("sweep", [&] {
            rc.validate();
            return 0;
        });
    }

    std::vector<ImageGrid> truths;
    for (const auto& row : read_manifest(manifest)) truths.push_back(load_image(resolve(manifest, row.at(0)), base.pixel_size));
    if (truths.empty()) throw ConfigError("sweep manifest lists no phantoms");
    for (const auto& t : truths)
        if (t.side() != base.grid_side) throw ConfigError("sweep phantom side does not match grid.side");

    const auto prior = base.make_prior();
    std::vector<SensorData> data;
    for (std::size_t j = 0; j < truths.size(); ++j)
        data.push_back(simulate_measurement(a, truths[j], mask, base.noise_std, RngSeed{base.noise_seed.value + j}));

    std::string csv = "trial,alpha,eps0,gamma,c,steps,mean_psnr\n";
    std::size_t best = 0;
    double best_psnr = -std::numeric_limits<double>::infinity();
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& t = trials[i];
        double total = 0.0;
        for (std::size_t j = 0; j < truths.size(); ++j) {
            ReconConfig rc = base.recon;
            rc.alpha = t.alpha;
            rc.eps0 = t.eps0;
            rc.gamma = t.gamma;
            rc.guidance_anneal = t.c;
            rc.steps_per_scale = t.steps;
            rc.seed.value = base.recon.seed.value + j;
            rc.rotation_seed = derive_seed(rc.seed, 1);
            const auto result = run_rcc_sgm(a, mask, data[j], *prior, rc);
            double range = data_range_of(truths[j]);
            if (!(range > 0.0)) range = 1.0;
            total += psnr(truths[j], result.image, range);
        }
        const double mean = total / static_cast<double>(truths.size());
        rows.push_back(fmt_real(t.alpha) + "," + fmt_real(t.eps0) + "," + fmt_real(t.gamma) + "," + fmt_real(t.c) + "," +
                       std::to_string(t.steps) + "," + format_psnr(mean));
        csv += std::to_string(i) + "," + rows.back() + "\n";
        if (mean > best_psnr) {
            best_psnr = mean;
            best = i;
        }
    }
    csv += "best," + rows[best] + "\n";
    write_text(output, csv);
    out << "best trial " << best << " mean PSNR " << fmt_short(best_psnr) << "\n";
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Photoacoustic reconstruction with rotation-consistency constrained Langevin sampling", "patrec"};
    app.require_subcommand(1);

    Command phantom(app, "phantom", "generate a phantom image or dataset");
    phantom.add({{"--kind", "phantom.kind", "disks | rings | vessels"},
                 {"--side", "phantom.side", "image side in pixels"},
                 {"--pixel-size", "grid.pixel_size", "pixel size in mm"},
                 {"--seed", "phantom.seed", "generator seed"},
                 {"--count", "phantom.count", "number of disks, rings or vessels"},
                 {"--margin", "phantom.margin", "empty border fraction"},
                 {"--radius-min", "phantom.radius_min", "smallest radius (fraction of side)"},
                 {"--radius-max", "phantom.radius_max", "largest radius (fraction of side)"},
                 {"--thickness", "phantom.thickness", "ring wall / vessel radius (fraction of side)"},
                 {"--n", "phantom.n", "dataset size"},
                 {"--out", "paths.output", "output PATB file"},
                 {"--out-dir", "paths.out_dir", "dataset directory"}});
    bool centered = false;
    phantom.app()->add_flag("--centered", centered, "single ring centred on the grid");

    Command simulate(app, "simulate", "simulate masked sensor data from a phantom");
    simulate.add(kProblemFlags);
    simulate.add({{"--input", "paths.input", "phantom PATB file"},
                  {"--out", "paths.output", "sensor PATB file"},
                  {"--mask-out", "paths.mask_out", "mask text file (default <out>.mask.txt)"}});

    Command recon(app, "reconstruct", "reconstruct an image from sensor data");
    recon.add(kProblemFlags);
    recon.add(kMethodFlags);
    recon.add({{"--input", "paths.input", "sensor PATB file"},
               {"--mask", "paths.mask", "mask text file (default: from mask settings)"},
               {"--out", "paths.output", "output PATB image"},
               {"--pgm", "paths.pgm", "optional PGM preview"},
               {"--trace", "paths.trace", "trace CSV (default <out>.trace.csv)"},
               {"--ground-truth", "paths.ground_truth", "ground truth for per-scale PSNR"}});

    Command eval(app, "eval", "PSNR/SSIM of reconstructions against ground truth");
    eval.add({{"--manifest", "paths.manifest", "lines of '<reconstruction> <ground truth>'"},
              {"--out", "paths.output", "metrics CSV"},
              {"--method", "eval.method", "method label for the CSV"},
              {"--channels", "mask.n_keep", "channel count label"},
              {"--pattern", "mask.pattern", "pattern label"},
              {"--peak", "eval.peak", "PSNR peak / SSIM range (default: ground-truth range)"}});

    Command sweep(app, "sweep", "grid or random search over sampler hyperparameters");
    sweep.add(kProblemFlags);
    sweep.add(kMethodFlags);
    sweep.add({{"--manifest", "paths.manifest", "phantom manifest"},
               {"--out", "paths.output", "sweep CSV"},
               {"--alpha-grid", "sweep.alpha", "comma-separated alpha values"},
               {"--eps0-grid", "sweep.eps0", "comma-separated eps0 values"},
               {"--gamma-grid", "sweep.gamma", "comma-separated gamma values"},
               {"--anneal-grid", "sweep.anneal", "comma-separated c values"},
               {"--steps-grid", "sweep.steps", "comma-separated T values"},
               {"--search", "sweep.search", "grid | random"},
               {"--trials", "sweep.trials", "random search trials"},
               {"--sweep-seed", "sweep.seed", "random search seed"}});

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (phantom.app()->parsed()) return cmd_phantom(phantom, centered, out);
        if (simulate.app()->parsed()) return cmd_simulate(simulate, out);
        if (recon.app()->parsed()) return cmd_reconstruct(recon, out);
        if (eval.app()->parsed()) return cmd_eval(eval, out, err);
        if (sweep.app()->parsed()) return cmd_sweep(sweep, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace pat::cli
