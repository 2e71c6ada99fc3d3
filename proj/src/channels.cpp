#include "gmirate/channels.hpp"

#include <algorithm>
#include <cmath>

#include "gmirate/common.hpp"
#include "gmirate/quadrature.hpp"

namespace gmirate {

InputSpec::InputSpec(double e) : energy(e) {
    require(std::isfinite(e) && e > 0.0, "InputSpec: energy must be finite and positive");
}

double Shape::operator()(double x) const {
    switch (id) {
        case ShapeId::identity:
            return x;
        case ShapeId::cube:
            return x * x * x;
        case ShapeId::abs_value:
            return std::fabs(x);
        case ShapeId::hard_clip:
            return std::clamp(x, -limit, limit);
        case ShapeId::cubic_limiter:
            // x - x^3/(3 A^2) inside +-A, saturating at +-2A/3; C1 and monotone.
            if (x >= limit) return 2.0 * limit / 3.0;
            if (x <= -limit) return -2.0 * limit / 3.0;
            return x - x * x * x / (3.0 * limit * limit);
    }
    return x;
}

std::vector<double> Shape::breakpoints() const {
    switch (id) {
        case ShapeId::identity:
        case ShapeId::cube:
            return {};
        case ShapeId::abs_value:
            return {0.0};
        case ShapeId::hard_clip:
        case ShapeId::cubic_limiter:
            return {-limit, limit};
    }
    return {};
}

bool Shape::saturates() const {
    return id == ShapeId::hard_clip || id == ShapeId::cubic_limiter;
}

double Shape::saturation_value() const {
    return id == ShapeId::cubic_limiter ? 2.0 * limit / 3.0 : limit;
}

bool Shape::strictly_monotone() const {
    return id == ShapeId::identity || id == ShapeId::cube;
}

bool Shape::even_symmetric() const { return id == ShapeId::abs_value; }

namespace {

void check_noise(double noise_var) {
    require(std::isfinite(noise_var) && noise_var >= 0.0,
            "ChannelModel: noise_var must be finite and nonnegative");
}

}  // namespace

ChannelModel ChannelModel::awgn(double noise_var) {
    check_noise(noise_var);
    ChannelModel ch;
    ch.kind = ChannelKind::awgn;
    ch.shape = Shape{ShapeId::identity, 0.0};
    ch.noise_var = noise_var;
    return ch;
}

ChannelModel ChannelModel::hard_clip(double clip_level, double noise_var) {
    check_noise(noise_var);
    require(std::isfinite(clip_level) && clip_level > 0.0,
            "ChannelModel: clip_level must be positive");
    ChannelModel ch;
    ch.kind = ChannelKind::hard_clip;
    ch.shape = Shape{ShapeId::hard_clip, clip_level};
    ch.noise_var = noise_var;
    return ch;
}

ChannelModel ChannelModel::sign_quantizer(double noise_var) {
    check_noise(noise_var);
    ChannelModel ch;
    ch.kind = ChannelKind::sign_quantizer;
    ch.noise_var = noise_var;
    return ch;
}

ChannelModel ChannelModel::uniform_quantizer(int bits, double step, double noise_var) {
    check_noise(noise_var);
    require(bits >= 1 && bits <= 16, "ChannelModel: bits must be in [1, 16]");
    require(std::isfinite(step) && step > 0.0, "ChannelModel: step must be positive");
    ChannelModel ch;
    ch.kind = ChannelKind::uniform_quantizer;
    ch.bits = bits;
    ch.step = step;
    ch.noise_var = noise_var;
    return ch;
}

ChannelModel ChannelModel::nonlinearity(ShapeId id, double noise_var, double limit) {
    check_noise(noise_var);
    if (id == ShapeId::hard_clip || id == ShapeId::cubic_limiter) {
        require(std::isfinite(limit) && limit > 0.0,
                "ChannelModel: shape limit must be positive");
    }
    ChannelModel ch;
    ch.kind = ChannelKind::nonlinearity;
    ch.shape = Shape{id, limit};
    ch.noise_var = noise_var;
    return ch;
}

bool ChannelModel::finite_output() const {
    return kind == ChannelKind::sign_quantizer || kind == ChannelKind::uniform_quantizer;
}

std::vector<double> ChannelModel::output_levels() const {
    require(finite_output(), "output_levels: channel has continuous output");
    if (kind == ChannelKind::sign_quantizer) return {-1.0, 1.0};
    // Symmetric mid-rise: cells (k step, (k+1) step) reconstruct to the
    // midpoint; the unbounded outer cells to +-(2^(bits-1) - 1/2) step.
    const int half = 1 << (bits - 1);
    std::vector<double> levels;
    levels.reserve(2 * half);
    for (int k = -half; k < half; ++k) levels.push_back((k + 0.5) * step);
    return levels;
}

std::vector<double> ChannelModel::cell_edges() const {
    require(finite_output(), "cell_edges: channel has continuous output");
    const double inf = infinity();
    if (kind == ChannelKind::sign_quantizer) return {-inf, 0.0, inf};
    const int half = 1 << (bits - 1);
    std::vector<double> edges;
    edges.reserve(2 * half + 1);
    edges.push_back(-inf);
    for (int k = -half + 1; k <= half - 1; ++k) edges.push_back(k * step);
    edges.push_back(inf);
    return edges;
}

namespace {

double quantize(const ChannelModel& ch, double w) {
    if (ch.kind == ChannelKind::sign_quantizer) return w >= 0.0 ? 1.0 : -1.0;
    const int half = 1 << (ch.bits - 1);
    double k = std::floor(w / ch.step);
    k = std::clamp(k, static_cast<double>(-half), static_cast<double>(half - 1));
    return (k + 0.5) * ch.step;
}

}  // namespace

double sample_output(const ChannelModel& ch, double x, RandomStream& rng) {
    const double sd = std::sqrt(ch.noise_var);
    if (ch.finite_output()) {
        const double w = ch.noise_var > 0.0 ? x + sd * rng.gaussian() : x;
        return quantize(ch, w);
    }
    const double h = ch.shape(x);
    return ch.noise_var > 0.0 ? h + sd * rng.gaussian() : h;
}

double likelihood(const ChannelModel& ch, double y, double x) {
    if (ch.finite_output()) {
        const auto levels = ch.output_levels();
        const auto edges = ch.cell_edges();
        auto it = std::lower_bound(levels.begin(), levels.end(), y);
        if (it == levels.end() || *it != y) {
            throw model_error("likelihood: y is not an output level of this channel");
        }
        const std::size_t i = static_cast<std::size_t>(it - levels.begin());
        if (ch.noise_var > 0.0) {
            const double sd = std::sqrt(ch.noise_var);
            const double lo = (edges[i] - x) / sd;
            const double hi = (edges[i + 1] - x) / sd;
            // Difference of the two tail CDFs, taken on the side that
            // avoids cancellation.
            if (lo >= 0.0) return normal_sf(lo) - normal_sf(hi);
            if (hi <= 0.0) return normal_cdf(hi) - normal_cdf(lo);
            return normal_cdf(hi) - normal_cdf(lo);
        }
        // Noiseless quantizer: unit mass on the cell containing x. Cells are
        // half-open [lo, hi) to match the sampler's sign(0) = +1 convention.
        return (x >= edges[i] && x < edges[i + 1]) ? 1.0 : 0.0;
    }
    require(ch.noise_var > 0.0,
            "likelihood: continuous channel with zero noise has no density");
    const double sd = std::sqrt(ch.noise_var);
    const double d = (y - ch.shape(x)) / sd;
    return 0.3989422804014326779 * std::exp(-0.5 * d * d) / sd;
}

ProcessSpec::ProcessSpec(double ar, std::size_t len, double e)
    : ar_coefficient(ar), length(len), energy(e) {
    require(std::isfinite(ar) && ar > -1.0 && ar < 1.0,
            "ProcessSpec: ar_coefficient must lie in (-1, 1)");
    require(len > 0, "ProcessSpec: length must be positive");
    require(std::isfinite(e) && e > 0.0, "ProcessSpec: energy must be positive");
}

void sample_ar1(const ProcessSpec& spec, RandomStream& rng, std::vector<double>& out) {
    out.resize(spec.length);
    const double rho = spec.ar_coefficient;
    const double innov_sd = std::sqrt(spec.energy * (1.0 - rho * rho));
    double x = std::sqrt(spec.energy) * rng.gaussian();
    out[0] = x;
    for (std::size_t k = 1; k < spec.length; ++k) {
        x = rho * x + innov_sd * rng.gaussian();
        out[k] = x;
    }
}

void lag_products_ref(std::span<const double> x, std::span<const double> y,
                      std::size_t tau_max, std::span<double> out) {
    const std::size_t n = x.size();
    for (std::size_t tau = 0; tau <= tau_max; ++tau) {
        double acc = 0.0;
        for (std::size_t k = 0; k + tau < n; ++k) acc += x[k] * y[k + tau];
        out[tau] = acc;
    }
}

void lag_products(std::span<const double> x, std::span<const double> y,
                  std::size_t tau_max, std::span<double> out) {
    const std::size_t n = x.size();
    const std::ptrdiff_t lags = static_cast<std::ptrdiff_t>(tau_max) + 1;
    // Each lag accumulates in strict index order, so the result is
    // bitwise-identical to the serial kernel for any thread count.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < lags; ++t) {
        const std::size_t tau = static_cast<std::size_t>(t);
        double acc = 0.0;
        for (std::size_t k = 0; k + tau < n; ++k) acc += x[k] * y[k + tau];
        out[tau] = acc;
    }
}

StationarityReport bussgang_stationarity_check(const ChannelModel& nonlinearity,
                                               const ProcessSpec& process,
                                               std::size_t tau_max,
                                               RandomStream& rng) {
    require(nonlinearity.noise_var == 0.0,
            "bussgang_stationarity_check: channel must be noiseless");
    require(tau_max > 0 && tau_max < process.length / 10,
            "bussgang_stationarity_check: tau_max must be below length/10");

    std::vector<double> x;
    sample_ar1(process, rng, x);
    std::vector<double> y(x.size());
    RandomStream unused(0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(x.size()); ++k) {
        y[static_cast<std::size_t>(k)] =
            nonlinearity.finite_output()
                ? sample_output(nonlinearity, x[static_cast<std::size_t>(k)], unused)
                : nonlinearity.shape(x[static_cast<std::size_t>(k)]);
    }

    // Batch means over disjoint segments: per-segment correlation estimates
    // give both the pooled estimate and its Monte Carlo standard error.
    const std::size_t batches = 64;
    const std::size_t seg = x.size() / batches;
    require(seg > 4 * tau_max, "bussgang_stationarity_check: process too short for batching");
    const std::size_t lags = tau_max + 1;

    std::vector<double> rxx(batches * lags), rxy(batches * lags);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(batches); ++bi) {
        const std::size_t b = static_cast<std::size_t>(bi);
        std::span<const double> xs(x.data() + b * seg, seg);
        std::span<const double> ys(y.data() + b * seg, seg);
        std::vector<double> px(lags), py(lags);
        lag_products_ref(xs, xs, tau_max, px);
        lag_products_ref(xs, ys, tau_max, py);
        for (std::size_t t = 0; t < lags; ++t) {
            rxx[b * lags + t] = px[t] / static_cast<double>(seg - t);
            rxy[b * lags + t] = py[t] / static_cast<double>(seg - t);
        }
    }

    std::vector<double> mxx(lags, 0.0), mxy(lags, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t t = 0; t < lags; ++t) {
            mxx[t] += rxx[b * lags + t];
            mxy[t] += rxy[b * lags + t];
        }
    }
    for (std::size_t t = 0; t < lags; ++t) {
        mxx[t] /= static_cast<double>(batches);
        mxy[t] /= static_cast<double>(batches);
    }

    const double gain = mxy[0] / mxx[0];
    StationarityReport rep;
    rep.deviation.resize(lags);
    rep.stderr_.resize(lags);
    for (std::size_t t = 0; t < lags; ++t) {
        rep.deviation[t] = mxy[t] - gain * mxx[t];
        double ss = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            const double db = rxy[b * lags + t] - gain * rxx[b * lags + t];
            const double c = db - rep.deviation[t];
            ss += c * c;
        }
        rep.stderr_[t] = std::sqrt(ss / (static_cast<double>(batches) - 1.0) /
                                   static_cast<double>(batches));
        rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::fabs(rep.deviation[t]));
        if (t >= 1 && rep.stderr_[t] > 0.0) {
            rep.max_deviation_ratio =
                std::max(rep.max_deviation_ratio, std::fabs(rep.deviation[t]) / rep.stderr_[t]);
        }
    }
    return rep;
}

}  // namespace gmirate
