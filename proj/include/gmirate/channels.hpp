#ifndef GMIRATE_CHANNELS_HPP
#define GMIRATE_CHANNELS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "gmirate/random.hpp"

namespace gmirate {

// Symbol ensemble: zero-mean Gaussian with variance `energy`.
struct InputSpec {
    double energy = 1.0;

    explicit InputSpec(double e);
};

enum class ShapeId { identity, cube, abs_value, hard_clip, cubic_limiter };

// Memoryless deterministic nonlinearity y = h(x), piecewise smooth with
// known kink locations. `limit` applies to hard_clip / cubic_limiter.
struct Shape {
    ShapeId id = ShapeId::identity;
    double limit = 0.0;

    double operator()(double x) const;
    std::vector<double> breakpoints() const;
    // True when h is constant on (limit, inf) and (-inf, -limit).
    bool saturates() const;
    double saturation_value() const;  // h on the upper constant tail
    bool strictly_monotone() const;   // identity, cube
    bool even_symmetric() const;      // abs_value
};

enum class ChannelKind {
    awgn,               // y = x + z
    hard_clip,          // y = clip(x) + z
    sign_quantizer,     // y = sign(x + z)
    uniform_quantizer,  // y = Q(x + z), symmetric mid-rise
    nonlinearity        // y = h(x) + z
};

// Memoryless stochastic kernel p(y|x). Analog impairments add noise after
// the nonlinearity; quantizer kinds quantize after noise (ADC model).
// Values are immutable once constructed and safe to share across threads.
struct ChannelModel {
    ChannelKind kind = ChannelKind::awgn;
    Shape shape;             // h for analog kinds (identity for awgn)
    double noise_var = 0.0;
    int bits = 0;            // uniform_quantizer
    double step = 0.0;       // uniform_quantizer

    static ChannelModel awgn(double noise_var);
    static ChannelModel hard_clip(double clip_level, double noise_var);
    static ChannelModel sign_quantizer(double noise_var);
    static ChannelModel uniform_quantizer(int bits, double step, double noise_var);
    static ChannelModel nonlinearity(ShapeId id, double noise_var, double limit = 0.0);

    bool finite_output() const;
    // Reconstruction levels, strictly increasing (finite kinds only).
    std::vector<double> output_levels() const;
    // Cell edges in the pre-quantizer domain, size levels+1 with +-inf ends.
    std::vector<double> cell_edges() const;
};

// One draw of y given x.
double sample_output(const ChannelModel& ch, double x, RandomStream& rng);

// Density (continuous output) or probability mass (finite output) of y
// given x. Finite kinds require y to be one of the output levels.
double likelihood(const ChannelModel& ch, double y, double x);

// Stationary AR(1) Gaussian process, R_xx(tau) = energy * ar^|tau|.
struct ProcessSpec {
    double ar_coefficient = 0.0;
    std::size_t length = 0;
    double energy = 1.0;

    ProcessSpec(double ar, std::size_t len, double e);
};

void sample_ar1(const ProcessSpec& spec, RandomStream& rng, std::vector<double>& out);

// Check that the input/output cross-correlation of a memoryless
// nonlinearity driven by a stationary Gaussian process is a scaled copy of
// the input autocorrelation. Estimated by batch means over disjoint
// segments of one long realization.
struct StationarityReport {
    std::vector<double> deviation;  // per lag 0..tau_max
    std::vector<double> stderr_;    // batch-means standard error per lag
    double max_abs_deviation = 0.0;
    double max_deviation_ratio = 0.0;  // max over lags >= 1 of |dev|/stderr
};

StationarityReport bussgang_stationarity_check(const ChannelModel& nonlinearity,
                                               const ProcessSpec& process,
                                               std::size_t tau_max,
                                               RandomStream& rng);

// Lagged correlation sums: out[tau] = sum_k x[k] * y[k+tau], k + tau < n.
// Reference serial kernel and the OpenMP kernel used by the check; both
// produce bitwise-identical sums for any thread count.
void lag_products_ref(std::span<const double> x, std::span<const double> y,
                      std::size_t tau_max, std::span<double> out);
void lag_products(std::span<const double> x, std::span<const double> y,
                  std::size_t tau_max, std::span<double> out);

}  // namespace gmirate

#endif
