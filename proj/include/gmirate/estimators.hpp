#ifndef GMIRATE_ESTIMATORS_HPP
#define GMIRATE_ESTIMATORS_HPP

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "gmirate/channels.hpp"
#include "gmirate/quadrature.hpp"

namespace gmirate {

// Model-based first/second moments of (x, y) and the two estimation errors
// for a (channel, input) pair.
struct MomentReport {
    double energy = 0.0;
    double cross_moment = 0.0;     // E[x y]
    double output_power = 0.0;     // E[y^2]
    double lmmse = 0.0;            // error of the best linear estimator
    double mmse = 0.0;             // error of the conditional mean
    double cond_mean_power = 0.0;  // var E[x|y]
    double correlation_ratio = 0.0;
    double bussgang_coeff = 0.0;   // E[x y] / E_s
};

struct QuadratureOptions {
    int hermite_order = 129;  // base order for every Gaussian expectation
    int check_order = 257;    // refinement order for the convergence check (0 = off)
    double tolerance = 1e-8;  // allowed base/refined disagreement, vs max(E_s, |value|)
};

// Receiver-side scalar map applied to the channel output before decoding.
class FrontEnd {
public:
    enum class Kind { identity, scale, posterior_mean };

    static FrontEnd identity();
    static FrontEnd scale(double factor);
    // g(y) = E[x | y]. Finite channels get an exact cell table; continuous
    // channels a quadrature-backed evaluator (requires noise, except for
    // shapes whose conditional mean has a closed form).
    static FrontEnd posterior_mean(const ChannelModel& ch, const InputSpec& input,
                                   const QuadratureOptions& opts = {});

    Kind kind() const { return kind_; }
    double scale_factor() const { return scale_; }
    double apply(double y) const;

    // Finite-alphabet table (output level -> conditional mean); empty for
    // continuous channels. Levels whose cells carry no probability are
    // dropped and listed in dropped_levels.
    const std::vector<std::pair<double, double>>& table() const { return table_; }
    const std::vector<double>& dropped_levels() const { return dropped_; }

private:
    FrontEnd() = default;
    Kind kind_ = Kind::identity;
    double scale_ = 1.0;
    std::vector<std::pair<double, double>> table_;
    std::vector<double> dropped_;
    std::shared_ptr<const std::function<double(double)>> fn_;
};

// All MomentReport fields for (channel, E_s). Finite channels use exact
// phi/Phi cell sums; continuous channels tensor quadrature over (x, z) with
// a refinement disagreement check (numeric_error on failure).
MomentReport compute_moments(const ChannelModel& ch, const InputSpec& input,
                             const QuadratureOptions& opts = {});

// E[(y - (E[xy]/E_s) x) x]; zero by construction of the gain, returned for
// test assertion.
double bussgang_residual_check(const ChannelModel& ch, const InputSpec& input,
                               const QuadratureOptions& opts = {});

// E[x g(y)] and E[g(y)^2] for an arbitrary scalar front end.
struct FrontEndMoments {
    double cross = 0.0;
    double power = 0.0;
};

FrontEndMoments front_end_moments(const ChannelModel& ch, const InputSpec& input,
                                  const std::function<double(double)>& g,
                                  const QuadratureOptions& opts = {});
FrontEndMoments front_end_moments(const ChannelModel& ch, const InputSpec& input,
                                  const FrontEnd& fe, const QuadratureOptions& opts = {});

}  // namespace gmirate

#endif
