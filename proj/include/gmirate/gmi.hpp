#ifndef GMIRATE_GMI_HPP
#define GMIRATE_GMI_HPP

#include "gmirate/estimators.hpp"

namespace gmirate {

// Achievable-rate summary for one front end. A delta within 1e-12 of 1
// (noiseless invertible channel) reports an infinite rate with the
// degenerate flag instead of failing, so parameter sweeps never abort.
struct GmiReport {
    double delta = 0.0;
    double gmi_nats = 0.0;
    double gmi_bits = 0.0;
    double effective_snr = 0.0;
    double a_opt = 0.0;
    bool degenerate = false;
    bool clamped = false;  // delta was pulled back into [0, 1] from roundoff
};

// Rate fields from delta alone: gmi = -0.5 ln(1 - delta). Values in
// (1, 1 + 1e-9] clamp to 1; anything further out of [0, 1] is an error.
GmiReport gmi_from_delta(double delta);

// delta for the given front end from precomputed moments:
// identity / scale -> cross^2 / (E_s out_power); posterior mean -> Theta^2.
double delta_for_front_end(const MomentReport& m, FrontEnd::Kind kind);

double effective_snr_canonical(const MomentReport& m);  // (E_s - mmse) / mmse
double effective_snr_linear(const MomentReport& m);     // (E_s - lmmse) / lmmse

// a maximizing the rate for this front end: E[x g(y)] / E_s.
double optimal_scaling(const ChannelModel& ch, const InputSpec& input,
                       const FrontEnd& fe, const QuadratureOptions& opts = {});

// Per-symbol ingredients of the dual (large-deviations) rate expression.
// J(theta) = 0.5 ln(1 - 2 theta a^2 E_s) + theta d - theta s / (1 - 2 theta a^2 E_s)
// for theta < 0, with s = E[|g(y)|^2]/L and d = E[|g(y) - a x|^2]/L.
struct ThetaObjective {
    double energy = 0.0;         // E_s
    double a = 0.0;              // decoder scaling
    double second_moment_g = 0.0;
    double distortion = 0.0;

    double evaluate(double theta) const;
};

ThetaObjective make_theta_objective(const ChannelModel& ch, const InputSpec& input,
                                    const FrontEnd& fe, double a,
                                    const QuadratureOptions& opts = {});

// sup over theta < 0 of J(theta), located by bracket expansion plus
// golden-section refinement to 1e-12 in theta.
double gmi_via_theta_sup(const ThetaObjective& obj);

// Exact I(x; y) in nats for finite-output channels.
double mutual_information_finite(const ChannelModel& ch, const InputSpec& input,
                                 const QuadratureOptions& opts = {});

// One row of the analyze surface: moments plus both rate reports.
struct AnalyzeRow {
    double energy = 0.0;
    double noise_var = 0.0;
    MomentReport moments;
    GmiReport linear;     // identity / scale front end
    GmiReport canonical;  // posterior-mean front end
};

AnalyzeRow analyze_channel(const ChannelModel& ch, const InputSpec& input,
                           const QuadratureOptions& opts = {});

}  // namespace gmirate

#endif
