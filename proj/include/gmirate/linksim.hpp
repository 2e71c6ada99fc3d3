#ifndef GMIRATE_LINKSIM_HPP
#define GMIRATE_LINKSIM_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "gmirate/estimators.hpp"

namespace gmirate {

// Random-coding experiment: fresh Gaussian codebook per trial, channel
// pass, front end, nearest-neighbor decoding with scaling a.
//
// Codebooks with at most kExplicitCodebookCap messages are decoded by
// exhaustive metric search. Larger codebooks (the rate/blocklength corner
// needed to show the achievability threshold) are decoded by sampling the
// error event from its exact conditional law: given the processed outputs,
// the competing metrics are i.i.d. scaled noncentral chi-squares, so the
// trial error indicator is Bernoulli(1 - (1 - p)^(M-1)).
inline constexpr std::uint64_t kExplicitCodebookCap = 65536;

struct TrialPlan {
    int n = 0;                    // block length in symbols
    double rate_nats = 0.0;
    std::uint64_t messages = 0;   // ceil(exp(n * rate))
    int trials = 0;
    std::uint64_t master_seed = 0;
    FrontEnd front_end = FrontEnd::identity();
    double scaling = 1.0;         // decoder parameter a
    ChannelModel channel = ChannelModel::awgn(1.0);
    InputSpec input{1.0};
};

// Validates and fills in the message count.
TrialPlan make_trial_plan(int n, double rate_nats, int trials, std::uint64_t master_seed,
                          FrontEnd front_end, double scaling,
                          const ChannelModel& channel, const InputSpec& input);

struct ErrorRateEstimate {
    std::uint64_t errors = 0;
    std::uint64_t trials = 0;
    double point_estimate = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;

    bool operator==(const ErrorRateEstimate&) const = default;
};

// 95% score interval; well behaved at 0 and 1.
void wilson_interval(std::uint64_t errors, std::uint64_t trials, double& lo, double& hi);

// M x n codeword matrix (row-major), i.i.d. N(0, energy), a deterministic
// function of the seed.
std::vector<double> generate_codebook(std::uint64_t messages, int n, double energy,
                                      std::uint64_t seed);

// Index of the codeword minimizing (1/n) sum (v_k - a x_k)^2; ties break to
// the lowest index. nn_decode runs the metric search under OpenMP,
// nn_decode_ref is the serial reference; both return identical indices.
std::size_t nn_decode(std::span<const double> processed, std::span<const double> codebook,
                      int n, double a);
std::size_t nn_decode_ref(std::span<const double> processed, std::span<const double> codebook,
                          int n, double a);

// Runs the experiment. Trials are independent OpenMP tasks, each owning the
// substream derived from (master_seed, trial index); the estimate is
// bitwise identical for any thread count. run_trials_ref is the serial
// reference implementation.
ErrorRateEstimate run_trials(const TrialPlan& plan);
ErrorRateEstimate run_trials_ref(const TrialPlan& plan);

struct SweepRow {
    double rate_nats = 0.0;
    int n = 0;
    std::uint64_t messages = 0;
    ErrorRateEstimate estimate;
    double gmi_ref_nats = 0.0;
};

// One estimate per (rate, n) cell, rates outer, in deterministic grid order.
std::vector<SweepRow> threshold_sweep(const ChannelModel& channel, const InputSpec& input,
                                      std::span<const double> rate_grid,
                                      std::span<const int> n_grid,
                                      const FrontEnd& front_end, double scaling,
                                      int trials, std::uint64_t master_seed,
                                      const QuadratureOptions& opts = {});

}  // namespace gmirate

#endif
