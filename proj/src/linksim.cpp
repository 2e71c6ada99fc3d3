#include "gmirate/linksim.hpp"

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <cmath>

#include "gmirate/common.hpp"
#include "gmirate/gmi.hpp"
#include "gmirate/random.hpp"

namespace gmirate {

TrialPlan make_trial_plan(int n, double rate_nats, int trials, std::uint64_t master_seed,
                          FrontEnd front_end, double scaling,
                          const ChannelModel& channel, const InputSpec& input) {
    require(n >= 1, "TrialPlan: block length must be positive");
    require(std::isfinite(rate_nats) && rate_nats > 0.0, "TrialPlan: rate must be positive");
    require(trials >= 1, "TrialPlan: trials must be positive");
    // Keep the message count representable; exp(42.8) < 2^63.
    require(n * rate_nats <= 42.8, "TrialPlan: n * rate too large for the message counter");

    TrialPlan plan;
    plan.n = n;
    plan.rate_nats = rate_nats;
    plan.messages = static_cast<std::uint64_t>(std::ceil(std::exp(n * rate_nats)));
    require(plan.messages >= 2, "TrialPlan: need at least two messages");
    plan.trials = trials;
    plan.master_seed = master_seed;
    plan.front_end = std::move(front_end);
    plan.scaling = scaling;
    plan.channel = channel;
    plan.input = input;
    if (plan.messages > kExplicitCodebookCap) {
        require(scaling != 0.0, "TrialPlan: sampled decoding requires nonzero scaling");
    }
    return plan;
}

void wilson_interval(std::uint64_t errors, std::uint64_t trials, double& lo, double& hi) {
    require(trials >= 1, "wilson_interval: trials must be positive");
    const double z = 1.959963984540054;  // 97.5% normal quantile
    const double nn = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / nn;
    const double z2n = z * z / nn;
    const double denom = 1.0 + z2n;
    const double center = (p + 0.5 * z2n) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + 0.25 * z2n / nn) / denom;
    lo = std::max(0.0, center - half);
    hi = std::min(1.0, center + half);
}

std::vector<double> generate_codebook(std::uint64_t messages, int n, double energy,
                                      std::uint64_t seed) {
    require(messages >= 1 && messages <= kExplicitCodebookCap,
            "generate_codebook: message count exceeds the explicit-codebook cap");
    RandomStream rng(seed);
    std::vector<double> book(messages * static_cast<std::uint64_t>(n));
    const double sd = std::sqrt(energy);
    for (double& v : book) v = sd * rng.gaussian();
    return book;
}

namespace {

double metric(std::span<const double> v, const double* cw, int n, double a) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const double d = v[k] - a * cw[k];
        acc += d * d;
    }
    return acc / n;
}

std::size_t argmin_scan(std::span<const double> metrics) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < metrics.size(); ++m) {
        if (metrics[m] < metrics[best]) best = m;  // strict: ties keep the lowest index
    }
    return best;
}

}  // namespace

std::size_t nn_decode_ref(std::span<const double> processed, std::span<const double> codebook,
                          int n, double a) {
    const std::size_t messages = codebook.size() / static_cast<std::size_t>(n);
    require(messages * static_cast<std::size_t>(n) == codebook.size() &&
                processed.size() == static_cast<std::size_t>(n),
            "nn_decode: dimension mismatch");
    std::size_t best = 0;
    double best_metric = infinity();
    for (std::size_t m = 0; m < messages; ++m) {
        const double d = metric(processed, codebook.data() + m * n, n, a);
        if (d < best_metric) {
            best_metric = d;
            best = m;
        }
    }
    return best;
}

std::size_t nn_decode(std::span<const double> processed, std::span<const double> codebook,
                      int n, double a) {
    const std::size_t messages = codebook.size() / static_cast<std::size_t>(n);
    require(messages * static_cast<std::size_t>(n) == codebook.size() &&
                processed.size() == static_cast<std::size_t>(n),
            "nn_decode: dimension mismatch");
    std::vector<double> metrics(messages);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(messages); ++m) {
        metrics[static_cast<std::size_t>(m)] =
            metric(processed, codebook.data() + static_cast<std::size_t>(m) * n, n, a);
    }
    return argmin_scan(metrics);
}

namespace {

// One trial of the random-coding experiment; returns the error indicator.
// The stream is consumed in a fixed order (codebook, message, channel,
// decoder randomization) so trials are reproducible in isolation.
bool single_trial(const TrialPlan& plan, std::uint64_t trial_index,
                  std::vector<double>& codebook_scratch, std::vector<double>& processed_scratch) {
    RandomStream rng = RandomStream::substream(plan.master_seed, trial_index);
    const int n = plan.n;
    const double sd = std::sqrt(plan.input.energy);
    const double a = plan.scaling;
    processed_scratch.resize(static_cast<std::size_t>(n));

    if (plan.messages <= kExplicitCodebookCap) {
        const std::size_t total = plan.messages * static_cast<std::uint64_t>(n);
        codebook_scratch.resize(total);
        for (double& v : codebook_scratch) v = sd * rng.gaussian();
        const std::uint64_t msg = rng.uniform_int(plan.messages);
        const double* cw = codebook_scratch.data() + msg * static_cast<std::uint64_t>(n);
        for (int k = 0; k < n; ++k) {
            processed_scratch[static_cast<std::size_t>(k)] =
                plan.front_end.apply(sample_output(plan.channel, cw[k], rng));
        }
        const std::size_t decoded = nn_decode_ref(processed_scratch, codebook_scratch, n, a);
        return decoded != msg;
    }

    // Sampled decoding: draw only the transmitted codeword, then draw the
    // error event from its exact law. Conditioned on the processed outputs
    // v, each wrong-codeword metric is (a^2 E_s / n) times a noncentral
    // chi-square with n degrees of freedom and noncentrality |v|^2/(a^2 E_s).
    std::vector<double>& cw = codebook_scratch;
    cw.resize(static_cast<std::size_t>(n));
    for (double& v : cw) v = sd * rng.gaussian();
    for (int k = 0; k < n; ++k) {
        processed_scratch[static_cast<std::size_t>(k)] =
            plan.front_end.apply(sample_output(plan.channel, cw[k], rng));
    }
    double d1 = 0.0, vnorm2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double v = processed_scratch[static_cast<std::size_t>(k)];
        const double d = v - a * cw[static_cast<std::size_t>(k)];
        d1 += d * d;
        vnorm2 += v * v;
    }
    const double unit = a * a * plan.input.energy;
    const double lambda = vnorm2 / unit;
    const double x = d1 / unit;  // n * D(1) / (a^2 E_s)
    double p;
    if (x <= 0.0) {
        p = 0.0;
    } else {
        const boost::math::non_central_chi_squared dist(static_cast<double>(n), lambda);
        p = boost::math::cdf(dist, x);
    }
    double q;
    if (p >= 1.0) {
        q = 1.0;
    } else {
        q = -std::expm1(static_cast<double>(plan.messages - 1) * std::log1p(-p));
    }
    return rng.uniform() < q;
}

ErrorRateEstimate finalize(std::uint64_t errors, std::uint64_t trials) {
    ErrorRateEstimate est;
    est.errors = errors;
    est.trials = trials;
    est.point_estimate = static_cast<double>(errors) / static_cast<double>(trials);
    wilson_interval(errors, trials, est.wilson_lo, est.wilson_hi);
    return est;
}

}  // namespace

ErrorRateEstimate run_trials_ref(const TrialPlan& plan) {
    std::uint64_t errors = 0;
    std::vector<double> book, proc;
    for (int t = 0; t < plan.trials; ++t) {
        if (single_trial(plan, static_cast<std::uint64_t>(t), book, proc)) ++errors;
    }
    return finalize(errors, static_cast<std::uint64_t>(plan.trials));
}

ErrorRateEstimate run_trials(const TrialPlan& plan) {
    std::vector<unsigned char> err(static_cast<std::size_t>(plan.trials), 0);
#pragma omp parallel
    {
        std::vector<double> book, proc;  // per-thread scratch
#pragma omp for schedule(static)
        for (int t = 0; t < plan.trials; ++t) {
            err[static_cast<std::size_t>(t)] =
                single_trial(plan, static_cast<std::uint64_t>(t), book, proc) ? 1 : 0;
        }
    }
    std::uint64_t errors = 0;
    for (unsigned char e : err) errors += e;
    return finalize(errors, static_cast<std::uint64_t>(plan.trials));
}

std::vector<SweepRow> threshold_sweep(const ChannelModel& channel, const InputSpec& input,
                                      std::span<const double> rate_grid,
                                      std::span<const int> n_grid,
                                      const FrontEnd& front_end, double scaling,
                                      int trials, std::uint64_t master_seed,
                                      const QuadratureOptions& opts) {
    require(!rate_grid.empty() && !n_grid.empty(), "threshold_sweep: grids must be nonempty");

    const AnalyzeRow row = analyze_channel(channel, input, opts);
    const double gmi_ref = front_end.kind() == FrontEnd::Kind::posterior_mean
                               ? row.canonical.gmi_nats
                               : row.linear.gmi_nats;

    std::vector<SweepRow> rows;
    rows.reserve(rate_grid.size() * n_grid.size());
    for (double rate : rate_grid) {
        for (int n : n_grid) {
            const TrialPlan plan = make_trial_plan(n, rate, trials, master_seed, front_end,
                                                   scaling, channel, input);
            SweepRow r;
            r.rate_nats = rate;
            r.n = n;
            r.messages = plan.messages;
            r.estimate = run_trials(plan);
            r.gmi_ref_nats = gmi_ref;
            rows.push_back(r);
        }
    }
    return rows;
}

}  // namespace gmirate
