#include "gmirate/gmi.hpp"

#include <algorithm>
#include <cmath>

#include "gmirate/common.hpp"

namespace gmirate {

namespace {
constexpr double kDegenerateDelta = 1.0 - 1e-12;
constexpr double kClampSlack = 1e-9;
}  // namespace

GmiReport gmi_from_delta(double delta) {
    if (delta < -kClampSlack || delta > 1.0 + kClampSlack) {
        throw numeric_error("gmi_from_delta: delta " + std::to_string(delta) +
                            " outside [0, 1] beyond roundoff slack");
    }
    GmiReport r;
    r.clamped = delta < 0.0 || delta > 1.0;
    delta = std::clamp(delta, 0.0, 1.0);
    r.delta = delta;
    if (delta >= kDegenerateDelta) {
        r.degenerate = true;
        r.gmi_nats = infinity();
        r.gmi_bits = infinity();
        r.effective_snr = infinity();
        return r;
    }
    r.effective_snr = delta / (1.0 - delta);
    r.gmi_nats = -0.5 * std::log1p(-delta);
    r.gmi_bits = r.gmi_nats / kLn2;
    return r;
}

double delta_for_front_end(const MomentReport& m, FrontEnd::Kind kind) {
    if (kind == FrontEnd::Kind::posterior_mean) {
        return std::clamp(m.cond_mean_power / m.energy, 0.0, 1.0);
    }
    require(m.output_power > 0.0, "delta_for_front_end: degenerate channel with zero output power");
    // Invariant under any nonzero linear scaling of the output.
    return m.cross_moment * m.cross_moment / (m.energy * m.output_power);
}

namespace {

double snr_from_error(double energy, double err) {
    if (err < 1e-12 * energy) return infinity();
    return (energy - err) / err;
}

}  // namespace

double effective_snr_canonical(const MomentReport& m) { return snr_from_error(m.energy, m.mmse); }

double effective_snr_linear(const MomentReport& m) { return snr_from_error(m.energy, m.lmmse); }

double optimal_scaling(const ChannelModel& ch, const InputSpec& input,
                       const FrontEnd& fe, const QuadratureOptions& opts) {
    return front_end_moments(ch, input, fe, opts).cross / input.energy;
}

double ThetaObjective::evaluate(double theta) const {
    const double u = 1.0 - 2.0 * theta * a * a * energy;
    return 0.5 * std::log(u) + theta * distortion - theta * second_moment_g / u;
}

ThetaObjective make_theta_objective(const ChannelModel& ch, const InputSpec& input,
                                    const FrontEnd& fe, double a,
                                    const QuadratureOptions& opts) {
    const FrontEndMoments fm = front_end_moments(ch, input, fe, opts);
    ThetaObjective obj;
    obj.energy = input.energy;
    obj.a = a;
    obj.second_moment_g = fm.power;
    obj.distortion = fm.power - 2.0 * a * fm.cross + a * a * input.energy;
    return obj;
}

double gmi_via_theta_sup(const ThetaObjective& obj) {
    require(obj.distortion > 0.0, "gmi_via_theta_sup: distortion must be positive");
    require(obj.a != 0.0, "gmi_via_theta_sup: scaling must be nonzero");
    require(obj.second_moment_g > 0.0, "gmi_via_theta_sup: processed power must be positive");

    // Start from the natural scale -1/(2 a^2 E_s) and expand left until the
    // objective turns over; the optimum can sit well beyond the starting
    // point whenever delta exceeds 1/2.
    const double scale = 1.0 / (2.0 * obj.a * obj.a * obj.energy);
    double t1 = -scale * (1.0 - 1e-12);
    double j1 = obj.evaluate(t1);
    double lo = t1, hi = 0.0;
    if (j1 > 0.0) {
        double prev_t = t1, prev_j = j1;
        for (;;) {
            const double t = 2.0 * prev_t;
            if (t < -1e12 * scale) {
                throw numeric_error("gmi_via_theta_sup: objective appears unbounded");
            }
            const double j = obj.evaluate(t);
            if (j <= prev_j) {
                lo = t;
                hi = prev_t == t1 ? 0.0 : prev_t / 2.0;
                break;
            }
            prev_t = t;
            prev_j = j;
        }
    }

    // Golden-section maximization on [lo, hi].
    const double gr = 0.6180339887498948482;
    double a1 = hi - gr * (hi - lo);
    double b1 = lo + gr * (hi - lo);
    double fa = obj.evaluate(a1);
    double fb = obj.evaluate(b1);
    while (hi - lo > 1e-12) {
        if (fa >= fb) {
            hi = b1;
            b1 = a1;
            fb = fa;
            a1 = hi - gr * (hi - lo);
            fa = obj.evaluate(a1);
        } else {
            lo = a1;
            a1 = b1;
            fa = fb;
            b1 = lo + gr * (hi - lo);
            fb = obj.evaluate(b1);
        }
    }
    return std::max(0.0, std::max(fa, fb));
}

double mutual_information_finite(const ChannelModel& ch, const InputSpec& input,
                                 const QuadratureOptions& opts) {
    require(ch.finite_output(), "mutual_information_finite: channel must have finite output");
    const auto levels = ch.output_levels();
    const auto edges = ch.cell_edges();
    const double s2 = input.energy + ch.noise_var;

    double hy = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const double p = gaussian_interval_prob(edges[i], edges[i + 1], 0.0, s2);
        if (p > 0.0) hy -= p * std::log(p);
    }

    if (ch.noise_var == 0.0) return hy;  // y deterministic given x

    const auto cond_entropy = [&](double x) {
        double h = 0.0;
        for (std::size_t i = 0; i < levels.size(); ++i) {
            const double p = likelihood(ch, levels[i], x);
            if (p > 0.0) h -= p * std::log(p);
        }
        return h;
    };
    const double feature = std::sqrt(std::min(ch.noise_var, input.energy));
    LineRuleOptions lro;
    lro.hermite_order = opts.hermite_order;
    const WeightedLineRule rule = gaussian_line_rule(0.0, input.energy, {}, feature, lro);
    double hyx = rule.sum(cond_entropy);

    if (opts.check_order > 0) {
        LineRuleOptions fine = lro;
        fine.hermite_order = opts.check_order;
        fine.panel_points = 40;
        const double hyx2 = gaussian_line_rule(0.0, input.energy, {}, feature, fine).sum(cond_entropy);
        if (std::fabs(hyx - hyx2) > opts.tolerance * std::max(1.0, std::fabs(hyx2))) {
            throw numeric_error("mutual_information_finite: quadrature refinement disagrees");
        }
        hyx = hyx2;
    }
    return std::max(0.0, hy - hyx);
}

AnalyzeRow analyze_channel(const ChannelModel& ch, const InputSpec& input,
                           const QuadratureOptions& opts) {
    AnalyzeRow row;
    row.energy = input.energy;
    row.noise_var = ch.noise_var;
    row.moments = compute_moments(ch, input, opts);

    row.linear = gmi_from_delta(delta_for_front_end(row.moments, FrontEnd::Kind::identity));
    row.linear.a_opt = row.moments.bussgang_coeff;

    row.canonical = gmi_from_delta(delta_for_front_end(row.moments, FrontEnd::Kind::posterior_mean));
    // E[x E[x|y]] = var E[x|y], so the optimal scaling is Theta^2.
    row.canonical.a_opt = row.moments.cond_mean_power / input.energy;
    return row;
}

}  // namespace gmirate
