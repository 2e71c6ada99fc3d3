#include "gmirate/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "gmirate/common.hpp"

namespace gmirate {

namespace {

// ---- finite-alphabet machinery -------------------------------------------
//
// Quantizer kinds observe y = Q(x + z). With w = x + z ~ N(0, E_s + nv),
// (x, w) are jointly Gaussian, so E[x | y = level_i] is the projection
// coefficient times the truncated mean of w over the cell.
struct CellTable {
    std::vector<double> levels;
    std::vector<double> prob;    // P(y = level_i)
    std::vector<double> wmean;   // E[w | w in cell_i]
    std::vector<double> dropped; // levels excluded for zero probability
    double rho = 0.0;            // E_s / (E_s + nv)
};

CellTable build_cells(const ChannelModel& ch, const InputSpec& input) {
    CellTable t;
    t.levels = ch.output_levels();
    const auto edges = ch.cell_edges();
    const double s2 = input.energy + ch.noise_var;
    t.rho = input.energy / s2;
    t.prob.resize(t.levels.size());
    t.wmean.resize(t.levels.size());
    for (std::size_t i = 0; i < t.levels.size(); ++i) {
        try {
            t.wmean[i] = truncated_gaussian_mean(edges[i], edges[i + 1], 0.0, s2);
            t.prob[i] = gaussian_interval_prob(edges[i], edges[i + 1], 0.0, s2);
        } catch (const numeric_error&) {
            t.prob[i] = 0.0;
            t.wmean[i] = 0.0;
            t.dropped.push_back(t.levels[i]);
        }
    }
    return t;
}

MomentReport finite_moments(const ChannelModel& ch, const InputSpec& input) {
    const CellTable t = build_cells(ch, input);
    const double es = input.energy;
    double cross = 0.0, out = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < t.levels.size(); ++i) {
        const double g = t.rho * t.wmean[i];  // E[x | y = level_i]
        cross += t.levels[i] * t.prob[i] * g;
        out += t.levels[i] * t.levels[i] * t.prob[i];
        m1 += t.prob[i] * g;
        m2 += t.prob[i] * g * g;
    }
    MomentReport r;
    r.energy = es;
    r.cross_moment = cross;
    r.output_power = out;
    r.cond_mean_power = std::max(0.0, m2 - m1 * m1);
    r.mmse = std::clamp(es - r.cond_mean_power, 0.0, es);
    r.lmmse = out > 0.0 ? std::clamp(es - cross * cross / out, 0.0, es) : es;
    r.correlation_ratio = std::sqrt(std::clamp(r.cond_mean_power / es, 0.0, 1.0));
    r.bussgang_coeff = cross / es;
    return r;
}

// ---- continuous-output machinery ------------------------------------------
//
// Integration rule in x against the Gaussian prior, split at the
// nonlinearity's kinks. Saturated tails (h constant) collapse to exact
// closed-form atoms so no quadrature ever crosses a kink.
struct XRule {
    std::vector<double> x, w, hx;
    struct Atom {
        double mass;   // P(x in piece)
        double xmom;   // E[x ; piece]
        double x2mom;  // E[x^2 ; piece]
        double h;      // constant nonlinearity value on the piece
    };
    std::vector<Atom> atoms;
};

struct RuleParams {
    int hermite_order;
    int panel_points;
};

XRule make_xrule(const Shape& shape, double energy, double feature, const RuleParams& p) {
    XRule r;
    const double sd = std::sqrt(energy);
    double lo = -10.0 * sd, hi = 10.0 * sd;

    if (shape.saturates()) {
        const double a = shape.limit / sd;
        const double mass = normal_sf(a);
        const double xmom = sd * normal_pdf(a);
        const double x2mom = energy * (normal_sf(a) + a * normal_pdf(a));
        r.atoms.push_back({mass, xmom, x2mom, shape.saturation_value()});
        r.atoms.push_back({mass, -xmom, x2mom, -shape.saturation_value()});
        lo = std::max(lo, -shape.limit);
        hi = std::min(hi, shape.limit);
        if (lo >= hi) return r;  // fully saturated prior mass
    }

    const auto bps = shape.breakpoints();
    const bool smooth = !shape.saturates() && bps.empty();
    if (smooth && feature >= sd / 6.0) {
        const GaussHermiteRule gh = gauss_hermite_rule(p.hermite_order);
        const double scale = kSqrt2 * sd;
        for (int i = 0; i < gh.order; ++i) {
            const double x = scale * gh.nodes[i];
            r.x.push_back(x);
            r.w.push_back(gh.weights[i] / kSqrtPi);
            r.hx.push_back(shape(x));
        }
        return r;
    }

    std::vector<double> edges{lo};
    for (double b : bps) {
        if (b > lo && b < hi) edges.push_back(b);
    }
    edges.push_back(hi);
    std::sort(edges.begin(), edges.end());

    const double width = std::max(1e-12 * sd, 2.0 * std::min(feature, sd));
    const GaussLegendreRule gl = gauss_legendre_rule(p.panel_points);
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        const double a = edges[e], b = edges[e + 1];
        const int panels = std::min(512, std::max(1, static_cast<int>(std::ceil((b - a) / width))));
        const double h = (b - a) / panels;
        for (int pa = 0; pa < panels; ++pa) {
            const double c = a + (pa + 0.5) * h;
            for (int i = 0; i < gl.order; ++i) {
                const double x = c + 0.5 * h * gl.nodes[i];
                const double z = x / sd;
                r.x.push_back(x);
                r.w.push_back(0.5 * h * gl.weights[i] * 0.3989422804014326779 *
                              std::exp(-0.5 * z * z) / sd);
                r.hx.push_back(shape(x));
            }
        }
    }
    return r;
}

// Quadrature-backed conditional mean E[x | y] for y = h(x) + z. Exponents
// are shifted by the nearest node so far-out queries stay normalizable.
class PosteriorMeanFn {
public:
    PosteriorMeanFn(XRule rule, double noise_var)
        : rule_(std::move(rule)), inv2nv_(0.5 / noise_var) {}

    double operator()(double y) const {
        double dmin = infinity();
        for (double h : rule_.hx) dmin = std::min(dmin, (y - h) * (y - h));
        for (const auto& a : rule_.atoms) dmin = std::min(dmin, (y - a.h) * (y - a.h));
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < rule_.x.size(); ++k) {
            const double d = y - rule_.hx[k];
            const double e = std::exp((dmin - d * d) * inv2nv_);
            num += rule_.w[k] * rule_.x[k] * e;
            den += rule_.w[k] * e;
        }
        for (const auto& a : rule_.atoms) {
            const double d = y - a.h;
            const double e = std::exp((dmin - d * d) * inv2nv_);
            num += a.xmom * e;
            den += a.mass * e;
        }
        return num / den;
    }

private:
    XRule rule_;
    double inv2nv_;
};

// E[F(y)] and E[x F(y)] over the (x, z) tensor for y = h(x) + z. Partial
// sums are stored per x-entry and reduced in index order, so the result is
// deterministic for any OpenMP thread count.
struct TensorStats {
    double mean_f = 0.0;    // E[F]
    double mean_f2 = 0.0;   // E[F^2]
    double cross_xf = 0.0;  // E[x F]
};

TensorStats tensor_stats(const XRule& xr, double noise_var, int z_order,
                         const std::function<double(double)>& f) {
    const GaussHermiteRule gh = gauss_hermite_rule(z_order);
    const double zscale = std::sqrt(2.0 * noise_var);
    const std::size_t nx = xr.x.size(), na = xr.atoms.size();
    std::vector<TensorStats> part(nx + na);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(nx + na); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double h = i < nx ? xr.hx[i] : xr.atoms[i - nx].h;
        const double wx = i < nx ? xr.w[i] : xr.atoms[i - nx].mass;
        const double xw = i < nx ? xr.w[i] * xr.x[i] : xr.atoms[i - nx].xmom;
        double sf = 0.0, sf2 = 0.0;
        for (int j = 0; j < gh.order; ++j) {
            const double v = f(h + zscale * gh.nodes[j]);
            sf += gh.weights[j] * v;
            sf2 += gh.weights[j] * v * v;
        }
        sf /= kSqrtPi;
        sf2 /= kSqrtPi;
        part[i] = {wx * sf, wx * sf2, xw * sf};
    }
    TensorStats t;
    for (const auto& p : part) {
        t.mean_f += p.mean_f;
        t.mean_f2 += p.mean_f2;
        t.cross_xf += p.cross_xf;
    }
    return t;
}

struct ContinuousMoments {
    double cross;       // E[x h(x)] = E[x y]
    double hpower;      // E[h(x)^2]
    double xpower;      // E[x^2] by the same rule (residual diagnostics)
    double cmp;         // var E[x|y]
    double mean_m;
};

ContinuousMoments continuous_pass(const ChannelModel& ch, const InputSpec& input,
                                  const RuleParams& p) {
    const double nv = ch.noise_var;
    const double feature = nv > 0.0 ? std::sqrt(nv) : std::sqrt(input.energy);
    const XRule xr = make_xrule(ch.shape, input.energy, feature, p);

    ContinuousMoments m{};
    for (std::size_t k = 0; k < xr.x.size(); ++k) {
        m.cross += xr.w[k] * xr.x[k] * xr.hx[k];
        m.hpower += xr.w[k] * xr.hx[k] * xr.hx[k];
        m.xpower += xr.w[k] * xr.x[k] * xr.x[k];
    }
    for (const auto& a : xr.atoms) {
        m.cross += a.xmom * a.h;
        m.hpower += a.mass * a.h * a.h;
        m.xpower += a.x2mom;
    }

    if (nv > 0.0) {
        PosteriorMeanFn pm(xr, nv);
        const TensorStats ts =
            tensor_stats(xr, nv, p.hermite_order, [&](double y) { return pm(y); });
        m.mean_m = ts.mean_f;
        m.cmp = std::max(0.0, ts.mean_f2 - ts.mean_f * ts.mean_f);
    }
    return m;
}

void check_agreement(double base, double refined, double scale, double tol,
                     const char* what) {
    if (std::fabs(base - refined) > tol * std::max(scale, std::fabs(refined))) {
        throw numeric_error(std::string("compute_moments: quadrature refinement disagrees for ") +
                            what + " (" + std::to_string(base) + " vs " +
                            std::to_string(refined) + ")");
    }
}

MomentReport continuous_moments(const ChannelModel& ch, const InputSpec& input,
                                const QuadratureOptions& opts) {
    const double es = input.energy;
    const RuleParams base{opts.hermite_order, 24};
    ContinuousMoments mb = continuous_pass(ch, input, base);
    ContinuousMoments mr = mb;
    if (opts.check_order > 0) {
        const RuleParams fine{opts.check_order, 40};
        mr = continuous_pass(ch, input, fine);
        check_agreement(mb.cross, mr.cross, es, opts.tolerance, "E[xy]");
        check_agreement(mb.hpower, mr.hpower, es, opts.tolerance, "E[y^2]");
        check_agreement(mb.cmp, mr.cmp, es, opts.tolerance, "var E[x|y]");
    }

    MomentReport r;
    r.energy = es;
    r.cross_moment = mr.cross;
    r.output_power = mr.hpower + ch.noise_var;

    if (ch.noise_var == 0.0) {
        // Deterministic channel: the conditional-mean error is structural.
        const Shape& s = ch.shape;
        if (s.strictly_monotone()) {
            r.cond_mean_power = es;
        } else if (s.even_symmetric()) {
            r.cond_mean_power = 0.0;
            r.cross_moment = 0.0;  // odd integrand, exactly zero
        } else if (s.saturates()) {
            const double sd = std::sqrt(es);
            const double a = s.limit / sd;
            const double mass = normal_sf(a);
            const double xmom = sd * normal_pdf(a);
            const double inner = es * (1.0 - 2.0 * mass - 2.0 * a * normal_pdf(a));
            r.cond_mean_power = inner + (mass > 0.0 ? 2.0 * xmom * xmom / mass : 0.0);
        } else {
            throw numeric_error("compute_moments: unsupported noiseless nonlinearity");
        }
    } else {
        r.cond_mean_power = mr.cmp;
    }

    r.mmse = std::clamp(es - r.cond_mean_power, 0.0, es);
    r.lmmse = r.output_power > 0.0
                  ? std::clamp(es - r.cross_moment * r.cross_moment / r.output_power, 0.0, es)
                  : es;
    r.correlation_ratio = std::sqrt(std::clamp(r.cond_mean_power / es, 0.0, 1.0));
    r.bussgang_coeff = r.cross_moment / es;
    return r;
}

}  // namespace

MomentReport compute_moments(const ChannelModel& ch, const InputSpec& input,
                             const QuadratureOptions& opts) {
    if (ch.finite_output()) return finite_moments(ch, input);
    return continuous_moments(ch, input, opts);
}

double bussgang_residual_check(const ChannelModel& ch, const InputSpec& input,
                               const QuadratureOptions& opts) {
    const MomentReport m = compute_moments(ch, input, opts);
    double x2;
    if (ch.finite_output()) {
        x2 = gaussian_expectation([](double x) { return x * x; }, 0.0, input.energy,
                                  gauss_hermite_rule(opts.hermite_order));
    } else {
        const RuleParams p{opts.hermite_order, 24};
        x2 = continuous_pass(ch, input, p).xpower;
    }
    return m.cross_moment - m.bussgang_coeff * x2;
}

FrontEnd FrontEnd::identity() {
    FrontEnd fe;
    fe.kind_ = Kind::identity;
    return fe;
}

FrontEnd FrontEnd::scale(double factor) {
    require(std::isfinite(factor) && factor != 0.0, "FrontEnd::scale: factor must be nonzero");
    FrontEnd fe;
    fe.kind_ = Kind::scale;
    fe.scale_ = factor;
    return fe;
}

FrontEnd FrontEnd::posterior_mean(const ChannelModel& ch, const InputSpec& input,
                                  const QuadratureOptions& opts) {
    FrontEnd fe;
    fe.kind_ = Kind::posterior_mean;
    if (ch.finite_output()) {
        const CellTable t = build_cells(ch, input);
        for (std::size_t i = 0; i < t.levels.size(); ++i) {
            bool dropped = std::find(t.dropped.begin(), t.dropped.end(), t.levels[i]) !=
                           t.dropped.end();
            if (!dropped) fe.table_.emplace_back(t.levels[i], t.rho * t.wmean[i]);
        }
        fe.dropped_ = t.dropped;
        return fe;
    }

    const Shape shape = ch.shape;
    const double es = input.energy;
    if (ch.noise_var > 0.0) {
        const RuleParams p{opts.hermite_order, 24};
        auto pm = std::make_shared<PosteriorMeanFn>(make_xrule(shape, es, std::sqrt(ch.noise_var), p),
                                                    ch.noise_var);
        fe.fn_ = std::make_shared<const std::function<double(double)>>(
            [pm](double y) { return (*pm)(y); });
        return fe;
    }

    // Noiseless deterministic channels with analytic conditional means.
    if (shape.strictly_monotone()) {
        const ShapeId id = shape.id;
        fe.fn_ = std::make_shared<const std::function<double(double)>>(
            [id](double y) { return id == ShapeId::identity ? y : std::cbrt(y); });
        return fe;
    }
    if (shape.even_symmetric()) {
        fe.fn_ = std::make_shared<const std::function<double(double)>>(
            [](double) { return 0.0; });
        return fe;
    }
    if (shape.saturates()) {
        const double sd = std::sqrt(es);
        const double a = shape.limit / sd;
        const double tail = sd * normal_pdf(a) / normal_sf(a);
        const double sat = shape.saturation_value();
        const Shape sh = shape;
        fe.fn_ = std::make_shared<const std::function<double(double)>>([sh, sat, tail](double y) {
            if (y >= sat) return tail;
            if (y <= -sat) return -tail;
            if (sh.id == ShapeId::hard_clip) return y;
            // invert x - x^3/(3A^2) on (-A, A) by Newton
            double x = y;
            for (int it = 0; it < 40; ++it) {
                const double f = x - x * x * x / (3.0 * sh.limit * sh.limit) - y;
                const double fp = 1.0 - x * x / (sh.limit * sh.limit);
                const double step = f / std::max(fp, 1e-12);
                x -= step;
                if (std::fabs(step) < 1e-14 * sh.limit) break;
            }
            return std::clamp(x, -sh.limit, sh.limit);
        });
        return fe;
    }
    throw model_error("posterior_mean: channel has no evaluable likelihood");
}

double FrontEnd::apply(double y) const {
    switch (kind_) {
        case Kind::identity:
            return y;
        case Kind::scale:
            return scale_ * y;
        case Kind::posterior_mean:
            break;
    }
    if (fn_) return (*fn_)(y);
    // Exact table lookup; levels come from the same channel object, so the
    // query is bitwise equal to a stored level.
    auto it = std::lower_bound(table_.begin(), table_.end(), y,
                               [](const auto& p, double v) { return p.first < v; });
    if (it == table_.end() || std::fabs(it->first - y) > 1e-9 * (1.0 + std::fabs(y))) {
        throw model_error("FrontEnd::apply: y is not in the output alphabet");
    }
    return it->second;
}

FrontEndMoments front_end_moments(const ChannelModel& ch, const InputSpec& input,
                                  const std::function<double(double)>& g,
                                  const QuadratureOptions& opts) {
    FrontEndMoments fm;
    if (ch.finite_output()) {
        const CellTable t = build_cells(ch, input);
        for (std::size_t i = 0; i < t.levels.size(); ++i) {
            const double gv = g(t.levels[i]);
            fm.cross += gv * t.prob[i] * t.rho * t.wmean[i];
            fm.power += gv * gv * t.prob[i];
        }
        return fm;
    }
    require(ch.noise_var > 0.0,
            "front_end_moments: continuous channel requires positive noise");
    const RuleParams p{opts.hermite_order, 24};
    const XRule xr = make_xrule(ch.shape, input.energy, std::sqrt(ch.noise_var), p);
    const TensorStats ts = tensor_stats(xr, ch.noise_var, opts.hermite_order, g);
    fm.cross = ts.cross_xf;
    fm.power = ts.mean_f2;
    return fm;
}

FrontEndMoments front_end_moments(const ChannelModel& ch, const InputSpec& input,
                                  const FrontEnd& fe, const QuadratureOptions& opts) {
    return front_end_moments(ch, input, [&fe](double y) { return fe.apply(y); }, opts);
}

}  // namespace gmirate
