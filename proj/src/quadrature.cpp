#include "gmirate/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "gmirate/common.hpp"

namespace gmirate {

double normal_pdf(double t) {
    return 0.3989422804014326779 * std::exp(-0.5 * t * t);
}

double normal_cdf(double t) {
    return 0.5 * std::erfc(-t / kSqrt2);
}

double normal_sf(double t) {
    return 0.5 * std::erfc(t / kSqrt2);
}

double erfcx(double t) {
    // t >= 0 assumed by all callers.
    if (t < 20.0) return std::exp(t * t) * std::erfc(t);
    // Asymptotic continued series: 1/(t sqrt(pi)) * sum (-1)^k (2k-1)!!/(2t^2)^k.
    const double inv2t2 = 1.0 / (2.0 * t * t);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 10; ++k) {
        term *= -(2.0 * k - 1.0) * inv2t2;
        sum += term;
        if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    }
    return sum / (t * kSqrtPi);
}

namespace {

// Scaled right-tail pieces for a standardized cell 0 <= alpha < beta:
//   prob = 0.5 * exp(-alpha^2/2) * scaled_prob
//   E[phi difference] = pdf(alpha) * (1 - exp(-d))
// with d = (beta^2 - alpha^2)/2 computed cancellation-free.
struct TailCell {
    double scaled_prob;  // erfcx(alpha/sqrt2) - exp(-d) erfcx(beta/sqrt2)
    double expm_d;       // exp(-d), 0 when beta = inf
};

TailCell tail_cell(double alpha, double beta) {
    TailCell c;
    if (std::isinf(beta)) {
        c.expm_d = 0.0;
        c.scaled_prob = erfcx(alpha / kSqrt2);
    } else {
        const double d = 0.5 * (beta - alpha) * (beta + alpha);
        c.expm_d = std::exp(-d);
        c.scaled_prob = erfcx(alpha / kSqrt2) - c.expm_d * erfcx(beta / kSqrt2);
    }
    return c;
}

}  // namespace

double log_gaussian_interval_prob(double lower, double upper, double mean, double variance) {
    require(variance > 0.0, "interval probability requires positive variance");
    require(lower < upper, "interval probability requires lower < upper");
    const double s = std::sqrt(variance);
    double a = (lower - mean) / s;
    double b = (upper - mean) / s;
    if (b <= 0.0) std::swap(a, b), a = -a, b = -b;  // reflect to the right tail
    if (a >= 0.0) {
        const TailCell c = tail_cell(a, b);
        return -0.5 * a * a + std::log(0.5 * c.scaled_prob);
    }
    return std::log(normal_cdf(b) - normal_cdf(a));
}

double gaussian_interval_prob(double lower, double upper, double mean, double variance) {
    const double s = std::sqrt(variance);
    double a = (lower - mean) / s;
    double b = (upper - mean) / s;
    if (b <= 0.0) std::swap(a, b), a = -a, b = -b;
    if (a >= 0.0) {
        const TailCell c = tail_cell(a, b);
        return 0.5 * std::exp(-0.5 * a * a) * c.scaled_prob;
    }
    return normal_cdf(b) - normal_cdf(a);
}

double truncated_gaussian_mean(double lower, double upper, double mean, double variance) {
    require(variance > 0.0, "truncated mean requires positive variance");
    require(lower < upper, "truncated mean requires lower < upper");
    const double s = std::sqrt(variance);
    double a = (lower - mean) / s;
    double b = (upper - mean) / s;
    bool reflected = false;
    if (b <= 0.0) {  // mirror so the cell sits in the right half-line
        const double ta = a;
        a = -b;
        b = -ta;
        reflected = true;
    }

    double ratio;  // (pdf(a) - pdf(b)) / (Phi(b) - Phi(a))
    if (a >= 0.0) {
        const TailCell c = tail_cell(a, b);
        const double log_prob = -0.5 * a * a + std::log(0.5 * c.scaled_prob);
        if (!(log_prob >= -690.77552789821368)) {  // ln(1e-300)
            throw numeric_error("truncated_gaussian_mean: cell (" + std::to_string(lower) +
                                ", " + std::to_string(upper) + ") has probability below 1e-300");
        }
        // exp(-a^2/2) cancels between numerator and denominator.
        ratio = 0.3989422804014326779 * (1.0 - c.expm_d) / (0.5 * c.scaled_prob);
    } else {
        const double pa = std::isinf(a) ? 0.0 : normal_pdf(a);
        const double pb = std::isinf(b) ? 0.0 : normal_pdf(b);
        const double prob = normal_cdf(b) - normal_cdf(a);
        if (!(prob >= 1e-300)) {
            throw numeric_error("truncated_gaussian_mean: cell (" + std::to_string(lower) +
                                ", " + std::to_string(upper) + ") has probability below 1e-300");
        }
        ratio = (pa - pb) / prob;
    }
    if (reflected) ratio = -ratio;
    return mean + s * ratio;
}

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mu0 * (first eigenvector component)^2.
void golub_welsch(const Eigen::VectorXd& offdiag, double mu0,
                  std::vector<double>& nodes, std::vector<double>& weights) {
    const int n = static_cast<int>(offdiag.size()) + 1;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = es.eigenvalues()(i);
        const double v = es.eigenvectors()(0, i);
        double w = mu0 * v * v;
        if (w <= 0.0) w = std::numeric_limits<double>::denorm_min();
        weights[i] = w;
    }
}

// The Jacobi matrix of a symmetric weight has exactly symmetric spectrum;
// enforce the symmetry the eigensolver delivers only to roundoff.
void symmetrize(std::vector<double>& nodes, std::vector<double>& weights) {
    const int n = static_cast<int>(nodes.size());
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double t = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -t;
        nodes[j] = t;
        const double w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
}

}  // namespace

GaussHermiteRule gauss_hermite_rule(int order) {
    require(order >= 1 && order <= 512, "gauss_hermite_rule: order must be in [1, 512]");
    GaussHermiteRule rule;
    rule.order = order;
    if (order == 1) {
        rule.nodes = {0.0};
        rule.weights = {kSqrtPi};
        return rule;
    }
    Eigen::VectorXd off(order - 1);
    for (int k = 1; k < order; ++k) off(k - 1) = std::sqrt(0.5 * k);
    golub_welsch(off, kSqrtPi, rule.nodes, rule.weights);
    symmetrize(rule.nodes, rule.weights);
    return rule;
}

GaussLegendreRule gauss_legendre_rule(int order) {
    require(order >= 1 && order <= 512, "gauss_legendre_rule: order must be in [1, 512]");
    GaussLegendreRule rule;
    rule.order = order;
    if (order == 1) {
        rule.nodes = {0.0};
        rule.weights = {2.0};
        return rule;
    }
    Eigen::VectorXd off(order - 1);
    for (int k = 1; k < order; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    golub_welsch(off, 2.0, rule.nodes, rule.weights);
    symmetrize(rule.nodes, rule.weights);
    return rule;
}

double gaussian_expectation(const std::function<double(double)>& f,
                            double mean, double variance,
                            const GaussHermiteRule& rule) {
    require(variance >= 0.0, "gaussian_expectation: variance must be nonnegative");
    if (variance == 0.0) return f(mean);
    const double scale = std::sqrt(2.0 * variance);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double v = f(mean + scale * rule.nodes[i]);
        if (!std::isfinite(v)) {
            throw numeric_error("gaussian_expectation: integrand not finite at node " +
                                std::to_string(mean + scale * rule.nodes[i]));
        }
        acc += rule.weights[i] * v;
    }
    return acc / kSqrtPi;
}

double WeightedLineRule::sum(const std::function<double(double)>& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
}

WeightedLineRule gaussian_line_rule(double mean, double variance,
                                    const std::vector<double>& breakpoints,
                                    double feature_scale,
                                    const LineRuleOptions& opts) {
    require(variance > 0.0, "gaussian_line_rule: variance must be positive");
    WeightedLineRule rule;
    const double sd = std::sqrt(variance);

    if (breakpoints.empty() && feature_scale >= sd / 6.0) {
        const GaussHermiteRule gh = gauss_hermite_rule(opts.hermite_order);
        const double scale = kSqrt2 * sd;
        rule.nodes.reserve(gh.order);
        rule.weights.reserve(gh.order);
        for (int i = 0; i < gh.order; ++i) {
            rule.nodes.push_back(mean + scale * gh.nodes[i]);
            rule.weights.push_back(gh.weights[i] / kSqrtPi);
        }
        return rule;
    }

    // Composite Gauss-Legendre panels split at the breakpoints; panel width
    // tracks the sharpest feature so kinks never cross a panel.
    double lo = mean - opts.span_sigmas * sd;
    double hi = mean + opts.span_sigmas * sd;
    std::vector<double> edges{lo};
    for (double b : breakpoints) {
        if (b > lo && b < hi) edges.push_back(b);
    }
    edges.push_back(hi);
    std::sort(edges.begin(), edges.end());

    const double width = std::max(1e-12 * sd, opts.panel_factor * std::min(feature_scale, sd));
    const GaussLegendreRule gl = gauss_legendre_rule(opts.panel_points);
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        const double a = edges[e], b = edges[e + 1];
        const int panels = std::min(512, std::max(1, static_cast<int>(std::ceil((b - a) / width))));
        const double h = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            const double c = a + (p + 0.5) * h;
            for (int i = 0; i < gl.order; ++i) {
                const double x = c + 0.5 * h * gl.nodes[i];
                const double z = (x - mean) / sd;
                rule.nodes.push_back(x);
                rule.weights.push_back(0.5 * h * gl.weights[i] *
                                       0.3989422804014326779 * std::exp(-0.5 * z * z) / sd);
            }
        }
    }
    return rule;
}

}  // namespace gmirate
