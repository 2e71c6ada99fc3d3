#ifndef GMIRATE_QUADRATURE_HPP
#define GMIRATE_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace gmirate {

// --- scalar normal helpers ---------------------------------------------

double normal_pdf(double t);          // standard normal density
double normal_cdf(double t);          // Phi, accurate in the left tail
double normal_sf(double t);           // 1 - Phi, accurate in the right tail
double erfcx(double t);               // exp(t^2) erfc(t), t >= 0

// log P(a < X < b) for X ~ N(mean, variance); stable for far-tail cells.
double log_gaussian_interval_prob(double lower, double upper, double mean, double variance);

// P(a < X < b), evaluated tail-stably (never catastrophically cancels).
double gaussian_interval_prob(double lower, double upper, double mean, double variance);

// E[X | a < X < b] for X ~ N(mean, variance > 0). lower/upper may be +-inf.
// Throws numeric_error when the cell probability is below 1e-300.
double truncated_gaussian_mean(double lower, double upper, double mean, double variance);

// --- Gauss rules ---------------------------------------------------------

// Physicists' convention: integrates f against weight exp(-t^2) on R,
// sum of weights = sqrt(pi).
struct GaussHermiteRule {
    int order = 0;
    std::vector<double> nodes;    // strictly increasing, symmetric about 0
    std::vector<double> weights;  // positive
};

// Golub-Welsch construction, 1 <= order <= 512.
GaussHermiteRule gauss_hermite_rule(int order);

// Legendre rule on (-1, 1); weights sum to 2.
struct GaussLegendreRule {
    int order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussLegendreRule gauss_legendre_rule(int order);

// E[f(X)] for X ~ N(mean, variance >= 0). Exact passthrough at variance 0.
// Throws numeric_error if f is non-finite at a node.
double gaussian_expectation(const std::function<double(double)>& f,
                            double mean, double variance,
                            const GaussHermiteRule& rule);

// --- weighted line rules for piecewise-smooth integrands ------------------
//
// A discrete rule approximating integrals against a N(mean, variance)
// density: sum_i w_i f(x_i). Built either from a Gauss-Hermite rule (smooth
// integrands) or from breakpoint-split composite Gauss-Legendre panels,
// which keeps spectral accuracy when f has kinks at known locations.
struct WeightedLineRule {
    std::vector<double> nodes;
    std::vector<double> weights;  // include the Gaussian density factor

    double sum(const std::function<double(double)>& f) const;
};

struct LineRuleOptions {
    int hermite_order = 129;
    int panel_points = 24;
    double panel_factor = 2.0;  // panel width = factor * feature scale
    double span_sigmas = 10.0;  // truncation of the Gaussian domain
};

// feature_scale: smallest length scale the integrand varies on (pass the
// prior standard deviation when nothing sharper is known).
WeightedLineRule gaussian_line_rule(double mean, double variance,
                                    const std::vector<double>& breakpoints,
                                    double feature_scale,
                                    const LineRuleOptions& opts = {});

}  // namespace gmirate

#endif
