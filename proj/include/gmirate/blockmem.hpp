#ifndef GMIRATE_BLOCKMEM_HPP
#define GMIRATE_BLOCKMEM_HPP

#include <span>
#include <vector>

namespace gmirate {

// Length-L linear-Gaussian block channel y = H x + z with H the L x L
// lower-triangular banded convolution matrix of the impulse response and
// z white Gaussian with variance noise_var.
struct BlockLinearChannel {
    std::vector<double> impulse_response;  // h_0 .. h_{K-1}, K <= L
    double noise_var = 1.0;
    int block_length = 1;
    double energy = 1.0;

    BlockLinearChannel(std::vector<double> h, double nv, int L, double es);
};

struct BlockReport {
    double mmse_L = 0.0;
    double gmi_L_nats = 0.0;
    double spectral_mmse = 0.0;
    double spectral_gmi_nats = 0.0;
    double theta_sup_nats = 0.0;  // dual-route cross-check of gmi_L_nats
};

// Normalized per-symbol MMSE of estimating x from y at finite L:
// (1/L) tr(E_s I - E_s^2 H^T (E_s H H^T + nv I)^{-1} H), via a banded
// Cholesky solve with a residual check. OpenMP across columns.
double toeplitz_mmse(const BlockLinearChannel& ch);

// Dense serial reference implementation kept for testing.
double toeplitz_mmse_ref(const BlockLinearChannel& ch);

// L -> infinity limit: (1/2pi) Int_0^{2pi} E_s nv / (E_s |H(w)|^2 + nv) dw,
// trapezoidal rule with a doubling check.
double spectral_mmse_limit(std::span<const double> impulse_response,
                           double noise_var, double energy);

// Finite-L and limiting rates plus the dual-route cross-check.
BlockReport block_gmi(const BlockLinearChannel& ch);

// Squared-distance decoding metric over length-L super-symbols:
// (1/n) sum_k |v_k - a u_k|^2 where v = processed outputs, u = candidate,
// both of size n*L.
double block_nn_metric(std::span<const double> processed,
                       std::span<const double> candidate,
                       double a, int super_symbol_length);

}  // namespace gmirate

#endif
