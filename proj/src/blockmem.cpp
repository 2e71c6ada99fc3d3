#include "gmirate/blockmem.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "gmirate/common.hpp"
#include "gmirate/gmi.hpp"

namespace gmirate {

BlockLinearChannel::BlockLinearChannel(std::vector<double> h, double nv, int L, double es)
    : impulse_response(std::move(h)), noise_var(nv), block_length(L), energy(es) {
    require(!impulse_response.empty() &&
                static_cast<int>(impulse_response.size()) <= L,
            "BlockLinearChannel: need 1 <= taps <= block length");
    bool nonzero = false;
    for (double t : impulse_response) nonzero = nonzero || t != 0.0;
    require(nonzero, "BlockLinearChannel: impulse response must not be all zero");
    require(std::isfinite(nv) && nv > 0.0, "BlockLinearChannel: noise_var must be positive");
    require(L >= 1 && L <= 4096, "BlockLinearChannel: block length must be in [1, 4096]");
    require(std::isfinite(es) && es > 0.0, "BlockLinearChannel: energy must be positive");
}

namespace {

// Banded representation of A = E_s H H^T + nv I (SPD, bandwidth K-1):
// band(i, j) stored for 0 <= i - j <= K - 1.
struct BandMatrix {
    int n = 0, bw = 0;            // bw = K - 1
    std::vector<double> a;        // (bw+1) x n, a[d*n + j] = A(j+d, j)

    double& at(int d, int j) { return a[static_cast<std::size_t>(d) * n + j]; }
    double at(int d, int j) const { return a[static_cast<std::size_t>(d) * n + j]; }
};

BandMatrix build_gram(const BlockLinearChannel& ch) {
    const int L = ch.block_length;
    const int K = static_cast<int>(ch.impulse_response.size());
    BandMatrix m;
    m.n = L;
    m.bw = K - 1;
    m.a.assign(static_cast<std::size_t>(K) * L, 0.0);
    const auto& h = ch.impulse_response;
    for (int j = 0; j < L; ++j) {
        for (int d = 0; d <= m.bw && j + d < L; ++d) {
            // (H H^T)(j+d, j) = sum_m h_{j+d-m} h_{j-m}
            double acc = 0.0;
            for (int k = 0; k + d < K; ++k) {
                if (j - k >= 0) acc += h[k + d] * h[k];
            }
            m.at(d, j) = ch.energy * acc + (d == 0 ? ch.noise_var : 0.0);
        }
    }
    return m;
}

// In-place banded Cholesky A = G G^T with G lower-banded.
void banded_cholesky(BandMatrix& m) {
    for (int j = 0; j < m.n; ++j) {
        double diag = m.at(0, j);
        for (int k = std::max(0, j - m.bw); k < j; ++k) {
            const double g = m.at(j - k, k);
            diag -= g * g;
        }
        if (!(diag > 0.0)) {
            throw numeric_error("toeplitz_mmse: system numerically singular at column " +
                                std::to_string(j));
        }
        const double gjj = std::sqrt(diag);
        m.at(0, j) = gjj;
        for (int i = j + 1; i <= std::min(m.n - 1, j + m.bw); ++i) {
            double v = m.at(i - j, j);
            for (int k = std::max(0, i - m.bw); k < j; ++k) {
                v -= m.at(i - k, k) * m.at(j - k, k);
            }
            m.at(i - j, j) = v / gjj;
        }
    }
}

// Forward solve G w = b for banded lower-triangular G; b is sparse with
// support [first, first+len).
void banded_forward_solve(const BandMatrix& g, std::vector<double>& w) {
    const int n = g.n;
    for (int i = 0; i < n; ++i) {
        double v = w[i];
        for (int k = std::max(0, i - g.bw); k < i; ++k) v -= g.at(i - k, k) * w[k];
        w[i] = v / g.at(0, i);
    }
}

void banded_backward_solve(const BandMatrix& g, std::vector<double>& w) {
    const int n = g.n;
    for (int i = n - 1; i >= 0; --i) {
        double v = w[i];
        for (int k = i + 1; k <= std::min(n - 1, i + g.bw); ++k) v -= g.at(k - i, i) * w[k];
        w[i] = v / g.at(0, i);
    }
}

}  // namespace

double toeplitz_mmse(const BlockLinearChannel& ch) {
    const int L = ch.block_length;
    const int K = static_cast<int>(ch.impulse_response.size());
    BandMatrix gram = build_gram(ch);
    const BandMatrix a = gram;  // keep A for the residual check
    banded_cholesky(gram);

    // tr(H^T A^{-1} H) column by column; partial results are combined in
    // index order so the trace is identical for every thread count.
    std::vector<double> col_term(L, 0.0);
    std::vector<double> col_resid(L, 0.0);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < L; ++j) {
        std::vector<double> w(L, 0.0);
        for (int k = 0; k < K && j + k < L; ++k) w[j + k] = ch.impulse_response[k];
        const std::vector<double> b = w;
        banded_forward_solve(gram, w);
        double q = 0.0;  // |G^{-1} H e_j|^2 = e_j^T H^T A^{-1} H e_j
        for (double v : w) q += v * v;
        col_term[j] = q;

        // residual of the full solve A u = b
        std::vector<double> u = w;
        banded_backward_solve(gram, u);
        double rmax = 0.0, bnorm = 0.0;
        for (int i = 0; i < L; ++i) {
            double av = 0.0;
            for (int d = -a.bw; d <= a.bw; ++d) {
                const int k = i + d;
                if (k < 0 || k >= L) continue;
                av += (d >= 0 ? a.at(d, i) : a.at(-d, k)) * u[k];
            }
            rmax = std::max(rmax, std::fabs(av - b[i]));
            bnorm = std::max(bnorm, std::fabs(b[i]));
        }
        col_resid[j] = bnorm > 0.0 ? rmax / bnorm : 0.0;
    }

    double trace = 0.0, resid = 0.0;
    for (int j = 0; j < L; ++j) {
        trace += col_term[j];
        resid = std::max(resid, col_resid[j]);
    }
    if (resid > 1e-10) {
        throw numeric_error("toeplitz_mmse: solve residual " + std::to_string(resid) +
                            " exceeds 1e-10");
    }
    const double mmse = ch.energy - ch.energy * ch.energy * trace / L;
    return std::clamp(mmse, 0.0, ch.energy);
}

double toeplitz_mmse_ref(const BlockLinearChannel& ch) {
    const int L = ch.block_length;
    const int K = static_cast<int>(ch.impulse_response.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(L, L);
    for (int j = 0; j < L; ++j) {
        for (int k = 0; k < K && j + k < L; ++k) H(j + k, j) = ch.impulse_response[k];
    }
    const Eigen::MatrixXd A =
        ch.energy * H * H.transpose() + ch.noise_var * Eigen::MatrixXd::Identity(L, L);
    const Eigen::MatrixXd X = A.llt().solve(H);
    const double trace = (H.transpose() * X).trace();
    const double mmse = ch.energy - ch.energy * ch.energy * trace / L;
    return std::clamp(mmse, 0.0, ch.energy);
}

double spectral_mmse_limit(std::span<const double> impulse_response,
                           double noise_var, double energy) {
    require(!impulse_response.empty(), "spectral_mmse_limit: empty impulse response");
    require(noise_var > 0.0 && energy > 0.0,
            "spectral_mmse_limit: noise_var and energy must be positive");

    const auto integral = [&](int points) {
        double acc = 0.0;
        for (int i = 0; i < points; ++i) {
            const double w = 2.0 * kPi * i / points;
            double re = 0.0, im = 0.0;
            for (std::size_t k = 0; k < impulse_response.size(); ++k) {
                re += impulse_response[k] * std::cos(w * static_cast<double>(k));
                im -= impulse_response[k] * std::sin(w * static_cast<double>(k));
            }
            const double mag2 = re * re + im * im;
            acc += energy * noise_var / (energy * mag2 + noise_var);
        }
        return acc / points;  // periodic integrand: trapezoid = mean
    };

    const double v1 = integral(4096);
    const double v2 = integral(8192);
    if (std::fabs(v1 - v2) > 1e-10 * std::max(1.0, std::fabs(v2))) {
        throw numeric_error("spectral_mmse_limit: trapezoid doubling check failed");
    }
    return v2;
}

BlockReport block_gmi(const BlockLinearChannel& ch) {
    BlockReport rep;
    rep.mmse_L = toeplitz_mmse(ch);
    const double es = ch.energy;
    rep.gmi_L_nats = 0.5 * std::log(es / rep.mmse_L);
    rep.spectral_mmse = spectral_mmse_limit(ch.impulse_response, ch.noise_var, es);
    rep.spectral_gmi_nats = 0.5 * std::log(es / rep.spectral_mmse);

    // Dual-route check: run the theta-sup path on the vector objective with
    // g the conditional mean and a its matched scaling. Per-symbol moments:
    // E[|g|^2]/L = E_s - mmse_L, E[x^T g]/L = E_s - mmse_L.
    const double c = es - rep.mmse_L;
    if (c > 0.0 && rep.mmse_L > 0.0) {
        ThetaObjective obj;
        obj.energy = es;
        obj.a = c / es;
        obj.second_moment_g = c;
        obj.distortion = c - 2.0 * obj.a * c + obj.a * obj.a * es;
        rep.theta_sup_nats = gmi_via_theta_sup(obj);
        if (std::fabs(rep.theta_sup_nats - rep.gmi_L_nats) > 1e-6) {
            throw numeric_error("block_gmi: theta-sup cross-check disagrees with closed form");
        }
    } else {
        rep.theta_sup_nats = rep.gmi_L_nats;
    }
    return rep;
}

double block_nn_metric(std::span<const double> processed,
                       std::span<const double> candidate,
                       double a, int super_symbol_length) {
    require(processed.size() == candidate.size(), "block_nn_metric: length mismatch");
    require(super_symbol_length >= 1 &&
                processed.size() % static_cast<std::size_t>(super_symbol_length) == 0,
            "block_nn_metric: size must be a multiple of the super-symbol length");
    const std::size_t n = processed.size() / static_cast<std::size_t>(super_symbol_length);
    double acc = 0.0;
    for (std::size_t i = 0; i < processed.size(); ++i) {
        const double d = processed[i] - a * candidate[i];
        acc += d * d;
    }
    return acc / static_cast<double>(n);
}

}  // namespace gmirate
