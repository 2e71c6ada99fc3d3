#include "gmirate/validate.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gmirate/blockmem.hpp"
#include "gmirate/common.hpp"
#include "gmirate/csv.hpp"
#include "gmirate/gmi.hpp"
#include "gmirate/linksim.hpp"
#include "gmirate/random.hpp"

namespace gmirate {

namespace {

struct Margin {
    double measured = 0.0;  // worst violation seen; <= bound means pass
    std::string where;

    void observe(double v, const std::string& w) {
        if (v > measured) {
            measured = v;
            where = w;
        }
    }
};

CheckResult make_result(const std::string& name, double measured, double bound,
                        const std::string& detail) {
    CheckResult r;
    r.name = name;
    r.measured = measured;
    r.bound = bound;
    r.pass = measured <= bound;
    r.detail = detail;
    return r;
}

// ---- criteria -------------------------------------------------------------

CheckResult check_awgn_restoration() {
    Margin m;
    for (double nv : {0.1, 1.0, 10.0}) {
        const AnalyzeRow row = analyze_channel(ChannelModel::awgn(nv), InputSpec(1.0));
        const double ref = 0.5 * std::log1p(1.0 / nv);
        m.observe(std::fabs(row.linear.gmi_nats - ref) / ref, "linear nv=" + format_double(nv));
        m.observe(std::fabs(row.canonical.gmi_nats - ref) / ref,
                  "canonical nv=" + format_double(nv));
    }
    return make_result("awgn_restoration", m.measured, 1e-9,
                       "max relative rate error at " + m.where);
}

CheckResult check_sign_quantizer_closed_form() {
    const AnalyzeRow row = analyze_channel(ChannelModel::sign_quantizer(0.0), InputSpec(1.0));
    const double two_over_pi = 2.0 / kPi;
    const double gmi_ref = -0.5 * std::log1p(-two_over_pi);
    const double err_ref = 1.0 - two_over_pi;
    Margin m;
    m.observe(std::fabs(row.linear.delta - two_over_pi), "delta");
    m.observe(std::fabs(row.canonical.gmi_nats - gmi_ref), "gmi");
    m.observe(std::fabs(row.moments.mmse - err_ref), "mmse");
    m.observe(std::fabs(row.moments.lmmse - err_ref), "lmmse");
    return make_result("sign_quantizer_closed_form", m.measured, 1e-9,
                       "worst closed-form deviation at " + m.where);
}

std::vector<std::pair<std::string, ChannelModel>> dominance_corpus(double nv) {
    return {
        {"hard_clip", ChannelModel::hard_clip(1.0, nv)},
        {"sign_quantizer", ChannelModel::sign_quantizer(nv)},
        {"uniform_quantizer", ChannelModel::uniform_quantizer(3, 0.5, nv)},
        {"cubic_limiter", ChannelModel::nonlinearity(ShapeId::cubic_limiter, nv, 1.0)},
    };
}

CheckResult check_canonical_dominance() {
    Margin m;
    for (double snr : {0.25, 1.0, 4.0, 16.0}) {
        const double nv = 1.0 / snr;
        for (const auto& [name, ch] : dominance_corpus(nv)) {
            const AnalyzeRow row = analyze_channel(ch, InputSpec(1.0));
            const std::string tag = name + " snr=" + format_double(snr);
            m.observe(row.linear.gmi_nats - row.canonical.gmi_nats - 1e-9, "dominance " + tag);
            if (name == "uniform_quantizer") {
                // strict processing gain for the multibit quantizer
                m.observe(1e-6 - (row.canonical.gmi_nats - row.linear.gmi_nats), "gap " + tag);
            }
        }
    }
    return make_result("canonical_dominance", m.measured, 0.0,
                       "worst margin at " + m.where);
}

CheckResult check_information_sandwich() {
    Margin m;
    const std::vector<std::pair<std::string, ChannelModel>> corpus = {
        {"sign nv=0", ChannelModel::sign_quantizer(0.0)},
        {"sign nv=0.5", ChannelModel::sign_quantizer(0.5)},
        {"uq3 nv=0.1", ChannelModel::uniform_quantizer(3, 0.5, 0.1)},
        {"uq3 nv=0.5", ChannelModel::uniform_quantizer(3, 0.5, 0.5)},
    };
    const InputSpec input(1.0);
    for (const auto& [name, ch] : corpus) {
        const AnalyzeRow row = analyze_channel(ch, input);
        const double mi = mutual_information_finite(ch, input);
        m.observe(row.canonical.gmi_nats - mi - 1e-9, "gmi<=mi " + name);
        m.observe(std::exp(-2.0 * mi) - row.moments.mmse - 1e-9, "fano " + name);
    }
    return make_result("information_sandwich", m.measured, 0.0, "worst margin at " + m.where);
}

CheckResult check_posterior_mean_supremum(std::uint64_t seed) {
    Margin m;
    const InputSpec input(1.0);
    const std::vector<std::pair<std::string, ChannelModel>> corpus = {
        {"sign nv=0", ChannelModel::sign_quantizer(0.0)},
        {"uq3 nv=0.1", ChannelModel::uniform_quantizer(3, 0.5, 0.1)},
    };
    RandomStream rng = RandomStream::substream(seed, 5);
    for (const auto& [name, ch] : corpus) {
        const MomentReport mom = compute_moments(ch, input);
        const FrontEnd pm = FrontEnd::posterior_mean(ch, input);
        const double theta2 = mom.cond_mean_power / input.energy;
        double scale = 0.0;
        for (const auto& [lvl, g] : pm.table()) scale = std::max(scale, std::fabs(g));
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<std::pair<double, double>> perturbed = pm.table();
            const double eps = 0.3 * scale * rng.uniform_pos();
            for (auto& [lvl, g] : perturbed) g += eps * (2.0 * rng.uniform() - 1.0);
            const auto g = [&perturbed](double y) {
                for (const auto& [lvl, v] : perturbed) {
                    if (lvl == y) return v;
                }
                return 0.0;
            };
            const FrontEndMoments fm = front_end_moments(ch, input, g);
            const double delta = fm.cross * fm.cross / (input.energy * fm.power);
            m.observe(delta - theta2 - 1e-9, name + " trial " + std::to_string(trial));
        }
    }
    return make_result("posterior_mean_supremum", m.measured, 0.0, "worst excess at " + m.where);
}

CheckResult check_theta_sup_equivalence() {
    Margin m;
    const InputSpec input(1.0);
    const std::vector<std::pair<std::string, ChannelModel>> corpus = {
        {"awgn", ChannelModel::awgn(1.0)},
        {"hard_clip", ChannelModel::hard_clip(1.0, 0.25)},
        {"sign nv=0", ChannelModel::sign_quantizer(0.0)},
        {"sign nv=0.5", ChannelModel::sign_quantizer(0.5)},
        {"uq3", ChannelModel::uniform_quantizer(3, 0.5, 0.1)},
        {"cubic_limiter", ChannelModel::nonlinearity(ShapeId::cubic_limiter, 0.25, 1.0)},
    };
    for (const auto& [name, ch] : corpus) {
        const MomentReport mom = compute_moments(ch, input);
        for (const auto kind : {FrontEnd::Kind::identity, FrontEnd::Kind::posterior_mean}) {
            const FrontEnd fe = kind == FrontEnd::Kind::identity
                                    ? FrontEnd::identity()
                                    : FrontEnd::posterior_mean(ch, input);
            const double a = optimal_scaling(ch, input, fe);
            const ThetaObjective obj = make_theta_objective(ch, input, fe, a);
            const double sup = gmi_via_theta_sup(obj);
            const double closed = gmi_from_delta(delta_for_front_end(mom, kind)).gmi_nats;
            const std::string tag =
                name + (kind == FrontEnd::Kind::identity ? " identity" : " canonical");
            m.observe(std::fabs(sup - closed), tag);
        }
    }
    // Block channel dual route.
    const BlockLinearChannel bch({1.0, 0.5}, 1.0, 8, 1.0);
    const BlockReport rep = block_gmi(bch);
    m.observe(std::fabs(rep.theta_sup_nats - rep.gmi_L_nats), "block h=[1,0.5]");
    return make_result("theta_sup_equivalence", m.measured, 1e-6, "worst gap at " + m.where);
}

CheckResult check_block_memory_convergence() {
    Margin m;
    const BlockLinearChannel ch64({1.0, 0.5}, 1.0, 64, 1.0);
    const double mmse64 = toeplitz_mmse(ch64);
    const double limit = spectral_mmse_limit(ch64.impulse_response, 1.0, 1.0);
    const double rel = std::fabs(mmse64 - limit) / limit;
    m.observe(rel - 0.01, "h=[1,0.5] L=64 vs spectral");

    const double awgn_rate = 0.5 * kLn2;  // E_s = nv = 1
    for (int L : {1, 2, 3, 4, 8, 16, 32, 64, 128, 256}) {
        const BlockLinearChannel flat({1.0}, 1.0, L, 1.0);
        const BlockReport rep = block_gmi(flat);
        m.observe(std::fabs(rep.gmi_L_nats - awgn_rate) - 1e-12, "h=[1] L=" + std::to_string(L));
    }
    return make_result("block_memory_convergence", m.measured, 0.0,
                       "worst margin at " + m.where + "; mmse64=" + format_double(mmse64) +
                           " limit=" + format_double(limit));
}

CheckResult check_achievability_threshold(std::uint64_t seed) {
    const ChannelModel ch = ChannelModel::sign_quantizer(0.0);
    const InputSpec input(1.0);
    const AnalyzeRow row = analyze_channel(ch, input);
    const FrontEnd fe = FrontEnd::posterior_mean(ch, input);
    const double a = row.canonical.a_opt;
    const int trials = 2000;
    const std::vector<int> ns{16, 32, 64};

    auto run_at = [&](double rate, int n) {
        const TrialPlan plan =
            make_trial_plan(n, rate, trials, seed, fe, a, ch, input);
        return run_trials(plan);
    };

    std::string detail;
    Margin m;
    const double below = 0.8 * row.canonical.gmi_nats;
    std::vector<ErrorRateEstimate> eb;
    for (int n : ns) eb.push_back(run_at(below, n));
    detail += "below:";
    for (std::size_t i = 0; i < ns.size(); ++i) {
        detail += " p(" + std::to_string(ns[i]) + ")=" + format_double(eb[i].point_estimate);
    }
    m.observe(eb[1].point_estimate - eb[0].point_estimate, "p32 < p16 strict");
    m.observe(eb[2].point_estimate - eb[1].point_estimate, "p64 < p32 strict");
    m.observe(eb[2].wilson_hi - eb[0].wilson_lo, "wilson separation 16 vs 64");

    const double above = 1.3 * row.canonical.gmi_nats;
    std::vector<ErrorRateEstimate> ea;
    for (int n : ns) ea.push_back(run_at(above, n));
    detail += "; above:";
    for (std::size_t i = 0; i < ns.size(); ++i) {
        detail += " p(" + std::to_string(ns[i]) + ")=" + format_double(ea[i].point_estimate);
    }
    m.observe(ea[0].point_estimate - ea[1].point_estimate, "p32 >= p16");
    m.observe(ea[1].point_estimate - ea[2].point_estimate, "p64 >= p32");
    m.observe(ea[0].point_estimate - ea[2].point_estimate + 1e-12, "p64 > p16 strict");
    m.observe(0.9 - ea[2].point_estimate, "p64 toward 1");

    return make_result("achievability_threshold", m.measured, 0.0,
                       detail + "; worst margin at " + m.where);
}

CheckResult check_bussgang_stationarity(std::uint64_t seed) {
    RandomStream rng = RandomStream::substream(seed, 9);
    const ProcessSpec process(0.9, 1000000, 1.0);
    const StationarityReport rep = bussgang_stationarity_check(
        ChannelModel::hard_clip(1.0, 0.0), process, 10, rng);
    return make_result("bussgang_stationarity", rep.max_deviation_ratio, 4.0,
                       "max |deviation|/stderr over lags 1..10, max deviation " +
                           format_double(rep.max_abs_deviation));
}

std::string simulate_config_text(std::uint64_t seed) {
    std::ostringstream os;
    os << "{\n"
       << "  \"channel\": {\"kind\": \"sign_quantizer\", \"noise_var\": 0.0},\n"
       << "  \"input\": {\"energy\": 1.0},\n"
       << "  \"simulate\": {\"rates_nats\": [0.3, 0.55], \"block_lengths\": [16, 24],\n"
       << "    \"trials\": 400, \"front_end\": \"posterior_mean\"},\n"
       << "  \"master_seed\": " << seed << "\n"
       << "}\n";
    return os.str();
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

CheckResult check_simulate_determinism(const CheckOptions& opts) {
    if (!opts.cli_path.empty()) {
        namespace fs = std::filesystem;
        const fs::path dir =
            fs::temp_directory_path() / ("gmirate_det_" + std::to_string(opts.master_seed));
        fs::create_directories(dir);
        const fs::path cfg = dir / "sim.json";
        {
            std::ofstream f(cfg);
            f << simulate_config_text(opts.master_seed);
        }
        const fs::path out1 = dir / "run1.csv";
        const fs::path out2 = dir / "run2.csv";
        const std::string base = "\"" + opts.cli_path + "\" simulate --config \"" +
                                 cfg.string() + "\"";
        const int rc1 = std::system(
            (base + " --threads 1 --out \"" + out1.string() + "\" > /dev/null 2>&1").c_str());
        const int rc2 = std::system(
            (base + " --threads 4 --out \"" + out2.string() + "\" > /dev/null 2>&1").c_str());
        const std::string c1 = read_file(out1);
        const std::string c2 = read_file(out2);
        const bool pass = rc1 == 0 && rc2 == 0 && !c1.empty() && c1 == c2;
        CheckResult r = make_result("simulate_determinism", pass ? 0.0 : 1.0, 0.0,
                                    "CLI simulate with --threads 1 vs 4, byte compare");
        r.pass = pass;
        return r;
    }

    // In-process variant: vary the OpenMP thread count directly.
    const ChannelModel ch = ChannelModel::sign_quantizer(0.0);
    const InputSpec input(1.0);
    const FrontEnd fe = FrontEnd::posterior_mean(ch, input);
    const double a = optimal_scaling(ch, input, fe);
    bool pass = true;
    for (double rate : {0.3, 0.55}) {
        for (int n : {16, 24}) {
            const TrialPlan plan = make_trial_plan(n, rate, 400, opts.master_seed, fe, a, ch, input);
            const int saved = omp_get_max_threads();
            omp_set_num_threads(1);
            const ErrorRateEstimate e1 = run_trials(plan);
            omp_set_num_threads(4);
            const ErrorRateEstimate e2 = run_trials(plan);
            omp_set_num_threads(saved);
            const ErrorRateEstimate es = run_trials_ref(plan);
            pass = pass && e1 == e2 && e1 == es;
        }
    }
    CheckResult r = make_result("simulate_determinism", pass ? 0.0 : 1.0, 0.0,
                                "run_trials with 1 vs 4 threads vs serial reference");
    r.pass = pass;
    return r;
}

// ---- cheap extra invariants ------------------------------------------------

CheckResult check_likelihood_normalization() {
    Margin m;
    const std::vector<std::pair<std::string, ChannelModel>> corpus = {
        {"sign nv=1", ChannelModel::sign_quantizer(1.0)},
        {"uq3 nv=0.1", ChannelModel::uniform_quantizer(3, 0.5, 0.1)},
        {"uq4 nv=0", ChannelModel::uniform_quantizer(4, 0.3, 0.0)},
    };
    for (const auto& [name, ch] : corpus) {
        const auto levels = ch.output_levels();
        for (int i = 0; i <= 100; ++i) {
            const double x = -6.0 + 12.0 * i / 100.0;
            double total = 0.0;
            for (double lvl : levels) total += likelihood(ch, lvl, x);
            m.observe(std::fabs(total - 1.0), name + " x=" + format_double(x));
        }
    }
    return make_result("likelihood_normalization", m.measured, 1e-12, "worst at " + m.where);
}

CheckResult check_mmse_le_lmmse() {
    Margin m;
    for (double es : {0.25, 1.0, 4.0}) {
        for (const auto& [name, ch] : dominance_corpus(0.25)) {
            const MomentReport r = compute_moments(ch, InputSpec(es));
            m.observe(r.mmse - r.lmmse - 1e-9, name + " es=" + format_double(es));
            m.observe(r.lmmse - es, name + " lmmse<=es");
        }
    }
    return make_result("mmse_le_lmmse", m.measured, 0.0, "worst margin at " + m.where);
}

CheckResult check_clip_gain_closed_form() {
    Margin m;
    for (double es : {0.5, 1.0, 2.0}) {
        for (double clip : {0.5, 1.0, 2.0}) {
            const MomentReport r =
                compute_moments(ChannelModel::hard_clip(clip, 0.1), InputSpec(es));
            const double ref = std::erf(clip / std::sqrt(2.0 * es));
            m.observe(std::fabs(r.bussgang_coeff - ref),
                      "es=" + format_double(es) + " clip=" + format_double(clip));
        }
    }
    return make_result("clip_gain_closed_form", m.measured, 1e-9, "worst at " + m.where);
}

CheckResult check_gmi_ordering() {
    Margin m;
    for (double snr : {0.25, 1.0, 4.0}) {
        for (const auto& [name, ch] : dominance_corpus(1.0 / snr)) {
            const AnalyzeRow row = analyze_channel(ch, InputSpec(1.0));
            for (double c : {0.5, -2.0, 10.0}) {
                // scaling the output leaves delta unchanged
                const FrontEndMoments fm =
                    front_end_moments(ch, InputSpec(1.0), FrontEnd::scale(c));
                const double ds = fm.cross * fm.cross / fm.power;
                m.observe(std::fabs(ds - row.linear.delta) - 1e-9,
                          name + " scale c=" + format_double(c));
            }
            m.observe(row.linear.gmi_nats - row.canonical.gmi_nats - 1e-9,
                      name + " snr=" + format_double(snr));
        }
    }
    return make_result("gmi_ordering", m.measured, 0.0, "worst at " + m.where);
}

CheckResult check_residual_uncorrelated() {
    Margin m;
    const std::vector<std::pair<std::string, ChannelModel>> corpus = {
        {"awgn", ChannelModel::awgn(1.0)},
        {"hard_clip", ChannelModel::hard_clip(1.0, 0.1)},
        {"sign nv=0", ChannelModel::sign_quantizer(0.0)},
    };
    for (const auto& [name, ch] : corpus) {
        m.observe(std::fabs(bussgang_residual_check(ch, InputSpec(1.0))), name);
    }
    return make_result("bussgang_residual", m.measured, 1e-9, "worst at " + m.where);
}

CheckResult check_stationarity_corpus(std::uint64_t seed) {
    Margin m;
    const std::vector<std::pair<std::string, ChannelModel>> corpus = {
        {"hard_clip", ChannelModel::hard_clip(1.0, 0.0)},
        {"sign", ChannelModel::sign_quantizer(0.0)},
        {"cubic_limiter", ChannelModel::nonlinearity(ShapeId::cubic_limiter, 0.0, 1.0)},
    };
    std::uint64_t idx = 100;
    for (double rho : {0.5, 0.9}) {
        for (const auto& [name, ch] : corpus) {
            RandomStream rng = RandomStream::substream(seed, idx++);
            const StationarityReport rep =
                bussgang_stationarity_check(ch, ProcessSpec(rho, 400000, 1.0), 10, rng);
            m.observe(rep.max_deviation_ratio - 4.0, name + " rho=" + format_double(rho));
        }
    }
    return make_result("stationarity_corpus", m.measured, 0.0, "worst ratio margin at " + m.where);
}

}  // namespace

std::vector<CheckResult> run_validation_checks(const CheckOptions& opts) {
    std::vector<CheckResult> all;
    const auto wanted = [&](const std::string& name) {
        if (opts.subset.empty()) return true;
        return std::find(opts.subset.begin(), opts.subset.end(), name) != opts.subset.end();
    };

    if (wanted("awgn_restoration")) all.push_back(check_awgn_restoration());
    if (wanted("sign_quantizer_closed_form")) all.push_back(check_sign_quantizer_closed_form());
    if (wanted("canonical_dominance")) all.push_back(check_canonical_dominance());
    if (wanted("information_sandwich")) all.push_back(check_information_sandwich());
    if (wanted("posterior_mean_supremum")) {
        all.push_back(check_posterior_mean_supremum(opts.master_seed));
    }
    if (wanted("theta_sup_equivalence")) all.push_back(check_theta_sup_equivalence());
    if (wanted("block_memory_convergence")) all.push_back(check_block_memory_convergence());
    if (wanted("achievability_threshold")) {
        all.push_back(check_achievability_threshold(opts.master_seed));
    }
    if (wanted("bussgang_stationarity")) all.push_back(check_bussgang_stationarity(opts.master_seed));
    if (wanted("simulate_determinism")) all.push_back(check_simulate_determinism(opts));

    if (opts.extras) {
        if (wanted("likelihood_normalization")) all.push_back(check_likelihood_normalization());
        if (wanted("mmse_le_lmmse")) all.push_back(check_mmse_le_lmmse());
        if (wanted("clip_gain_closed_form")) all.push_back(check_clip_gain_closed_form());
        if (wanted("gmi_ordering")) all.push_back(check_gmi_ordering());
        if (wanted("bussgang_residual")) all.push_back(check_residual_uncorrelated());
        if (wanted("stationarity_corpus")) all.push_back(check_stationarity_corpus(opts.master_seed));
    }
    return all;
}

}  // namespace gmirate
