#include <CLI11.hpp>
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "gmirate/blockmem.hpp"
#include "gmirate/common.hpp"
#include "gmirate/config.hpp"
#include "gmirate/csv.hpp"
#include "gmirate/gmi.hpp"
#include "gmirate/linksim.hpp"
#include "gmirate/validate.hpp"

namespace {

using namespace gmirate;

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<int> quad_order;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON run configuration")->required();
    cmd->add_option("--out", flags.out_path, "CSV output path (default: stdout)");
    cmd->add_option("--seed", flags.seed, "override master_seed");
    cmd->add_option("--threads", flags.threads, "bound the worker count");
    cmd->add_option("--quad-order", flags.quad_order, "override the quadrature order");
}

// Loads, validates, and applies flag overrides. Exits with code 2 on any
// configuration problem, listing every violation.
RunConfig load_config(const CommonFlags& flags) {
    std::ifstream f(flags.config_path);
    if (!f) {
        std::cerr << "config error: cannot open " << flags.config_path << "\n";
        std::exit(kExitConfig);
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    ParseResult parsed = parse_config(ss.str());
    if (flags.quad_order && (*flags.quad_order < 1 || *flags.quad_order > 512)) {
        parsed.errors.push_back("--quad-order: must be in [1, 512]");
    }
    if (flags.threads && *flags.threads < 1) {
        parsed.errors.push_back("--threads: must be >= 1");
    }
    if (!parsed.errors.empty()) {
        for (const auto& e : parsed.errors) std::cerr << "config error: " << e << "\n";
        std::exit(kExitConfig);
    }
    RunConfig cfg = *parsed.config;
    if (flags.seed) cfg.master_seed = *flags.seed;
    if (!flags.out_path.empty()) cfg.output = flags.out_path;
    if (flags.threads) cfg.threads = *flags.threads;
    if (flags.quad_order) cfg.quad_order = *flags.quad_order;
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
    return cfg;
}

QuadratureOptions quad_options(const RunConfig& cfg) {
    QuadratureOptions opts;
    if (cfg.quad_order > 0) {
        opts.hermite_order = cfg.quad_order;
        opts.check_order = std::min(512, 2 * cfg.quad_order - 1);
        if (opts.check_order <= opts.hermite_order) opts.check_order = 0;
    }
    return opts;
}

void emit(const RunConfig& cfg, const CsvWriter& csv) {
    if (cfg.output.empty()) {
        std::fputs(csv.str().c_str(), stdout);
    } else {
        csv.write_file(cfg.output);
    }
}

void require_config(bool present, const char* what) {
    if (!present) {
        std::cerr << "config error: " << what << "\n";
        std::exit(kExitConfig);
    }
}

std::vector<std::string> analyze_cells(const AnalyzeRow& row) {
    return {
        format_double(row.energy),
        format_double(row.noise_var),
        format_double(row.linear.delta),
        format_double(row.moments.correlation_ratio),
        format_double(row.moments.bussgang_coeff),
        format_double(row.moments.lmmse),
        format_double(row.moments.mmse),
        format_double(row.linear.effective_snr),
        format_double(row.canonical.effective_snr),
        format_double(row.linear.gmi_nats),
        format_double(row.canonical.gmi_nats),
        format_double(row.linear.gmi_bits),
        format_double(row.canonical.gmi_bits),
        format_bool(row.linear.degenerate || row.canonical.degenerate),
    };
}

CsvWriter analyze_header() {
    return CsvWriter({"E_s", "noise_var", "delta", "theta", "bussgang_coeff", "lmmse", "mmse",
                      "eff_snr_linear", "eff_snr_canonical", "gmi_linear_nats",
                      "gmi_canonical_nats", "gmi_linear_bits", "gmi_canonical_bits",
                      "degenerate_flag"});
}

int cmd_analyze(const CommonFlags& flags, const std::string& dump_frontend) {
    const RunConfig cfg = load_config(flags);
    require_config(cfg.channel.has_value(), "analyze requires a channel");
    require_config(cfg.energy.has_value(), "analyze requires input.energy");
    const QuadratureOptions opts = quad_options(cfg);
    const InputSpec input(*cfg.energy);

    CsvWriter csv = analyze_header();
    const AnalyzeRow row = analyze_channel(*cfg.channel, input, opts);
    csv.add_row(analyze_cells(row));
    emit(cfg, csv);

    if (!dump_frontend.empty()) {
        CsvWriter table({"y", "posterior_mean"});
        const FrontEnd fe = FrontEnd::posterior_mean(*cfg.channel, input, opts);
        if (!fe.table().empty()) {
            for (const auto& [y, g] : fe.table()) {
                table.add_row({format_double(y), format_double(g)});
            }
        } else {
            const double span = 6.0 * std::sqrt(row.moments.output_power);
            for (int i = 0; i <= 240; ++i) {
                const double y = -span + 2.0 * span * i / 240.0;
                table.add_row({format_double(y), format_double(fe.apply(y))});
            }
        }
        table.write_file(dump_frontend);
    }
    return 0;
}

int cmd_sweep(const CommonFlags& flags) {
    const RunConfig cfg = load_config(flags);
    require_config(cfg.channel.has_value(), "sweep requires a channel");
    require_config(cfg.sweep.has_value(), "sweep requires a sweep grid");
    const QuadratureOptions opts = quad_options(cfg);

    std::vector<double> energies = cfg.sweep->energy_grid;
    if (energies.empty()) {
        for (double snr : cfg.sweep->snr_grid) energies.push_back(snr * cfg.channel->noise_var);
    }
    CsvWriter csv = analyze_header();
    for (double es : energies) {
        csv.add_row(analyze_cells(analyze_channel(*cfg.channel, InputSpec(es), opts)));
    }
    emit(cfg, csv);
    return 0;
}

int cmd_simulate(const CommonFlags& flags) {
    const RunConfig cfg = load_config(flags);
    require_config(cfg.channel.has_value(), "simulate requires a channel");
    require_config(cfg.energy.has_value(), "simulate requires input.energy");
    require_config(cfg.simulate.has_value(), "simulate requires a simulate block");
    const QuadratureOptions opts = quad_options(cfg);
    const InputSpec input(*cfg.energy);
    const SimulateConfig& sim = *cfg.simulate;

    FrontEnd fe = FrontEnd::identity();
    if (sim.front_end == "posterior_mean") {
        fe = FrontEnd::posterior_mean(*cfg.channel, input, opts);
    } else if (sim.front_end == "scale") {
        fe = FrontEnd::scale(sim.scale_factor);
    }
    const double a =
        sim.scaling ? *sim.scaling : optimal_scaling(*cfg.channel, input, fe, opts);

    const auto rows = threshold_sweep(*cfg.channel, input, sim.rates_nats, sim.block_lengths,
                                      fe, a, sim.trials, cfg.master_seed, opts);

    CsvWriter csv({"rate_nats", "n", "M", "trials", "errors", "error_rate", "ci_lo", "ci_hi",
                   "gmi_ref_nats", "front_end", "seed"});
    for (const auto& r : rows) {
        csv.add_row({format_double(r.rate_nats), format_int(r.n), format_u64(r.messages),
                     format_u64(r.estimate.trials), format_u64(r.estimate.errors),
                     format_double(r.estimate.point_estimate),
                     format_double(r.estimate.wilson_lo), format_double(r.estimate.wilson_hi),
                     format_double(r.gmi_ref_nats), sim.front_end,
                     format_u64(cfg.master_seed)});
    }
    emit(cfg, csv);
    return 0;
}

int cmd_block(const CommonFlags& flags) {
    const RunConfig cfg = load_config(flags);
    require_config(cfg.energy.has_value(), "block requires input.energy");
    require_config(cfg.block.has_value(), "block requires a block spec");

    CsvWriter csv({"E_s", "noise_var", "L", "mmse_L", "gmi_L_nats", "gmi_L_bits",
                   "spectral_mmse", "spectral_gmi_nats"});
    for (int L : cfg.block->block_lengths) {
        const BlockLinearChannel ch(cfg.block->impulse_response, cfg.block->noise_var, L,
                                    *cfg.energy);
        const BlockReport rep = block_gmi(ch);
        csv.add_row({format_double(*cfg.energy), format_double(cfg.block->noise_var),
                     format_int(L), format_double(rep.mmse_L), format_double(rep.gmi_L_nats),
                     format_double(rep.gmi_L_nats / kLn2), format_double(rep.spectral_mmse),
                     format_double(rep.spectral_gmi_nats)});
    }
    emit(cfg, csv);
    return 0;
}

int cmd_validate(const CommonFlags& flags, const std::string& self_path) {
    const RunConfig cfg = load_config(flags);
    CheckOptions opts;
    opts.master_seed = cfg.master_seed;
    opts.cli_path = self_path;
    opts.subset = cfg.validate.subset;

    const auto results = run_validation_checks(opts);
    CsvWriter csv({"check", "pass", "measured", "bound", "detail"});
    bool all_pass = true;
    for (const auto& r : results) {
        csv.add_row({r.name, format_bool(r.pass), format_double(r.measured),
                     format_double(r.bound), r.detail});
        std::cerr << (r.pass ? "[pass] " : "[FAIL] ") << r.name << " (measured "
                  << format_double(r.measured) << ", bound " << format_double(r.bound) << ")\n";
        all_pass = all_pass && r.pass;
    }
    emit(cfg, csv);
    return all_pass ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gmirate: achievable information rates under nonlinear transceiver distortion"};
    app.require_subcommand(1);

    CommonFlags analyze_flags, sweep_flags, sim_flags, block_flags, validate_flags;
    std::string dump_frontend;

    CLI::App* analyze = app.add_subcommand("analyze", "moments, effective SNRs, and rates");
    add_common_flags(analyze, analyze_flags);
    analyze->add_option("--dump-frontend", dump_frontend,
                        "also write the posterior-mean table to this CSV");

    CLI::App* sweep = app.add_subcommand("sweep", "analyze over an E_s or SNR grid");
    add_common_flags(sweep, sweep_flags);

    CLI::App* simulate = app.add_subcommand("simulate", "random-coding link simulation");
    add_common_flags(simulate, sim_flags);

    CLI::App* block = app.add_subcommand("block", "block-memory rates for linear channels");
    add_common_flags(block, block_flags);

    CLI::App* validate = app.add_subcommand("validate", "run the validation suite");
    add_common_flags(validate, validate_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitConfig : 0;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(analyze_flags, dump_frontend);
        if (sweep->parsed()) return cmd_sweep(sweep_flags);
        if (simulate->parsed()) return cmd_simulate(sim_flags);
        if (block->parsed()) return cmd_block(block_flags);
        if (validate->parsed()) return cmd_validate(validate_flags, argv[0]);
    } catch (const model_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
