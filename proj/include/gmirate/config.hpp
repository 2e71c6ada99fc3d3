#ifndef GMIRATE_CONFIG_HPP
#define GMIRATE_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmirate/channels.hpp"

namespace gmirate {

struct SweepConfig {
    std::vector<double> energy_grid;  // exactly one of the two grids is set
    std::vector<double> snr_grid;     // E_s = snr * channel.noise_var
};

struct SimulateConfig {
    std::vector<double> rates_nats;
    std::vector<int> block_lengths;
    int trials = 2000;
    std::string front_end = "identity";  // identity | posterior_mean | scale
    double scale_factor = 1.0;           // used when front_end == "scale"
    std::optional<double> scaling;       // decoder a; empty = optimal
};

struct BlockConfig {
    std::vector<double> impulse_response;
    double noise_var = 1.0;
    std::vector<int> block_lengths;
};

struct ValidateConfig {
    std::vector<std::string> subset;  // empty = run every check
};

// Parsed and validated run configuration. Unknown keys are rejected and
// all numeric ranges are checked before any computation starts.
struct RunConfig {
    std::optional<ChannelModel> channel;
    std::optional<double> energy;
    std::optional<SweepConfig> sweep;
    std::optional<SimulateConfig> simulate;
    std::optional<BlockConfig> block;
    ValidateConfig validate;
    std::string output;  // empty = stdout
    std::uint64_t master_seed = 20260809;
    int quad_order = 0;  // 0 = library default
    int threads = 0;     // 0 = runtime default
};

struct ParseResult {
    std::optional<RunConfig> config;
    std::vector<std::string> errors;  // field-level messages, all violations

    bool ok() const { return errors.empty(); }
};

ParseResult parse_config(const std::string& json_text);

}  // namespace gmirate

#endif
