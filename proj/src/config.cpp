#include "gmirate/config.hpp"

#include <json.hpp>

#include <cmath>
#include <set>

namespace gmirate {

namespace {

using nlohmann::json;

struct Ctx {
    std::vector<std::string>& errors;

    void fail(const std::string& msg) { errors.push_back(msg); }
};

void check_keys(const json& j, const std::string& path,
                const std::set<std::string>& allowed, Ctx& ctx) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            ctx.fail(path + ": unknown key '" + it.key() + "'");
        }
    }
}

bool want_object(const json& j, const std::string& path, Ctx& ctx) {
    if (!j.is_object()) {
        ctx.fail(path + ": must be an object");
        return false;
    }
    return true;
}

std::optional<double> get_number(const json& j, const std::string& path,
                                 const std::string& key, bool required, Ctx& ctx) {
    if (!j.contains(key)) {
        if (required) ctx.fail(path + "." + key + ": required");
        return std::nullopt;
    }
    if (!j[key].is_number()) {
        ctx.fail(path + "." + key + ": must be a number");
        return std::nullopt;
    }
    return j[key].get<double>();
}

std::optional<int> get_int(const json& j, const std::string& path,
                           const std::string& key, bool required, Ctx& ctx) {
    if (!j.contains(key)) {
        if (required) ctx.fail(path + "." + key + ": required");
        return std::nullopt;
    }
    if (!j[key].is_number_integer()) {
        ctx.fail(path + "." + key + ": must be an integer");
        return std::nullopt;
    }
    return j[key].get<int>();
}

std::optional<std::string> get_string(const json& j, const std::string& path,
                                      const std::string& key, bool required, Ctx& ctx) {
    if (!j.contains(key)) {
        if (required) ctx.fail(path + "." + key + ": required");
        return std::nullopt;
    }
    if (!j[key].is_string()) {
        ctx.fail(path + "." + key + ": must be a string");
        return std::nullopt;
    }
    return j[key].get<std::string>();
}

std::vector<double> get_number_array(const json& j, const std::string& path,
                                     const std::string& key, Ctx& ctx) {
    std::vector<double> out;
    if (!j.contains(key)) return out;
    if (!j[key].is_array() || j[key].empty()) {
        ctx.fail(path + "." + key + ": must be a nonempty array of numbers");
        return out;
    }
    for (const auto& v : j[key]) {
        if (!v.is_number()) {
            ctx.fail(path + "." + key + ": must contain only numbers");
            return {};
        }
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<int> get_int_array(const json& j, const std::string& path,
                               const std::string& key, Ctx& ctx) {
    std::vector<int> out;
    if (!j.contains(key)) return out;
    if (!j[key].is_array() || j[key].empty()) {
        ctx.fail(path + "." + key + ": must be a nonempty array of integers");
        return out;
    }
    for (const auto& v : j[key]) {
        if (!v.is_number_integer()) {
            ctx.fail(path + "." + key + ": must contain only integers");
            return {};
        }
        out.push_back(v.get<int>());
    }
    return out;
}

std::optional<ChannelModel> parse_channel(const json& j, Ctx& ctx) {
    if (!want_object(j, "channel", ctx)) return std::nullopt;
    const auto kind = get_string(j, "channel", "kind", true, ctx);
    if (!kind) return std::nullopt;

    const std::size_t before = ctx.errors.size();
    std::optional<ChannelModel> ch;
    if (*kind == "awgn") {
        check_keys(j, "channel", {"kind", "noise_var"}, ctx);
        auto nv = get_number(j, "channel", "noise_var", true, ctx);
        if (nv && *nv < 0.0) ctx.fail("channel.noise_var: must be >= 0");
        if (ctx.errors.size() == before) ch = ChannelModel::awgn(*nv);
    } else if (*kind == "hard_clip") {
        check_keys(j, "channel", {"kind", "clip_level", "noise_var"}, ctx);
        auto cl = get_number(j, "channel", "clip_level", true, ctx);
        auto nv = get_number(j, "channel", "noise_var", true, ctx);
        if (cl && !(*cl > 0.0)) ctx.fail("channel.clip_level: must be > 0");
        if (nv && *nv < 0.0) ctx.fail("channel.noise_var: must be >= 0");
        if (ctx.errors.size() == before) ch = ChannelModel::hard_clip(*cl, *nv);
    } else if (*kind == "sign_quantizer") {
        check_keys(j, "channel", {"kind", "noise_var"}, ctx);
        auto nv = get_number(j, "channel", "noise_var", true, ctx);
        if (nv && *nv < 0.0) ctx.fail("channel.noise_var: must be >= 0");
        if (ctx.errors.size() == before) ch = ChannelModel::sign_quantizer(*nv);
    } else if (*kind == "uniform_quantizer") {
        check_keys(j, "channel", {"kind", "bits", "step", "noise_var"}, ctx);
        auto bits = get_int(j, "channel", "bits", true, ctx);
        auto step = get_number(j, "channel", "step", true, ctx);
        auto nv = get_number(j, "channel", "noise_var", true, ctx);
        if (bits && (*bits < 1 || *bits > 16)) ctx.fail("channel.bits: must be in [1, 16]");
        if (step && !(*step > 0.0)) ctx.fail("channel.step: must be > 0");
        if (nv && *nv < 0.0) ctx.fail("channel.noise_var: must be >= 0");
        if (ctx.errors.size() == before) ch = ChannelModel::uniform_quantizer(*bits, *step, *nv);
    } else if (*kind == "nonlinearity") {
        check_keys(j, "channel", {"kind", "shape", "noise_var", "limit"}, ctx);
        auto shape = get_string(j, "channel", "shape", true, ctx);
        auto nv = get_number(j, "channel", "noise_var", true, ctx);
        if (nv && *nv < 0.0) ctx.fail("channel.noise_var: must be >= 0");
        ShapeId id = ShapeId::identity;
        bool needs_limit = false;
        if (shape) {
            if (*shape == "identity") {
                id = ShapeId::identity;
            } else if (*shape == "cube") {
                id = ShapeId::cube;
            } else if (*shape == "abs") {
                id = ShapeId::abs_value;
            } else if (*shape == "hard_clip") {
                id = ShapeId::hard_clip;
                needs_limit = true;
            } else if (*shape == "cubic_limiter") {
                id = ShapeId::cubic_limiter;
                needs_limit = true;
            } else {
                ctx.fail("channel.shape: unknown shape '" + *shape + "'");
            }
        }
        auto limit = get_number(j, "channel", "limit", needs_limit, ctx);
        if (needs_limit && limit && !(*limit > 0.0)) ctx.fail("channel.limit: must be > 0");
        if (!needs_limit && j.contains("limit")) {
            ctx.fail("channel.limit: only valid for saturating shapes");
        }
        if (ctx.errors.size() == before) {
            ch = ChannelModel::nonlinearity(id, *nv, limit.value_or(0.0));
        }
    } else {
        ctx.fail("channel.kind: unknown kind '" + *kind + "'");
    }
    return ch;
}

}  // namespace

ParseResult parse_config(const std::string& json_text) {
    ParseResult result;
    Ctx ctx{result.errors};

    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        ctx.fail(std::string("syntax error: ") + e.what());
        return result;
    }
    if (!j.is_object()) {
        ctx.fail("top level: must be an object");
        return result;
    }

    check_keys(j,
               "config",
               {"channel", "input", "sweep", "simulate", "block", "validate", "output",
                "master_seed", "quad_order", "threads"},
               ctx);

    RunConfig cfg;

    if (j.contains("channel")) cfg.channel = parse_channel(j["channel"], ctx);

    if (j.contains("input") && want_object(j["input"], "input", ctx)) {
        check_keys(j["input"], "input", {"energy"}, ctx);
        auto e = get_number(j["input"], "input", "energy", true, ctx);
        if (e) {
            if (!(std::isfinite(*e) && *e > 0.0)) {
                ctx.fail("input.energy: must be finite and > 0");
            } else {
                cfg.energy = *e;
            }
        }
    }

    if (j.contains("sweep") && want_object(j["sweep"], "sweep", ctx)) {
        check_keys(j["sweep"], "sweep", {"energy_grid", "snr_grid"}, ctx);
        SweepConfig sw;
        sw.energy_grid = get_number_array(j["sweep"], "sweep", "energy_grid", ctx);
        sw.snr_grid = get_number_array(j["sweep"], "sweep", "snr_grid", ctx);
        if (sw.energy_grid.empty() == sw.snr_grid.empty()) {
            ctx.fail("sweep: exactly one of energy_grid or snr_grid is required");
        }
        for (double v : sw.energy_grid) {
            if (!(v > 0.0)) ctx.fail("sweep.energy_grid: entries must be > 0");
        }
        for (double v : sw.snr_grid) {
            if (!(v > 0.0)) ctx.fail("sweep.snr_grid: entries must be > 0");
        }
        if (!sw.snr_grid.empty() && cfg.channel && cfg.channel->noise_var <= 0.0) {
            ctx.fail("sweep.snr_grid: channel.noise_var must be > 0 to sweep SNR");
        }
        cfg.sweep = std::move(sw);
    }

    if (j.contains("simulate") && want_object(j["simulate"], "simulate", ctx)) {
        const json& s = j["simulate"];
        check_keys(s, "simulate",
                   {"rates_nats", "block_lengths", "trials", "front_end", "scale_factor",
                    "scaling"},
                   ctx);
        SimulateConfig sim;
        sim.rates_nats = get_number_array(s, "simulate", "rates_nats", ctx);
        if (sim.rates_nats.empty()) ctx.fail("simulate.rates_nats: required");
        for (double r : sim.rates_nats) {
            if (!(r > 0.0)) ctx.fail("simulate.rates_nats: entries must be > 0");
        }
        sim.block_lengths = get_int_array(s, "simulate", "block_lengths", ctx);
        if (sim.block_lengths.empty()) ctx.fail("simulate.block_lengths: required");
        for (int n : sim.block_lengths) {
            if (n < 1) ctx.fail("simulate.block_lengths: entries must be >= 1");
        }
        if (auto t = get_int(s, "simulate", "trials", false, ctx)) {
            if (*t < 1) ctx.fail("simulate.trials: must be >= 1");
            sim.trials = *t;
        }
        if (auto fe = get_string(s, "simulate", "front_end", false, ctx)) {
            if (*fe != "identity" && *fe != "posterior_mean" && *fe != "scale") {
                ctx.fail("simulate.front_end: must be identity, posterior_mean, or scale");
            }
            sim.front_end = *fe;
        }
        if (auto sf = get_number(s, "simulate", "scale_factor", false, ctx)) {
            if (*sf == 0.0) ctx.fail("simulate.scale_factor: must be nonzero");
            sim.scale_factor = *sf;
        }
        if (s.contains("scaling")) {
            if (s["scaling"].is_number()) {
                sim.scaling = s["scaling"].get<double>();
            } else if (s["scaling"].is_string() && s["scaling"].get<std::string>() == "optimal") {
                sim.scaling.reset();
            } else {
                ctx.fail("simulate.scaling: must be a number or \"optimal\"");
            }
        }
        cfg.simulate = std::move(sim);
    }

    if (j.contains("block") && want_object(j["block"], "block", ctx)) {
        const json& b = j["block"];
        check_keys(b, "block", {"impulse_response", "noise_var", "block_lengths"}, ctx);
        BlockConfig bc;
        bc.impulse_response = get_number_array(b, "block", "impulse_response", ctx);
        if (bc.impulse_response.empty()) {
            ctx.fail("block.impulse_response: required");
        } else {
            bool nonzero = false;
            for (double h : bc.impulse_response) nonzero = nonzero || h != 0.0;
            if (!nonzero) ctx.fail("block.impulse_response: must not be all zero");
        }
        if (auto nv = get_number(b, "block", "noise_var", true, ctx)) {
            if (!(*nv > 0.0)) ctx.fail("block.noise_var: must be > 0");
            bc.noise_var = *nv;
        }
        bc.block_lengths = get_int_array(b, "block", "block_lengths", ctx);
        if (bc.block_lengths.empty()) ctx.fail("block.block_lengths: required");
        for (int L : bc.block_lengths) {
            if (L < 1 || L > 4096) ctx.fail("block.block_lengths: entries must be in [1, 4096]");
            if (L >= 1 && static_cast<std::size_t>(L) < bc.impulse_response.size()) {
                ctx.fail("block.block_lengths: entries must be >= the impulse response length");
            }
        }
        cfg.block = std::move(bc);
    }

    if (j.contains("validate") && want_object(j["validate"], "validate", ctx)) {
        check_keys(j["validate"], "validate", {"subset"}, ctx);
        if (j["validate"].contains("subset")) {
            const json& sub = j["validate"]["subset"];
            if (!sub.is_array()) {
                ctx.fail("validate.subset: must be an array of strings");
            } else {
                for (const auto& v : sub) {
                    if (!v.is_string()) {
                        ctx.fail("validate.subset: must contain only strings");
                        break;
                    }
                    cfg.validate.subset.push_back(v.get<std::string>());
                }
            }
        }
    }

    if (j.contains("output")) {
        if (!j["output"].is_string()) {
            ctx.fail("output: must be a string");
        } else {
            cfg.output = j["output"].get<std::string>();
        }
    }

    if (j.contains("master_seed")) {
        if (!j["master_seed"].is_number_unsigned() && !j["master_seed"].is_number_integer()) {
            ctx.fail("master_seed: must be a nonnegative integer");
        } else if (j["master_seed"].is_number_integer() && j["master_seed"].get<long long>() < 0) {
            ctx.fail("master_seed: must be a nonnegative integer");
        } else {
            cfg.master_seed = j["master_seed"].get<std::uint64_t>();
        }
    }

    if (auto q = get_int(j, "config", "quad_order", false, ctx)) {
        if (*q < 1 || *q > 512) {
            ctx.fail("quad_order: must be in [1, 512]");
        } else {
            cfg.quad_order = *q;
        }
    }

    if (auto t = get_int(j, "config", "threads", false, ctx)) {
        if (*t < 1) {
            ctx.fail("threads: must be >= 1");
        } else {
            cfg.threads = *t;
        }
    }

    if (result.errors.empty()) result.config = std::move(cfg);
    return result;
}

}  // namespace gmirate
