#ifndef VESAR_CONFIG_HPP
#define VESAR_CONFIG_HPP

// Scenario files: one `key = value` per line, dotted section names, `#`
// comments, grids as comma-separated lists. Example:
//
//   scenario.id = weekly
//   seed = 17
//   units = 100000
//   unit.transmission_mode = linear_hazard
//   policy.kind = scheduled
//   policy.interval_k = 7
//   sweep.parameter = policy.interval_k
//   sweep.grid = 1,2,3,5,7,10,14

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vesar/error.hpp"
#include "vesar/estimands.hpp"
#include "vesar/infer.hpp"
#include "vesar/observe.hpp"
#include "vesar/simcore.hpp"

namespace vesar {

enum class SeMethod { Delta, Bootstrap };

struct SweepAxis {
    std::string parameter;
    std::vector<double> grid;
};

using KeyValues = std::map<std::string, std::string>;

struct ScenarioConfig {
    std::string id = "scenario";
    UnitConfig unit;
    TestingPolicy policy;
    StudyDesignFilter filter = StudyDesignFilter::maximal();
    SarPooling pooling = SarPooling::Pooled;
    std::int64_t units_per_arm = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::optional<SweepAxis> sweep;
    std::vector<double> target_ve_grid;
    std::vector<double> delta_grid;
    std::vector<double> k_grid;
    std::string output;
    SeMethod se_method = SeMethod::Delta;
    int bootstrap_reps = 200;

    // Raw keys the config was built from; sweeps re-derive the config from
    // these with one key replaced.
    KeyValues source;
};

namespace config_detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    return out;
}

inline std::int64_t parse_int(const std::string& key, const std::string& v)
{
    std::int64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        // Accept integral values written in exponent form, e.g. 1e6.
        const double d = parse_double(key, v);
        if (d != static_cast<double>(static_cast<std::int64_t>(d))) {
            throw ConfigError(key + ": expected an integer, got '" + v + "'");
        }
        return static_cast<std::int64_t>(d);
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_double(key, trim(item)));
    }
    if (out.empty()) {
        throw ConfigError(key + ": grid must not be empty");
    }
    return out;
}

template <typename Enum>
Enum parse_enum(const std::string& key, const std::string& v,
                std::initializer_list<std::pair<std::string_view, Enum>> names)
{
    std::string allowed;
    for (const auto& [name, value] : names) {
        if (v == name) {
            return value;
        }
        allowed += allowed.empty() ? "" : "|";
        allowed += name;
    }
    throw ConfigError(key + ": expected one of " + allowed + ", got '" + v + "'");
}

class Reader {
public:
    explicit Reader(const KeyValues& kv) : kv_(kv) {}

    const std::string* raw(const std::string& key)
    {
        used_.push_back(key);
        const auto it = kv_.find(key);
        return it == kv_.end() ? nullptr : &it->second;
    }
    double number(const std::string& key, double fallback)
    {
        const auto* v = raw(key);
        return v ? parse_double(key, *v) : fallback;
    }
    std::optional<double> optional_number(const std::string& key)
    {
        const auto* v = raw(key);
        if (!v || *v == "none") {
            return std::nullopt;
        }
        return parse_double(key, *v);
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback)
    {
        const auto* v = raw(key);
        return v ? parse_int(key, *v) : fallback;
    }
    bool boolean(const std::string& key, bool fallback)
    {
        const auto* v = raw(key);
        return v ? parse_bool(key, *v) : fallback;
    }
    std::string text(const std::string& key, const std::string& fallback)
    {
        const auto* v = raw(key);
        return v ? *v : fallback;
    }
    std::vector<double> list(const std::string& key)
    {
        const auto* v = raw(key);
        return v ? parse_list(key, *v) : std::vector<double>{};
    }

    void reject_unknown() const
    {
        for (const auto& [key, value] : kv_) {
            if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
                throw ConfigError("unknown key '" + key + "'");
            }
        }
    }

private:
    const KeyValues& kv_;
    std::vector<std::string> used_;
};

// Runs `build`, prefixing parameter-domain errors with the section name.
template <typename F>
auto in_section(const std::string& section, F&& build)
{
    try {
        return build();
    } catch (const ParameterError& e) {
        throw ConfigError(section + ": " + e.what());
    }
}

} // namespace config_detail

/// Parses `key = value` text into a key map. Later duplicates are an error.
inline KeyValues parse_key_values(std::istream& in)
{
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto body = config_detail::trim(line);
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        auto key = config_detail::trim(std::string_view(body).substr(0, eq));
        auto value = config_detail::trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        }
        if (!kv.emplace(key, value).second) {
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
    }
    return kv;
}

inline KeyValues parse_key_values(const std::string& text)
{
    std::istringstream in(text);
    return parse_key_values(in);
}

inline KeyValues read_key_values(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    return parse_key_values(in);
}

/// Builds and validates a scenario from its keys. A seed is required.
inline ScenarioConfig build_config(const KeyValues& kv)
{
    using namespace config_detail;
    Reader r(kv);
    ScenarioConfig cfg;
    cfg.source = kv;

    cfg.id = r.text("scenario.id", cfg.id);
    const auto* seed = r.raw("seed");
    if (!seed) {
        throw ConfigError("seed: a seed is required");
    }
    const auto seed_value = parse_int("seed", *seed);
    if (seed_value < 0) {
        throw ConfigError("seed: must be non-negative");
    }
    cfg.seed = static_cast<std::uint64_t>(seed_value);
    cfg.units_per_arm = r.integer("units", cfg.units_per_arm);
    if (cfg.units_per_arm < 0) {
        throw ConfigError("units: must be non-negative");
    }
    const auto threads = r.integer("threads", 1);
    if (threads < 1) {
        throw ConfigError("threads: must be at least 1");
    }
    cfg.threads = static_cast<unsigned>(threads);
    cfg.output = r.text("output", "");

    // symptom.*
    cfg.unit.symptom = in_section("symptom", [&] {
        const double lambda = r.number("symptom.lambda", 0.2);
        const double delta = r.number("symptom.delta", 0.5);
        const double rho = r.number("symptom.rho", 0.5);
        double nu = r.number("symptom.nu", 0.6);
        if (const auto target = r.optional_number("symptom.target_ve")) {
            nu = invert_target_to_nu(*target, lambda, delta, rho);
        }
        return SymptomModelParams(lambda, delta, nu, rho, r.number("symptom.tau", 0.3));
    });

    // duration.*
    cfg.unit.duration = in_section("duration", [&] {
        const double rho0 = r.number("duration.rho0", 14.0);
        const double rho1 = r.number("duration.rho1", 8.0);
        double nu = r.number("duration.nu_daily", 0.7);
        if (const auto target = r.optional_number("duration.target_ve")) {
            nu = invert_target_to_nu_daily(*target, rho0, rho1);
        }
        return DurationModelParams(rho0, rho1, r.number("duration.c", 7.0), nu, r.number("duration.tau0", 0.01));
    });

    // unit.*
    auto& u = cfg.unit;
    u.unit_size = static_cast<int>(r.integer("unit.size", u.unit_size));
    u.p_primary_vaccinated = r.number("unit.p_primary_vaccinated", u.p_primary_vaccinated);
    u.contacts_vaccinated = r.boolean("unit.contacts_vaccinated", u.contacts_vaccinated);
    u.incubation_mean_days = r.number("unit.incubation_mean_days", u.incubation_mean_days);
    u.incubation_log_sd = r.number("unit.incubation_log_sd", u.incubation_log_sd);
    u.community_daily_hazard = r.number("unit.community_daily_hazard", u.community_daily_hazard);
    u.community_horizon_days = r.number("unit.community_horizon_days", u.community_horizon_days);
    u.contact_to_contact = r.boolean("unit.contact_to_contact", u.contact_to_contact);
    if (const auto* v = r.raw("unit.transmission_mode")) {
        u.transmission_mode = parse_enum<TransmissionMode>("unit.transmission_mode", *v,
                                                           {{"per_unit_bernoulli", TransmissionMode::PerUnitBernoulli},
                                                            {"per_day_hazard", TransmissionMode::PerDayHazard},
                                                            {"linear_hazard", TransmissionMode::LinearHazard}});
    }
    if (const auto* v = r.raw("unit.transmission_timing")) {
        u.transmission_timing = parse_enum<TransmissionTiming>(
            "unit.transmission_timing", *v,
            {{"uniform", TransmissionTiming::Uniform}, {"exponential", TransmissionTiming::ExponentialFirstEvent}});
    }
    in_section("unit", [&] {
        u.validate();
        return 0;
    });

    // policy.*
    auto& p = cfg.policy;
    const double delay = r.number("policy.delay_days", 0.0);
    const double k = r.number("policy.interval_k", 7.0);
    const std::string kind = r.text("policy.kind", "symptom_prompted");
    if (kind == "symptom_prompted") {
        p.kind = SymptomPrompted{delay};
    } else if (kind == "scheduled") {
        p.kind = Scheduled{k};
    } else if (kind == "symptom_plus_scheduled") {
        p.kind = SymptomPlusScheduled{delay, k};
    } else if (kind == "none") {
        p.kind = NoTesting{};
    } else {
        throw ConfigError("policy.kind: expected one of symptom_prompted|scheduled|symptom_plus_scheduled|none, got '"
                          + kind + "'");
    }
    p.participation = r.number("policy.participation", p.participation);
    p.horizon_days = r.number("policy.horizon_days", p.horizon_days);
    p.prospective_enrollment = r.boolean("policy.prospective_enrollment", p.prospective_enrollment);
    in_section("policy", [&] {
        p.validate();
        return 0;
    });

    // filter.*
    auto& f = cfg.filter;
    const std::string preset = r.text("filter.preset", "maximal");
    if (preset == "harris") {
        f = StudyDesignFilter::harris();
    } else if (preset == "eyre") {
        f = StudyDesignFilter::eyre();
    } else if (preset == "gier") {
        f = StudyDesignFilter::gier();
    } else if (preset == "lyngse") {
        f = StudyDesignFilter::lyngse();
    } else if (preset == "maximal") {
        f = StudyDesignFilter::maximal(p.horizon_days);
    } else {
        throw ConfigError("filter.preset: expected one of harris|eyre|gier|lyngse|maximal, got '" + preset + "'");
    }
    if (const auto* v = r.raw("filter.window")) {
        const auto w = parse_list("filter.window", *v);
        if (w.size() != 2) {
            throw ConfigError("filter.window: expected 'lo,hi'");
        }
        f.window_lo = w[0];
        f.window_hi = w[1];
    }
    if (const auto* v = r.raw("filter.coprimary_days")) {
        f.coprimary_exclusion_days = *v == "none" ? std::nullopt
                                                  : std::optional<double>(parse_double("filter.coprimary_days", *v));
    }
    f.require_contact_tested = r.boolean("filter.require_contact_tested", f.require_contact_tested);
    if (const auto* v = r.raw("filter.anchor")) {
        f.anchor = parse_enum<WindowAnchor>("filter.anchor", *v,
                                            {{"test", WindowAnchor::TestTime}, {"onset", WindowAnchor::OnsetTime}});
    }
    if (const auto* v = r.raw("filter.index_rule")) {
        f.index_rule = parse_enum<IndexRule>("filter.index_rule", *v,
                                             {{"earliest", IndexRule::EarliestPositive},
                                              {"enrolled", IndexRule::Enrolled}});
    }
    if (const auto* v = r.raw("filter.pooling")) {
        cfg.pooling = parse_enum<SarPooling>("filter.pooling", *v,
                                             {{"pooled", SarPooling::Pooled}, {"per_unit", SarPooling::PerUnitMean}});
    }
    in_section("filter", [&] {
        f.validate();
        return 0;
    });

    // sweep.* and figure grids
    if (const auto* param = r.raw("sweep.parameter")) {
        const auto* grid = r.raw("sweep.grid");
        if (!grid) {
            throw ConfigError("sweep.grid: required when sweep.parameter is set");
        }
        cfg.sweep = SweepAxis{*param, parse_list("sweep.grid", *grid)};
        if (cfg.sweep->parameter == "sweep.parameter" || cfg.sweep->parameter == "sweep.grid"
            || cfg.sweep->parameter == "seed") {
            throw ConfigError("sweep.parameter: '" + cfg.sweep->parameter + "' cannot be swept");
        }
    } else if (r.raw("sweep.grid")) {
        throw ConfigError("sweep.parameter: required when sweep.grid is set");
    }
    cfg.target_ve_grid = r.list("sweep.target_ve_grid");
    cfg.delta_grid = r.list("sweep.delta_grid");
    cfg.k_grid = r.list("sweep.k_grid");

    if (const auto* v = r.raw("se.method")) {
        cfg.se_method = parse_enum<SeMethod>("se.method", *v,
                                             {{"delta", SeMethod::Delta}, {"bootstrap", SeMethod::Bootstrap}});
    }
    cfg.bootstrap_reps = static_cast<int>(r.integer("se.bootstrap_reps", cfg.bootstrap_reps));
    if (cfg.bootstrap_reps < 2) {
        throw ConfigError("se.bootstrap_reps: must be at least 2");
    }

    r.reject_unknown();
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) { return build_config(read_key_values(path)); }

/// Formats a double so that it parses back to the same value.
inline std::string format_number(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

/// Copy of the scenario with one key overridden and everything re-validated.
inline ScenarioConfig with_parameter(const ScenarioConfig& cfg, const std::string& key, double value)
{
    KeyValues kv = cfg.source;
    kv[key] = format_number(value);
    return build_config(kv);
}

} // namespace vesar

#endif
