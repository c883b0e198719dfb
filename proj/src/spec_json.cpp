#include "tct/spec_json.hpp"

#include <set>
#include <string>

#include "tct/errors.hpp"

namespace tct {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.contains(key)) {
            throw ValidationError(where + ": unknown key '" + key + "'");
        }
    }
}

std::size_t require_size(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) {
        throw ValidationError(where + ": missing required key '" + key + "'");
    }
    const auto& v = j.at(key);
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > 0) {
        return v.get<std::size_t>();
    }
    if (v.is_number_integer() && v.get<std::int64_t>() > 0) {
        return static_cast<std::size_t>(v.get<std::int64_t>());
    }
    throw ValidationError(where + "." + key + ": expected a positive integer");
}

Eigen::VectorXd parse_coeff_vector(const json& j, std::size_t order, const std::string& where) {
    if (!j.is_array() || j.size() != order) {
        throw ValidationError(where + ": expected an array of " + std::to_string(order) +
                              " numbers");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(order));
    for (std::size_t i = 0; i < order; ++i) {
        if (!j[i].is_number()) {
            throw ValidationError(where + "[" + std::to_string(i) + "]: expected a number");
        }
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

/// One coefficient schedule: [p] numbers (constant) or [T][p].
std::vector<Eigen::VectorXd> parse_coeff_schedule(const json& j, std::size_t order,
                                                  std::size_t length, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw ValidationError(where + ": expected a coefficient array");
    }
    std::vector<Eigen::VectorXd> schedule;
    if (j[0].is_number()) {
        schedule.assign(length, parse_coeff_vector(j, order, where));
    } else {
        if (j.size() != length) {
            throw ValidationError(where + ": per-time schedule has " +
                                  std::to_string(j.size()) + " entries, expected " +
                                  std::to_string(length));
        }
        schedule.reserve(length);
        for (std::size_t t = 0; t < length; ++t) {
            schedule.push_back(
                parse_coeff_vector(j[t], order, where + "[" + std::to_string(t) + "]"));
        }
    }
    return schedule;
}

/// One per-channel noise schedule: a number (constant) or [T] numbers.
std::vector<double> parse_noise_schedule(const json& j, std::size_t length,
                                         const std::string& where) {
    std::vector<double> schedule;
    if (j.is_number()) {
        schedule.assign(length, j.get<double>());
    } else if (j.is_array()) {
        if (j.size() != length) {
            throw ValidationError(where + ": schedule has " + std::to_string(j.size()) +
                                  " entries, expected " + std::to_string(length));
        }
        for (std::size_t t = 0; t < length; ++t) {
            if (!j[t].is_number()) {
                throw ValidationError(where + "[" + std::to_string(t) + "]: expected a number");
            }
            schedule.push_back(j[t].get<double>());
        }
    } else {
        throw ValidationError(where + ": expected a number or an array of numbers");
    }
    return schedule;
}

SvarSpec parse_scenario(const json& j, std::size_t order, std::size_t length) {
    reject_unknown_keys(j, {"name", "coupling", "base_var", "dip_var", "dip_start", "dip_end"},
                        "spec.scenario");
    if (!j.contains("name") || !j.at("name").is_string()) {
        throw ValidationError("spec.scenario: missing string key 'name'");
    }
    const std::string name = j.at("name").get<std::string>();
    if (name == "unidirectional") {
        if (!j.contains("coupling") || !j.at("coupling").is_number()) {
            throw ValidationError("spec.scenario: 'unidirectional' needs numeric 'coupling'");
        }
        return unidirectional_scenario(j.at("coupling").get<double>(), order, length);
    }
    if (name == "synchrony_pitfall") {
        for (const char* key : {"base_var", "dip_var", "dip_start", "dip_end"}) {
            if (!j.contains(key)) {
                throw ValidationError(std::string("spec.scenario: 'synchrony_pitfall' needs '") +
                                      key + "'");
            }
        }
        return synchrony_pitfall_scenario(
            j.at("base_var").get<double>(), j.at("dip_var").get<double>(),
            j.at("dip_start").get<std::size_t>(), j.at("dip_end").get<std::size_t>(), order,
            length);
    }
    throw ValidationError("spec.scenario.name: unknown scenario '" + name + "'");
}

}  // namespace

SvarSpec svar_spec_from_json(const json& j) {
    if (!j.is_object()) {
        throw ValidationError("spec: expected a JSON object");
    }
    reject_unknown_keys(j, {"order", "length", "burn_in", "scenario", "coefficients", "noise"},
                        "spec");
    const std::size_t order = require_size(j, "order", "spec");
    const std::size_t length = require_size(j, "length", "spec");

    if (j.contains("scenario")) {
        if (j.contains("coefficients") || j.contains("noise")) {
            throw ValidationError("spec: give either 'scenario' or explicit "
                                  "'coefficients'/'noise', not both");
        }
        SvarSpec spec = parse_scenario(j.at("scenario"), order, length);
        if (j.contains("burn_in")) {
            spec.burn_in = j.at("burn_in").get<std::size_t>();
        }
        return spec;
    }

    if (!j.contains("coefficients") || !j.contains("noise")) {
        throw ValidationError("spec: needs 'scenario' or both 'coefficients' and 'noise'");
    }
    const json& coeff = j.at("coefficients");
    reject_unknown_keys(coeff, {"a", "b", "c", "d"}, "spec.coefficients");
    const json& noise = j.at("noise");
    reject_unknown_keys(noise, {"mean", "var"}, "spec.noise");
    for (const char* key : {"a", "b", "c", "d"}) {
        if (!coeff.contains(key)) {
            throw ValidationError(std::string("spec.coefficients: missing '") + key + "'");
        }
    }
    for (const char* key : {"mean", "var"}) {
        if (!noise.contains(key) || !noise.at(key).is_array() || noise.at(key).size() != 2) {
            throw ValidationError(std::string("spec.noise.") + key +
                                  ": expected a 2-element array (one entry per channel)");
        }
    }

    SvarSpec spec;
    spec.order = order;
    spec.a = parse_coeff_schedule(coeff.at("a"), order, length, "spec.coefficients.a");
    spec.b = parse_coeff_schedule(coeff.at("b"), order, length, "spec.coefficients.b");
    spec.c = parse_coeff_schedule(coeff.at("c"), order, length, "spec.coefficients.c");
    spec.d = parse_coeff_schedule(coeff.at("d"), order, length, "spec.coefficients.d");
    spec.noise_mean1 = parse_noise_schedule(noise.at("mean")[0], length, "spec.noise.mean[0]");
    spec.noise_mean2 = parse_noise_schedule(noise.at("mean")[1], length, "spec.noise.mean[1]");
    spec.noise_var1 = parse_noise_schedule(noise.at("var")[0], length, "spec.noise.var[0]");
    spec.noise_var2 = parse_noise_schedule(noise.at("var")[1], length, "spec.noise.var[1]");
    spec.burn_in = j.contains("burn_in") ? j.at("burn_in").get<std::size_t>() : 10 * order;
    spec.validate();
    return spec;
}

nlohmann::json svar_spec_to_json(const SvarSpec& spec) {
    spec.validate();
    json j;
    j["order"] = spec.order;
    j["length"] = spec.length();
    j["burn_in"] = spec.burn_in;

    auto coeff_json = [&](const std::vector<Eigen::VectorXd>& schedule, bool constant) {
        auto vec_json = [](const Eigen::VectorXd& v) {
            json arr = json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
            return arr;
        };
        if (constant) return vec_json(schedule[0]);
        json arr = json::array();
        for (const auto& v : schedule) arr.push_back(vec_json(v));
        return arr;
    };
    auto noise_json = [&](const std::vector<double>& schedule) {
        const bool constant =
            std::all_of(schedule.begin(), schedule.end(),
                        [&](double v) { return v == schedule.front(); });
        if (constant) return json(schedule.front());
        return json(schedule);
    };

    const bool constant = spec.constant_coefficients();
    j["coefficients"] = {{"a", coeff_json(spec.a, constant)},
                         {"b", coeff_json(spec.b, constant)},
                         {"c", coeff_json(spec.c, constant)},
                         {"d", coeff_json(spec.d, constant)}};
    j["noise"] = {{"mean", json::array({noise_json(spec.noise_mean1), noise_json(spec.noise_mean2)})},
                  {"var", json::array({noise_json(spec.noise_var1), noise_json(spec.noise_var2)})}};
    return j;
}

}  // namespace tct
