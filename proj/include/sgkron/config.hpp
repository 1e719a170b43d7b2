#pragma once

#include <sgkron/errors.hpp>
#include <sgkron/experiment.hpp>

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace sgkron {

/// Configuration problem with a 1-based source line (0 when unknown).
class ConfigError : public InvalidArgument {
public:
    ConfigError(int line, const std::string& message)
        : InvalidArgument(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line)
    {
    }
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    int line_;
};

namespace detail {

/// Line of the first occurrence of "key" as an object key in the raw text.
inline int line_of_key(const std::string& text, const std::string& key)
{
    const std::string needle = "\"" + key + "\"";
    auto pos = text.find(needle);
    while (pos != std::string::npos) {
        auto after = text.find_first_not_of(" \t\r\n", pos + needle.size());
        if (after != std::string::npos && text[after] == ':') break;
        pos = text.find(needle, pos + 1);
    }
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

inline int line_of_byte(const std::string& text, std::size_t byte)
{
    const auto end = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

} // namespace detail

inline ExperimentConfig parse_config(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(detail::line_of_byte(text, e.byte), std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError(1, "top level must be a JSON object");

    static const std::set<std::string> known{"problem", "decay", "sigma_tilde", "alpha_bar",   "mesh_level",
                                             "M",       "k",     "N",           "preconditioners", "tol",
                                             "max_iter", "residual_norm", "seed", "output", "timing"};
    for (const auto& item : j.items())
        if (!known.contains(item.key()))
            throw ConfigError(detail::line_of_key(text, item.key()), "unknown field '" + item.key() + "'");

    auto fail = [&](const std::string& key, const std::string& msg) -> ConfigError {
        return {detail::line_of_key(text, key), key + ": " + msg};
    };

    auto int_list = [&](const std::string& key) {
        std::vector<int> out;
        const auto& v = j.at(key);
        if (v.is_number_integer()) {
            out.push_back(v.get<int>());
        } else if (v.is_array() && !v.empty()) {
            for (const auto& x : v) {
                if (!x.is_number_integer()) throw fail(key, "expected integers");
                out.push_back(x.get<int>());
            }
        } else {
            throw fail(key, "expected an integer or a nonempty list of integers");
        }
        return out;
    };

    ExperimentConfig c;
    c.preconditioners.clear();

    if (!j.contains("problem")) throw ConfigError(0, "missing required field 'problem'");
    const auto& problem = j.at("problem");
    if (problem == "affine")
        c.problem = ProblemKind::Affine;
    else if (problem == "lognormal")
        c.problem = ProblemKind::Lognormal;
    else
        throw fail("problem", "expected \"affine\" or \"lognormal\"");

    if (j.contains("decay") && j.contains("sigma_tilde"))
        throw fail("sigma_tilde", "give either decay or sigma_tilde, not both");
    if (j.contains("sigma_tilde")) {
        const auto& s = j.at("sigma_tilde");
        std::vector<double> sig;
        if (s.is_number())
            sig.push_back(s.get<double>());
        else if (s.is_array() && !s.empty())
            for (const auto& x : s) {
                if (!x.is_number()) throw fail("sigma_tilde", "expected numbers");
                sig.push_back(x.get<double>());
            }
        else
            throw fail("sigma_tilde", "expected a number or a nonempty list of numbers");
        c.decays.clear();
        for (double v : sig) {
            std::ostringstream name;
            name << "sigma=" << v;
            c.decays.push_back({name.str(), v});
        }
    } else if (j.contains("decay")) {
        const auto& d = j.at("decay");
        std::vector<std::string> names;
        if (d.is_string())
            names.push_back(d.get<std::string>());
        else if (d.is_array() && !d.empty())
            for (const auto& x : d) {
                if (!x.is_string()) throw fail("decay", "expected \"fast\" or \"slow\"");
                names.push_back(x.get<std::string>());
            }
        else
            throw fail("decay", "expected \"fast\", \"slow\" or a list of them");
        c.decays.clear();
        for (const auto& n : names) {
            if (n == "fast")
                c.decays.push_back(decay_fast());
            else if (n == "slow")
                c.decays.push_back(decay_slow());
            else
                throw fail("decay", "unknown decay '" + n + "' (expected fast or slow)");
        }
    } else if (c.problem == ProblemKind::Lognormal) {
        c.decays = {decay_slow()};
    }

    if (j.contains("alpha_bar")) {
        const auto& a = j.at("alpha_bar");
        if (a.is_string() && a.get<std::string>() == "auto")
            c.alpha_bar.reset();
        else if (a.is_number())
            c.alpha_bar = a.get<double>();
        else
            throw fail("alpha_bar", "expected \"auto\" or a number");
    } else if (c.problem == ProblemKind::Lognormal) {
        c.alpha_bar = 0.547;
    }

    if (j.contains("mesh_level")) c.mesh_levels = int_list("mesh_level");
    if (j.contains("M")) c.Ms = int_list("M");
    if (j.contains("k")) c.ks = int_list("k");
    if (j.contains("N")) {
        if (!j.at("N").is_number_integer()) throw fail("N", "expected an integer");
        c.N = j.at("N").get<int>();
    }

    if (!j.contains("preconditioners")) throw ConfigError(0, "missing required field 'preconditioners'");
    const auto& pl = j.at("preconditioners");
    if (!pl.is_array()) throw fail("preconditioners", "expected a list");
    if (pl.empty()) throw fail("preconditioners", "list must not be empty");
    for (const auto& p : pl) {
        if (!p.is_string()) throw fail("preconditioners", "entries must be strings");
        try {
            c.preconditioners.push_back(parse_precond(p.get<std::string>()));
        } catch (const InvalidArgument& e) {
            throw fail("preconditioners", e.what());
        }
    }

    if (j.contains("tol")) {
        if (!j.at("tol").is_number()) throw fail("tol", "expected a number");
        c.tol = j.at("tol").get<double>();
    }
    if (j.contains("max_iter")) {
        if (!j.at("max_iter").is_number_integer()) throw fail("max_iter", "expected an integer");
        c.max_iter = j.at("max_iter").get<int>();
    }
    if (j.contains("residual_norm")) {
        const auto& n = j.at("residual_norm");
        if (n == "euclidean")
            c.residual_norm = StoppingNorm::Euclidean;
        else if (n == "preconditioned")
            c.residual_norm = StoppingNorm::Preconditioned;
        else
            throw fail("residual_norm", "expected \"euclidean\" or \"preconditioned\"");
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw fail("seed", "expected a nonnegative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("output")) {
        if (!j.at("output").is_string()) throw fail("output", "expected a path string");
        c.output = j.at("output").get<std::string>();
    }
    if (j.contains("timing")) {
        if (!j.at("timing").is_boolean()) throw fail("timing", "expected true or false");
        c.timing = j.at("timing").get<bool>();
    }

    try {
        validate(c);
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        const auto colon = msg.find(':');
        const std::string key = colon == std::string::npos ? "" : msg.substr(0, colon);
        throw ConfigError(key.empty() ? 0 : detail::line_of_key(text, key), msg);
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace sgkron
