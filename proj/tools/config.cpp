#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "topowg/errors.hpp"

namespace topowg::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& s, const std::string& key) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ParameterError("key '" + key + "': expected a number, got '" + s + "'");
    return v;
}

const std::map<std::string, std::map<std::string, std::string>>& command_defaults() {
    static const std::map<std::string, std::map<std::string, std::string>> d{
        {"bands", {}},
        {"dynamics", {}},
        {"fisher", {}},
        {"bayes-time", {}},
        {"bayes-range", {{"times", "25,100"}}},
        {"posterior", {{"times", "20,50,100"}}},
        {"disorder", {}},
        {"dephasing", {{"times", "20:80:5"}}},
        {"finite-size", {{"t1", "200"}}},
        {"even-n", {{"N", "200"}}},
    };
    return d;
}

}  // namespace

const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> s{
        {"N", "201", "number of lattice sites"},
        {"delta", "0.2", "dimerization; hoppings J(1 -/+ delta)"},
        {"g", "0.1", "emitter-chain coupling in units of J"},
        {"Delta", "0", "emitter frequency in units of J"},
        {"end", "left", "chain end the emitter couples to: left or right"},
        {"W", "0", "bond disorder strength (bands, dynamics, fisher)"},
        {"seed", "1", "64-bit seed for records and disorder draws"},
        {"gamma", "0", "dephasing rate (dynamics adds a dephased column when > 0)"},
        {"which", "g", "sensed parameter: g or delta"},
        {"x_true", "", "true value of the sensed parameter (empty: 0.1 for g, 0.2 for delta)"},
        {"M", "10000", "shots per record"},
        {"n_samples", "100", "independent records averaged per point"},
        {"n_grid", "2001", "posterior grid points"},
        {"prior_lo", "", "prior lower bound (empty: 0)"},
        {"prior_hi", "", "prior upper bound (empty: 0.2 for g, 0.4 for delta)"},
        {"t0", "0", "first time of a uniform grid (dynamics, fisher, finite-size)"},
        {"t1", "100", "last time of a uniform grid"},
        {"nt", "1001", "points of a uniform grid"},
        {"times", "10:100:5", "evolution times of the Bayesian commands"},
        {"anchor", "10", "fixed record times chained before each main record (empty: none)"},
        {"companion", "", "records at factor * t chained after each main record"},
        {"step", "1e-5", "finite-difference step of the Fisher information"},
        {"n_realizations", "50", "disorder realizations per point"},
        {"inference", "matched", "likelihood for disordered data: matched or clean"},
        {"N_list", "100,400", "chain lengths compared by finite-size"},
        {"x_values", "", "true values scanned by bayes-range (empty: 0.04:0.16:0.02 for g, 0.1:0.3:0.025 for delta)"},
        {"W_list", "0,0.1,0.2", "disorder strengths scanned by disorder"},
        {"gamma_list", "0,0.05,0.2", "dephasing rates scanned by dephasing"},
    };
    return s;
}

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"bands",     "dynamics",  "fisher",      "bayes-time", "bayes-range",
                                            "posterior", "disorder", "dephasing", "finite-size", "even-n"};
    return c;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto c1 = item.find(':');
        if (c1 == std::string::npos) {
            out.push_back(to_double(item, "list"));
            continue;
        }
        const auto c2 = item.find(':', c1 + 1);
        if (c2 == std::string::npos) throw ParameterError("range '" + item + "' must be start:stop:step");
        const double a = to_double(item.substr(0, c1), "range");
        const double b = to_double(item.substr(c1 + 1, c2 - c1 - 1), "range");
        const double h = to_double(item.substr(c2 + 1), "range");
        if (!(h > 0.0) || b < a) throw ParameterError("range '" + item + "' needs step > 0 and stop >= start");
        const long n = std::lround(std::floor((b - a) / h + 1e-9));
        for (long k = 0; k <= n; ++k) out.push_back(a + static_cast<double>(k) * h);
    }
    return out;
}

Config Config::defaults(const std::string& command) {
    const auto it = command_defaults().find(command);
    if (it == command_defaults().end()) throw ParameterError("unknown command '" + command + "'");
    Config c;
    for (const auto& k : schema()) c.values_[k.key] = k.fallback;
    for (const auto& [k, v] : it->second) c.values_[k] = v;
    return c;
}

void Config::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ParameterError("unknown configuration key '" + key + "'");
    it->second = trim(value);
}

void Config::merge_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParameterError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        try {
            set(key, line.substr(eq + 1));
        } catch (const ParameterError& e) {
            throw ParameterError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void Config::merge_json(const nlohmann::json& j, const std::string& origin) {
    const nlohmann::json& cfg = j.contains("config") ? j.at("config") : j;
    if (!cfg.is_object()) throw ParameterError(origin + ": JSON config must be an object");
    for (const auto& [key, value] : cfg.items()) {
        if (value.is_string()) set(key, value.get<std::string>());
        else set(key, value.dump());
    }
}

void Config::merge_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParameterError(path + ": invalid JSON: " + e.what());
        }
        merge_json(j, path);
    } else {
        merge_text(text, path);
    }
}

const std::string& Config::text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ParameterError("unknown configuration key '" + key + "'");
    return it->second;
}

double Config::number(const std::string& key) const {
    const double v = to_double(text(key), key);
    if (!std::isfinite(v)) throw ParameterError("key '" + key + "' must be finite");
    return v;
}

int Config::integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 2e9) throw ParameterError("key '" + key + "' must be an integer");
    return static_cast<int>(v);
}

std::uint64_t Config::unsigned_integer(const std::string& key) const {
    const std::string t = text(key);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ParameterError("key '" + key + "' must be a nonnegative integer");
    return v;
}

std::vector<double> Config::list(const std::string& key) const {
    try {
        return parse_list(text(key));
    } catch (const ParameterError& e) {
        throw ParameterError("key '" + key + "': " + e.what());
    }
}

std::vector<int> Config::integer_list(const std::string& key) const {
    std::vector<int> out;
    for (double v : list(key)) {
        if (v != std::floor(v)) throw ParameterError("key '" + key + "' must list integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

nlohmann::json Config::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
}

}  // namespace topowg::cli
