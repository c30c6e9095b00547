#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace topowg::cli {

struct KeySpec {
    std::string key;
    std::string fallback;  ///< used unless the command overrides it
    std::string help;
};

/// Every key accepted in a config file or as a flag.
const std::vector<KeySpec>& schema();

/// Command names in the order they appear in --help.
const std::vector<std::string>& commands();

/// Parses "a,b,c" or an inclusive range "start:stop:step" (ranges may be
/// mixed with single values, e.g. "5,10:30:10").
std::vector<double> parse_list(const std::string& text);

/// Resolved key/value configuration of one run. Values are stored as text
/// exactly as given so that a manifest echoes them unchanged.
class Config {
public:
    /// Schema fallbacks with the command's own defaults applied.
    static Config defaults(const std::string& command);

    /// Sets a key; throws ParameterError for unknown keys.
    void set(const std::string& key, const std::string& value);

    /// Reads "key = value" lines ('#' starts a comment), or a JSON run
    /// manifest whose "config" object holds the keys.
    void merge_file(const std::string& path);
    void merge_text(const std::string& text, const std::string& origin);
    void merge_json(const nlohmann::json& j, const std::string& origin);

    const std::string& text(const std::string& key) const;
    double number(const std::string& key) const;
    int integer(const std::string& key) const;
    std::uint64_t unsigned_integer(const std::string& key) const;
    std::vector<double> list(const std::string& key) const;
    std::vector<int> integer_list(const std::string& key) const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }
    nlohmann::json to_json() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace topowg::cli
