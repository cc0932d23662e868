#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace disent {

struct ConfigKey {
    std::string name;
    nlohmann::json default_value;
    std::string help;
    bool nullable = false;
};

// Every recognised key with its default and a one-line description.
const std::vector<ConfigKey>& config_schema();

// Flat "a.b.c" -> value store. Only keys in the schema are accepted; values
// must match the type of the key's default.
class Config {
public:
    Config();

    // Nested objects are flattened into dotted keys before merging.
    void merge_json(const nlohmann::json& doc);
    void load_file(const std::filesystem::path& path);

    // "key=value". The value is read as JSON when it parses, otherwise as a
    // string; comma lists are accepted for list-valued keys.
    void set(std::string_view assignment);
    void set_value(const std::string& key, nlohmann::json value);

    const nlohmann::json& get(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::int64_t get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::optional<double> get_optional_double(const std::string& key) const;
    std::vector<std::int64_t> get_ints(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& key) const;

    // Replaces every seed-valued key with `seed`.
    void override_seeds(std::uint64_t seed);

    // Flat object, keys sorted.
    nlohmann::json to_json() const;

    friend bool operator==(const Config&, const Config&) = default;

private:
    std::map<std::string, nlohmann::json> values_;
};

// Human-readable list of every key, its default and meaning.
std::string config_help();

// Value of DISENT_SEED_OVERRIDE, if set. Throws Validation on a malformed value.
std::optional<std::uint64_t> seed_override_from_env();

}  // namespace disent
