// Sectioned key-value configuration with a fixed schema. Every key has a type
// and a default; unknown sections or keys are rejected when the file is read.
// The schema is listed in docs/config.md.
#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace perfplast {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class KeyType { Int, Real, Bool, String, RealList };

struct KeySpec {
    std::string name;  // "section.key"
    KeyType type;
    std::string default_value;
    std::string doc;
};

const std::vector<KeySpec>& config_schema();

class Config {
public:
    Config();  // all defaults

    static Config load(const std::filesystem::path& p);
    static Config parse(const std::string& text, const std::filesystem::path& base_dir = ".");

    // Typed setter used for overrides; validates key and value.
    void set(const std::string& name, const std::string& value);
    bool is_set(const std::string& name) const;  // given explicitly rather than defaulted

    int get_int(const std::string& name) const;
    double get_real(const std::string& name) const;
    bool get_bool(const std::string& name) const;
    std::string get_string(const std::string& name) const;
    std::vector<double> get_real_list(const std::string& name) const;
    // String value resolved against the directory of the config file.
    std::filesystem::path get_path(const std::string& name) const;

    const std::filesystem::path& base_dir() const { return base_dir_; }
    // Canonical text of every key, defaults included, in schema order.
    std::string dump() const;

private:
    const KeySpec& spec(const std::string& name) const;
    const std::string& raw(const std::string& name, KeyType want) const;

    std::map<std::string, std::string> values_;
    std::map<std::string, bool> explicit_;
    std::filesystem::path base_dir_ = ".";
};

}  // namespace perfplast
