#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace scar {

// flat "key = value" files, '#' starts a comment
class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<int> get_int_list(const std::string& key, const std::string& fallback) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::string& fallback) const;
    std::vector<std::string> get_string_list(const std::string& key,
                                             const std::string& fallback) const;

private:
    std::map<std::string, std::string> values_;
};

} // namespace scar
