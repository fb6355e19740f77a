#include "scar/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scar {

namespace {
std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
} // namespace

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: missing '=' on line " + std::to_string(line_no));
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config: empty key on line " + std::to_string(line_no));
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str());
}

std::string Config::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error("config: missing key " + key);
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::runtime_error("config: key " + key + " is not a number: " + v);
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long Config::get_long(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    return static_cast<long>(get_double(key));
}

int Config::get_int(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    return static_cast<int>(get_double(key));
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get_string(key);
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key " + key + " is not an unsigned integer: " + v);
    }
}

std::vector<std::string> Config::get_string_list(const std::string& key,
                                                 const std::string& fallback) const {
    const std::string raw = get_string(key, fallback);
    std::vector<std::string> out;
    std::istringstream in(raw);
    std::string item;
    while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::vector<int> Config::get_int_list(const std::string& key, const std::string& fallback) const {
    std::vector<int> out;
    for (const auto& s : get_string_list(key, fallback)) out.push_back(std::stoi(s));
    return out;
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::string& fallback) const {
    std::vector<double> out;
    for (const auto& s : get_string_list(key, fallback)) out.push_back(std::stod(s));
    return out;
}

} // namespace scar
