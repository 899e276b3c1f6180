#include "noiseshape/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "noiseshape/errors.hpp"

namespace noiseshape {

static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            fail_usage("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            fail_usage("config line " + std::to_string(lineno) + ": empty key");
        cfg.kv_[key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail_usage("cannot read config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_string(ss.str());
}

void Config::set(const std::string& key, const std::string& value) {
    // Parsing rejects empty keys, so setting one would break serialize round-trips.
    if (key.empty()) fail_usage("config: empty key");
    kv_[key] = value;
}
void Config::set_real(const std::string& key, double value) { kv_[key] = format_real(value); }
void Config::set_int(const std::string& key, int64_t value) { kv_[key] = std::to_string(value); }

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

std::string Config::get_str(const std::string& key, const std::string& dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
}

double Config::get_real(const std::string& key, double dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : parse_real(it->second);
}

int64_t Config::get_int(const std::string& key, int64_t dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(it->second.c_str(), &end, 10);
    if (errno != 0 || end == it->second.c_str() || *end != '\0')
        fail_usage("config key '" + key + "': not an integer: " + it->second);
    return v;
}

uint64_t Config::get_u64(const std::string& key, uint64_t dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    errno = 0;
    char* end = nullptr;
    unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
    if (errno != 0 || end == it->second.c_str() || *end != '\0')
        fail_usage("config key '" + key + "': not an unsigned integer: " + it->second);
    return v;
}

std::string Config::require_str(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) fail_usage("missing required config key: " + key);
    return it->second;
}

double Config::require_real(const std::string& key) const {
    if (!has(key)) fail_usage("missing required config key: " + key);
    return get_real(key, 0.0);
}

int64_t Config::require_int(const std::string& key) const {
    if (!has(key)) fail_usage("missing required config key: " + key);
    return get_int(key, 0);
}

static std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    std::string last = trim(cur);
    if (!last.empty() || !out.empty()) out.push_back(last);
    return out;
}

std::vector<double> Config::get_real_list(const std::string& key) const {
    std::vector<double> out;
    auto it = kv_.find(key);
    if (it == kv_.end() || trim(it->second).empty()) return out;
    for (const auto& tok : split_commas(it->second)) {
        if (tok.empty()) fail_usage("config key '" + key + "': empty list element");
        out.push_back(parse_real(tok));
    }
    return out;
}

std::vector<uint64_t> Config::get_u64_list(const std::string& key) const {
    std::vector<uint64_t> out;
    auto it = kv_.find(key);
    if (it == kv_.end() || trim(it->second).empty()) return out;
    for (const auto& tok : split_commas(it->second)) {
        errno = 0;
        char* end = nullptr;
        unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
        if (errno != 0 || end == tok.c_str() || *end != '\0')
            fail_usage("config key '" + key + "': not an unsigned integer: " + tok);
        out.push_back(v);
    }
    return out;
}

std::string Config::serialize() const {
    std::ostringstream out;
    for (const auto& [k, v] : kv_) out << k << " = " << v << "\n";
    return out.str();
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_real_hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_real(const std::string& s) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        fail_usage("not a real number: " + s);
    return v;
}

uint64_t fnv1a64(const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a64_str(const std::string& s) { return fnv1a64(s.data(), s.size()); }

uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail_usage("cannot read file for hashing: " + path);
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
        std::streamsize got = f.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= (unsigned char)buf[i];
            h *= 0x100000001b3ull;
        }
        if (!f) break;
    }
    return h;
}

std::string hex12(uint64_t h) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%012llx", (unsigned long long)(h & 0xffffffffffffull));
    return buf;
}

}  // namespace noiseshape
