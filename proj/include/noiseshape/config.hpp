#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

// Flat structured-text configuration: one "key = value" per line, '#' starts a
// comment, whitespace around keys and values is ignored. serialize() emits keys
// sorted, so the same settings always produce the same bytes; parse(serialize())
// round-trips exactly.

namespace noiseshape {

class Config {
  public:
    static Config parse_string(const std::string& text);
    static Config parse_file(const std::string& path);

    void set(const std::string& key, const std::string& value);
    void set_real(const std::string& key, double value);
    void set_int(const std::string& key, int64_t value);

    bool has(const std::string& key) const;

    // get_* with a default never throw; require_* throw a usage error when the
    // key is missing or unparseable.
    std::string get_str(const std::string& key, const std::string& dflt) const;
    double get_real(const std::string& key, double dflt) const;
    int64_t get_int(const std::string& key, int64_t dflt) const;
    uint64_t get_u64(const std::string& key, uint64_t dflt) const;
    std::string require_str(const std::string& key) const;
    double require_real(const std::string& key) const;
    int64_t require_int(const std::string& key) const;

    // comma-separated lists
    std::vector<double> get_real_list(const std::string& key) const;
    std::vector<uint64_t> get_u64_list(const std::string& key) const;

    std::string serialize() const;
    const std::map<std::string, std::string>& items() const { return kv_; }

  private:
    std::map<std::string, std::string> kv_;
};

// Canonical number formatting used in every emitted file. %.17g round-trips
// IEEE doubles exactly through strtod.
std::string format_real(double v);
std::string format_real_hex(double v);  // hexfloat, used where bitwise identity matters
double parse_real(const std::string& s);

// FNV-1a (64-bit): content addressing for run directories and checkpoint
// fingerprints. Not cryptographic; collisions only cost a directory suffix.
uint64_t fnv1a64(const void* data, std::size_t len);
uint64_t fnv1a64_str(const std::string& s);
uint64_t fnv1a64_file(const std::string& path);  // usage error if unreadable
std::string hex12(uint64_t h);

}  // namespace noiseshape
