#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinso4::report {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat dotted-key configuration ("grid.points=64"). One key per line in the
// file form; '#' starts a comment. Later assignments win.
struct RunConfig {
    std::map<std::string, std::string> kv;

    static RunConfig from_file(const std::string& path);
    void set_pair(const std::string& pair);  // "key=value"

    bool has(const std::string& key) const { return kv.count(key) != 0; }
    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_seed() const;  // key "seed"; never wall clock
    // Comma-separated list values ("coulomb.k=0.5,0.8,1.2").
    std::vector<double> get_list(const std::string& key,
                                 const std::vector<double>& fallback) const;
    std::vector<std::string> suites() const;  // key "suites", default "all"
    std::vector<int> grid_ladder() const;     // key "grid.ladder", default 32,48,64
};

struct CheckRecord {
    std::string suite;
    std::string check;
    std::string anchor;  // identity being audited, for the report tables
    double value = 0.0;
    double tol = 0.0;
    bool pass = false;
};

struct Report {
    int schema = 1;
    std::string timestamp;
    std::map<std::string, std::string> config_echo;
    std::map<std::string, std::string> environment;
    std::vector<CheckRecord> records;

    int total() const { return static_cast<int>(records.size()); }
    int failed() const;
    bool all_pass() const { return failed() == 0; }

    void add(const std::string& suite, const std::string& check,
             const std::string& anchor, double value, double tol);
    void add_flag(const std::string& suite, const std::string& check,
                  const std::string& anchor, double value, bool pass);

    std::string to_json() const;          // canonical form, stable key order
    static Report from_json(const std::string& text);
    std::string to_csv() const;
    std::string to_text() const;
};

// Writes <stem>.<ext> under out_dir for format in {json, csv, text}; returns
// the path written. Throws on unwritable paths or unknown formats.
std::string emit(const Report& rep, const std::string& out_dir,
                 const std::string& format, const std::string& stem = "report");

}  // namespace spinso4::report
