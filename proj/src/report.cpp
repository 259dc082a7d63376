#include "spinso4/report.hpp"

#include <cmath>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace spinso4::report {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

void assign(RunConfig& cfg, const std::string& line, const std::string& context) {
    const auto eq = line.find('=');
    if (eq == std::string::npos)
        throw ConfigError("missing '=' in " + context + ": '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key in " + context + ": '" + line + "'");
    cfg.kv[key] = val;
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        assign(cfg, line, path + ":" + std::to_string(lineno));
    }
    return cfg;
}

void RunConfig::set_pair(const std::string& pair) { assign(*this, pair, "--set"); }

std::string RunConfig::get_str(const std::string& key, const std::string& fallback) const {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing text");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not a number: '" + it->second + "'");
    }
}

int RunConfig::get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, fallback);
    const int i = static_cast<int>(std::lround(v));
    if (v != i) throw ConfigError("key '" + key + "': not an integer");
    return i;
}

std::uint64_t RunConfig::get_seed() const {
    const auto it = kv.find("seed");
    if (it == kv.end()) return 20240901ULL;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw ConfigError("key 'seed': not an unsigned integer: '" + it->second + "'");
    }
}

std::vector<double> RunConfig::get_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': bad list element '" + tok + "'");
        }
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

std::vector<std::string> RunConfig::suites() const {
    const std::string raw = get_str("suites", "all");
    std::vector<std::string> out;
    std::stringstream ss(raw);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    if (out.empty()) throw ConfigError("key 'suites': empty suite list");
    return out;
}

std::vector<int> RunConfig::grid_ladder() const {
    const auto vals = get_list("grid.ladder", {32.0, 48.0, 64.0});
    std::vector<int> out;
    for (double v : vals) out.push_back(static_cast<int>(std::lround(v)));
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] <= out[i - 1])
            throw ConfigError("key 'grid.ladder': must be strictly increasing");
    return out;
}

int Report::failed() const {
    int n = 0;
    for (const auto& r : records)
        if (!r.pass) ++n;
    return n;
}

void Report::add(const std::string& suite, const std::string& check,
                 const std::string& anchor, double value, double tol) {
    records.push_back({suite, check, anchor, value, tol, std::abs(value) <= tol});
}

void Report::add_flag(const std::string& suite, const std::string& check,
                      const std::string& anchor, double value, bool pass) {
    records.push_back({suite, check, anchor, value, 0.0, pass});
}

std::string Report::to_json() const {
    nlohmann::ordered_json j;
    j["schema"] = schema;
    j["timestamp"] = timestamp;
    j["config"] = config_echo;
    j["environment"] = environment;
    j["records"] = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        nlohmann::ordered_json rec;
        rec["suite"] = r.suite;
        rec["check"] = r.check;
        rec["anchor"] = r.anchor;
        rec["value"] = r.value;
        rec["tol"] = r.tol;
        rec["pass"] = r.pass;
        j["records"].push_back(std::move(rec));
    }
    j["totals"]["checks"] = total();
    j["totals"]["failed"] = failed();
    return j.dump(2) + "\n";
}

Report Report::from_json(const std::string& text) {
    const auto j = nlohmann::ordered_json::parse(text);
    Report rep;
    rep.schema = j.at("schema").get<int>();
    rep.timestamp = j.at("timestamp").get<std::string>();
    rep.config_echo = j.at("config").get<std::map<std::string, std::string>>();
    rep.environment = j.at("environment").get<std::map<std::string, std::string>>();
    for (const auto& rec : j.at("records")) {
        CheckRecord r;
        r.suite = rec.at("suite").get<std::string>();
        r.check = rec.at("check").get<std::string>();
        r.anchor = rec.at("anchor").get<std::string>();
        r.value = rec.at("value").get<double>();
        r.tol = rec.at("tol").get<double>();
        r.pass = rec.at("pass").get<bool>();
        rep.records.push_back(std::move(r));
    }
    return rep;
}

std::string Report::to_csv() const {
    std::ostringstream os;
    os << "suite,check,anchor,value,tol,pass\n";
    for (const auto& r : records) {
        os << r.suite << ',' << r.check << ",\"" << r.anchor << "\","
           << fmt_double(r.value) << ',' << fmt_double(r.tol) << ','
           << (r.pass ? "true" : "false") << '\n';
    }
    return os.str();
}

std::string Report::to_text() const {
    std::size_t w_suite = 5, w_check = 5, w_anchor = 6;
    for (const auto& r : records) {
        w_suite = std::max(w_suite, r.suite.size());
        w_check = std::max(w_check, r.check.size());
        w_anchor = std::max(w_anchor, r.anchor.size());
    }
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(w_suite) + 2) << "suite"
       << std::setw(static_cast<int>(w_check) + 2) << "check"
       << std::setw(static_cast<int>(w_anchor) + 2) << "anchor"
       << std::setw(14) << "value" << std::setw(12) << "tol"
       << "status\n";
    for (const auto& r : records) {
        std::ostringstream val, tol;
        val << std::setprecision(4) << std::scientific << r.value;
        tol << std::setprecision(1) << std::scientific << r.tol;
        os << std::left << std::setw(static_cast<int>(w_suite) + 2) << r.suite
           << std::setw(static_cast<int>(w_check) + 2) << r.check
           << std::setw(static_cast<int>(w_anchor) + 2) << r.anchor
           << std::setw(14) << val.str() << std::setw(12)
           << (r.tol > 0.0 ? tol.str() : "-") << (r.pass ? "pass" : "FAIL") << '\n';
    }
    os << records.size() << " checks, " << failed() << " failed\n";
    return os.str();
}

std::string emit(const Report& rep, const std::string& out_dir,
                 const std::string& format, const std::string& stem) {
    std::string body, ext;
    if (format == "json") {
        body = rep.to_json();
        ext = ".json";
    } else if (format == "csv") {
        body = rep.to_csv();
        ext = ".csv";
    } else if (format == "text") {
        body = rep.to_text();
        ext = ".txt";
    } else {
        throw ConfigError("unknown format '" + format + "' (json, csv, text)");
    }
    std::filesystem::create_directories(out_dir);
    const std::string path = (std::filesystem::path(out_dir) / (stem + ext)).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
    return path;
}

}  // namespace spinso4::report
