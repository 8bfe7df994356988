#include "fermikinetics/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fermikinetics/errors.hpp"
#include "fermikinetics/io.hpp"

namespace fk {

namespace {

std::string trim(const std::string& s)
{
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool parse_num(const std::string& s, double& x)
{
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

template <class I>
bool parse_int(const std::string& s, I& x)
{
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

bool parse_bool(const std::string& s, bool& b)
{
    if (s == "true" || s == "yes" || s == "1") return b = true, true;
    if (s == "false" || s == "no" || s == "0") return b = false, true;
    return false;
}

std::string join(const std::vector<std::string>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
    return out;
}

template <class T>
std::string join_num(const std::vector<T>& v)
{
    std::vector<std::string> s;
    for (auto x : v) {
        if constexpr (std::is_floating_point_v<T>) s.push_back(format_double(x));
        else s.push_back(std::to_string(x));
    }
    return join(s);
}

// A key knows how to set itself from text (returning the expected type on failure)
// and how to print its current value.
struct Key {
    std::string name;
    std::function<std::string(RunSpec&, const std::string&)> set;
    std::function<std::string(const RunSpec&)> show;
};

Key real(std::string name, double RunSpec::*f)
{
    return {std::move(name),
            [f](RunSpec& s, const std::string& v) -> std::string {
                return parse_num(v, s.*f) ? "" : "expected a number";
            },
            [f](const RunSpec& s) { return format_double(s.*f); }};
}

template <class I>
Key integer(std::string name, I RunSpec::*f)
{
    return {std::move(name),
            [f](RunSpec& s, const std::string& v) -> std::string {
                return parse_int(v, s.*f) ? "" : "expected an integer";
            },
            [f](const RunSpec& s) { return std::to_string(s.*f); }};
}

Key boolean(std::string name, bool RunSpec::*f)
{
    return {std::move(name),
            [f](RunSpec& s, const std::string& v) -> std::string {
                return parse_bool(v, s.*f) ? "" : "expected true or false";
            },
            [f](const RunSpec& s) { return std::string(s.*f ? "true" : "false"); }};
}

Key word(std::string name, std::string RunSpec::*f, std::vector<std::string> allowed)
{
    return {std::move(name),
            [f, allowed](RunSpec& s, const std::string& v) -> std::string {
                if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end())
                    return "expected one of {" + join(allowed) + "}";
                s.*f = v;
                return "";
            },
            [f](const RunSpec& s) { return s.*f; }};
}

const std::vector<Key>& registry()
{
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        k.push_back(word("scenario", &RunSpec::scenario, {"evolve", "fluct", "scaling", "oracle", "equilibrium"}));
        k.push_back(integer("model.dim", &RunSpec::dim));
        k.push_back(integer("model.n", &RunSpec::n));
        k.push_back(real("model.hopping", &RunSpec::hopping));
        k.push_back({"model.potential",
                     [](RunSpec& s, const std::string& v) -> std::string {
                         std::vector<double> c;
                         for (const auto& item : split_list(v)) {
                             double x;
                             if (!parse_num(item, x)) return "expected a list of numbers";
                             c.push_back(x);
                         }
                         if (c.empty()) return "expected a list of numbers";
                         s.potential = c;
                         return "";
                     },
                     [](const RunSpec& s) { return join_num(s.potential); }});
        k.push_back(real("params.lambda", &RunSpec::lambda));
        k.push_back({"params.N",
                     [](RunSpec& s, const std::string& v) -> std::string {
                         std::vector<double> c;
                         for (const auto& item : split_list(v)) {
                             double x;
                             if (!parse_num(item, x)) return "expected a number or list of numbers";
                             c.push_back(x);
                         }
                         if (c.empty()) return "expected a number or list of numbers";
                         s.N_list = c;
                         return "";
                     },
                     [](const RunSpec& s) { return join_num(s.N_list); }});
        k.push_back({"params.K",
                     [](RunSpec& s, const std::string& v) -> std::string {
                         std::vector<int> c;
                         for (const auto& item : split_list(v)) {
                             int x;
                             if (!parse_int(item, x)) return "expected a list of integers";
                             c.push_back(x);
                         }
                         s.K_list = c;
                         return "";
                     },
                     [](const RunSpec& s) { return s.K_list.empty() ? std::string("auto") : join_num(s.K_list); }});
        k.push_back({"params.eta",
                     [](RunSpec& s, const std::string& v) -> std::string {
                         if (v == "auto") {
                             s.eta_auto = true;
                             return "";
                         }
                         s.eta_auto = false;
                         return parse_num(v, s.eta) ? "" : "expected a number or auto";
                     },
                     [](const RunSpec& s) { return s.eta_auto ? std::string("auto") : format_double(s.eta); }});
        k.push_back({"params.mode",
                     [](RunSpec& s, const std::string& v) -> std::string {
                         try {
                             s.mode = shell_mode_from_string(v);
                         } catch (const ConfigError&) {
                             return "expected mollified or exact_shell";
                         }
                         return "";
                     },
                     [](const RunSpec& s) { return std::string(to_string(s.mode)); }});
        k.push_back(real("params.threshold", &RunSpec::threshold));
        k.push_back(boolean("params.threshold_relative", &RunSpec::threshold_relative));
        k.push_back(integer("params.max_entries", &RunSpec::max_entries));
        k.push_back(real("params.theta_regular", &RunSpec::theta_regular));
        k.push_back(real("params.theta_divergent", &RunSpec::theta_divergent));
        k.push_back(word("params.moment", &RunSpec::moment, {"mean", "variance"}));
        k.push_back(word("state.kind", &RunSpec::state, {"random", "fermi_dirac", "fermi_sea", "constant"}));
        k.push_back(real("state.beta", &RunSpec::beta));
        k.push_back(real("state.mu", &RunSpec::mu));
        k.push_back(real("state.low", &RunSpec::w_low));
        k.push_back(real("state.high", &RunSpec::w_high));
        k.push_back(real("state.value", &RunSpec::w_value));
        k.push_back(word("observable.kind", &RunSpec::observable, {"site", "bond", "random"}));
        k.push_back(integer("observable.width", &RunSpec::obs_width));
        k.push_back(boolean("observable.complex", &RunSpec::obs_complex));
        k.push_back(integer("observable.pair_offset", &RunSpec::pair_offset));
        k.push_back(real("run.T", &RunSpec::T));
        k.push_back(real("run.dt", &RunSpec::dt));
        k.push_back(integer("run.monitor_every", &RunSpec::monitor_every));
        k.push_back(integer("run.seed", &RunSpec::seed));
        k.push_back(integer("run.sites", &RunSpec::sites));
        k.push_back(word("output.dir", &RunSpec::out_dir, {}));
        k.push_back({"output.formats",
                     [](RunSpec& s, const std::string& v) -> std::string {
                         auto items = split_list(v);
                         for (const auto& f : items)
                             if (f != "csv" && f != "json" && f != "binary" && f != "table_csv")
                                 return "expected formats from {csv, json, binary, table_csv}";
                         s.formats = items;
                         return "";
                     },
                     [](const RunSpec& s) { return join(s.formats); }});
        return k;
    }();
    return keys;
}

void check_constraints(const RunSpec& s, const std::map<std::string, int>& line_of,
                       std::vector<std::string>& errors)
{
    auto err = [&](const std::string& key, const std::string& msg) {
        auto it = line_of.find(key);
        std::string where = it == line_of.end() ? "(default)" : "line " + std::to_string(it->second);
        errors.push_back(where + ": " + key + ": " + msg);
    };
    if (s.dim != 1 && s.dim != 2) err("model.dim", "dimension must be 1 or 2 (got " + std::to_string(s.dim) + ")");
    if (s.n % 2 != 0) err("model.n", "points per axis must be even (got " + std::to_string(s.n) + ")");
    if (s.n < 4 || s.n > 1024) err("model.n", "points per axis must lie in [4, 1024] (got " + std::to_string(s.n) + ")");
    if (!(s.hopping > 0)) err("model.hopping", "must be positive");
    if (s.lambda < 0) err("params.lambda", "must be non-negative");
    for (double N : s.N_list)
        if (!(N > 0)) err("params.N", "every N must be positive");
    for (int K : s.K_list) {
        if (K < 1) err("params.K", "every K must be >= 1");
        if (2 * K > s.n) err("params.K", "block size K=" + std::to_string(K) + " violates 2K <= n");
    }
    if (!s.eta_auto && !(s.eta > 0)) err("params.eta", "mollifier width must be positive (or auto)");
    if (!(s.threshold >= 0)) err("params.threshold", "must be non-negative");
    if (!(s.theta_regular > 0) || !(s.theta_divergent > s.theta_regular))
        err("params.theta_divergent", "thresholds need 0 < theta_regular < theta_divergent");
    if (!(s.w_low >= 0 && s.w_low <= s.w_high && s.w_high <= 1))
        err("state.low", "need 0 <= low <= high <= 1");
    if (!(s.w_value >= 0 && s.w_value <= 1)) err("state.value", "must lie in [0, 1]");
    if (s.state == "fermi_dirac" && !(s.beta >= 0)) err("state.beta", "must be non-negative");
    const bool uses_observable = s.scenario == "fluct" || s.scenario == "scaling" || s.scenario == "oracle";
    const int torus = s.scenario == "oracle" ? s.sites : s.n;
    if (uses_observable && s.observable == "random" && (s.obs_width < 1 || 4 * (s.obs_width - 1) > torus))
        err("observable.width", "support diameter must be <= n/4 (n = " + std::to_string(torus) + ")");
    if (!(s.T > 0)) err("run.T", "must be positive");
    if (!(s.dt > 0) || s.dt > s.T) err("run.dt", "need 0 < dt <= T");
    if (s.monitor_every < 1) err("run.monitor_every", "must be >= 1");
    if (s.scenario == "oracle" && (s.sites < 2 || s.sites > 12))
        err("run.sites", "oracle mode count must lie in [2, 12] (got " + std::to_string(s.sites) + ")");
    if (s.scenario == "fluct" && !s.K_list.empty() && s.K_list.size() < 4)
        err("params.K", "variance limits need at least 4 block sizes");
    if (s.formats.empty()) err("output.formats", "at least one format is required");
}

}  // namespace

bool RunSpec::has_format(const std::string& f) const
{
    return std::find(formats.begin(), formats.end(), f) != formats.end();
}

RunSpec parse_config(const std::string& text)
{
    RunSpec spec;
    spec.source = text;
    std::vector<std::string> errors;
    std::map<std::string, int> line_of;
    const auto& keys = registry();

    std::stringstream ss(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        auto eq = line.find('=');
        std::string where = "line " + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) {
            errors.push_back(where + "expected `key = value`");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == key; });
        if (it == keys.end()) {
            errors.push_back(where + "unknown key '" + key + "'");
            continue;
        }
        if (line_of.count(key)) {
            errors.push_back(where + key + ": duplicate key (first set on line " + std::to_string(line_of[key]) + ")");
            continue;
        }
        line_of[key] = lineno;
        if (auto msg = it->set(spec, value); !msg.empty())
            errors.push_back(where + key + ": " + msg + " (got '" + value + "')");
    }

    if (!line_of.count("scenario")) errors.insert(errors.begin(), "scenario missing");
    else check_constraints(spec, line_of, errors);

    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    for (const auto& k : keys)
        spec.echo.emplace_back(k.name, k.show(spec) + (line_of.count(k.name) ? "" : " (default)"));
    return spec;
}

RunSpec load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string render_spec(const RunSpec& spec)
{
    std::string out;
    for (const auto& [k, v] : spec.echo) out += k + " = " + v + "\n";
    return out;
}

}  // namespace fk
