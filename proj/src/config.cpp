#include "hnnflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>

#include "hnnflow/errors.hpp"
#include "hnnflow/trace.hpp"

namespace hnnflow {
namespace {

struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
};

using Section = std::map<std::string, Entry>;

struct RawConfig {
    std::string origin;
    std::map<std::string, std::pair<Section, int>> sections; // name -> (entries, line)
};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(const RawConfig& raw, int line, const std::string& msg) {
    throw config_error(raw.origin + ":" + std::to_string(line) + ": " + msg);
}

RawConfig parse_raw(const std::string& text, const std::string& origin) {
    RawConfig raw;
    raw.origin = origin;
    std::istringstream in(text);
    std::string line;
    std::string current;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(raw, lineno, "unterminated section header");
            current = trim(t.substr(1, t.size() - 2));
            if (current.empty()) fail(raw, lineno, "empty section name");
            if (raw.sections.count(current))
                fail(raw, lineno, "section [" + current + "] appears twice");
            raw.sections[current] = {Section{}, lineno};
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) fail(raw, lineno, "expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) fail(raw, lineno, "empty key");
        if (current.empty()) fail(raw, lineno, "key '" + key + "' appears outside a [section]");
        auto& sec = raw.sections[current].first;
        if (sec.count(key)) fail(raw, lineno, "duplicate key '" + key + "'");
        sec[key] = Entry{value, lineno, false};
    }
    return raw;
}

class Reader {
public:
    Reader(const RawConfig& raw, const std::string& section) : raw_(raw), name_(section) {
        const auto it = raw.sections.find(section);
        sec_ = it == raw.sections.end() ? nullptr : &it->second.first;
    }

    const Entry* find(const std::string& key) const {
        if (!sec_) return nullptr;
        const auto it = sec_->find(key);
        if (it == sec_->end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    double get_double(const std::string& key, double def, double lo, double hi) const {
        const Entry* e = find(key);
        if (!e) return check_range(key, def, lo, hi, 0);
        return check_range(key, parse_double(key, *e), lo, hi, e->line);
    }

    int get_int(const std::string& key, int def, int lo, int hi) const {
        const Entry* e = find(key);
        if (!e) return def;
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(e->value, &pos);
        } catch (const std::exception&) {
            fail(raw_, e->line, "field '" + key + "' is not an integer");
        }
        if (pos != e->value.size()) fail(raw_, e->line, "field '" + key + "' is not an integer");
        if (v < lo || v > hi)
            fail(raw_, e->line,
                 "field '" + key + "' out of range [" + std::to_string(lo) + ", " +
                     std::to_string(hi) + "]");
        return static_cast<int>(v);
    }

    unsigned long long get_seed(const std::string& key, unsigned long long def) const {
        const Entry* e = find(key);
        if (!e) return def;
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(e->value, &pos);
        } catch (const std::exception&) {
            fail(raw_, e->line, "field '" + key + "' is not a nonnegative integer");
        }
        if (pos != e->value.size())
            fail(raw_, e->line, "field '" + key + "' is not a nonnegative integer");
        return v;
    }

    bool get_bool(const std::string& key, bool def) const {
        const Entry* e = find(key);
        if (!e) return def;
        if (e->value == "true" || e->value == "1") return true;
        if (e->value == "false" || e->value == "0") return false;
        fail(raw_, e->line, "field '" + key + "' must be true or false");
    }

    std::string get_choice(const std::string& key, const std::string& def,
                           const std::vector<std::string>& allowed) const {
        const Entry* e = find(key);
        const std::string v = e ? e->value : def;
        if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
            std::string opts;
            for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
            fail(raw_, e ? e->line : 0,
                 "field '" + key + "' must be one of: " + opts + " (got '" + v + "')");
        }
        return v;
    }

    std::vector<double> get_doubles(const std::string& key) const {
        const Entry* e = find(key);
        if (!e) return {};
        std::vector<double> out;
        std::string item;
        std::istringstream ss(e->value);
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) fail(raw_, e->line, "field '" + key + "' has an empty component");
            out.push_back(parse_double(key, Entry{item, e->line, true}));
        }
        if (out.empty()) fail(raw_, e->line, "field '" + key + "' is empty");
        return out;
    }

    void finish() const {
        if (!sec_) return;
        for (const auto& [key, entry] : *sec_)
            if (!entry.used)
                fail(raw_, entry.line, "unknown key '" + key + "' in section [" + name_ + "]");
    }

private:
    double parse_double(const std::string& key, const Entry& e) const {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(e.value, &pos);
        } catch (const std::exception&) {
            fail(raw_, e.line, "field '" + key + "' is not a number");
        }
        if (pos != e.value.size()) fail(raw_, e.line, "field '" + key + "' is not a number");
        return v;
    }

    double check_range(const std::string& key, double v, double lo, double hi, int line) const {
        if (!(v >= lo) || !(v <= hi))
            fail(raw_, line,
                 "field '" + key + "' out of range [" + format_value(lo) + ", " +
                     format_value(hi) + "]");
        return v;
    }

    const RawConfig& raw_;
    std::string name_;
    const Section* sec_;
};

constexpr double kInf = 1e300;

void check_point(const RawConfig& raw, const std::string& field, const std::vector<double>& v,
                 int n, bool interior) {
    if (v.empty()) return;
    if (static_cast<int>(v.size()) != n)
        throw config_error(raw.origin + ": field '" + field + "' needs " + std::to_string(n) +
                           " components");
    if (interior)
        for (double c : v)
            if (!(c > 0.0) || !(c < 1.0))
                throw config_error(raw.origin + ": field '" + field +
                                   "' components must lie strictly inside (0,1)");
}

RunConfig build(const RawConfig& raw) {
    for (const auto& [name, sec] : raw.sections)
        if (name != "descend" && name != "geodesic" && name != "dispatch" && name != "diffuse")
            fail(raw, sec.second, "unknown section [" + name + "]");

    RunConfig cfg;
    {
        Reader r(raw, "descend");
        DescendConfig& d = cfg.descend;
        d.method = r.get_choice("method", d.method, {"natural", "mirror", "prox"});
        d.activation = r.get_choice("activation", d.activation, {"soft", "logistic", "identity"});
        d.objective =
            r.get_choice("objective", d.objective, {"himmelblau", "quadratic", "linear"});
        d.n = r.get_int("n", d.objective == "himmelblau" ? 2 : d.n, 1, 1000);
        d.beta = r.get_double("beta", d.beta, 1e-12, kInf);
        d.h = r.get_double("h", d.h, 1e-300, kInf);
        d.steps = r.get_int("steps", d.steps, 0, 100000000);
        d.x0 = r.get_doubles("x0");
        d.ref = r.get_doubles("ref");
        d.center = r.get_doubles("center");
        d.slope = r.get_doubles("slope");
        d.timing = r.get_bool("timing", d.timing);
        r.finish();
        if (d.objective == "himmelblau" && d.n != 2)
            throw config_error(raw.origin + ": the himmelblau objective is two-dimensional");
        if (d.method == "mirror" && d.activation == "identity")
            throw config_error(raw.origin +
                               ": the mirror method needs a soft or logistic activation");
        check_point(raw, "x0", d.x0, d.n, true);
        check_point(raw, "ref", d.ref, d.n, true);
        check_point(raw, "center", d.center, d.n, false);
        check_point(raw, "slope", d.slope, d.n, false);
        if (d.x0.empty())
            d.x0 = d.n == 2 ? std::vector<double>{0.55, 0.45} : std::vector<double>(d.n, 0.5);
    }
    {
        Reader r(raw, "geodesic");
        GeodesicConfig& g = cfg.geodesic;
        g.activation = r.get_choice("activation", g.activation, {"soft", "logistic", "identity"});
        g.n = r.get_int("n", g.n, 1, 1000);
        g.beta = r.get_double("beta", g.beta, 1e-12, kInf);
        g.x = r.get_doubles("x");
        g.y = r.get_doubles("y");
        g.samples = r.get_int("samples", g.samples, 2, 1000000);
        g.shoot = r.get_bool("shoot", g.shoot);
        r.finish();
        check_point(raw, "x", g.x, g.n, true);
        check_point(raw, "y", g.y, g.n, true);
        if (g.x.empty()) g.x.assign(g.n, 0.25);
        if (g.y.empty()) g.y.assign(g.n, 0.75);
    }
    {
        Reader r(raw, "dispatch");
        DispatchConfig& d = cfg.dispatch;
        d.n_g = r.get_int("n_g", d.n_g, 1, 100000);
        d.seed = r.get_seed("seed", d.seed);
        d.restarts = r.get_int("restarts", d.restarts, 1, 1000000);
        d.r = r.get_double("r", d.r, 1e-300, kInf);
        d.h_hopfield = r.get_double("h_hopfield", d.h_hopfield, 1e-300, kInf);
        d.h_dual = r.get_double("h_dual", d.h_dual, 1e-300, kInf);
        d.tol = r.get_double("tol", d.tol, 1e-300, kInf);
        d.max_subiters = r.get_int("max_subiters", d.max_subiters, 1, 1000000000);
        d.outer_tol = r.get_double("outer_tol", d.outer_tol, 1e-300, kInf);
        d.max_outers = r.get_int("max_outers", d.max_outers, 1, 1000000000);
        d.p = r.get_doubles("p");
        d.x0 = r.get_doubles("x0");
        d.y0 = r.get_doubles("y0");
        d.c1 = r.get_double("c1", d.c1, 0.0, kInf);
        d.c2 = r.get_double("c2", d.c2, 0.0, kInf);
        d.pi_d = r.get_double("pi_d", d.pi_d, 0.0, kInf);
        d.parallel = r.get_bool("parallel", d.parallel);
        r.finish();
        auto check_len = [&](const char* field, const std::vector<double>& v) {
            if (!v.empty() && static_cast<int>(v.size()) != d.n_g)
                throw config_error(raw.origin + ": field '" + std::string(field) + "' needs " +
                                   std::to_string(d.n_g) + " components");
        };
        check_len("p", d.p);
        check_len("x0", d.x0);
        check_len("y0", d.y0);
    }
    {
        Reader r(raw, "diffuse");
        DiffuseConfig& d = cfg.diffuse;
        d.activation = r.get_choice("activation", d.activation, {"soft", "logistic", "identity"});
        d.objective =
            r.get_choice("objective", d.objective, {"himmelblau", "quadratic", "linear"});
        d.n = r.get_int("n", d.objective == "himmelblau" ? 2 : d.n, 1, 100);
        d.beta = r.get_double("beta", d.beta, 1e-12, kInf);
        d.T = r.get_double("T", d.T, 1e-300, kInf);
        d.N = r.get_int("N", d.N, 1, 10000000);
        d.h = r.get_double("h", d.h, 1e-300, kInf);
        d.eps = r.get_double("eps", d.eps, 1e-300, kInf);
        d.steps = r.get_int("steps", d.steps, 0, 100000000);
        d.seed = r.get_seed("seed", d.seed);
        d.fp_tol = r.get_double("fp_tol", d.fp_tol, 1e-300, kInf);
        d.max_fp_iters = r.get_int("max_fp_iters", d.max_fp_iters, 1, 1000000000);
        d.record_every = r.get_int("record_every", d.record_every, 0, 100000000);
        d.center = r.get_doubles("center");
        d.slope = r.get_doubles("slope");
        d.timing = r.get_bool("timing", d.timing);
        d.parallel = r.get_bool("parallel", d.parallel);
        r.finish();
        if (d.objective == "himmelblau" && d.n != 2)
            throw config_error(raw.origin + ": the himmelblau objective is two-dimensional");
        check_point(raw, "center", d.center, d.n, false);
        check_point(raw, "slope", d.slope, d.n, false);
    }
    return cfg;
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    return build(parse_raw(text, origin));
}

RunConfig load_config(const std::string& path) {
    if (path.empty()) return build(RawConfig{"<defaults>", {}});
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw config_error(e.what());
    }
    return parse_config_text(text, path);
}

Activation make_activation(const std::string& name, int n, double beta) {
    if (name == "soft") return Activation::soft_projection(std::vector<double>(n, beta));
    if (name == "logistic") return Activation::logistic(std::vector<double>(n, beta));
    if (name == "identity") return Activation::identity(n);
    throw config_error("unknown activation '" + name + "'");
}

Objective make_objective(const std::string& name, int n, const std::vector<double>& center,
                         const std::vector<double>& slope) {
    if (name == "himmelblau") {
        if (n != 2) throw config_error("the himmelblau objective is two-dimensional");
        return himmelblau_scaled();
    }
    if (name == "quadratic")
        return quadratic(center.empty() ? std::vector<double>(n, 0.5) : center);
    if (name == "linear") return linear(slope.empty() ? std::vector<double>(n, 1.0) : slope);
    throw config_error("unknown objective '" + name + "'");
}

std::string resolve_output_dir(const std::string& flag_value) {
    const char* env = std::getenv("HNNFLOW_OUTPUT_DIR");
    if (env && *env) return env;
    if (!flag_value.empty()) return flag_value;
    return ".";
}

} // namespace hnnflow
