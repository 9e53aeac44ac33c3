#include "spde/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

extern char** environ;

namespace spde {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_plain_number(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw std::invalid_argument("empty number");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size())
        throw std::invalid_argument("cannot parse number '" + text + "'");
    return v;
}

long long parse_integer(const std::string& text) {
    const double v = parse_number(text);
    const long long i = std::llround(v);
    if (!std::isfinite(v) || static_cast<double>(i) != v)
        throw std::invalid_argument("expected an integer, got '" + text + "'");
    return i;
}

std::uint64_t parse_u64(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty() || t[0] == '-') throw std::invalid_argument("expected an unsigned integer");
    char* end = nullptr;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 0);
    if (end != t.c_str() + t.size())
        throw std::invalid_argument("cannot parse unsigned integer '" + text + "'");
    return v;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(text);
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    for (const std::string& s : split_list(text)) out.push_back(parse_number(s));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const std::string& s : split_list(text))
        out.push_back(static_cast<int>(parse_integer(s)));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += g17(v[i]);
    }
    return s;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::string join_strings(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += v[i];
    }
    return s;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"domain.length", [](RunConfig& c, const std::string& v) { c.length = parse_number(v); }},
        {"model.a3", [](RunConfig& c, const std::string& v) { c.a3 = parse_number(v); }},
        {"model.a2", [](RunConfig& c, const std::string& v) { c.a2 = parse_number(v); }},
        {"model.a1", [](RunConfig& c, const std::string& v) { c.a1 = parse_number(v); }},
        {"model.a0", [](RunConfig& c, const std::string& v) { c.a0 = parse_number(v); }},
        {"noise.kind", [](RunConfig& c, const std::string& v) { c.noise_kind = trim(v); }},
        {"noise.kappa", [](RunConfig& c, const std::string& v) { c.kappa = parse_number(v); }},
        {"noise.m_w",
         [](RunConfig& c, const std::string& v) { c.m_w = static_cast<int>(parse_integer(v)); }},
        {"noise.q_list",
         [](RunConfig& c, const std::string& v) { c.q_list = parse_double_list(v); }},
        {"scheme.n_modes",
         [](RunConfig& c, const std::string& v) { c.n_modes = static_cast<int>(parse_integer(v)); }},
        {"scheme.dt", [](RunConfig& c, const std::string& v) { c.dt = parse_number(v); }},
        {"scheme.t_final",
         [](RunConfig& c, const std::string& v) { c.t_final = parse_number(v); }},
        {"scheme.solver", [](RunConfig& c, const std::string& v) { c.solver = trim(v); }},
        {"scheme.tol", [](RunConfig& c, const std::string& v) { c.tol = parse_number(v); }},
        {"scheme.max_iter",
         [](RunConfig& c, const std::string& v) { c.max_iter = static_cast<int>(parse_integer(v)); }},
        {"scheme.damping",
         [](RunConfig& c, const std::string& v) { c.damping = parse_number(v); }},
        {"experiment.dt_list",
         [](RunConfig& c, const std::string& v) { c.dt_list = parse_double_list(v); }},
        {"experiment.dt_ref",
         [](RunConfig& c, const std::string& v) { c.dt_ref = parse_number(v); }},
        {"experiment.n_list",
         [](RunConfig& c, const std::string& v) { c.n_list = parse_int_list(v); }},
        {"experiment.n_ref",
         [](RunConfig& c, const std::string& v) { c.n_ref = static_cast<int>(parse_integer(v)); }},
        {"experiment.functionals",
         [](RunConfig& c, const std::string& v) { c.functionals = split_list(v); }},
        {"experiment.erg_functionals",
         [](RunConfig& c, const std::string& v) { c.erg_functionals = split_list(v); }},
        {"experiment.init_scales",
         [](RunConfig& c, const std::string& v) { c.init_scales = parse_double_list(v); }},
        {"experiment.x0_amplitude",
         [](RunConfig& c, const std::string& v) { c.x0_amplitude = parse_number(v); }},
        {"experiment.stride",
         [](RunConfig& c, const std::string& v) { c.stride = static_cast<int>(parse_integer(v)); }},
        {"run.n_samples",
         [](RunConfig& c, const std::string& v) { c.n_samples = parse_integer(v); }},
        {"run.seed", [](RunConfig& c, const std::string& v) { c.seed = parse_u64(v); }},
        {"run.workers",
         [](RunConfig& c, const std::string& v) { c.workers = static_cast<int>(parse_integer(v)); }},
        {"run.out", [](RunConfig& c, const std::string& v) { c.out_prefix = trim(v); }},
    };
    return table;
}

void check_multiple(std::vector<std::string>& errors, double whole, double part,
                    const std::string& what) {
    if (!(whole > 0.0) || !(part > 0.0)) return;  // reported elsewhere
    const long long k = std::llround(whole / part);
    if (k < 1 || std::abs(static_cast<double>(k) * part - whole) > 1e-9 * std::max(whole, 1.0))
        errors.push_back(what + ": " + g17(whole) + " is not a positive integer multiple of " +
                         g17(part));
}

} // namespace

double parse_number(const std::string& text) {
    const std::string t = trim(text);
    const std::size_t caret = t.find('^');
    double v = 0.0;
    if (caret != std::string::npos) {
        const double base = parse_plain_number(t.substr(0, caret));
        const double expo = parse_plain_number(t.substr(caret + 1));
        v = std::pow(base, expo);
    } else {
        v = parse_plain_number(t);
    }
    if (std::isnan(v)) throw std::invalid_argument("number '" + text + "' is NaN");
    return v;
}

std::vector<std::pair<std::string, std::string>> read_ini_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");

    std::vector<std::pair<std::string, std::string>> out;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.erase(cut);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": malformed section header");
            section = lower(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'key = value'");
        std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.find('.') == std::string::npos) {
            if (section.empty())
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": key '" + key +
                                         "' appears outside any [section]");
            key = section + "." + key;
        }
        out.emplace_back(key, value);
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> env_overrides() {
    std::vector<std::pair<std::string, std::string>> out;
    for (char** e = environ; e && *e; ++e) {
        const std::string entry(*e);
        if (entry.rfind("SPDE_", 0) != 0) continue;
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos) continue;
        std::string key = lower(entry.substr(5, eq - 5));
        const std::size_t us = key.find('_');
        if (us == std::string::npos) continue;
        key[us] = '.';
        out.emplace_back(key, entry.substr(eq + 1));
    }
    std::sort(out.begin(), out.end());  // environment iteration order is unspecified
    return out;
}

RunConfig apply_overrides(RunConfig base,
                          const std::vector<std::pair<std::string, std::string>>& overrides,
                          std::vector<std::string>& errors) {
    for (const auto& [key, value] : overrides) {
        const auto it = setters().find(key);
        if (it == setters().end()) {
            errors.push_back("unknown key '" + key + "'");
            continue;
        }
        try {
            it->second(base, value);
        } catch (const std::exception& e) {
            errors.push_back("bad value for '" + key + "': " + e.what());
        }
    }
    return base;
}

std::vector<std::string> validate(const RunConfig& cfg) {
    std::vector<std::string> errors;
    const auto bad = [&](const std::string& msg) { errors.push_back(msg); };

    if (!std::isfinite(cfg.length) || cfg.length <= 0.0)
        bad("domain.length must be positive");
    if (!std::isfinite(cfg.a3) || cfg.a3 <= 0.0)
        bad("model.a3 must be > 0 (dissipative cubic term)");
    for (const auto& [name, v] : {std::pair<const char*, double>{"model.a2", cfg.a2},
                                  {"model.a1", cfg.a1},
                                  {"model.a0", cfg.a0}})
        if (!std::isfinite(v)) bad(std::string(name) + " must be finite");

    if (cfg.noise_kind != "power_law" && cfg.noise_kind != "explicit")
        bad("noise.kind must be 'power_law' or 'explicit'");
    if (cfg.noise_kind == "power_law" && (!std::isfinite(cfg.kappa) || cfg.kappa < 0.0))
        bad("noise.kappa must be >= 0");
    if (cfg.noise_kind == "explicit") {
        if (cfg.q_list.empty()) bad("noise.q_list required when noise.kind = explicit");
        for (double q : cfg.q_list)
            if (!std::isfinite(q) || q < 0.0) {
                bad("noise.q_list entries must be >= 0");
                break;
            }
        if (cfg.m_w != 0 && cfg.m_w != static_cast<int>(cfg.q_list.size()))
            bad("noise.m_w conflicts with the length of noise.q_list");
    }
    if (cfg.m_w < 0) bad("noise.m_w must be >= 0");

    if (cfg.n_modes < 1) bad("scheme.n_modes must be >= 1");
    for (const auto& [name, v] : {std::pair<const char*, double>{"scheme.dt", cfg.dt},
                                  {"scheme.t_final", cfg.t_final},
                                  {"scheme.tol", cfg.tol},
                                  {"experiment.dt_ref", cfg.dt_ref}})
        if (!std::isfinite(v) || v <= 0.0) bad(std::string(name) + " must be positive");
    if (cfg.solver != "newton" && cfg.solver != "fixed_point")
        bad("scheme.solver must be 'newton' or 'fixed_point'");
    if (cfg.max_iter < 1) bad("scheme.max_iter must be >= 1");
    if (!(cfg.damping > 0.0) || !(cfg.damping < 1.0)) bad("scheme.damping must lie in (0, 1)");

    if (cfg.dt_list.empty()) bad("experiment.dt_list must not be empty");
    for (double d : cfg.dt_list)
        if (!std::isfinite(d) || d <= 0.0) {
            bad("experiment.dt_list entries must be positive");
            break;
        }
    if (cfg.n_list.empty()) bad("experiment.n_list must not be empty");
    for (int nn : cfg.n_list)
        if (nn < 1 || nn >= cfg.n_ref) {
            bad("experiment.n_list entries must satisfy 1 <= N < experiment.n_ref");
            break;
        }
    if (cfg.n_ref < 2) bad("experiment.n_ref must be >= 2");
    for (const std::string& name : cfg.functionals)
        if (!functional_from_name(name))
            bad("experiment.functionals: unknown functional '" + name + "'");
    for (const std::string& name : cfg.erg_functionals)
        if (!functional_from_name(name))
            bad("experiment.erg_functionals: unknown functional '" + name + "'");
    if (cfg.functionals.empty()) bad("experiment.functionals must not be empty");
    if (cfg.erg_functionals.empty()) bad("experiment.erg_functionals must not be empty");
    if (cfg.init_scales.empty()) bad("experiment.init_scales must not be empty");
    if (!std::isfinite(cfg.x0_amplitude)) bad("experiment.x0_amplitude must be finite");
    if (cfg.stride < 0) bad("experiment.stride must be >= 0");

    if (cfg.n_samples < 2) bad("run.n_samples must be >= 2");
    if (cfg.workers < 0) bad("run.workers must be >= 0");

    // The solvability constraint is checked here, at parse time, for every step size the
    // run could use, so a bad dt never reaches the solver.
    if (errors.empty()) {
        const CubicNonlinearity model(cfg.a3, cfg.a2, cfg.a1, cfg.a0);
        const double dt0 = step_constraint(model, cfg.length);
        const auto check_dt = [&](const char* key, double dtv) {
            if (dtv > dt0)
                bad(std::string(key) + " = " + g17(dtv) +
                    " exceeds the solvability threshold dt0 = " + g17(dt0) +
                    " (= min(1, 1 / (2 lambda_f - 2 lambda_1)))");
        };
        check_dt("scheme.dt", cfg.dt);
        check_dt("experiment.dt_ref", cfg.dt_ref);
        for (double d : cfg.dt_list) check_dt("experiment.dt_list entry", d);

        check_multiple(errors, cfg.t_final, cfg.dt, "scheme.t_final / scheme.dt");
        check_multiple(errors, cfg.t_final, cfg.dt_ref, "scheme.t_final / experiment.dt_ref");
        for (double d : cfg.dt_list)
            check_multiple(errors, d, cfg.dt_ref, "experiment.dt_list / experiment.dt_ref");
    }
    return errors;
}

std::string canonical_text(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> kv = {
        {"domain.length", g17(cfg.length)},
        {"experiment.dt_list", join_doubles(cfg.dt_list)},
        {"experiment.dt_ref", g17(cfg.dt_ref)},
        {"experiment.erg_functionals", join_strings(cfg.erg_functionals)},
        {"experiment.functionals", join_strings(cfg.functionals)},
        {"experiment.init_scales", join_doubles(cfg.init_scales)},
        {"experiment.n_list", join_ints(cfg.n_list)},
        {"experiment.n_ref", std::to_string(cfg.n_ref)},
        {"experiment.stride", std::to_string(cfg.stride)},
        {"experiment.x0_amplitude", g17(cfg.x0_amplitude)},
        {"model.a0", g17(cfg.a0)},
        {"model.a1", g17(cfg.a1)},
        {"model.a2", g17(cfg.a2)},
        {"model.a3", g17(cfg.a3)},
        {"noise.kappa", g17(cfg.kappa)},
        {"noise.kind", cfg.noise_kind},
        {"noise.m_w", std::to_string(cfg.m_w)},
        {"noise.q_list", join_doubles(cfg.q_list.empty() ? std::vector<double>{} : cfg.q_list)},
        {"run.n_samples", std::to_string(cfg.n_samples)},
        {"run.seed", std::to_string(cfg.seed)},
        {"scheme.damping", g17(cfg.damping)},
        {"scheme.dt", g17(cfg.dt)},
        {"scheme.max_iter", std::to_string(cfg.max_iter)},
        {"scheme.n_modes", std::to_string(cfg.n_modes)},
        {"scheme.solver", cfg.solver},
        {"scheme.t_final", g17(cfg.t_final)},
        {"scheme.tol", g17(cfg.tol)},
    };
    std::sort(kv.begin(), kv.end());
    std::string out;
    for (const auto& [k, v] : kv) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    const std::string text = canonical_text(cfg);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CubicNonlinearity make_model(const RunConfig& cfg) {
    return CubicNonlinearity(cfg.a3, cfg.a2, cfg.a1, cfg.a0);
}

NoiseSpec make_noise(const RunConfig& cfg, int finest_modes) {
    if (cfg.noise_kind == "explicit") return NoiseSpec::explicit_list(cfg.q_list);
    return NoiseSpec::power_law(cfg.kappa, cfg.m_w > 0 ? cfg.m_w : finest_modes);
}

SolverKind make_solver(const RunConfig& cfg) {
    return cfg.solver == "fixed_point" ? SolverKind::fixed_point : SolverKind::newton;
}

std::vector<Functional> make_functionals(const std::vector<std::string>& names) {
    std::vector<Functional> out;
    for (const std::string& name : names) {
        const auto f = functional_from_name(name);
        if (!f) throw std::invalid_argument("unknown functional '" + name + "'");
        out.push_back(*f);
    }
    return out;
}

ExperimentBase make_base(const RunConfig& cfg, int finest_modes) {
    ExperimentBase base;
    base.domain = Domain(cfg.length);
    base.model = make_model(cfg);
    base.noise = make_noise(cfg, finest_modes);
    base.solver = make_solver(cfg);
    base.tol = cfg.tol;
    base.max_iter = cfg.max_iter;
    base.damping = cfg.damping;
    base.n_samples = cfg.n_samples;
    base.seed = cfg.seed;
    base.workers = cfg.workers;
    return base;
}

TemporalCurveParams make_temporal(const RunConfig& cfg) {
    TemporalCurveParams p(sine_initial(Domain(cfg.length), cfg.n_modes, cfg.x0_amplitude));
    p.base = make_base(cfg, cfg.n_modes);
    p.n_modes = cfg.n_modes;
    p.t_final = cfg.t_final;
    p.dt_list = cfg.dt_list;
    p.dt_ref = cfg.dt_ref;
    return p;
}

SpatialCurveParams make_spatial(const RunConfig& cfg) {
    SpatialCurveParams p(sine_initial(Domain(cfg.length), cfg.n_ref, cfg.x0_amplitude));
    p.base = make_base(cfg, cfg.n_ref);
    p.n_list = cfg.n_list;
    p.n_ref = cfg.n_ref;
    p.dt = cfg.dt;
    p.t_final = cfg.t_final;
    return p;
}

ErgodicityParams make_ergodicity(const RunConfig& cfg) {
    ErgodicityParams p;
    p.base = make_base(cfg, cfg.n_modes);
    p.n_modes = cfg.n_modes;
    p.dt = cfg.dt;
    p.t_final = cfg.t_final;
    p.stride = cfg.stride;
    for (double c : cfg.init_scales)
        p.inits.push_back(sine_initial(Domain(cfg.length), cfg.n_modes, c));
    p.phis = make_functionals(cfg.erg_functionals);
    return p;
}

} // namespace spde
