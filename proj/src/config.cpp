#include "perfplast/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace perfplast {

namespace {

const char* kRateLambdas = "1e-1,1e-2,1e-3,1e-4,1e-5";

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_real(const std::string& s, double& v) {
    const std::string t = trim(s);
    const char* b = t.data();
    const char* e = b + t.size();
    if (b != e && *b == '+') ++b;
    const auto r = std::from_chars(b, e, v);
    return r.ec == std::errc() && r.ptr == e && b != e;
}

bool parse_int(const std::string& s, int& v) {
    const std::string t = trim(s);
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    return r.ec == std::errc() && r.ptr == t.data() + t.size() && !t.empty();
}

bool parse_bool(const std::string& s, bool& v) {
    const std::string t = trim(s);
    if (t == "true" || t == "1" || t == "yes") v = true;
    else if (t == "false" || t == "0" || t == "no") v = false;
    else return false;
    return true;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool parse_real_list(const std::string& s, std::vector<double>& v) {
    v.clear();
    for (const auto& item : split_list(s)) {
        double x;
        if (!parse_real(item, x)) return false;
        v.push_back(x);
    }
    return true;
}

const char* type_name(KeyType t) {
    switch (t) {
        case KeyType::Int: return "integer";
        case KeyType::Real: return "real";
        case KeyType::Bool: return "bool";
        case KeyType::String: return "string";
        case KeyType::RealList: return "list of reals";
    }
    return "?";
}

}  // namespace

const std::vector<KeySpec>& config_schema() {
    static const std::vector<KeySpec> s{
        {"run.mode", KeyType::String, "", "simulate | optimize | rate-study | oracle-1d | sweep"},
        {"run.seed", KeyType::Int, "0", "seed for randomized probes"},
        {"run.threads", KeyType::Int, "1", "worker threads (sweep)"},
        {"run.verbosity", KeyType::Int, "1", "0 silent, 1 summary, 2 per step"},

        {"mesh.dim", KeyType::Int, "2", "1 (interval) or 2 (unit square)"},
        {"mesh.nx", KeyType::Int, "8", "cells in x"},
        {"mesh.ny", KeyType::Int, "8", "cells in y (dim 2)"},
        {"mesh.dirichlet", KeyType::String, "left,right", "Dirichlet sides: left,right,bottom,top or all"},

        {"material.lame_lambda", KeyType::Real, "0.5", "first Lame constant"},
        {"material.lame_mu", KeyType::Real, "0.5", "shear modulus"},
        {"material.yield", KeyType::String, "von_mises", "von_mises | uniaxial (dim 1 only)"},
        {"material.sigma_y", KeyType::Real, "0.25", "yield radius"},

        {"time.T", KeyType::Real, "1", "final time"},
        {"time.N", KeyType::Int, "50", "time steps"},

        {"solver.scheme", KeyType::String, "implicit", "implicit | explicit"},
        {"solver.lambda", KeyType::Real, "0", "Yosida parameter, 0 = unregularized (implicit only)"},
        {"solver.huber_eps", KeyType::Real, "0", "smoothing band of the Yosida map, 0 = off"},
        {"solver.tol", KeyType::Real, "1e-11", "fixed-point tolerance of the implicit step"},
        {"solver.max_iterations", KeyType::Int, "2000", "fixed-point iteration cap"},
        {"solver.auto_substep", KeyType::Bool, "true", "split unstable explicit steps"},

        {"loading.kind", KeyType::String, "tension", "tension | shear | bending | constant | bar"},
        {"loading.amplitude", KeyType::Real, "0.5", "load amplitude a"},

        {"output.snapshots", KeyType::RealList, "", "times at which full fields are written"},

        {"optimize.lambdas", KeyType::RealList, "1e-2", "one value: single solve, several: continuation"},
        {"optimize.theta", KeyType::Real, "0.5", "exponent of the load penalty, in (0, 1)"},
        {"optimize.alpha", KeyType::Real, "3e-2", "Tikhonov weight"},
        {"optimize.load_rate_weight", KeyType::Real, "1", "weight of |ell'|^2"},
        {"optimize.huber_eps_obj", KeyType::Real, "1e-3", "Huber width of the L1 tracking norms"},
        {"optimize.flow_huber_eps", KeyType::Real, "1e-2", "smoothing band of the Yosida map"},
        {"optimize.strain_weight", KeyType::Real, "1", "weight of the strain-rate tracking term"},
        {"optimize.velocity_weight", KeyType::Real, "1", "weight of the velocity tracking term"},
        {"optimize.R_monitor", KeyType::Real, "1e3", "budget for |sigma'| + |sigma|_{W1,p}"},
        {"optimize.targets", KeyType::String, "truth", "truth (forward run, lambda = 0) | files | zero"},
        {"optimize.mu_target_file", KeyType::String, "", "series CSV of strain-rate targets (targets = files)"},
        {"optimize.v_target_file", KeyType::String, "", "series CSV of velocity targets (targets = files)"},
        {"optimize.max_iterations", KeyType::Int, "200", "L-BFGS iterations per lambda"},
        {"optimize.max_evaluations", KeyType::Int, "1000", "objective evaluations per lambda"},
        {"optimize.gradient_tol", KeyType::Real, "1e-8", "stop when |grad| <= tol"},
        {"optimize.memory", KeyType::Int, "10", "L-BFGS history"},
        {"optimize.gradient_probes", KeyType::Int, "0", "finite-difference directions checked before solving"},

        {"rate_study.lambdas", KeyType::RealList, kRateLambdas, "lambda grid"},
        {"rate_study.N", KeyType::Int, "2000", "time steps"},
        {"rate_study.cells", KeyType::Int, "4", "bar cells"},
        {"rate_study.w", KeyType::Real, "2", "constant strain rate"},
        {"rate_study.scheme", KeyType::String, "implicit", "implicit | explicit"},

        {"oracle.resolution", KeyType::Int, "200", "grid points per unit in t and x"},
        {"oracle.alpha", KeyType::Real, "1", "frozen variant rate"},
        {"oracle.beta", KeyType::Real, "0.5", "interface position"},

        {"sweep.parameter", KeyType::String, "", "key varied by the sweep, e.g. solver.lambda"},
        {"sweep.values", KeyType::String, "", "comma separated values"},
        {"sweep.mode", KeyType::String, "simulate", "mode run for every value"},
    };
    return s;
}

Config::Config() {
    for (const auto& k : config_schema()) values_[k.name] = k.default_value;
}

const KeySpec& Config::spec(const std::string& name) const {
    for (const auto& k : config_schema()) {
        if (k.name == name) return k;
    }
    throw ConfigError("unknown key '" + name + "'");
}

void Config::set(const std::string& name, const std::string& value) {
    const KeySpec& k = spec(name);
    const std::string v = trim(value);
    bool ok = true;
    switch (k.type) {
        case KeyType::Int: {
            int x;
            ok = parse_int(v, x);
            break;
        }
        case KeyType::Real: {
            double x;
            ok = parse_real(v, x);
            break;
        }
        case KeyType::Bool: {
            bool x;
            ok = parse_bool(v, x);
            break;
        }
        case KeyType::RealList: {
            std::vector<double> x;
            ok = parse_real_list(v, x);
            break;
        }
        case KeyType::String: break;
    }
    if (!ok) throw ConfigError("key '" + name + "' expects " + type_name(k.type) + ", got '" + v + "'");
    values_[name] = v;
    explicit_[name] = true;
}

bool Config::is_set(const std::string& name) const {
    spec(name);
    return explicit_.count(name) != 0;
}

Config Config::parse(const std::string& text, const std::filesystem::path& base_dir) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }
    Config c;
    c.base_dir_ = base_dir;
    for (const auto& [section, body] : tree) {
        if (!body.data().empty()) throw ConfigError("key '" + section + "' outside of a section");
        for (const auto& [key, node] : body) c.set(section + "." + key, node.get_value<std::string>());
    }
    return c;
}

Config Config::load(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot read config " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), p.has_parent_path() ? p.parent_path() : std::filesystem::path("."));
}

const std::string& Config::raw(const std::string& name, KeyType want) const {
    const KeySpec& k = spec(name);
    if (k.type != want) throw ConfigError("key '" + name + "' is a " + type_name(k.type));
    return values_.at(name);
}

int Config::get_int(const std::string& name) const {
    int v = 0;
    parse_int(raw(name, KeyType::Int), v);
    return v;
}

double Config::get_real(const std::string& name) const {
    double v = 0.0;
    parse_real(raw(name, KeyType::Real), v);
    return v;
}

bool Config::get_bool(const std::string& name) const {
    bool v = false;
    parse_bool(raw(name, KeyType::Bool), v);
    return v;
}

std::string Config::get_string(const std::string& name) const { return raw(name, KeyType::String); }

std::vector<double> Config::get_real_list(const std::string& name) const {
    std::vector<double> v;
    parse_real_list(raw(name, KeyType::RealList), v);
    return v;
}

std::filesystem::path Config::get_path(const std::string& name) const {
    const std::filesystem::path p = get_string(name);
    if (p.empty() || p.is_absolute()) return p;
    return base_dir_ / p;
}

std::string Config::dump() const {
    std::ostringstream os;
    std::string section;
    for (const auto& k : config_schema()) {
        const auto dot = k.name.find('.');
        const std::string s = k.name.substr(0, dot);
        if (s != section) {
            os << (section.empty() ? "" : "\n") << "[" << s << "]\n";
            section = s;
        }
        os << k.name.substr(dot + 1) << " = " << values_.at(k.name) << "\n";
    }
    return os.str();
}

}  // namespace perfplast
