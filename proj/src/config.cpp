#include "affgebroid/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace affgebroid {

using nlohmann::json;

namespace {

std::string format_dim(double d) {
    std::ostringstream os;
    os << d;
    return os.str();
}

[[noreturn]] void field_error(const std::string& path, const std::string& msg) {
    throw InputError("config field '" + path + "': " + msg);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) field_error(path, "expected an object");
    for (const auto& [k, v] : obj.items())
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
            field_error(path + "." + k, "unknown key");
}

double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) field_error(path, "expected a number");
    return v.get<double>();
}

std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) field_error(path, "expected a string");
    return v.get<std::string>();
}

std::vector<std::string> get_names(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) field_error(path, "expected a non-empty array of names");
    std::vector<std::string> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(get_string(v[k], path + "[" + std::to_string(k) + "]"));
    return out;
}

Eigen::VectorXd get_vector(const json& v, const std::string& path, std::size_t expected) {
    if (!v.is_array()) field_error(path, "expected an array of numbers");
    if (v.size() != expected)
        field_error(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
    Eigen::VectorXd out(static_cast<Eigen::Index>(expected));
    for (std::size_t k = 0; k < expected; ++k)
        out[static_cast<Eigen::Index>(k)] = get_number(v[k], path + "[" + std::to_string(k) + "]");
    return out;
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name, const std::string& path) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) field_error(path, "unknown coordinate '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

class FieldParser {
public:
    FieldParser(std::map<std::string, double> constants) : constants_(std::move(constants)) {}

    ScalarField operator()(const json& v, const std::vector<std::string>& vars, const std::string& path) const {
        if (v.is_number()) return ScalarField::constant(vars.size(), v.get<double>());
        if (!v.is_string()) field_error(path, "expected a number or an expression string");
        try {
            return ScalarField::parse(v.get<std::string>(), vars, constants_);
        } catch (const ParseError& e) {
            field_error(path, e.what());
        }
    }

private:
    std::map<std::string, double> constants_;
};

void check_unique(const std::vector<std::string>& names, const std::string& path) {
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n == "H") field_error(path, "'H' is reserved for the Hamiltonian");
        if (!seen.insert(n).second) field_error(path, "duplicate coordinate name '" + n + "'");
    }
}

Tolerances parse_tolerances(const json& t, CheckTolerances& checks) {
    Tolerances tol;
    check_keys(t, "tolerances",
               {"cond_tol", "on_constraint_tol", "identities", "equations", "routes", "projectors", "legendre",
                "bracket_skew", "bracket_extension", "reference", "drift"});
    auto set = [&](const char* key, double& dst) {
        if (t.contains(key)) {
            dst = get_number(t[key], std::string("tolerances.") + key);
            if (!(dst > 0.0)) field_error(std::string("tolerances.") + key, "must be positive");
        }
    };
    set("cond_tol", tol.cond_tol);
    set("on_constraint_tol", tol.on_constraint_tol);
    set("identities", checks.identities);
    set("equations", checks.equations);
    set("routes", checks.routes);
    set("projectors", checks.projectors);
    set("legendre", checks.legendre);
    set("bracket_skew", checks.bracket_skew);
    set("bracket_extension", checks.bracket_extension);
    set("reference", checks.reference);
    set("drift", checks.drift);
    return tol;
}

void parse_catalog(const json& s, SystemConfig& cfg) {
    check_keys(s, "system", {"catalog", "parameters", "name"});
    cfg.catalog = get_string(s["catalog"], "system.catalog");
    if (s.contains("parameters")) {
        const json& p = s["parameters"];
        if (!p.is_object()) field_error("system.parameters", "expected an object");
        for (const auto& [k, v] : p.items()) {
            if (v.is_number())
                cfg.parameters[k] = v.get<double>();
            else if (v.is_string())
                cfg.expressions[k] = v.get<std::string>();
            else
                field_error("system.parameters." + k, "expected a number or an expression string");
        }
    }
    SystemDescriptor d = catalog_entry(*cfg.catalog, cfg.parameters, cfg.expressions);
    ConstrainedSystem built = d.build();
    // Rebuild with the configured tolerances.
    cfg.system = std::make_shared<const ConstrainedSystem>(built.model_ptr(), built.lagrangian(), built.constraints(),
                                                           cfg.tolerances, built.name(), built.time_index());
    cfg.system->require_regular();
    cfg.reference_accelerations = d.reference_accelerations;
    cfg.name = s.contains("name") ? get_string(s["name"], "system.name") : *cfg.catalog;
}

void parse_explicit(const json& s, SystemConfig& cfg) {
    check_keys(s, "system",
               {"name", "m", "n", "r", "base", "fiber", "time", "constants", "rho0", "rho", "c0", "c", "lagrangian",
                "hamiltonian", "constraints"});
    for (const char* key : {"base", "fiber", "lagrangian", "constraints"})
        if (!s.contains(key)) field_error(std::string("system.") + key, "missing");
    cfg.name = s.contains("name") ? get_string(s["name"], "system.name") : "custom";
    const auto base = get_names(s["base"], "system.base");
    const auto fiber = get_names(s["fiber"], "system.fiber");
    check_unique(base, "system.base");
    std::vector<std::string> all = base;
    all.insert(all.end(), fiber.begin(), fiber.end());
    check_unique(all, "system.fiber");
    const std::size_t m = base.size(), n = fiber.size();

    std::map<std::string, double> constants;
    if (s.contains("constants")) {
        if (!s["constants"].is_object()) field_error("system.constants", "expected an object");
        for (const auto& [k, v] : s["constants"].items()) {
            if (std::find(all.begin(), all.end(), k) != all.end())
                field_error("system.constants." + k, "shadows a coordinate name");
            constants[k] = get_number(v, "system.constants." + k);
        }
    }
    FieldParser field(constants);

    auto model = std::make_shared<AffgebroidModel>(base, fiber);
    if (s.contains("rho0")) {
        if (!s["rho0"].is_object()) field_error("system.rho0", "expected an object keyed by base coordinate");
        for (const auto& [i, v] : s["rho0"].items()) {
            std::string path = "system.rho0." + i;
            model->set_rho0(index_of(base, i, path), field(v, base, path));
        }
    }
    if (s.contains("rho")) {
        if (!s["rho"].is_object()) field_error("system.rho", "expected an object keyed by base coordinate");
        for (const auto& [i, row] : s["rho"].items()) {
            std::size_t ii = index_of(base, i, "system.rho." + i);
            if (!row.is_object()) field_error("system.rho." + i, "expected an object keyed by fiber coordinate");
            for (const auto& [a, v] : row.items()) {
                std::string path = "system.rho." + i + "." + a;
                model->set_rho(ii, index_of(fiber, a, path), field(v, base, path));
            }
        }
    }
    if (s.contains("c0")) {
        if (!s["c0"].is_object()) field_error("system.c0", "expected an object keyed by fiber coordinate");
        for (const auto& [g, row] : s["c0"].items()) {
            std::size_t gg = index_of(fiber, g, "system.c0." + g);
            if (!row.is_object()) field_error("system.c0." + g, "expected an object keyed by fiber coordinate");
            for (const auto& [a, v] : row.items()) {
                std::string path = "system.c0." + g + "." + a;
                model->set_c0(gg, index_of(fiber, a, path), field(v, base, path));
            }
        }
    }
    if (s.contains("c")) {
        const json& c = s["c"];
        if (!c.is_array()) field_error("system.c", "expected an array of {g, a, b, value}");
        for (std::size_t k = 0; k < c.size(); ++k) {
            std::string path = "system.c[" + std::to_string(k) + "]";
            check_keys(c[k], path, {"g", "a", "b", "value"});
            for (const char* key : {"g", "a", "b", "value"})
                if (!c[k].contains(key)) field_error(path + "." + key, "missing");
            std::size_t g = index_of(fiber, get_string(c[k]["g"], path + ".g"), path + ".g");
            std::size_t a = index_of(fiber, get_string(c[k]["a"], path + ".a"), path + ".a");
            std::size_t b = index_of(fiber, get_string(c[k]["b"], path + ".b"), path + ".b");
            if (a == b) field_error(path, "C^g_{ab} needs a != b");
            model->set_c(g, a, b, field(c[k]["value"], base, path + ".value"));
        }
    }

    Lagrangian L(m, n, field(s["lagrangian"], all, "system.lagrangian"));

    const json& cons = s["constraints"];
    if (!cons.is_array() || cons.empty()) field_error("system.constraints", "expected a non-empty array");
    const std::size_t r = cons.size();
    if (r > n)
        field_error("system.constraints",
                    "r = " + std::to_string(r) + " constraints exceed the fiber dimension n = " + std::to_string(n));
    std::vector<ScalarField> mu0;
    std::vector<std::vector<ScalarField>> mu;
    for (std::size_t a = 0; a < r; ++a) {
        std::string path = "system.constraints[" + std::to_string(a) + "]";
        check_keys(cons[a], path, {"mu0", "mu"});
        mu0.push_back(cons[a].contains("mu0") ? field(cons[a]["mu0"], base, path + ".mu0")
                                              : ScalarField::constant(m, 0.0));
        std::vector<ScalarField> row(n, ScalarField::constant(m, 0.0));
        if (!cons[a].contains("mu") || !cons[a]["mu"].is_object())
            field_error(path + ".mu", "expected an object keyed by fiber coordinate");
        for (const auto& [b, v] : cons[a]["mu"].items()) {
            std::string p = path + ".mu." + b;
            row[index_of(fiber, b, p)] = field(v, base, p);
        }
        mu.push_back(std::move(row));
    }

    auto check_dim = [&](const char* key, std::size_t actual) {
        if (!s.contains(key)) return;
        double d = get_number(s[key], std::string("system.") + key);
        if (d != static_cast<double>(actual))
            field_error(std::string("system.") + key, "dimension mismatch: declared " + format_dim(d) +
                                                          ", names give " + std::to_string(actual));
    };
    check_dim("m", m);
    check_dim("n", n);
    check_dim("r", r);

    std::optional<std::size_t> time_index;
    if (s.contains("time")) time_index = index_of(base, get_string(s["time"], "system.time"), "system.time");

    ConstraintSet cs(m, n, std::move(mu0), std::move(mu));
    cfg.system = std::make_shared<const ConstrainedSystem>(model, std::move(L), std::move(cs), cfg.tolerances,
                                                           cfg.name, time_index);
    cfg.system->require_regular();

    if (s.contains("hamiltonian")) {
        std::vector<std::string> hv = base;
        for (const auto& f : fiber) hv.push_back("p_" + f);
        cfg.hamiltonian = field(s["hamiltonian"], hv, "system.hamiltonian");
    }
    cfg.reference_accelerations = [](const PhasePoint&) { return std::optional<Eigen::VectorXd>{}; };
}

void parse_run(const json& r, const SystemConfig& sys, RunSpec& run) {
    check_keys(r, "run",
               {"command", "initial", "t0", "t1", "step", "method", "project", "hamiltonian", "seed", "samples",
                "points", "H1", "H2", "out"});
    if (r.contains("command")) run.command = parse_command(get_string(r["command"], "run.command"));
    const std::size_t m = sys.system->model().m(), n = sys.system->model().n();
    if (r.contains("initial")) {
        const json& ini = r["initial"];
        check_keys(ini, "run.initial", {"x", "y", "p"});
        if (!ini.contains("x")) field_error("run.initial.x", "missing");
        run.x0 = get_vector(ini["x"], "run.initial.x", m);
        if (ini.contains("y") && ini.contains("p")) field_error("run.initial", "give either y or p, not both");
        if (ini.contains("y")) run.y0 = get_vector(ini["y"], "run.initial.y", n);
        if (ini.contains("p")) {
            run.y0 = get_vector(ini["p"], "run.initial.p", n);
            run.initial_is_momentum = true;
            run.hamiltonian = true;
        }
        if (!run.y0) field_error("run.initial", "missing y (or p)");
    }
    if (r.contains("t0")) run.t0 = get_number(r["t0"], "run.t0");
    if (r.contains("t1")) run.t1 = get_number(r["t1"], "run.t1");
    if (r.contains("step")) run.step = get_number(r["step"], "run.step");
    if (r.contains("method")) run.method = parse_method(get_string(r["method"], "run.method"));
    if (r.contains("project")) {
        if (!r["project"].is_boolean()) field_error("run.project", "expected a boolean");
        run.project = r["project"].get<bool>();
    }
    if (r.contains("hamiltonian")) {
        if (!r["hamiltonian"].is_boolean()) field_error("run.hamiltonian", "expected a boolean");
        run.hamiltonian = r["hamiltonian"].get<bool>();
    }
    if (r.contains("seed")) {
        if (!r["seed"].is_number_unsigned()) field_error("run.seed", "expected a non-negative integer");
        run.seed = r["seed"].get<std::uint64_t>();
    }
    if (r.contains("samples")) {
        if (!r["samples"].is_number_unsigned() || r["samples"].get<std::size_t>() == 0)
            field_error("run.samples", "expected a positive integer");
        run.samples = r["samples"].get<std::size_t>();
    }
    if (r.contains("points")) {
        const json& pts = r["points"];
        if (!pts.is_array()) field_error("run.points", "expected an array of {x, y} or {x, p}");
        for (std::size_t k = 0; k < pts.size(); ++k) {
            std::string path = "run.points[" + std::to_string(k) + "]";
            check_keys(pts[k], path, {"x", "y", "p"});
            if (!pts[k].contains("x")) field_error(path + ".x", "missing");
            const char* fk = pts[k].contains("p") ? "p" : "y";
            if (!pts[k].contains(fk)) field_error(path, "missing y (or p)");
            run.points.emplace_back(get_vector(pts[k]["x"], path + ".x", m),
                                    get_vector(pts[k][fk], path + "." + fk, n));
        }
    }
    if (r.contains("H1")) run.h1 = get_string(r["H1"], "run.H1");
    if (r.contains("H2")) run.h2 = get_string(r["H2"], "run.H2");
    if (r.contains("out")) run.out_dir = get_string(r["out"], "run.out");
}

}  // namespace

const char* command_name(Command c) {
    switch (c) {
        case Command::Simulate: return "simulate";
        case Command::Check: return "check";
        case Command::Bracket: return "bracket";
        case Command::Derive: return "derive";
    }
    return "?";
}

Command parse_command(const std::string& s) {
    if (s == "simulate") return Command::Simulate;
    if (s == "check") return Command::Check;
    if (s == "bracket") return Command::Bracket;
    if (s == "derive") return Command::Derive;
    throw InputError("unknown command '" + s + "' (expected simulate, check, bracket or derive)");
}

std::vector<std::string> SystemConfig::momentum_names() const {
    std::vector<std::string> out;
    for (const auto& f : system->model().fiber_names()) out.push_back("p_" + f);
    return out;
}

HamiltonianData SystemConfig::hamiltonian_data() const {
    const auto& model = system->model();
    if (hamiltonian) return HamiltonianData::from_field(model.m(), model.n(), *hamiltonian);
    return hamiltonian_from_lagrangian(system->model_ptr(), system->lagrangian());
}

Config parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("config is not valid JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what());
    }
    check_keys(j, "<root>", {"schema_version", "system", "tolerances", "run"});
    if (!j.contains("schema_version")) field_error("schema_version", "missing");
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kConfigSchemaVersion)
        field_error("schema_version", "expected " + std::to_string(kConfigSchemaVersion));
    if (!j.contains("system")) field_error("system", "missing");

    Config cfg;
    if (j.contains("tolerances")) cfg.system.tolerances = parse_tolerances(j["tolerances"], cfg.system.checks);
    const json& s = j["system"];
    if (!s.is_object()) field_error("system", "expected an object");
    if (s.contains("catalog"))
        parse_catalog(s, cfg.system);
    else
        parse_explicit(s, cfg.system);
    const auto& model = cfg.system.system->model();
    cfg.system.base_names = model.base_names();
    cfg.system.fiber_names = model.fiber_names();
    if (j.contains("run")) parse_run(j["run"], cfg.system, cfg.run);
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

MomentumFunction momentum_expression(const std::string& text, const SystemConfig& sys, const HamiltonianData& H) {
    const std::size_t m = sys.system->model().m(), n = sys.system->model().n();
    std::vector<std::string> vars = sys.system->model().base_names();
    for (const auto& p : sys.momentum_names()) vars.push_back(p);
    vars.push_back("H");
    ScalarField f = ScalarField::parse(text, vars);
    const auto mi = static_cast<Eigen::Index>(m), ni = static_cast<Eigen::Index>(n);
    return [f, H, mi, ni](const MomentumPoint& q) {
        HamiltonianEval he = H.eval(q);
        Eigen::VectorXd z(mi + ni + 1);
        z << q.x, q.p, he.H;
        Eigen::VectorXd g = f.gradient(z);
        const double gH = g[mi + ni];
        return MomentumFunctionEval{f.value(z), g.head(mi) + gH * he.Hx, g.segment(mi, ni) + gH * he.Hp};
    };
}

}  // namespace affgebroid
