#include "ctp/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ctp/errors.hpp"

namespace ctp {
namespace {

std::string fmt_num(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_list(const std::vector<double>& xs) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ' ';
        out += fmt_num(xs[i]);
    }
    return out;
}

std::string fmt_list(const std::vector<uint64_t>& xs) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(xs[i]);
    }
    return out;
}

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool parse_double_token(const std::string& tok, double& out) {
    if (tok.empty()) return false;
    char* end = nullptr;
    out = std::strtod(tok.c_str(), &end);
    return end == tok.c_str() + tok.size();
}

bool parse_uint_token(const std::string& tok, uint64_t& out) {
    if (tok.empty() || tok[0] == '-' || tok[0] == '+') return false;
    char* end = nullptr;
    out = std::strtoull(tok.c_str(), &end, 10);
    return end == tok.c_str() + tok.size();
}

bool parse_double_list(const std::string& val, std::vector<double>& out) {
    out.clear();
    std::istringstream in(val);
    std::string tok;
    while (in >> tok) {
        double x;
        if (!parse_double_token(tok, x)) return false;
        out.push_back(x);
    }
    return true;
}

bool parse_uint_list(const std::string& val, std::vector<uint64_t>& out) {
    out.clear();
    std::istringstream in(val);
    std::string tok;
    while (in >> tok) {
        uint64_t x;
        if (!parse_uint_token(tok, x)) return false;
        out.push_back(x);
    }
    return true;
}

struct Issue {
    bool is_parse = false;
    int line = 0;
    std::string key;
    std::string message;

    std::string formatted() const {
        if (is_parse) return "config line " + std::to_string(line) + ": " + message;
        return "config key '" + key + "': " + message;
    }
};

struct Parser {
    ExperimentConfig cfg;
    std::vector<Issue> issues;
    std::vector<std::string> warnings;
    int line_no = 0;
    std::string section;
    std::set<std::string> seen;

    void perr(const std::string& msg) { issues.push_back({true, line_no, "", msg}); }
    void verr(const std::string& key, const std::string& msg) {
        issues.push_back({false, 0, qualified(key), msg});
    }
    std::string qualified(const std::string& key) const {
        return section.empty() ? key : section + "." + key;
    }

    void set_double(const std::string& key, const std::string& val, double& out) {
        double x;
        if (!parse_double_token(val, x))
            verr(key, "expected a number, got '" + val + "'");
        else
            out = x;
    }
    void set_uint(const std::string& key, const std::string& val, uint64_t& out) {
        uint64_t x;
        if (!parse_uint_token(val, x))
            verr(key, "expected a nonnegative integer, got '" + val + "'");
        else
            out = x;
    }
    void set_double_list(const std::string& key, const std::string& val,
                         std::vector<double>& out) {
        if (!parse_double_list(val, out)) verr(key, "expected space-separated numbers");
    }
    void set_uint_list(const std::string& key, const std::string& val,
                       std::vector<uint64_t>& out) {
        if (!parse_uint_list(val, out)) verr(key, "expected space-separated integers");
    }

    void handle(const std::string& key, const std::string& val);
    void validate();
};

void Parser::handle(const std::string& key, const std::string& val) {
    const std::string q = section + "/" + key;
    if (!seen.insert(q).second)
        warnings.push_back("duplicate key '" + qualified(key) + "' (last value wins)");

    if (section.empty()) {
        if (key == "experiment") {
            auto e = experiment_from_string(val);
            if (!e)
                verr(key, "unknown experiment '" + val + "'");
            else {
                cfg.experiment = *e;
                cfg.experiment_set = true;
            }
        } else if (key == "seed") {
            set_uint(key, val, cfg.seed);
            cfg.seed_set = true;
        } else if (key == "threads") {
            uint64_t t = 0;
            set_uint(key, val, t);
            cfg.threads = static_cast<int>(t);
        } else if (key == "output_dir") {
            if (val.empty())
                verr(key, "must be nonempty");
            else
                cfg.output_dir = val;
        } else if (key == "n_traj") {
            set_uint(key, val, cfg.n_traj);
        } else {
            verr(key, "unknown key");
        }
        return;
    }
    if (section == "sim") {
        auto& s = cfg.sim;
        if (key == "phi") set_double(key, val, s.phi);
        else if (key == "u") set_double(key, val, s.u);
        else if (key == "t_final") set_double(key, val, s.t_final);
        else if (key == "v0") set_double(key, val, s.v0);
        else if (key == "y0x") set_double(key, val, s.y0x);
        else if (key == "y0y") set_double(key, val, s.y0y);
        else if (key == "y0z") set_double(key, val, s.y0z);
        else if (key == "eps_geom") set_double(key, val, s.eps_geom);
        else if (key == "max_cascade") set_uint(key, val, s.max_cascade);
        else if (key == "v_budget") set_double(key, val, s.v_budget);
        else if (key == "cell_side") set_double(key, val, s.cell_side);
        else if (key == "merge_rule") {
            if (val == "center_of_mass") s.merge_rule = MergeRule::center_of_mass;
            else if (val == "pre_merge_normalized") s.merge_rule = MergeRule::pre_merge_normalized;
            else verr(key, "expected center_of_mass or pre_merge_normalized");
        } else verr(key, "unknown key");
        return;
    }
    if (section == "dist") {
        auto& d = cfg.dist;
        if (key == "kind") {
            if (val == "dirac") d.kind = DistKind::dirac;
            else if (val == "uniform") d.kind = DistKind::uniform;
            else if (val == "truncated_pareto") d.kind = DistKind::truncated_pareto;
            else if (val == "tabulated") d.kind = DistKind::tabulated;
            else verr(key, "unknown distribution kind '" + val + "'");
        } else if (key == "v0") set_double(key, val, d.v0);
        else if (key == "a") set_double(key, val, d.a);
        else if (key == "b") set_double(key, val, d.b);
        else if (key == "exponent") set_double(key, val, d.exponent);
        else if (key == "v_min") set_double(key, val, d.v_min);
        else if (key == "v_max") set_double(key, val, d.v_max);
        else if (key == "grid") set_double_list(key, val, d.grid);
        else if (key == "cdf") set_double_list(key, val, d.cdf);
        else verr(key, "unknown key");
        return;
    }
    if (section == "kinetic") {
        if (key == "max_jumps") set_uint(key, val, cfg.kinetic.max_jumps);
        else verr(key, "unknown key");
        return;
    }
    if (section == "marginal") {
        auto& m = cfg.marginal;
        if (key == "grid_kind") {
            if (val == "uniform") m.grid_kind = GridKind::uniform;
            else if (val == "geometric") m.grid_kind = GridKind::geometric;
            else verr(key, "expected uniform or geometric");
        } else if (key == "grid_lo") set_double(key, val, m.grid_lo);
        else if (key == "grid_hi") set_double(key, val, m.grid_hi);
        else if (key == "grid_nodes") set_uint(key, val, m.grid_nodes);
        else if (key == "cfl") set_double(key, val, m.cfl);
        else if (key == "mass_tol") set_double(key, val, m.mass_tol);
        else if (key == "overflow_tol") set_double(key, val, m.overflow_tol);
        else if (key == "checkpoints") set_double_list(key, val, m.checkpoints);
        else verr(key, "unknown key");
        return;
    }
    if (section == "chain") {
        auto& c = cfg.chain;
        if (key == "dt_factor") set_double(key, val, c.dt_factor);
        else if (key == "tail_tol") set_double(key, val, c.tail_tol);
        else if (key == "times") set_double_list(key, val, c.times);
        else verr(key, "unknown key");
        return;
    }
    if (section == "convergence") {
        auto& c = cfg.convergence;
        if (key == "phi_list") set_double_list(key, val, c.phi_list);
        else if (key == "n_boot") set_uint(key, val, c.n_boot);
        else verr(key, "unknown key");
        return;
    }
    if (section == "lemmas") {
        auto& l = cfg.lemmas;
        if (key == "xi_star_list") set_double_list(key, val, l.xi_star_list);
        else if (key == "n_list") set_uint_list(key, val, l.n_list);
        else if (key == "delta") set_double(key, val, l.delta);
        else verr(key, "unknown key");
        return;
    }
    if (section == "blowup") {
        auto& b = cfg.blowup;
        if (key == "n_obstacles") set_uint(key, val, b.n_obstacles);
        else if (key == "v_target") set_double(key, val, b.v_target);
        else if (key == "horizon") set_double(key, val, b.horizon);
        else if (key == "perturb_index") set_uint(key, val, b.perturb_index);
        else if (key == "perturb_offset") set_double(key, val, b.perturb_offset);
        else verr(key, "unknown key");
        return;
    }
    // Unknown sections are reported once, at the header line.
}

void Parser::validate() {
    section.clear();
    if (!cfg.seed_set) warnings.push_back("seed not set; defaulting to 0");
    if (cfg.threads < 1) verr("threads", "must be >= 1");
    if (cfg.n_traj < 1) verr("n_traj", "must be >= 1");

    section = "sim";
    const auto& s = cfg.sim;
    if (!(s.phi > 0.0 && s.phi < 1.0)) verr("phi", "out of (0,1)");
    if (!(s.u > 0.0) || !std::isfinite(s.u)) verr("u", "must be finite and positive");
    if (!(s.t_final > 0.0) || !std::isfinite(s.t_final)) verr("t_final", "must be finite and positive");
    if (!(s.v0 >= 0.0) || !std::isfinite(s.v0)) verr("v0", "must be finite and nonnegative");
    if (!std::isfinite(s.y0x) || !std::isfinite(s.y0y) || !std::isfinite(s.y0z))
        verr("y0x", "initial position must be finite");
    if (!(s.eps_geom > 0.0 && s.eps_geom <= 1e-3)) verr("eps_geom", "out of (0, 1e-3]");
    if (s.max_cascade < 1) verr("max_cascade", "must be >= 1");
    if (!(s.v_budget >= 0.0) || !std::isfinite(s.v_budget)) verr("v_budget", "must be finite and >= 0");
    if (!(s.cell_side >= 0.0) || !std::isfinite(s.cell_side)) verr("cell_side", "must be finite and >= 0");

    section = "dist";
    try {
        make_distribution(cfg.dist);
    } catch (const ValidationError& e) {
        // The distribution constructors already qualify their keys; keep the
        // raw message so formatted() does not stack a second prefix.
        std::string msg = e.what();
        const std::string prefix = "config key '" + e.key + "': ";
        if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
        issues.push_back({false, 0, e.key, msg});
    } catch (const Error& e) {
        verr("kind", e.what());
    }

    section = "marginal";
    const auto& m = cfg.marginal;
    if (m.grid_nodes < 2 || m.grid_nodes > 10000000) verr("grid_nodes", "out of [2, 1e7]");
    if (!(m.grid_lo >= 0.0)) verr("grid_lo", "must be >= 0");
    if (!(m.grid_hi > m.grid_lo)) verr("grid_hi", "must exceed grid_lo");
    if (m.grid_kind == GridKind::geometric && !(m.grid_lo > 0.0))
        verr("grid_lo", "geometric grid needs grid_lo > 0");
    if (!(m.cfl > 0.0 && m.cfl <= 1.0)) verr("cfl", "out of (0,1]");
    if (!(m.mass_tol > 0.0)) verr("mass_tol", "must be positive");
    if (!(m.overflow_tol > 0.0)) verr("overflow_tol", "must be positive");
    for (double t : m.checkpoints)
        if (!(t > 0.0) || t > s.t_final) {
            verr("checkpoints", "times must lie in (0, sim.t_final]");
            break;
        }

    section = "chain";
    const auto& c = cfg.chain;
    if (!(c.dt_factor > 0.0 && c.dt_factor <= 1.0)) verr("dt_factor", "out of (0,1]");
    if (!(c.tail_tol > 0.0 && c.tail_tol <= 1e-6)) verr("tail_tol", "out of (0, 1e-6]");
    if (c.times.empty()) verr("times", "must be nonempty");
    for (double t : c.times)
        if (!(t > 0.0)) {
            verr("times", "times must be positive");
            break;
        }

    section = "convergence";
    const auto& cv = cfg.convergence;
    if (cv.phi_list.empty()) verr("phi_list", "must be nonempty");
    for (size_t i = 0; i < cv.phi_list.size(); ++i) {
        if (!(cv.phi_list[i] > 0.0 && cv.phi_list[i] < 1.0)) {
            verr("phi_list", "entries must lie in (0,1)");
            break;
        }
        if (i && !(cv.phi_list[i] < cv.phi_list[i - 1])) {
            verr("phi_list", "must be strictly decreasing");
            break;
        }
    }
    if (cv.n_boot < 2) verr("n_boot", "must be >= 2");

    section = "lemmas";
    const auto& l = cfg.lemmas;
    const double e2 = std::exp(-2.0);
    if (l.xi_star_list.empty()) verr("xi_star_list", "must be nonempty");
    for (double xi : l.xi_star_list)
        if (!(xi > 0.0 && xi < e2)) {
            verr("xi_star_list", "entries must lie in (0, e^-2)");
            break;
        }
    if (l.n_list.empty()) verr("n_list", "must be nonempty");
    for (uint64_t n : l.n_list)
        if (n < 1) {
            verr("n_list", "entries must be >= 1");
            break;
        }
    if (!(l.delta > 0.0)) verr("delta", "must be positive");

    section = "blowup";
    const auto& b = cfg.blowup;
    if (b.n_obstacles < 1) verr("n_obstacles", "must be >= 1");
    if (!(b.v_target > 1.0)) verr("v_target", "must exceed the initial volume 1");
    if (!(b.horizon > 0.0)) verr("horizon", "must be positive");
    if (!std::isfinite(b.perturb_offset)) verr("perturb_offset", "must be finite");
    if (b.perturb_index > b.n_obstacles) verr("perturb_index", "exceeds n_obstacles");
    section.clear();
}

}  // namespace

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::particle: return "particle";
        case Experiment::kinetic: return "kinetic";
        case Experiment::marginal: return "marginal";
        case Experiment::convergence: return "convergence";
        case Experiment::asymptotics: return "asymptotics";
        case Experiment::lemmas: return "lemmas";
        case Experiment::blowup: return "blowup";
    }
    return "?";
}

std::optional<Experiment> experiment_from_string(const std::string& s) {
    for (Experiment e : {Experiment::particle, Experiment::kinetic, Experiment::marginal,
                         Experiment::convergence, Experiment::asymptotics, Experiment::lemmas,
                         Experiment::blowup})
        if (to_string(e) == s) return e;
    return std::nullopt;
}

std::string to_string(GridKind g) {
    return g == GridKind::uniform ? "uniform" : "geometric";
}

LemmasConfig::LemmasConfig()
    : xi_star_list{std::exp(-2.1), std::exp(-3.0), std::exp(-5.0)} {}

namespace {

void run_parser(Parser& p, const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        ++p.line_no;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                p.perr("malformed section header '" + line + "'");
                continue;
            }
            const std::string name = trim(line.substr(1, line.size() - 2));
            static const std::set<std::string> known = {"sim",      "dist",  "kinetic",
                                                        "marginal", "chain", "convergence",
                                                        "lemmas",   "blowup"};
            if (!known.count(name)) {
                p.perr("unknown section [" + name + "]");
                p.section = "?";  // swallow keys of the bad section
            } else {
                p.section = name;
            }
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            p.perr("expected 'key = value', got '" + line + "'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) {
            p.perr("empty key");
            continue;
        }
        if (p.section != "?") p.handle(key, val);
    }
    p.validate();
}

}  // namespace

ConfigOutcome parse_config(const std::string& text) {
    Parser p;
    run_parser(p, text);
    ConfigOutcome out;
    out.warnings = p.warnings;
    for (const Issue& i : p.issues) out.errors.push_back(i.formatted());
    if (out.errors.empty()) out.config = p.cfg;
    return out;
}

ExperimentConfig parse_config_or_throw(const std::string& text) {
    Parser p;
    run_parser(p, text);
    if (!p.issues.empty()) {
        const Issue& i = p.issues.front();
        if (i.is_parse) throw ParseError(i.line, i.message);
        throw ValidationError(i.key, i.message);
    }
    return p.cfg;
}

std::string dump_config(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "experiment = " << to_string(c.experiment) << "\n";
    o << "seed = " << c.seed << "\n";
    o << "threads = " << c.threads << "\n";
    o << "output_dir = " << c.output_dir << "\n";
    o << "n_traj = " << c.n_traj << "\n";
    o << "\n[sim]\n";
    o << "phi = " << fmt_num(c.sim.phi) << "\n";
    o << "u = " << fmt_num(c.sim.u) << "\n";
    o << "t_final = " << fmt_num(c.sim.t_final) << "\n";
    o << "v0 = " << fmt_num(c.sim.v0) << "\n";
    o << "y0x = " << fmt_num(c.sim.y0x) << "\n";
    o << "y0y = " << fmt_num(c.sim.y0y) << "\n";
    o << "y0z = " << fmt_num(c.sim.y0z) << "\n";
    o << "eps_geom = " << fmt_num(c.sim.eps_geom) << "\n";
    o << "max_cascade = " << c.sim.max_cascade << "\n";
    o << "v_budget = " << fmt_num(c.sim.v_budget) << "\n";
    o << "cell_side = " << fmt_num(c.sim.cell_side) << "\n";
    o << "merge_rule = " << to_string(c.sim.merge_rule) << "\n";
    o << "\n[dist]\n";
    o << "kind = " << to_string(c.dist.kind) << "\n";
    o << "v0 = " << fmt_num(c.dist.v0) << "\n";
    o << "a = " << fmt_num(c.dist.a) << "\n";
    o << "b = " << fmt_num(c.dist.b) << "\n";
    o << "exponent = " << fmt_num(c.dist.exponent) << "\n";
    o << "v_min = " << fmt_num(c.dist.v_min) << "\n";
    o << "v_max = " << fmt_num(c.dist.v_max) << "\n";
    o << "grid = " << fmt_list(c.dist.grid) << "\n";
    o << "cdf = " << fmt_list(c.dist.cdf) << "\n";
    o << "\n[kinetic]\n";
    o << "max_jumps = " << c.kinetic.max_jumps << "\n";
    o << "\n[marginal]\n";
    o << "grid_kind = " << to_string(c.marginal.grid_kind) << "\n";
    o << "grid_lo = " << fmt_num(c.marginal.grid_lo) << "\n";
    o << "grid_hi = " << fmt_num(c.marginal.grid_hi) << "\n";
    o << "grid_nodes = " << c.marginal.grid_nodes << "\n";
    o << "cfl = " << fmt_num(c.marginal.cfl) << "\n";
    o << "mass_tol = " << fmt_num(c.marginal.mass_tol) << "\n";
    o << "overflow_tol = " << fmt_num(c.marginal.overflow_tol) << "\n";
    o << "checkpoints = " << fmt_list(c.marginal.checkpoints) << "\n";
    o << "\n[chain]\n";
    o << "dt_factor = " << fmt_num(c.chain.dt_factor) << "\n";
    o << "tail_tol = " << fmt_num(c.chain.tail_tol) << "\n";
    o << "times = " << fmt_list(c.chain.times) << "\n";
    o << "\n[convergence]\n";
    o << "phi_list = " << fmt_list(c.convergence.phi_list) << "\n";
    o << "n_boot = " << c.convergence.n_boot << "\n";
    o << "\n[lemmas]\n";
    o << "xi_star_list = " << fmt_list(c.lemmas.xi_star_list) << "\n";
    o << "n_list = " << fmt_list(c.lemmas.n_list) << "\n";
    o << "delta = " << fmt_num(c.lemmas.delta) << "\n";
    o << "\n[blowup]\n";
    o << "n_obstacles = " << c.blowup.n_obstacles << "\n";
    o << "v_target = " << fmt_num(c.blowup.v_target) << "\n";
    o << "horizon = " << fmt_num(c.blowup.horizon) << "\n";
    o << "perturb_index = " << c.blowup.perturb_index << "\n";
    o << "perturb_offset = " << fmt_num(c.blowup.perturb_offset) << "\n";
    return o.str();
}

std::string dump_config_inline(const ExperimentConfig& c) {
    std::string s = dump_config(c);
    std::string out;
    out.reserve(s.size());
    bool prev_nl = false;
    for (char ch : s) {
        if (ch == '\n') {
            prev_nl = true;
            continue;
        }
        if (prev_nl && !out.empty()) out += "; ";
        prev_nl = false;
        out += ch;
    }
    return out;
}

std::string config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["experiment"] = to_string(c.experiment);
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["output_dir"] = c.output_dir;
    j["n_traj"] = c.n_traj;
    j["sim"] = {{"phi", c.sim.phi},
                {"u", c.sim.u},
                {"t_final", c.sim.t_final},
                {"v0", c.sim.v0},
                {"y0", {c.sim.y0x, c.sim.y0y, c.sim.y0z}},
                {"eps_geom", c.sim.eps_geom},
                {"max_cascade", c.sim.max_cascade},
                {"v_budget", c.sim.v_budget},
                {"cell_side", c.sim.cell_side},
                {"merge_rule", to_string(c.sim.merge_rule)}};
    j["dist"] = {{"kind", to_string(c.dist.kind)}, {"v0", c.dist.v0},
                 {"a", c.dist.a},                  {"b", c.dist.b},
                 {"exponent", c.dist.exponent},    {"v_min", c.dist.v_min},
                 {"v_max", c.dist.v_max},          {"grid", c.dist.grid},
                 {"cdf", c.dist.cdf}};
    j["kinetic"] = {{"max_jumps", c.kinetic.max_jumps}};
    j["marginal"] = {{"grid_kind", to_string(c.marginal.grid_kind)},
                     {"grid_lo", c.marginal.grid_lo},
                     {"grid_hi", c.marginal.grid_hi},
                     {"grid_nodes", c.marginal.grid_nodes},
                     {"cfl", c.marginal.cfl},
                     {"mass_tol", c.marginal.mass_tol},
                     {"overflow_tol", c.marginal.overflow_tol},
                     {"checkpoints", c.marginal.checkpoints}};
    j["chain"] = {{"dt_factor", c.chain.dt_factor},
                  {"tail_tol", c.chain.tail_tol},
                  {"times", c.chain.times}};
    j["convergence"] = {{"phi_list", c.convergence.phi_list}, {"n_boot", c.convergence.n_boot}};
    j["lemmas"] = {{"xi_star_list", c.lemmas.xi_star_list},
                   {"n_list", c.lemmas.n_list},
                   {"delta", c.lemmas.delta}};
    j["blowup"] = {{"n_obstacles", c.blowup.n_obstacles},
                   {"v_target", c.blowup.v_target},
                   {"horizon", c.blowup.horizon},
                   {"perturb_index", c.blowup.perturb_index},
                   {"perturb_offset", c.blowup.perturb_offset}};
    return j.dump(2);
}

std::string config_schema() {
    return R"(Configuration format: UTF-8 text, one `key = value` per line, '#' starts a
comment, sections in brackets.  Unknown keys and sections are errors.

Top level
  experiment    particle|kinetic|marginal|convergence|asymptotics|lemmas|blowup
                (optional when the subcommand names it)
  seed          nonnegative integer, default 0 (warns when missing)
  threads       worker threads, >= 1, default 1
  output_dir    default output directory, default "out"
  n_traj        trajectories/paths per ensemble, >= 1, default 1000

[sim]           particle simulator
  phi           volume fraction in (0,1), default 1e-3
  u             drift speed before rescaling, > 0, default 1
  t_final       horizon, > 0, default 1
  v0            initial tagged volume, >= 0, default 1
  y0x y0y y0z   initial rescaled position, default 0 0 0
  eps_geom      geometric tolerance in (0, 1e-3], default 1e-12
  max_cascade   cascade step bound, >= 1, default 1000000
  v_budget      volume ceiling, 0 = automatic, default 0
  cell_side     field cell side, 0 = automatic, default 0
  merge_rule    center_of_mass (default) or pre_merge_normalized

[dist]          obstacle volume law
  kind          dirac (default) | uniform | truncated_pareto | tabulated
  v0            dirac atom, > 0, default 1
  a b           uniform support, 0 <= a < b, defaults 0.5 1.5
  exponent      pareto exponent, default 2.5
  v_min v_max   pareto support (v_max may be inf when exponent > 1),
                defaults 0.5 8
  grid, cdf     tabulated piecewise-linear CDF nodes (space-separated)

[kinetic]       limiting jump process
  max_jumps     per-path jump cap, default 10000000

[marginal]      volume-marginal grid solver
  grid_kind     uniform (default) or geometric
  grid_lo       lowest node, >= 0 (geometric needs > 0), default 0
  grid_hi       highest node, default 64
  grid_nodes    node count in [2, 1e7], default 257
  cfl           dt * max rate bound in (0,1], default 0.5
  mass_tol      conservation tolerance, default 1e-8
  overflow_tol  admissible mass beyond grid_hi, default 1e-6
  checkpoints   observation times in (0, t_final] (space-separated)

[chain]         single-atom pure-birth chain
  dt_factor     dt * top rate bound in (0,1], default 0.5
  tail_tol      truncated-tail bound in (0, 1e-6], default 1e-12
  times         observation times, default 10 30 100

[convergence]   particle -> kinetic study
  phi_list      strictly decreasing, in (0,1), default 3e-2 1e-2 3e-3 1e-3
  n_boot        bootstrap resamples, >= 2, default 200

[lemmas]        tail bound, displacement audit, flight statistics
  xi_star_list  in (0, e^-2), default e^-2.1 e^-3 e^-5
  n_list        tail indices, >= 1, default 1 5 10 50 200
  delta         small-flight threshold scale, > 0, default 0.01

[blowup]        deterministic finite-time blow-up scene
  n_obstacles   chain length, default 10000
  v_target      escape volume, > 1, default 1e4
  horizon       time horizon, default 1
  perturb_index 1-based obstacle to displace, 0 = none (default)
  perturb_offset off-axis displacement, default 0
)";
}

VolumeDistribution make_distribution(const DistConfig& d) {
    switch (d.kind) {
        case DistKind::dirac: return VolumeDistribution::dirac(d.v0);
        case DistKind::uniform: return VolumeDistribution::uniform(d.a, d.b);
        case DistKind::truncated_pareto:
            return VolumeDistribution::truncated_pareto(d.exponent, d.v_min, d.v_max);
        case DistKind::tabulated: return VolumeDistribution::tabulated(d.grid, d.cdf);
    }
    throw ValidationError("dist.kind", "unknown kind");
}

SimParams make_sim_params(const ExperimentConfig& c) {
    SimParams p;
    p.phi = c.sim.phi;
    p.U = c.sim.u;
    p.T = c.sim.t_final;
    p.V0 = c.sim.v0;
    p.Y0 = {c.sim.y0x, c.sim.y0y, c.sim.y0z};
    p.seed = c.seed;
    p.eps_geom = c.sim.eps_geom;
    p.max_cascade = c.sim.max_cascade;
    p.v_budget = c.sim.v_budget;
    p.cell_side = c.sim.cell_side;
    p.merge_rule = c.sim.merge_rule;
    return p;
}

}  // namespace ctp
