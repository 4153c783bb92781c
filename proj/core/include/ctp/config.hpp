#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctp/sim.hpp"
#include "ctp/volume_dist.hpp"

namespace ctp {

enum class Experiment { particle, kinetic, marginal, convergence, asymptotics, lemmas, blowup };

std::string to_string(Experiment e);
std::optional<Experiment> experiment_from_string(const std::string& s);

enum class GridKind { uniform, geometric };

std::string to_string(GridKind g);

struct DistConfig {
    DistKind kind = DistKind::dirac;
    double v0 = 1.0;                  // dirac
    double a = 0.5, b = 1.5;          // uniform
    double exponent = 2.5;            // truncated_pareto
    double v_min = 0.5;
    double v_max = 8.0;               // may be inf (exponent > 1 then required)
    std::vector<double> grid, cdf;    // tabulated
};

struct SimConfig {
    double phi = 1e-3;
    double u = 1.0;
    double t_final = 1.0;
    double v0 = 1.0;
    double y0x = 0.0, y0y = 0.0, y0z = 0.0;
    double eps_geom = 1e-12;
    uint64_t max_cascade = 1000000;
    double v_budget = 0.0;   // 0 = automatic
    double cell_side = 0.0;  // 0 = automatic
    MergeRule merge_rule = MergeRule::center_of_mass;
};

struct KineticConfig {
    uint64_t max_jumps = 10000000;
};

struct MarginalConfig {
    GridKind grid_kind = GridKind::uniform;
    double grid_lo = 0.0;
    double grid_hi = 64.0;
    uint64_t grid_nodes = 257;
    double cfl = 0.5;
    double mass_tol = 1e-8;
    double overflow_tol = 1e-6;
    std::vector<double> checkpoints;  // empty = final time only
};

struct ChainConfig {
    double dt_factor = 0.5;
    double tail_tol = 1e-12;
    std::vector<double> times = {10.0, 30.0, 100.0};
};

struct ConvergenceConfig {
    std::vector<double> phi_list = {3e-2, 1e-2, 3e-3, 1e-3};
    uint64_t n_boot = 200;
};

struct LemmasConfig {
    std::vector<double> xi_star_list;     // default e^-2.1, e^-3, e^-5
    std::vector<uint64_t> n_list = {1, 5, 10, 50, 200};
    double delta = 0.01;
    LemmasConfig();
};

struct BlowupConfig {
    uint64_t n_obstacles = 10000;
    double v_target = 1e4;
    double horizon = 1.0;
    uint64_t perturb_index = 0;  // 0 = unperturbed
    double perturb_offset = 0.0;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::particle;
    bool experiment_set = false;
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    std::string output_dir = "out";
    uint64_t n_traj = 1000;

    SimConfig sim;
    DistConfig dist;
    KineticConfig kinetic;
    MarginalConfig marginal;
    ChainConfig chain;
    ConvergenceConfig convergence;
    LemmasConfig lemmas;
    BlowupConfig blowup;
};

struct ConfigOutcome {
    std::optional<ExperimentConfig> config;  // set iff errors is empty
    std::vector<std::string> errors;         // all problems, not just the first
    std::vector<std::string> warnings;
};

/// Parses the flat key = value format ('#' comments, [section] headers) and
/// validates every field, collecting all errors.
ConfigOutcome parse_config(const std::string& text);

/// Same, but throws the first problem as its typed exception
/// (ParseError / ValidationError).
ExperimentConfig parse_config_or_throw(const std::string& text);

/// Canonical echo: every key in a fixed order with canonical number
/// formatting.  parse(dump(c)) reproduces dump(c) byte-identically.
std::string dump_config(const ExperimentConfig& config);

/// dump_config flattened to one line (for CSV comment headers).
std::string dump_config_inline(const ExperimentConfig& config);

/// JSON rendering of the parsed config (manifest payload).
std::string config_to_json(const ExperimentConfig& config);

/// The documented key list for --print-config-schema.
std::string config_schema();

/// Builds the volume law the [dist] section describes.
VolumeDistribution make_distribution(const DistConfig& dist);

/// Maps the [sim] section (plus top-level seed) onto simulator parameters.
SimParams make_sim_params(const ExperimentConfig& config);

}  // namespace ctp
