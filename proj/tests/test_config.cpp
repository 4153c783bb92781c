#include "ctp/config.hpp"

#include <string>

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "ctp/errors.hpp"

namespace ctp {
namespace {

bool any_mentions(const std::vector<std::string>& messages, const std::string& needle) {
    for (const auto& m : messages)
        if (m.find(needle) != std::string::npos) return true;
    return false;
}

TEST(ParseConfig, MinimalFileUsesDefaults) {
    const auto out = parse_config("experiment = particle\nseed = 7\n");
    ASSERT_TRUE(out.config.has_value()) << (out.errors.empty() ? "" : out.errors.front());
    EXPECT_TRUE(out.errors.empty());
    EXPECT_EQ(out.config->experiment, Experiment::particle);
    EXPECT_TRUE(out.config->experiment_set);
    EXPECT_EQ(out.config->seed, 7u);
    EXPECT_TRUE(out.config->seed_set);
    EXPECT_EQ(out.config->threads, 1);
    EXPECT_EQ(out.config->n_traj, 1000u);
    EXPECT_DOUBLE_EQ(out.config->sim.phi, 1e-3);
}

TEST(ParseConfig, SectionsAndCommentsParse) {
    const std::string text =
        "# full example\n"
        "experiment = convergence\n"
        "seed = 11\n"
        "threads = 2\n"
        "n_traj = 500   # inline comment\n"
        "\n"
        "[sim]\n"
        "phi = 0.01\n"
        "t_final = 2.5\n"
        "\n"
        "[dist]\n"
        "kind = uniform\n"
        "a = 0.25\n"
        "b = 2.0\n"
        "\n"
        "[convergence]\n"
        "phi_list = 0.03 0.01 0.003\n"
        "n_boot = 64\n";
    const auto out = parse_config(text);
    ASSERT_TRUE(out.config.has_value()) << (out.errors.empty() ? "" : out.errors.front());
    EXPECT_EQ(out.config->experiment, Experiment::convergence);
    EXPECT_EQ(out.config->threads, 2);
    EXPECT_EQ(out.config->n_traj, 500u);
    EXPECT_DOUBLE_EQ(out.config->sim.phi, 0.01);
    EXPECT_DOUBLE_EQ(out.config->sim.t_final, 2.5);
    EXPECT_EQ(out.config->dist.kind, DistKind::uniform);
    EXPECT_DOUBLE_EQ(out.config->dist.a, 0.25);
    ASSERT_EQ(out.config->convergence.phi_list.size(), 3u);
    EXPECT_DOUBLE_EQ(out.config->convergence.phi_list[1], 0.01);
    EXPECT_EQ(out.config->convergence.n_boot, 64u);
}

TEST(ParseConfig, RangeErrorNamesTheQualifiedKey) {
    const auto out = parse_config("seed = 1\n[sim]\nphi = 1.5\n");
    EXPECT_FALSE(out.config.has_value());
    EXPECT_TRUE(any_mentions(out.errors, "sim.phi")) << out.errors.front();
}

TEST(ParseConfig, UnknownKeyAndSectionAreErrors) {
    const auto bad_key = parse_config("seed = 1\n[sim]\nphj = 0.5\n");
    EXPECT_FALSE(bad_key.config.has_value());
    EXPECT_TRUE(any_mentions(bad_key.errors, "unknown key"));
    EXPECT_TRUE(any_mentions(bad_key.errors, "phj"));

    const auto bad_section = parse_config("seed = 1\n[simulation]\nphi = 0.5\n");
    EXPECT_FALSE(bad_section.config.has_value());
    EXPECT_TRUE(any_mentions(bad_section.errors, "simulation"));
}

TEST(ParseConfig, CollectsEveryErrorNotJustTheFirst) {
    const std::string text =
        "seed = 1\n"
        "threads = 0\n"
        "[sim]\n"
        "phi = -2\n"
        "t_final = 0\n"
        "[marginal]\n"
        "grid_nodes = 1\n";
    const auto out = parse_config(text);
    EXPECT_FALSE(out.config.has_value());
    EXPECT_GE(out.errors.size(), 4u);
    EXPECT_TRUE(any_mentions(out.errors, "threads"));
    EXPECT_TRUE(any_mentions(out.errors, "sim.phi"));
    EXPECT_TRUE(any_mentions(out.errors, "sim.t_final"));
    EXPECT_TRUE(any_mentions(out.errors, "marginal.grid_nodes"));
}

TEST(ParseConfig, MalformedLineReportsLineNumber) {
    const auto out = parse_config("seed = 1\nthis line has no equals sign\n");
    EXPECT_FALSE(out.config.has_value());
    EXPECT_TRUE(any_mentions(out.errors, "line 2"));
}

TEST(ParseConfig, MissingSeedWarnsButParses) {
    const auto out = parse_config("experiment = particle\n");
    ASSERT_TRUE(out.config.has_value());
    EXPECT_FALSE(out.config->seed_set);
    EXPECT_TRUE(any_mentions(out.warnings, "seed"));
}

TEST(ParseConfig, DuplicateKeyWarnsAndLastWins) {
    const auto out = parse_config("seed = 1\nseed = 2\n");
    ASSERT_TRUE(out.config.has_value());
    EXPECT_EQ(out.config->seed, 2u);
    EXPECT_TRUE(any_mentions(out.warnings, "duplicate"));
}

TEST(ParseConfigOrThrow, ThrowsTypedExceptions) {
    EXPECT_THROW(parse_config_or_throw("seed = 1\nnonsense line\n"), ParseError);
    EXPECT_THROW(parse_config_or_throw("seed = 1\n[sim]\nphi = 7\n"), ValidationError);
    try {
        parse_config_or_throw("seed = 1\n[sim]\nphi = 7\n");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.key, "sim.phi");
    }
    EXPECT_NO_THROW(parse_config_or_throw("seed = 1\n"));
}

TEST(DumpConfig, RoundTripsByteIdentically) {
    const std::string text =
        "experiment = marginal\n"
        "seed = 99\n"
        "n_traj = 123\n"
        "[sim]\n"
        "phi = 0.031\n"
        "v0 = 2\n"
        "[dist]\n"
        "kind = truncated_pareto\n"
        "exponent = 2.5\n"
        "v_min = 0.5\n"
        "v_max = 8\n"
        "[marginal]\n"
        "grid_kind = geometric\n"
        "grid_lo = 0.125\n"
        "grid_hi = 128\n"
        "grid_nodes = 513\n"
        "checkpoints = 0.5 1\n";
    const auto first = parse_config(text);
    ASSERT_TRUE(first.config.has_value()) << (first.errors.empty() ? "" : first.errors.front());
    const std::string echo = dump_config(*first.config);

    const auto second = parse_config(echo);
    ASSERT_TRUE(second.config.has_value())
        << (second.errors.empty() ? "" : second.errors.front());
    EXPECT_EQ(dump_config(*second.config), echo);
}

TEST(DumpConfig, DefaultsRoundTripToo) {
    const ExperimentConfig def;
    const std::string echo = dump_config(def);
    const auto parsed = parse_config(echo);
    ASSERT_TRUE(parsed.config.has_value())
        << (parsed.errors.empty() ? "" : parsed.errors.front());
    EXPECT_EQ(dump_config(*parsed.config), echo);
}

TEST(DumpConfig, InlineFormReplacesNewlines) {
    const ExperimentConfig def;
    const std::string inline_form = dump_config_inline(def);
    EXPECT_EQ(inline_form.find('\n'), std::string::npos);
    EXPECT_NE(inline_form.find("experiment = "), std::string::npos);
}

TEST(ConfigJson, ParsesAsJsonWithExpectedFields) {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::lemmas;
    cfg.seed = 21;
    cfg.sim.phi = 0.003;
    const auto j = nlohmann::json::parse(config_to_json(cfg));
    EXPECT_EQ(j.at("experiment").get<std::string>(), "lemmas");
    EXPECT_EQ(j.at("seed").get<uint64_t>(), 21u);
    EXPECT_DOUBLE_EQ(j.at("sim").at("phi").get<double>(), 0.003);
    EXPECT_TRUE(j.at("lemmas").at("n_list").is_array());
}

TEST(ConfigSchema, DocumentsEveryKey) {
    const std::string schema = config_schema();
    for (const char* key :
         {"experiment", "seed", "threads", "output_dir", "n_traj", "[sim]", "phi", "t_final",
          "eps_geom", "merge_rule", "[dist]", "kind", "[kinetic]", "max_jumps", "[marginal]",
          "grid_nodes", "cfl", "[chain]", "dt_factor", "[convergence]", "phi_list", "[lemmas]",
          "xi_star_list", "[blowup]", "v_target"}) {
        EXPECT_NE(schema.find(key), std::string::npos) << key;
    }
}

TEST(MakeDistribution, BuildsEachKind) {
    DistConfig d;
    d.kind = DistKind::dirac;
    d.v0 = 3.0;
    EXPECT_DOUBLE_EQ(make_distribution(d).sample(0.5), 3.0);

    d.kind = DistKind::uniform;
    d.a = 1.0;
    d.b = 2.0;
    EXPECT_DOUBLE_EQ(make_distribution(d).mean(), 1.5);

    d.kind = DistKind::truncated_pareto;
    d.exponent = 2.5;
    d.v_min = 0.5;
    d.v_max = 8.0;
    EXPECT_NEAR(make_distribution(d).mean(), 1.1428571428571429, 1e-13);

    d.kind = DistKind::tabulated;
    d.grid = {1.0, 2.0};
    d.cdf = {0.0, 1.0};
    EXPECT_DOUBLE_EQ(make_distribution(d).mean(), 1.5);
}

TEST(MakeSimParams, MapsSectionOntoSimulator) {
    ExperimentConfig cfg;
    cfg.seed = 17;
    cfg.sim.phi = 0.02;
    cfg.sim.u = 2.0;
    cfg.sim.t_final = 3.0;
    cfg.sim.v0 = 1.5;
    cfg.sim.y0x = 0.1;
    cfg.sim.y0y = -0.2;
    cfg.sim.y0z = 0.3;
    cfg.sim.eps_geom = 1e-10;
    cfg.sim.max_cascade = 77;
    cfg.sim.merge_rule = MergeRule::pre_merge_normalized;
    const SimParams p = make_sim_params(cfg);
    EXPECT_DOUBLE_EQ(p.phi, 0.02);
    EXPECT_DOUBLE_EQ(p.U, 2.0);
    EXPECT_DOUBLE_EQ(p.T, 3.0);
    EXPECT_DOUBLE_EQ(p.V0, 1.5);
    EXPECT_EQ(p.seed, 17u);
    EXPECT_DOUBLE_EQ(p.Y0[0], 0.1);
    EXPECT_DOUBLE_EQ(p.Y0[1], -0.2);
    EXPECT_DOUBLE_EQ(p.Y0[2], 0.3);
    EXPECT_DOUBLE_EQ(p.eps_geom, 1e-10);
    EXPECT_EQ(p.max_cascade, 77u);
    EXPECT_EQ(p.merge_rule, MergeRule::pre_merge_normalized);
}

TEST(ExperimentNames, RoundTrip) {
    for (Experiment e : {Experiment::particle, Experiment::kinetic, Experiment::marginal,
                         Experiment::convergence, Experiment::asymptotics, Experiment::lemmas,
                         Experiment::blowup}) {
        const auto back = experiment_from_string(to_string(e));
        ASSERT_TRUE(back.has_value()) << to_string(e);
        EXPECT_EQ(*back, e);
    }
    EXPECT_FALSE(experiment_from_string("prticle").has_value());
}

TEST(ParseConfig, TabulatedDistributionRoundTrips) {
    const std::string text =
        "seed = 3\n"
        "[dist]\n"
        "kind = tabulated\n"
        "grid = 0.5 1 2 4\n"
        "cdf = 0 0.25 0.75 1\n";
    const auto out = parse_config(text);
    ASSERT_TRUE(out.config.has_value()) << (out.errors.empty() ? "" : out.errors.front());
    const auto law = make_distribution(out.config->dist);
    EXPECT_EQ(law.kind(), DistKind::tabulated);
    EXPECT_DOUBLE_EQ(law.cdf(1.0), 0.25);

    const std::string echo = dump_config(*out.config);
    const auto again = parse_config(echo);
    ASSERT_TRUE(again.config.has_value());
    EXPECT_EQ(dump_config(*again.config), echo);
}

TEST(ParseConfig, BadDistParametersSurfaceQualifiedKeys) {
    const auto out = parse_config("seed = 1\n[dist]\nkind = uniform\na = 2\nb = 1\n");
    EXPECT_FALSE(out.config.has_value());
    EXPECT_TRUE(any_mentions(out.errors, "dist."));
}

}  // namespace
}  // namespace ctp
