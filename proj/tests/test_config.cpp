#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "rnnevo/config.hpp"

using namespace rnnevo;

TEST(RunType, LabelsOfStandardTypes) {
    const auto types = standard_run_types();
    ASSERT_EQ(types.size(), 11u);
    EXPECT_EQ(std::set<std::string>(types.begin(), types.end()).size(), 11u);
    for (const auto& label : types) {
        const auto parsed = parse_run_type(label);
        ASSERT_TRUE(parsed) << label;
        EXPECT_EQ(run_type_label(*parsed), label);
    }
    const std::vector<CellType> lstm_simple{CellType::simple, CellType::lstm};
    EXPECT_EQ(run_type_label(lstm_simple), "lstm+simple");
    EXPECT_EQ(run_type_label(std::vector<CellType>{CellType::simple}), "simple");
    EXPECT_EQ(parse_run_type("all")->size(), 6u);
    EXPECT_FALSE(parse_run_type("lstm+lstm"));
    EXPECT_FALSE(parse_run_type("tree"));
}

TEST(RunConfigJson, DefaultsRoundTrip) {
    RunConfig c;
    c.data_paths = {"a.csv", "b.csv"};
    c.operators.allowed_cell_types = {CellType::mgu, CellType::simple};
    c.training.granularity = UpdateGranularity::per_epoch;
    c.seed = 99;
    const auto back = run_config_from_json(to_json(c));
    EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
    EXPECT_EQ(run_type_label(back.operators.allowed_cell_types), "mgu+simple");
}

TEST(RunConfigJson, DefaultsMatchReferenceSetup) {
    const auto c = run_config_from_json(nlohmann::json::object());
    EXPECT_EQ(c.islands.n_islands, 10);
    EXPECT_EQ(c.islands.population_size, 5);
    EXPECT_EQ(c.islands.generation_budget, 2000);
    EXPECT_EQ(c.training.epochs, 10);
    EXPECT_EQ(c.training.learning_rate, 0.001);
    EXPECT_EQ(c.training.nesterov_mu, 0.9);
    EXPECT_EQ(c.training.clip_threshold, 1.0);
    EXPECT_EQ(c.training.boost_threshold, 0.05);
    EXPECT_EQ(c.training.lstm_forget_bias_offset, 1.0);
    EXPECT_EQ(c.operators.p_intra_crossover, 0.2);
    EXPECT_EQ(c.operators.p_mutation, 0.7);
    EXPECT_EQ(c.operators.p_inter_crossover, 0.1);
    EXPECT_EQ(c.folds.fold_size, 2);
}

TEST(RunConfigJson, PartialOverridesAndErrors) {
    const auto c = run_config_from_json(nlohmann::json::parse(
        R"({"islands":{"budget":300},"operators":{"run_type":"gru","mutation_weights":{"split_edge":0.1,"clone":0.0}}})"));
    EXPECT_EQ(c.islands.generation_budget, 300);
    EXPECT_EQ(c.islands.n_islands, 10);
    EXPECT_EQ(c.operators.weight(MutationOp::split_edge), 0.1);
    EXPECT_EQ(c.operators.allowed_cell_types, std::vector<CellType>{CellType::gru});
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"version":2})")), std::invalid_argument);
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"isalnds":{}})")), std::invalid_argument);
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"training":{"epochs":0}})")), std::invalid_argument);
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"training":{"epochs":"ten"}})")),
                 std::invalid_argument);
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"operators":{"mutation_weights":{"clone":0.5}}})")),
                 std::invalid_argument);
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"operators":{"run_type":"all","cell_types":["gru"]}})")),
                 std::invalid_argument);
}

TEST(RunConfig, EnvironmentOverridesOutputDir) {
    RunConfig c;
    ::setenv(kOutputDirEnv, "/tmp/elsewhere", 1);
    apply_environment(c);
    EXPECT_EQ(c.output_dir, "/tmp/elsewhere");
    ::setenv(kOutputDirEnv, "", 1);
    c.output_dir = "keep";
    apply_environment(c);
    EXPECT_EQ(c.output_dir, "keep");
    ::unsetenv(kOutputDirEnv);
}
