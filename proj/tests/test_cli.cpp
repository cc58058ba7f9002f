#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cvqec/config.hpp"
#include "cvqec/output.hpp"

using namespace cvqec;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("cvqec_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST(Settings, ParseCommentsAndWhitespace) {
    const auto s = parse_settings("# comment\n seed = 7\n\nformat=json\r\n");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.at("seed"), "7");
    EXPECT_EQ(s.at("format"), "json");
    EXPECT_THROW(parse_settings("seed 7\n"), std::invalid_argument);
    EXPECT_THROW(parse_settings("seed=1\nseed=2\n"), std::invalid_argument);
    EXPECT_THROW(parse_settings("=3\n"), std::invalid_argument);
}

TEST(Config, DefaultsWithSeed) {
    const auto c = resolve_config("fig2e", {}, {{"seed", "7"}}, nullptr);
    EXPECT_EQ(c.scenario, "fig2e");
    EXPECT_EQ(c.params.seed, 7u);
    EXPECT_EQ(c.params.gains.size(), 401u);
    EXPECT_EQ(c.format, OutputFormat::csv);
}

TEST(Config, GridAndThresholdFlags) {
    const auto c = resolve_config("fig4", {}, {{"pe_grid", "0:0.5:0.05"}, {"threshold", "0.8"}}, nullptr);
    EXPECT_EQ(c.params.pe_grid.size(), 11u);
    EXPECT_DOUBLE_EQ(c.params.rule.threshold, 0.8);
    EXPECT_EQ(parse_grid("0.1, 0.2,0.4").size(), 3u);
    EXPECT_THROW(parse_grid("0:1"), std::invalid_argument);
    EXPECT_THROW(parse_grid("0:1:x"), std::invalid_argument);
}

TEST(Config, AncillaSelection) {
    const auto c = resolve_config("fig3", {}, {{"ancilla", "vacuum"}}, nullptr);
    EXPECT_EQ(c.params.ancilla, AncillaSelection::vacuum);
    EXPECT_THROW(resolve_config("fig3", {}, {{"ancilla", "thermal"}}, nullptr), std::invalid_argument);
}

TEST(Config, Precedence) {
    const Settings file{{"seed", "1"}, {"output_dir", "from_file"}, {"pe", "0.3"}};
    const auto env_only = resolve_config("fig4", file, {}, "from_env");
    EXPECT_EQ(env_only.output_dir, "from_env");
    EXPECT_EQ(env_only.params.seed, 1u);
    EXPECT_DOUBLE_EQ(env_only.params.p_erase, 0.3);
    const auto flags = resolve_config("fig4", file, {{"output_dir", "from_flag"}, {"seed", "9"}}, "from_env");
    EXPECT_EQ(flags.output_dir, "from_flag");
    EXPECT_EQ(flags.params.seed, 9u);
    EXPECT_EQ(resolve_config("fig4", file, {}, "").output_dir, "from_file");
}

TEST(Config, Errors) {
    EXPECT_THROW(resolve_config("fig9", {}, {}, nullptr), std::invalid_argument);
    EXPECT_THROW(resolve_config("fig2e", {{"colour", "blue"}}, {}, nullptr), std::invalid_argument);
    EXPECT_THROW(resolve_config("fig2e", {}, {{"seed", "-3"}}, nullptr), std::invalid_argument);
    EXPECT_THROW(resolve_config("fig2e", {}, {{"pe", "0.2x"}}, nullptr), std::invalid_argument);
    EXPECT_THROW(resolve_config("fig2e", {}, {{"pe", "1.5"}}, nullptr), std::invalid_argument);
    EXPECT_THROW(resolve_config("fig2e", {}, {{"format", "xml"}}, nullptr), std::invalid_argument);
    EXPECT_THROW(resolve_config("", {}, {}, nullptr), std::invalid_argument);
}

TEST(Config, EchoRoundTrip) {
    const auto c = resolve_config("fig4", {},
                                  {{"seed", "18446744073709551615"},
                                   {"pe_grid", "0:0.5:0.05"},
                                   {"alpha_re", "0.1"},
                                   {"squeezer1_anti_db", "pure"},
                                   {"region", "box_accept"},
                                   {"threshold_units", "shot_noise"},
                                   {"format", "json"}},
                                  nullptr);
    const auto text = format_settings(echo_config(c));
    const auto again = resolve_config("", parse_settings(text), {}, nullptr);
    EXPECT_EQ(echo_config(again), echo_config(c));
    EXPECT_EQ(again.params.pe_grid, c.params.pe_grid);
    EXPECT_EQ(again.params.seed, 18446744073709551615ULL);
    EXPECT_FALSE(again.params.lab_squeezer1.antisqueeze_db.has_value());
    for (const auto& k : config_keys()) EXPECT_TRUE(echo_config(c).count(k.key)) << k.key;
}

TEST(Output, CsvHeaderAndAbsentSuccessProbability) {
    ScenarioResult a;
    a.scenario = "fig4";
    a.arm = "vacuum";
    a.param_name = "p_erase";
    a.param_value = 0.25;
    a.fidelity = 0.75;
    a.success_prob = 0.5;
    a.seed = 12;
    ScenarioResult b = a;
    b.arm = "baseline";
    b.success_prob.reset();
    const std::vector<ScenarioResult> rows{a, b};
    const auto csv = results_csv(rows);
    EXPECT_EQ(csv, "scenario,arm,param_name,param_value,fidelity,success_prob,trace_deficit,seed\n"
                   "fig4,vacuum,p_erase,0.25,0.75,0.5,0,12\n"
                   "fig4,baseline,p_erase,0.25,0.75,,0,12\n");
    const auto doc = nlohmann::json::parse(results_json("fig4", rows, {{"seed", "12"}}));
    EXPECT_EQ(doc["config"]["seed"], "12");
    EXPECT_TRUE(doc["results"][1]["success_prob"].is_null());
    EXPECT_EQ(doc["results"][0]["success_prob"], 0.5);
    EXPECT_FALSE(doc["results"][0].contains("wall_time"));
}

TEST(Output, DensityMatrixJsonIsRowMajor) {
    FockDensityMatrix rho;
    rho.entries = Eigen::MatrixXcd::Zero(2, 2);
    rho.entries(0, 1) = Complex{0.1, -0.2};
    rho.entries(1, 0) = Complex{0.1, 0.2};
    rho.entries(1, 1) = 1.0;
    const auto doc = nlohmann::json::parse(density_matrix_json(rho));
    EXPECT_EQ(doc["dim"], 2);
    ASSERT_EQ(doc["entries"].size(), 4u);
    EXPECT_EQ(doc["entries"][1][0], 0.1);
    EXPECT_EQ(doc["entries"][1][1], -0.2);
    EXPECT_EQ(doc["entries"][3][0], 1.0);
}

TEST(Output, WignerCsvLayout) {
    PhaseSpaceGrid g{-1.0, 1.0, 2, 0.0, 1.0, 3};
    Eigen::MatrixXd w = Eigen::MatrixXd::Constant(2, 3, 0.5);
    const auto csv = wigner_csv(w, g);
    EXPECT_EQ(csv.substr(0, 6), "x,p,w\n");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
    EXPECT_THROW(wigner_csv(Eigen::MatrixXd::Zero(3, 3), g), std::invalid_argument);
}

TEST(Output, FileNamesCarryScenarioTimestampAndSeed) {
    EXPECT_EQ(result_path("out", "fig3-input", "20260101T000000Z", 7, "json"),
              std::filesystem::path("out") / "fig3-input_20260101T000000Z_7.json");
}

TEST(Run, IdenticalConfigGivesIdenticalBytes) {
    const auto dir = fresh_dir("bytes");
    auto c = resolve_config("fig2e", {}, {{"gains", "0:4:0.5"}, {"seed", "7"}}, nullptr);
    c.output_dir = dir / "a";
    const auto first = run_scenario(c, "T");
    c.output_dir = dir / "b";
    const auto second = run_scenario(c, "T");
    ASSERT_EQ(first.files.size(), 1u);
    EXPECT_EQ(first.files[0].filename(), "fig2e_T_7.csv");
    EXPECT_EQ(slurp(first.files[0]), slurp(second.files[0]));
    EXPECT_FALSE(first.flagged);
    EXPECT_EQ(first.results.size(), 2 * 9u);

    c.format = OutputFormat::json;
    c.output_dir = dir / "c";
    const auto j1 = run_scenario(c, "T");
    const auto json_first = slurp(j1.files[0]);
    std::filesystem::remove_all(c.output_dir);
    const auto j2 = run_scenario(c, "T");
    EXPECT_EQ(json_first, slurp(j2.files[0]));
    std::filesystem::remove_all(dir);
}

TEST(Run, Fig3WritesFourMatricesAndASummary) {
    const auto dir = fresh_dir("fig3");
    auto c = resolve_config("fig3", {}, {{"grid_cells", "31"}, {"validation_cutoff", "30"}}, nullptr);
    c.output_dir = dir;
    const auto out = run_scenario(c, "T");
    ASSERT_EQ(out.files.size(), 5u);
    EXPECT_EQ(out.files[0].extension(), ".csv");
    for (std::size_t i = 1; i < 5; ++i) {
        EXPECT_EQ(out.files[i].extension(), ".json");
        const auto doc = nlohmann::json::parse(slurp(out.files[i]));
        EXPECT_EQ(doc["dim"], 30);
    }
    std::filesystem::remove_all(dir);
}

TEST(Run, UnwritableOutputNamesThePath) {
    auto c = resolve_config("fig2e", {}, {{"gains", "1"}}, nullptr);
    c.output_dir = "/proc/cvqec_not_writable";
    try {
        run_scenario(c, "T");
        FAIL() << "expected an I/O error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("/proc/cvqec_not_writable"), std::string::npos);
    }
}
