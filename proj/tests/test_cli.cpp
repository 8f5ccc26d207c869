#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "wgqed/acceptance.hpp"
#include "wgqed/config.hpp"
#include "wgqed/runner.hpp"
#include "wgqed/series_io.hpp"

namespace wgqed {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("wgqed_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(WGQED_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_run(double cutoff = 1e-10) {
  return {{"name", "small"},
          {"n_qubits", 2},
          {"tau", 0.1},
          {"phi", 0.4},
          {"horizon", 0.6},
          {"truncation", {{"svd_cutoff", cutoff}}}};
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const auto path = dir / "config.json";
  std::ofstream(path) << doc.dump(2);
  return path;
}

TEST(Config, PresetsExist) {
  for (const auto& name : preset_names()) EXPECT_FALSE(preset(name).runs.empty()) << name;
  EXPECT_THROW(preset("fig9"), ConfigError);
  EXPECT_EQ(preset("fig6").runs.size(), 8u);
  EXPECT_EQ(preset("fig3").runs.size(), 5u);
  EXPECT_EQ(preset("fig2c").runs[0].params.tau, 2.0);
}

TEST(Config, SnappedStepDividesDelay) {
  EXPECT_EQ(snapped_dt(0.0, 0.02), 0.02);
  EXPECT_DOUBLE_EQ(snapped_dt(0.5, 0.02), 0.02);
  EXPECT_DOUBLE_EQ(snapped_dt(0.375, 0.02), 0.375 / 19);
  EXPECT_DOUBLE_EQ(snapped_dt(0.895, 0.02), 0.895 / 45);
  for (const auto& r : preset("fig3").runs) EXPECT_NO_THROW(r.params.validate()) << r.name;
  EXPECT_THROW(snapped_dt(1.0, 0.0), ConfigError);
}

TEST(Config, ParsesExplicitRuns) {
  json doc = {{"runs", {small_run()}}, {"out", "somewhere"}, {"deterministic", true}};
  const auto c = parse_config(doc);
  ASSERT_EQ(c.runs.size(), 1u);
  EXPECT_EQ(c.out_dir, "somewhere");
  EXPECT_TRUE(c.deterministic);
  const auto& r = c.runs[0];
  EXPECT_EQ(r.params.n_qubits, 2);
  EXPECT_EQ(r.params.gamma_left, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(r.params.phi, 0.4);
  EXPECT_EQ(r.truncation.max_bond, 64u);
  EXPECT_EQ(r.steps(), 30u);
  // The JSON written to the sidecar parses back to the same run.
  json again = {{"runs", {r.to_json()}}};
  EXPECT_EQ(parse_config(again).runs[0].to_json(), r.to_json());
}

TEST(Config, RejectsUnknownKeys) {
  json top = {{"runs", {small_run()}}, {"color", "red"}};
  EXPECT_THROW(parse_config(top), ConfigError);
  json run = small_run();
  run["gama_L"] = {0.5, 0.5};
  EXPECT_THROW(parse_config(json{{"runs", {run}}}), ConfigError);
  json trunc = small_run();
  trunc["truncation"]["cutoff"] = 1e-8;
  EXPECT_THROW(parse_config(json{{"runs", {trunc}}}), ConfigError);
}

TEST(Config, RejectsInvalidValues) {
  json run = small_run();
  run["tau"] = 0.105;
  EXPECT_THROW(parse_config(json{{"runs", {run}}}), ConfigError);
  run = small_run();
  run["omega0"] = 3.0;
  EXPECT_THROW(parse_config(json{{"runs", {run}}}), ConfigError);
  run = small_run();
  run["initial"] = "eeg";
  EXPECT_THROW(parse_config(json{{"runs", {run}}}), ConfigError);
  run = small_run();
  run["truncation"]["svd_cutoff"] = 1.5;
  EXPECT_THROW(parse_config(json{{"runs", {run}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"preset", "fig2a"}, {"runs", {small_run()}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"runs", {small_run(), small_run()}}}), ConfigError);
  EXPECT_THROW(parse_config(json::array()), ConfigError);
}

TEST(Config, PhaseFromCarrierFrequency) {
  json run = small_run();
  run.erase("phi");
  run["omega0"] = 10.0;
  const auto r = parse_config(json{{"runs", {run}}}).runs[0];
  EXPECT_NEAR(r.params.phi, phase_from_delay(10.0, 0.1), 1e-15);
}

TEST(Config, SweepCopiesBase) {
  const auto base = parse_config(json{{"runs", {small_run()}}}).runs[0];
  const auto s = sweep(base, "tau", {0.0, 0.3, 0.07});
  ASSERT_EQ(s.runs.size(), 3u);
  EXPECT_EQ(s.runs[1].params.tau, 0.3);
  EXPECT_EQ(s.runs[1].name, "small_tau0.3");
  EXPECT_NO_THROW(s.runs[2].params.validate());
  EXPECT_THROW(sweep(base, "gamma", {1.0}), ConfigError);
  EXPECT_THROW(sweep(base, "tau", {}), ConfigError);
}

TEST(Csv, ShortestRoundTrip) {
  EXPECT_EQ(format_shortest(0.1), "0.1");
  EXPECT_EQ(format_shortest(1.0), "1");
  EXPECT_EQ(format_shortest(-2.5e-300), "-2.5e-300");
  RunSpec spec = parse_config(json{{"runs", {small_run()}}}).runs[0];
  const auto result = execute(spec, {true, false, 0.0});
  std::stringstream ss(to_csv(result.series));
  const auto table = read_csv(ss);
  EXPECT_EQ(table.header, result.series.columns());
  ASSERT_EQ(table.rows.size(), result.series.samples.size());
  for (const auto& name : table.header) EXPECT_EQ(table.column(name), result.series.column(name));
}

TEST(Csv, ColumnOrder) {
  ObservableSeries s;
  s.n_qubits = 2;
  const std::vector<std::string> expected{
      "t",         "n_tls_1",       "n_tls_2",       "P0",           "P1",
      "P2",        "nout_R",        "nout_L",        "Nout_R",       "Nout_L",
      "Nin_R",     "Nin_L",         "S_a",           "S_c",          "g1_R",
      "g2_R",      "corr_LR_re",    "corr_LR_im",    "corr_atoms_re", "corr_atoms_im",
      "corr_af_1_re", "corr_af_1_im", "corr_af_2_re", "corr_af_2_im", "cons_residual",
      "trunc_weight"};
  EXPECT_EQ(s.columns(), expected);
}

TEST(Sidecar, RecordsAudit) {
  RunSpec spec = parse_config(json{{"runs", {small_run()}}}).runs[0];
  const auto result = execute(spec, {true, true, 0.0});
  ASSERT_TRUE(result.oracle.has_value());
  EXPECT_TRUE(result.oracle->pass()) << result.oracle->summary();
  const auto j = sidecar(result.series, result.meta);
  EXPECT_EQ(j["schema_version"], kSeriesSchemaVersion);
  EXPECT_EQ(j["columns"].get<std::vector<std::string>>(), result.series.columns());
  EXPECT_EQ(j["config"], spec.to_json());
  EXPECT_LT(j["gate"]["unitarity_error"].get<double>(), 1e-10);
  EXPECT_TRUE(j.contains("truncation"));
  EXPECT_TRUE(j.contains("wall_seconds"));
  EXPECT_TRUE(j["oracle"]["pass"].get<bool>());
}

TEST(NegativeControl, CorruptedGateFailsUnitarity) {
  auto gate = build_step_gate(PhysicalParams::symmetric(2, 0.5, 0.0));
  const auto good = check_unitarity({{"intact", gate}});
  EXPECT_TRUE(good.pass) << good.detail;
  gate.gate.block(0).matrix(0, 0) *= 1.001;
  const auto bad = check_unitarity({{"intact", build_step_gate(PhysicalParams::symmetric(2, 0.0, 0.0))},
                                    {"corrupted", gate}});
  EXPECT_FALSE(bad.pass);
  EXPECT_NE(bad.detail.find("corrupted"), std::string::npos) << bad.detail;
  EXPECT_NE(format_result(bad).find("[FAIL] U"), std::string::npos);
}

TEST(NegativeControl, CoarseCutoffFailsConservation) {
  RunSpec spec = parse_config(json{{"runs", {small_run()}}}).runs[0];
  spec.params = PhysicalParams::symmetric(2, 0.5, 0.0);
  spec.horizon = 2.0;
  const auto fine = execute(spec).series;
  spec.truncation.svd_cutoff = 0.1;
  const auto coarse = execute(spec).series;
  const auto ok = check_conservation({{"default", &fine}});
  EXPECT_TRUE(ok.pass) << ok.detail;
  const auto r = check_conservation({{"default", &fine}, {"cutoff 0.1", &coarse}});
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.detail.find("cutoff 0.1"), std::string::npos) << r.detail;
  EXPECT_NE(r.detail.find("driven by truncation"), std::string::npos) << r.detail;
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("exit");
  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli("run no_such_preset --out " + dir.string()), 1);
  EXPECT_EQ(cli("run fig2a --dt -1 --out " + dir.string()), 1);

  const auto good = write_config(dir, json{{"runs", {small_run()}}});
  EXPECT_EQ(cli("run " + good.string() + " --oracle-check --out " + (dir / "good").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "good" / "small.csv"));
  EXPECT_TRUE(fs::exists(dir / "good" / "small.json"));

  // A coarse cutoff drifts away from the oracle: validation failure.
  const auto coarse = dir / "coarse.json";
  std::ofstream(coarse) << json{{"runs", {small_run(0.1)}}}.dump();
  EXPECT_EQ(cli("run " + coarse.string() + " --oracle-check --out " + (dir / "coarse").string()), 2);

  const auto typo = dir / "typo.json";
  std::ofstream(typo) << R"({"runs": [{"name": "x", "tua": 0.5}]})";
  EXPECT_EQ(cli("run " + typo.string()), 1);
}

TEST(Cli, SweepWritesOneRunPerValue) {
  const auto dir = scratch("sweep");
  const auto base = write_config(dir, json{{"runs", {small_run()}}});
  EXPECT_EQ(cli("sweep --param tau --values 0,0.06 0.12 --base " + base.string() + " --out " +
                (dir / "out").string()),
            0);
  for (const char* n : {"small_tau0", "small_tau0.06", "small_tau0.12"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / (std::string(n) + ".csv"))) << n;
  }
  EXPECT_EQ(cli("sweep --param colour --values 1 --base " + base.string()), 1);
}

TEST(Cli, DeterministicOutputIsByteIdentical) {
  const auto dir = scratch("determinism");
  const auto cfg = write_config(dir, json{{"runs", {small_run()}}});
  ASSERT_EQ(cli("run " + cfg.string() + " --deterministic --out " + (dir / "a").string()), 0);
  ASSERT_EQ(cli("run " + cfg.string() + " --deterministic --out " + (dir / "b").string()), 0);
  const auto a = slurp(dir / "a" / "small.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b" / "small.csv"));
}

TEST(Cli, DtOverrideSnapsToDelay) {
  const auto dir = scratch("dt");
  const auto cfg = write_config(dir, json{{"runs", {small_run()}}});
  ASSERT_EQ(cli("run " + cfg.string() + " --dt 0.03 --out " + dir.string()), 0);
  const auto meta = json::parse(slurp(dir / "small.json"));
  EXPECT_DOUBLE_EQ(meta["config"]["dt"].get<double>(), 0.1 / 4);
}

}  // namespace
}  // namespace wgqed
