#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ste/cli.hpp"

using namespace ste;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::vector<double>> parse_csv(const std::string& text,
                                           std::string* header = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STE_CLI_BIN) + " " + args + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("ste_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_quiet(RunConfig cfg) {
  std::ostringstream err;
  return run_command(std::move(cfg), err);
}

}  // namespace

TEST_CASE("config validation names the offending field") {
  auto expect_error = [](RunConfig cfg, const std::string& field) {
    std::ostringstream err;
    const int rc = run_command(std::move(cfg), err);
    CHECK(rc == kExitConfig);
    CHECK(err.str().find(field) != std::string::npos);
  };

  RunConfig base;
  base.command = "evolve";
  base.icase = "ee";
  base.gamma = 0.0;

  SUBCASE("both couplings supplied") {
    RunConfig cfg = base;
    cfg.g_stm = 0.5;
    expect_error(cfg, "gamma");
  }
  SUBCASE("no coupling supplied") {
    RunConfig cfg = base;
    cfg.gamma.reset();
    expect_error(cfg, "gamma");
  }
  SUBCASE("bad case name") {
    RunConfig cfg = base;
    cfg.icase = "xx";
    expect_error(cfg, "case");
  }
  SUBCASE("descending time grid") {
    RunConfig cfg = base;
    cfg.t_min = 2.0;
    cfg.t_max = 1.0;
    expect_error(cfg, "t-max");
  }
  SUBCASE("unknown preset") {
    RunConfig cfg;
    cfg.command = "figure";
    cfg.preset = "fig9z";
    expect_error(cfg, "preset");
  }
  SUBCASE("closed form cannot evolve gg") {
    RunConfig cfg = base;
    cfg.icase = "gg";
    cfg.engine = "closed-form";
    expect_error(cfg, "engine");
  }
  SUBCASE("cutoff below the populated sectors") {
    RunConfig cfg = base;
    cfg.n = 3;
    cfg.cutoff = 5;
    expect_error(cfg, "cutoff");
  }
  SUBCASE("no partial file is left behind") {
    TempDir dir("nopartial");
    RunConfig cfg = base;
    cfg.g_stm = 0.5;  // invalid: both couplings
    cfg.output = dir.file("out.csv");
    run_quiet(cfg);
    CHECK_FALSE(fs::exists(cfg.output));
    CHECK(fs::is_empty(dir.path));
  }
}

TEST_CASE("evolve emits the documented time series") {
  TempDir dir("evolve");

  SUBCASE("bell point appears on the time grid") {
    RunConfig cfg;
    cfg.command = "evolve";
    cfg.icase = "ee";
    cfg.n = 0;
    cfg.gamma = 0.0;
    cfg.t_max = 3.2;
    cfg.output = dir.file("evolve.csv");
    REQUIRE(run_quiet(cfg) == kExitOk);

    std::string header;
    const auto rows = parse_csv(slurp(cfg.output), &header);
    CHECK(header == "t,A,B,C,D,E,concurrence,negativity");
    CHECK(rows.size() == 401);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][0] > rows[i - 1][0]);

    // gamma = 0 gives concurrence sin^2(2 sqrt2 t): peaks at
    // t = pi/(4 sqrt2) + k pi/(2 sqrt2); the best row must sit within one
    // grid step of one of them
    double best = 0.0, best_t = 0.0;
    for (const auto& row : rows)
      if (row[6] > best) {
        best = row[6];
        best_t = row[0];
      }
    const double period = kPi / (2.0 * std::sqrt(2.0));
    const double offset = std::fmod(best_t, period);
    CHECK(std::abs(offset - period / 2.0) <= 3.2 / 400 + 1e-12);
    CHECK(best == doctest::Approx(std::pow(std::sin(2.0 * std::sqrt(2.0) * best_t), 2))
                      .epsilon(1e-12));
    CHECK(best > 0.9999);
    // manifest written alongside
    CHECK(fs::exists(cfg.output + ".manifest.json"));
  }
  SUBCASE("no STE flatline in the concurrence column") {
    RunConfig cfg;
    cfg.command = "evolve";
    cfg.icase = "ee";
    cfg.n = 0;
    cfg.gamma = 1.0;
    cfg.output = dir.file("flat.csv");
    REQUIRE(run_quiet(cfg) == kExitOk);
    for (const auto& row : parse_csv(slurp(cfg.output))) CHECK(row[6] <= 1e-12);
  }
  SUBCASE("t-max 0 gives a single row") {
    RunConfig cfg;
    cfg.command = "evolve";
    cfg.icase = "eg";
    cfg.n = 1;
    cfg.gamma = 0.5;
    cfg.t_max = 0.0;
    cfg.output = dir.file("single.csv");
    REQUIRE(run_quiet(cfg) == kExitOk);
    const auto rows = parse_csv(slurp(cfg.output));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0][0] == 0.0);
    CHECK(rows[0][6] == 0.0);
  }
  SUBCASE("floats round-trip at 17 significant digits") {
    RunConfig cfg;
    cfg.command = "evolve";
    cfg.icase = "ee";
    cfg.n = 0;
    cfg.gamma = 0.3;
    cfg.t_max = 1.0;
    cfg.t_steps = 7;
    cfg.output = dir.file("digits.csv");
    REQUIRE(run_quiet(cfg) == kExitOk);
    const auto rows = parse_csv(slurp(cfg.output));
    const double t3 = rows[3][0];
    CHECK(t3 == 3.0 / 7.0);  // exact round trip of the grid arithmetic
  }
  SUBCASE("engines agree through the CLI surface") {
    std::vector<std::string> outputs;
    for (const char* engine : {"closed-form", "block", "oracle"}) {
      RunConfig cfg;
      cfg.command = "evolve";
      cfg.icase = "eg";
      cfg.n = 1;
      cfg.gamma = 0.4;
      cfg.t_max = 6.0;
      cfg.t_steps = 60;
      cfg.engine = engine;
      cfg.output = dir.file(std::string("eng_") + engine + ".csv");
      REQUIRE(run_quiet(cfg) == kExitOk);
      outputs.push_back(cfg.output);
    }
    const auto a = parse_csv(slurp(outputs[0]));
    const auto b = parse_csv(slurp(outputs[1]));
    const auto c = parse_csv(slurp(outputs[2]));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a[i].size(); ++j) {
        CHECK(std::abs(a[i][j] - b[i][j]) < 1e-10);
        CHECK(std::abs(a[i][j] - c[i][j]) < 1e-10);
      }
  }
}

TEST_CASE("sweep and figure emit long-format grids") {
  TempDir dir("sweep");

  SUBCASE("single-cell sweep") {
    RunConfig cfg;
    cfg.command = "sweep";
    cfg.icase = "eg";
    cfg.n = 1;
    cfg.gamma_min = cfg.gamma_max = 0.5;
    cfg.gamma_steps = 1;
    cfg.t_min = cfg.t_max = 1.0;
    cfg.t_steps = 1;
    cfg.output = dir.file("cell.csv");
    REQUIRE(run_quiet(cfg) == kExitOk);
    std::string header;
    const auto rows = parse_csv(slurp(cfg.output), &header);
    CHECK(header == "gamma,t,concurrence,negativity");
    CHECK(rows.size() == 1);
  }
  SUBCASE("figure presets have the pinned grid shape") {
    RunConfig cfg;
    cfg.command = "figure";
    cfg.preset = "fig3b";
    cfg.output = dir.file("fig3b.csv");
    REQUIRE(run_quiet(cfg) == kExitOk);
    const auto rows = parse_csv(slurp(cfg.output));
    CHECK(rows.size() == 101 * 401);
    CHECK(rows.front()[0] == 0.0);
    CHECK(rows.back()[0] == 1.0);
    CHECK(rows.back()[1] == 4.0 * kPi);
    // eg family peak bound over the whole file
    for (const auto& row : rows) CHECK(row[2] <= 0.5 + 1e-12);

    const auto manifest = nlohmann::json::parse(slurp(cfg.output + ".manifest.json"));
    CHECK(manifest["config"]["case"] == "eg");
    CHECK(manifest["config"]["n"] == 1);
    CHECK(manifest["config"]["engine"] == "closed-form");
  }
  SUBCASE("figure fig2a approaches full entanglement on its pinned grid") {
    RunConfig cfg;
    cfg.command = "figure";
    cfg.preset = "fig2a";
    cfg.output = dir.file("fig2a.csv");
    REQUIRE(run_quiet(cfg) == kExitOk);
    double best = 0.0;
    for (const auto& row : parse_csv(slurp(cfg.output))) best = std::max(best, row[2]);
    // the pinned 401-point grid never lands exactly on a concurrence peak;
    // the refined off-grid maximum is 1 (covered by the acceptance suite)
    CHECK(best > 0.999);
    CHECK(best <= 1.0 + 1e-12);
  }
  SUBCASE("json format mirrors the csv data") {
    RunConfig cfg;
    cfg.command = "sweep";
    cfg.icase = "ee";
    cfg.n = 0;
    cfg.gamma_steps = 2;
    cfg.t_steps = 2;
    cfg.t_max = 1.0;
    cfg.format = "json";
    cfg.output = dir.file("sweep.json");
    REQUIRE(run_quiet(cfg) == kExitOk);
    const auto j = nlohmann::json::parse(slurp(cfg.output));
    CHECK(j["columns"].size() == 4);
    CHECK(j["rows"].size() == 9);
  }
}

TEST_CASE("reports") {
  TempDir dir("reports");

  SUBCASE("critical point document") {
    RunConfig cfg;
    cfg.command = "critical";
    cfg.icase = "ee";
    cfg.n = 0;
    cfg.output = dir.file("crit.json");
    REQUIRE(run_quiet(cfg) == kExitOk);
    const auto j = nlohmann::json::parse(slurp(cfg.output));
    CHECK(j["gamma_crit"].get<double>() == doctest::Approx(0.7071067811865476).epsilon(1e-15));
    CHECK(j["g_stm_crit"].get<double>() ==
          doctest::Approx(0.17157287525380996).epsilon(1e-14));
  }
  SUBCASE("period without entanglement is null with a reason") {
    RunConfig cfg;
    cfg.command = "period";
    cfg.icase = "ee";
    cfg.n = 1;
    cfg.gamma = 1.0;
    cfg.output = dir.file("period_null.json");
    REQUIRE(run_quiet(cfg) == kExitOk);
    const auto j = nlohmann::json::parse(slurp(cfg.output));
    CHECK(j["period"].is_null());
    CHECK(j["reason"] == "no entanglement");
  }
  SUBCASE("period of the maximally entangling configuration") {
    RunConfig cfg;
    cfg.command = "period";
    cfg.icase = "ee";
    cfg.n = 0;
    cfg.g_stm = 1.0;
    cfg.output = dir.file("period.json");
    REQUIRE(run_quiet(cfg) == kExitOk);
    const auto j = nlohmann::json::parse(slurp(cfg.output));
    CHECK(j["period"].get<double>() ==
          doctest::Approx(kPi / (2.0 * std::sqrt(2.0))).epsilon(1e-6));
    CHECK(j["relative_agreement"].get<double>() < 1e-6);
  }
  SUBCASE("validate passes at the default tolerance") {
    RunConfig cfg;
    cfg.command = "validate";
    cfg.output = dir.file("validate.json");
    REQUIRE(run_quiet(cfg) == kExitOk);
    const auto j = nlohmann::json::parse(slurp(cfg.output));
    CHECK(j["pass"].get<bool>());
    CHECK(j["max_overall"].get<double>() < 1e-8);
    CHECK(j["outliers"].empty());
    CHECK(j["grid"]["version"] == "std-grid-v1");
  }
  SUBCASE("validate accepts the shipped grid config file") {
    RunConfig cfg;
    cfg.command = "validate";
    cfg.grid_path = std::string(STE_CONFIG_DIR) + "/standard_grid.json";
    cfg.output = dir.file("validate_file_grid.json");
    REQUIRE(run_quiet(cfg) == kExitOk);
    const auto j = nlohmann::json::parse(slurp(cfg.output));
    CHECK(j["pass"].get<bool>());
    CHECK(j["grid"]["version"] == "std-grid-v1");
    CHECK(j["grid"]["t_points"] == 200);
  }
  SUBCASE("validate rejects an unreadable grid file") {
    RunConfig cfg;
    cfg.command = "validate";
    cfg.grid_path = dir.file("missing.json");
    cfg.output = dir.file("never.json");
    std::ostringstream err;
    CHECK(run_command(std::move(cfg), err) == kExitConfig);
    CHECK(err.str().find("grid") != std::string::npos);
  }
  SUBCASE("validate fails with exit 3 at an impossible tolerance") {
    RunConfig cfg;
    cfg.command = "validate";
    cfg.tolerance = 1e-18;
    cfg.output = dir.file("validate_fail.json");
    CHECK(run_quiet(cfg) == kExitTolerance);
    // the report is still written, flagged as failing
    const auto j = nlohmann::json::parse(slurp(cfg.output));
    CHECK_FALSE(j["pass"].get<bool>());
    CHECK_FALSE(j["outliers"].empty());
  }
}

TEST_CASE("manifest replay reproduces the data bytes") {
  TempDir dir("replay");
  RunConfig cfg;
  cfg.command = "sweep";
  cfg.icase = "ee";
  cfg.n = 1;
  cfg.gamma_steps = 10;
  cfg.t_steps = 50;
  cfg.engine = "closed-form";
  cfg.output = dir.file("first.csv");
  REQUIRE(run_quiet(cfg) == kExitOk);
  const std::string first = slurp(cfg.output);

  RunConfig replay;
  replay.command = "sweep";
  apply_config_file(replay, cfg.output + ".manifest.json");
  replay.output = dir.file("second.csv");
  REQUIRE(run_quiet(replay) == kExitOk);
  CHECK(slurp(replay.output) == first);
}

TEST_CASE("cli binary") {
  TempDir dir("bin");

  SUBCASE("exit code contract") {
    CHECK(run_cli("critical --case ee --n 0 -o " + dir.file("c.json")) == 0);
    CHECK(run_cli("critical --case gg --n 0 -o " + dir.file("c2.json")) == kExitConfig);
    CHECK(run_cli("evolve --case ee --n 0 -o " + dir.file("e.csv")) == kExitConfig);
    CHECK(run_cli("evolve --case ee --gamma 0.5 --g-stm 0.5 -o " + dir.file("e2.csv")) ==
          kExitConfig);
    CHECK(run_cli("figure fig9x -o " + dir.file("f.csv")) == kExitConfig);
    CHECK(run_cli("validate --tolerance 1e-18 -o " + dir.file("v.json")) ==
          kExitTolerance);
    CHECK(run_cli("nonsense") == kExitConfig);
  }
  SUBCASE("gamma flag equals the equivalent g-stm flag") {
    const std::string a = dir.file("gamma.csv"), b = dir.file("gstm.csv");
    REQUIRE(run_cli("evolve --case eg --n 1 --gamma 0.25 --t-max 4 -o " + a) == 0);
    REQUIRE(run_cli("evolve --case eg --n 1 --g-stm 0.6 --t-max 4 -o " + b) == 0);
    const auto ra = parse_csv(slurp(a));
    const auto rb = parse_csv(slurp(b));
    for (std::size_t i = 0; i < ra.size(); ++i)
      for (std::size_t j = 0; j < ra[i].size(); ++j)
        CHECK(ra[i][j] == doctest::Approx(rb[i][j]).epsilon(1e-14));
  }
  SUBCASE("thread cap leaves sweep bytes unchanged") {
    const std::string a = dir.file("t1.csv"), b = dir.file("t4.csv");
    REQUIRE(run_cli("sweep --case ee --n 1 --gamma-steps 20 --t-steps 80 "
                    "--engine closed-form -o " +
                    a + " && STE_ENTANGLE_THREADS=1 " + std::string(STE_CLI_BIN) +
                    " sweep --case ee --n 1 --gamma-steps 20 --t-steps 80 "
                    "--engine closed-form -o " +
                    b) == 0);
    CHECK(slurp(a) == slurp(b));
  }
}
