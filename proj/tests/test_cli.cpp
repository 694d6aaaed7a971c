#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "eclab/config.hpp"
#include "eclab/csv.hpp"
#include "eclab/experiment.hpp"

using namespace eclab;
using Catch::Approx;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("eclab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ECLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

const std::string kConfigDir = ECLAB_CONFIG_DIR;

}  // namespace

TEST_CASE("key-value parsing") {
  const std::string text =
      "# comment\n"
      "[alpha]\n"
      "x = 1.5\n"
      "names = 1, 2 3\n"
      "flag = true  ; trailing comment\n"
      "[beta]\n"
      "x = -2\n";
  const auto kv = KeyValueFile::parse_text(text, "inline");
  CHECK(kv.get_number("alpha.x") == 1.5);
  CHECK(kv.get_integer("beta.x") == -2);
  CHECK(kv.get_bool("alpha.flag") == true);
  const auto list = kv.get_number_list("alpha.names");
  REQUIRE(list.has_value());
  CHECK(list->size() == 3);
  CHECK(!kv.get_number("alpha.missing").has_value());

  SECTION("diagnostics carry file and line") {
    try {
      const auto bad = KeyValueFile::parse_text("[s]\nx = abc\n", "f.cfg");
      bad.get_number("s.x");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("f.cfg:2") != std::string::npos);
    }
    CHECK_THROWS_AS(KeyValueFile::parse_text("x 1\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueFile::parse_text("[s]\nx=1\nx=2\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueFile::parse_text("[unclosed\n"), ConfigError);
  }
}

TEST_CASE("bundled configs parse and validate cleanly") {
  for (const std::string name : {"fig3.cfg", "fig7.cfg", "fig8.cfg", "synthetic_g10.cfg"}) {
    const auto cfg = load_experiment_config(kConfigDir + "/" + name);
    const auto diagnostics = validate(cfg);
    for (const auto& d : diagnostics) UNSCOPED_INFO(name << ": " << d.field << ": " << d.message);
    CHECK(diagnostics.empty());
  }
  const auto fig3 = load_experiment_config(kConfigDir + "/fig3.cfg");
  CHECK(fig3.kind == ExperimentKind::theory_curves);
  CHECK(fig3.cx2_grid.size() == 20);
  CHECK(fig3.p_list == std::vector<int>{1, 4, 8, 16, 32});
  const auto sim = load_experiment_config(kConfigDir + "/synthetic_g10.cfg");
  CHECK(sim.control.test_interval == 1024);
  CHECK(sim.control.copy_delay == 512);
  CHECK(sim.control.mu == std::array<double, 4>{0.1, 1.0, 0.1, 0.3});
  CHECK(sim.control.guard_epsilon == 0.25);
}

TEST_CASE("validation diagnostics") {
  SECTION("empty sweep grid") {
    auto cfg = load_experiment_config("tests/data/bad_empty_grid.cfg");
    const auto diagnostics = validate(cfg);
    REQUIRE(!diagnostics.empty());
    bool found = false;
    for (const auto& d : diagnostics)
      if (d.field == "sweep.cx2_grid") found = true;
    CHECK(found);
  }
  SECTION("copy delay must stay below the test interval, step sizes in range") {
    auto cfg = load_experiment_config("tests/data/bad_control.cfg");
    const auto diagnostics = validate(cfg);
    bool copy_delay = false, mu = false;
    for (const auto& d : diagnostics) {
      if (d.field == "control.copy_delay" && d.message.find("N_c < N_t") != std::string::npos)
        copy_delay = true;
      if (d.field == "control.mu1") mu = true;
    }
    CHECK(copy_delay);
    CHECK(mu);
  }
  SECTION("unknown keys are rejected at parse time") {
    CHECK_THROWS_AS(parse_experiment_config(
                        KeyValueFile::parse_text("[experiment]\nkind = simulate\ntypo = 1\n"),
                        ""),
                    ConfigError);
  }
  SECTION("stochastic kinds require a seed") {
    auto cfg = parse_experiment_config(
        KeyValueFile::parse_text("[experiment]\nkind = mc_curves\n[sweep]\ncx2_grid = 1\np_list = 1\n"),
        "");
    bool seed_flagged = false;
    for (const auto& d : validate(cfg))
      if (d.field == "experiment.seed") seed_flagged = true;
    CHECK(seed_flagged);
  }
}

TEST_CASE("number formatting is fixed at 12 significant digits") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(0.001) == "0.001");
  CHECK(format_number(123456789012345.0) == "1.23456789012e+14");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("experiment runs are deterministic") {
  auto base = load_experiment_config("tests/data/smoke_theory.cfg");

  SECTION("theory curves") {
    const auto dir_a = fresh_dir("theory_a");
    const auto dir_b = fresh_dir("theory_b");
    run(base, RunOptions{dir_a.string(), {}, 2});
    run(base, RunOptions{dir_b.string(), {}, 1});
    CHECK(slurp(dir_a / "curves.csv") == slurp(dir_b / "curves.csv"));
    CHECK(slurp(dir_a / "manifest.json") != "");

    const RawCsv table = read_csv_raw((dir_a / "curves.csv").string());
    CHECK(table.header ==
          std::vector<std::string>{"cx2", "p", "sigma0_sq", "sigma1_sq", "source", "i",
                                   "j", "value", "stderr"});
    CHECK(table.rows.size() == 2 * 2 * 16);
    CHECK(table.rows[0][4] == "theory");
  }

  SECTION("monte carlo curves") {
    auto cfg = base;
    cfg.kind = ExperimentKind::mc_curves;
    cfg.mc_runs = 2000;
    cfg.seed = 33;
    const auto dir_a = fresh_dir("mc_a");
    const auto dir_b = fresh_dir("mc_b");
    run(cfg, RunOptions{dir_a.string(), {}, 2});
    run(cfg, RunOptions{dir_b.string(), {}, 1});
    CHECK(slurp(dir_a / "curves.csv") == slurp(dir_b / "curves.csv"));
    // theory rows and mc rows both present
    const RawCsv table = read_csv_raw((dir_a / "curves.csv").string());
    CHECK(table.rows.size() == 2 * 2 * 16 * 2);
    // a different seed changes the bytes
    const auto dir_c = fresh_dir("mc_c");
    run(cfg, RunOptions{dir_c.string(), 34, 1});
    CHECK(slurp(dir_a / "curves.csv") != slurp(dir_c / "curves.csv"));
  }

  SECTION("simulation trace") {
    const std::string sim_text =
        "[experiment]\nkind = simulate\nseed = 5\n"
        "[noise]\nsigma0_sq = 0.001\nsigma1_sq = 1.0\n"
        "[channels]\ngain_db = -10\nlength = 64\ndecay = 0.95\ndelays = 0 5 10\n"
        "[scenario]\nsegment_ends = 2000 4000 5000 6000 7000\n"
        "segment_channels = 0 1 1 2 2\nsegment_dt = 0 0 1 1 0\nwrite_signals = true\n"
        "[control]\ntest_interval = 256\ncopy_delay = 128\nwindow = 16\n";
    auto cfg = parse_experiment_config(KeyValueFile::parse_text(sim_text, "sim"), sim_text);
    const auto dir_a = fresh_dir("sim_a");
    const auto dir_b = fresh_dir("sim_b");
    run(cfg, RunOptions{dir_a.string(), {}, 1});
    run(cfg, RunOptions{dir_b.string(), {}, 1});
    CHECK(slurp(dir_a / "trace.csv") == slurp(dir_b / "trace.csv"));
    CHECK(slurp(dir_a / "signals.csv") == slurp(dir_b / "signals.csv"));

    const CsvTable trace = read_csv((dir_a / "trace.csv").string());
    CHECK(trace.header ==
          std::vector<std::string>{"n", "class", "mu", "se0_db", "se1_db", "copied"});
    CHECK(trace.rows.size() == 7000);
    const CsvTable signals = read_csv((dir_a / "signals.csv").string());
    CHECK(signals.header ==
          std::vector<std::string>{"n", "x", "y", "n0", "true_class"});
    CHECK(signals.rows.size() == 7000);
  }
}

TEST_CASE("classify stream") {
  const auto dir = fresh_dir("classify");
  {
    CsvWriter input((dir / "stats.csv").string());
    input.write_row({"t0", "t1"});
    input.write_row({"2.0", "0.5"});
    input.write_row({"0.5", "2.0"});
    input.write_row({"3.0", "2.0"});
    input.write_row({"2.0", "3.0"});
    input.close();
  }
  const std::string text =
      "[experiment]\nkind = classify_stream\n"
      "[noise]\nsigma0_sq = 1.0\nsigma1_sq = 1.0\n"
      "[classify]\ninput = " + (dir / "stats.csv").string() + "\np = 1\n";
  auto cfg = parse_experiment_config(KeyValueFile::parse_text(text, "cls"), text);
  run(cfg, RunOptions{dir.string(), {}, 1});
  const CsvTable out = read_csv((dir / "classes.csv").string());
  REQUIRE(out.rows.size() == 4);
  const int class_col = out.column("class");
  REQUIRE(class_col >= 0);
  CHECK(out.rows[0][static_cast<std::size_t>(class_col)] == 0);
  CHECK(out.rows[1][static_cast<std::size_t>(class_col)] == 1);
  CHECK(out.rows[2][static_cast<std::size_t>(class_col)] == 2);
  CHECK(out.rows[3][static_cast<std::size_t>(class_col)] == 3);
}

TEST_CASE("pcm input decoding") {
  const auto dir = fresh_dir("pcm");
  {
    std::ofstream out(dir / "x.pcm", std::ios::binary);
    const unsigned char bytes[] = {0x00, 0x40, 0x00, 0xC0, 0xFF, 0x7F};
    out.write(reinterpret_cast<const char*>(bytes), sizeof(bytes));
  }
  const auto samples = read_pcm16((dir / "x.pcm").string());
  REQUIRE(samples.size() == 3);
  CHECK(samples[0] == Approx(0.5));
  CHECK(samples[1] == Approx(-0.5));
  CHECK(samples[2] == Approx(32767.0 / 32768.0));
}

TEST_CASE("cli binary") {
  const auto dir = fresh_dir("cli");

  SECTION("theory smoke run exits cleanly and writes outputs") {
    CHECK(run_cli("theory-curves --config tests/data/smoke_theory.cfg --out " +
                  (dir / "t").string()) == 0);
    CHECK(fs::exists(dir / "t" / "curves.csv"));
    CHECK(fs::exists(dir / "t" / "manifest.json"));
    const std::string manifest = slurp(dir / "t" / "manifest.json");
    CHECK(manifest.find("smoke_theory.cfg") != std::string::npos);
    CHECK(manifest.find("theory_curves") != std::string::npos);
  }

  SECTION("config errors exit with status 2 and write nothing") {
    CHECK(run_cli("theory-curves --config tests/data/bad_empty_grid.cfg --out " +
                  (dir / "bad").string()) == 2);
    CHECK(!fs::exists(dir / "bad" / "curves.csv"));
    CHECK(run_cli("simulate --config tests/data/bad_control.cfg --out " +
                  (dir / "bad2").string()) == 2);
    CHECK(run_cli("simulate --config /nonexistent.cfg") == 2);
  }

  SECTION("subcommand and config kind must agree") {
    CHECK(run_cli("simulate --config tests/data/smoke_theory.cfg") == 2);
  }

  SECTION("validate-only reports without executing") {
    CHECK(run_cli("theory-curves --config tests/data/smoke_theory.cfg --validate-only --out " +
                  (dir / "v").string()) == 0);
    CHECK(!fs::exists(dir / "v" / "curves.csv"));
    CHECK(run_cli("theory-curves --config tests/data/bad_empty_grid.cfg --validate-only") == 2);
  }
}
