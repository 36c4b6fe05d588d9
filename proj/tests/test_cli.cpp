#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <fdatest/cli.hpp>
#include <fdatest/random.hpp>

using namespace fdatest;
namespace fs = std::filesystem;

namespace {

int run(std::initializer_list<std::string> args) {
  std::vector<std::string> all{"fdatest"};
  all.insert(all.end(), args);
  std::vector<const char*> argv;
  argv.reserve(all.size());
  for (const auto& s : all) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string tmp_path(const std::string& name) {
  fs::create_directories("cli_tmp");
  return (fs::path("cli_tmp") / name).string();
}

std::string write_file(const std::string& name, const std::string& content) {
  const std::string p = tmp_path(name);
  std::ofstream f(p);
  f << content;
  return p;
}

// Two groups of three units with a slope bump at basis function 3 for the
// second group.
struct Synth {
  std::string curves;
  std::string meta;
};

Synth make_two_group(const std::string& prefix, double bump) {
  const int r = 32;
  const Grid g{0.0, static_cast<double>(r), r};
  const std::vector<double> psi3 = basis_eval(3, g);
  Rng rng(RandomStream{4242, 0});
  std::string curves = "time";
  std::string meta = "unit,group,covariate\n";
  for (int gi = 0; gi < 2; ++gi)
    for (int m = 1; m <= 3; ++m) {
      const std::string unit = (gi == 0 ? "e" : "w") + std::to_string(m);
      curves += "," + unit;
      meta += unit + "," + (gi == 0 ? "east" : "west") + "," + std::to_string(m) + "\n";
    }
  curves += "\n";
  for (int l = 0; l < r; ++l) {
    curves += std::to_string(l + 1);
    for (int gi = 0; gi < 2; ++gi)
      for (int m = 1; m <= 3; ++m) {
        const double slope = 1.0 + (gi == 1 ? bump * psi3[static_cast<std::size_t>(l)] : 0.0);
        curves += "," + fmt_num(5.0 + m * slope + 0.05 * rng.next_gaussian());
      }
    curves += "\n";
  }
  return {write_file(prefix + ".csv", curves), write_file(prefix + "_meta.csv", meta)};
}

}  // namespace

TEST_CASE("version and usage", "[cli]") {
  CHECK(run({"--version"}) == 0);
  CHECK(run({}) == 1);                    // a subcommand is required
  CHECK(run({"explode"}) == 1);           // unknown subcommand
  CHECK(run({"rates", "--bogus"}) == 1);  // unknown flag
  CHECK(run({"--help"}) == 0);
  CHECK(run({"test", "--help"}) == 0);
}

TEST_CASE("decompose end to end", "[cli]") {
  std::string csv = "time,a,b\n";
  for (int l = 1; l <= 16; ++l)
    csv += std::to_string(l) + "," + fmt_num(0.5 * l) + "," + fmt_num(1.0 - 0.25 * l) + "\n";
  const std::string input = write_file("dec.csv", csv);
  const std::string out = tmp_path("dec_out.csv");

  CHECK(run({"decompose", "--input", input, "--out", out, "--p", "4"}) == 0);
  const Table t = read_table(out);
  CHECK(t.rows.size() == 8);  // p * units

  SECTION("missing input file is a data error") {
    CHECK(run({"decompose", "--input", "cli_tmp/absent.csv", "--out", out}) == 2);
  }
  SECTION("missing required setting is a config error") {
    CHECK(run({"decompose", "--input", input}) == 1);
  }
  SECTION("p beyond the grid resolution is a data error") {
    CHECK(run({"decompose", "--input", input, "--out", out, "--p", "65"}) == 2);
  }
}

TEST_CASE("test subcommand flags", "[cli]") {
  const Synth s = make_two_group("cli_plant", 0.8);
  const std::string out = tmp_path("report.csv");

  CHECK(run({"test", "--input", s.curves, "--meta", s.meta, "--p", "8", "--weights", "opt",
             "--hypothesis", "same-slope", "--pairs", "east-west", "--iters", "1000",
             "--alpha", "0.05", "--seed", "2", "--out", out}) == 0);
  const Table t = read_table(out);
  CHECK(t.rows.size() == 8);

  // the planted bump at j = 3 dominates the report
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    if (t.num(i, 1) > t.num(best, 1)) best = i;
  CHECK(t.rows[best][0] == "3");

  SECTION("fzz weights parse with their smoothness setting") {
    CHECK(run({"test", "--input", s.curves, "--meta", s.meta, "--p", "8", "--weights",
               "fzz:s=1.2", "--iters", "1000", "--out", out}) == 0);
    const Table t2 = read_table(out);
    bool found = false;
    for (const auto& c : t2.comments) found = found || c.find("fzz:s=1.2") != std::string::npos;
    CHECK(found);
  }
  SECTION("bad option values are config errors") {
    CHECK(run({"test", "--input", s.curves, "--meta", s.meta, "--weights", "bogus"}) == 1);
    CHECK(run({"test", "--input", s.curves, "--meta", s.meta, "--hypothesis", "sameslope"}) == 1);
    CHECK(run({"test", "--input", s.curves, "--meta", s.meta, "--pairs", "eastwest"}) == 1);
    CHECK(run({"test", "--input", s.curves, "--meta", s.meta, "--alpha", "2"}) == 1);
  }
  SECTION("unknown group label in pairs") {
    CHECK(run({"test", "--input", s.curves, "--meta", s.meta, "--p", "8", "--iters", "1000",
               "--pairs", "east-north"}) == 1);
  }
}

TEST_CASE("config file supplies defaults, flags win", "[cli]") {
  const Synth s = make_two_group("cli_cfg", 0.0);
  const std::string out = tmp_path("cfg_report.csv");
  const std::string cfg = write_file("cfg.json", std::string("{\n") +
                                                     "  \"input\": \"" + s.curves + "\",\n" +
                                                     "  \"meta\": \"" + s.meta + "\",\n" +
                                                     "  \"p\": 8,\n" +
                                                     "  \"iters\": 1000,\n" +
                                                     "  \"seed\": 77\n" +
                                                     "}\n");

  SECTION("config alone") {
    CHECK(run({"test", "--config", cfg, "--out", out}) == 0);
    const Table t = read_table(out);
    CHECK(t.rows.size() == 8);
    bool seed77 = false;
    for (const auto& c : t.comments) seed77 = seed77 || c == "seed: 77";
    CHECK(seed77);
  }
  SECTION("explicit flags override config values") {
    CHECK(run({"test", "--config", cfg, "--out", out, "--seed", "9", "--p", "4"}) == 0);
    const Table t = read_table(out);
    CHECK(t.rows.size() == 4);
    bool seed9 = false;
    for (const auto& c : t.comments) seed9 = seed9 || c == "seed: 9";
    CHECK(seed9);
  }
  SECTION("config errors") {
    CHECK(run({"test", "--config", "cli_tmp/absent.json", "--out", out}) == 1);
    const std::string bad = write_file("bad.json", "{ not json");
    CHECK(run({"test", "--config", bad, "--out", out}) == 1);
    const std::string arr = write_file("arr.json", "[1,2]");
    CHECK(run({"test", "--config", arr, "--out", out}) == 1);
    const std::string wrongtype = write_file("type.json", "{\"p\": \"eight\"}");
    CHECK(run({"test", "--config", wrongtype, "--input", s.curves, "--meta", s.meta}) == 1);
    const std::string badweights = write_file("badw.json", "{\"weights\": \"heavy\"}");
    CHECK(run({"test", "--config", badweights, "--input", s.curves, "--meta", s.meta}) == 1);
  }
}

TEST_CASE("power subcommand", "[cli]") {
  const std::string out = tmp_path("power.csv");
  CHECK(run({"power", "--out", out, "--p", "16", "--n", "32", "--weights", "opt", "--class",
             "smooth", "--index", "0.4", "--lambda", "0.5", "--iters", "1000", "--seed",
             "21"}) == 0);
  const Table t = read_table(out);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0] == "opt");
  CHECK(t.rows[0][1] == "smooth");
  CHECK(t.num(0, 2) == 0.4);
  CHECK(t.num(0, 3) == 0.5);

  SECTION("config keys and a flag override for the index") {
    const std::string cfg = write_file(
        "pow.json",
        "{\"p\": 16, \"n\": 32, \"iters\": 1000, \"class\": \"spiked\", \"index\": 2, "
        "\"lambda\": 0.5}");
    CHECK(run({"power", "--config", cfg, "--out", out, "--index", "5"}) == 0);
    const Table t2 = read_table(out);
    CHECK(t2.rows[0][1] == "spiked");
    CHECK(t2.num(0, 2) == 5.0);
  }
  SECTION("bad class is a config error") {
    CHECK(run({"power", "--out", out, "--class", "wavy"}) == 1);
  }
}

TEST_CASE("rates subcommand", "[cli]") {
  const std::string out = tmp_path("rates.csv");
  CHECK(run({"rates", "--out", out, "--weights", "uwq", "--p-rule", "ingster", "--s", "1",
             "--n-grid", "64,256,1024"}) == 0);
  const Table t = read_table(out);
  CHECK(t.rows.size() == 3);
  CHECK(t.rows[0][0] == "64");
  CHECK(t.rows[2][0] == "1024");

  SECTION("bad grid text") {
    CHECK(run({"rates", "--out", out, "--n-grid", "64,x"}) == 1);
  }
  SECTION("bad rule") {
    CHECK(run({"rates", "--out", out, "--p-rule", "quartic"}) == 1);
  }
  SECTION("shrinking grid") {
    CHECK(run({"rates", "--out", out, "--n-grid", "1024,64"}) == 1);
  }
}

TEST_CASE("figure4 subcommand validation", "[cli]") {
  CHECK(run({"figure4"}) == 1);                                        // --out required
  CHECK(run({"figure4", "--out", tmp_path("f.csv"), "--iters", "10"}) == 1);  // below minimum
}
