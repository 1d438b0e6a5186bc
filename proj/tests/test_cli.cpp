#include "terramod/app.hpp"
#include "terramod/synthetic.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace terramod;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
  const fs::path p = fs::temp_directory_path() / ("terramod_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text)
{
  std::ofstream(p, std::ios::binary) << text;
}

struct Result
{
  int code;
  std::string out, err;
};

Result cli(const std::vector<std::string>& args)
{
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s)
{
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::vector<std::string> csv_rows(const std::string& s)
{
  std::vector<std::string> rows;
  std::istringstream in(s);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line))
    rows.push_back(line);
  return rows;
}

std::string field(const std::string& row, std::size_t n)
{
  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i)
    start = row.find(',', start) + 1;
  return row.substr(start, row.find(',', start) - start);
}

const char* kPlane3x3 = "ncols 3\nnrows 3\nxllcorner 0\nyllcorner 0\ncellsize 10\n"
                        "3 2 1\n3 2 1\n3 2 1\n";

struct SmallRun
{
  fs::path root, dem, run;
};

SmallRun small_run(const std::string& name, std::size_t generations = 6)
{
  SmallRun r;
  r.root = scratch(name);
  r.dem = r.root / "dem.asc";
  r.run = r.root / "run";
  SyntheticDemSpec spec;
  spec.rows = 8;
  spec.cols = 8;
  write_ascii_grid_file(synthetic_dem(spec), r.dem.string());
  const Result res = cli({"optimize", "--dem", r.dem.string(), "--out", r.run.string(), "--population", "16",
                          "--offspring", "8", "--generations", std::to_string(generations), "--seed", "5"});
  REQUIRE_MESSAGE(res.code == 0, res.err);
  return r;
}

} // namespace

TEST_CASE("config text round-trips through format_config")
{
  RunConfig cfg;
  apply_config_text(cfg, "# comment\n"
                         "dem_path = a.asc\n"
                         "seed = 42\n"
                         "population_size = 30   # trailing\n"
                         "offspring_size = 10\n"
                         "mutation_probability = 0.25\n"
                         "snapshot_generations = 5,10\n"
                         "cell_area = 64\n"
                         "weights = 1,2,3\n"
                         "slope_as_percent = true\n"
                         "run.status = complete\n");
  CHECK(cfg.dem_path == "a.asc");
  CHECK(cfg.optimizer.rng_seed == 42);
  CHECK(cfg.optimizer.population_size == 30);
  CHECK(cfg.optimizer.mutation_probability == 0.25);
  CHECK(cfg.optimizer.snapshot_generations == std::vector<std::size_t>{5, 10});
  CHECK(cfg.cell_area == 64.0);
  CHECK(cfg.weights == Weights{1, 2, 3});
  CHECK(cfg.hydro.slope_as_percent);

  RunConfig back;
  apply_config_text(back, format_config(cfg));
  CHECK(format_config(back) == format_config(cfg));

  RunConfig automatic;
  apply_config_text(automatic, "cell_area = auto\nmutation_probability = auto\n");
  CHECK_FALSE(automatic.cell_area.has_value());
  CHECK_FALSE(automatic.optimizer.mutation_probability.has_value());
}

TEST_CASE("config errors name the line")
{
  RunConfig cfg;
  try {
    apply_config_text(cfg, "seed = 1\nno_such_key = 3\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_config_text(cfg, "seed = banana\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "just text\n"), ConfigError);

  RunConfig bad;
  bad.optimizer.population_size = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("exit codes")
{
  const fs::path dir = scratch("exit");
  spit(dir / "empty.asc", "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n"
                          "NODATA_value -9999\n-9999 -9999\n");
  Result r = cli({"analyze", "--dem", (dir / "empty.asc").string(), "--out", (dir / "o").string()});
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("no valid cells") != std::string::npos);

  spit(dir / "broken.asc", "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 x\n");
  r = cli({"analyze", "--dem", (dir / "broken.asc").string(), "--out", (dir / "o").string()});
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("line 6, column 3") != std::string::npos);

  r = cli({"analyze", "--dem", (dir / "missing.asc").string()});
  CHECK(r.code == kExitInput);

  spit(dir / "bad.cfg", "population_size = many\n");
  r = cli({"optimize", "--config", (dir / "bad.cfg").string()});
  CHECK(r.code == kExitConfig);

  r = cli({"optimize", "--population", "1", "--dem", (dir / "empty.asc").string()});
  CHECK(r.code == kExitConfig);

  r = cli({"analyze"});
  CHECK(r.code == kExitConfig); // no DEM

  CHECK(cli({"frobnicate"}).code == kExitConfig);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("analyze writes congruent rasters and reports the threshold")
{
  const fs::path dir = scratch("analyze");
  spit(dir / "plane.asc", kPlane3x3);
  const Result r = cli({"analyze", "--dem", (dir / "plane.asc").string(), "--out", (dir / "out").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const Grid dem = read_ascii_grid_file((dir / "plane.asc").string());
  for (const char* name : {"filled", "d8", "accumulation", "flow_path", "slope", "velocity"}) {
    const Grid g = read_ascii_grid_file((dir / "out" / (std::string(name) + ".asc")).string());
    CHECK_MESSAGE(g.geometry().n_rows == 3, name);
    CHECK_MESSAGE(g.congruent(dem), name);
  }
  CHECK(r.out.find("valid_cells = 9\n") != std::string::npos);
  CHECK(r.out.find("max_acc = 2\n") != std::string::npos);
  CHECK(r.out.find("threshold = 0.02 × max_acc = 0.04\n") != std::string::npos);
  CHECK(r.out.find("path_cells = 6\n") != std::string::npos);

  const Grid acc = read_ascii_grid_file((dir / "out" / "accumulation.asc").string());
  CHECK(acc.values() == std::vector<double>{0, 1, 2, 0, 1, 2, 0, 1, 2});
}

TEST_CASE("synth writes the benchmark DEM")
{
  const fs::path dir = scratch("synth");
  REQUIRE(cli({"synth", (dir / "s.asc").string(), "--rows", "12", "--cols", "9"}).code == 0);
  const Grid g = read_ascii_grid_file((dir / "s.asc").string());
  CHECK(g.n_rows() == 12);
  CHECK(g.n_cols() == 9);
  SyntheticDemSpec spec;
  spec.rows = 12;
  spec.cols = 9;
  CHECK(g == synthetic_dem(spec));
}

TEST_CASE("optimize writes a consistent run directory")
{
  const SmallRun r = small_run("optimize");
  const std::string manifest = slurp(r.run / "manifest.txt");
  CHECK(manifest.find("run.status = complete") != std::string::npos);

  const StoredRun run = load_run(r.run.string());
  const auto rows = csv_rows(slurp(r.run / "pareto.csv"));
  CHECK(rows.size() == run.members.size());
  CHECK(count_lines(slurp(r.run / "history.csv")) == 8); // header + generations 0..6

  // Stored genomes re-evaluate to the recorded objectives.
  const CostParams cp = run.config.resolved_cost(run.base);
  std::set<std::string> checksums;
  bool zero_present = false;
  for (const auto& m : run.members) {
    CHECK(evaluate(run.base, m.plan, run.config.hydro, cp) == m.objectives);
    checksums.insert(m.checksum);
    zero_present = zero_present || m.plan == zero_plan(run.base);
  }
  CHECK(checksums.size() == run.members.size());

  // A zero-cost row appears exactly when the unmodified DEM survived.
  bool zero_cost_row = false;
  for (const auto& row : rows)
    zero_cost_row = zero_cost_row || field(row, 3) == "0";
  CHECK(zero_cost_row == zero_present);

  for (const char* role : {"max_path_length", "min_max_velocity", "min_cost", "balanced"}) {
    CHECK(fs::exists(r.run / "picks" / (std::string(role) + "_delta.asc")));
    CHECK(fs::exists(r.run / "picks" / (std::string(role) + "_dem.asc")));
  }
}

TEST_CASE("pick reproduces the selection stored by optimize")
{
  const SmallRun r = small_run("pick");
  const Result p = cli({"pick", r.run.string()});
  REQUIRE_MESSAGE(p.code == 0, p.err);
  CHECK(slurp(r.run / "pick" / "selection.csv") == slurp(r.run / "picks" / "selection.csv"));

  const Result k1 = cli({"pick", r.run.string(), "--every-k", "1", "--out", (r.root / "k1").string()});
  REQUIRE(k1.code == 0);
  const StoredRun run = load_run(r.run.string());
  CHECK(csv_rows(slurp(r.root / "k1" / "selection.csv")).size() == 4 + run.members.size());

  const Result w = cli({"pick", r.run.string(), "--weights", "0.000001,1,1", "--out", (r.root / "w").string()});
  REQUIRE(w.code == 0);
  const auto sel = csv_rows(slurp(r.root / "w" / "selection.csv"));
  CHECK(field(sel[3], 0) == "balanced");
  CHECK(field(sel[3], 2) == field(sel[0], 2)); // same path length as the max_path_length pick

  CHECK(cli({"pick", r.run.string(), "--weights", "1,0,1"}).code == kExitConfig);
}

TEST_CASE("pick rejects damaged runs")
{
  const SmallRun r = small_run("damaged", 3);
  std::string csv = slurp(r.run / "pareto.csv");
  const auto pos = csv.rfind(',');
  csv[pos + 1] = csv[pos + 1] == '0' ? '1' : '0';
  spit(r.run / "pareto.csv", csv);
  Result p = cli({"pick", r.run.string()});
  CHECK(p.code == kExitInput);
  CHECK(p.err.find("checksum") != std::string::npos);

  spit(r.run / "manifest.txt", "run.status = running\n");
  p = cli({"pick", r.run.string()});
  CHECK(p.code == kExitInput);

  CHECK(cli({"pick", (r.root / "nowhere").string()}).code == kExitInput);
}

TEST_CASE("plan checksum is sensitive to every bit")
{
  const ModificationPlan a{{0.0, 1.0, -2.0}};
  ModificationPlan b = a;
  b.deltas[0] = -0.0;
  CHECK(plan_checksum(a) != plan_checksum(b));
  CHECK(plan_checksum(a) == plan_checksum(ModificationPlan{{0.0, 1.0, -2.0}}));
  CHECK(plan_checksum(a).size() == 16);
}
