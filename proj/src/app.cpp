#include "terramod/app.hpp"

#include "terramod/decision.hpp"
#include "terramod/hydrology.hpp"
#include "terramod/raster.hpp"
#include "terramod/synthetic.hpp"

#include <CLI11.hpp>

#include <bit>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace terramod {

namespace {

constexpr const char* kParetoHeader = "id,path_cells,v_max_mps,cost,delta_checksum";

std::string member_file(std::size_t id)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "member_%04zu.asc", id);
  return buf;
}

void make_dir(const fs::path& p)
{
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec)
    throw std::runtime_error("cannot create directory '" + p.string() + "': " + ec.message());
}

void write_text(const fs::path& p, const std::string& text)
{
  std::ofstream out(p, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
  if (!out)
    throw std::runtime_error("write failed for '" + p.string() + "'");
}

std::string read_text(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw InputError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Grid read_grid(const fs::path& p)
{
  try {
    return read_ascii_grid_file(p.string());
  } catch (const ParseError& e) {
    throw InputError(p.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(p.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw InputError(e.what());
  }
}

std::string objective_row(std::size_t id, const ObjectiveVector& o, const ModificationPlan& plan)
{
  return std::to_string(id) + ',' + std::to_string(o.path_cells) + ',' + format_double(o.v_max) +
         ',' + format_double(o.cost) + ',' + plan_checksum(plan);
}

std::string summary_line(const std::string& role, std::size_t id, const ObjectiveVector& o)
{
  return role + ": id=" + std::to_string(id) + " path_cells=" + std::to_string(o.path_cells) +
         " v_max_mps=" + format_double(o.v_max) + " cost=" + format_double(o.cost);
}

void check_non_dominated(std::span<const Individual> members)
{
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = 0; j < members.size(); ++j)
      if (i != j && dominates(members[i].fitness, members[j].fitness))
        throw std::logic_error("archive member " + std::to_string(i) + " dominates member " +
                               std::to_string(j));
}

std::string pareto_csv(std::span<const Individual> members)
{
  std::string s = std::string(kParetoHeader) + '\n';
  for (std::size_t i = 0; i < members.size(); ++i)
    s += objective_row(i, members[i].objectives(), members[i].plan) + '\n';
  return s;
}

/// Writes the per-objective optima, the balanced pick and the every-k sample
/// (delta and modified-DEM rasters plus selection.csv) into `dir`.
void write_selection(const fs::path& dir, const Grid& base, std::span<const Individual> members,
                     const Weights& weights, double rho, std::size_t every_k, std::ostream& out)
{
  make_dir(dir);
  make_dir(dir / "samples");
  const ObjectivePicks picks = best_per_objective(members);
  const std::size_t balanced = aasf_pick(members, weights, rho);
  const auto samples = sample_interval(members, every_k);

  std::string csv = "role,id,path_cells,v_max_mps,cost,delta_checksum\n";
  auto emit = [&](const std::string& role, std::size_t id, const fs::path& stem) {
    const Individual& m = members[id];
    write_ascii_grid_file(plan_to_grid(base, m.plan), (stem.string() + "_delta.asc"));
    write_ascii_grid_file(apply_plan(base, m.plan), (stem.string() + "_dem.asc"));
    csv += role + ',' + objective_row(id, m.objectives(), m.plan) + '\n';
    out << summary_line(role, id, m.objectives()) << '\n';
  };
  emit("max_path_length", picks.max_path, dir / "max_path_length");
  emit("min_max_velocity", picks.min_velocity, dir / "min_max_velocity");
  emit("min_cost", picks.min_cost, dir / "min_cost");
  emit("balanced", balanced, dir / "balanced");
  for (std::size_t s = 0; s < samples.size(); ++s) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%02zu", s);
    emit(name, samples[s], dir / "samples" / name);
  }
  write_text(dir / "selection.csv", csv);
}

std::string manifest_text(const RunConfig& cfg, const std::string& status,
                          const std::vector<std::string>& extra)
{
  std::string s = "# terramod run manifest\nrun.status = " + status + '\n';
  for (const auto& line : extra)
    s += line + '\n';
  return s + format_config(cfg);
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.push_back(line.substr(pos, next - pos));
    if (next == std::string_view::npos)
      return out;
    pos = next + 1;
  }
}

template<class T>
T parse_field(std::string_view s, const std::string& what)
{
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw InputError(what + ": bad value '" + std::string(s) + "'");
  return v;
}

} // namespace

std::string plan_checksum(const ModificationPlan& plan)
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const double d : plan.deltas) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Grid load_dem(const std::string& path)
{
  if (path.empty())
    throw ConfigError("no DEM given (set dem_path or pass --dem)");
  Grid dem = read_grid(path);
  if (dem.valid_count() == 0)
    throw InputError(path + ": no valid cells");
  return dem;
}

void cmd_analyze(const RunConfig& cfg, std::ostream& out)
{
  cfg.validate();
  const Grid dem = load_dem(cfg.dem_path);
  const CostParams cp = cfg.resolved_cost(dem);
  const HydrologyResult h = run_hydrology(dem, cfg.hydro, cp.cell_area);

  const fs::path dir(cfg.output_dir);
  make_dir(dir);
  const auto valid = dem.valid_mask();
  write_ascii_grid_file(h.filled, (dir / "filled.asc").string());
  write_ascii_grid_file(h.directions.to_grid(), (dir / "d8.asc").string());
  write_ascii_grid_file(h.accumulation, (dir / "accumulation.asc").string());
  write_ascii_grid_file(h.path.to_grid(dem.geometry(), valid), (dir / "flow_path.asc").string());
  write_ascii_grid_file(h.slope, (dir / "slope.asc").string());
  write_ascii_grid_file(h.velocity, (dir / "velocity.asc").string());

  out << "valid_cells = " << dem.valid_count() << '\n'
      << "max_acc = " << format_double(h.path.max_accumulation) << '\n'
      << "threshold = " << format_double(cfg.hydro.accumulation_threshold_fraction)
      << " × max_acc = " << format_double(h.path.threshold) << '\n'
      << "path_cells = " << h.path.count << '\n'
      << "v_max_mps = " << format_double(h.max_velocity) << '\n';
}

ParetoArchive cmd_optimize(const RunConfig& cfg, std::ostream& out, std::ostream& log)
{
  cfg.validate();
  const Grid dem = load_dem(cfg.dem_path);
  const CostParams cp = cfg.resolved_cost(dem);

  const fs::path dir(cfg.output_dir);
  make_dir(dir / "genomes");
  write_text(dir / "manifest.txt", manifest_text(cfg, "running", {}));

  try {
    write_ascii_grid_file(dem, (dir / "base_dem.asc").string());

    auto progress = [&](const GenerationStats& s, const std::vector<Individual>&) {
      log << "generation " << s.generation << ": front " << s.front_size << ", max path "
          << s.max_path_cells << ", min v_max " << format_double(s.min_v_max) << " m/s, min cost "
          << format_double(s.min_cost) << '\n';
    };
    ParetoArchive archive = run_nsga2(dem, cfg.hydro, cp, cfg.optimizer, progress);
    const auto& members = archive.members;
    check_non_dominated(members);

    write_text(dir / "pareto.csv", pareto_csv(members));
    for (std::size_t i = 0; i < members.size(); ++i)
      write_ascii_grid_file(plan_to_grid(dem, members[i].plan),
                            (dir / "genomes" / member_file(i)).string());

    std::string history =
      "generation,front_size,min_path_cells,max_path_cells,min_v_max_mps,max_v_max_mps,"
      "min_cost,max_cost\n";
    std::string timing = "generation,wall_ms\n";
    for (const auto& s : archive.history) {
      history += std::to_string(s.generation) + ',' + std::to_string(s.front_size) + ',' +
                 std::to_string(s.min_path_cells) + ',' + std::to_string(s.max_path_cells) + ',' +
                 format_double(s.min_v_max) + ',' + format_double(s.max_v_max) + ',' +
                 format_double(s.min_cost) + ',' + format_double(s.max_cost) + '\n';
      std::ostringstream ms;
      ms << std::fixed << std::setprecision(3) << s.wall_ms;
      timing += std::to_string(s.generation) + ',' + ms.str() + '\n';
    }
    write_text(dir / "history.csv", history);
    write_text(dir / "timing.csv", timing);

    if (!archive.snapshots.empty())
      make_dir(dir / "snapshots");
    for (const auto& [gen, front] : archive.snapshots) {
      char name[32];
      std::snprintf(name, sizeof name, "gen_%04zu", gen);
      write_text(dir / "snapshots" / (std::string(name) + ".csv"), pareto_csv(front));
      if (cfg.write_snapshot_rasters) {
        make_dir(dir / "snapshots" / name);
        for (std::size_t i = 0; i < front.size(); ++i)
          write_ascii_grid_file(plan_to_grid(dem, front[i].plan),
                                (dir / "snapshots" / name / member_file(i)).string());
      }
    }

    out << summary_line("baseline", 0, archive.baseline) << '\n';
    write_selection(dir / "picks", dem, members, cfg.weights, cfg.rho, cfg.every_k, out);

    write_text(dir / "manifest.txt",
               manifest_text(cfg, "complete",
                             {"run.n_var = " + std::to_string(archive.n_var),
                              "run.members = " + std::to_string(members.size()),
                              "run.baseline_path_cells = " +
                                std::to_string(archive.baseline.path_cells),
                              "run.baseline_v_max_mps = " + format_double(archive.baseline.v_max),
                              "run.cell_area = " + format_double(cp.cell_area)}));
    return archive;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& ch : msg)
      if (ch == '\n')
        ch = ' ';
    write_text(dir / "manifest.txt", manifest_text(cfg, "failed", {"run.error = " + msg}));
    throw;
  }
}

StoredRun load_run(const std::string& run_dir)
{
  const fs::path dir(run_dir);
  StoredRun run;
  const std::string manifest = read_text(dir / "manifest.txt");
  if (manifest.find("run.status = complete") == std::string::npos)
    throw InputError(run_dir + ": run did not complete (see manifest.txt)");
  try {
    apply_config_text(run.config, manifest);
  } catch (const ConfigError& e) {
    throw InputError(run_dir + "/manifest.txt: " + e.what());
  }
  run.base = read_grid(dir / "base_dem.asc");

  const std::string csv = read_text(dir / "pareto.csv");
  auto lines = split(csv, '\n');
  if (lines.empty() || lines.front() != kParetoHeader)
    throw InputError(run_dir + "/pareto.csv: unexpected header");
  for (std::size_t l = 1; l < lines.size(); ++l) {
    if (lines[l].empty())
      continue;
    const std::string where = run_dir + "/pareto.csv line " + std::to_string(l + 1);
    const auto f = split(lines[l], ',');
    if (f.size() != 5)
      throw InputError(where + ": expected 5 fields");
    StoredMember m;
    m.id = parse_field<std::size_t>(f[0], where);
    m.objectives.path_cells = parse_field<std::size_t>(f[1], where);
    m.objectives.v_max = parse_field<double>(f[2], where);
    m.objectives.cost = parse_field<double>(f[3], where);
    m.checksum = std::string(f[4]);
    const fs::path genome = dir / "genomes" / member_file(m.id);
    try {
      m.plan = plan_from_grid(run.base, read_grid(genome));
    } catch (const std::invalid_argument& e) {
      throw InputError(genome.string() + ": " + e.what());
    }
    if (plan_checksum(m.plan) != m.checksum)
      throw InputError(genome.string() + ": checksum does not match pareto.csv");
    run.members.push_back(std::move(m));
  }
  if (run.members.empty())
    throw InputError(run_dir + "/pareto.csv: no members");
  return run;
}

void cmd_pick(const PickOptions& opts, std::ostream& out)
{
  StoredRun run = load_run(opts.run_dir);
  std::vector<Individual> members;
  members.reserve(run.members.size());
  for (std::size_t i = 0; i < run.members.size(); ++i) {
    if (run.members[i].id != i)
      throw InputError(opts.run_dir + "/pareto.csv: ids are not consecutive");
    members.push_back({std::move(run.members[i].plan), to_fitness(run.members[i].objectives), 0, 0.0});
  }
  const fs::path dir = opts.output_dir.empty() ? fs::path(opts.run_dir) / "pick" : fs::path(opts.output_dir);
  write_selection(dir, run.base, members, opts.weights, opts.rho, opts.every_k, out);
}

// ---------------------------------------------------------------------------

namespace {

struct Overrides
{
  std::string config;
  std::optional<std::string> dem, out, weights;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> generations, population, offspring, every_k, threads;
  std::optional<double> threshold_fraction, unit_price, rain_intensity, manning_n, rho;

  void attach(CLI::App& sub, bool run_options)
  {
    sub.add_option("--config", config, "Flat key = value config file");
    sub.add_option("--out", out, "Output directory");
    sub.add_option("--weights", weights, "AASF weights w1,w2,w3");
    sub.add_option("--rho", rho, "AASF augmentation coefficient");
    sub.add_option("--every-k", every_k, "Sampling interval over the cost-sorted front");
    if (!run_options)
      return;
    sub.add_option("--dem", dem, "Input DEM (ESRI ASCII grid)");
    sub.add_option("--seed", seed, "RNG seed");
    sub.add_option("--generations", generations, "Number of generations");
    sub.add_option("--population", population, "Population size");
    sub.add_option("--offspring", offspring, "Offspring per generation");
    sub.add_option("--threads", threads, "Evaluation threads");
    sub.add_option("--threshold-fraction", threshold_fraction,
                   "Flow-path threshold as a fraction of the maximum accumulation");
    sub.add_option("--unit-price", unit_price, "Earthwork price per cubic metre");
    sub.add_option("--rain-intensity", rain_intensity, "Rain intensity (m/s)");
    sub.add_option("--manning-n", manning_n, "Manning roughness coefficient");
  }

  RunConfig resolve() const
  {
    RunConfig cfg = config.empty() ? RunConfig{} : load_config_file(config);
    auto set = [&](const char* key, const std::string& v) { cfg.set(key, v); };
    if (dem)
      set("dem_path", *dem);
    if (out)
      set("output_dir", *out);
    if (weights)
      set("weights", *weights);
    if (seed)
      cfg.optimizer.rng_seed = *seed;
    if (generations)
      cfg.optimizer.generations = *generations;
    if (population)
      cfg.optimizer.population_size = *population;
    if (offspring)
      cfg.optimizer.offspring_size = *offspring;
    if (threads)
      cfg.optimizer.threads = *threads;
    if (every_k)
      cfg.every_k = *every_k;
    if (threshold_fraction)
      cfg.hydro.accumulation_threshold_fraction = *threshold_fraction;
    if (unit_price)
      cfg.cost.unit_price = *unit_price;
    if (rain_intensity)
      cfg.hydro.rain_intensity = *rain_intensity;
    if (manning_n)
      cfg.hydro.manning_n = *manning_n;
    if (rho)
      cfg.rho = *rho;
    return cfg;
  }
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Multi-objective terrain modification on a DEM"};
  app.name("terramod");
  app.require_subcommand(1);

  Overrides analyze_opts, optimize_opts, pick_opts;
  auto* analyze = app.add_subcommand("analyze", "Run the hydrology pipeline on a DEM");
  analyze_opts.attach(*analyze, true);
  auto* optimize = app.add_subcommand("optimize", "Search for Pareto-optimal terrain modifications");
  optimize_opts.attach(*optimize, true);
  auto* pick = app.add_subcommand("pick", "Re-run decision selection on a finished run");
  std::string run_dir;
  pick->add_option("run_dir", run_dir, "Run directory written by optimize")->required();
  pick_opts.attach(*pick, false);

  auto* synth = app.add_subcommand("synth", "Write the synthetic benchmark DEM");
  std::string synth_path;
  SyntheticDemSpec synth_spec;
  synth->add_option("path", synth_path, "Output .asc file")->required();
  synth->add_option("--rows", synth_spec.rows);
  synth->add_option("--cols", synth_spec.cols);
  synth->add_option("--seed", synth_spec.seed);

  std::vector<const char*> argv;
  argv.push_back("terramod");
  for (const auto& a : args)
    argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "terramod: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*analyze) {
      cmd_analyze(analyze_opts.resolve(), out);
    } else if (*optimize) {
      cmd_optimize(optimize_opts.resolve(), out, err);
    } else if (*pick) {
      const RunConfig cfg = pick_opts.resolve();
      cfg.validate();
      PickOptions opts;
      opts.run_dir = run_dir;
      opts.output_dir = pick_opts.out.value_or("");
      opts.weights = cfg.weights;
      opts.rho = cfg.rho;
      opts.every_k = cfg.every_k;
      cmd_pick(opts, out);
    } else if (*synth) {
      write_ascii_grid_file(synthetic_dem(synth_spec), synth_path);
    }
  } catch (const ConfigError& e) {
    err << "terramod: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InputError& e) {
    err << "terramod: input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ParseError& e) {
    err << "terramod: input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "terramod: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

} // namespace terramod
