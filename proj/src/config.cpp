#include "terramod/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace terramod {

namespace {

std::string_view trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::string quoted(std::string_view s) { return "'" + std::string(s) + "'"; }

double parse_real(std::string_view key, std::string_view v)
{
  v = trim(v);
  if (!v.empty() && v.front() == '+')
    v.remove_prefix(1);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
    throw ConfigError(std::string(key) + ": expected a real number, got " + quoted(v));
  return out;
}

template<class Int>
Int parse_int(std::string_view key, std::string_view v)
{
  v = trim(v);
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got " + quoted(v));
  return out;
}

bool parse_bool(std::string_view key, std::string_view v)
{
  std::string s(trim(v));
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "true" || s == "1" || s == "yes" || s == "on")
    return true;
  if (s == "false" || s == "0" || s == "no" || s == "off")
    return false;
  throw ConfigError(std::string(key) + ": expected true or false, got " + quoted(v));
}

std::vector<std::string_view> split_commas(std::string_view v)
{
  std::vector<std::string_view> out;
  v = trim(v);
  if (v.empty())
    return out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = v.find(',', pos);
    out.push_back(trim(v.substr(pos, comma - pos)));
    if (comma == std::string_view::npos)
      break;
    pos = comma + 1;
  }
  return out;
}

bool is_auto(std::string_view v) { return trim(v) == "auto"; }

} // namespace

void RunConfig::set(std::string_view key, std::string_view value)
{
  auto& o = optimizer;
  if (key == "dem_path")
    dem_path = std::string(trim(value));
  else if (key == "output_dir")
    output_dir = std::string(trim(value));
  else if (key == "seed")
    o.rng_seed = parse_int<std::uint64_t>(key, value);
  else if (key == "population_size")
    o.population_size = parse_int<std::size_t>(key, value);
  else if (key == "offspring_size")
    o.offspring_size = parse_int<std::size_t>(key, value);
  else if (key == "generations")
    o.generations = parse_int<std::size_t>(key, value);
  else if (key == "crossover_probability")
    o.crossover_probability = parse_real(key, value);
  else if (key == "crossover_eta")
    o.crossover_eta = parse_real(key, value);
  else if (key == "mutation_probability")
    o.mutation_probability =
      is_auto(value) ? std::nullopt : std::optional<double>(parse_real(key, value));
  else if (key == "mutation_eta")
    o.mutation_eta = parse_real(key, value);
  else if (key == "lower_bound")
    o.lower_bound = parse_real(key, value);
  else if (key == "upper_bound")
    o.upper_bound = parse_real(key, value);
  else if (key == "seed_with_zero_plan")
    o.seed_with_zero_plan = parse_bool(key, value);
  else if (key == "snapshot_generations") {
    o.snapshot_generations.clear();
    for (auto part : split_commas(value))
      o.snapshot_generations.push_back(parse_int<std::size_t>(key, part));
  } else if (key == "threads")
    o.threads = parse_int<std::size_t>(key, value);
  else if (key == "manning_n")
    hydro.manning_n = parse_real(key, value);
  else if (key == "channel_width")
    hydro.channel_width = parse_real(key, value);
  else if (key == "rain_intensity")
    hydro.rain_intensity = parse_real(key, value);
  else if (key == "threshold_fraction")
    hydro.accumulation_threshold_fraction = parse_real(key, value);
  else if (key == "fill_epsilon")
    hydro.fill_epsilon = parse_real(key, value);
  else if (key == "slope_as_percent")
    hydro.slope_as_percent = parse_bool(key, value);
  else if (key == "unit_price")
    cost.unit_price = parse_real(key, value);
  else if (key == "cell_area")
    cell_area = is_auto(value) ? std::nullopt : std::optional<double>(parse_real(key, value));
  else if (key == "write_snapshot_rasters")
    write_snapshot_rasters = parse_bool(key, value);
  else if (key == "weights") {
    const auto parts = split_commas(value);
    if (parts.size() != 3)
      throw ConfigError("weights: expected three comma-separated values, got " + quoted(value));
    for (std::size_t i = 0; i < 3; ++i)
      weights[i] = parse_real(key, parts[i]);
  } else if (key == "rho")
    rho = parse_real(key, value);
  else if (key == "every_k")
    every_k = parse_int<std::size_t>(key, value);
  else
    throw ConfigError("unknown config key " + quoted(key));
}

void RunConfig::validate() const
{
  try {
    hydro.validate();
    optimizer.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(cost.unit_price > 0.0))
    throw ConfigError("unit_price must be > 0");
  if (cell_area && !(*cell_area > 0.0))
    throw ConfigError("cell_area must be > 0");
  for (const double w : weights)
    if (!(w > 0.0))
      throw ConfigError("weights must be > 0");
  if (!(rho > 0.0))
    throw ConfigError("rho must be > 0");
  if (every_k == 0)
    throw ConfigError("every_k must be >= 1");
}

CostParams RunConfig::resolved_cost(const Grid& dem) const
{
  CostParams cp = cost;
  cp.cell_area = cell_area.value_or(dem.geometry().cell_area());
  return cp;
}

void apply_config_text(RunConfig& cfg, std::string_view text)
{
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.starts_with("run."))
      continue;
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

RunConfig load_config_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig cfg;
  apply_config_text(cfg, ss.str());
  return cfg;
}

std::string format_config(const RunConfig& cfg)
{
  const auto& o = cfg.optimizer;
  std::ostringstream out;
  auto real = [](double v) { return format_double(v); };
  auto boolean = [](bool v) { return v ? "true" : "false"; };
  out << "dem_path = " << cfg.dem_path << '\n'
      << "output_dir = " << cfg.output_dir << '\n'
      << "seed = " << o.rng_seed << '\n'
      << "population_size = " << o.population_size << '\n'
      << "offspring_size = " << o.offspring_size << '\n'
      << "generations = " << o.generations << '\n'
      << "crossover_probability = " << real(o.crossover_probability) << '\n'
      << "crossover_eta = " << real(o.crossover_eta) << '\n'
      << "mutation_probability = "
      << (o.mutation_probability ? real(*o.mutation_probability) : std::string("auto")) << '\n'
      << "mutation_eta = " << real(o.mutation_eta) << '\n'
      << "lower_bound = " << real(o.lower_bound) << '\n'
      << "upper_bound = " << real(o.upper_bound) << '\n'
      << "seed_with_zero_plan = " << boolean(o.seed_with_zero_plan) << '\n'
      << "snapshot_generations = ";
  for (std::size_t i = 0; i < o.snapshot_generations.size(); ++i)
    out << (i ? "," : "") << o.snapshot_generations[i];
  out << '\n'
      << "threads = " << o.threads << '\n'
      << "manning_n = " << real(cfg.hydro.manning_n) << '\n'
      << "channel_width = " << real(cfg.hydro.channel_width) << '\n'
      << "rain_intensity = " << real(cfg.hydro.rain_intensity) << '\n'
      << "threshold_fraction = " << real(cfg.hydro.accumulation_threshold_fraction) << '\n'
      << "fill_epsilon = " << real(cfg.hydro.fill_epsilon) << '\n'
      << "slope_as_percent = " << boolean(cfg.hydro.slope_as_percent) << '\n'
      << "unit_price = " << real(cfg.cost.unit_price) << '\n'
      << "cell_area = " << (cfg.cell_area ? real(*cfg.cell_area) : std::string("auto")) << '\n'
      << "write_snapshot_rasters = " << boolean(cfg.write_snapshot_rasters) << '\n'
      << "weights = " << real(cfg.weights[0]) << ',' << real(cfg.weights[1]) << ','
      << real(cfg.weights[2]) << '\n'
      << "rho = " << real(cfg.rho) << '\n'
      << "every_k = " << cfg.every_k << '\n';
  return out.str();
}

} // namespace terramod
