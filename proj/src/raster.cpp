#include "terramod/raster.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

namespace terramod {

Grid::Grid(GridGeometry geometry, std::vector<double> values)
  : geometry_(geometry), values_(std::move(values))
{
  if (geometry_.n_rows == 0 || geometry_.n_cols == 0)
    throw std::invalid_argument("grid dimensions must be positive");
  if (!(geometry_.cell_size > 0.0))
    throw std::invalid_argument("grid cell size must be positive");
  if (values_.size() != geometry_.size())
    throw std::invalid_argument("grid value count " + std::to_string(values_.size()) +
                                " does not match " + std::to_string(geometry_.n_rows) + "x" +
                                std::to_string(geometry_.n_cols));
}

Grid::Grid(GridGeometry geometry, double fill)
  : Grid(geometry, std::vector<double>(geometry.size(), fill))
{
}

std::vector<bool> Grid::valid_mask() const
{
  std::vector<bool> mask(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i)
    mask[i] = valid(i);
  return mask;
}

std::size_t Grid::valid_count() const
{
  return static_cast<std::size_t>(
    std::count_if(values_.begin(), values_.end(), [&](double v) { return v != geometry_.nodata; }));
}

std::vector<std::size_t> Grid::valid_indices() const
{
  std::vector<std::size_t> out;
  out.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (valid(i))
      out.push_back(i);
  return out;
}

std::vector<Neighbor> neighbors8(const Grid& g, CellIndex c)
{
  std::vector<Neighbor> out;
  out.reserve(8);
  const double diag = g.cell_size() * std::sqrt(2.0);
  for (const auto& o : kD8Offsets) {
    const long r = static_cast<long>(c.row) + o.drow;
    const long k = static_cast<long>(c.col) + o.dcol;
    if (!g.in_bounds(r, k))
      continue;
    const CellIndex n{static_cast<std::size_t>(r), static_cast<std::size_t>(k)};
    if (!g.valid(n))
      continue;
    out.push_back({n, o.diagonal ? diag : g.cell_size()});
  }
  return out;
}

// ---------------------------------------------------------------------------

ParseError::ParseError(ParseErrorKind kind, std::size_t line, std::size_t column,
                       const std::string& what)
  : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                       ": " + what),
    kind_(kind), line_(line), column_(column), detail_(what)
{
}

namespace {

struct Token
{
  std::string_view text;
  std::size_t line;
  std::size_t column;
};

std::vector<Token> split_line(std::string_view line, std::size_t line_no)
{
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i > start)
      out.push_back({line.substr(start, i - start), line_no, start + 1});
  }
  return out;
}

std::optional<double> to_number(std::string_view s)
{
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::string lower(std::string_view s)
{
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

bool starts_alpha(std::string_view s)
{
  return !s.empty() && std::isalpha(static_cast<unsigned char>(s.front()));
}

} // namespace

Grid parse_ascii_grid(std::string_view text)
{
  std::optional<double> ncols, nrows, x, y, cellsize, nodata;
  bool x_center = false;
  bool y_center = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::vector<Token> data;
  bool in_data = false;
  std::size_t last_line = 0;
  std::size_t last_col = 0;

  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    ++line_no;
    pos = end + 1;

    auto tokens = split_line(line, line_no);
    if (tokens.empty())
      continue;
    last_line = line_no;
    last_col = tokens.back().column + tokens.back().text.size();

    const bool header_complete = ncols && nrows && x && y && cellsize;
    if (!in_data && starts_alpha(tokens.front().text) &&
        !(header_complete && lower(tokens.front().text) != "nodata_value")) {
      const Token& key_tok = tokens.front();
      const std::string key = lower(key_tok.text);
      if (tokens.size() != 2)
        throw ParseError(ParseErrorKind::MalformedHeader, line_no, key_tok.column,
                         "header line '" + std::string(key_tok.text) + "' must have one value");
      const auto value = to_number(tokens[1].text);
      if (!value)
        throw ParseError(ParseErrorKind::MalformedHeader, line_no, tokens[1].column,
                         "header value '" + std::string(tokens[1].text) + "' is not numeric");

      std::optional<double>* slot = nullptr;
      if (key == "ncols")
        slot = &ncols;
      else if (key == "nrows")
        slot = &nrows;
      else if (key == "xllcorner" || key == "xllcenter") {
        slot = &x;
        x_center = key == "xllcenter";
      } else if (key == "yllcorner" || key == "yllcenter") {
        slot = &y;
        y_center = key == "yllcenter";
      } else if (key == "cellsize")
        slot = &cellsize;
      else if (key == "nodata_value")
        slot = &nodata;
      else
        throw ParseError(ParseErrorKind::MalformedHeader, line_no, key_tok.column,
                         "unknown header key '" + std::string(key_tok.text) + "'");
      if (slot->has_value())
        throw ParseError(ParseErrorKind::MalformedHeader, line_no, key_tok.column,
                         "duplicate header key '" + std::string(key_tok.text) + "'");
      *slot = *value;

      if (key == "cellsize" && !(*value > 0.0))
        throw ParseError(ParseErrorKind::NonPositiveCellSize, line_no, tokens[1].column,
                         "cellsize must be positive");
      if ((key == "ncols" || key == "nrows") &&
          (*value < 1.0 || std::floor(*value) != *value))
        throw ParseError(ParseErrorKind::MalformedHeader, line_no, tokens[1].column,
                         key + " must be a positive integer");
      continue;
    }

    if (!in_data) {
      const char* missing = !ncols      ? "ncols"
                            : !nrows    ? "nrows"
                            : !x        ? "xllcorner"
                            : !y        ? "yllcorner"
                            : !cellsize ? "cellsize"
                                        : nullptr;
      if (missing)
        throw ParseError(ParseErrorKind::MalformedHeader, line_no, 1,
                         std::string("missing header key '") + missing + "'");
      in_data = true;
    }
    data.insert(data.end(), tokens.begin(), tokens.end());
  }

  if (!in_data) {
    if (!ncols || !nrows || !x || !y || !cellsize)
      throw ParseError(ParseErrorKind::MalformedHeader, line_no, 1, "incomplete header");
  }

  GridGeometry geo;
  geo.n_cols = static_cast<std::size_t>(*ncols);
  geo.n_rows = static_cast<std::size_t>(*nrows);
  geo.cell_size = *cellsize;
  geo.x_ll = x_center ? *x - geo.cell_size / 2.0 : *x;
  geo.y_ll = y_center ? *y - geo.cell_size / 2.0 : *y;
  geo.nodata = nodata.value_or(-9999.0);

  const std::size_t expected = geo.size();
  if (data.size() != expected) {
    const std::size_t l = data.size() > expected ? data[expected].line : last_line;
    const std::size_t c = data.size() > expected ? data[expected].column : last_col;
    throw ParseError(ParseErrorKind::TokenCount, l, c,
                     "expected " + std::to_string(expected) + " values, found " +
                       std::to_string(data.size()));
  }

  std::vector<double> values(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    const auto v = to_number(data[i].text);
    if (!v)
      throw ParseError(ParseErrorKind::NonNumericToken, data[i].line, data[i].column,
                       "non-numeric value '" + std::string(data[i].text) + "'");
    values[i] = *v;
  }
  return Grid(geo, std::move(values));
}

Grid parse_ascii_grid(std::istream& in)
{
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_ascii_grid(std::string_view(text));
}

std::string format_double(double v)
{
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{})
    throw std::runtime_error("failed to format double");
  return std::string(buf.data(), ptr);
}

void write_ascii_grid(const Grid& g, std::ostream& out)
{
  const auto& geo = g.geometry();
  out << "ncols " << geo.n_cols << '\n'
      << "nrows " << geo.n_rows << '\n'
      << "xllcorner " << format_double(geo.x_ll) << '\n'
      << "yllcorner " << format_double(geo.y_ll) << '\n'
      << "cellsize " << format_double(geo.cell_size) << '\n'
      << "NODATA_value " << format_double(geo.nodata) << '\n';
  for (std::size_t r = 0; r < geo.n_rows; ++r) {
    for (std::size_t c = 0; c < geo.n_cols; ++c) {
      if (c)
        out << ' ';
      out << format_double(g[r * geo.n_cols + c]);
    }
    out << '\n';
  }
}

std::string write_ascii_grid(const Grid& g)
{
  std::ostringstream out;
  write_ascii_grid(g, out);
  return out.str();
}

Grid read_ascii_grid_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open '" + path + "'");
  try {
    return parse_ascii_grid(in);
  } catch (const ParseError& e) {
    throw ParseError(e.kind(), e.line(), e.column(), e.detail() + " (in '" + path + "')");
  }
}

void write_ascii_grid_file(const Grid& g, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write '" + path + "'");
  write_ascii_grid(g, out);
  if (!out)
    throw std::runtime_error("write failed for '" + path + "'");
}

} // namespace terramod
