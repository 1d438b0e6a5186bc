#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace terramod {

/// Raster geometry shared by every grid derived from the same DEM.
struct GridGeometry
{
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  double cell_size = 1.0;
  double x_ll = 0.0;
  double y_ll = 0.0;
  double nodata = -9999.0;

  std::size_t size() const { return n_rows * n_cols; }
  double cell_area() const { return cell_size * cell_size; }

  bool operator==(const GridGeometry&) const = default;
};

struct CellIndex
{
  std::size_t row = 0;
  std::size_t col = 0;

  bool operator==(const CellIndex&) const = default;
};

/// Row-major raster of doubles; row 0 is the northernmost row.
///
/// A cell is valid exactly when its value differs from the nodata sentinel.
/// Grids are immutable once built: derived rasters are new Grid values.
class Grid
{
public:
  Grid() = default;
  Grid(GridGeometry geometry, std::vector<double> values);
  /// All cells set to `fill`.
  Grid(GridGeometry geometry, double fill);

  const GridGeometry& geometry() const { return geometry_; }
  std::size_t n_rows() const { return geometry_.n_rows; }
  std::size_t n_cols() const { return geometry_.n_cols; }
  std::size_t size() const { return values_.size(); }
  double cell_size() const { return geometry_.cell_size; }
  double nodata() const { return geometry_.nodata; }

  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(CellIndex c) const { return values_[index(c)]; }

  std::size_t index(CellIndex c) const { return c.row * geometry_.n_cols + c.col; }
  CellIndex cell(std::size_t i) const { return {i / geometry_.n_cols, i % geometry_.n_cols}; }
  bool in_bounds(long row, long col) const
  {
    return row >= 0 && col >= 0 && static_cast<std::size_t>(row) < geometry_.n_rows &&
           static_cast<std::size_t>(col) < geometry_.n_cols;
  }

  bool valid(std::size_t i) const { return values_[i] != geometry_.nodata; }
  bool valid(CellIndex c) const { return valid(index(c)); }
  std::vector<bool> valid_mask() const;
  std::size_t valid_count() const;
  /// Flat indices of valid cells in row-major order.
  std::vector<std::size_t> valid_indices() const;

  /// Same geometry, new values (length must match).
  Grid with_values(std::vector<double> values) const { return Grid(geometry_, std::move(values)); }
  bool congruent(const Grid& other) const { return geometry_ == other.geometry_; }

  // Element-wise value comparison (0.0 == -0.0).
  bool operator==(const Grid&) const = default;

private:
  GridGeometry geometry_;
  std::vector<double> values_;
};

/// The 8 D8 offsets in code order E, SE, S, SW, W, NW, N, NE.
struct Offset
{
  int drow;
  int dcol;
  bool diagonal;
};
inline constexpr Offset kD8Offsets[8] = {
  {0, 1, false},  {1, 1, true},  {1, 0, false},   {1, -1, true},
  {0, -1, false}, {-1, -1, true}, {-1, 0, false}, {-1, 1, true},
};

struct Neighbor
{
  CellIndex cell;
  double distance;
};

/// In-bounds, valid neighbors of `c` in D8 code order.
std::vector<Neighbor> neighbors8(const Grid& g, CellIndex c);

// ---------------------------------------------------------------------------
// ESRI ASCII grid

enum class ParseErrorKind
{
  MalformedHeader,
  NonNumericToken,
  TokenCount,
  NonPositiveCellSize,
};

class ParseError : public std::runtime_error
{
public:
  ParseError(ParseErrorKind kind, std::size_t line, std::size_t column, const std::string& what);

  ParseErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& detail() const { return detail_; }

private:
  ParseErrorKind kind_;
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

Grid parse_ascii_grid(std::string_view text);
Grid parse_ascii_grid(std::istream& in);
std::string write_ascii_grid(const Grid& g);
void write_ascii_grid(const Grid& g, std::ostream& out);

Grid read_ascii_grid_file(const std::string& path);
void write_ascii_grid_file(const Grid& g, const std::string& path);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

} // namespace terramod
