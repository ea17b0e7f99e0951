#pragma once

#include "hawkes/bmds.hpp"
#include "hawkes/geometry.hpp"
#include "hawkes/mcmc.hpp"
#include "hawkes/model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace app {

/// Raised for malformed input; the message carries the file name and line number.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TimeUnits : std::uint8_t { Model, Hours, Days };
TimeUnits parse_time_units(const std::string& text);

/// Region used for rows whose region column is empty.
struct DefaultRegion {
  hawkes::RegionKind kind = hawkes::RegionKind::Point;
  double half_width = 50.0;
};

struct IngestOptions {
  TimeUnits units = TimeUnits::Model;
  DefaultRegion default_region{};
  /// When positive, files without coordinate columns are accepted and every event is
  /// placed at the origin of this dimension (latent-space fits).
  int latent_dimension = 0;
};

inline constexpr double kEarthRadiusMetres = 6371008.8;

struct Projection {
  double lon0 = 0.0;  ///< degrees
  double lat0 = 0.0;  ///< degrees
};

/// Equirectangular projection to metres about (lon0, lat0).
Eigen::Vector2d project_lonlat(double lon, double lat, const Projection& origin);

struct EventTable {
  hawkes::EventCatalog catalog;
  std::vector<hawkes::UncertaintyRegion> regions;
  std::vector<std::string> ids;
  std::optional<Projection> projection;  ///< set when the file carried lon/lat columns
  std::vector<std::string> notices;
};

/// Comma-separated events with header id,time,x1..xD,region,half_width,radius,area.
/// lon,lat may replace x1,x2. Times are decimal model units or ISO-8601 timestamps
/// (converted to hours or days since the earliest event). Area is in acres.
EventTable read_events(std::istream& in, const IngestOptions& options, const std::string& source = "<input>");
EventTable read_events(const std::filesystem::path& path, const IngestOptions& options);

/// Writes the same format with x1..xD columns; radius for discs, half_width for squares.
void write_events(std::ostream& out, const hawkes::EventCatalog& catalog,
                  const std::vector<hawkes::UncertaintyRegion>& regions,
                  const std::vector<std::string>& ids = {});

/// Seconds since 1970-01-01T00:00:00Z; std::nullopt if `text` is not an ISO-8601 timestamp.
std::optional<double> parse_iso8601(const std::string& text);

/// Square matrix with a header row of labels. Rows may start with their label.
/// Comma, tab or space delimited.
hawkes::DistanceMatrix read_distance_matrix(std::istream& in, const std::string& source = "<input>");
hawkes::DistanceMatrix read_distance_matrix(const std::filesystem::path& path);
void write_distance_matrix(std::ostream& out, const hawkes::DistanceMatrix& y);

/// Tab-separated snapshots: iteration, the six parameters, sigma2 when present,
/// log-likelihood, then coordinates of the selected events.
class SnapshotWriter {
 public:
  SnapshotWriter(std::ostream& out, std::vector<std::size_t> events, int dimension, bool with_sigma2);
  void write(const hawkes::Snapshot& s);

 private:
  std::ostream& out_;
  std::vector<std::size_t> events_;
};

/// Fixed-layout little-endian dump of every snapshot's full location matrix.
/// Header: 8-byte magic "HKLOC001", uint64 N, uint64 D. Records: uint64 iteration then
/// N*D float64 coordinates in row-major order.
class BinaryLocationWriter {
 public:
  BinaryLocationWriter(std::ostream& out, std::size_t n_events, int dimension);
  void write(const hawkes::Snapshot& s);

 private:
  void put_u64(std::uint64_t v);
  void put_f64(double v);
  std::ostream& out_;
  std::size_t n_;
  int d_;
};

struct BinaryLocations {
  std::size_t n_events = 0;
  int dimension = 0;
  std::vector<std::uint64_t> iterations;
  std::vector<hawkes::LocationMatrix> locations;
};
BinaryLocations read_binary_locations(std::istream& in);

struct SnapshotTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  ///< one vector per column
};
SnapshotTable read_snapshot_table(std::istream& in, const std::string& source = "<input>");

void write_summary(std::ostream& out, const std::vector<hawkes::QuantitySummary>& quantities);
void write_event_diagnostics(std::ostream& out, const hawkes::PosteriorSummary& summary,
                             const std::vector<std::string>& ids);

std::string format_double(double v);

}  // namespace app
