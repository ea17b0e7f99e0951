#include "app/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace app {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  if (delim == ' ') {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw InputError(source + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

bool getline_lf(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

TimeUnits parse_time_units(const std::string& text) {
  const auto t = lower(text);
  if (t == "model") return TimeUnits::Model;
  if (t == "hours") return TimeUnits::Hours;
  if (t == "days") return TimeUnits::Days;
  throw std::invalid_argument("unknown time units '" + text + "' (expected model, hours or days)");
}

Eigen::Vector2d project_lonlat(double lon, double lat, const Projection& origin) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double x = kEarthRadiusMetres * (lon - origin.lon0) * deg * std::cos(origin.lat0 * deg);
  const double y = kEarthRadiusMetres * (lat - origin.lat0) * deg;
  return {x, y};
}

std::optional<double> parse_iso8601(const std::string& text) {
  // YYYY-MM-DD[(T| )hh:mm[:ss[.fff]]][Z|(+|-)hh:mm]
  const std::string& s = text;
  auto digits = [&](std::size_t pos, std::size_t n) -> std::optional<int> {
    if (pos + n > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  const auto year = digits(0, 4);
  const auto month = digits(5, 2);
  const auto day = digits(8, 2);
  if (!year || !month || !day || s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{*year}, std::chrono::month{static_cast<unsigned>(*month)},
                           std::chrono::day{static_cast<unsigned>(*day)}};
  if (!ymd.ok()) return std::nullopt;
  double seconds = static_cast<double>(sys_days{ymd}.time_since_epoch().count()) * 86400.0;
  std::size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    const auto hh = digits(pos + 1, 2);
    const auto mm = digits(pos + 4, 2);
    if (!hh || !mm || s[pos + 3] != ':' || *hh > 23 || *mm > 59) return std::nullopt;
    seconds += *hh * 3600.0 + *mm * 60.0;
    pos += 6;
    if (pos < s.size() && s[pos] == ':') {
      const auto ss = digits(pos + 1, 2);
      if (!ss || *ss > 60) return std::nullopt;
      seconds += *ss;
      pos += 3;
      if (pos < s.size() && s[pos] == '.') {
        std::size_t end = pos + 1;
        while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
        if (end == pos + 1) return std::nullopt;
        seconds += std::stod("0" + s.substr(pos, end - pos));
        pos = end;
      }
    }
  }
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      pos += 1;
    } else if ((s[pos] == '+' || s[pos] == '-') && pos + 6 == s.size() && s[pos + 3] == ':') {
      const auto oh = digits(pos + 1, 2);
      const auto om = digits(pos + 4, 2);
      if (!oh || !om) return std::nullopt;
      const double offset = *oh * 3600.0 + *om * 60.0;
      seconds += s[pos] == '+' ? -offset : offset;
      pos += 6;
    } else {
      return std::nullopt;
    }
  }
  return seconds;
}

EventTable read_events(std::istream& in, const IngestOptions& options, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (getline_lf(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    header = split(line, ',');
    break;
  }
  if (header.empty()) fail(source, line_no, "missing header");
  for (auto& h : header) h = lower(h);

  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto col_id = find("id");
  const auto col_time = find("time");
  if (!col_time) fail(source, line_no, "header lacks a time column");
  std::vector<std::size_t> coord_cols;
  const auto col_lon = find("lon");
  const auto col_lat = find("lat");
  const bool lonlat = col_lon.has_value() || col_lat.has_value();
  if (lonlat) {
    if (!col_lon || !col_lat) fail(source, line_no, "lon and lat must appear together");
    if (find("x1")) fail(source, line_no, "use either lon,lat or x1..xD, not both");
    coord_cols = {*col_lon, *col_lat};
  } else {
    for (int d = 1; d <= hawkes::kMaxDimension; ++d) {
      const auto c = find("x" + std::to_string(d));
      if (!c) break;
      coord_cols.push_back(*c);
    }
    if (coord_cols.empty() && options.latent_dimension <= 0) {
      fail(source, line_no, "header lacks coordinate columns x1..xD");
    }
    if (find("x" + std::to_string(coord_cols.size() + 1)) || find("x" + std::to_string(hawkes::kMaxDimension + 1))) {
      fail(source, line_no, "coordinate columns must be x1..xD with D <= 8");
    }
  }
  const auto col_region = find("region");
  const auto col_half = find("half_width");
  const auto col_radius = find("radius");
  const auto col_area = find("area");
  const bool latent_only = coord_cols.empty();
  const int dim = latent_only ? options.latent_dimension : static_cast<int>(coord_cols.size());
  if (latent_only && dim > hawkes::kMaxDimension) fail(source, line_no, "latent dimension must be <= 8");

  struct Row {
    std::string id;
    std::string time_text;
    double time = 0.0;
    Eigen::VectorXd coords;
    std::string region;
    std::optional<double> half_width, radius, area;
    std::size_t line = 0;
  };
  std::vector<Row> rows;
  bool any_iso = false;
  bool any_numeric = false;

  auto optional_number = [&](const std::vector<std::string>& f, std::optional<std::size_t> col,
                             const char* name) -> std::optional<double> {
    if (!col || *col >= f.size() || f[*col].empty()) return std::nullopt;
    const auto v = parse_number(f[*col]);
    if (!v || !std::isfinite(*v)) fail(source, line_no, std::string("bad ") + name + " '" + f[*col] + "'");
    return v;
  };

  while (getline_lf(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) {
      fail(source, line_no, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
    }
    Row row;
    row.line = line_no;
    row.id = col_id ? f[*col_id] : std::to_string(rows.size());
    row.time_text = f[*col_time];
    if (const auto v = parse_number(row.time_text)) {
      if (!std::isfinite(*v)) fail(source, line_no, "time is not finite");
      row.time = *v;
      any_numeric = true;
    } else if (const auto iso = parse_iso8601(row.time_text)) {
      row.time = *iso;
      any_iso = true;
    } else {
      fail(source, line_no, "unparsable time '" + row.time_text + "'");
    }
    row.coords = Eigen::VectorXd::Zero(dim);
    for (int d = 0; d < static_cast<int>(coord_cols.size()); ++d) {
      const auto v = parse_number(f[coord_cols[static_cast<std::size_t>(d)]]);
      if (!v || !std::isfinite(*v)) fail(source, line_no, "bad coordinate '" + f[coord_cols[static_cast<std::size_t>(d)]] + "'");
      row.coords(d) = *v;
    }
    if (lonlat && (std::abs(row.coords(0)) > 180.0 || std::abs(row.coords(1)) > 90.0)) {
      fail(source, line_no, "longitude/latitude out of range");
    }
    row.region = col_region ? lower(f[*col_region]) : std::string{};
    row.half_width = optional_number(f, col_half, "half_width");
    row.radius = optional_number(f, col_radius, "radius");
    row.area = optional_number(f, col_area, "area");
    if (row.radius && row.area) fail(source, line_no, "radius and area are mutually exclusive");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(source, line_no, "no events");
  if (any_iso && any_numeric) fail(source, line_no, "mixed ISO-8601 and numeric times");
  if (any_iso && options.units == TimeUnits::Model) {
    fail(source, line_no, "ISO-8601 times need units=hours or units=days");
  }

  std::vector<hawkes::UncertaintyRegion> regions;
  std::vector<std::string> ids;
  std::optional<Projection> projection;
  std::vector<std::string> notices;

  if (any_iso) {
    const double t0 = std::min_element(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
                        return a.time < b.time;
                      })->time;
    const double scale = options.units == TimeUnits::Hours ? 3600.0 : 86400.0;
    for (auto& r : rows) r.time = (r.time - t0) / scale;
  }

  if (!std::is_sorted(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.time < b.time; })) {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.time < b.time; });
    notices.push_back(source + ": events were not in time order; sorted by time");
  }

  if (lonlat) {
    Projection origin;
    for (const auto& r : rows) {
      origin.lon0 += r.coords(0);
      origin.lat0 += r.coords(1);
    }
    origin.lon0 /= static_cast<double>(rows.size());
    origin.lat0 /= static_cast<double>(rows.size());
    for (auto& r : rows) {
      const Eigen::Vector2d xy = project_lonlat(r.coords(0), r.coords(1), origin);
      r.coords = xy;
    }
    projection = origin;
    notices.push_back(source + ": projected lon/lat to metres about the centroid");
  }

  hawkes::LocationMatrix x(static_cast<Eigen::Index>(rows.size()), dim);
  std::vector<double> t(rows.size());
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const auto& r = rows[n];
    line_no = r.line;
    x.row(static_cast<Eigen::Index>(n)) = r.coords.transpose();
    t[n] = r.time;
    if (r.time < 0.0) fail(source, r.line, "negative time");
    ids.push_back(r.id);

    std::string kind = r.region;
    if (kind.empty()) {
      if (r.radius || r.area) {
        kind = "disc";
      } else if (r.half_width) {
        kind = "square";
      } else {
        switch (options.default_region.kind) {
          case hawkes::RegionKind::Point: kind = "point"; break;
          case hawkes::RegionKind::Square: kind = "square"; break;
          case hawkes::RegionKind::Disc: fail(source, r.line, "disc region needs radius or area");
        }
      }
    }
    if (kind == "point") {
      regions.push_back(hawkes::UncertaintyRegion::point(r.coords));
    } else if (kind == "square") {
      const double hw = r.half_width.value_or(options.default_region.half_width);
      if (!(hw > 0.0)) fail(source, r.line, "half_width must be positive");
      regions.push_back(hawkes::UncertaintyRegion::square(r.coords, hw));
    } else if (kind == "disc") {
      if (dim != 2) fail(source, r.line, "disc regions need D = 2");
      if (r.radius) {
        if (!(*r.radius > 0.0)) fail(source, r.line, "radius must be positive");
        regions.push_back(hawkes::UncertaintyRegion::disc(r.coords, *r.radius));
      } else if (r.area) {
        if (!(*r.area > 0.0)) fail(source, r.line, "area must be positive");
        regions.push_back(hawkes::UncertaintyRegion::disc_from_area(r.coords, *r.area * hawkes::kSquareMetresPerAcre));
      } else {
        fail(source, r.line, "disc region needs radius or area");
      }
    } else {
      fail(source, r.line, "unknown region kind '" + kind + "'");
    }
  }
  try {
    return EventTable{hawkes::EventCatalog(std::move(x), std::move(t)), std::move(regions), std::move(ids),
                      projection, std::move(notices)};
  } catch (const std::invalid_argument& e) {
    throw InputError(source + ": " + e.what());
  }
}

EventTable read_events(const std::filesystem::path& path, const IngestOptions& options) {
  auto in = open_input(path);
  return read_events(in, options, path.string());
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

void write_events(std::ostream& out, const hawkes::EventCatalog& catalog,
                  const std::vector<hawkes::UncertaintyRegion>& regions, const std::vector<std::string>& ids) {
  const int dim = catalog.dimension();
  out << "id,time";
  for (int d = 1; d <= dim; ++d) out << ",x" << d;
  out << ",region,half_width,radius,area\n";
  const auto times = catalog.times();
  for (std::size_t n = 0; n < catalog.size(); ++n) {
    out << (n < ids.size() ? ids[n] : std::to_string(n)) << ',' << format_double(times[n]);
    for (int d = 0; d < dim; ++d) out << ',' << format_double(catalog.locations()(static_cast<Eigen::Index>(n), d));
    const hawkes::UncertaintyRegion* r = n < regions.size() ? &regions[n] : nullptr;
    if (r == nullptr || r->kind == hawkes::RegionKind::Point) {
      out << ",point,,,\n";
    } else if (r->kind == hawkes::RegionKind::Square) {
      out << ",square," << format_double(r->size) << ",,\n";
    } else {
      out << ",disc,," << format_double(r->size) << ",\n";
    }
  }
}

hawkes::DistanceMatrix read_distance_matrix(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  char delim = ',';
  std::vector<std::string> labels;
  while (getline_lf(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    delim = line.find(',') != std::string::npos ? ',' : (line.find('\t') != std::string::npos ? '\t' : ' ');
    labels = split(line, delim);
    break;
  }
  if (!labels.empty() && labels.front().empty()) labels.erase(labels.begin());  // corner cell
  const std::size_t n = labels.size();
  if (n < 2) fail(source, line_no, "distance matrix needs a header with at least two labels");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::size_t row = 0;
  while (getline_lf(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = split(line, delim);
    if (f.size() == n + 1) {
      if (f.front() != labels[row]) fail(source, line_no, "row label '" + f.front() + "' does not match header '" + labels[row] + "'");
      f.erase(f.begin());
    }
    if (f.size() != n) fail(source, line_no, "expected " + std::to_string(n) + " entries");
    if (row >= n) fail(source, line_no, "more rows than labels");
    for (std::size_t j = 0; j < n; ++j) {
      const auto v = parse_number(f[j]);
      if (!v || !std::isfinite(*v)) fail(source, line_no, "bad entry '" + f[j] + "'");
      values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) = *v;
    }
    ++row;
  }
  if (row != n) fail(source, line_no, "expected " + std::to_string(n) + " rows, found " + std::to_string(row));
  try {
    return hawkes::DistanceMatrix(std::move(values), std::move(labels), 1e-9);
  } catch (const std::invalid_argument& e) {
    throw InputError(source + ": " + e.what());
  }
}

hawkes::DistanceMatrix read_distance_matrix(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_distance_matrix(in, path.string());
}

void write_distance_matrix(std::ostream& out, const hawkes::DistanceMatrix& y) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) {
    out << (i == 0 ? "" : ",") << (i < y.labels().size() ? y.labels()[i] : "n" + std::to_string(i));
  }
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out << (j == 0 ? "" : ",") << format_double(y(i, j));
    out << '\n';
  }
}

SnapshotWriter::SnapshotWriter(std::ostream& out, std::vector<std::size_t> events, int dimension, bool with_sigma2)
    : out_(out), events_(std::move(events)) {
  out_ << "iteration\tmu0[events]\ttau_x[space]\ttau_t[time]\ttheta[events]\tomega[1/time]\th[space]";
  if (with_sigma2) out_ << "\tsigma2[latent^2]";
  out_ << "\tlog_likelihood[nats]";
  for (auto n : events_) {
    for (int d = 1; d <= dimension; ++d) out_ << "\tx" << n << '_' << d << "[space]";
  }
  out_ << '\n';
}

void SnapshotWriter::write(const hawkes::Snapshot& s) {
  out_ << s.iteration;
  for (std::size_t k = 0; k < hawkes::HawkesParams::kCount; ++k) out_ << '\t' << format_double(s.params.get(k));
  if (s.sigma2) out_ << '\t' << format_double(*s.sigma2);
  out_ << '\t' << format_double(s.log_likelihood);
  for (auto n : events_) {
    for (Eigen::Index d = 0; d < s.locations.cols(); ++d) {
      out_ << '\t' << format_double(s.locations(static_cast<Eigen::Index>(n), d));
    }
  }
  out_ << '\n';
}

BinaryLocationWriter::BinaryLocationWriter(std::ostream& out, std::size_t n_events, int dimension)
    : out_(out), n_(n_events), d_(dimension) {
  out_.write("HKLOC001", 8);
  put_u64(n_);
  put_u64(static_cast<std::uint64_t>(d_));
}

void BinaryLocationWriter::put_u64(std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out_.write(reinterpret_cast<const char*>(b), 8);
}

void BinaryLocationWriter::put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryLocationWriter::write(const hawkes::Snapshot& s) {
  put_u64(s.iteration);
  for (std::size_t n = 0; n < n_; ++n) {
    for (int d = 0; d < d_; ++d) put_f64(s.locations(static_cast<Eigen::Index>(n), d));
  }
}

BinaryLocations read_binary_locations(std::istream& in) {
  auto get_u64 = [&](std::uint64_t& v) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return true;
  };
  char magic[8];
  if (!in.read(magic, 8) || std::string(magic, 8) != "HKLOC001") throw InputError("not a location dump");
  BinaryLocations out;
  std::uint64_t n = 0, d = 0;
  if (!get_u64(n) || !get_u64(d)) throw InputError("truncated location dump header");
  out.n_events = n;
  out.dimension = static_cast<int>(d);
  std::uint64_t it = 0;
  while (get_u64(it)) {
    hawkes::LocationMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::uint64_t k = 0; k < n * d; ++k) {
      std::uint64_t bits = 0;
      if (!get_u64(bits)) throw InputError("truncated location record");
      x.data()[k] = std::bit_cast<double>(bits);
    }
    out.iterations.push_back(it);
    out.locations.push_back(std::move(x));
  }
  return out;
}

SnapshotTable read_snapshot_table(std::istream& in, const std::string& source) {
  SnapshotTable t;
  std::string line;
  std::size_t line_no = 0;
  if (!getline_lf(in, line)) fail(source, 1, "empty snapshot file");
  ++line_no;
  t.columns = split(line, '\t');
  t.values.resize(t.columns.size());
  while (getline_lf(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != t.columns.size()) fail(source, line_no, "wrong field count");
    for (std::size_t c = 0; c < f.size(); ++c) {
      const auto v = parse_number(f[c]);
      if (!v) fail(source, line_no, "bad value '" + f[c] + "'");
      t.values[c].push_back(*v);
    }
  }
  return t;
}

void write_summary(std::ostream& out, const std::vector<hawkes::QuantitySummary>& quantities) {
  out << "quantity\tunit\tmean\tmedian\tq025\tq975\tess[draws]\tess_flag\n";
  for (const auto& q : quantities) {
    const char* flag = q.ess_flag == hawkes::EssFlag::Ok ? "ok"
                       : q.ess_flag == hawkes::EssFlag::Antithetic ? "antithetic"
                                                                   : "constant";
    out << q.name << '\t' << q.unit << '\t' << format_double(q.mean) << '\t' << format_double(q.median) << '\t'
        << format_double(q.q025) << '\t' << format_double(q.q975) << '\t' << format_double(q.ess) << '\t' << flag
        << '\n';
  }
}

void write_event_diagnostics(std::ostream& out, const hawkes::PosteriorSummary& summary,
                             const std::vector<std::string>& ids) {
  out << "id\tdisplacement[space]\tself_excitation_probability[fraction]\n";
  for (std::size_t n = 0; n < summary.displacement.size(); ++n) {
    out << (n < ids.size() ? ids[n] : std::to_string(n)) << '\t' << format_double(summary.displacement[n]) << '\t'
        << format_double(summary.self_excitation_probability[n]) << '\n';
  }
}

}  // namespace app
