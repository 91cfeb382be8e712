#include "qsm/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "qsm/error.hpp"

namespace qsm {

namespace {

constexpr std::string_view kMagic = "QSMV1";

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Reads one '\n'-terminated header line starting at `pos`.
std::string_view header_line(std::span<const std::uint8_t> bytes,
                             std::size_t& pos) {
  const std::size_t start = pos;
  while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
  if (pos >= bytes.size()) throw FormatError("unterminated header line", start);
  std::string_view line(reinterpret_cast<const char*>(bytes.data()) + start,
                        pos - start);
  ++pos;
  return line;
}

template <std::size_t N>
std::array<std::string, N> fields(std::string_view line, std::string_view key,
                                  std::size_t offset) {
  std::istringstream is{std::string(line)};
  std::string k;
  is >> k;
  if (k != key) {
    throw FormatError("expected header key '" + std::string(key) + "'", offset);
  }
  std::array<std::string, N> out;
  for (auto& f : out) {
    if (!(is >> f)) {
      throw FormatError("header line '" + std::string(key) + "' too short",
                        offset);
    }
  }
  std::string extra;
  if (is >> extra) {
    throw FormatError("header line '" + std::string(key) + "' too long", offset);
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_volume(const RealVolume& v) {
  const GridSpec& g = v.grid();
  std::ostringstream header;
  header << kMagic << "\n"
         << "dims " << g.n(0) << " " << g.n(1) << " " << g.n(2) << "\n"
         << "spacing " << format_double(g.spacing(0)) << " "
         << format_double(g.spacing(1)) << " " << format_double(g.spacing(2))
         << "\n"
         << "kind real64\n"
         << "data\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  out.reserve(h.size() + 8 * v.size());
  for (double d : v.data()) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(d));
    for (int i = 0; i < 8; ++i) {
      out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xffu));
    }
  }
  return out;
}

RealVolume decode_volume(std::span<const std::uint8_t> bytes,
                         const std::optional<GridSpec>& expected) {
  std::size_t pos = 0;
  if (bytes.size() < kMagic.size() + 1 ||
      std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0 ||
      bytes[kMagic.size()] != '\n') {
    throw FormatError("bad magic, not a QSMV1 volume", 0);
  }
  pos = kMagic.size() + 1;

  std::size_t at = pos;
  const auto dims = fields<3>(header_line(bytes, pos), "dims", at);
  at = pos;
  const auto spacing = fields<3>(header_line(bytes, pos), "spacing", at);
  at = pos;
  const auto kind = fields<1>(header_line(bytes, pos), "kind", at);
  if (kind[0] != "real64") {
    throw FormatError("unsupported value kind '" + kind[0] + "'", at);
  }
  at = pos;
  if (header_line(bytes, pos) != "data") {
    throw FormatError("expected 'data' line", at);
  }

  std::array<int, 3> n{};
  Vec3 d{};
  try {
    for (int a = 0; a < 3; ++a) {
      std::size_t used = 0;
      n[a] = std::stoi(dims[a], &used);
      if (used != dims[a].size()) throw std::invalid_argument("dims");
      d[a] = std::stod(spacing[a], &used);
      if (used != spacing[a].size()) throw std::invalid_argument("spacing");
    }
  } catch (const std::exception&) {
    throw FormatError("unparsable dims or spacing", kMagic.size() + 1);
  }
  std::optional<GridSpec> grid;
  try {
    grid.emplace(n[0], n[1], n[2], d[0], d[1], d[2]);
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("invalid grid in header: ") + e.what(),
                      kMagic.size() + 1);
  }
  if (expected && !(*expected == *grid)) {
    throw FormatError("dimension mismatch: file has " + grid->describe() +
                          ", expected " + expected->describe(),
                      kMagic.size() + 1);
  }

  const std::size_t need = 8 * grid->size();
  const std::size_t have = bytes.size() - pos;
  if (have < need) {
    throw FormatError("truncated payload: " + std::to_string(have) + " of " +
                          std::to_string(need) + " bytes",
                      bytes.size());
  }
  if (have > need) {
    throw FormatError("trailing bytes after payload", pos + need);
  }
  std::vector<double> data(grid->size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(bytes[pos + 8 * i + b]) << (8 * b);
    }
    data[i] = std::bit_cast<double>(to_little(bits));
  }
  try {
    return RealVolume(*grid, std::move(data));
  } catch (const NumericError& e) {
    throw FormatError(e.what(), pos);
  }
}

void write_bytes(const std::filesystem::path& path,
                 std::span<const std::uint8_t> bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  write_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()),
                     text.size()});
}

void write_volume(const std::filesystem::path& path, const RealVolume& v) {
  write_bytes(path, encode_volume(v));
}

RealVolume read_volume(const std::filesystem::path& path,
                       const std::optional<GridSpec>& expected) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_volume(bytes, expected);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.detail(), e.offset());
  }
}

Plane parse_plane(std::string_view name) {
  if (name == "sagittal") return Plane::Sagittal;
  if (name == "coronal") return Plane::Coronal;
  if (name == "axial") return Plane::Axial;
  throw ConfigError("unknown plane '" + std::string(name) + "'");
}

std::string to_string(Plane plane) {
  switch (plane) {
    case Plane::Sagittal: return "sagittal";
    case Plane::Coronal: return "coronal";
    case Plane::Axial: return "axial";
  }
  return "unknown";
}

std::uint8_t window_pixel(double value, const Window& w) {
  double t = (value - w.low) / (w.high - w.low);
  t = std::clamp(t, 0.0, 1.0);
  // Half a part in 1e12 absorbs decimal-window representation error so that
  // exact midpoints round up.
  return static_cast<std::uint8_t>(std::floor(t * 255.0 + 0.5 + 1e-12));
}

int center_coordinate(const GridSpec& grid, Plane plane) {
  switch (plane) {
    case Plane::Sagittal: return grid.n(1) / 2;
    case Plane::Coronal: return grid.n(0) / 2;
    case Plane::Axial: return grid.n(2) / 2;
  }
  return 0;
}

SliceImage render_slice(const RealVolume& v, Plane plane, int coordinate,
                        const Window& window) {
  if (!(window.low < window.high)) {
    throw ArgumentError("window low must be below high");
  }
  const GridSpec& g = v.grid();
  int fixed = 1, across = 0, up = 2;
  if (plane == Plane::Coronal) fixed = 0, across = 1, up = 2;
  if (plane == Plane::Axial) fixed = 2, across = 0, up = 1;
  if (coordinate < 0 || coordinate >= g.n(fixed)) {
    throw ArgumentError(to_string(plane) + " slice coordinate " +
                        std::to_string(coordinate) + " out of range [0, " +
                        std::to_string(g.n(fixed)) + ")");
  }
  SliceImage img{plane, coordinate, window, g.n(across), g.n(up), {}};
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int row = 0; row < img.height; ++row) {
    for (int col = 0; col < img.width; ++col) {
      std::array<int, 3> idx{};
      idx[fixed] = coordinate;
      idx[across] = col;
      idx[up] = img.height - 1 - row;
      img.pixels[static_cast<std::size_t>(row) * img.width + col] =
          window_pixel(v.at({idx[0], idx[1], idx[2]}), window);
    }
  }
  return img;
}

std::vector<std::uint8_t> SliceImage::pgm() const {
  const std::string header = "P5\n" + std::to_string(width) + " " +
                             std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

std::string metrics_csv(const std::vector<MetricsReport>& reports) {
  std::ostringstream os;
  os << "method,hbar,s,m,K,M,eps_c,naive_floor,rmse_inside,streak_energy,"
        "cone_fraction,shell_fraction,mean_unrecoverable\n";
  for (const auto& r : reports) {
    os << r.method << "," << format_double(r.params.hbar) << ","
       << format_double(r.params.s) << "," << r.params.m << ","
       << format_double(r.params.K) << "," << format_double(r.params.bigM)
       << "," << format_double(r.params.eps_c) << ","
       << format_double(r.naive_floor) << "," << format_double(r.rmse_inside)
       << "," << format_double(r.streak_energy) << ","
       << format_double(r.cone_fraction) << ","
       << format_double(r.shell_fraction) << ","
       << (r.mean_unrecoverable ? 1 : 0) << "\n";
  }
  return os.str();
}

std::string metrics_table(const std::vector<MetricsReport>& reports) {
  std::ostringstream os;
  os << std::left << std::setw(18) << "method" << std::right << std::setw(14)
     << "rmse_inside" << std::setw(16) << "streak_energy" << std::setw(14)
     << "cone_frac" << std::setw(14) << "shell_frac" << "\n";
  os << std::string(76, '-') << "\n";
  for (const auto& r : reports) {
    os << std::left << std::setw(18) << r.method << std::right
       << std::setprecision(6) << std::setw(14) << r.rmse_inside
       << std::setw(16) << r.streak_energy << std::setw(14) << r.cone_fraction
       << std::setw(14) << r.shell_fraction << "\n";
  }
  os << "note: the mean of chi is not recoverable (D(0) = 0); rmse_inside "
        "matches means inside the support.\n";
  return os.str();
}

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace qsm
