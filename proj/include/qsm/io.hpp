#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsm/analysis.hpp"
#include "qsm/volume.hpp"

namespace qsm {

// QSMV1 volume file:
//
//   QSMV1\n
//   dims <n1> <n2> <n3>\n
//   spacing <d1> <d2> <d3>\n
//   kind real64\n
//   data\n
//   <8 * n1 * n2 * n3 bytes, little-endian IEEE-754 doubles, x fastest>
//
// The spacings are written with 17 significant digits so they round-trip.

std::vector<std::uint8_t> encode_volume(const RealVolume& v);
/// Throws FormatError (with the byte offset) for a bad magic, header,
/// dimension mismatch against `expected`, truncated or oversized payload.
RealVolume decode_volume(std::span<const std::uint8_t> bytes,
                         const std::optional<GridSpec>& expected = std::nullopt);

void write_volume(const std::filesystem::path& path, const RealVolume& v);
RealVolume read_volume(const std::filesystem::path& path,
                       const std::optional<GridSpec>& expected = std::nullopt);

enum class Plane { Sagittal, Coronal, Axial };

Plane parse_plane(std::string_view name);
std::string to_string(Plane plane);

struct Window {
  double low;
  double high;
};

inline constexpr Window kChiWindow{-0.3, 1.0};
inline constexpr Window kPsiWindow{-0.1, 0.25};

/// 8-bit grayscale slice. Sagittal fixes axis 1 (x2) and shows x1 across and
/// x3 up; coronal fixes axis 0 and shows x2 across, x3 up; axial fixes
/// axis 2 and shows x1 across, x2 up. Row 0 is the top of the image.
struct SliceImage {
  Plane plane;
  int coordinate;
  Window window;
  int width;
  int height;
  std::vector<std::uint8_t> pixels;

  /// Binary PGM (P5).
  std::vector<std::uint8_t> pgm() const;
};

/// pixel = round-half-up(255 * clamp((value - low) / (high - low), 0, 1)).
std::uint8_t window_pixel(double value, const Window& window);

SliceImage render_slice(const RealVolume& v, Plane plane, int coordinate,
                        const Window& window);

/// Index of the slice through the grid centre (normalized coordinate 0).
int center_coordinate(const GridSpec& grid, Plane plane);

void write_bytes(const std::filesystem::path& path,
                 std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);

std::string metrics_csv(const std::vector<MetricsReport>& reports);
std::string metrics_table(const std::vector<MetricsReport>& reports);

/// FNV-1a, used for image fixtures.
std::uint64_t fnv1a(std::span<const std::uint8_t> bytes);

}  // namespace qsm
