#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fuselage/eval.hpp"
#include "fuselage/fusion_nms.hpp"
#include "fuselage/projection.hpp"
#include "fuselage/raster.hpp"

namespace fuselage::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- KITTI labels

struct LabelIssue {
  std::size_t line = 0;
  std::string message;
};

struct LabelFile {
  GroundTruthFrame frame;
  std::vector<LabelIssue> errors;  // malformed lines, skipped
  std::size_t degenerate = 0;      // zero-area boxes, skipped
};

// Car/Van/Truck/Tram -> car, Pedestrian/Person_sitting -> pedestrian,
// Cyclist -> cyclist; DontCare and Misc yield nullopt. Other names throw
// ConfigError.
std::optional<int> kitti_class(std::string_view type);
std::string_view kitti_type_name(int class_id);

LabelFile parse_kitti_labels(std::istream& in, std::string frame_id);
LabelFile read_kitti_labels(const fs::path& path);
void write_kitti_labels(const fs::path& path, const GroundTruthFrame& frame);

// Every *.txt in `dir`, sorted by frame id. Parse problems are collected,
// not thrown; missing directories throw ParseError.
std::vector<LabelFile> read_label_dir(const fs::path& dir);

// ---------------------------------------------------------------- velodyne

// Little-endian float32 quadruples (x, y, z, intensity).
PointCloud read_velodyne(const fs::path& path);
PointCloud parse_velodyne(std::span<const std::byte> bytes, const std::string& source);
void write_velodyne(const fs::path& path, const PointCloud& cloud);

// ---------------------------------------------------------------- calibration

// KITTI object calib: P2 (3x4), R0_rect (3x3), Tr_velo_to_cam (3x4).
CalibMatrices parse_calib(std::istream& in, const std::string& source = "<stream>");
CalibMatrices read_calib(const fs::path& path);
// Writes P2 = [K | 0], R0_rect = I, Tr_velo_to_cam = [R | T].
void write_calib(const fs::path& path, const CalibMatrices& calib);

// ---------------------------------------------------------------- rasters

struct RasterFile {
  Raster raster;
  int maxval = 255;
};

// Binary PGM (P5) and PPM (P6), 8- or 16-bit (big-endian) samples.
RasterFile parse_pnm(std::span<const std::byte> bytes, const std::string& source);
RasterFile read_pnm(const fs::path& path);
std::vector<std::byte> encode_pnm(const Raster& img, int maxval);
void write_pnm(const fs::path& path, const Raster& img, int maxval);

// Depth rasters: 16-bit PGM, value = round(65535 * normalized).
inline constexpr int kDepthMaxval = 65535;

// ---------------------------------------------------------------- detections

struct DetectionRecord {
  std::string frame_id;
  GaussianBox box;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

// One record per line:
//   frame_id modality class_id score mu_x mu_y mu_w mu_h var_x var_y var_w var_h
// Reals are printed with 17 significant digits; '#' starts a comment line.
std::string format_detection(const DetectionRecord& r);
std::vector<DetectionRecord> parse_detections(std::istream& in,
                                              const std::string& source = "<stream>");
std::vector<DetectionRecord> read_detections(const fs::path& path);
void write_detections(std::ostream& out, std::span<const DetectionRecord> records);
void write_detections(const fs::path& path, std::span<const DetectionRecord> records);

std::map<std::string, DetectionSet> group_by_frame(std::span<const DetectionRecord> records);
std::vector<DetectionRecord> to_records(const std::string& frame_id, const DetectionSet& set);

// ---------------------------------------------------------------- helpers

std::vector<std::byte> read_bytes(const fs::path& path);
void write_bytes(const fs::path& path, std::span<const std::byte> bytes);

// Regular files in `dir` with the given extension, sorted by name.
std::vector<fs::path> list_files(const fs::path& dir, std::string_view extension);

// 17 significant digits ("%.17g"); round-trips every finite double.
std::string format_real(double v);

}  // namespace fuselage::io
