#include "fuselage/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fuselage/error.hpp"

namespace fuselage::io {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::optional<double> to_real(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> to_int(std::string_view s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool blank_or_comment(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  return out;
}

}  // namespace

std::string format_real(double v) {
  std::array<char, 40> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

std::vector<std::byte> read_bytes(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

void write_bytes(const fs::path& path, std::span<const std::byte> bytes) {
  auto out = open_out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(path.string() + ": write failed");
}

std::vector<fs::path> list_files(const fs::path& dir, std::string_view extension) {
  if (!fs::is_directory(dir)) throw ParseError(dir.string(), 0, "not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == extension) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- KITTI labels

std::optional<int> kitti_class(std::string_view type) {
  if (type == "Car" || type == "Van" || type == "Truck" || type == "Tram") return kCar;
  if (type == "Pedestrian" || type == "Person_sitting") return kPedestrian;
  if (type == "Cyclist") return kCyclist;
  if (type == "DontCare" || type == "Misc") return std::nullopt;
  throw ConfigError("unknown KITTI object type '" + std::string(type) + "'");
}

std::string_view kitti_type_name(int class_id) {
  switch (class_id) {
    case kCar:
      return "Car";
    case kPedestrian:
      return "Pedestrian";
    case kCyclist:
      return "Cyclist";
    default:
      return "DontCare";
  }
}

LabelFile parse_kitti_labels(std::istream& in, std::string frame_id) {
  LabelFile out;
  out.frame.frame_id = std::move(frame_id);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    const auto f = split_ws(line);
    if (f.size() < 8) {
      out.errors.push_back({lineno, "expected at least 8 fields, got " + std::to_string(f.size())});
      continue;
    }
    std::optional<int> cls;
    try {
      cls = kitti_class(f[0]);
    } catch (const ConfigError& e) {
      out.errors.push_back({lineno, e.what()});
      continue;
    }
    std::array<double, 4> bbox{};
    bool ok = true;
    for (std::size_t k = 0; k < 4 && ok; ++k) {
      const auto v = to_real(f[4 + k]);
      ok = v.has_value() && std::isfinite(*v);
      if (ok) bbox[k] = *v;
    }
    if (!ok) {
      out.errors.push_back({lineno, "bbox fields are not finite numbers"});
      continue;
    }
    if (!cls) continue;
    const CornerBox box{bbox[0], bbox[1], bbox[2], bbox[3]};
    if (!is_valid(box)) {
      ++out.degenerate;
      continue;
    }
    out.frame.objects.push_back({*cls, box});
  }
  return out;
}

LabelFile read_kitti_labels(const fs::path& path) {
  auto in = open_in(path);
  return parse_kitti_labels(in, path.stem().string());
}

void write_kitti_labels(const fs::path& path, const GroundTruthFrame& frame) {
  auto out = open_out(path);
  // Shortest representation that parses back to the same double.
  const auto short_real = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  for (const auto& o : frame.objects) {
    // type truncated occluded alpha bbox(4) dimensions(3) location(3) rotation_y
    out << kitti_type_name(o.class_id) << " 0.00 0 -10 " << short_real(o.box.x_min) << ' '
        << short_real(o.box.y_min) << ' ' << short_real(o.box.x_max) << ' '
        << short_real(o.box.y_max) << " -1 -1 -1 -1000 -1000 -1000 -10\n";
  }
  if (!out) throw FormatError(path.string() + ": write failed");
}

std::vector<LabelFile> read_label_dir(const fs::path& dir) {
  std::vector<LabelFile> out;
  for (const auto& p : list_files(dir, ".txt")) out.push_back(read_kitti_labels(p));
  return out;
}

// ---------------------------------------------------------------- velodyne

PointCloud parse_velodyne(std::span<const std::byte> bytes, const std::string& source) {
  constexpr std::size_t kRecord = 16;
  if (bytes.size() % kRecord != 0) {
    throw TruncationError(source + ": length " + std::to_string(bytes.size()) +
                          " is not a multiple of 16 bytes");
  }
  PointCloud cloud;
  cloud.points.reserve(bytes.size() / kRecord);
  for (std::size_t off = 0; off < bytes.size(); off += kRecord) {
    std::array<float, 4> f{};
    for (std::size_t k = 0; k < 4; ++k) {
      std::uint32_t w = 0;
      for (std::size_t b = 0; b < 4; ++b) {
        w |= static_cast<std::uint32_t>(bytes[off + 4 * k + b]) << (8 * b);
      }
      f[k] = std::bit_cast<float>(w);
    }
    cloud.points.push_back({f[0], f[1], f[2], f[3]});
  }
  return cloud;
}

PointCloud read_velodyne(const fs::path& path) {
  return parse_velodyne(read_bytes(path), path.string());
}

void write_velodyne(const fs::path& path, const PointCloud& cloud) {
  std::vector<std::byte> bytes;
  bytes.reserve(cloud.points.size() * 16);
  for (const auto& p : cloud.points) {
    for (double v : {p.x, p.y, p.z, p.intensity}) {
      const auto w = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::byte>((w >> (8 * b)) & 0xFFu));
    }
  }
  write_bytes(path, bytes);
}

// ---------------------------------------------------------------- calibration

CalibMatrices parse_calib(std::istream& in, const std::string& source) {
  std::map<std::string, std::vector<double>, std::less<>> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError(source, lineno, "expected 'key: values'");
    std::string key = line.substr(0, colon);
    std::vector<double> nums;
    for (auto tok : split_ws(std::string_view(line).substr(colon + 1))) {
      const auto v = to_real(tok);
      if (!v || !std::isfinite(*v)) {
        throw ParseError(source, lineno, "non-numeric value '" + std::string(tok) + "'");
      }
      nums.push_back(*v);
    }
    values[key] = std::move(nums);
  }

  auto need = [&](std::string_view key, std::size_t count) -> const std::vector<double>& {
    auto it = values.find(key);
    if (it == values.end()) throw ParseError(source, 0, "missing calibration key " + std::string(key));
    if (it->second.size() != count) {
      throw ParseError(source, 0, std::string(key) + " needs " + std::to_string(count) + " values");
    }
    return it->second;
  };
  const auto& p2 = need("P2", 12);
  const auto& r0 = need("R0_rect", 9);
  const auto& tr = need("Tr_velo_to_cam", 12);

  CalibMatrices c;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) c.K[i][j] = p2[i * 4 + j];
  }
  // P2 = K [I | b]; recover b = K^-1 p4 by back substitution.
  const Vec3 p4 = {p2[3], p2[7], p2[11]};
  if (c.K[2][2] == 0.0 || c.K[1][1] == 0.0 || c.K[0][0] == 0.0) {
    throw CalibrationError(source + ": P2 has a zero focal term");
  }
  Vec3 b{};
  b[2] = p4[2] / c.K[2][2];
  b[1] = (p4[1] - c.K[1][2] * b[2]) / c.K[1][1];
  b[0] = (p4[0] - c.K[0][1] * b[1] - c.K[0][2] * b[2]) / c.K[0][0];

  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += r0[i * 3 + k] * tr[k * 4 + j];
      c.R[i][j] = s;
    }
    double t = 0.0;
    for (std::size_t k = 0; k < 3; ++k) t += r0[i * 3 + k] * tr[k * 4 + 3];
    c.T[i] = t + b[i];
  }
  try {
    validate(c);
  } catch (const CalibrationError& e) {
    throw CalibrationError(source + ": " + e.what());
  }
  return c;
}

CalibMatrices read_calib(const fs::path& path) {
  auto in = open_in(path);
  return parse_calib(in, path.string());
}

void write_calib(const fs::path& path, const CalibMatrices& calib) {
  auto out = open_out(path);
  out << "P2:";
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) out << ' ' << format_real(calib.K[i][j]);
    out << " 0";
  }
  out << "\nR0_rect: 1 0 0 0 1 0 0 0 1\nTr_velo_to_cam:";
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) out << ' ' << format_real(calib.R[i][j]);
    out << ' ' << format_real(calib.T[i]);
  }
  out << '\n';
  if (!out) throw FormatError(path.string() + ": write failed");
}

// ---------------------------------------------------------------- rasters

RasterFile parse_pnm(std::span<const std::byte> bytes, const std::string& source) {
  std::size_t pos = 0;
  auto peek = [&]() -> int {
    return pos < bytes.size() ? static_cast<int>(bytes[pos]) : -1;
  };
  auto skip_ws_and_comments = [&] {
    for (;;) {
      const int c = peek();
      if (c == '#') {
        while (peek() != -1 && peek() != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
        ++pos;
      } else {
        return;
      }
    }
  };
  auto read_uint = [&](const char* what) -> long long {
    skip_ws_and_comments();
    long long v = 0;
    std::size_t digits = 0;
    while (peek() >= '0' && peek() <= '9' && digits < 9) {
      v = v * 10 + (peek() - '0');
      ++pos;
      ++digits;
    }
    if (digits == 0) throw FormatError(source + ": malformed header (" + what + ")");
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != std::byte{'P'}) {
    throw FormatError(source + ": malformed magic number");
  }
  int channels = 0;
  if (bytes[1] == std::byte{'5'}) {
    channels = 1;
  } else if (bytes[1] == std::byte{'6'}) {
    channels = 3;
  } else {
    throw FormatError(source + ": malformed magic number (only P5 and P6 are supported)");
  }
  pos = 2;
  const long long w = read_uint("width");
  const long long h = read_uint("height");
  const long long maxval = read_uint("maxval");
  if (w <= 0 || h <= 0) throw FormatError(source + ": image size must be positive");
  if (maxval <= 0 || maxval > 65535) throw FormatError(source + ": maxval must be in [1, 65535]");
  const int c = peek();
  if (!(c == ' ' || c == '\t' || c == '\n' || c == '\r')) {
    throw FormatError(source + ": missing whitespace after header");
  }
  ++pos;

  const std::size_t bps = maxval > 255 ? 2 : 1;
  const std::size_t samples = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * channels;
  if (bytes.size() - pos < samples * bps) {
    throw TruncationError(source + ": expected " + std::to_string(samples * bps) +
                          " bytes of pixel data, found " + std::to_string(bytes.size() - pos));
  }
  RasterFile out;
  out.maxval = static_cast<int>(maxval);
  out.raster = Raster(static_cast<int>(w), static_cast<int>(h), channels);
  for (std::size_t i = 0; i < samples; ++i) {
    unsigned v = static_cast<unsigned>(bytes[pos]);
    if (bps == 2) v = (v << 8) | static_cast<unsigned>(bytes[pos + 1]);
    pos += bps;
    if (v > static_cast<unsigned>(maxval)) {
      throw RangeError(source + ": sample " + std::to_string(i) + " exceeds maxval");
    }
    out.raster.data[i] = static_cast<float>(static_cast<double>(v) / static_cast<double>(maxval));
  }
  return out;
}

RasterFile read_pnm(const fs::path& path) { return parse_pnm(read_bytes(path), path.string()); }

std::vector<std::byte> encode_pnm(const Raster& img, int maxval) {
  if (img.channels != 1 && img.channels != 3) {
    throw FormatError("encode_pnm: unsupported channel count " + std::to_string(img.channels));
  }
  if (maxval <= 0 || maxval > 65535) throw FormatError("encode_pnm: maxval must be in [1, 65535]");
  if (img.width <= 0 || img.height <= 0 ||
      img.data.size() != img.pixel_count() * static_cast<std::size_t>(img.channels)) {
    throw FormatError("encode_pnm: raster buffer does not match its dimensions");
  }
  const std::string header = (img.channels == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) +
                             " " + std::to_string(img.height) + "\n" + std::to_string(maxval) +
                             "\n";
  const std::size_t bps = maxval > 255 ? 2 : 1;
  std::vector<std::byte> out;
  out.reserve(header.size() + img.data.size() * bps);
  for (char ch : header) out.push_back(static_cast<std::byte>(ch));
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double v = img.data[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw RangeError("encode_pnm: sample " + std::to_string(i) + " outside [0, 1]");
    }
    const auto q = static_cast<unsigned>(std::lround(v * maxval));
    if (bps == 2) out.push_back(static_cast<std::byte>(q >> 8));
    out.push_back(static_cast<std::byte>(q & 0xFFu));
  }
  return out;
}

void write_pnm(const fs::path& path, const Raster& img, int maxval) {
  write_bytes(path, encode_pnm(img, maxval));
}

// ---------------------------------------------------------------- detections

std::string format_detection(const DetectionRecord& r) {
  std::string s = r.frame_id;
  s += ' ';
  s += modality_name(r.box.modality);
  s += ' ';
  s += std::to_string(r.box.class_id);
  s += ' ';
  s += format_real(r.box.score);
  for (double v : r.box.mu) (s += ' ') += format_real(v);
  for (double v : r.box.var) (s += ' ') += format_real(v);
  return s;
}

std::vector<DetectionRecord> parse_detections(std::istream& in, const std::string& source) {
  std::vector<DetectionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    const auto f = split_ws(line);
    if (f.size() != 12) {
      throw ParseError(source, lineno, "expected 12 fields, got " + std::to_string(f.size()));
    }
    DetectionRecord r;
    r.frame_id = std::string(f[0]);
    if (f[1] == "rgb") {
      r.box.modality = Modality::kRgb;
    } else if (f[1] == "depth") {
      r.box.modality = Modality::kDepth;
    } else {
      throw ParseError(source, lineno, "unknown modality '" + std::string(f[1]) + "'");
    }
    const auto cls = to_int(f[2]);
    if (!cls || *cls < 0 || *cls > 1'000'000) {
      throw ParseError(source, lineno, "bad class id '" + std::string(f[2]) + "'");
    }
    r.box.class_id = static_cast<int>(*cls);
    std::array<double, 9> nums{};
    for (std::size_t k = 0; k < 9; ++k) {
      const auto v = to_real(f[3 + k]);
      if (!v) throw ParseError(source, lineno, "bad number '" + std::string(f[3 + k]) + "'");
      nums[k] = *v;
    }
    r.box.score = nums[0];
    for (std::size_t c = 0; c < 4; ++c) {
      r.box.mu[c] = nums[1 + c];
      r.box.var[c] = nums[5 + c];
    }
    if (!is_valid(r.box)) {
      throw ParseError(source, lineno,
                       "invalid detection (need positive size, positive variances, score in [0,1])");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<DetectionRecord> read_detections(const fs::path& path) {
  auto in = open_in(path);
  return parse_detections(in, path.string());
}

void write_detections(std::ostream& out, std::span<const DetectionRecord> records) {
  out << "# frame_id modality class_id score mu_x mu_y mu_w mu_h var_x var_y var_w var_h\n";
  for (const auto& r : records) out << format_detection(r) << '\n';
}

void write_detections(const fs::path& path, std::span<const DetectionRecord> records) {
  auto out = open_out(path);
  write_detections(out, records);
  if (!out) throw FormatError(path.string() + ": write failed");
}

std::map<std::string, DetectionSet> group_by_frame(std::span<const DetectionRecord> records) {
  std::map<std::string, DetectionSet> out;
  for (const auto& r : records) out[r.frame_id].push_back(r.box);
  return out;
}

std::vector<DetectionRecord> to_records(const std::string& frame_id, const DetectionSet& set) {
  std::vector<DetectionRecord> out;
  out.reserve(set.size());
  for (const auto& b : set) out.push_back({frame_id, b});
  return out;
}

}  // namespace fuselage::io
