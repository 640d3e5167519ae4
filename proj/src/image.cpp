#include "crowdcount/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "crowdcount/error.hpp"

namespace crowdcount {

GrayFrame::GrayFrame(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("GrayFrame: dimensions must be positive");
  }
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayFrame::GrayFrame(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("GrayFrame: dimensions must be positive");
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("GrayFrame: pixel count does not match width x height");
  }
}

std::uint8_t GrayFrame::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return at(x, y);
}

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("BinaryMask: dimensions must be positive");
  }
  bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

GrayFrame BinaryMask::to_frame() const {
  GrayFrame out(width_, height_);
  auto dst = out.pixels();
  for (std::size_t i = 0; i < bits_.size(); ++i) dst[i] = bits_[i] ? 255 : 0;
  return out;
}

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
}

namespace {

// Reads the next whitespace-delimited PNM header token, skipping comments.
std::string next_token(std::istream& in) {
  std::string token;
  while (in) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  in >> token;
  return token;
}

}  // namespace

GrayFrame read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  if (next_token(in) != "P5") throw DataError(path.string() + ": not a binary PGM (P5)");
  int width = 0;
  int height = 0;
  int maxval = 0;
  try {
    width = std::stoi(next_token(in));
    height = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw DataError(path.string() + ": malformed PGM header");
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw DataError(path.string() + ": unsupported PGM geometry or depth");
  }
  in.get();  // single whitespace after maxval
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) {
    throw DataError(path.string() + ": truncated PGM data");
  }
  if (maxval != 255) {
    for (auto& p : pixels) p = static_cast<std::uint8_t>(std::lround(p * 255.0 / maxval));
  }
  return GrayFrame(width, height, std::move(pixels));
}

void write_pgm(const std::filesystem::path& path, const GrayFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  const auto px = frame.pixels();
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

GrayFrame read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw DataError(path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError(path.string() + ": " + image.message);
  }
  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = luminance(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
  }
  return GrayFrame(width, height, std::move(gray));
}

GrayFrame read_image(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw DataError(path.string() + ": unsupported image format");
}

std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("frame directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<GrayFrame> read_frames(const std::filesystem::path& dir) {
  const auto files = list_frames(dir);
  if (files.empty()) throw DataError("no frames in " + dir.string());
  std::vector<GrayFrame> frames;
  frames.reserve(files.size());
  for (const auto& f : files) frames.push_back(read_image(f));
  for (const auto& f : frames) {
    if (!f.same_shape(frames.front())) throw DataError("frame size mismatch in " + dir.string());
  }
  return frames;
}

std::vector<double> resample_window(const GrayFrame& frame, int x, int y, int size, int out) {
  if (size < 1 || out < 1 || x < 0 || y < 0 || x + size > frame.width() || y + size > frame.height()) {
    throw std::out_of_range("resample_window: window outside the frame");
  }
  const double step = static_cast<double>(size) / out;
  auto coord = [&](int i) {
    const double c = (i + 0.5) * step - 0.5;
    return std::clamp(c, 0.0, static_cast<double>(size - 1));
  };
  std::vector<double> result(static_cast<std::size_t>(out) * out);
  for (int j = 0; j < out; ++j) {
    const double sy = coord(j);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, size - 1);
    const double fy = sy - y0;
    for (int i = 0; i < out; ++i) {
      const double sx = coord(i);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, size - 1);
      const double fx = sx - x0;
      const double top = (1 - fx) * frame.at(x + x0, y + y0) + fx * frame.at(x + x1, y + y0);
      const double bottom = (1 - fx) * frame.at(x + x0, y + y1) + fx * frame.at(x + x1, y + y1);
      result[static_cast<std::size_t>(j) * out + i] = (1 - fy) * top + fy * bottom;
    }
  }
  return result;
}

GrayFrame crop_resized(const GrayFrame& frame, int x, int y, int size, int out) {
  const auto v = resample_window(frame, x, y, size, out);
  GrayFrame g(out, out);
  for (std::size_t i = 0; i < v.size(); ++i) {
    g.pixels()[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v[i]), 0L, 255L));
  }
  return g;
}

}  // namespace crowdcount
