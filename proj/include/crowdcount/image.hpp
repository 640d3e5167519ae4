#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace crowdcount {

// Single-channel 8-bit luminance raster, row-major.
class GrayFrame {
 public:
  GrayFrame() = default;
  GrayFrame(int width, int height, std::uint8_t fill = 0);
  GrayFrame(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }
  std::size_t size() const { return pixels_.size(); }

  std::uint8_t at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  // Edge-replicated access; coordinates are clamped into the frame.
  std::uint8_t clamped(int x, int y) const;

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  bool same_shape(const GrayFrame& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const GrayFrame&, const GrayFrame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// One boolean per pixel. Outside the raster every query reads as clear.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }

  bool get(int x, int y) const {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool value = true) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0;
  }

  std::size_t count() const;
  bool same_shape(const BinaryMask& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  // 0/255 rendering, used both for debug output and as blur input.
  GrayFrame to_frame() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Bilinear resampling of the square window (x, y, size) onto an out x out
// grid of pixel-centre samples, row-major. Reads are clamped to the window.
// Throws std::out_of_range when the window leaves the frame.
std::vector<double> resample_window(const GrayFrame& frame, int x, int y, int size, int out);

// Same, rounded back to 8 bits.
GrayFrame crop_resized(const GrayFrame& frame, int x, int y, int size, int out);

// ITU-R 601 luma, the conversion applied to every colour input.
std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b);

GrayFrame read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayFrame& frame);
GrayFrame read_png(const std::filesystem::path& path);

// Dispatches on extension (.pgm / .png).
GrayFrame read_image(const std::filesystem::path& path);

// Sorted list of .pgm/.png files in a directory (lexicographic, which matches
// numeric order for zero-padded names).
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);
std::vector<GrayFrame> read_frames(const std::filesystem::path& dir);

}  // namespace crowdcount
