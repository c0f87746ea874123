#pragma once

#include <filesystem>

#include "seamforge/image.hpp"

namespace seamforge {

struct WriteOptions {
  int jpeg_quality = 100;  // 1-100, only used for .jpg/.jpeg
};

// Reads an 8-bit PNG/BMP/JPEG file. Grayscale files stay 1-channel, color files
// become 3-channel RGB; alpha is dropped. Throws std::runtime_error on failure.
Image read_image(const std::filesystem::path& path);

// Format is chosen from the extension (.png, .bmp, .jpg, .jpeg). Samples are
// rounded and clamped to [0,255]. Creates parent directories.
void write_image(const std::filesystem::path& path, const Image& img,
                 const WriteOptions& options = {});

// Encodes to JPEG in memory at the given quality and decodes it again.
Image jpeg_roundtrip(const Image& img, int quality);

// Width/height from the file without keeping the pixels around.
struct ImageShape {
  int width = 0;
  int height = 0;
  int channels = 0;
};
ImageShape probe_image(const std::filesystem::path& path);

}  // namespace seamforge
