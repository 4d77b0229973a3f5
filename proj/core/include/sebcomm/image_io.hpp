#ifndef SEBCOMM_IMAGE_IO_HPP_
#define SEBCOMM_IMAGE_IO_HPP_

#include <string>
#include <vector>

#include "sebcomm/image.hpp"

namespace sebcomm {

enum class NonRgbPolicy { kConvert, kReject };

struct LoadOptions {
  NonRgbPolicy non_rgb = NonRgbPolicy::kConvert;
};

// Reads one PNG (any libpng-supported layout) or binary PPM/PGM file.
// Pixel values are scaled to [0,1]. Grayscale/paletted/alpha inputs are
// converted to RGB unless the policy says reject.
Image load_image(const std::string& path, const LoadOptions& opts = {});

// Loads every path in order. Any failure aborts the whole load; no partial
// set is returned.
ImageSet load_images(const std::vector<std::string>& paths, const LoadOptions& opts = {});

// Writes an 8-bit RGB PNG; values are clamped to [0,1] before quantization.
void save_png(const std::string& path, const Image& image);

// Raw 8-bit RGB buffer writer (used by the plot emitter).
void save_png_rgb8(const std::string& path, const std::vector<unsigned char>& rgb, int h, int w);

}  // namespace sebcomm

#endif  // SEBCOMM_IMAGE_IO_HPP_
