#pragma once

#include <string>

#include "uwr/image.hpp"

namespace uwr {

/// Loads a PNG as 8-bit RGB (palette/gray/16-bit inputs are converted,
/// alpha is stripped) and maps bytes to [0,1] via v/255.
Image load_png(const std::string& path);

/// Writes an 8-bit RGB PNG; values are clamped to [0,1] and quantized with
/// round(v*255). Encoder settings are fixed so identical images produce
/// byte-identical files.
void save_png(const std::string& path, const Image& img);

}  // namespace uwr
