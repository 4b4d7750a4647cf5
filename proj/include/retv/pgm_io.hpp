#pragma once

#include <stdexcept>
#include <string>

#include "retv/image.hpp"

namespace retv {

// File-level failures: missing/unreadable files, malformed headers,
// truncated payloads.  The CLI maps these to exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reads a PGM (P2 ASCII / P5 binary) or RF32 image, detected from the magic
// bytes.  PGM samples come back as raw values in [0, maxval] — no
// normalization — so observation files round-trip exactly.  16-bit binary
// samples are big-endian per the Netpbm spec.
Image read_image(const std::string& path);

// Writes a binary (P5) PGM with the given maxval in [1, 65535].  Samples are
// rounded to nearest and clamped to [0, maxval]; maxval > 255 switches to
// 16-bit big-endian words.
void write_pgm(const std::string& path, const Image& img, int maxval);

// Display write: affine map of [range.lo, range.hi] onto 0..255, clamped,
// 8-bit P5.  Quantizes — use RF32 when the values matter.
void write_image(const std::string& path, const Image& img, IntensityRange range);

// RF32 raster: magic "RF32", then rows and cols as little-endian uint32,
// then rows*cols IEEE-754 single-precision values, little-endian, row-major.
// Exists because PGM cannot hold the non-integer observations (speckle) or
// real-valued estimates.
void write_rf32(const std::string& path, const Image& img);

}  // namespace retv
