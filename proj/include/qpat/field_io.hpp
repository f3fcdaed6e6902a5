#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qpat/field.hpp"
#include "qpat/forward.hpp"

namespace qpat {

/// Field file format (.fld): four text header lines
///   QPATFLD 1
///   n=<int>
///   radius=<float, full precision>
///   encoding=binary64
/// followed by n*n row-major little-endian IEEE doubles (iy slow, ix fast),
/// quiet NaN on exterior nodes. Writes go to a temporary file renamed into
/// place.
void write_field(const ScalarField& f, const std::string& path);
ScalarField read_field(const std::string& path);

/// 8-bit binary P5 graymap export with affine min-max scaling over the
/// finite values; NaN maps to 0. Row 0 is the top of the image (y = +R).
void write_pgm(const ScalarField& f, const std::string& path);

struct PgmImage {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint8_t> pixels;  // row-major from the top
};
PgmImage read_pgm(const std::string& path);

/// Forward-run manifest (JSON): grids, illumination specs, seed, noise
/// level, field file names.
struct ForwardManifest {
  int fine_n = 0;
  int meas_n = 0;
  double radius = 1.0;
  double noise_level = 0;
  unsigned long long seed = 0;
  std::vector<IlluminationSpec> illuminations;
  std::vector<std::string> field_files;
};

void write_manifest(const ForwardManifest& m, const std::string& path);
ForwardManifest read_manifest(const std::string& path);

/// Mask written as a field of 0/1 values (NaN exterior).
ScalarField mask_to_field(const Mask& mask, std::shared_ptr<const DiscGrid> grid);
Mask field_to_mask(const ScalarField& f);

}  // namespace qpat
