#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seaice/discretization.hpp"

namespace seaice {

/// Row-major image; pixel (i, j) covers [i, i+1) x [j, j+1) pixels from the origin.
struct Image {
  int width = 0;
  int height = 0;
  double pixel_m = 2000.0;
  std::vector<double> data;

  double& at(int i, int j) { return data[static_cast<std::size_t>(j) * width + i]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(j) * width + i]; }
};

enum class RegridMode {
  Nearest,      // element containing the pixel centre
  AreaAverage,  // mean over a 4x4 sub-sample of the pixel
};

/// Element containing a point (ties resolved deterministically).
int locate_element(const Discretization& op, Point p);

/// Sample a per-element field on a regular grid of pixel_m pixels covering the domain.
Image regrid(const Discretization& op, std::span<const double> elem_field, double pixel_m = 2000.0,
             RegridMode mode = RegridMode::AreaAverage);

struct DetectorParams {
  double log_floor = 1e-12;       // 1/s
  double sigma_small = 1.0;       // px
  double sigma_large = 5.0;       // px
  double threshold_quantile = 0.85;
  int min_length_px = 10;
  int min_width_px = 2;

  void validate() const;
};

struct PixelCoord {
  int x = 0;
  int y = 0;
  bool operator==(const PixelCoord&) const = default;
};

struct LKFSegment {
  std::vector<PixelCoord> pixels;  // ordered, 8-connected
  double length_km = 0.0;
  double mean_intensity = 0.0;     // 1/s
};

struct LKFStats {
  int count = 0;
  double total_length_km = 0.0;
};

/// Step metric: pixel_km per axis step, sqrt(2) pixel_km per diagonal step.
double polyline_length_km(std::span<const PixelCoord> pixels, double pixel_km);

/// Intermediate images of the detector, kept for inspection and tests.
struct DetectionStages {
  std::vector<double> response;  // band-pass response
  double threshold = 0.0;
  std::vector<std::uint8_t> binary;
  std::vector<std::uint8_t> wide;  // after the width gate
  std::vector<std::uint8_t> skeleton;
};

std::vector<LKFSegment> detect(const Image& image, const DetectorParams& p, DetectionStages* stages = nullptr);

LKFStats lkf_stats(std::span<const LKFSegment> segments);

}  // namespace seaice
