#ifndef WATERLINE_PREPROCESS_HPP
#define WATERLINE_PREPROCESS_HPP

#include "waterline/raster.hpp"

namespace waterline {

/// Edge image produced by canny_edges: retained gradient magnitude at edge
/// pixels, 0 elsewhere. Every nonzero sample is >= `threshold`.
struct EdgeRaster {
    Raster magnitudes;
    double threshold = 0.0;
};

/// Elementwise VV x VH product. The bands are multiplied exactly as stored
/// (dB-scaled Sentinel-1 exports are not converted first). Nodata in either
/// input propagates.
Raster combine_bands(const Raster& vv, const Raster& vh);

/// Focal median with a circular kernel of the given pixel radius. Windows
/// shrink to valid in-bounds, non-nodata samples at borders; an even-count
/// window takes the mean of the two middle values. radius 0 is the identity.
Raster speckle_filter(const Raster& input, int radius);

/// Separable Gaussian blur, half-width ceil(3*sigma), weights renormalized
/// over the valid samples of each window.
Raster gaussian_smooth(const Raster& input, double sigma);

/// Central-difference gradients of a (smoothed) raster, one-sided at the
/// outermost rows/columns. Pixels touching nodata get zero gradient.
struct Gradients {
    int width = 0;
    int height = 0;
    std::vector<float> gx;
    std::vector<float> gy;
    std::vector<float> magnitude;
};
Gradients image_gradients(const Raster& smoothed);

/// Canny-style edge extraction: Gaussian smooth, gradients, 4-sector
/// non-maximum suppression, then a single magnitude threshold of half the
/// standard deviation of `input` over `region`. Surviving pixels keep their
/// gradient magnitudes; everything outside `region` is zero.
EdgeRaster canny_edges(const Raster& input, const RegionMask& region, double sigma);

/// Otsu's histogram split over the region samples: the threshold maximizing
/// between-class variance. Baseline classifier for comparison runs.
double otsu_threshold(const Raster& input, const RegionMask& region, int bins = 256);

}  // namespace waterline

#endif
