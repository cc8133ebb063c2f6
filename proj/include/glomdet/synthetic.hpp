#pragma once

#include <cstdint>
#include <string>

#include "glomdet/annotation.hpp"
#include "glomdet/image_io.hpp"
#include "glomdet/rle.hpp"

namespace glomdet::synth {

// Flat-colour stand-in for a stained kidney section: white glass, one large
// pink tissue ellipse and purple elliptical glomeruli placed inside it
// without touching each other.
struct SyntheticSlideParams {
  std::int64_t width = 4096;
  std::int64_t height = 4096;
  int num_glomeruli = 40;
  std::int64_t min_size = 80;
  std::int64_t max_size = 200;
  std::int64_t spacing = 16;  // minimum gap between glomerulus boxes
  std::uint64_t seed = 0;
};

struct SyntheticSlide {
  wsi::Raster image;
  ann::Bitmap glomerulus_mask;
  // Exact pixel extents of each painted glomerulus, in placement order.
  ann::SlideAnnotation annotation;
};

// Throws InvalidArgument for impossible parameters or when the glomeruli do
// not fit into the tissue.
SyntheticSlide make_synthetic_slide(const std::string& slide_id,
                                    const SyntheticSlideParams& params = {});

}  // namespace glomdet::synth
