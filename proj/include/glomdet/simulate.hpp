#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "glomdet/annotation.hpp"
#include "glomdet/detection.hpp"
#include "glomdet/tissue_mask.hpp"

namespace glomdet::det {

// Portable uniform draws on top of mt19937_64, whose output sequence is
// fixed by the standard. The std distributions are implementation-defined,
// so they are not used anywhere results must be reproducible.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // [0, n)
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

struct ConfidenceModel {
  double tp_min = 0.5, tp_max = 1.0;   // true hits
  double fp_min = 0.05, fp_max = 0.6;  // false positives
};

struct SimulationParams {
  double drop_rate = 0.2;
  double fp_rate_per_megapixel = 0.5;
  double jitter_px = 4.0;
  ConfidenceModel confidence;
  std::uint64_t seed = 0;
  // False-positive box edges are drawn from [fp_size_min, fp_size_max].
  double fp_size_min = 64.0;
  double fp_size_max = 256.0;
};

// Draw order per seed: for each GT box in order one drop draw, then (if
// kept) four corner jitters and one confidence; then one draw for the
// fractional part of the false-positive count; then per false positive
// width, height, centre (mask pixel index and offsets, or slide position)
// and confidence. Output lists kept GT hits first, then false positives.
// False positives are spread over `tissue` when given, else the slide.
// Throws InvalidArgument for rates or ranges outside their domain.
std::vector<Detection> simulate_detector(const ann::SlideAnnotation& annotation,
                                         const SimulationParams& params,
                                         const wsi::TissueMask* tissue = nullptr);

}  // namespace glomdet::det
