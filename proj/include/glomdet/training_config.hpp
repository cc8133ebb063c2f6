#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace glomdet::prep {

// Detector training hyperparameters, rendered as the darknet .cfg keys that
// differ between datasets. The convolution feeding each YOLO head needs
// (classes + 5) * 3 filters: three anchors, each predicting four box terms,
// objectness and one score per class.
struct TrainingConfig {
  double learning_rate = 0.001;
  int batch = 40;
  int subdivisions = 16;
  std::string policy = "steps";
  std::vector<int> steps{4800, 5400};
  std::vector<double> scales{0.1, 0.1};
  int max_batches = 6000;
  int filters = 18;
  std::string activation = "linear";
  int num_classes = 1;

  bool operator==(const TrainingConfig&) const = default;
};

int yolo_head_filters(int num_classes);

// Throws InvariantViolation on: filters != (num_classes + 5) * 3, steps not
// strictly increasing or not below max_batches, |steps| != |scales|, or
// non-positive counts.
void validate(const TrainingConfig& config);

TrainingConfig default_training_config();

std::string render_darknet_cfg(const TrainingConfig& config);
// Inverse of render_darknet_cfg; validates the result.
TrainingConfig parse_darknet_cfg(std::string_view text);

}  // namespace glomdet::prep
