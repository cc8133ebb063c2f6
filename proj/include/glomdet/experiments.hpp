#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace glomdet::prep {

enum class TrainSource { kP1, kP2, kUmichFt };
enum class EvalSet { kPas20, kHe16 };

std::string_view train_source_name(TrainSource s);  // "P1", "P2", "UMICH_FT"
std::string_view eval_set_name(EvalSet e);          // "PAS_20", "HE_16"
std::string_view train_source_description(TrainSource s);
std::string_view eval_set_description(EvalSet e);
int eval_set_slide_count(EvalSet e);

// One training/evaluation combination. fine_tune means the model trained
// on train_sources is further trained on the 7 private PAS slides.
struct ExperimentPlan {
  int id = 0;
  std::vector<TrainSource> train_sources;
  bool fine_tune = false;
  std::vector<EvalSet> eval_sets;

  std::string training_description() const;
  bool operator==(const ExperimentPlan&) const = default;
};

// The seven experiments, ids 1..7, each evaluated on both stain sets.
std::vector<ExperimentPlan> build_experiment_plans();

std::string render_experiment_manifest(const std::vector<ExperimentPlan>& plans);
std::vector<ExperimentPlan> parse_experiment_manifest(std::string_view text);

}  // namespace glomdet::prep
