#include <set>

#include "glomdet/experiments.hpp"
#include "glomdet/util.hpp"
#include "test_support.hpp"

using namespace glomdet;
using namespace glomdet::prep;

TEST_CASE("seven plans as published") {
  const auto plans = build_experiment_plans();
  REQUIRE(plans.size() == 7);
  using TS = TrainSource;
  const std::vector<std::pair<std::vector<TS>, bool>> expect{
      {{TS::kP1}, false},         {{TS::kP1}, true},          {{TS::kP2}, false},
      {{TS::kP2}, true},          {{TS::kP1, TS::kP2}, false}, {{TS::kP1, TS::kP2}, true},
      {{TS::kUmichFt}, false}};
  std::set<int> ids;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    CHECK(plans[i].id == static_cast<int>(i + 1));
    CHECK(plans[i].train_sources == expect[i].first);
    CHECK(plans[i].fine_tune == expect[i].second);
    CHECK(plans[i].eval_sets == std::vector<EvalSet>{EvalSet::kPas20, EvalSet::kHe16});
    ids.insert(plans[i].id);
  }
  CHECK(ids.size() == 7);
  CHECK(plans[0].training_description() == "31 WSIs from public dataset 1");
  CHECK(plans[6].training_description() == "7 PAS stained WSIs from UMICH dataset");
  CHECK(eval_set_slide_count(EvalSet::kPas20) == 20);
  CHECK(eval_set_slide_count(EvalSet::kHe16) == 16);
}

TEST_CASE("experiment manifest matches golden and parses back") {
  const auto plans = build_experiment_plans();
  const auto text = render_experiment_manifest(plans);
  CHECK(text == read_text_file(test::golden("experiments.json")));
  CHECK(parse_experiment_manifest(text) == plans);
}

TEST_CASE("experiment manifest parser errors") {
  CHECK_ERROR_CODE(parse_experiment_manifest("{}"), ErrorCode::kSchemaViolation);
  CHECK_ERROR_CODE(parse_experiment_manifest(
                       R"({"experiments":[{"id":1,"train_sources":["P9"],"fine_tune":false,"eval_sets":[]}]})"),
                   ErrorCode::kSchemaViolation);
  CHECK_ERROR_CODE(
      parse_experiment_manifest(
          R"({"experiments":[{"id":1,"train_sources":[],"fine_tune":false,"eval_sets":[]},)"
          R"({"id":1,"train_sources":[],"fine_tune":false,"eval_sets":[]}]})"),
      ErrorCode::kSchemaViolation);
}
