#include "glomdet/experiments.hpp"

#include <json.hpp>
#include <set>

#include "glomdet/errors.hpp"

namespace glomdet::prep {

std::string_view train_source_name(TrainSource s) {
  switch (s) {
    case TrainSource::kP1: return "P1";
    case TrainSource::kP2: return "P2";
    case TrainSource::kUmichFt: return "UMICH_FT";
  }
  return "";
}

std::string_view eval_set_name(EvalSet e) {
  switch (e) {
    case EvalSet::kPas20: return "PAS_20";
    case EvalSet::kHe16: return "HE_16";
  }
  return "";
}

std::string_view train_source_description(TrainSource s) {
  switch (s) {
    case TrainSource::kP1: return "31 WSIs from public dataset 1";
    case TrainSource::kP2: return "8 WSIs from public dataset 2";
    case TrainSource::kUmichFt: return "7 PAS stained WSIs from UMICH dataset";
  }
  return "";
}

std::string_view eval_set_description(EvalSet e) {
  switch (e) {
    case EvalSet::kPas20: return "20 PAS WSIs from UMICH dataset";
    case EvalSet::kHe16: return "16 H&E WSIs from UMICH dataset";
  }
  return "";
}

int eval_set_slide_count(EvalSet e) { return e == EvalSet::kPas20 ? 20 : 16; }

std::string ExperimentPlan::training_description() const {
  std::string out;
  for (std::size_t i = 0; i < train_sources.size(); ++i) {
    if (i) out += ", and ";
    out += train_source_description(train_sources[i]);
  }
  if (fine_tune) out += ", fine-tuned with 7 PAS WSIs from UMICH dataset";
  return out;
}

std::vector<ExperimentPlan> build_experiment_plans() {
  using TS = TrainSource;
  const std::vector<EvalSet> both{EvalSet::kPas20, EvalSet::kHe16};
  return {
      {1, {TS::kP1}, false, both},
      {2, {TS::kP1}, true, both},
      {3, {TS::kP2}, false, both},
      {4, {TS::kP2}, true, both},
      {5, {TS::kP1, TS::kP2}, false, both},
      {6, {TS::kP1, TS::kP2}, true, both},
      {7, {TS::kUmichFt}, false, both},
  };
}

std::string render_experiment_manifest(const std::vector<ExperimentPlan>& plans) {
  nlohmann::ordered_json doc;
  doc["experiments"] = nlohmann::ordered_json::array();
  for (const auto& p : plans) {
    nlohmann::ordered_json e;
    e["id"] = p.id;
    e["train_sources"] = nlohmann::ordered_json::array();
    for (auto s : p.train_sources) e["train_sources"].push_back(train_source_name(s));
    e["fine_tune"] = p.fine_tune;
    e["fine_tune_source"] = p.fine_tune ? nlohmann::ordered_json(train_source_name(TrainSource::kUmichFt))
                                        : nlohmann::ordered_json(nullptr);
    e["eval_sets"] = nlohmann::ordered_json::array();
    for (auto s : p.eval_sets) e["eval_sets"].push_back(eval_set_name(s));
    e["training_description"] = p.training_description();
    doc["experiments"].push_back(std::move(e));
  }
  return doc.dump(2) + "\n";
}

std::vector<ExperimentPlan> parse_experiment_manifest(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("experiment manifest: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("experiments") || !doc["experiments"].is_array()) {
    throw Error(ErrorCode::kSchemaViolation, "experiment manifest needs an 'experiments' list");
  }
  auto source = [](const std::string& n) {
    for (auto s : {TrainSource::kP1, TrainSource::kP2, TrainSource::kUmichFt}) {
      if (train_source_name(s) == n) return s;
    }
    throw Error(ErrorCode::kSchemaViolation, "unknown train source '" + n + "'");
  };
  auto eval = [](const std::string& n) {
    for (auto s : {EvalSet::kPas20, EvalSet::kHe16}) {
      if (eval_set_name(s) == n) return s;
    }
    throw Error(ErrorCode::kSchemaViolation, "unknown eval set '" + n + "'");
  };
  std::vector<ExperimentPlan> plans;
  std::set<int> ids;
  try {
    for (const auto& e : doc["experiments"]) {
      ExperimentPlan p;
      p.id = e.at("id").get<int>();
      for (const auto& s : e.at("train_sources")) p.train_sources.push_back(source(s.get<std::string>()));
      p.fine_tune = e.at("fine_tune").get<bool>();
      for (const auto& s : e.at("eval_sets")) p.eval_sets.push_back(eval(s.get<std::string>()));
      if (!ids.insert(p.id).second) {
        throw Error(ErrorCode::kSchemaViolation, "duplicate experiment id " + std::to_string(p.id));
      }
      plans.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("experiment manifest: ") + e.what());
  }
  return plans;
}

}  // namespace glomdet::prep
