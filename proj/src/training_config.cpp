#include "glomdet/training_config.hpp"

#include <map>
#include <sstream>

#include "glomdet/errors.hpp"
#include "glomdet/util.hpp"

namespace glomdet::prep {

int yolo_head_filters(int num_classes) { return (num_classes + 5) * 3; }

void validate(const TrainingConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvariantViolation, msg); };
  if (c.num_classes < 1) fail("num_classes must be >= 1");
  if (c.filters != yolo_head_filters(c.num_classes)) {
    fail("filters must be (num_classes + 5) * 3 = " +
         std::to_string(yolo_head_filters(c.num_classes)) + ", got " +
         std::to_string(c.filters));
  }
  if (!(c.learning_rate > 0.0)) fail("learning_rate must be positive");
  if (c.batch < 1 || c.subdivisions < 1) fail("batch and subdivisions must be positive");
  if (c.max_batches < 1) fail("max_batches must be positive");
  if (c.steps.size() != c.scales.size()) fail("steps and scales must have equal length");
  for (std::size_t i = 0; i < c.steps.size(); ++i) {
    if (c.steps[i] < 1 || c.steps[i] >= c.max_batches) fail("steps must lie in [1, max_batches)");
    if (i > 0 && c.steps[i] <= c.steps[i - 1]) fail("steps must be strictly increasing");
  }
  if (c.policy.empty() || c.activation.empty()) fail("policy and activation must be set");
}

TrainingConfig default_training_config() {
  TrainingConfig c;
  validate(c);
  return c;
}

namespace {

template <typename T, typename Fmt>
std::string join(const std::vector<T>& values, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt(values[i]);
  }
  return out;
}

}  // namespace

std::string render_darknet_cfg(const TrainingConfig& c) {
  validate(c);
  std::string out;
  out += "[net]\n";
  out += "batch=" + std::to_string(c.batch) + "\n";
  out += "subdivisions=" + std::to_string(c.subdivisions) + "\n";
  out += "learning_rate=" + format_double(c.learning_rate) + "\n";
  out += "policy=" + c.policy + "\n";
  out += "steps=" + join(c.steps, [](int v) { return std::to_string(v); }) + "\n";
  out += "scales=" + join(c.scales, [](double v) { return format_double(v); }) + "\n";
  out += "max_batches=" + std::to_string(c.max_batches) + "\n";
  out += "\n[convolutional]\n";
  out += "filters=" + std::to_string(c.filters) + "\n";
  out += "activation=" + c.activation + "\n";
  out += "\n[yolo]\n";
  out += "classes=" + std::to_string(c.num_classes) + "\n";
  return out;
}

TrainingConfig parse_darknet_cfg(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line, section;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      section = line;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kSchemaViolation, "cfg line without '=': " + line);
    }
    kv[section + line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::kSchemaViolation, "cfg missing " + key);
    return it->second;
  };
  auto to_int = [](const std::string& s) {
    std::int64_t v = 0;
    if (!parse_int64(s, v)) throw Error(ErrorCode::kSchemaViolation, "bad integer '" + s + "'");
    return static_cast<int>(v);
  };
  auto to_real = [](const std::string& s) {
    double v = 0;
    if (!parse_double(s, v)) throw Error(ErrorCode::kSchemaViolation, "bad number '" + s + "'");
    return v;
  };
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::istringstream ss(s);
    std::string p;
    while (std::getline(ss, p, ',')) parts.push_back(p);
    return parts;
  };

  TrainingConfig c;
  c.batch = to_int(get("[net]batch"));
  c.subdivisions = to_int(get("[net]subdivisions"));
  c.learning_rate = to_real(get("[net]learning_rate"));
  c.policy = get("[net]policy");
  c.steps.clear();
  for (const auto& s : split(get("[net]steps"))) c.steps.push_back(to_int(s));
  c.scales.clear();
  for (const auto& s : split(get("[net]scales"))) c.scales.push_back(to_real(s));
  c.max_batches = to_int(get("[net]max_batches"));
  c.filters = to_int(get("[convolutional]filters"));
  c.activation = get("[convolutional]activation");
  c.num_classes = to_int(get("[yolo]classes"));
  validate(c);
  return c;
}

}  // namespace glomdet::prep
