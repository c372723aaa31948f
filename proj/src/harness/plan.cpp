#include "detvlm/harness/plan.hpp"

#include <yaml-cpp/yaml.h>

#include <set>

#include "detvlm/detection/labels.hpp"
#include "detvlm/errors.hpp"
#include "detvlm/gateway/digest.hpp"
#include "detvlm/util/splitmix.hpp"

namespace detvlm::harness {
namespace fs = std::filesystem;
namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

template <typename T>
T scalar(const YAML::Node& n, const std::string& field) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw PlanError(field, "has the wrong type", line_of(n));
  }
}

template <typename T>
T get_or(const YAML::Node& parent, const char* key, const std::string& field, T fallback) {
  const auto n = parent[key];
  if (!n || n.IsNull()) return fallback;
  return scalar<T>(n, field);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

void require_dir(const fs::path& p, const std::string& field, int line) {
  if (!fs::is_directory(p)) throw PlanError(field, "directory '" + p.string() + "' does not exist", line);
}

void require_file(const fs::path& p, const std::string& field, int line) {
  if (!fs::is_regular_file(p)) throw PlanError(field, "file '" + p.string() + "' does not exist", line);
}

gateway::BackendSpec parse_backend(const YAML::Node& n, const fs::path& base, std::size_t idx) {
  const std::string field = "backends[" + std::to_string(idx) + "]";
  if (!n.IsMap()) throw PlanError(field, "must be a mapping", line_of(n));
  gateway::BackendSpec b;
  b.name = get_or<std::string>(n, "name", field + ".name", "");
  try {
    b.kind = gateway::parse_backend_kind(get_or<std::string>(n, "kind", field + ".kind", ""));
  } catch (const std::invalid_argument& e) {
    throw PlanError(field + ".kind", e.what(), line_of(n["kind"] ? n["kind"] : n));
  }
  b.endpoint = get_or<std::string>(n, "endpoint", field + ".endpoint", "");
  b.model_id = get_or<std::string>(n, "model_id", field + ".model_id", b.kind == gateway::BackendKind::HttpChat ? "" : b.name);
  b.auth_env = get_or<std::string>(n, "auth_env", field + ".auth_env", "");
  b.timeout_s = get_or<double>(n, "timeout", field + ".timeout", 60.0);
  b.rate_limit_per_min = get_or<double>(n, "rate_limit", field + ".rate_limit", 0.0);
  b.max_retries = get_or<int>(n, "max_retries", field + ".max_retries", 3);
  if (n["profile"]) {
    try {
      b.profile = gateway::parse_wire_profile(scalar<std::string>(n["profile"], field + ".profile"));
    } catch (const std::invalid_argument& e) {
      throw PlanError(field + ".profile", e.what(), line_of(n["profile"]));
    }
  }
  b.auth_header = get_or<std::string>(n, "auth_header", field + ".auth_header", "");
  b.auth_prefix = get_or<std::string>(n, "auth_prefix", field + ".auth_prefix", "");
  b.response_pointer = get_or<std::string>(n, "response_pointer", field + ".response_pointer", "");
  if (n["credential"] || n["api_key"]) {
    throw PlanError(field, "credentials must come from auth_env, not the plan", line_of(n));
  }
  if (auto f = n["fixture"]) {
    b.fixture_path = resolve(base, scalar<std::string>(f, field + ".fixture")).string();
    require_file(b.fixture_path, field + ".fixture", line_of(f));
  }
  if (auto s = n["synthetic"]) {
    const auto sf = field + ".synthetic";
    if (auto t = s["truth_source"]) {
      b.synthetic.truth_source = resolve(base, scalar<std::string>(t, sf + ".truth_source")).string();
      require_file(b.synthetic.truth_source, sf + ".truth_source", line_of(t));
    }
    b.synthetic.error_offset = get_or<int>(s, "error_offset", sf + ".error_offset", 0);
    b.synthetic.refusal_rate = get_or<double>(s, "refusal_rate", sf + ".refusal_rate", 0.0);
    b.synthetic.seed = get_or<std::uint64_t>(s, "seed", sf + ".seed", 0);
  }
  try {
    b.validate();
  } catch (const std::invalid_argument& e) {
    throw PlanError(field, e.what(), line_of(n));
  }
  return b;
}

}  // namespace

const gateway::BackendSpec* ExperimentPlan::find_backend(std::string_view name) const {
  for (const auto& b : backends) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

std::uint64_t image_seed(std::uint64_t plan_seed, std::string_view image_id) {
  const auto h = gateway::sha256_hex(image_id);
  return util::hash_combine(plan_seed, std::stoull(h.substr(0, 16), nullptr, 16));
}

ExperimentPlan parse_plan(std::string_view yaml_text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw PlanError("", e.msg, e.mark.line + 1);
  }
  if (!root.IsMap()) throw PlanError("", "plan must be a mapping");

  const int schema = get_or<int>(root, "schema", "schema", kPlanSchemaVersion);
  if (schema != kPlanSchemaVersion) {
    throw PlanError("schema", "unsupported schema version " + std::to_string(schema), line_of(root["schema"]));
  }

  ExperimentPlan plan;
  const auto required_path = [&](const char* key) {
    const auto n = root[key];
    if (!n || n.IsNull()) throw PlanError(key, "is required");
    return resolve(base_dir, scalar<std::string>(n, key));
  };

  plan.dataset_root = required_path("dataset_root");
  require_dir(plan.dataset_root, "dataset_root", line_of(root["dataset_root"]));
  plan.image_glob = get_or<std::string>(root, "image_glob", "image_glob", "*.png");
  plan.labels_dir = required_path("labels_dir");
  require_dir(plan.labels_dir, "labels_dir", line_of(root["labels_dir"]));
  if (auto t = root["truth_counts"]; t && !t.IsNull()) {
    plan.truth_counts = resolve(base_dir, scalar<std::string>(t, "truth_counts"));
    require_file(*plan.truth_counts, "truth_counts", line_of(t));
  }

  const auto tasks = root["tasks"];
  if (!tasks || !tasks.IsSequence() || tasks.size() == 0) throw PlanError("tasks", "needs at least one task");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto f = "tasks[" + std::to_string(i) + "]";
    try {
      const auto t = prompting::parse_task(scalar<std::string>(tasks[i], f));
      if (std::find(plan.tasks.begin(), plan.tasks.end(), t) != plan.tasks.end()) {
        throw PlanError(f, "duplicate task", line_of(tasks[i]));
      }
      plan.tasks.push_back(t);
    } catch (const std::invalid_argument& e) {
      throw PlanError(f, e.what(), line_of(tasks[i]));
    }
  }

  const auto conds = root["conditions"];
  if (!conds || !conds.IsSequence() || conds.size() == 0) {
    throw PlanError("conditions", "needs at least one condition");
  }
  for (std::size_t i = 0; i < conds.size(); ++i) {
    const auto f = "conditions[" + std::to_string(i) + "]";
    try {
      const auto c = prompting::parse_condition(scalar<std::string>(conds[i], f));
      if (std::find(plan.conditions.begin(), plan.conditions.end(), c) != plan.conditions.end()) {
        throw PlanError(f, "duplicate condition", line_of(conds[i]));
      }
      plan.conditions.push_back(c);
    } catch (const std::invalid_argument& e) {
      throw PlanError(f, e.what(), line_of(conds[i]));
    }
  }

  const auto backends = root["backends"];
  if (!backends || !backends.IsSequence() || backends.size() == 0) {
    throw PlanError("backends", "needs at least one backend");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < backends.size(); ++i) {
    auto b = parse_backend(backends[i], base_dir, i);
    if (!names.insert(b.name).second) {
      throw PlanError("backends[" + std::to_string(i) + "].name", "duplicate backend '" + b.name + "'",
                      line_of(backends[i]));
    }
    plan.backends.push_back(std::move(b));
  }

  if (auto n = root["noise"]) {
    plan.noise.mean = get_or<double>(n, "mean", "noise.mean", 0.0);
    plan.noise.std_dev = get_or<double>(n, "std_dev", "noise.std_dev", 50.0);
    try {
      plan.noise.validate();
    } catch (const std::invalid_argument& e) {
      throw PlanError("noise", e.what(), line_of(n));
    }
  }

  if (auto n = root["overlay"]) {
    if (auto c = n["color"]) {
      if (!c.IsSequence() || c.size() != 3) throw PlanError("overlay.color", "must be [r, g, b]", line_of(c));
      std::array<int, 3> rgb{};
      for (int k = 0; k < 3; ++k) {
        rgb[k] = scalar<int>(c[k], "overlay.color");
        if (rgb[k] < 0 || rgb[k] > 255) throw PlanError("overlay.color", "components must be 0-255", line_of(c));
      }
      plan.overlay.color = {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                            static_cast<std::uint8_t>(rgb[2])};
    }
    plan.overlay.thickness = get_or<int>(n, "thickness", "overlay.thickness", 2);
    if (plan.overlay.thickness < 1) throw PlanError("overlay.thickness", "must be >= 1", line_of(n));
    plan.overlay_min_confidence = get_or<double>(n, "min_confidence", "overlay.min_confidence", 0.0);
    if (plan.overlay_min_confidence < 0.0 || plan.overlay_min_confidence > 1.0) {
      throw PlanError("overlay.min_confidence", "must be in [0,1]", line_of(n));
    }
  }

  plan.detection_source = {detection::SourceKind::LabelDirectory, plan.labels_dir.string()};
  if (auto n = root["detection_source"]) {
    try {
      plan.detection_source.kind =
          detection::parse_source_kind(get_or<std::string>(n, "kind", "detection_source.kind", "label-directory"));
    } catch (const std::invalid_argument& e) {
      throw PlanError("detection_source.kind", e.what(), line_of(n["kind"] ? n["kind"] : n));
    }
    auto loc = get_or<std::string>(n, "location", "detection_source.location", "");
    if (plan.detection_source.kind == detection::SourceKind::ExternalCommand) {
      if (loc.empty()) throw PlanError("detection_source.location", "command template is required", line_of(n));
      plan.detection_source.location = loc;
    } else if (!loc.empty()) {
      const auto p = resolve(base_dir, loc);
      if (plan.detection_source.kind == detection::SourceKind::Fixture) {
        require_file(p, "detection_source.location", line_of(n));
      } else {
        require_dir(p, "detection_source.location", line_of(n));
      }
      plan.detection_source.location = p.string();
    } else if (plan.detection_source.kind == detection::SourceKind::Fixture) {
      throw PlanError("detection_source.location", "fixture path is required", line_of(n));
    }
  }
  plan.detect_on_degraded = get_or<bool>(root, "detect_on_degraded", "detect_on_degraded", false);

  if (auto n = root["embedding_provider"]) {
    const auto kind = get_or<std::string>(n, "kind", "embedding_provider.kind", "stub");
    auto& e = plan.embedding;
    if (kind == "stub") {
      e.kind = EmbeddingProviderSpec::Kind::Stub;
    } else if (kind == "file") {
      e.kind = EmbeddingProviderSpec::Kind::File;
      e.path = resolve(base_dir, get_or<std::string>(n, "path", "embedding_provider.path", ""));
      require_file(e.path, "embedding_provider.path", line_of(n));
    } else if (kind == "remote") {
      e.kind = EmbeddingProviderSpec::Kind::Remote;
      e.endpoint = get_or<std::string>(n, "endpoint", "embedding_provider.endpoint", "");
      if (e.endpoint.empty()) throw PlanError("embedding_provider.endpoint", "is required", line_of(n));
      e.auth_env = get_or<std::string>(n, "auth_env", "embedding_provider.auth_env", "");
      e.response_pointer = get_or<std::string>(n, "response_pointer", "embedding_provider.response_pointer", "/embedding");
      e.timeout_s = get_or<double>(n, "timeout", "embedding_provider.timeout", 30.0);
    } else {
      throw PlanError("embedding_provider.kind", "unknown kind '" + kind + "'", line_of(n));
    }
    e.seed = get_or<std::uint64_t>(n, "seed", "embedding_provider.seed", 0);
    e.dimension = get_or<std::size_t>(n, "dimension", "embedding_provider.dimension", 512);
    if (e.dimension == 0) throw PlanError("embedding_provider.dimension", "must be >= 1", line_of(n));
  }

  if (auto n = root["clip"]) {
    plan.clip.weight = get_or<double>(n, "weight", "clip.weight", 2.5);
    plan.clip.report_scale = get_or<double>(n, "report_scale", "clip.report_scale", 100.0 / 2.5);
    if (!(plan.clip.weight > 0.0)) throw PlanError("clip.weight", "must be > 0", line_of(n));
    if (!(plan.clip.report_scale > 0.0)) throw PlanError("clip.report_scale", "must be > 0", line_of(n));
  }

  if (auto n = root["prompt_overrides"]; n && !n.IsNull()) {
    plan.prompt_overrides = resolve(base_dir, scalar<std::string>(n, "prompt_overrides"));
    require_file(*plan.prompt_overrides, "prompt_overrides", line_of(n));
    try {
      prompting::TemplateSet::load(*plan.prompt_overrides);
    } catch (const TemplateError& e) {
      throw PlanError("prompt_overrides", e.what(), line_of(n));
    }
  }

  plan.output_dir = resolve(base_dir, get_or<std::string>(root, "output_dir", "output_dir", "out"));
  plan.cache_path = resolve(base_dir, get_or<std::string>(root, "cache_path", "cache_path", "cache.jsonl"));
  if (!fs::is_directory(plan.cache_path.parent_path()) && plan.cache_path.parent_path() != plan.output_dir) {
    throw PlanError("cache_path", "parent directory '" + plan.cache_path.parent_path().string() + "' does not exist",
                    line_of(root["cache_path"]));
  }
  plan.max_concurrency = get_or<int>(root, "max_concurrency", "max_concurrency", 1);
  if (plan.max_concurrency < 1) throw PlanError("max_concurrency", "must be >= 1", line_of(root["max_concurrency"]));
  plan.seed = get_or<std::uint64_t>(root, "seed", "seed", 0);
  return plan;
}

ExperimentPlan load_plan(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw PlanError("", "plan file '" + path.string() + "' does not exist");
  const auto text = detection::read_text_file(path.string());
  return parse_plan(text, fs::absolute(path).parent_path());
}

}  // namespace detvlm::harness
