#include "detvlm/harness/runner.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "detvlm/detection/source.hpp"
#include "detvlm/errors.hpp"
#include "detvlm/gateway/truth.hpp"
#include "detvlm/imagery/io.hpp"
#include "detvlm/imagery/overlay.hpp"

namespace detvlm::harness {
namespace fs = std::filesystem;

std::vector<Job> enumerate_jobs(const ExperimentPlan& plan) {
  std::vector<std::pair<std::string, fs::path>> images;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(plan.dataset_root, ec)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (fnmatch(plan.image_glob.c_str(), name.c_str(), 0) != 0) continue;
    images.emplace_back(entry.path().stem().string(), entry.path());
  }
  if (ec) throw PlanError("dataset_root", "cannot list '" + plan.dataset_root.string() + "': " + ec.message());
  if (images.empty()) {
    throw PlanError("image_glob", "'" + plan.image_glob + "' matches no file in " + plan.dataset_root.string());
  }

  std::vector<Job> jobs;
  jobs.reserve(images.size() * plan.tasks.size() * plan.conditions.size() * plan.backends.size());
  for (const auto& [id, path] : images) {
    for (auto task : plan.tasks) {
      for (const auto& cond : plan.conditions) {
        for (const auto& b : plan.backends) jobs.push_back({id, path, task, cond, b.name});
      }
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    return std::tuple(std::string_view(a.image_id), prompting::to_string(a.task), prompting::to_string(a.condition),
                      std::string_view(a.backend)) < std::tuple(std::string_view(b.image_id),
                                                                prompting::to_string(b.task),
                                                                prompting::to_string(b.condition),
                                                                std::string_view(b.backend));
  });
  return jobs;
}

nlohmann::json to_json(const RunRecord& record) {
  nlohmann::json j;
  j["image_id"] = record.job.image_id;
  j["task"] = prompting::to_string(record.job.task);
  j["condition"] = prompting::to_string(record.job.condition);
  j["backend"] = record.job.backend;
  j["exchange"] = gateway::to_json(record.exchange);
  j["parsed"] = parsing::to_key_value(record.parsed);
  j["actual_count"] = record.actual_count ? nlohmann::json(*record.actual_count) : nlohmann::json(nullptr);
  j["clip"] = record.clip ? nlohmann::json(*record.clip) : nlohmann::json(nullptr);
  return j;
}

bool has_failures(std::span<const RunRecord> records) {
  return std::any_of(records.begin(), records.end(), [](const RunRecord& r) { return !r.exchange.ok(); });
}

namespace {

// Line counts of every label file; the default ground truth.
gateway::TruthCounts label_line_counts(const fs::path& labels_dir) {
  gateway::TruthCounts counts;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(labels_dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    int n = 0;
    for (std::string line; std::getline(in, line);) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) ++n;
    }
    counts[entry.path().stem().string()] = n;
  }
  return counts;
}

std::unique_ptr<metrics::EmbeddingProvider> make_embedder(const EmbeddingProviderSpec& spec) {
  switch (spec.kind) {
    case EmbeddingProviderSpec::Kind::File:
      return std::make_unique<metrics::FileEmbeddingProvider>(spec.path);
    case EmbeddingProviderSpec::Kind::Remote:
      return std::make_unique<metrics::RemoteEmbeddingProvider>(spec.endpoint, spec.auth_env, spec.timeout_s,
                                                                 spec.response_pointer);
    case EmbeddingProviderSpec::Kind::Stub:
      break;
  }
  return std::make_unique<metrics::StubEmbeddingProvider>(spec.seed, spec.dimension);
}

// Image variants for one image, built on first use.
struct Variants {
  imagery::RasterImage raw;
  std::vector<std::uint8_t> raw_png;
  std::optional<imagery::RasterImage> degraded;
  std::map<prompting::GroundingCondition, std::vector<std::uint8_t>> encoded;
};

std::string temp_png_path(const std::string& image_id) {
  static std::atomic<unsigned> counter{0};
  return (fs::temp_directory_path() /
          ("detvlm-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + image_id + ".png"))
      .string();
}

}  // namespace

struct Runner::Impl {
  const ExperimentPlan& plan;
  RunnerOptions options;
  gateway::TruthCounts truth;
  std::unique_ptr<gateway::ExchangeCache> cache;
  std::map<std::string, std::unique_ptr<gateway::Gateway>> gateways;
  std::unique_ptr<metrics::EmbeddingProvider> embedder;
  std::mutex embed_mutex;
  prompting::TemplateSet templates;

  Impl(const ExperimentPlan& p, RunnerOptions opts) : plan(p), options(opts) {
    truth = plan.truth_counts ? gateway::load_truth_counts(*plan.truth_counts) : label_line_counts(plan.labels_dir);
    if (plan.prompt_overrides) templates = prompting::TemplateSet::load(*plan.prompt_overrides);
    if (!plan.cache_path.parent_path().empty()) fs::create_directories(plan.cache_path.parent_path());
    cache = std::make_unique<gateway::ExchangeCache>(plan.cache_path);
    auto& clock = options.clock ? *options.clock : gateway::SystemClock::instance();
    for (const auto& spec : plan.backends) {
      gateways.emplace(spec.name, std::make_unique<gateway::Gateway>(
                                      spec, gateway::make_backend(spec, &truth), cache.get(), clock));
    }
    embedder = make_embedder(plan.embedding);
  }

  std::optional<int> actual_count(const std::string& image_id) const {
    if (auto it = truth.find(image_id); it != truth.end()) return it->second;
    return std::nullopt;
  }

  std::vector<imagery::PixelRect> boxes_for(const Job& job, Variants& v) {
    std::vector<detection::Detection> dets;
    const bool on_degraded = plan.detect_on_degraded && job.condition.image_state == prompting::ImageState::Degraded &&
                             plan.detection_source.kind == detection::SourceKind::ExternalCommand;
    if (on_degraded) {
      const auto tmp = temp_png_path(job.image_id);
      imagery::save_image(*v.degraded, tmp, imagery::ImageFormat::Png);
      try {
        dets = detection::provide_detections(plan.detection_source, job.image_id, tmp);
      } catch (...) {
        fs::remove(tmp);
        throw;
      }
      fs::remove(tmp);
    } else {
      dets = detection::provide_detections(plan.detection_source, job.image_id, job.image_path);
    }
    std::vector<imagery::PixelRect> rects;
    for (const auto& d : dets) {
      if (d.confidence < plan.overlay_min_confidence) continue;
      rects.push_back(detection::to_pixel_rect(d.box, v.raw.width(), v.raw.height()));
    }
    return rects;
  }

  const std::vector<std::uint8_t>& image_for(const Job& job, Variants& v) {
    if (auto it = v.encoded.find(job.condition); it != v.encoded.end()) return it->second;
    const imagery::RasterImage* base = &v.raw;
    if (job.condition.image_state == prompting::ImageState::Degraded) {
      if (!v.degraded) {
        auto noise = plan.noise;
        noise.seed = image_seed(plan.seed, job.image_id);
        v.degraded = imagery::degrade_gaussian(v.raw, noise);
      }
      base = &*v.degraded;
    }
    std::vector<std::uint8_t> bytes;
    if (job.condition.boxes) {
      const auto rects = boxes_for(job, v);
      bytes = imagery::encode_png(imagery::render_overlays(*base, rects, plan.overlay));
    } else if (base == &v.raw) {
      bytes = v.raw_png;
    } else {
      bytes = imagery::encode_png(*base);
    }
    return v.encoded.emplace(job.condition, std::move(bytes)).first->second;
  }

  RunRecord input_failure(const Job& job, const prompting::RenderedPrompt& prompt, std::string detail) {
    RunRecord rec;
    rec.job = job;
    const auto& spec = gateways.at(job.backend)->spec();
    rec.exchange.backend = spec.name;
    rec.exchange.model = spec.model_id;
    rec.exchange.prompt = prompt.text;
    rec.exchange.image_id = job.image_id;
    rec.exchange.failure = gateway::Failure{gateway::FailureCategory::InputError, std::move(detail)};
    rec.parsed = parsing::classify_exchange(rec.exchange, job.task);
    rec.actual_count = actual_count(job.image_id);
    return rec;
  }

  std::optional<double> clip_for(const RunRecord& rec, const Variants& v) {
    const auto* caption = std::get_if<parsing::CaptionAnswer>(&rec.parsed);
    if (!caption || rec.job.condition.image_state != prompting::ImageState::Raw) return std::nullopt;
    try {
      std::lock_guard lock(embed_mutex);
      const auto image = embedder->embed(metrics::EmbeddingItem::image(rec.job.image_id, v.raw_png));
      const auto text = embedder->embed(metrics::EmbeddingItem::text(caption->text));
      return metrics::clip_score(image, text, plan.clip);
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  // All jobs of one image, in order.
  void run_image(std::span<const Job> jobs, std::span<RunRecord> out) {
    Variants v;
    std::optional<std::string> load_error;
    try {
      v.raw = imagery::load_image(jobs.front().image_path);
      v.raw_png = imagery::encode_png(v.raw);
    } catch (const Error& e) {
      load_error = e.what();
    }

    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const auto& job = jobs[i];
      const auto prompt =
          prompting::build_prompt(job.task, job.condition, templates.empty() ? nullptr : &templates);
      if (load_error) {
        out[i] = input_failure(job, prompt, *load_error);
        continue;
      }
      gateway::VlmRequest req;
      req.prompt = prompt.text;
      req.image_id = job.image_id;
      try {
        req.image_bytes = image_for(job, v);
      } catch (const Error& e) {
        out[i] = input_failure(job, prompt, e.what());
        continue;
      }
      req.metadata = {{"task", std::string(prompting::to_string(job.task))},
                      {"condition", std::string(prompting::to_string(job.condition))},
                      {"seed", std::to_string(plan.seed)}};

      auto& gw = *gateways.at(job.backend);
      RunRecord rec;
      rec.job = job;
      rec.exchange = options.offline ? gw.replay(req) : gw.query(req);
      rec.parsed = parsing::classify_exchange(rec.exchange, job.task);
      rec.actual_count = actual_count(job.image_id);
      rec.clip = clip_for(rec, v);
      out[i] = std::move(rec);
    }
  }
};

Runner::Runner(ExperimentPlan plan, RunnerOptions options)
    : plan_(std::move(plan)), options_(options), impl_(std::make_unique<Impl>(plan_, options_)) {}

Runner::~Runner() = default;

std::vector<RunRecord> Runner::execute() {
  const auto jobs = enumerate_jobs(plan_);
  return execute(jobs);
}

std::vector<RunRecord> Runner::execute(std::span<const Job> jobs) {
  std::vector<RunRecord> records(jobs.size());

  // Contiguous runs of one image share decoded and degraded pixels.
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < jobs.size();) {
    std::size_t j = i + 1;
    while (j < jobs.size() && jobs[j].image_id == jobs[i].image_id) ++j;
    groups.emplace_back(i, j);
    i = j;
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t g; (g = next++) < groups.size();) {
      const auto [begin, end] = groups[g];
      impl_->run_image(jobs.subspan(begin, end - begin), std::span(records).subspan(begin, end - begin));
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(plan_.max_concurrency), groups.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  return records;
}

std::size_t Runner::dispatch_count() const {
  std::size_t total = 0;
  for (const auto& [name, gw] : impl_->gateways) total += gw->dispatch_count();
  return total;
}

}  // namespace detvlm::harness
