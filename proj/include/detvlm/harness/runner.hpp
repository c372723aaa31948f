#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detvlm/gateway/cache.hpp"
#include "detvlm/gateway/clock.hpp"
#include "detvlm/gateway/gateway.hpp"
#include "detvlm/harness/plan.hpp"
#include "detvlm/parsing/answer.hpp"

namespace detvlm::harness {

struct Job {
  std::string image_id;
  std::filesystem::path image_path;
  prompting::TaskKind task = prompting::TaskKind::CountAircraft;
  prompting::GroundingCondition condition;
  std::string backend;
};

// Images x tasks x conditions x backends, sorted by (image_id, task name,
// condition name, backend). Throws PlanError when the glob matches nothing.
std::vector<Job> enumerate_jobs(const ExperimentPlan& plan);

struct RunRecord {
  Job job;
  gateway::VlmExchange exchange;  // carries the request digest
  parsing::ParsedAnswer parsed;
  std::optional<int> actual_count;
  std::optional<double> clip;
};

nlohmann::json to_json(const RunRecord& record);

struct RunnerOptions {
  // Replay from the cache only; nothing is dispatched.
  bool offline = false;
  gateway::Clock* clock = nullptr;  // defaults to the system clock
};

// Executes a plan: prepares each image variant, renders prompts, queries
// backends cache-first, parses answers and attaches ground truth and CLIP
// scores. Per-job failures are recorded, never thrown.
class Runner {
 public:
  explicit Runner(ExperimentPlan plan, RunnerOptions options = {});
  ~Runner();

  const ExperimentPlan& plan() const noexcept { return plan_; }

  // Records come back in job order. Throws only for plan-level problems
  // (unreadable dataset, unwritable cache).
  std::vector<RunRecord> execute();
  std::vector<RunRecord> execute(std::span<const Job> jobs);

  // Backend attempts across all gateways.
  std::size_t dispatch_count() const;

 private:
  struct Impl;
  ExperimentPlan plan_;
  RunnerOptions options_;
  std::unique_ptr<Impl> impl_;
};

bool has_failures(std::span<const RunRecord> records);

}  // namespace detvlm::harness
