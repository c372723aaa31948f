#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace testsupport {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct Dataset {
  std::filesystem::path images;
  std::filesystem::path labels;
  std::map<std::string, int> counts;  // image id -> aircraft count
};

// `n` small PNG scenes, each with 1..5 bright rectangles on a grey
// background, and matching ground-truth label files.
Dataset make_dataset(const std::filesystem::path& root, int n = 10);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Plan YAML over `ds` with the given backends block (already indented as a
// YAML sequence under `backends:`) plus any extra top-level lines.
std::string plan_yaml(const Dataset& ds, const std::string& backends, const std::string& extra = "");

}  // namespace testsupport
