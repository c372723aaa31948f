#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "detvlm/detection/labels.hpp"
#include "detvlm/imagery/io.hpp"

namespace fs = std::filesystem;

namespace testsupport {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("detvlm-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset make_dataset(const fs::path& root, int n) {
  using namespace detvlm;
  Dataset ds{root / "images", root / "labels", {}};
  fs::create_directories(ds.images);
  fs::create_directories(ds.labels);
  constexpr int kW = 64, kH = 48;
  for (int i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "img_%02d", i);
    imagery::RasterImage img(kW, kH, {90, 90, 90});
    std::vector<detection::GroundTruthLabel> labels;
    const int k = 1 + i % 5;
    for (int j = 0; j < k; ++j) {
      // Non-overlapping 10x8 tiles on a 5-column grid.
      const int x0 = 2 + 12 * j, y0 = 4 + 20 * (i % 2);
      for (int y = y0; y < y0 + 8; ++y) {
        for (int x = x0; x < x0 + 10; ++x) img.set(x, y, {220, 220, 200});
      }
      labels.push_back({0, {(x0 + 5.0) / kW, (y0 + 4.0) / kH, 10.0 / kW, 8.0 / kH}});
    }
    imagery::save_image(img, ds.images / (std::string(id) + ".png"), imagery::ImageFormat::Png);
    write_text(ds.labels / (std::string(id) + ".txt"), detection::format_label_file(labels));
    ds.counts[id] = k;
  }
  return ds;
}

std::string plan_yaml(const Dataset& ds, const std::string& backends, const std::string& extra) {
  std::ostringstream y;
  y << "schema: 1\n"
    << "dataset_root: " << ds.images.string() << "\n"
    << "labels_dir: " << ds.labels.string() << "\n"
    << "tasks: [count]\n"
    << "conditions: [raw, degraded, raw+boxes, degraded+boxes]\n"
    << "seed: 7\n"
    << "backends:\n"
    << backends << extra;
  return y.str();
}

}  // namespace testsupport
