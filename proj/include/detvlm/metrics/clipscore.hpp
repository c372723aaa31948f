#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace detvlm::metrics {

class EmbeddingVector {
 public:
  // Throws EmbeddingError when `values` is empty.
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dimension() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double norm() const noexcept;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

// dot(a, b) / (|a| |b|). Throws MetricError on dimension mismatch or a
// zero vector.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// weight * max(cosine, 0), multiplied by report_scale for display. With the
// defaults an identical pair scores 100.
struct ClipScoreSpec {
  double weight = 2.5;
  double report_scale = 100.0 / 2.5;

  void validate() const;
};

double clip_score(const EmbeddingVector& image, const EmbeddingVector& text, const ClipScoreSpec& spec = {});

// What to embed: an image (by id and encoded bytes) or caption text.
struct EmbeddingItem {
  enum class Kind { Image, Text };
  Kind kind = Kind::Text;
  std::string id;  // image id; for text, sha256 hex of the UTF-8 text
  std::span<const std::uint8_t> bytes;

  static EmbeddingItem image(std::string image_id, std::span<const std::uint8_t> encoded);
  static EmbeddingItem text(std::string_view caption);
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // Throws EmbeddingError.
  virtual EmbeddingVector embed(const EmbeddingItem& item) = 0;
};

// Deterministic pseudo-random unit vector derived from (seed, kind, content
// hash). For pipeline tests; scores carry no meaning.
class StubEmbeddingProvider final : public EmbeddingProvider {
 public:
  StubEmbeddingProvider(std::uint64_t seed, std::size_t dimension = 512);
  EmbeddingVector embed(const EmbeddingItem& item) override;

 private:
  std::uint64_t seed_;
  std::size_t dimension_;
};

// JSON object mapping id -> array of numbers; every array must share one
// dimension. Images are looked up by image id, captions by the sha256 hex
// of their text.
class FileEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit FileEmbeddingProvider(const std::filesystem::path& path);
  EmbeddingVector embed(const EmbeddingItem& item) override;

 private:
  std::map<std::string, EmbeddingVector> vectors_;
};

// POSTs {"type": "image"|"text", "id": ..., "data": base64 or UTF-8} to an
// endpoint and reads the vector at `response_pointer` (default
// "/embedding"). Enforces one dimension across all calls.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  RemoteEmbeddingProvider(std::string endpoint, std::string auth_env = {}, double timeout_s = 30.0,
                          std::string response_pointer = "/embedding");
  EmbeddingVector embed(const EmbeddingItem& item) override;

 private:
  std::string endpoint_;
  std::string auth_env_;
  double timeout_s_;
  std::string response_pointer_;
  std::mutex mutex_;
  std::size_t dimension_ = 0;
};

}  // namespace detvlm::metrics
