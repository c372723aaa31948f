#include "detvlm/metrics/clipscore.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include <nlohmann/json.hpp>

#include "detvlm/detection/labels.hpp"
#include "detvlm/errors.hpp"
#include "detvlm/gateway/digest.hpp"
#include "detvlm/util/splitmix.hpp"

namespace detvlm::metrics {

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw EmbeddingError("embedding must have dimension >= 1");
}

double EmbeddingVector::norm() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw MetricError("embedding dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                      std::to_string(b.dimension()));
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw MetricError("cosine of a zero vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) dot += a.values()[i] * b.values()[i];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

void ClipScoreSpec::validate() const {
  if (!(weight > 0.0)) throw MetricError("clip weight must be > 0");
  if (!(report_scale > 0.0)) throw MetricError("clip report_scale must be > 0");
}

double clip_score(const EmbeddingVector& image, const EmbeddingVector& text, const ClipScoreSpec& spec) {
  spec.validate();
  return spec.weight * std::max(cosine(image, text), 0.0) * spec.report_scale;
}

EmbeddingItem EmbeddingItem::image(std::string image_id, std::span<const std::uint8_t> encoded) {
  return {Kind::Image, std::move(image_id), encoded};
}

EmbeddingItem EmbeddingItem::text(std::string_view caption) {
  return {Kind::Text, gateway::sha256_hex(caption),
          std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(caption.data()), caption.size())};
}

StubEmbeddingProvider::StubEmbeddingProvider(std::uint64_t seed, std::size_t dimension)
    : seed_(seed), dimension_(dimension) {
  if (dimension_ == 0) throw EmbeddingError("stub embedding dimension must be >= 1");
}

EmbeddingVector StubEmbeddingProvider::embed(const EmbeddingItem& item) {
  const auto content = gateway::sha256_hex(item.bytes);
  // First 64 bits of the content hash.
  const std::uint64_t prefix = std::stoull(content.substr(0, 16), nullptr, 16);
  const std::uint64_t kind_tag = item.kind == EmbeddingItem::Kind::Image ? 1 : 2;
  const std::uint64_t stream = util::hash_combine(util::hash_combine(seed_, kind_tag), prefix);

  std::vector<double> v(dimension_);
  for (std::size_t i = 0; i < dimension_; ++i) {
    const double u1 = util::to_unit_open_low(util::splitmix_at(stream, 2 * (i / 2) + 1));
    const double u2 = util::to_unit(util::splitmix_at(stream, 2 * (i / 2) + 2));
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = (i % 2 == 0) ? r * std::cos(2.0 * std::numbers::pi * u2) : r * std::sin(2.0 * std::numbers::pi * u2);
  }
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return EmbeddingVector(std::move(v));
}

FileEmbeddingProvider::FileEmbeddingProvider(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detection::read_text_file(path.string()));
  } catch (const nlohmann::json::exception& e) {
    throw EmbeddingError("embedding file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw EmbeddingError("embedding file must be a JSON object");
  std::size_t dim = 0;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    auto values = it.value().get<std::vector<double>>();
    if (dim == 0) dim = values.size();
    if (values.size() != dim) {
      throw EmbeddingError("embedding '" + it.key() + "' has dimension " + std::to_string(values.size()) +
                           ", expected " + std::to_string(dim));
    }
    vectors_.emplace(it.key(), EmbeddingVector(std::move(values)));
  }
}

EmbeddingVector FileEmbeddingProvider::embed(const EmbeddingItem& item) {
  auto it = vectors_.find(item.id);
  if (it == vectors_.end()) throw EmbeddingError("no embedding for id '" + item.id + "'");
  return it->second;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(std::string endpoint, std::string auth_env, double timeout_s,
                                                 std::string response_pointer)
    : endpoint_(std::move(endpoint)),
      auth_env_(std::move(auth_env)),
      timeout_s_(timeout_s),
      response_pointer_(std::move(response_pointer)) {
  if (endpoint_.find("://") == std::string::npos) throw EmbeddingError("embedding endpoint needs a scheme");
}

EmbeddingVector RemoteEmbeddingProvider::embed(const EmbeddingItem& item) {
  const auto scheme_end = endpoint_.find("://");
  const auto path_start = endpoint_.find('/', scheme_end + 3);
  const auto origin = endpoint_.substr(0, path_start);
  const auto path = path_start == std::string::npos ? std::string("/") : endpoint_.substr(path_start);

  nlohmann::json body{{"type", item.kind == EmbeddingItem::Kind::Image ? "image" : "text"}, {"id", item.id}};
  if (item.kind == EmbeddingItem::Kind::Image) {
    body["data"] = gateway::base64_encode(item.bytes);
  } else {
    body["data"] = std::string(reinterpret_cast<const char*>(item.bytes.data()), item.bytes.size());
  }

  httplib::Headers headers;
  if (!auth_env_.empty()) {
    const char* secret = std::getenv(auth_env_.c_str());
    if (secret == nullptr) throw EmbeddingError("environment variable " + auth_env_ + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + secret);
  }
  httplib::Client client(origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(timeout_s_));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw EmbeddingError("embedding request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw EmbeddingError("embedding endpoint returned HTTP " + std::to_string(res->status));

  std::vector<double> values;
  try {
    values = nlohmann::json::parse(res->body).at(nlohmann::json::json_pointer(response_pointer_)).get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw EmbeddingError(std::string("malformed embedding response: ") + e.what());
  }
  std::lock_guard lock(mutex_);
  if (dimension_ == 0) dimension_ = values.size();
  if (values.size() != dimension_) {
    throw EmbeddingError("embedding dimension " + std::to_string(values.size()) + " disagrees with earlier " +
                         std::to_string(dimension_));
  }
  return EmbeddingVector(std::move(values));
}

}  // namespace detvlm::metrics
