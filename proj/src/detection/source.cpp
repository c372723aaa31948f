#include "detvlm/detection/source.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "detvlm/errors.hpp"

namespace detvlm::detection {
namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string substitute_image(std::string templ, const std::string& quoted) {
  static constexpr std::string_view kPlaceholder = "{image}";
  for (auto pos = templ.find(kPlaceholder); pos != std::string::npos;
       pos = templ.find(kPlaceholder, pos + quoted.size())) {
    templ.replace(pos, kPlaceholder.size(), quoted);
  }
  return templ;
}

std::vector<Detection> run_external(const std::string& templ, const std::filesystem::path& image_path) {
  const auto abs = std::filesystem::absolute(image_path).lexically_normal();
  const auto command = substitute_image(templ, shell_quote(abs.string()));
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
  if (!pipe) throw DetectorError("cannot start detector command");
  std::string output;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe.get())) > 0) output.append(buf, n);
  const int status = pclose(pipe.release());
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw DetectorError("detector command failed for '" + abs.string() + "' (status " + std::to_string(status) + ")");
  }
  try {
    return parse_any_labels(output);
  } catch (const LabelParseError& e) {
    throw DetectorError(std::string("unparsable detector output: ") + e.what());
  }
}

std::vector<Detection> read_fixture(const std::string& path, const std::string& image_id) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DetectorError("fixture '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains(image_id)) {
    throw NoDetectionsError("no detections available for '" + image_id + "' in fixture '" + path + "'");
  }
  std::string text;
  for (const auto& line : doc.at(image_id)) {
    text += line.get<std::string>();
    text += '\n';
  }
  return parse_any_labels(text);
}

}  // namespace

SourceKind parse_source_kind(std::string_view name) {
  if (name == "label-directory") return SourceKind::LabelDirectory;
  if (name == "external-command") return SourceKind::ExternalCommand;
  if (name == "fixture") return SourceKind::Fixture;
  throw std::invalid_argument("unknown detection source kind '" + std::string(name) + "'");
}

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::LabelDirectory: return "label-directory";
    case SourceKind::ExternalCommand: return "external-command";
    case SourceKind::Fixture: return "fixture";
  }
  return "?";
}

void DetectionSource::validate() const {
  if (location.empty()) throw std::invalid_argument("detection source location is empty");
}

std::vector<Detection> parse_any_labels(std::string_view text) {
  // Decide the mode from the first record; parse_* reports mixed files.
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto eol = std::min(text.find('\n', first), text.size());
  auto line = text.substr(first, eol - first);
  std::size_t fields = 0;
  bool in_field = false;
  for (char c : line) {
    const bool space = c == ' ' || c == '\t' || c == '\r';
    if (!space && !in_field) ++fields;
    in_field = !space;
  }
  if (fields == 6) return parse_detections(text);
  std::vector<Detection> out;
  for (const auto& g : parse_ground_truth(text)) out.push_back({g.class_id, g.box, 1.0});
  return out;
}

std::vector<Detection> provide_detections(const DetectionSource& source, const std::string& image_id,
                                          const std::filesystem::path& image_path) {
  source.validate();
  switch (source.kind) {
    case SourceKind::LabelDirectory: {
      const auto path = std::filesystem::path(source.location) / (image_id + ".txt");
      if (!std::filesystem::is_regular_file(path)) {
        throw NoDetectionsError("no detections available for '" + image_id + "': missing " + path.string());
      }
      return parse_any_labels(read_text_file(path.string()));
    }
    case SourceKind::ExternalCommand:
      return run_external(source.location, image_path);
    case SourceKind::Fixture:
      return read_fixture(source.location, image_id);
  }
  throw std::logic_error("unreachable");
}

std::size_t count_objects(std::span<const Detection> dets, std::optional<int> class_filter, double min_confidence) {
  if (min_confidence < 0.0 || min_confidence > 1.0) throw std::invalid_argument("min_confidence outside [0,1]");
  return static_cast<std::size_t>(std::count_if(dets.begin(), dets.end(), [&](const Detection& d) {
    return (!class_filter || d.class_id == *class_filter) && d.confidence >= min_confidence;
  }));
}

}  // namespace detvlm::detection
