#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace detvlm::gateway {

// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

// Content hash identifying a request: SHA-256 over the length-prefixed
// backend name, model id, prompt and image bytes.
std::string request_digest(std::string_view backend, std::string_view model_id, std::string_view prompt,
                           std::span<const std::uint8_t> image_bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace detvlm::gateway
