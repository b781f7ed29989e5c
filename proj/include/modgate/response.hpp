#pragma once

#include <chrono>
#include <string>

namespace modgate {

// A model answer exactly as received. `content` is never altered after
// receipt, including when it is malformed.
struct RawResponse {
  std::string request_digest;
  std::string model_id;
  std::string content;
  std::chrono::milliseconds latency{0};
  unsigned attempt = 0;  // provider attempts made; 0 when served from cache
  bool from_cache = false;
};

}  // namespace modgate
