#pragma once

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <nlohmann/json.hpp>

#include "modgate/modelgw.hpp"

namespace modgate {

inline std::string HttpProvider::complete(const ProviderRequest& request) {
  auto ep = detail::split_endpoint(request.config.endpoint);
  httplib::Client client(ep.origin);
  auto timeout = request.config.request_timeout;
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  client.set_bearer_token_auth(api_key_);

  auto res = client.Post(ep.path, request_body(request), "application/json");
  if (!res) {
    auto err = res.error();
    bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
    throw TransientError("transport error: " + httplib::to_string(err), 0, timed_out);
  }
  if (detail::retryable_status(res->status)) {
    throw TransientError("HTTP " + std::to_string(res->status), res->status);
  }
  if (res->status < 200 || res->status >= 300) {
    throw ProviderError("HTTP " + std::to_string(res->status), res->status);
  }
  auto body = nlohmann::json::parse(res->body, nullptr, false);
  if (body.is_discarded()) throw ProviderError("response body is not JSON", res->status);
  const nlohmann::json::json_pointer where("/choices/0/message/content");
  try {
    if (body.is_object() && body.contains(where) && body.at(where).is_string()) {
      return body.at(where).get<std::string>();
    }
  } catch (const nlohmann::json::exception&) {
  }
  throw ProviderError("response has no choices[0].message.content", res->status);
}

}  // namespace modgate
