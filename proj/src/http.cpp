// Copyright 2026 the tutoreval authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifdef TUTOREVAL_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "tutoreval/llm_client.hpp"

namespace tutoreval {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::ConfigError, "base URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.prefix = path_start == std::string::npos ? std::string() : url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

}  // namespace

std::string http_post_json(const HttpEndpoint& endpoint, std::string_view path, const std::string& body) {
  const SplitUrl url = split_url(endpoint.base_url);
#ifndef TUTOREVAL_HAVE_OPENSSL
  if (url.origin.rfind("https://", 0) == 0) {
    throw Error(ErrorCode::ConfigError, "built without OpenSSL; https endpoints are unavailable");
  }
#endif
  httplib::Client client(url.origin);
  client.set_connection_timeout(endpoint.timeout);
  client.set_read_timeout(endpoint.timeout);
  client.set_write_timeout(endpoint.timeout);
  httplib::Headers headers = {{"Authorization", "Bearer " + endpoint.api_key}};
  auto result = client.Post(url.prefix + std::string(path), headers, body, "application/json");
  if (!result) {
    throw Error(ErrorCode::TransportError, "request to " + url.origin + " failed: " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    std::string snippet = result->body.substr(0, 300);
    throw Error(error_for_status(result->status), "HTTP " + std::to_string(result->status) + ": " + snippet);
  }
  return result->body;
}

}  // namespace tutoreval
