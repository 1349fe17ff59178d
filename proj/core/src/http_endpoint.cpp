#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cpc/endpoint.hpp"
#include "cpc/error.hpp"
#include "cpc/hash.hpp"

namespace cpc {
namespace {

using nlohmann::ordered_json;

std::string image_data_url(const std::filesystem::path& image) {
  return "data:image/png;base64," + base64_encode(read_file_bytes(image));
}

}  // namespace

HttpChatEndpoint::HttpChatEndpoint(EndpointConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto scheme_end = config_.base_url.find("://") + 3;
  const auto path_start = config_.base_url.find('/', scheme_end);
  scheme_host_port_ = config_.base_url.substr(0, path_start);
  if (path_start != std::string::npos) path_prefix_ = config_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpChatEndpoint::request_body(const EndpointConfig& config, std::string_view prompt,
                                           std::span<const std::filesystem::path> images) {
  ordered_json content = ordered_json::array();
  content.push_back({{"type", "text"}, {"text", prompt}});
  for (const auto& img : images) {
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", image_data_url(img)}}}});
  }
  ordered_json body = {
      {"model", config.model_name},
      {"messages", ordered_json::array({{{"role", "user"}, {"content", content}}})},
      {"temperature", EndpointConfig::kTemperature},
  };
  return body.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

std::string HttpChatEndpoint::parse_response(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    // Some servers return a list of content parts.
    std::string text;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") text += part.value("text", "");
    }
    return text;
  } catch (const nlohmann::json::exception& e) {
    throw EndpointFailure(std::string("unexpected response body: ") + e.what());
  }
}

std::string HttpChatEndpoint::complete(std::string_view prompt, std::span<const std::filesystem::path> images) {
  const std::string body = request_body(config_, prompt, images);

  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(config_.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    const std::string what = httplib::to_string(err);
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) throw Timeout(what);
    if (err == httplib::Error::Connection || err == httplib::Error::Write) throw TransientFailure(what);
    throw EndpointFailure(what);
  }
  const int status = res->status;
  if (status == 401 || status == 403) throw AuthFailure("HTTP " + std::to_string(status));
  if (status == 408 || status == 409 || status == 429 || status >= 500) {
    throw TransientFailure("HTTP " + std::to_string(status));
  }
  if (status < 200 || status >= 300) {
    throw EndpointFailure("HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200));
  }
  return parse_response(res->body);
}

}  // namespace cpc
