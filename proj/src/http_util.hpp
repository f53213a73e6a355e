#pragma once

#include <string>
#include <string_view>

#include "qgc/error.hpp"

namespace qgc::detail {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/'
};

inline UrlParts split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || scheme_end == 0) {
    throw Error(ErrorKind::Config, "malformed endpoint URL '" + std::string(url) + "'");
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorKind::Config, "unsupported URL scheme '" + std::string(scheme) + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  UrlParts parts;
  parts.origin = std::string(url.substr(0, path_start));
  parts.path = path_start == std::string_view::npos ? "/" : std::string(url.substr(path_start));
  if (parts.origin.size() <= scheme_end + 3) {
    throw Error(ErrorKind::Config, "endpoint URL has no host: '" + std::string(url) + "'");
  }
  return parts;
}

}  // namespace qgc::detail
