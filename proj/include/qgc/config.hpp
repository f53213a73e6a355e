#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qgc {

// "key = value" lines; '#' starts a comment line. Values may use the escapes
// \n, \t, \\ so multi-line templates fit on one line.
class FlatConfig {
 public:
  static FlatConfig parse(std::string_view text);
  static FlatConfig load(const std::filesystem::path& path);

  std::optional<std::string> get(std::string_view key) const;
  std::optional<double> get_double(std::string_view key) const;
  std::optional<std::uint64_t> get_uint(std::string_view key) const;

  /// Throws Config naming the first key not in `known`.
  void require_known(const std::vector<std::string_view>& known) const;

  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

}  // namespace qgc
