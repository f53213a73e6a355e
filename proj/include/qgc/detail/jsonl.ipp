#pragma once

#include <fstream>
#include <string>

#include "qgc/error.hpp"

namespace qgc {

template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Validation, "cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      throw Error(ErrorKind::Validation,
                  path.string() + ": line " + std::to_string(line_no) + ": malformed JSON");
    }
    fn(j, line_no);
  }
}

}  // namespace qgc
