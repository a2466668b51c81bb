#include "uaml/json.hpp"

#include <fstream>
#include <sstream>

#include "uaml/error.hpp"

namespace uaml {

namespace {

// Converts a byte offset into a 1-based line/column pair.
std::pair<int, int> position_of(const std::string& text, std::size_t offset) {
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, column] =
        position_of(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(ErrorCode::kSyntax, origin + ": invalid JSON", line,
                     column);
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path.string());
}

std::string dump_json(const Json& j, int indent) {
  return j.dump(indent) + "\n";
}

}  // namespace uaml
