#ifndef UAML_JSON_HPP_
#define UAML_JSON_HPP_

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace uaml {

// Insertion-ordered so emitted documents keep the declared node, row and
// field order.
using Json = nlohmann::ordered_json;

// Reads and parses a JSON document; throws ParseError with the position of
// the first syntax error, or Error(kIo) if the file cannot be read.
Json read_json_file(const std::filesystem::path& path);

Json parse_json(const std::string& text, const std::string& origin = "<input>");

// Compact single-line dump with a trailing newline.
std::string dump_json(const Json& j, int indent = -1);

}  // namespace uaml

#endif  // UAML_JSON_HPP_
