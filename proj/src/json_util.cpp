/* Copyright 2026 The offyaw Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "json_util.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace offyaw::detail {

json ParseJson(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t offset = e.byte == 0 ? 0 : std::min(e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::kParse, origin + ":" + std::to_string(line) + ":" +
                                       std::to_string(column) + ": " + e.what());
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "failed reading " + path.string());
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

const json& Field(const json& object, const char* key, const std::string& where) {
  if (!object.is_object()) {
    throw Error(ErrorCode::kParse, where + ": expected an object");
  }
  auto it = object.find(key);
  if (it == object.end()) {
    throw Error(ErrorCode::kParse, where + ": missing field '" + key + "'");
  }
  return *it;
}

double Number(const json& value, const std::string& where) {
  if (!value.is_number()) throw Error(ErrorCode::kParse, where + ": expected a number");
  return value.get<double>();
}

geometry::Point2 PointFromJson(const json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 2) {
    throw Error(ErrorCode::kParse, where + ": expected an [x, y] pair");
  }
  return {Number(value[0], where), Number(value[1], where)};
}

json PointToJson(geometry::Point2 p) { return json::array({p.x, p.y}); }

json PoseToJson(const geometry::Pose& pose) {
  return {{"x", pose.position.x},
          {"y", pose.position.y},
          {"heading_deg", pose.heading.degrees()}};
}

geometry::Pose PoseFromJson(const json& value, const std::string& where) {
  return {{Number(Field(value, "x", where), where + ".x"),
           Number(Field(value, "y", where), where + ".y")},
          geometry::AngleDeg(
              Number(Field(value, "heading_deg", where), where + ".heading_deg"))};
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace offyaw::detail
