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

#pragma once

// Private JSON helpers shared by the file-format code.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "offyaw/error.hpp"
#include "offyaw/geometry.hpp"

namespace offyaw::detail {

using nlohmann::json;

// Parses `text`, turning nlohmann parse errors into kParse errors that name
// the 1-based line and column of the failure.
json ParseJson(const std::string& text, const std::string& origin);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, const std::string& bytes);

// Field access with kParse diagnostics naming `where`.
const json& Field(const json& object, const char* key, const std::string& where);
double Number(const json& value, const std::string& where);
geometry::Point2 PointFromJson(const json& value, const std::string& where);
json PointToJson(geometry::Point2 p);

json PoseToJson(const geometry::Pose& pose);
geometry::Pose PoseFromJson(const json& value, const std::string& where);

// Shortest representation that round-trips, for CSV output.
std::string FormatDouble(double v);

}  // namespace offyaw::detail
