#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "postprice/evaluation.hpp"
#include "postprice/model.hpp"

namespace postprice {

using Json = nlohmann::ordered_json;

// {"copies": K, "buyers": [{"support": [{"value": "3", "mass": "1/4"}, ...]}, ...]}
// Values and masses are written as exact strings; JSON numbers are also
// accepted on input. Throws SchemaError, or MalformedInstance for bad data.
Instance instance_from_json(const Json& j);
Json instance_to_json(const Instance& inst);

// {"steps": [{"buyer": 0, "price": "3"}, {"buyer": 2, "price": null}]}
SpmSchedule schedule_from_json(const Json& j);
Json schedule_to_json(const SpmSchedule& schedule);

// {"root": 0, "nodes": [{"buyer": 1, "price": "2", "on_sale": -1, "on_no_sale": 1}, ...]}
AspmTree tree_from_json(const Json& j);
Json tree_to_json(const AspmTree& tree);

// A schedule if the object has "steps", a tree if it has "nodes".
Mechanism mechanism_from_json(const Json& j);
Json mechanism_to_json(const Mechanism& mechanism);

// Throws std::runtime_error when the file cannot be read, SchemaError when
// it is not JSON.
Json read_json(const std::filesystem::path& path);
Instance read_instance(const std::filesystem::path& path);

// Two-space indented, trailing newline.
std::string dump(const Json& j);

// Throws std::runtime_error on failure.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace postprice
