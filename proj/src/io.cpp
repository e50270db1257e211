#include "postprice/io.hpp"

#include <fstream>
#include <sstream>

#include "postprice/error.hpp"

namespace postprice {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

Rational rational_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_number_unsigned()) return Rational(v.get<unsigned long long>());
    if (v.is_number_float()) return from_decimal_double(v.get<double>());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("field \"") + key + "\": " + e.what());
  }
  throw SchemaError(std::string("field \"") + key + "\" must be a number or a numeric string");
}

long long integer_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_integer()) throw SchemaError(std::string("field \"") + key + "\" must be an integer");
  return v.get<long long>();
}

const Json& array_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_array()) throw SchemaError(std::string("field \"") + key + "\" must be an array");
  return v;
}

}  // namespace

Instance instance_from_json(const Json& j) {
  const long long copies = integer_field(j, "copies");
  if (copies < 1 || copies > 1'000'000) throw MalformedInstance("copies must be a positive integer");
  bool allow = false;
  if (j.contains("allow_copies_above_buyers")) {
    if (!j.at("allow_copies_above_buyers").is_boolean()) {
      throw SchemaError("field \"allow_copies_above_buyers\" must be a boolean");
    }
    allow = j.at("allow_copies_above_buyers").get<bool>();
  }
  std::vector<BuyerDistribution> buyers;
  for (const auto& b : array_field(j, "buyers")) {
    std::vector<SupportPoint> support;
    for (const auto& p : array_field(b, "support")) {
      support.push_back(SupportPoint{rational_field(p, "value"), rational_field(p, "mass")});
    }
    buyers.emplace_back(std::move(support));
  }
  return Instance(std::move(buyers), static_cast<int>(copies), allow);
}

Json instance_to_json(const Instance& inst) {
  Json j;
  j["copies"] = inst.copies();
  if (inst.allows_copies_above_buyers()) j["allow_copies_above_buyers"] = true;
  Json buyers = Json::array();
  for (const auto& b : inst.buyers()) {
    Json support = Json::array();
    for (const auto& p : b.support()) {
      Json point;
      point["value"] = format_rational(p.value);
      point["mass"] = format_rational(p.mass);
      support.push_back(std::move(point));
    }
    Json buyer;
    buyer["support"] = std::move(support);
    buyers.push_back(std::move(buyer));
  }
  j["buyers"] = std::move(buyers);
  return j;
}

SpmSchedule schedule_from_json(const Json& j) {
  SpmSchedule schedule;
  for (const auto& step : array_field(j, "steps")) {
    const long long buyer = integer_field(step, "buyer");
    if (buyer < 0) throw SchemaError("buyer index must be non-negative");
    Offer offer{static_cast<std::size_t>(buyer), std::nullopt};
    if (!field(step, "price").is_null()) offer.price = rational_field(step, "price");
    schedule.steps.push_back(std::move(offer));
  }
  return schedule;
}

Json schedule_to_json(const SpmSchedule& schedule) {
  Json steps = Json::array();
  for (const auto& s : schedule.steps) {
    Json step;
    step["buyer"] = s.buyer;
    step["price"] = s.price ? Json(format_rational(*s.price)) : Json(nullptr);
    steps.push_back(std::move(step));
  }
  Json j;
  j["steps"] = std::move(steps);
  return j;
}

AspmTree tree_from_json(const Json& j) {
  AspmTree tree;
  tree.root = static_cast<int>(integer_field(j, "root"));
  for (const auto& n : array_field(j, "nodes")) {
    const long long buyer = integer_field(n, "buyer");
    if (buyer < 0) throw SchemaError("buyer index must be non-negative");
    tree.nodes.push_back(AspmNode{static_cast<std::size_t>(buyer), rational_field(n, "price"),
                                  static_cast<int>(integer_field(n, "on_sale")),
                                  static_cast<int>(integer_field(n, "on_no_sale"))});
  }
  return tree;
}

Json tree_to_json(const AspmTree& tree) {
  Json nodes = Json::array();
  for (const auto& n : tree.nodes) {
    Json node;
    node["buyer"] = n.buyer;
    node["price"] = format_rational(n.price);
    node["on_sale"] = n.on_sale;
    node["on_no_sale"] = n.on_no_sale;
    nodes.push_back(std::move(node));
  }
  Json j;
  j["root"] = tree.root;
  j["nodes"] = std::move(nodes);
  return j;
}

Mechanism mechanism_from_json(const Json& j) {
  if (j.is_object() && j.contains("steps")) return schedule_from_json(j);
  if (j.is_object() && j.contains("nodes")) return tree_from_json(j);
  throw SchemaError("mechanism needs \"steps\" (schedule) or \"nodes\" (tree)");
}

Json mechanism_to_json(const Mechanism& mechanism) {
  if (const auto* s = std::get_if<SpmSchedule>(&mechanism)) return schedule_to_json(*s);
  return tree_to_json(std::get<AspmTree>(mechanism));
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

Instance read_instance(const std::filesystem::path& path) {
  try {
    return instance_from_json(read_json(path));
  } catch (const Json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace postprice
