#include "tofra/scenario_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tofra {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw std::runtime_error(origin + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& origin,
                    const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    fail(origin, where + ": missing required field '" + key + "'");
  return *it;
}

double require_number(const json& obj, const char* key,
                      const std::string& origin, const std::string& where) {
  const json& v = require(obj, key, origin, where);
  if (!v.is_number())
    fail(origin, where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t require_uint(const json& obj, const char* key,
                           const std::string& origin, const std::string& where) {
  const json& v = require(obj, key, origin, where);
  if (!v.is_number_unsigned())
    fail(origin, where + ": field '" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text,
                                 const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(origin, std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail(origin, "top level must be an object");

  const auto version = require_uint(root, "format_version", origin, "scenario");
  if (version != kScenarioFormatVersion)
    fail(origin, "unsupported format_version " + std::to_string(version));

  Scenario s;
  const json& area = require(root, "area", origin, "scenario");
  s.area_w = require_number(area, "w", origin, "area");
  s.area_h = require_number(area, "h", origin, "area");

  const json& phy = require(root, "phy", origin, "scenario");
  s.phy.gamma = require_number(phy, "gamma", origin, "phy");
  s.phy.eta = require_number(phy, "eta", origin, "phy");
  s.phy.p_tx = require_number(phy, "p_tx", origin, "phy");
  s.phy.alpha = require_number(phy, "alpha", origin, "phy");
  s.phy.v = require_number(phy, "v", origin, "phy");

  const json& nodes = require(root, "nodes", origin, "scenario");
  if (!nodes.is_array()) fail(origin, "'nodes' must be an array");
  s.nodes.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const json& jn = nodes[i];
    if (!jn.is_object()) fail(origin, where + " must be an object");
    Node n;
    n.id = static_cast<NodeId>(require_uint(jn, "id", origin, where));
    n.pos.x = require_number(jn, "x", origin, where);
    n.pos.y = require_number(jn, "y", origin, where);
    const json& jrole = require(jn, "role", origin, where);
    if (!jrole.is_string()) fail(origin, where + ": field 'role' must be a string");
    const auto role = role_from_string(jrole.get<std::string>());
    if (!role)
      fail(origin, where + ": unknown role '" + jrole.get<std::string>() + "'");
    n.role = *role;
    if (jn.contains("tx_prob"))
      n.tx_prob = require_number(jn, "tx_prob", origin, where);
    s.nodes.push_back(n);
  }

  const json& flows = require(root, "flows", origin, "scenario");
  if (!flows.is_array()) fail(origin, "'flows' must be an array");
  s.flows.reserve(flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const std::string where = "flows[" + std::to_string(i) + "]";
    const json& jf = flows[i];
    if (!jf.is_object()) fail(origin, where + " must be an object");
    Flow f;
    f.id = static_cast<std::uint32_t>(require_uint(jf, "id", origin, where));
    f.source = static_cast<NodeId>(require_uint(jf, "src", origin, where));
    f.destination = static_cast<NodeId>(require_uint(jf, "dst", origin, where));
    if (jf.contains("path")) {
      const json& jp = jf["path"];
      if (!jp.is_array()) fail(origin, where + ": field 'path' must be an array");
      for (const json& je : jp) {
        if (!je.is_number_unsigned())
          fail(origin, where + ": path entries must be node ids");
        f.path.push_back(static_cast<NodeId>(je.get<std::uint64_t>()));
      }
    }
    s.flows.push_back(std::move(f));
  }

  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    fail(origin, e.what());
  }
  return s;
}

std::string scenario_to_json_text(const Scenario& scenario) {
  json root;
  root["format_version"] = kScenarioFormatVersion;
  root["area"] = {{"w", scenario.area_w}, {"h", scenario.area_h}};
  root["phy"] = {{"gamma", scenario.phy.gamma},
                 {"eta", scenario.phy.eta},
                 {"p_tx", scenario.phy.p_tx},
                 {"alpha", scenario.phy.alpha},
                 {"v", scenario.phy.v}};
  json nodes = json::array();
  for (const Node& n : scenario.nodes) {
    json jn = {{"id", n.id},
               {"x", n.pos.x},
               {"y", n.pos.y},
               {"role", to_string(n.role)}};
    if (n.role == NodeRole::Relay) jn["tx_prob"] = n.tx_prob;
    nodes.push_back(std::move(jn));
  }
  root["nodes"] = std::move(nodes);
  json flows = json::array();
  for (const Flow& f : scenario.flows) {
    json jf = {{"id", f.id}, {"src", f.source}, {"dst", f.destination}};
    jf["path"] = f.path;
    flows.push_back(std::move(jf));
  }
  root["flows"] = std::move(flows);
  return root.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str(), path);
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << scenario_to_json_text(scenario);
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace tofra
