#include "agentgraph/env/domain.hpp"

#include "agentgraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

namespace agentgraph {

Domain::Domain(std::string name, std::vector<Slot> slots, std::vector<Entity> entities)
    : name_(std::move(name)), slots_(std::move(slots)), entities_(std::move(entities)) {
  std::map<std::string, int> seen;
  for (int i = 0; i < static_cast<int>(slots_.size()); ++i) {
    const Slot& s = slots_[static_cast<std::size_t>(i)];
    if (!seen.emplace(s.name, i).second) throw ConfigurationError("domain " + name_ + ": duplicate slot '" + s.name + "'");
    if (s.informable) {
      if (s.values.size() < 2)
        throw ConfigurationError("domain " + name_ + ": informable slot '" + s.name + "' needs >= 2 values");
      informable_.push_back(i);
    } else if (s.requestable) {
      req_only_.push_back(i);
    }
  }
  if (informable_.empty()) throw ConfigurationError("domain " + name_ + ": no informable slots");
  if (entities_.empty()) throw ConfigurationError("domain " + name_ + ": empty database");
  for (const Entity& e : entities_) {
    if (e.values.size() != informable_.size() || e.info.size() != req_only_.size())
      throw ConfigurationError("domain " + name_ + ": entity '" + e.name + "' has the wrong number of fields");
    for (std::size_t k = 0; k < informable_.size(); ++k)
      if (e.values[k] < 0 || e.values[k] >= static_cast<int>(informable(static_cast<int>(k)).values.size()))
        throw ConfigurationError("domain " + name_ + ": entity '" + e.name + "' has an out-of-range value");
  }
}

int Domain::informable_position(int slot) const {
  for (std::size_t k = 0; k < informable_.size(); ++k)
    if (informable_[k] == slot) return static_cast<int>(k);
  return -1;
}

int Domain::slot_index(std::string_view name) const {
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<int> Domain::matching(const std::vector<int>& constraints) const {
  std::vector<int> out;
  for (int e = 0; e < static_cast<int>(entities_.size()); ++e) {
    const auto& v = entities_[static_cast<std::size_t>(e)].values;
    bool ok = true;
    for (std::size_t k = 0; k < constraints.size() && ok; ++k) ok = constraints[k] < 0 || v[k] == constraints[k];
    if (ok) out.push_back(e);
  }
  return out;
}

double Domain::value_entropy(int k) const {
  std::vector<double> counts(informable(k).values.size(), 0.0);
  for (const Entity& e : entities_) counts[static_cast<std::size_t>(e.values[static_cast<std::size_t>(k)])] += 1.0;
  double h = 0.0;
  for (double c : counts)
    if (c > 0) {
      const double p = c / static_cast<double>(entities_.size());
      h -= p * std::log(p);
    }
  return h;
}

std::string_view to_string(DomainId d) {
  switch (d) {
    case DomainId::CR3: return "CR3";
    case DomainId::SFR6: return "SFR6";
    case DomainId::LAP11: return "LAP11";
  }
  return "?";
}

DomainId parse_domain(std::string_view name) {
  for (DomainId d : {DomainId::CR3, DomainId::SFR6, DomainId::LAP11})
    if (to_string(d) == name) return d;
  throw ConfigurationError("unknown domain '" + std::string(name) + "' (valid: CR3, SFR6, LAP11)");
}

namespace {

struct SlotSpec {
  const char* name;
  std::vector<std::string> values;
  double skew;  // Zipf exponent of the value distribution in the database
};

// Raw engine output only: distribution objects are implementation-defined.
double unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

Domain generate(const std::string& name, const std::vector<SlotSpec>& inf, const std::vector<const char*>& req_only,
                int entity_count, std::uint64_t seed) {
  std::vector<Slot> slots;
  for (const auto& s : inf) slots.push_back({s.name, true, true, s.values});
  for (const char* r : req_only) slots.push_back({r, false, true, {}});
  std::mt19937_64 g(seed);
  std::vector<Entity> entities;
  for (int e = 0; e < entity_count; ++e) {
    Entity ent;
    ent.name = name + "-" + std::to_string(e);
    for (const auto& s : inf) {
      std::vector<double> cdf;
      double acc = 0;
      for (std::size_t j = 0; j < s.values.size(); ++j) cdf.push_back(acc += std::pow(double(j + 1), -s.skew));
      const double u = unit(g) * acc;
      int v = 0;
      while (v + 1 < static_cast<int>(cdf.size()) && cdf[static_cast<std::size_t>(v)] <= u) ++v;
      ent.values.push_back(v);
    }
    for (const char* r : req_only) ent.info.push_back(std::string(r) + "-of-" + ent.name);
    entities.push_back(std::move(ent));
  }
  return Domain(name, std::move(slots), std::move(entities));
}

Domain make_cr3() {
  return generate("CR3",
                  {{"food", {"british", "chinese", "french", "indian", "italian", "japanese", "korean", "mexican", "spanish", "thai", "turkish", "vietnamese"}, 0.6},
                   {"area", {"centre", "north", "south", "east", "west"}, 0.3},
                   {"pricerange", {"cheap", "moderate", "expensive"}, 0.0}},
                  {"phone", "address", "postcode"}, 30, 3);
}

Domain make_sfr6() {
  return generate("SFR6",
                  {{"food", {"american", "burgers", "chinese", "french", "indian", "italian", "japanese", "mexican", "pizza", "seafood", "sushi", "thai", "vegetarian", "vietnamese"}, 0.7},
                   {"area", {"castro", "chinatown", "marina", "mission", "nob hill", "north beach", "soma", "sunset"}, 0.4},
                   {"pricerange", {"cheap", "moderate", "expensive", "very expensive"}, 0.5},
                   {"near", {"civic center", "embarcadero", "ferry building", "fishermans wharf", "golden gate park", "haight", "lombard street", "union square", "ucsf", "zoo"}, 0.2},
                   {"goodformeal", {"breakfast", "brunch", "lunch", "dinner"}, 0.3},
                   {"allowedforkids", {"yes", "no"}, 0.8}},
                  {"phone", "address", "postcode"}, 100, 6);
}

Domain make_lap11() {
  return generate("LAP11",
                  {{"family", {"satellite", "tecra", "portege", "qosmio", "chromebook", "kira"}, 0.5},
                   {"batteryrating", {"standard", "good", "exceptional"}, 0.3},
                   {"drive", {"ssd", "hdd", "hybrid"}, 0.4},
                   {"driverange", {"small", "medium", "large"}, 0.1},
                   {"isforbusiness", {"true", "false"}, 0.6},
                   {"platform", {"windows", "linux", "chrome os"}, 0.9},
                   {"pricerange", {"budget", "moderate", "expensive"}, 0.2},
                   {"processorclass", {"celeron", "pentium", "core m", "i3", "i5", "i7", "a6", "a8"}, 0.5},
                   {"sysmemory", {"2gb", "4gb", "8gb", "16gb", "32gb"}, 0.4},
                   {"utility", {"gaming", "multimedia", "travel", "office"}, 0.2},
                   {"weightrange", {"light", "mid weight", "heavy"}, 0.3}},
                  {"price", "dimension", "warranty"}, 150, 11);
}

}  // namespace

const Domain& builtin_domain(DomainId d) {
  static const Domain cr3 = make_cr3();
  static const Domain sfr6 = make_sfr6();
  static const Domain lap11 = make_lap11();
  switch (d) {
    case DomainId::CR3: return cr3;
    case DomainId::SFR6: return sfr6;
    case DomainId::LAP11: return lap11;
  }
  throw ConfigurationError("unknown domain id");
}

nlohmann::json domain_to_json(const Domain& d) {
  nlohmann::json slots = nlohmann::json::array();
  for (const Slot& s : d.slots())
    slots.push_back({{"name", s.name}, {"informable", s.informable}, {"requestable", s.requestable}, {"values", s.values}});
  nlohmann::json ents = nlohmann::json::array();
  for (const Entity& e : d.entities()) {
    nlohmann::json vals = nlohmann::json::object();
    for (int k = 0; k < d.informable_count(); ++k)
      vals[d.informable(k).name] = d.informable(k).values[static_cast<std::size_t>(e.values[static_cast<std::size_t>(k)])];
    for (std::size_t r = 0; r < d.requestable_only().size(); ++r)
      vals[d.slots()[static_cast<std::size_t>(d.requestable_only()[r])].name] = e.info[r];
    ents.push_back({{"name", e.name}, {"values", vals}});
  }
  return {{"name", d.name()}, {"slots", slots}, {"entities", ents}};
}

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw CheckpointError(path + key + ": missing");
  return j.at(key);
}

std::string as_string(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw CheckpointError(path + ": expected a string");
  return j.get<std::string>();
}

}  // namespace

Domain domain_from_json(const nlohmann::json& j) {
  const std::string name = as_string(field(j, "name", ""), "name");
  const auto& js = field(j, "slots", "");
  if (!js.is_array()) throw CheckpointError("slots: expected an array");
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string p = "slots[" + std::to_string(i) + "].";
    Slot s;
    s.name = as_string(field(js[i], "name", p), p + "name");
    s.informable = js[i].value("informable", true);
    s.requestable = js[i].value("requestable", true);
    if (js[i].contains("values")) {
      if (!js[i]["values"].is_array()) throw CheckpointError(p + "values: expected an array");
      for (std::size_t v = 0; v < js[i]["values"].size(); ++v)
        s.values.push_back(as_string(js[i]["values"][v], p + "values[" + std::to_string(v) + "]"));
    }
    slots.push_back(std::move(s));
  }
  const auto& je = field(j, "entities", "");
  if (!je.is_array()) throw CheckpointError("entities: expected an array");
  std::vector<Entity> entities;
  for (std::size_t e = 0; e < je.size(); ++e) {
    const std::string p = "entities[" + std::to_string(e) + "].";
    Entity ent;
    ent.name = je[e].contains("name") ? as_string(je[e]["name"], p + "name") : name + "-" + std::to_string(e);
    const auto& vals = field(je[e], "values", p);
    for (const Slot& s : slots) {
      if (!s.informable && !s.requestable) continue;
      const std::string vp = p + "values." + s.name;
      if (!vals.contains(s.name)) throw CheckpointError(vp + ": missing");
      const std::string v = as_string(vals[s.name], vp);
      if (s.informable) {
        auto it = std::find(s.values.begin(), s.values.end(), v);
        if (it == s.values.end()) throw CheckpointError(vp + ": unknown value '" + v + "'");
        ent.values.push_back(static_cast<int>(it - s.values.begin()));
      } else {
        ent.info.push_back(v);
      }
    }
    entities.push_back(std::move(ent));
  }
  return Domain(name, std::move(slots), std::move(entities));
}

Domain load_domain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open domain file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError(path + ": " + e.what());
  }
  return domain_from_json(j);
}

}  // namespace agentgraph
