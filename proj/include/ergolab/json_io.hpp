#ifndef ERGOLAB_JSON_IO_HPP
#define ERGOLAB_JSON_IO_HPP

#include <ergolab/bernoulli.hpp>
#include <ergolab/cayley.hpp>
#include <ergolab/coinduction.hpp>
#include <ergolab/eqrel.hpp>

#include <json.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergolab {

using nlohmann::json;

/// Config/schema violation carrying the offending field path.
struct SchemaError : std::runtime_error {
    std::string path;
    explicit SchemaError(std::string p, const std::string& what)
        : std::runtime_error(p + ": " + what), path(std::move(p)) {}
};

/// Canonical serialization: weights as "a/b" strings, classes and
/// automorphisms in sorted-id order (the structures are already canonical).
inline json eqrel_to_json(const EqRel& rel, const std::vector<Automorphism>& autos = {}) {
    json j;
    j["weights"] = json::array();
    for (const Rat& w : rel.space.weight) j["weights"].push_back(rat_str(w));
    j["classes"] = json::array();
    for (const auto& c : rel.classes) j["classes"].push_back(c);
    j["automorphisms"] = json::array();
    for (const auto& a : autos) j["automorphisms"].push_back(a.map);
    return j;
}

inline EqRel eqrel_from_json(const json& j, std::vector<Automorphism>* autos = nullptr) {
    if (!j.contains("weights") || !j["weights"].is_array())
        throw SchemaError("weights", "missing or not an array");
    if (!j.contains("classes") || !j["classes"].is_array())
        throw SchemaError("classes", "missing or not an array");
    std::vector<Rat> w;
    for (const auto& s : j["weights"]) {
        if (s.is_string())
            w.push_back(parse_rat(s.get<std::string>()));
        else if (s.is_number())
            w.push_back(Rat(static_cast<long long>(std::llround(s.get<double>() * 1e12)),
                            1000000000000ll));
        else
            throw SchemaError("weights", "entry must be a rational string or number");
    }
    std::vector<std::vector<int>> parts;
    for (const auto& c : j["classes"]) parts.push_back(c.get<std::vector<int>>());
    EqRel rel = EqRel::from_classes(ProbSpace(std::move(w)), std::move(parts));
    if (autos) {
        autos->clear();
        if (j.contains("automorphisms"))
            for (const auto& a : j["automorphisms"]) {
                Automorphism m(a.get<std::vector<int>>());
                if (!m.valid_for(rel)) throw SchemaError("automorphisms", "map not in the full group");
                autos->push_back(std::move(m));
            }
    }
    return rel;
}

/// Window builder: {"type":"free","rank":r,"radius":d},
/// {"type":"tree","degree":k,"radius":d}, {"type":"grid","dims":[..]}, or
/// {"type":"perm","generators":[[..]..]}.
inline CayleyWindow window_from_json(const json& j) {
    if (!j.contains("type") || !j["type"].is_string()) throw SchemaError("window.type", "missing");
    const std::string type = j["type"].get<std::string>();
    auto need_int = [&j](const char* key) {
        if (!j.contains(key) || !j[key].is_number_integer())
            throw SchemaError(std::string("window.") + key, "missing integer");
        return j[key].get<int>();
    };
    if (type == "free") return free_group_window(need_int("rank"), need_int("radius"));
    if (type == "tree") return tree_window(need_int("degree"), need_int("radius"));
    if (type == "grid") {
        if (!j.contains("dims") || !j["dims"].is_array())
            throw SchemaError("window.dims", "missing array");
        return grid_window(j["dims"].get<std::vector<int>>());
    }
    if (type == "perm") {
        if (!j.contains("generators") || !j["generators"].is_array())
            throw SchemaError("window.generators", "missing array");
        return perm_window(j["generators"].get<std::vector<std::vector<int>>>());
    }
    throw SchemaError("window.type", "unknown type " + type);
}

inline json extension_to_json(const BernoulliExtension& bx) {
    json j;
    j["base"] = json::object();
    j["base"]["symbols"] = bx.base.symbols;
    j["base"]["weights"] = json::array();
    for (const Rat& w : bx.base.weight) j["base"]["weights"].push_back(rat_str(w));
    j["relation"] = eqrel_to_json(bx.ext);
    j["proj"] = bx.proj;
    return j;
}

inline json witness_to_json(const IsoWitness& w) {
    json j;
    j["map"] = w.map;
    j["bijective"] = w.bijective;
    j["measurePreserving"] = w.measurePreserving;
    j["relationIso"] = w.relationIso;
    j["commutes"] = w.commutes;
    return j;
}

inline json choice_system_to_json(const ChoiceSystem& cs) {
    json j;
    j["N"] = cs.N;
    j["choice"] = json::array();
    for (const auto& c : cs.choice) j["choice"].push_back(c.map);
    json perms = json::array(), deltas = json::array();
    for (const auto& c : cs.rel.classes)
        for (int x : c)
            for (int xp : c) {
                json row;
                row["x"] = x;
                row["xp"] = xp;
                row["perm"] = cs.perm(x, xp);
                row["delta"] = cs.delta(x, xp);
                perms.push_back(row);
            }
    j["cocycles"] = perms;
    return j;
}

}  // namespace ergolab

#endif
