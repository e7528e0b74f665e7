#include "suscept/scenario.hpp"

#include "suscept/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace suscept {

namespace {

using nlohmann::json;

const json& tree_of(const Scenario& sc) {
    if (!sc.tree) throw ConfigError("scenario carries no parsed config");
    return *static_cast<const json*>(sc.tree.get());
}

// walks "a.b.c" into the tree; nullptr when any segment is missing
const json* walk(const json& root, const std::string& key) {
    const json* node = &root;
    std::size_t pos = 0;
    while (pos <= key.size()) {
        const std::size_t dot = key.find('.', pos);
        const std::string seg = key.substr(pos, dot == std::string::npos
                                                    ? std::string::npos
                                                    : dot - pos);
        if (!node->is_object() || !node->contains(seg)) return nullptr;
        node = &(*node)[seg];
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    return node;
}

MapSpec map_from_json(const json& j) {
    if (!j.is_object() || !j.contains("family"))
        throw ConfigError("config needs map.family");
    MapSpec spec;
    spec.a = j.value("a", 0.0);
    spec.b = j.value("b", 1.0);
    const std::string family = j.at("family").get<std::string>();
    if (family == "tent") {
        TentParams p;
        p.slope = j.value("slope", 2.0);
        spec.family = p;
    } else if (family == "skewed") {
        SkewedTentParams p;
        p.c = j.value("c", 0.5);
        p.h = j.value("h", 1.0);
        spec.family = p;
    } else if (family == "poly") {
        PolyParams p;
        if (!j.contains("left") || !j.contains("right"))
            throw ConfigError("poly map needs left and right coefficient arrays");
        p.left = j.at("left").get<std::vector<double>>();
        p.right = j.at("right").get<std::vector<double>>();
        p.c = j.value("c", 0.5);
        spec.family = p;
    } else {
        throw ConfigError("unknown map family '" + family + "'");
    }
    return spec;
}

Scenario from_tree(json j) {
    Scenario sc;
    if (!j.is_object()) throw ConfigError("config root must be an object");
    if (!j.contains("map")) throw ConfigError("config needs a map section");
    sc.map = map_from_json(j.at("map"));
    if (j.contains("observable"))
        sc.observable = j.at("observable").get<std::string>();
    if (j.contains("perturbation"))
        sc.perturbation = j.at("perturbation").get<std::string>();
    // nlohmann's default object is key-sorted, so dump() is canonical
    sc.canonical = j.dump();
    sc.hash = fnv1a64(sc.canonical);
    sc.tree = std::shared_ptr<const void>(new json(std::move(j)),
                                          [](const void* p) {
                                              delete static_cast<const json*>(p);
                                          });
    return sc;
}

} // namespace

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Scenario parse_scenario(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON");
    return from_tree(std::move(j));
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void apply_overrides(Scenario& sc, const std::string& overrides) {
    if (overrides.empty()) return;
    json j = tree_of(sc); // copy, then mutate
    std::size_t pos = 0;
    while (pos < overrides.size()) {
        std::size_t comma = overrides.find(',', pos);
        if (comma == std::string::npos) comma = overrides.size();
        const std::string pair = overrides.substr(pos, comma - pos);
        const std::size_t eq = pair.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("override '" + pair + "' is not key=value");
        const std::string key = pair.substr(0, eq);
        const std::string raw = pair.substr(eq + 1);
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw; // keep as a string
        json* node = &j;
        std::size_t kpos = 0;
        for (;;) {
            const std::size_t dot = key.find('.', kpos);
            const std::string seg = key.substr(kpos, dot == std::string::npos
                                                         ? std::string::npos
                                                         : dot - kpos);
            if (seg.empty()) throw ConfigError("override key '" + key +
                                               "' has an empty segment");
            if (dot == std::string::npos) {
                (*node)[seg] = value;
                break;
            }
            node = &(*node)[seg];
            kpos = dot + 1;
        }
        pos = comma + 1;
    }
    Scenario updated = from_tree(std::move(j));
    sc = std::move(updated);
}

bool scenario_has(const Scenario& sc, const std::string& key) {
    return walk(tree_of(sc), key) != nullptr;
}

double scenario_num(const Scenario& sc, const std::string& key, double fallback) {
    const json* node = walk(tree_of(sc), key);
    if (!node) return fallback;
    if (!node->is_number())
        throw ConfigError("config key '" + key + "' is not a number");
    return node->get<double>();
}

std::vector<double> scenario_nums(const Scenario& sc, const std::string& key,
                                  std::vector<double> fallback) {
    const json* node = walk(tree_of(sc), key);
    if (!node) return fallback;
    if (!node->is_array())
        throw ConfigError("config key '" + key + "' is not an array");
    std::vector<double> out;
    for (const auto& v : *node) {
        if (!v.is_number())
            throw ConfigError("config key '" + key + "' mixes non-numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::string scenario_str(const Scenario& sc, const std::string& key,
                         std::string fallback) {
    const json* node = walk(tree_of(sc), key);
    if (!node) return fallback;
    if (!node->is_string())
        throw ConfigError("config key '" + key + "' is not a string");
    return node->get<std::string>();
}

} // namespace suscept
