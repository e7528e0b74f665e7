#pragma once

#include "suscept/map.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace suscept {

// A parsed scenario config: map family, observable and perturbation
// expressions, and a tree of command-specific parameters. The canonical
// serialization sorts keys recursively, so two semantically identical
// configs hash to the same 64-bit digest regardless of key order.
struct Scenario {
    MapSpec map;
    std::string observable;   // expression text, empty when absent
    std::string perturbation; // expression text, empty when absent
    std::string canonical;    // sorted-key serialization
    std::uint64_t hash = 0;   // FNV-1a 64 over the canonical form

    // opaque parsed config, consulted through the lookup helpers below
    std::shared_ptr<const void> tree;
};

std::uint64_t fnv1a64(std::string_view s);

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// Applies "dotted.path=value" pairs (comma separated) into the config and
// re-canonicalizes; values parse as JSON scalars with string fallback.
void apply_overrides(Scenario& sc, const std::string& overrides);

// Parameter lookup by dotted path under the config root ("params.tol").
// Missing keys return the fallback; present keys of the wrong shape throw
// ConfigError.
bool scenario_has(const Scenario& sc, const std::string& key);
double scenario_num(const Scenario& sc, const std::string& key, double fallback);
std::vector<double> scenario_nums(const Scenario& sc, const std::string& key,
                                  std::vector<double> fallback);
std::string scenario_str(const Scenario& sc, const std::string& key,
                         std::string fallback);

} // namespace suscept
