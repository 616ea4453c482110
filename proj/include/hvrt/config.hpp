#pragma once

#include <map>
#include <string>

#include "hvrt/engine.hpp"

namespace hvrt {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Provenance { defaulted, file, flag };

constexpr std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::defaulted: return "default";
        case Provenance::file: return "file";
        case Provenance::flag: return "flag";
    }
    return "?";
}

/// Resolved configuration: a full Scenario plus the SI parameter block it
/// may have been derived from, and per-key provenance.
struct ConfigDocument {
    Scenario scenario;
    MachineSi si;
    bool machine_si_active = true;  ///< electrical constants come from the SI block
    std::map<std::string, Provenance> provenance;  ///< "section.key"
};

/// All defaults: the published test system and the default study scenario.
ConfigDocument default_config();

/// Parses sectioned `key = value` text over the defaults. Unknown sections
/// or keys are rejected; SI and per-unit machine blocks are mutually
/// exclusive.
ConfigDocument parse_config(const std::string& text);

ConfigDocument load_config_file(const std::string& path);

/// Applies one `section.key=value` override (command-line provenance).
void apply_override(ConfigDocument& doc, const std::string& dotted, const std::string& value);

/// Re-derives dependent parameters (SI conversion, x_l) and validates.
void finalize(ConfigDocument& doc);

/// Canonical serialization; parses back to an identical resolved document.
std::string serialize(const ConfigDocument& doc);

/// Serialized config preceded by tool version and content hash, itself a
/// loadable config file.
std::string manifest_text(const ConfigDocument& doc);

uint64_t fnv1a_hash(std::string_view data);

}  // namespace hvrt
