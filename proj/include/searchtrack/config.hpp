#pragma once

#include "searchtrack/sim.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace searchtrack::config {

/// Decodes a scenario document. `overrides` are "dotted.key=value" pairs
/// applied to the document before decoding (values use document syntax, so
/// lists such as "[2,3,4]" work). Unset fields keep their defaults.
/// Throws ParseError for syntax errors, unknown keys and type mismatches, and
/// ValidationError when the decoded scenario violates an invariant.
sim::Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides = {});

/// Reads and decodes a scenario file. Throws IoError when it cannot be read.
sim::Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Fully resolved document; `parse_scenario(serialize(s)) == s`.
std::string serialize(const sim::Scenario& scenario);

/// Names of the fixture scenarios compiled into the library.
std::vector<std::string> fixture_names();
/// Text of a compiled-in fixture. Throws ValidationError for unknown names.
const std::string& fixture_text(const std::string& name);

}  // namespace searchtrack::config
