#pragma once

#include <string>

#include "gatecell/harness.hpp"

namespace gatecell {

// Flat key/value run configuration: one `key = value` per line, `#` comments.
// Keys mirror the CLI flags; flags win over file values.
RunConfig load_config_file(const std::string& path);

// Applies one key/value pair; throws std::invalid_argument on unknown keys or
// unparseable values.
void apply_config_value(RunConfig& config, const std::string& key, const std::string& value);

} // namespace gatecell
