#pragma once

#include "forge/layout.hpp"

#include <string>
#include <vector>

namespace forge {

/// Serializes a layout to the iontrap-layout/1 document (human-readable JSON with
/// sorted keys). save(load(d)) is the canonical form of d; vertex coordinates
/// round-trip exactly.
std::string save_layout(const TrapLayout& layout);

/// Parses and validates a layout document. Throws SchemaError (with the offending
/// field) or InvariantError (naming the violated invariant).
TrapLayout load_layout(const std::string& document);

/// All problems in a document, one message per line; empty means valid.
std::vector<std::string> validate_layout_document(const std::string& document);

}  // namespace forge
