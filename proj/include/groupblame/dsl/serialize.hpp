#pragma once

#include <string>

#include "groupblame/blame/scenario.hpp"

namespace groupblame::dsl {

// Canonical scenario text. Parsing the result gives back an equal scenario,
// and serializing that again gives the same bytes.
//
// Throws SerializationError when the scenario cannot be written, e.g. an
// explicit state whose settings use different models or a name that is not
// an identifier.
std::string serialize(const blame::Scenario& scenario);

}  // namespace groupblame::dsl
