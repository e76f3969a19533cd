#pragma once

#include <string>

namespace stab {

// Fixed notation with 6 decimals; NaN prints as "nan".
std::string fixed6(double v);

// Shortest round-trippable-enough decimal for file names and labels ("0.25", "1", "0.01").
std::string compact(double v);

}  // namespace stab
