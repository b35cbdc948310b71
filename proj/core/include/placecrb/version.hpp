#pragma once

namespace placecrb {

inline constexpr const char* kVersion = "0.1.0";

} // namespace placecrb
