#pragma once

#include <string>
#include <vector>

#include "placecrb/model.hpp"
#include "placecrb/simulate.hpp"

namespace placecrb {

/// Parses the scenario text format (see README for the grammar). Parsing is
/// strict: unknown or duplicated keys raise ParseError with the line number.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Canonical text form; parse_scenario(write_scenario(s)) reproduces s
/// exactly (sensor angles re-emitted in degrees with a +/-ulp fix-up so the
/// radian value survives the unit round trip).
std::string write_scenario(const Scenario& s);

/// Parses a named-geometry list for sweep comparisons. Sensors are placed
/// relative to `source`; `reference_index` is inherited by every geometry.
std::vector<NamedGeometry> parse_geometries(const std::string& text,
                                            SourcePosition source,
                                            int reference_index = 0);
std::vector<NamedGeometry> load_geometries(const std::string& path,
                                           SourcePosition source,
                                           int reference_index = 0);

} // namespace placecrb
