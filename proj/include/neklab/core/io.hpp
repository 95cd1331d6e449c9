#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "neklab/core/grid_function.hpp"
#include "neklab/core/trig_poly.hpp"

namespace neklab::core {

using json = nlohmann::json;

inline constexpr const char* kTrigPolySchema = "neklab.trigpoly/1";
inline constexpr const char* kGridSchema = "neklab.grid/1";

json to_json(const TrigPoly& g);
TrigPoly trig_poly_from_json(const json& j);

enum class GridFormat { csv, binary };

/// One JSON header line followed by the row-major samples, either one value
/// per line or raw little-endian doubles.
void write_grid(std::ostream& os, const GridFunction& f, GridFormat format = GridFormat::csv);
GridFunction read_grid(std::istream& is);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

}  // namespace neklab::core
