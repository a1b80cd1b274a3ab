#pragma once

#include <string>

#include "json.hpp"

#include "cgolab/field.hpp"

namespace cgolab {

using json = nlohmann::json;

json grid_to_json(const Grid& g);
Grid grid_from_json(const json& j);

/// Writes a field in the CDF1 layout: magic, header length, JSON header, payload.
/// The payload is ordered [level, x1, ..., xn, component] row-major.
template <class T>
void write_cdf1(const std::string& path, const Field<T>& f);

RealField read_cdf1_real(const std::string& path);
ComplexField read_cdf1_complex(const std::string& path);

/// Reads only the JSON header of a CDF1 file.
json read_cdf1_header(const std::string& path);

}  // namespace cgolab
