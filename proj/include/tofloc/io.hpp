#pragma once

#include <iosfwd>
#include <string>

#include "tofloc/geometry.hpp"

namespace tofloc {

// Plain-text point list: one "x y z" triple per line.
void write_point_list(std::ostream& os, const PointCloud& cloud);
void write_point_list(const std::string& path, const PointCloud& cloud);
PointCloud read_point_list(std::istream& is, Frame frame);
PointCloud read_point_list(const std::string& path, Frame frame);

}  // namespace tofloc
