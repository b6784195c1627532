#include "tofloc/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tofloc {

void write_point_list(std::ostream& os, const PointCloud& cloud) {
    os.precision(17);
    for (const auto& p : cloud.points) os << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

void write_point_list(const std::string& path, const PointCloud& cloud) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_point_list: cannot open " + path);
    write_point_list(os, cloud);
}

PointCloud read_point_list(std::istream& is, Frame frame) {
    PointCloud cloud(frame);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double x, y, z;
        if (!(ss >> x >> y >> z)) throw std::invalid_argument("read_point_list: bad line: " + line);
        cloud.points.emplace_back(x, y, z);
    }
    return cloud;
}

PointCloud read_point_list(const std::string& path, Frame frame) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_point_list: cannot open " + path);
    return read_point_list(is, frame);
}

}  // namespace tofloc
