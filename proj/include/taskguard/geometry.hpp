#pragma once

#include <algorithm>

namespace taskguard {

// Axis-aligned pixel box, inclusive-exclusive is not modeled; coordinates are
// plain ints with x_min < x_max and y_min < y_max for well-formed boxes.
struct BBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    bool operator==(const BBox&) const = default;

    bool well_formed() const { return x_min < x_max && y_min < y_max; }
    double center_x() const { return 0.5 * (x_min + x_max); }
    double center_y() const { return 0.5 * (y_min + y_max); }
    long long area() const {
        return static_cast<long long>(x_max - x_min) * (y_max - y_min);
    }
};

// Length of the overlap of the two boxes' vertical intervals, in pixels.
// Positive means the boxes share at least one horizontal scanline.
inline int vertical_overlap(const BBox& a, const BBox& b) {
    return std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
}

inline double iou(const BBox& a, const BBox& b) {
    const int ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const int iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0 || iy <= 0) return 0.0;
    const double inter = static_cast<double>(ix) * iy;
    const double uni = static_cast<double>(a.area()) + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

}  // namespace taskguard
