/*
 Copyright 2026 The ts2c Authors.

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ts2c {

/// Axis-aligned integer box, half-open: pixel (px, py) is inside iff
/// x0 <= px < x1 and y0 <= py < y1. Construction rejects empty or negative
/// boxes, so every Box in circulation is valid.
class Box {
public:
    Box(int x0, int y0, int x1, int y1)
        : x0_(x0), y0_(y0), x1_(x1), y1_(y1)
    {
        if (x0 < 0 || y0 < 0) {
            throw std::invalid_argument("Box: negative coordinate in " + to_string());
        }
        if (x0 >= x1 || y0 >= y1) {
            throw std::invalid_argument("Box: empty extent in " + to_string());
        }
    }

    int x0() const noexcept { return x0_; }
    int y0() const noexcept { return y0_; }
    int x1() const noexcept { return x1_; }
    int y1() const noexcept { return y1_; }

    int width() const noexcept { return x1_ - x0_; }
    int height() const noexcept { return y1_ - y0_; }
    std::int64_t area() const noexcept
    {
        return static_cast<std::int64_t>(width()) * static_cast<std::int64_t>(height());
    }

    bool contains(const Box& other) const noexcept
    {
        return x0_ <= other.x0_ && y0_ <= other.y0_ && other.x1_ <= x1_ && other.y1_ <= y1_;
    }

    bool contains_pixel(int px, int py) const noexcept
    {
        return x0_ <= px && px < x1_ && y0_ <= py && py < y1_;
    }

    /// True when the box lies inside [0, image_w) x [0, image_h).
    bool within(int image_w, int image_h) const noexcept
    {
        return x1_ <= image_w && y1_ <= image_h;
    }

    std::string to_string() const
    {
        return "[" + std::to_string(x0_) + "," + std::to_string(y0_) + "," + std::to_string(x1_) + "," +
               std::to_string(y1_) + "]";
    }

    friend bool operator==(const Box&, const Box&) = default;

private:
    int x0_;
    int y0_;
    int x1_;
    int y1_;
};

inline std::ostream& operator<<(std::ostream& os, const Box& b) { return os << b.to_string(); }

inline std::optional<Box> intersection(const Box& a, const Box& b)
{
    const int x0 = std::max(a.x0(), b.x0());
    const int y0 = std::max(a.y0(), b.y0());
    const int x1 = std::min(a.x1(), b.x1());
    const int y1 = std::min(a.y1(), b.y1());
    if (x0 >= x1 || y0 >= y1) {
        return std::nullopt;
    }
    return Box(x0, y0, x1, y1);
}

inline std::int64_t intersection_area(const Box& a, const Box& b)
{
    const auto inter = intersection(a, b);
    return inter ? inter->area() : 0;
}

/// Intersection over union with half-open pixel areas.
inline double iou(const Box& a, const Box& b)
{
    const std::int64_t inter = intersection_area(a, b);
    if (inter == 0) {
        return 0.0;
    }
    const std::int64_t uni = a.area() + b.area() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Set difference outer \ inner. `inner` is always contained in `outer`.
struct RingRegion {
    Box outer;
    Box inner;

    std::int64_t pixel_count() const noexcept { return outer.area() - inner.area(); }
    bool empty() const noexcept { return pixel_count() == 0; }
};

namespace detail {

// Enlarged coordinates that land within rounding noise of an integer are
// treated as that integer, so 1.2 * 10 does not spill an extra pixel.
inline double snap_to_integer(double v)
{
    const double r = std::round(v);
    return std::abs(v - r) < 1e-9 ? r : v;
}

}  // namespace detail

/// Scales width and height by `ratio` about the box center, rounds outward
/// and clips to the image. The result always contains `b`.
inline Box enlarge(const Box& b, double ratio, int image_w, int image_h)
{
    if (!(ratio >= 1.0) || !std::isfinite(ratio)) {
        throw std::invalid_argument("enlarge: ratio must be >= 1, got " + std::to_string(ratio));
    }
    if (!b.within(image_w, image_h)) {
        throw std::invalid_argument("enlarge: box " + b.to_string() + " outside " + std::to_string(image_w) + "x" +
                                    std::to_string(image_h) + " image");
    }
    const double cx = 0.5 * (b.x0() + b.x1());
    const double cy = 0.5 * (b.y0() + b.y1());
    const double half_w = 0.5 * b.width() * ratio;
    const double half_h = 0.5 * b.height() * ratio;

    // Clip in floating point first; huge ratios must not overflow the int cast.
    const auto lo = [](double v) { return static_cast<int>(std::floor(detail::snap_to_integer(std::max(v, 0.0)))); };
    const auto hi = [](double v, int limit) {
        return static_cast<int>(std::ceil(detail::snap_to_integer(std::min(v, static_cast<double>(limit)))));
    };

    return Box(lo(cx - half_w), lo(cy - half_h), hi(cx + half_w, image_w), hi(cy + half_h, image_h));
}

inline RingRegion ring(const Box& b, double ratio, int image_w, int image_h)
{
    return RingRegion{enlarge(b, ratio, image_w, image_h), b};
}

}  // namespace ts2c
