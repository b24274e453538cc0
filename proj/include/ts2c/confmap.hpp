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
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ts2c/geometry.hpp"

namespace ts2c {

/// Unvalidated per-pixel map, e.g. a raw class activation map whose values
/// have not been normalized yet.
struct RawMap {
    int class_id = 0;
    int width = 0;
    int height = 0;
    std::vector<float> values;
};

/// One class's per-pixel confidence, row-major, every value in [0, 1].
class ConfMap {
public:
    ConfMap(int class_id, int width, int height, std::vector<float> values)
        : class_id_(class_id), width_(width), height_(height), values_(std::move(values))
    {
        if (width <= 0 || height <= 0) {
            throw std::invalid_argument("ConfMap: non-positive dimensions " + std::to_string(width) + "x" +
                                        std::to_string(height));
        }
        if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw std::invalid_argument("ConfMap: expected " + std::to_string(std::size_t(width) * height) +
                                        " values, got " + std::to_string(values_.size()));
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const float v = values_[i];
            // Written so that NaN fails the check.
            if (!(v >= 0.0f && v <= 1.0f)) {
                throw std::invalid_argument("ConfMap: value " + std::to_string(v) + " at index " + std::to_string(i) +
                                            " outside [0,1]");
            }
        }
    }

    explicit ConfMap(RawMap raw) : ConfMap(raw.class_id, raw.width, raw.height, std::move(raw.values)) {}

    static ConfMap filled(int class_id, int width, int height, float value)
    {
        return ConfMap(class_id, width, height,
                       std::vector<float>(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), value));
    }

    int class_id() const noexcept { return class_id_; }
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    Box bounds() const { return Box(0, 0, width_, height_); }

    float at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const float> values() const noexcept { return values_; }
    std::span<const float> row(int y) const
    {
        return std::span<const float>(values_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }

    bool contains(const Box& b) const noexcept { return b.within(width_, height_); }

    friend bool operator==(const ConfMap&, const ConfMap&) = default;

private:
    int class_id_;
    int width_;
    int height_;
    std::vector<float> values_;
};

/// Summed-area table over a ConfMap: entry (i, j) holds the sum of all values
/// with x < i and y < j, accumulated in double precision.
class IntegralImage {
public:
    explicit IntegralImage(const ConfMap& m)
        : width_(m.width()), height_(m.height()),
          sums_(static_cast<std::size_t>(m.width() + 1) * static_cast<std::size_t>(m.height() + 1), 0.0)
    {
        const std::size_t stride = static_cast<std::size_t>(width_) + 1;
        for (int y = 0; y < height_; ++y) {
            const auto src = m.row(y);
            const double* above = &sums_[static_cast<std::size_t>(y) * stride];
            double* dst = &sums_[static_cast<std::size_t>(y + 1) * stride];
            double row_sum = 0.0;
            for (int x = 0; x < width_; ++x) {
                row_sum += src[x];
                dst[x + 1] = above[x + 1] + row_sum;
            }
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    double at(int i, int j) const { return sums_[static_cast<std::size_t>(j) * (width_ + 1) + i]; }

    /// Four-corner query; `b` must lie inside the map.
    double box_sum(const Box& b) const
    {
        return at(b.x1(), b.y1()) - at(b.x0(), b.y1()) - at(b.x1(), b.y0()) + at(b.x0(), b.y0());
    }

private:
    int width_;
    int height_;
    std::vector<double> sums_;
};

inline IntegralImage build_integral(const ConfMap& m) { return IntegralImage(m); }

/// Mean confidence over `b`, clamped to [0, 1] against cancellation noise.
inline double box_mean(const IntegralImage& ii, const Box& b)
{
    const double mean = ii.box_sum(b) / static_cast<double>(b.area());
    return std::clamp(mean, 0.0, 1.0);
}

/// Visits the ring in row-major order as contiguous row segments, skipping
/// the inner box.
template <typename SegmentFn>
void for_each_ring_segment(const ConfMap& m, const RingRegion& r, SegmentFn&& fn)
{
    const Box& o = r.outer;
    const Box& in = r.inner;
    for (int y = o.y0(); y < o.y1(); ++y) {
        const auto row = m.row(y);
        if (y >= in.y0() && y < in.y1()) {
            if (in.x0() > o.x0()) {
                fn(row.subspan(o.x0(), in.x0() - o.x0()));
            }
            if (o.x1() > in.x1()) {
                fn(row.subspan(in.x1(), o.x1() - in.x1()));
            }
        } else {
            fn(row.subspan(o.x0(), o.width()));
        }
    }
}

inline std::vector<float> ring_values(const ConfMap& m, const RingRegion& r)
{
    std::vector<float> out;
    out.reserve(static_cast<std::size_t>(r.pixel_count()));
    for_each_ring_segment(m, r, [&out](std::span<const float> seg) { out.insert(out.end(), seg.begin(), seg.end()); });
    return out;
}

}  // namespace ts2c
