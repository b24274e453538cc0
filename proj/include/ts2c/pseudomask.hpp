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
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ts2c/confmap.hpp"

namespace ts2c {

inline constexpr std::uint8_t kBackgroundCode = 0;
inline constexpr std::uint8_t kIgnoreCode = 255;

/// Foreground code for a 0-based class id.
inline std::uint8_t class_code(int class_id)
{
    if (class_id < 0 || class_id + 1 >= kIgnoreCode) {
        throw std::invalid_argument("class id " + std::to_string(class_id) + " has no mask code");
    }
    return static_cast<std::uint8_t>(class_id + 1);
}

struct PseudoMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> labels;

    std::uint8_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
    friend bool operator==(const PseudoMask&, const PseudoMask&) = default;
};

struct MaskConfig {
    double fg_threshold = 0.78;
    double bg_threshold = 0.06;

    void validate() const
    {
        if (!(bg_threshold >= 0.0 && bg_threshold < fg_threshold && fg_threshold <= 1.0)) {
            throw std::invalid_argument("MaskConfig: need 0 <= bg_threshold < fg_threshold <= 1");
        }
    }
};

/// Divides every value by the map maximum. All-zero maps pass through.
inline ConfMap normalize_cam(const RawMap& raw)
{
    float peak = 0.0f;
    for (const float v : raw.values) {
        if (!(v >= 0.0f) || !std::isfinite(v)) {
            throw std::invalid_argument("normalize_cam: activation values must be finite and non-negative");
        }
        peak = std::max(peak, v);
    }
    std::vector<float> out = raw.values;
    if (peak > 0.0f) {
        for (float& v : out) {
            v = std::min(1.0f, v / peak);
        }
    }
    return ConfMap(raw.class_id, raw.width, raw.height, std::move(out));
}

inline ConfMap normalize_cam(const ConfMap& m)
{
    const auto v = m.values();
    return normalize_cam(RawMap{m.class_id(), m.width(), m.height(), std::vector<float>(v.begin(), v.end())});
}

/// Per-pixel labelling from class activation maps (one per image label,
/// already normalized) and a saliency map:
///   several classes reach fg_threshold          -> ignore (conflict)
///   one class reaches it, saliency > bg         -> that class
///   one class reaches it, saliency <= bg        -> ignore (low saliency)
///   no class reaches it, saliency <= bg         -> background
///   no class reaches it, saliency > bg          -> ignore (unassigned)
inline PseudoMask generate_mask(std::span<const ConfMap> cams, const ConfMap& saliency, const MaskConfig& cfg)
{
    cfg.validate();
    const int w = saliency.width();
    const int h = saliency.height();
    std::vector<std::uint8_t> codes;
    codes.reserve(cams.size());
    for (const auto& cam : cams) {
        if (cam.width() != w || cam.height() != h) {
            throw std::invalid_argument("generate_mask: CAM for class " + std::to_string(cam.class_id()) + " is " +
                                        std::to_string(cam.width()) + "x" + std::to_string(cam.height()) +
                                        ", saliency is " + std::to_string(w) + "x" + std::to_string(h));
        }
        codes.push_back(class_code(cam.class_id()));
    }

    PseudoMask mask{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, kIgnoreCode)};
    // Thresholds are compared at map precision, so a stored 0.78f claims.
    const auto fg = static_cast<float>(cfg.fg_threshold);
    const auto bg = static_cast<float>(cfg.bg_threshold);
    const auto sal = saliency.values();
    for (std::size_t i = 0; i < mask.labels.size(); ++i) {
        std::size_t claimants = 0;
        std::uint8_t claimant = kIgnoreCode;
        for (std::size_t c = 0; c < cams.size(); ++c) {
            if (cams[c].values()[i] >= fg) {
                ++claimants;
                claimant = codes[c];
            }
        }
        const bool salient = sal[i] > bg;
        if (claimants == 0) {
            mask.labels[i] = salient ? kIgnoreCode : kBackgroundCode;
        } else if (claimants == 1 && salient) {
            mask.labels[i] = claimant;
        } else {
            mask.labels[i] = kIgnoreCode;
        }
    }
    return mask;
}

struct MaskStats {
    std::size_t total = 0;
    std::array<std::size_t, 256> counts{};

    double fraction(std::uint8_t code) const
    {
        return total == 0 ? 0.0 : static_cast<double>(counts[code]) / static_cast<double>(total);
    }
    bool all_ignore() const noexcept { return total > 0 && counts[kIgnoreCode] == total; }
    std::size_t foreground() const noexcept
    {
        return total - counts[kBackgroundCode] - counts[kIgnoreCode];
    }
};

inline MaskStats mask_stats(const PseudoMask& m)
{
    MaskStats s;
    s.total = m.labels.size();
    for (const auto code : m.labels) {
        ++s.counts[code];
    }
    return s;
}

}  // namespace ts2c
