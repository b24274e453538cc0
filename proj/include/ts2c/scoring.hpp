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

// Tight-box scoring: a proposal is good when the class confidence inside it
// is high (purity) and the confidence in the ring around it is low
// (completeness). objectness = purity - surrounding completeness.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ranges>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ts2c/confmap.hpp"
#include "ts2c/geometry.hpp"
#include "ts2c/parallel.hpp"

namespace ts2c {

enum class EmptyRingPolicy {
    zero,  ///< P_S = 0, the proposal keeps its purity as score
    skip,  ///< proposal is excluded from candidate pools
};

struct ScoringConfig {
    double enlarge_ratio = 1.2;
    double top_fraction = 0.5;
    std::size_t pool_size = 200;
    EmptyRingPolicy empty_ring = EmptyRingPolicy::zero;

    void validate() const
    {
        if (!(enlarge_ratio >= 1.0) || !std::isfinite(enlarge_ratio)) {
            throw std::invalid_argument("ScoringConfig: enlarge_ratio must be >= 1");
        }
        if (!(top_fraction > 0.0 && top_fraction <= 1.0)) {
            throw std::invalid_argument("ScoringConfig: top_fraction must be in (0, 1]");
        }
        if (pool_size < 1) {
            throw std::invalid_argument("ScoringConfig: pool_size must be >= 1");
        }
    }
};

enum class ScoreStatus {
    ok,
    empty_ring_skipped,
    out_of_bounds,
};

struct ScoredProposal {
    Box box;
    int class_id = 0;
    double p_inside = 0.0;
    double p_surround = 0.0;
    double objectness = 0.0;
    ScoreStatus status = ScoreStatus::ok;

    bool usable() const noexcept { return status == ScoreStatus::ok; }

    friend bool operator==(const ScoredProposal&, const ScoredProposal&) = default;
};

/// Top proposals for one (image, class), best first.
struct CandidatePool {
    std::string image_id;
    int class_id = 0;
    std::vector<ScoredProposal> entries;
};

/// Raised when a conditional average is requested over zero values.
class EmptyRegion : public std::domain_error {
public:
    EmptyRegion() : std::domain_error("conditional average over an empty region") {}
};

/// k = ceil(fraction * n), clamped to [1, n]. Products within 1e-9 of an
/// integer count as that integer (0.3 * 10 selects 3 values, not 4).
inline std::size_t top_count(std::size_t n, double top_fraction)
{
    if (n == 0) {
        return 0;
    }
    const double exact = top_fraction * static_cast<double>(n);
    auto k = static_cast<std::size_t>(std::ceil(exact - 1e-9));
    return std::clamp<std::size_t>(k, 1, n);
}

/// Mean of the ceil(top_fraction * N) largest values.
template <std::ranges::input_range R>
double conditional_average(const R& values, double top_fraction)
{
    if (!(top_fraction > 0.0 && top_fraction <= 1.0)) {
        throw std::invalid_argument("conditional_average: top_fraction must be in (0, 1]");
    }
    std::vector<double> v;
    for (const auto& x : values) {
        v.push_back(static_cast<double>(x));
    }
    if (v.empty()) {
        throw EmptyRegion();
    }
    const std::size_t k = top_count(v.size(), top_fraction);
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end(), std::greater<>());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sum += v[i];
    }
    return sum / static_cast<double>(k);
}

namespace detail {

// Exact top-k mean over a streamed region of unit-interval values, without
// materializing it. Pass one builds a 256-bin count/sum histogram; bins above
// the one holding the k-th largest value contribute their sums directly.
// Pass two collects only the values of that boundary bin and selects the
// remaining ones exactly.
template <typename ForEachSegment>
double streamed_top_mean(std::size_t k, ForEachSegment&& for_each_segment)
{
    constexpr int kBins = 256;
    const auto bin_of = [](float v) { return std::min(static_cast<int>(v * static_cast<float>(kBins)), kBins - 1); };

    std::array<std::uint32_t, kBins> counts{};
    std::array<double, kBins> sums{};
    for_each_segment([&](std::span<const float> seg) {
        for (const float v : seg) {
            const int b = bin_of(v);
            ++counts[b];
            sums[b] += v;
        }
    });

    std::size_t above = 0;
    double total = 0.0;
    int cut = kBins - 1;
    for (; cut > 0; --cut) {
        if (above + counts[cut] >= k) {
            break;
        }
        above += counts[cut];
        total += sums[cut];
    }
    const std::size_t remaining = k - above;
    if (remaining == counts[cut]) {
        total += sums[cut];
    } else {
        thread_local std::vector<float> boundary;
        boundary.clear();
        boundary.reserve(counts[cut]);
        for_each_segment([&](std::span<const float> seg) {
            for (const float v : seg) {
                if (bin_of(v) == cut) {
                    boundary.push_back(v);
                }
            }
        });
        std::nth_element(boundary.begin(), boundary.begin() + static_cast<std::ptrdiff_t>(remaining - 1),
                         boundary.end(), std::greater<>());
        for (std::size_t i = 0; i < remaining; ++i) {
            total += boundary[i];
        }
    }
    return total / static_cast<double>(k);
}

inline void require_inside(const ConfMap& m, const Box& b)
{
    if (!m.contains(b)) {
        throw std::out_of_range("box " + b.to_string() + " outside " + std::to_string(m.width()) + "x" +
                                std::to_string(m.height()) + " map");
    }
}

inline void require_matching(const ConfMap& m, const IntegralImage& ii)
{
    if (m.width() != ii.width() || m.height() != ii.height()) {
        throw std::invalid_argument("integral image does not match confidence map dimensions");
    }
}

}  // namespace detail

/// Mean confidence inside the box.
inline double purity(const IntegralImage& ii, const Box& b)
{
    if (!b.within(ii.width(), ii.height())) {
        throw std::out_of_range("purity: box " + b.to_string() + " outside map");
    }
    return box_mean(ii, b);
}

/// Conditional average of the ring between `b` and its enlargement.
/// Returns nullopt only for an empty ring under EmptyRingPolicy::skip.
inline std::optional<double> surrounding_completeness(const ConfMap& m, const Box& b, const ScoringConfig& cfg)
{
    detail::require_inside(m, b);
    const RingRegion r = ring(b, cfg.enlarge_ratio, m.width(), m.height());
    const auto n = static_cast<std::size_t>(r.pixel_count());
    if (n == 0) {
        if (cfg.empty_ring == EmptyRingPolicy::skip) {
            return std::nullopt;
        }
        return 0.0;
    }
    const std::size_t k = top_count(n, cfg.top_fraction);
    const double p = detail::streamed_top_mean(k, [&](auto&& fn) { for_each_ring_segment(m, r, fn); });
    return std::clamp(p, 0.0, 1.0);
}

inline ScoredProposal score(const ConfMap& m, const IntegralImage& ii, const Box& b, const ScoringConfig& cfg)
{
    detail::require_matching(m, ii);
    detail::require_inside(m, b);
    ScoredProposal out{b, m.class_id()};
    out.p_inside = box_mean(ii, b);
    const auto surround = surrounding_completeness(m, b, cfg);
    if (!surround) {
        out.status = ScoreStatus::empty_ring_skipped;
        out.p_surround = 0.0;
    } else {
        out.p_surround = *surround;
    }
    out.objectness = out.p_inside - out.p_surround;
    return out;
}

/// Purity-only baseline: P_S fixed at 0 so the ranking is by P_I alone.
inline ScoredProposal purity_only_score(const IntegralImage& ii, const Box& b, int class_id = 0)
{
    ScoredProposal out{b, class_id};
    out.p_inside = purity(ii, b);
    out.p_surround = 0.0;
    out.objectness = out.p_inside;
    return out;
}

/// Scores every box; output order matches input order. Boxes outside the map
/// come back with ScoreStatus::out_of_bounds instead of aborting the batch.
inline std::vector<ScoredProposal> score_batch(const ConfMap& m, const IntegralImage& ii, std::span<const Box> boxes,
                                               const ScoringConfig& cfg, unsigned threads = 0)
{
    cfg.validate();
    detail::require_matching(m, ii);
    std::vector<ScoredProposal> out;
    out.reserve(boxes.size());
    for (const Box& b : boxes) {
        out.push_back(ScoredProposal{b, m.class_id()});
    }
    detail::parallel_for(boxes.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            if (!m.contains(boxes[i])) {
                out[i].status = ScoreStatus::out_of_bounds;
                continue;
            }
            out[i] = score(m, ii, boxes[i], cfg);
        }
    });
    return out;
}

inline std::vector<ScoredProposal> score_batch(const ConfMap& m, std::span<const Box> boxes, const ScoringConfig& cfg,
                                               unsigned threads = 0)
{
    return score_batch(m, IntegralImage(m), boxes, cfg, threads);
}

inline std::vector<ScoredProposal> purity_only_batch(const ConfMap& m, const IntegralImage& ii,
                                                     std::span<const Box> boxes)
{
    detail::require_matching(m, ii);
    std::vector<ScoredProposal> out;
    out.reserve(boxes.size());
    for (const Box& b : boxes) {
        if (!m.contains(b)) {
            ScoredProposal bad{b, m.class_id()};
            bad.status = ScoreStatus::out_of_bounds;
            out.push_back(bad);
            continue;
        }
        out.push_back(purity_only_score(ii, b, m.class_id()));
    }
    return out;
}

/// Keeps the best `cfg.pool_size` usable proposals. Order: objectness desc,
/// then p_inside desc, then input position.
inline CandidatePool build_pool(std::span<const ScoredProposal> scored, const ScoringConfig& cfg,
                                std::string image_id = {})
{
    if (cfg.pool_size < 1) {
        throw std::invalid_argument("build_pool: pool_size must be >= 1");
    }
    CandidatePool pool;
    pool.image_id = std::move(image_id);
    if (!scored.empty()) {
        pool.class_id = scored.front().class_id;
    }
    for (const auto& s : scored) {
        if (s.class_id != pool.class_id) {
            throw std::invalid_argument("build_pool: proposals from more than one class");
        }
        if (s.usable()) {
            pool.entries.push_back(s);
        }
    }
    std::stable_sort(pool.entries.begin(), pool.entries.end(), [](const ScoredProposal& a, const ScoredProposal& b) {
        if (a.objectness != b.objectness) {
            return a.objectness > b.objectness;
        }
        return a.p_inside > b.p_inside;
    });
    if (pool.entries.size() > cfg.pool_size) {
        pool.entries.erase(pool.entries.begin() + static_cast<std::ptrdiff_t>(cfg.pool_size), pool.entries.end());
    }
    return pool;
}

}  // namespace ts2c
