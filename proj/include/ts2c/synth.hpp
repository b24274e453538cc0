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

// Synthetic scenes with "discriminative part" traps, proposal families with
// known overlap properties, and a deliberately naive reference scorer.
// Every generator is a pure function of its inputs and seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ts2c/annotations.hpp"
#include "ts2c/confmap.hpp"
#include "ts2c/geometry.hpp"
#include "ts2c/scoring.hpp"

namespace ts2c {

struct SceneObject {
    int class_id = 0;
    Box gt_box;
    Box part_box;
    double body_conf = 0.6;
    double part_conf = 0.95;
    double bg_conf = 0.0;
};

struct SceneSpec {
    int image_w = 128;
    int image_h = 128;
    std::vector<SceneObject> objects;
    double noise_sigma = 0.0;
    int blur_radius = 0;
    std::uint64_t seed = 0;
    /// Permits overlapping or touching instances of one class.
    bool linked_instances = false;

    void validate() const
    {
        if (image_w <= 0 || image_h <= 0) {
            throw std::invalid_argument("SceneSpec: non-positive image size");
        }
        if (!(noise_sigma >= 0.0) || blur_radius < 0) {
            throw std::invalid_argument("SceneSpec: noise_sigma and blur_radius must be non-negative");
        }
        for (std::size_t i = 0; i < objects.size(); ++i) {
            const auto& o = objects[i];
            const std::string where = "SceneSpec: object " + std::to_string(i) + ": ";
            if (!o.gt_box.within(image_w, image_h)) {
                throw std::invalid_argument(where + "gt_box outside image");
            }
            if (!o.gt_box.contains(o.part_box) || o.gt_box == o.part_box) {
                throw std::invalid_argument(where + "part_box must lie strictly inside gt_box");
            }
            if (!(o.part_conf > o.body_conf && o.body_conf > o.bg_conf && o.bg_conf >= 0.0 && o.part_conf <= 1.0)) {
                throw std::invalid_argument(where + "need 0 <= bg_conf < body_conf < part_conf <= 1");
            }
            for (std::size_t j = 0; j < i; ++j) {
                const auto& p = objects[j];
                if (p.class_id == o.class_id && intersection_area(p.gt_box, o.gt_box) > 0 && !linked_instances) {
                    throw std::invalid_argument(where + "overlaps a same-class instance; set linked_instances");
                }
            }
        }
    }
};

struct GeneratedScene {
    std::vector<ConfMap> maps;  ///< one per distinct class, ascending class id
    GroundTruth gt;
};

namespace detail {

// Mean filter over a (2r+1) square window, clipped at the borders and
// normalized by the number of in-image pixels.
inline std::vector<double> box_blur(const std::vector<double>& src, int w, int h, int radius)
{
    if (radius == 0) {
        return src;
    }
    std::vector<double> tmp(src.size());
    std::vector<double> out(src.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int lo = std::max(0, x - radius);
            const int hi = std::min(w - 1, x + radius);
            double s = 0.0;
            for (int k = lo; k <= hi; ++k) {
                s += src[static_cast<std::size_t>(y) * w + k];
            }
            tmp[static_cast<std::size_t>(y) * w + x] = s / (hi - lo + 1);
        }
    }
    for (int y = 0; y < h; ++y) {
        const int lo = std::max(0, y - radius);
        const int hi = std::min(h - 1, y + radius);
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = lo; k <= hi; ++k) {
                s += tmp[static_cast<std::size_t>(k) * w + x];
            }
            out[static_cast<std::size_t>(y) * w + x] = s / (hi - lo + 1);
        }
    }
    return out;
}

inline void paint(std::vector<double>& px, int w, const Box& b, double value)
{
    for (int y = b.y0(); y < b.y1(); ++y) {
        for (int x = b.x0(); x < b.x1(); ++x) {
            auto& p = px[static_cast<std::size_t>(y) * w + x];
            p = std::max(p, value);
        }
    }
}

}  // namespace detail

/// Derives an independent seed for item `index` of a seeded collection.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

/// Per class: bg_conf everywhere, body_conf inside each gt box, part_conf
/// inside each part box; then box blur, then clamped Gaussian noise.
inline GeneratedScene gen_scene(const SceneSpec& spec)
{
    spec.validate();
    const int w = spec.image_w;
    const int h = spec.image_h;
    std::map<int, std::vector<const SceneObject*>> by_class;
    for (const auto& o : spec.objects) {
        by_class[o.class_id].push_back(&o);
    }

    GeneratedScene scene;
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
    for (const auto& [class_id, objs] : by_class) {
        std::vector<double> px(static_cast<std::size_t>(w) * h, objs.front()->bg_conf);
        for (const auto* o : objs) {
            detail::paint(px, w, o->gt_box, o->body_conf);
        }
        for (const auto* o : objs) {
            detail::paint(px, w, o->part_box, o->part_conf);
        }
        px = detail::box_blur(px, w, h, spec.blur_radius);
        std::vector<float> values(px.size());
        for (std::size_t i = 0; i < px.size(); ++i) {
            double v = px[i];
            if (spec.noise_sigma > 0.0) {
                v += noise(rng);
            }
            values[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
        scene.maps.emplace_back(class_id, w, h, std::move(values));
    }
    for (const auto& o : spec.objects) {
        scene.gt.entries.push_back(GtEntry{o.class_id, o.gt_box});
    }
    return scene;
}

/// Independent reference scorer: P_I by a pixel loop, P_S by collecting the
/// whole ring with a per-pixel membership test, fully sorting it and
/// averaging the top ceil(fraction * N). No integral images, no selection.
inline ScoredProposal oracle_score(const ConfMap& m, const Box& b, const ScoringConfig& cfg)
{
    if (!m.contains(b)) {
        throw std::out_of_range("oracle_score: box outside map");
    }
    ScoredProposal out{b, m.class_id()};

    double inside = 0.0;
    for (int y = b.y0(); y < b.y1(); ++y) {
        for (int x = b.x0(); x < b.x1(); ++x) {
            inside += m.at(x, y);
        }
    }
    out.p_inside = inside / static_cast<double>(b.area());

    const Box outer = enlarge(b, cfg.enlarge_ratio, m.width(), m.height());
    std::vector<double> ring_px;
    for (int y = outer.y0(); y < outer.y1(); ++y) {
        for (int x = outer.x0(); x < outer.x1(); ++x) {
            if (!b.contains_pixel(x, y)) {
                ring_px.push_back(m.at(x, y));
            }
        }
    }
    if (ring_px.empty()) {
        out.p_surround = 0.0;
        if (cfg.empty_ring == EmptyRingPolicy::skip) {
            out.status = ScoreStatus::empty_ring_skipped;
        }
    } else {
        std::sort(ring_px.begin(), ring_px.end(), std::greater<>());
        // Smallest k with k >= fraction * N, counting products within 1e-9 of
        // an integer as that integer.
        const double target = cfg.top_fraction * static_cast<double>(ring_px.size());
        std::size_t k = 1;
        while (k < ring_px.size() && static_cast<double>(k) < target - 1e-9) {
            ++k;
        }
        double top = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            top += ring_px[i];
        }
        out.p_surround = top / static_cast<double>(k);
    }
    out.objectness = out.p_inside - out.p_surround;
    return out;
}

// ---------------------------------------------------------------------------
// Proposal families

enum class ProposalKind { tight, partial, loose, background };

inline const char* to_string(ProposalKind k)
{
    switch (k) {
    case ProposalKind::tight: return "tight";
    case ProposalKind::partial: return "partial";
    case ProposalKind::loose: return "loose";
    case ProposalKind::background: return "background";
    }
    return "?";
}

/// Requested boxes per object (tight/partial/loose) and per scene (background).
struct ProposalCounts {
    std::size_t tight = 0;
    std::size_t partial = 0;
    std::size_t loose = 0;
    std::size_t background = 0;
};

struct JitterParams {
    double tight = 0.2;            ///< edge jitter as a fraction of gt width/height
    double partial = 0.3;          ///< edge jitter as a fraction of part width/height
    double loose_max_scale = 1.8;  ///< largest per-side growth of loose boxes
    int background_min_side = 8;
    double background_max_side = 0.35;  ///< fraction of image size
    std::size_t max_retries = 1000;
};

struct GeneratedBox {
    Box box;
    ProposalKind kind = ProposalKind::tight;
    int object = -1;  ///< index into SceneSpec::objects, -1 for background
};

struct ProposalFamily {
    std::vector<GeneratedBox> boxes;
    std::vector<std::string> warnings;

    std::vector<Box> of(ProposalKind kind, int object = -2) const
    {
        std::vector<Box> out;
        for (const auto& g : boxes) {
            if (g.kind == kind && (object == -2 || g.object == object)) {
                out.push_back(g.box);
            }
        }
        return out;
    }

    std::size_t count(ProposalKind kind) const { return of(kind).size(); }

    std::vector<Box> all() const
    {
        std::vector<Box> out;
        out.reserve(boxes.size());
        for (const auto& g : boxes) {
            out.push_back(g.box);
        }
        return out;
    }
};

/// Predicates each family must satisfy; generation validates against these.
inline bool is_tight(const Box& b, const Box& gt) { return iou(b, gt) >= 0.5; }

inline bool is_partial(const Box& b, const Box& gt, const Box& part)
{
    return gt.contains(b) && static_cast<double>(intersection_area(b, part)) >= 0.8 * static_cast<double>(part.area()) &&
           iou(b, gt) < 0.5;
}

inline bool is_loose(const Box& b, const Box& gt) { return b.contains(gt) && !(b == gt); }

inline bool is_background(const Box& b, const std::vector<SceneObject>& objects)
{
    return std::all_of(objects.begin(), objects.end(),
                       [&](const SceneObject& o) { return intersection_area(b, o.gt_box) == 0; });
}

namespace detail {

inline std::optional<Box> make_box(double x0, double y0, double x1, double y1, int w, int h)
{
    const int ix0 = std::clamp(static_cast<int>(std::lround(x0)), 0, w);
    const int iy0 = std::clamp(static_cast<int>(std::lround(y0)), 0, h);
    const int ix1 = std::clamp(static_cast<int>(std::lround(x1)), 0, w);
    const int iy1 = std::clamp(static_cast<int>(std::lround(y1)), 0, h);
    if (ix0 >= ix1 || iy0 >= iy1) {
        return std::nullopt;
    }
    return Box(ix0, iy0, ix1, iy1);
}

}  // namespace detail

inline ProposalFamily gen_proposals(const SceneSpec& spec, const ProposalCounts& counts, const JitterParams& jitter,
                                    std::uint64_t seed)
{
    spec.validate();
    ProposalFamily family;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto sym = [&](double amplitude) { return (2.0 * unit(rng) - 1.0) * amplitude; };
    const int w = spec.image_w;
    const int h = spec.image_h;

    const auto fill = [&](ProposalKind kind, int object, std::size_t wanted, auto&& propose, auto&& accept) {
        for (std::size_t n = 0; n < wanted; ++n) {
            bool placed = false;
            for (std::size_t attempt = 0; attempt < jitter.max_retries && !placed; ++attempt) {
                const std::optional<Box> b = propose();
                if (b && accept(*b)) {
                    family.boxes.push_back(GeneratedBox{*b, kind, object});
                    placed = true;
                }
            }
            if (!placed) {
                family.warnings.push_back(std::string(to_string(kind)) + " family for object " +
                                          std::to_string(object) + " stopped at " + std::to_string(n) + " of " +
                                          std::to_string(wanted) + " boxes: predicate unsatisfiable within " +
                                          std::to_string(jitter.max_retries) + " retries");
                return;
            }
        }
    };

    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        const auto& o = spec.objects[i];
        const Box& g = o.gt_box;
        const Box& p = o.part_box;
        const int obj = static_cast<int>(i);

        fill(ProposalKind::tight, obj, counts.tight,
             [&] {
                 const double dw = jitter.tight * g.width();
                 const double dh = jitter.tight * g.height();
                 return detail::make_box(g.x0() + sym(dw), g.y0() + sym(dh), g.x1() + sym(dw), g.y1() + sym(dh), w, h);
             },
             [&](const Box& b) { return is_tight(b, g); });

        fill(ProposalKind::partial, obj, counts.partial,
             [&]() -> std::optional<Box> {
                 const double dw = jitter.partial * p.width();
                 const double dh = jitter.partial * p.height();
                 auto b = detail::make_box(p.x0() + sym(dw), p.y0() + sym(dh), p.x1() + sym(dw), p.y1() + sym(dh), w, h);
                 return b ? intersection(*b, g) : std::nullopt;
             },
             [&](const Box& b) { return is_partial(b, g, p); });

        fill(ProposalKind::loose, obj, counts.loose,
             [&] {
                 const double grow = jitter.loose_max_scale - 1.0;
                 return detail::make_box(g.x0() - unit(rng) * grow * g.width(), g.y0() - unit(rng) * grow * g.height(),
                                         g.x1() + unit(rng) * grow * g.width(), g.y1() + unit(rng) * grow * g.height(),
                                         w, h);
             },
             [&](const Box& b) { return is_loose(b, g); });
    }

    fill(ProposalKind::background, -1, counts.background,
         [&] {
             const int max_w = std::max(jitter.background_min_side, static_cast<int>(jitter.background_max_side * w));
             const int max_h = std::max(jitter.background_min_side, static_cast<int>(jitter.background_max_side * h));
             const int bw = std::uniform_int_distribution<int>(jitter.background_min_side, max_w)(rng);
             const int bh = std::uniform_int_distribution<int>(jitter.background_min_side, max_h)(rng);
             const double x0 = unit(rng) * std::max(0, w - bw);
             const double y0 = unit(rng) * std::max(0, h - bh);
             return detail::make_box(x0, y0, x0 + bw, y0 + bh, w, h);
         },
         [&](const Box& b) { return is_background(b, spec.objects); });

    return family;
}

// ---------------------------------------------------------------------------
// Trap scenes

struct TrapParams {
    int image_w = 128;
    int image_h = 128;
    int max_objects = 1;
    int num_classes = 20;
    double noise_sigma = 0.0;
    int blur_radius = 0;
    /// Two touching instances of one class instead of isolated objects.
    bool linked = false;
    int max_attempts = 200;
};

/// True when the noiseless version of `spec` actually traps purity-only
/// ranking: for every object the part box is purer than the gt box, while
/// the gt box has the higher objectness under `cfg`.
inline bool certify_trap(const SceneSpec& spec, const ScoringConfig& cfg = {})
{
    SceneSpec clean = spec;
    clean.noise_sigma = 0.0;
    clean.blur_radius = 0;
    const GeneratedScene scene = gen_scene(clean);
    for (const auto& o : spec.objects) {
        const auto& m = *std::find_if(scene.maps.begin(), scene.maps.end(),
                                      [&](const ConfMap& c) { return c.class_id() == o.class_id; });
        const ScoredProposal tight = oracle_score(m, o.gt_box, cfg);
        const ScoredProposal part = oracle_score(m, o.part_box, cfg);
        if (!(part.p_inside > tight.p_inside && tight.objectness > part.objectness)) {
            return false;
        }
    }
    return true;
}

/// Random part-trap scene: each object has a bright discriminative part well
/// inside a dimmer body. Regenerates until certify_trap holds (linked scenes
/// are the documented failure mode and skip certification).
inline SceneSpec make_trap_spec(std::uint64_t seed, const TrapParams& params)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    const auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const int W = params.image_w;
    const int H = params.image_h;

    const auto make_object = [&](int class_id, const Box& gt) {
        const int pw = std::max(2, static_cast<int>(std::lround(uniform(0.3, 0.45) * gt.width())));
        const int ph = std::max(2, static_cast<int>(std::lround(uniform(0.3, 0.45) * gt.height())));
        const int mx = std::max(1, static_cast<int>(std::ceil(0.15 * gt.width())));
        const int my = std::max(1, static_cast<int>(std::ceil(0.15 * gt.height())));
        const int px = uniform_int(gt.x0() + mx, std::max(gt.x0() + mx, gt.x1() - mx - pw));
        const int py = uniform_int(gt.y0() + my, std::max(gt.y0() + my, gt.y1() - my - ph));
        SceneObject o{class_id, gt, Box(px, py, px + pw, py + ph)};
        o.bg_conf = uniform(0.0, 0.08);
        o.body_conf = uniform(0.45, 0.6);
        o.part_conf = uniform(0.88, 1.0);
        return o;
    };

    for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
        SceneSpec spec;
        spec.image_w = W;
        spec.image_h = H;
        spec.noise_sigma = params.noise_sigma;
        spec.blur_radius = params.blur_radius;
        spec.seed = derive_seed(seed, static_cast<std::uint64_t>(attempt));
        spec.linked_instances = params.linked;

        if (params.linked) {
            const int class_id = uniform_int(0, params.num_classes - 1);
            const int ow = static_cast<int>(uniform(0.25, 0.35) * W);
            const int oh = static_cast<int>(uniform(0.35, 0.6) * H);
            const int x0 = uniform_int(0, W - 2 * ow);
            const int y0 = uniform_int(0, H - oh);
            const int dy = uniform_int(-oh / 8, oh / 8);
            const int y1 = std::clamp(y0 + dy, 0, H - oh);
            const SceneObject a = make_object(class_id, Box(x0, y0, x0 + ow, y0 + oh));
            SceneObject b = make_object(class_id, Box(x0 + ow, y1, x0 + 2 * ow, y1 + oh));
            b.bg_conf = a.bg_conf;
            spec.objects = {a, b};
            return spec;
        }

        const int n = uniform_int(1, std::max(1, params.max_objects));
        std::vector<int> classes;
        bool placed_all = true;
        for (int i = 0; i < n && placed_all; ++i) {
            int class_id = 0;
            do {
                class_id = uniform_int(0, params.num_classes - 1);
            } while (std::find(classes.begin(), classes.end(), class_id) != classes.end());
            bool placed = false;
            for (int tries = 0; tries < 100 && !placed; ++tries) {
                const int ow = static_cast<int>(uniform(0.3, 0.6) * W);
                const int oh = static_cast<int>(uniform(0.3, 0.6) * H);
                const int x0 = uniform_int(0, W - ow);
                const int y0 = uniform_int(0, H - oh);
                const Box gt(x0, y0, x0 + ow, y0 + oh);
                const bool clear = std::none_of(spec.objects.begin(), spec.objects.end(), [&](const SceneObject& o) {
                    return intersection_area(o.gt_box, gt) > 0;
                });
                if (clear) {
                    spec.objects.push_back(make_object(class_id, gt));
                    classes.push_back(class_id);
                    placed = true;
                }
            }
            placed_all = placed;
        }
        if (!placed_all) {
            continue;
        }
        if (certify_trap(spec)) {
            return spec;
        }
    }
    throw std::runtime_error("make_trap_spec: no certified trap scene after " + std::to_string(params.max_attempts) +
                             " attempts");
}

/// Assembles an in-memory bundle from a spec and its proposals.
inline SceneBundle make_bundle(const SceneSpec& spec, const ProposalFamily& proposals, std::string image_id)
{
    GeneratedScene scene = gen_scene(spec);
    SceneBundle bundle;
    bundle.image_id = std::move(image_id);
    bundle.width = spec.image_w;
    bundle.height = spec.image_h;
    bundle.maps = std::move(scene.maps);
    bundle.gt = std::move(scene.gt);
    bundle.gt.image_id = bundle.image_id;
    bundle.proposals = proposals.all();
    return bundle;
}

}  // namespace ts2c
