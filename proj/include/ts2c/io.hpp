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

// On-disk formats:
//   confidence maps  binary PGM "P5" (maxval <= 65535, normalized by maxval)
//                    or raw float: "TSCF", u32 width, u32 height,
//                    u32 class_id, then width*height little-endian float32
//   boxes            image_id,class_id,x0,y0,x1,y1[,score]
//   ground truth     image_id,class_id,x0,y0,x1,y1,ignore_flag
//   scored pools     image_id,class_id,x0,y0,x1,y1,p_inside,p_surround,objectness
//   pseudo masks     PGM "P5", maxval 255
//   scene bundles    directory with spec.json, gt.csv, map_<class>.tscf,
//                    optional proposals.csv

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "ts2c/annotations.hpp"
#include "ts2c/confmap.hpp"
#include "ts2c/geometry.hpp"
#include "ts2c/pseudomask.hpp"
#include "ts2c/scoring.hpp"

namespace ts2c {

inline constexpr int kFormatVersion = 1;
/// Largest map accepted from disk, in pixels.
inline constexpr std::uint64_t kMaxPixels = std::uint64_t{1} << 28;

enum class IoErrc {
    malformed_file,
    dimension_overflow,
    out_of_range,
    parse_error,
    missing_file,
    io_failure,
    validation,
};

inline const char* to_string(IoErrc e)
{
    switch (e) {
    case IoErrc::malformed_file: return "MalformedFile";
    case IoErrc::dimension_overflow: return "DimensionOverflow";
    case IoErrc::out_of_range: return "OutOfRange";
    case IoErrc::parse_error: return "ParseError";
    case IoErrc::missing_file: return "MissingFile";
    case IoErrc::io_failure: return "IoFailure";
    case IoErrc::validation: return "ValidationFailed";
    }
    return "?";
}

class IoError : public std::runtime_error {
public:
    IoError(IoErrc code, std::string path, std::string detail, std::size_t line = 0)
        : std::runtime_error(format(code, path, detail, line)), code_(code), path_(std::move(path)), line_(line)
    {
    }

    IoErrc code() const noexcept { return code_; }
    const std::string& path() const noexcept { return path_; }
    /// 1-based line for text formats, 0 when not applicable.
    std::size_t line() const noexcept { return line_; }

private:
    static std::string format(IoErrc code, const std::string& path, const std::string& detail, std::size_t line)
    {
        std::string s = std::string(to_string(code)) + ": " + path;
        if (line > 0) {
            s += ":" + std::to_string(line);
        }
        return s + ": " + detail;
    }

    IoErrc code_;
    std::string path_;
    std::size_t line_;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(std::filesystem::exists(path) ? IoErrc::io_failure : IoErrc::missing_file, path.string(),
                      "cannot open for reading");
    }
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(IoErrc::io_failure, path.string(), "cannot open for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError(IoErrc::io_failure, path.string(), "write failed");
    }
}

inline std::uint32_t load_u32_le(const char* p)
{
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | static_cast<unsigned char>(p[i]);
    }
    return v;
}

inline void store_u32_le(std::string& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
}

inline void check_dimensions(const std::string& path, std::uint64_t w, std::uint64_t h)
{
    if (w == 0 || h == 0) {
        throw IoError(IoErrc::malformed_file, path, "zero width or height");
    }
    if (w > static_cast<std::uint64_t>(std::numeric_limits<int>::max()) ||
        h > static_cast<std::uint64_t>(std::numeric_limits<int>::max()) || w * h > kMaxPixels) {
        throw IoError(IoErrc::dimension_overflow, path,
                      "dimensions " + std::to_string(w) + "x" + std::to_string(h) + " exceed limit");
    }
}

struct PgmImage {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::vector<std::uint16_t> samples;
};

inline PgmImage parse_pgm(const std::string& path, const std::string& bytes)
{
    std::size_t pos = 2;
    const auto skip_space = [&] {
        while (pos < bytes.size()) {
            const char c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') {
                    ++pos;
                }
            } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                ++pos;
            } else {
                break;
            }
        }
    };
    const auto read_uint = [&](const char* what) -> std::uint64_t {
        skip_space();
        const std::size_t start = pos;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            ++pos;
        }
        if (start == pos || pos - start > 12) {
            throw IoError(IoErrc::malformed_file, path, std::string("bad PGM header field ") + what);
        }
        std::uint64_t v = 0;
        std::from_chars(bytes.data() + start, bytes.data() + pos, v);
        return v;
    };
    const std::uint64_t w = read_uint("width");
    const std::uint64_t h = read_uint("height");
    const std::uint64_t maxval = read_uint("maxval");
    if (pos >= bytes.size() || !(bytes[pos] == ' ' || bytes[pos] == '\t' || bytes[pos] == '\n' || bytes[pos] == '\r')) {
        throw IoError(IoErrc::malformed_file, path, "missing whitespace after PGM maxval");
    }
    ++pos;
    check_dimensions(path, w, h);
    if (maxval == 0 || maxval > 65535) {
        throw IoError(IoErrc::malformed_file, path, "PGM maxval " + std::to_string(maxval) + " not in 1..65535");
    }
    const std::uint64_t bytes_per = maxval > 255 ? 2 : 1;
    const std::uint64_t need = w * h * bytes_per;
    if (bytes.size() - pos != need) {
        throw IoError(IoErrc::malformed_file, path,
                      "PGM payload is " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                          std::to_string(need));
    }
    PgmImage img{static_cast<int>(w), static_cast<int>(h), static_cast<int>(maxval), {}};
    img.samples.resize(w * h);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    for (std::size_t i = 0; i < img.samples.size(); ++i) {
        // 16-bit PGM samples are big-endian.
        img.samples[i] = bytes_per == 2 ? static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]) : p[i];
        if (img.samples[i] > maxval) {
            throw IoError(IoErrc::out_of_range, path, "PGM sample above maxval at index " + std::to_string(i));
        }
    }
    return img;
}

inline std::string encode_pgm(int w, int h, int maxval, const std::vector<std::uint16_t>& samples)
{
    std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n" + std::to_string(maxval) + "\n";
    out.reserve(out.size() + samples.size() * (maxval > 255 ? 2 : 1));
    for (const auto s : samples) {
        if (maxval > 255) {
            out.push_back(static_cast<char>(s >> 8));
        }
        out.push_back(static_cast<char>(s & 0xffu));
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Confidence maps

enum class MapFormat {
    tscf,   ///< raw float32, bit-exact
    pgm8,   ///< P5 maxval 255
    pgm16,  ///< P5 maxval 65535
};

/// Reads a map without range validation (raw activations may exceed 1).
/// PGM files carry no class id; `pgm_class_id` is used for them.
inline RawMap read_raw_map(const std::filesystem::path& path, int pgm_class_id = 0)
{
    const std::string p = path.string();
    const std::string bytes = detail::read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
        const auto img = detail::parse_pgm(p, bytes);
        RawMap m{pgm_class_id, img.width, img.height, std::vector<float>(img.samples.size())};
        for (std::size_t i = 0; i < img.samples.size(); ++i) {
            m.values[i] = static_cast<float>(static_cast<double>(img.samples[i]) / img.maxval);
        }
        return m;
    }
    if (bytes.size() < 16 || bytes.compare(0, 4, "TSCF") != 0) {
        throw IoError(IoErrc::malformed_file, p, "unrecognized map header (expected P5 or TSCF)");
    }
    const std::uint64_t w = detail::load_u32_le(bytes.data() + 4);
    const std::uint64_t h = detail::load_u32_le(bytes.data() + 8);
    const auto class_id = static_cast<std::int32_t>(detail::load_u32_le(bytes.data() + 12));
    detail::check_dimensions(p, w, h);
    if (bytes.size() - 16 != w * h * 4) {
        throw IoError(IoErrc::malformed_file, p,
                      "float payload is " + std::to_string(bytes.size() - 16) + " bytes, expected " +
                          std::to_string(w * h * 4));
    }
    RawMap m{class_id, static_cast<int>(w), static_cast<int>(h), std::vector<float>(w * h)};
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        m.values[i] = std::bit_cast<float>(detail::load_u32_le(bytes.data() + 16 + 4 * i));
    }
    return m;
}

inline ConfMap read_confmap(const std::filesystem::path& path, int pgm_class_id = 0)
{
    RawMap raw = read_raw_map(path, pgm_class_id);
    for (std::size_t i = 0; i < raw.values.size(); ++i) {
        const float v = raw.values[i];
        if (!(v >= 0.0f && v <= 1.0f)) {
            throw IoError(IoErrc::out_of_range, path.string(),
                          "value " + std::to_string(v) + " at pixel (" + std::to_string(i % raw.width) + "," +
                              std::to_string(i / raw.width) + ") outside [0,1]");
        }
    }
    return ConfMap(std::move(raw));
}

inline std::string encode_confmap(const ConfMap& m, MapFormat fmt)
{
    if (fmt == MapFormat::tscf) {
        std::string out = "TSCF";
        detail::store_u32_le(out, static_cast<std::uint32_t>(m.width()));
        detail::store_u32_le(out, static_cast<std::uint32_t>(m.height()));
        detail::store_u32_le(out, static_cast<std::uint32_t>(m.class_id()));
        out.reserve(out.size() + m.values().size() * 4);
        for (const float v : m.values()) {
            detail::store_u32_le(out, std::bit_cast<std::uint32_t>(v));
        }
        return out;
    }
    const int maxval = fmt == MapFormat::pgm8 ? 255 : 65535;
    std::vector<std::uint16_t> samples(m.values().size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = static_cast<std::uint16_t>(std::lround(static_cast<double>(m.values()[i]) * maxval));
    }
    return detail::encode_pgm(m.width(), m.height(), maxval, samples);
}

inline void write_confmap(const ConfMap& m, const std::filesystem::path& path, MapFormat fmt = MapFormat::tscf)
{
    detail::write_file(path, encode_confmap(m, fmt));
}

inline std::string normalization_of(MapFormat fmt)
{
    switch (fmt) {
    case MapFormat::tscf: return "float32";
    case MapFormat::pgm8: return "pgm/255";
    case MapFormat::pgm16: return "pgm/65535";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Pseudo masks

inline void write_mask(const PseudoMask& mask, const std::filesystem::path& path)
{
    std::vector<std::uint16_t> samples(mask.labels.begin(), mask.labels.end());
    detail::write_file(path, detail::encode_pgm(mask.width, mask.height, 255, samples));
}

inline PseudoMask read_mask(const std::filesystem::path& path)
{
    const std::string bytes = detail::read_file(path);
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw IoError(IoErrc::malformed_file, path.string(), "mask is not a P5 PGM");
    }
    const auto img = detail::parse_pgm(path.string(), bytes);
    if (img.maxval != 255) {
        throw IoError(IoErrc::malformed_file, path.string(), "mask maxval must be 255");
    }
    return PseudoMask{img.width, img.height, std::vector<std::uint8_t>(img.samples.begin(), img.samples.end())};
}

/// Grayscale overlay: the map scaled to 0..254 with box outlines at 255.
inline void write_overlay(const ConfMap& m, std::span<const Box> boxes, const std::filesystem::path& path)
{
    std::vector<std::uint16_t> px(m.values().size());
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = static_cast<std::uint16_t>(std::lround(m.values()[i] * 254.0));
    }
    const auto set = [&](int x, int y) {
        if (x >= 0 && y >= 0 && x < m.width() && y < m.height()) {
            px[static_cast<std::size_t>(y) * m.width() + x] = 255;
        }
    };
    for (const Box& b : boxes) {
        for (int x = b.x0(); x < b.x1(); ++x) {
            set(x, b.y0());
            set(x, b.y1() - 1);
        }
        for (int y = b.y0(); y < b.y1(); ++y) {
            set(b.x0(), y);
            set(b.x1() - 1, y);
        }
    }
    detail::write_file(path, detail::encode_pgm(m.width(), m.height(), 255, px));
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        out.push_back(line);
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view field, T& out)
{
    if (field.empty()) {
        return false;
    }
    const char* end = field.data() + field.size();
    const auto res = std::from_chars(field.data(), end, out);
    return res.ec == std::errc() && res.ptr == end;
}

inline std::string fmt9(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

struct RowErrors {
    std::string path;
    std::vector<std::pair<std::size_t, std::string>> items;

    void add(std::size_t line, std::string msg) { items.emplace_back(line, std::move(msg)); }

    void throw_if_any() const
    {
        if (items.empty()) {
            return;
        }
        std::string msg;
        for (const auto& [line, m] : items) {
            msg += "\n  line " + std::to_string(line) + ": " + m;
        }
        throw IoError(IoErrc::parse_error, path, std::to_string(items.size()) + " invalid row(s):" + msg,
                      items.front().first);
    }
};

// Parses x0..y1 at fields[first..first+3]; reports and returns nullopt on
// failure.
inline std::optional<Box> parse_box(const std::vector<std::string_view>& f, std::size_t first, std::size_t line,
                                    RowErrors& errors)
{
    int c[4];
    for (int i = 0; i < 4; ++i) {
        if (!parse_number(f[first + i], c[i])) {
            errors.add(line, "non-integer coordinate '" + std::string(f[first + i]) + "'");
            return std::nullopt;
        }
    }
    if (c[0] < 0 || c[1] < 0 || c[0] >= c[2] || c[1] >= c[3]) {
        errors.add(line, "invalid box [" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," +
                             std::to_string(c[2]) + "," + std::to_string(c[3]) + "]");
        return std::nullopt;
    }
    return Box(c[0], c[1], c[2], c[3]);
}

inline void expect_header(const std::string& path, const std::vector<std::string>& lines,
                          std::initializer_list<std::string_view> allowed)
{
    if (lines.empty()) {
        throw IoError(IoErrc::parse_error, path, "missing header row", 1);
    }
    for (const auto h : allowed) {
        if (lines.front() == h) {
            return;
        }
    }
    throw IoError(IoErrc::parse_error, path, "unexpected header '" + lines.front() + "'", 1);
}

}  // namespace detail

inline constexpr std::string_view kBoxHeader = "image_id,class_id,x0,y0,x1,y1";
inline constexpr std::string_view kBoxScoreHeader = "image_id,class_id,x0,y0,x1,y1,score";
inline constexpr std::string_view kGtHeader = "image_id,class_id,x0,y0,x1,y1,ignore_flag";
inline constexpr std::string_view kScoredHeader = "image_id,class_id,x0,y0,x1,y1,p_inside,p_surround,objectness";

/// Class id -1 marks class-agnostic boxes such as raw proposals.
struct BoxRecord {
    std::string image_id;
    int class_id = -1;
    Box box;
    std::optional<double> score;
    std::size_t line = 0;  ///< source line when read from a file
};

inline std::vector<BoxRecord> read_boxes(const std::filesystem::path& path)
{
    const std::string p = path.string();
    const auto lines = detail::lines_of(detail::read_file(path));
    detail::expect_header(p, lines, {kBoxHeader, kBoxScoreHeader});
    const bool scored = lines.front() == kBoxScoreHeader;
    const std::size_t columns = scored ? 7 : 6;

    std::vector<BoxRecord> out;
    detail::RowErrors errors{p, {}};
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line = i + 1;
        if (lines[i].empty()) {
            continue;
        }
        const auto f = detail::split_csv(lines[i]);
        if (f.size() != columns) {
            errors.add(line, "expected " + std::to_string(columns) + " columns, got " + std::to_string(f.size()));
            continue;
        }
        int class_id = 0;
        if (f[0].empty()) {
            errors.add(line, "empty image_id");
            continue;
        }
        if (!detail::parse_number(f[1], class_id) || class_id < -1) {
            errors.add(line, "bad class_id '" + std::string(f[1]) + "'");
            continue;
        }
        const auto box = detail::parse_box(f, 2, line, errors);
        if (!box) {
            continue;
        }
        BoxRecord r{std::string(f[0]), class_id, *box, std::nullopt, line};
        if (scored) {
            double s = 0.0;
            if (!detail::parse_number(f[6], s) || !std::isfinite(s)) {
                errors.add(line, "bad score '" + std::string(f[6]) + "'");
                continue;
            }
            r.score = s;
        }
        out.push_back(std::move(r));
    }
    errors.throw_if_any();
    return out;
}

inline std::string encode_boxes(std::span<const BoxRecord> records)
{
    const bool scored = !records.empty() && records.front().score.has_value();
    std::string out(scored ? kBoxScoreHeader : kBoxHeader);
    out += '\n';
    for (const auto& r : records) {
        if (r.score.has_value() != scored) {
            throw std::invalid_argument("encode_boxes: either every record has a score or none does");
        }
        out += r.image_id + "," + std::to_string(r.class_id) + "," + std::to_string(r.box.x0()) + "," +
               std::to_string(r.box.y0()) + "," + std::to_string(r.box.x1()) + "," + std::to_string(r.box.y1());
        if (scored) {
            out += "," + detail::fmt9(*r.score);
        }
        out += '\n';
    }
    return out;
}

inline void write_boxes(std::span<const BoxRecord> records, const std::filesystem::path& path)
{
    detail::write_file(path, encode_boxes(records));
}

inline std::vector<Detection> to_detections(std::span<const BoxRecord> records)
{
    std::vector<Detection> out;
    for (const auto& r : records) {
        out.push_back(Detection{r.image_id, r.class_id, r.box, r.score.value_or(0.0)});
    }
    return out;
}

struct GtRecord {
    std::string image_id;
    GtEntry entry;
    std::size_t line = 0;
};

inline std::vector<GtRecord> read_gt_records(const std::filesystem::path& path)
{
    const std::string p = path.string();
    const auto lines = detail::lines_of(detail::read_file(path));
    detail::expect_header(p, lines, {kGtHeader});
    std::vector<GtRecord> out;
    detail::RowErrors errors{p, {}};
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line = i + 1;
        if (lines[i].empty()) {
            continue;
        }
        const auto f = detail::split_csv(lines[i]);
        if (f.size() != 7) {
            errors.add(line, "expected 7 columns, got " + std::to_string(f.size()));
            continue;
        }
        int class_id = 0;
        int ignore = 0;
        if (f[0].empty()) {
            errors.add(line, "empty image_id");
            continue;
        }
        if (!detail::parse_number(f[1], class_id) || class_id < 0) {
            errors.add(line, "bad class_id '" + std::string(f[1]) + "'");
            continue;
        }
        const auto box = detail::parse_box(f, 2, line, errors);
        if (!box) {
            continue;
        }
        if (!detail::parse_number(f[6], ignore) || (ignore != 0 && ignore != 1)) {
            errors.add(line, "ignore_flag must be 0 or 1");
            continue;
        }
        out.push_back(GtRecord{std::string(f[0]), GtEntry{class_id, *box, ignore == 1}, line});
    }
    errors.throw_if_any();
    return out;
}

/// Ground truth grouped per image, in order of first appearance.
inline std::vector<GroundTruth> group_gt(std::span<const GtRecord> records)
{
    std::vector<GroundTruth> out;
    std::map<std::string, std::size_t> index;
    for (const auto& r : records) {
        auto [it, fresh] = index.try_emplace(r.image_id, out.size());
        if (fresh) {
            out.push_back(GroundTruth{r.image_id, {}});
        }
        out[it->second].entries.push_back(r.entry);
    }
    return out;
}

inline std::vector<GroundTruth> read_gt(const std::filesystem::path& path) { return group_gt(read_gt_records(path)); }

inline std::string encode_gt(std::span<const GroundTruth> gts)
{
    std::string out(kGtHeader);
    out += '\n';
    for (const auto& g : gts) {
        for (const auto& e : g.entries) {
            out += g.image_id + "," + std::to_string(e.class_id) + "," + std::to_string(e.box.x0()) + "," +
                   std::to_string(e.box.y0()) + "," + std::to_string(e.box.x1()) + "," + std::to_string(e.box.y1()) +
                   "," + (e.ignore ? "1" : "0") + "\n";
        }
    }
    return out;
}

inline void write_gt(std::span<const GroundTruth> gts, const std::filesystem::path& path)
{
    detail::write_file(path, encode_gt(gts));
}

inline std::string encode_scored(std::span<const CandidatePool> pools)
{
    std::string out(kScoredHeader);
    out += '\n';
    for (const auto& pool : pools) {
        for (const auto& e : pool.entries) {
            out += pool.image_id + "," + std::to_string(pool.class_id) + "," + std::to_string(e.box.x0()) + "," +
                   std::to_string(e.box.y0()) + "," + std::to_string(e.box.x1()) + "," + std::to_string(e.box.y1()) +
                   "," + detail::fmt9(e.p_inside) + "," + detail::fmt9(e.p_surround) + "," +
                   detail::fmt9(e.objectness) + "\n";
        }
    }
    return out;
}

inline void write_scored(std::span<const CandidatePool> pools, const std::filesystem::path& path)
{
    detail::write_file(path, encode_scored(pools));
}

/// Reads pools back; rows keep file order within each (image, class).
inline std::vector<CandidatePool> read_scored(const std::filesystem::path& path)
{
    const std::string p = path.string();
    const auto lines = detail::lines_of(detail::read_file(path));
    detail::expect_header(p, lines, {kScoredHeader});
    std::vector<CandidatePool> out;
    std::map<std::pair<std::string, int>, std::size_t> index;
    detail::RowErrors errors{p, {}};
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line = i + 1;
        if (lines[i].empty()) {
            continue;
        }
        const auto f = detail::split_csv(lines[i]);
        if (f.size() != 9) {
            errors.add(line, "expected 9 columns, got " + std::to_string(f.size()));
            continue;
        }
        int class_id = 0;
        if (f[0].empty() || !detail::parse_number(f[1], class_id)) {
            errors.add(line, "bad image_id or class_id");
            continue;
        }
        const auto box = detail::parse_box(f, 2, line, errors);
        if (!box) {
            continue;
        }
        double v[3];
        bool ok = true;
        for (int k = 0; k < 3; ++k) {
            ok = ok && detail::parse_number(f[6 + k], v[k]) && std::isfinite(v[k]);
        }
        if (!ok) {
            errors.add(line, "non-numeric score column");
            continue;
        }
        const std::pair<std::string, int> key{std::string(f[0]), class_id};
        auto [it, fresh] = index.try_emplace(key, out.size());
        if (fresh) {
            out.push_back(CandidatePool{key.first, class_id, {}});
        }
        out[it->second].entries.push_back(ScoredProposal{*box, class_id, v[0], v[1], v[2]});
    }
    errors.throw_if_any();
    return out;
}

// ---------------------------------------------------------------------------
// Scene bundles

inline std::string map_file_name(int class_id) { return "map_" + std::to_string(class_id) + ".tscf"; }

/// Writes maps, gt.csv, proposals.csv and spec.json. `scene` is stored
/// verbatim under spec.json's "scene" key when non-null.
inline void write_bundle(const std::filesystem::path& dir, const SceneBundle& b,
                         const nlohmann::json& scene = nullptr)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError(IoErrc::io_failure, dir.string(), "cannot create directory: " + ec.message());
    }
    nlohmann::json spec;
    spec["format_version"] = kFormatVersion;
    spec["image_id"] = b.image_id;
    spec["width"] = b.width;
    spec["height"] = b.height;
    spec["normalization"] = normalization_of(MapFormat::tscf);
    spec["gt"] = "gt.csv";
    spec["proposals"] = "proposals.csv";
    spec["maps"] = nlohmann::json::array();
    for (const auto& m : b.maps) {
        const std::string file = map_file_name(m.class_id());
        write_confmap(m, dir / file, MapFormat::tscf);
        spec["maps"].push_back({{"class_id", m.class_id()}, {"file", file}});
    }
    GroundTruth gt = b.gt;
    gt.image_id = b.image_id;
    write_gt(std::span<const GroundTruth>(&gt, 1), dir / "gt.csv");
    std::vector<BoxRecord> props;
    for (const Box& p : b.proposals) {
        props.push_back(BoxRecord{b.image_id, -1, p, std::nullopt});
    }
    write_boxes(props, dir / "proposals.csv");
    if (!scene.is_null()) {
        spec["scene"] = scene;
    }
    detail::write_file(dir / "spec.json", spec.dump(2) + "\n");
}

struct BundleLoad {
    std::optional<SceneBundle> bundle;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const noexcept { return bundle.has_value() && errors.empty(); }
};

/// Loads and validates a bundle, collecting every failure rather than
/// stopping at the first.
inline BundleLoad read_bundle(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    BundleLoad load;
    auto& errors = load.errors;
    if (!fs::is_directory(dir)) {
        errors.push_back(dir.string() + ": not a directory");
        return load;
    }
    const fs::path spec_path = dir / "spec.json";
    nlohmann::json spec;
    try {
        spec = nlohmann::json::parse(detail::read_file(spec_path));
    } catch (const IoError& e) {
        errors.push_back(e.what());
        return load;
    } catch (const nlohmann::json::exception& e) {
        errors.push_back(spec_path.string() + ": invalid JSON: " + e.what());
        return load;
    }

    SceneBundle b;
    std::set<std::string> known{"spec.json"};
    try {
        if (spec.value("format_version", 0) != kFormatVersion) {
            errors.push_back(spec_path.string() + ": unsupported format_version");
        }
        b.image_id = spec.at("image_id").get<std::string>();
        b.width = spec.at("width").get<int>();
        b.height = spec.at("height").get<int>();
        if (b.width <= 0 || b.height <= 0) {
            errors.push_back(spec_path.string() + ": non-positive width/height");
        }
        for (const auto& entry : spec.at("maps")) {
            const int class_id = entry.at("class_id").get<int>();
            const std::string file = entry.at("file").get<std::string>();
            known.insert(file);
            try {
                ConfMap m = read_confmap(dir / file, class_id);
                if (m.class_id() != class_id) {
                    errors.push_back((dir / file).string() + ": header class " + std::to_string(m.class_id()) +
                                     " but spec.json lists class " + std::to_string(class_id));
                }
                if (m.width() != b.width || m.height() != b.height) {
                    errors.push_back((dir / file).string() + ": map is " + std::to_string(m.width()) + "x" +
                                     std::to_string(m.height()) + ", bundle is " + std::to_string(b.width) + "x" +
                                     std::to_string(b.height));
                    continue;
                }
                b.maps.push_back(std::move(m));
            } catch (const IoError& e) {
                errors.push_back(e.what());
            }
        }
    } catch (const nlohmann::json::exception& e) {
        errors.push_back(spec_path.string() + ": " + e.what());
        return load;
    }
    std::sort(b.maps.begin(), b.maps.end(),
              [](const ConfMap& x, const ConfMap& y) { return x.class_id() < y.class_id(); });
    for (std::size_t i = 1; i < b.maps.size(); ++i) {
        if (b.maps[i].class_id() == b.maps[i - 1].class_id()) {
            errors.push_back(spec_path.string() + ": duplicate map for class " +
                             std::to_string(b.maps[i].class_id()));
        }
    }

    const std::string gt_file = spec.value("gt", std::string("gt.csv"));
    known.insert(gt_file);
    b.gt.image_id = b.image_id;
    try {
        for (const auto& r : read_gt_records(dir / gt_file)) {
            const std::string where = (dir / gt_file).string() + ":" + std::to_string(r.line) + ": ";
            if (r.image_id != b.image_id) {
                errors.push_back(where + "image_id '" + r.image_id + "' does not match bundle '" + b.image_id + "'");
            }
            if (!r.entry.box.within(b.width, b.height)) {
                errors.push_back(where + "box " + r.entry.box.to_string() + " exceeds " + std::to_string(b.width) +
                                 "x" + std::to_string(b.height) + " image");
            }
            b.gt.entries.push_back(r.entry);
        }
    } catch (const IoError& e) {
        errors.push_back(e.what());
    }
    for (const int c : b.gt.classes()) {
        if (b.map_for(c) == nullptr) {
            errors.push_back(spec_path.string() + ": annotated class " + std::to_string(c) + " has no map");
        }
    }

    const std::string prop_file = spec.value("proposals", std::string("proposals.csv"));
    known.insert(prop_file);
    if (fs::exists(dir / prop_file)) {
        try {
            for (const auto& r : read_boxes(dir / prop_file)) {
                if (!r.box.within(b.width, b.height)) {
                    errors.push_back((dir / prop_file).string() + ":" + std::to_string(r.line) + ": box " +
                                     r.box.to_string() + " exceeds image");
                }
                b.proposals.push_back(r.box);
            }
        } catch (const IoError& e) {
            errors.push_back(e.what());
        }
    }

    std::vector<std::string> extra;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (!known.contains(name)) {
            extra.push_back(name);
        }
    }
    std::sort(extra.begin(), extra.end());
    for (const auto& name : extra) {
        load.warnings.push_back((dir / name).string() + ": unknown file ignored");
    }

    if (errors.empty()) {
        load.bundle = std::move(b);
    }
    return load;
}

/// A corpus is either a single bundle directory or a directory of bundle
/// subdirectories (processed in lexicographic order).
inline std::vector<std::filesystem::path> corpus_bundle_dirs(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    if (fs::exists(dir / "spec.json")) {
        return {dir};
    }
    if (!fs::is_directory(dir)) {
        throw IoError(IoErrc::missing_file, dir.string(), "corpus directory not found");
    }
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "spec.json")) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Loads every bundle; throws one IoError listing all validation failures.
inline std::vector<SceneBundle> read_corpus(const std::filesystem::path& dir,
                                            std::vector<std::string>* warnings = nullptr)
{
    std::vector<SceneBundle> out;
    std::vector<std::string> errors;
    for (const auto& d : corpus_bundle_dirs(dir)) {
        BundleLoad load = read_bundle(d);
        errors.insert(errors.end(), load.errors.begin(), load.errors.end());
        if (warnings != nullptr) {
            warnings->insert(warnings->end(), load.warnings.begin(), load.warnings.end());
        }
        if (load.ok()) {
            out.push_back(std::move(*load.bundle));
        }
    }
    if (!errors.empty()) {
        std::string msg;
        for (const auto& e : errors) {
            msg += "\n  " + e;
        }
        throw IoError(IoErrc::validation, dir.string(), std::to_string(errors.size()) + " problem(s):" + msg);
    }
    return out;
}

}  // namespace ts2c
