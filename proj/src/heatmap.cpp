// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "rffence/heatmap.hpp"
#include "rffence/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace rffence
{
    HeatmapScale parse_heatmap_scale(const std::string &s)
    {
        if (s == "linear")
            return HeatmapScale::linear;
        if (s == "db")
            return HeatmapScale::db;
        throw ConfigError("scale", "expected \"linear\" or \"db\", got \"" + s + "\"");
    }

    const char *to_string(HeatmapScale s) { return s == HeatmapScale::db ? "db" : "linear"; }

    double HeatmapMapping::to_level(double magnitude) const
    {
        double v = magnitude;
        if (scale == HeatmapScale::db)
            v = magnitude > 0.0 && reference > 0.0 ? std::max(20.0 * std::log10(magnitude / reference), floor_db)
                                                   : floor_db;
        if (!(hi > lo))
            return 0.0;
        return std::clamp(65535.0 * (v - lo) / (hi - lo), 0.0, 65535.0);
    }

    double HeatmapMapping::to_magnitude(std::uint16_t level) const
    {
        const double v = lo + (hi - lo) * double(level) / 65535.0;
        if (scale == HeatmapScale::db)
            return reference * std::pow(10.0, v / 20.0);
        return v;
    }

    Heatmap make_heatmap(std::span<const double> magnitudes, std::size_t width, std::size_t height,
                         HeatmapScale scale, double floor_db)
    {
        if (width == 0 || height == 0 || magnitudes.size() != width * height)
            throw ConfigError("heatmap", "size does not match width x height");
        if (!(floor_db < 0.0) || !std::isfinite(floor_db))
            throw ConfigError("heatmap.floor_db", "must be < 0");
        double lo = magnitudes[0], hi = magnitudes[0];
        for (double m : magnitudes)
        {
            if (!(m >= 0.0) || !std::isfinite(m))
                throw ConfigError("heatmap", "magnitudes must be finite and >= 0");
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }

        Heatmap out;
        auto &mp = out.mapping;
        mp.scale = scale;
        mp.width = width;
        mp.height = height;
        mp.floor_db = floor_db;
        if (scale == HeatmapScale::linear)
        {
            mp.lo = lo;
            mp.hi = hi;
        }
        else
        {
            mp.reference = hi > 0.0 ? hi : 1.0;
            mp.lo = floor_db;
            mp.hi = 0.0;
        }
        out.levels.resize(magnitudes.size());
        for (std::size_t i = 0; i < magnitudes.size(); ++i)
            out.levels[i] = std::uint16_t(std::lround(mp.to_level(magnitudes[i])));
        return out;
    }

    void write_heatmap(const Heatmap &map, const std::filesystem::path &path)
    {
        const auto &mp = map.mapping;
        {
            std::ofstream f(path, std::ios::binary | std::ios::trunc);
            if (!f)
                throw IoError("cannot open " + path.string() + " for writing");
            f << "P5\n" << mp.width << " " << mp.height << "\n65535\n";
            std::vector<char> buf(map.levels.size() * 2);
            for (std::size_t i = 0; i < map.levels.size(); ++i)
            {
                buf[2 * i] = char(map.levels[i] >> 8);
                buf[2 * i + 1] = char(map.levels[i] & 0xFF);
            }
            f.write(buf.data(), std::streamsize(buf.size()));
            if (!f)
                throw IoError("failed writing " + path.string());
        }
        std::filesystem::path side = path;
        side += ".txt";
        std::ofstream s(side, std::ios::trunc);
        if (!s)
            throw IoError("cannot open " + side.string() + " for writing");
        s << std::setprecision(17);
        s << "format pgm-p5-16bit\n";
        s << "width " << mp.width << "\n";
        s << "height " << mp.height << "\n";
        s << "scale " << to_string(mp.scale) << "\n";
        s << "lo " << mp.lo << "\n";
        s << "hi " << mp.hi << "\n";
        s << "reference " << mp.reference << "\n";
        s << "floor_db " << mp.floor_db << "\n";
        s << "# value = lo + (hi - lo) * level / 65535; db scale: magnitude = reference * 10^(value / 20)\n";
        if (!s)
            throw IoError("failed writing " + side.string());
    }

    namespace
    {
        std::map<std::string, std::string> read_sidecar(const std::filesystem::path &path)
        {
            std::ifstream f(path);
            if (!f)
                throw IoError("cannot open " + path.string());
            std::map<std::string, std::string> kv;
            std::string line;
            while (std::getline(f, line))
            {
                if (line.empty() || line[0] == '#')
                    continue;
                std::istringstream ls(line);
                std::string key, value;
                if (!(ls >> key >> value))
                    throw FormatError("malformed sidecar line in " + path.string());
                kv[key] = value;
            }
            return kv;
        }

        double number(const std::map<std::string, std::string> &kv, const std::string &key)
        {
            auto it = kv.find(key);
            if (it == kv.end())
                throw FormatError("heatmap sidecar is missing \"" + key + "\"");
            try
            {
                std::size_t used = 0;
                double v = std::stod(it->second, &used);
                if (used != it->second.size())
                    throw std::invalid_argument(key);
                return v;
            }
            catch (const std::exception &)
            {
                throw FormatError("heatmap sidecar has a bad value for \"" + key + "\"");
            }
        }
    } // namespace

    Heatmap read_heatmap(const std::filesystem::path &path)
    {
        std::filesystem::path side = path;
        side += ".txt";
        const auto kv = read_sidecar(side);
        Heatmap out;
        auto &mp = out.mapping;
        auto scale = kv.find("scale");
        if (scale == kv.end() || (scale->second != "linear" && scale->second != "db"))
            throw FormatError("heatmap sidecar has no valid scale");
        mp.scale = scale->second == "db" ? HeatmapScale::db : HeatmapScale::linear;
        mp.lo = number(kv, "lo");
        mp.hi = number(kv, "hi");
        mp.reference = number(kv, "reference");
        mp.floor_db = number(kv, "floor_db");

        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw IoError("cannot open " + path.string());
        std::string magic;
        long long w = 0, h = 0, maxval = 0;
        if (!(f >> magic >> w >> h >> maxval) || magic != "P5")
            throw FormatError(path.string() + " is not a binary PGM");
        if (maxval != 65535 || w <= 0 || h <= 0 || w > (1 << 20) || h > (1 << 20))
            throw FormatError(path.string() + " has unsupported PGM dimensions or maxval");
        f.get(); // Single whitespace byte after the header
        if (std::size_t(w) != std::size_t(number(kv, "width")) || std::size_t(h) != std::size_t(number(kv, "height")))
            throw DimensionError("heatmap sidecar dimensions do not match " + path.string());
        mp.width = std::size_t(w);
        mp.height = std::size_t(h);

        std::vector<char> buf(mp.width * mp.height * 2);
        f.read(buf.data(), std::streamsize(buf.size()));
        if (f.gcount() != std::streamsize(buf.size()))
            throw TruncatedFileError(-1, path.string() + " is truncated");
        out.levels.resize(mp.width * mp.height);
        for (std::size_t i = 0; i < out.levels.size(); ++i)
            out.levels[i] = std::uint16_t((std::uint8_t(buf[2 * i]) << 8) | std::uint8_t(buf[2 * i + 1]));
        return out;
    }

    std::vector<double> decode_heatmap(const Heatmap &map)
    {
        std::vector<double> out(map.levels.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = map.mapping.to_magnitude(map.levels[i]);
        return out;
    }

} // namespace rffence
