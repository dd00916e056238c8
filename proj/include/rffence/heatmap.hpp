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

#ifndef RFFENCE_HEATMAP_HPP
#define RFFENCE_HEATMAP_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rffence
{
    enum class HeatmapScale
    {
        linear,
        db
    };

    HeatmapScale parse_heatmap_scale(const std::string &s); // "linear" or "db"; throws ConfigError
    const char *to_string(HeatmapScale s);

    // Mapping between magnitudes and 16-bit gray levels, written to the sidecar file.
    //   linear: level = round(65535 (m - lo) / (hi - lo)) with lo/hi the magnitude range
    //   db:     level = round(65535 (d - lo) / (hi - lo)) with d = max(20 log10(m / reference), floor_db),
    //           lo = floor_db and hi = 0
    struct HeatmapMapping
    {
        HeatmapScale scale = HeatmapScale::linear;
        std::size_t width = 0, height = 0;
        double lo = 0.0, hi = 0.0;
        double reference = 1.0; // Magnitude at 0 dB (db scale only)
        double floor_db = -120.0;

        double to_level(double magnitude) const; // Unrounded level in [0, 65535]
        double to_magnitude(std::uint16_t level) const;
    };

    struct Heatmap
    {
        HeatmapMapping mapping;
        std::vector<std::uint16_t> levels; // Row-major, top row first
    };

    // Magnitudes are row-major (height rows of width values). Throws ConfigError on non-finite or negative input.
    Heatmap make_heatmap(std::span<const double> magnitudes, std::size_t width, std::size_t height,
                         HeatmapScale scale, double floor_db = -120.0);

    // Writes `path` (binary PGM P5, maxval 65535, big-endian) and `path` + ".txt" (mapping sidecar).
    // Throws IoError.
    void write_heatmap(const Heatmap &map, const std::filesystem::path &path);

    // Reads both files back. Throws FormatError on malformed content, IoError when unreadable.
    Heatmap read_heatmap(const std::filesystem::path &path);

    // Decoded magnitudes, row-major
    std::vector<double> decode_heatmap(const Heatmap &map);

} // namespace rffence

#endif
