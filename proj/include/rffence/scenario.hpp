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

#ifndef RFFENCE_SCENARIO_HPP
#define RFFENCE_SCENARIO_HPP

#include "rffence/codebook.hpp"
#include "rffence/heatmap.hpp"
#include "rffence/quietzone.hpp"
#include "rffence/shield.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rffence
{
    inline constexpr int scenario_schema_version = 1;

    enum class ScenarioKind
    {
        far_field,
        quiet_zone
    };

    enum class SweepAxis
    {
        azimuth,
        elevation
    };

    enum class SweepLayout
    {
        between, // HSSA inside the angular span of the two FSDAs
        outside  // HSSA outside that span
    };

    struct OutputOptions
    {
        bool heatmaps = true;
        HeatmapScale scale = HeatmapScale::db;
        double floor_db = -120.0;
        std::vector<double> slices_z; // Quiet-zone slice heights [m]; empty = zone center height
        bool total_field = false;     // Add the direct source path to rendered quiet-zone slices
    };

    struct CodebookSpec
    {
        std::size_t entries = 500;
        std::vector<Direction> aoas{Direction{}}; // Entries are spread round-robin over these AoAs
        std::optional<std::filesystem::path> file; // Load instead of building
    };

    struct BatchSpec
    {
        std::size_t cases = 50;
        std::size_t fsda = 2, hssa = 1;
    };

    struct SweepSpec
    {
        SweepAxis axis = SweepAxis::azimuth;
        SweepLayout layout = SweepLayout::outside;
        Direction base = Direction::degrees(30.0, 90.0); // HSSA direction
        double gap = deg2rad(30.0);                      // FSDA spacing for the outside layout [rad]
        std::vector<double> separations;                 // HSSA to nearest FSDA [rad]
    };

    struct FarFieldScenario
    {
        ArrayDescriptor desc;
        double resolution = deg2rad(1.0);
        Direction aoa;
        std::vector<Direction> fsda, hssa;
        ShieldParams shield;
        CodebookSpec codebook;
        BatchSpec batch;
        SweepSpec sweep;
        std::optional<std::filesystem::path> render_phase_file;

        ShieldCase shield_case() const { return {aoa, fsda, hssa}; }
        AngularGrid grid() const { return AngularGrid::uniform(resolution); }
    };

    struct QuietZoneScenario
    {
        double frequency = 28e9;
        double side = 4.0;
        std::size_t rows = 16, cols = 16;
        double margin = 0.1;
        Vec3 source{2.8, 2.0, 2.0};
        double amplitude = 1.0;
        std::array<std::size_t, 3> coarse_counts{41, 41, 41};
        Vec3 zone_center{2.0, 2.0, 2.0};
        double zone_radius = 0.5;
        double refinement = 1.0;
        std::optional<std::size_t> fine_points; // Target fine-point count, overrides refinement
        QzOptimizerParams optimizer;
        std::size_t memory_budget = std::size_t(1) << 30; // Field cache budget [bytes]

        Scene scene() const;
        DualVolumeGrid grid() const;
    };

    struct Scenario
    {
        ScenarioKind kind = ScenarioKind::far_field;
        std::string name;
        std::uint64_t seed = 1;
        OutputOptions output;
        FarFieldScenario far_field;
        QuietZoneScenario quiet_zone;
    };

    // Parses a JSON scenario. Schema violations raise ConfigError carrying the dotted field path and the
    // 1-based line of the offending field. Relative file paths are resolved against `base_dir`.
    Scenario parse_scenario(const std::string &text, const std::filesystem::path &base_dir = {});

    // Reads and parses a scenario file (IoError when unreadable)
    Scenario load_scenario(const std::filesystem::path &path);

} // namespace rffence

#endif
