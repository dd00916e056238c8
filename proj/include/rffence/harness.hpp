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

#ifndef RFFENCE_HARNESS_HPP
#define RFFENCE_HARNESS_HPP

#include "rffence/scenario.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rffence
{
    // Seeded uniform sampling of AoDs (theta in [0, 90), phi in [0, 360) degrees), spread round-robin over
    // the configured AoAs. Duplicate draws are redrawn.
    std::vector<AnglePair> sample_angle_set(const CodebookSpec &spec, std::uint64_t seed);

    // Loads codebook.file when given (its descriptor must match the scenario array), otherwise builds one
    // from sample_angle_set
    Codebook scenario_codebook(const FarFieldScenario &ff, std::uint64_t seed);

    // 20 log10(sum final / sum initial) over the regions of one class (magnitudes averaged before the ratio)
    double class_performance(std::span<const RegionResult> regions, bool hssa);

    inline constexpr std::array<const char *, 5> fsda_bin_labels{"0..-2", "-2..-4", "-4..-6", "-6..-8", "<=-8"};
    inline constexpr std::array<const char *, 3> hssa_bin_labels{">-20", "-20..-50", "<=-50"};
    std::size_t fsda_bin(double p_db);
    std::size_t hssa_bin(double p_db);

    struct CaseRecord
    {
        std::size_t index = 0;
        ShieldCase sc;
        bool ok = false;
        std::string error;
        std::vector<RegionResult> regions;
        std::size_t iterations = 0;
        double final_cost = 0.0;
        double fsda_p = 0.0, hssa_p = 0.0; // Class aggregates
    };

    struct Histogram
    {
        std::vector<const char *> labels;
        std::vector<std::size_t> counts;
        std::size_t total() const;
        double fraction(std::size_t bin) const;
    };

    struct BatchReport
    {
        std::vector<CaseRecord> cases; // Sorted by case index
        std::size_t failures = 0;
        Histogram fsda_regions, fsda_cases, hssa_regions, hssa_cases;
        double hssa_case_le20 = 0.0;    // Fraction of cases with HSSA class P <= -20 dB
        double fsda_case_ge4 = 0.0;     // Fraction of cases with FSDA class P >= -4 dB
        double fsda_region_ge4 = 0.0;   // Fraction of individual FSDA regions with P >= -4 dB
        double seconds = 0.0;           // Wall clock, kept out of the CSV files
    };

    // Samples each case's regions from distinct codebook entries sharing one AoA (seeded per case index), runs
    // SHIELD on all cases in parallel and bins the results. Per-case failures are recorded, not thrown.
    BatchReport run_batch(const FarFieldScenario &ff, const Codebook &cb, std::uint64_t seed, std::size_t n_cases);
    void write_batch(const BatchReport &report, const std::filesystem::path &dir);

    struct SweepRow
    {
        double separation = 0.0; // [rad]
        bool skipped = false;
        std::string reason;
        ShieldCase sc;
        std::vector<RegionResult> regions;
        double fsda_p = 0.0, hssa_p = 0.0;
    };

    // Two FSDAs and one HSSA at the base direction. between: FSDAs at base -/+ s along the axis. outside:
    // FSDAs at base + s and base + s + gap. Layouts that leave the angular domain are skipped.
    ShieldCase sweep_case(const SweepSpec &spec, double separation, Direction aoa);
    // An empty separation list runs the scenario's own regions as a single row with separation 0
    std::vector<SweepRow> run_sweep(const FarFieldScenario &ff);
    void write_sweep(const std::vector<SweepRow> &rows, const std::filesystem::path &dir);

    // Phase profile CSV: "row,col,phase_rad" (far field) or "panel,row,col,phase_rad" (quiet zone)
    void write_phase_csv(const PhaseProfile &phase, const std::filesystem::path &path);
    void write_phase_csv(std::span<const PhaseProfile> panels, const std::filesystem::path &path);
    PhaseProfile read_phase_csv(const std::filesystem::path &path, std::size_t rows, std::size_t cols);

    // Heatmap of an angular field map: one row per theta, one column per phi
    void render_angular(const AngularFieldMap &map, const std::filesystem::path &path, const OutputOptions &opt);

    // Heatmap of the coarse lattice at the z plane nearest to `z`: one row per y, one column per x
    void render_slice(const VolumeFieldMap &map, const DualVolumeGrid &grid, double z,
                      const std::filesystem::path &path, const OutputOptions &opt);

    // CLI subcommands. Each writes its artifacts into `out` and returns human-readable summary lines.
    std::vector<std::string> command_codebook_build(const Scenario &sc, const std::filesystem::path &out);
    std::vector<std::string> command_shield_run(const Scenario &sc, const std::filesystem::path &out);
    std::vector<std::string> command_shield_batch(const Scenario &sc, const std::filesystem::path &out);
    std::vector<std::string> command_shield_sweep(const Scenario &sc, const std::filesystem::path &out);
    std::vector<std::string> command_quietzone_run(const Scenario &sc, const std::filesystem::path &out);
    std::vector<std::string> command_render(const Scenario &sc, const std::filesystem::path &out);

} // namespace rffence

#endif
