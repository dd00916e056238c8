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

#ifndef RFFENCE_QUIETZONE_HPP
#define RFFENCE_QUIETZONE_HPP

#include "rffence/nearfield.hpp"

#include <span>
#include <vector>

namespace rffence
{
    struct QzOptimizerParams
    {
        double initial_step = pi / 8;   // Delta phi [rad]
        std::size_t max_iterations = 150; // Full sweeps over all elements
        double tolerance = 1e-9;        // Relative zone-power improvement per sweep that ends the descent
        double threshold = 0.0;         // Stop once the zone mean magnitude drops to this [V/m]; 0 disables
        double min_step = 1e-10;        // Stop once Delta phi falls below this [rad]
        bool self_check = false;        // Recompute the zone field after every sweep and compare with the cache
        void validate() const;
    };

    // Zone field S_p = sum_n exp(j Phi_n) c_{n,p} with c_{n,p} = E_inc,n exp(j k R_np) / R_np, kept up to date
    // under single-element phase changes. Columns c_n are stored when they fit the memory budget and are
    // recomputed on demand otherwise.
    class FieldCache
    {
    public:
        FieldCache(const Scene &scene, std::span<const cplx> incident, std::span<const Vec3> zone_points,
                   std::span<const PhaseProfile> phases, Exec exec = Exec::parallel,
                   std::size_t memory_budget = std::size_t(1) << 30);

        std::size_t elements() const { return phases_.size(); }
        std::size_t points() const { return points_.size(); }
        bool stores_columns() const { return !columns_.empty(); }

        double phase(std::size_t n) const { return phases_[n]; }
        std::span<const double> phases() const { return phases_; }
        std::vector<PhaseProfile> profiles() const;

        std::span<const cplx> field() const { return sum_; }
        double column_power(std::size_t n) const { return column_power_[n]; } // B_n = sum_p |c_{n,p}|^2
        std::span<const cplx> column(std::size_t n, std::vector<cplx> &scratch) const;

        double power_sum() const; // sum_p |S_p|^2
        double magnitude_sum() const; // sum_p |S_p|

        // A_n = sum_p conj(S_p) c_{n,p}; the power change for Phi_n -> Phi_n + s is
        //   dJ = 2 Re(delta A_n) + |delta|^2 B_n,  delta = exp(j (Phi_n + s)) - exp(j Phi_n)
        cplx overlap(std::size_t n, std::span<const cplx> col) const;
        double power_change(std::size_t n, double new_phase, cplx overlap) const;

        // Sets Phi_n and updates S in place
        void set_phase(std::size_t n, double new_phase, std::span<const cplx> col);
        void set_phase(std::size_t n, double new_phase);

        // From-scratch evaluation of S for the current phases
        std::vector<cplx> recompute() const;

        // ||S_cache - S_full|| / ||S_full||
        double divergence() const;

    private:
        void fill_column(std::size_t n, std::span<cplx> out) const;

        std::vector<Vec3> elements_;
        std::vector<cplx> incident_;
        std::vector<Vec3> points_;
        std::vector<std::size_t> panel_rows_, panel_cols_;
        double k_ = 0.0;
        Exec exec_;
        std::vector<double> phases_;
        std::vector<cplx> columns_; // elements x points, empty when over budget
        std::vector<double> column_power_;
        std::vector<cplx> sum_;
    };

    // One sequential sweep in element order: Phi_n <- arg(-r_n) with r_n = sum_p conj(c_{n,p}) (S_p - c_{n,p} exp(j Phi_n)),
    // the exact minimizer of the zone power over Phi_n with all other phases fixed. Elements with r_n = 0 keep
    // their phase.
    void init_per_element(FieldCache &cache);

    // Convenience form starting from the PEC baseline on every panel
    std::vector<PhaseProfile> init_per_element(const Scene &scene, const DualVolumeGrid &grid,
                                               Exec exec = Exec::parallel);

    enum class QzStop
    {
        threshold,
        tolerance,
        max_iterations,
        step_floor
    };
    const char *to_string(QzStop s);

    struct QzSweepRecord
    {
        std::size_t sweep = 0; // 0 = starting point
        double step = 0.0;     // Delta phi used in this sweep
        std::size_t accepted = 0;
        double avg_power = 0.0;
        double avg_magnitude = 0.0;
    };

    struct QzOptimizeResult
    {
        std::vector<QzSweepRecord> history; // Starting point followed by one record per sweep
        QzStop stop = QzStop::max_iterations;
        std::size_t sweeps = 0;
    };

    // Coordinate descent over the candidates {Phi_n, Phi_n + step, Phi_n - step}. A change is accepted when it
    // lowers the zone power by more than 1e-14 of its current value. The step halves after a sweep without
    // accepted changes. Throws NumericalError when self-checking finds the cache off by more than 1e-6.
    QzOptimizeResult optimize(FieldCache &cache, const QzOptimizerParams &params);

    struct QzReport
    {
        std::vector<PhaseProfile> baseline, initial, final;
        QuietZoneMetrics baseline_zone, initial_zone, final_zone; // Suppression relative to the baseline
        double baseline_outside = 0.0, final_outside = 0.0;      // Mean |E| over coarse points outside the zone
        double outside_change_db = 0.0;                           // 20 log10(final_outside / baseline_outside)
        QzOptimizeResult optimization;
        VolumeFieldMap baseline_map, final_map;
    };

    // Baseline (all pi), per-element initialization, coordinate descent and before/after statistics
    QzReport run_quiet_zone(const Scene &scene, const DualVolumeGrid &grid, const QzOptimizerParams &params,
                            Exec exec = Exec::parallel, std::size_t memory_budget = std::size_t(1) << 30);

} // namespace rffence

#endif
