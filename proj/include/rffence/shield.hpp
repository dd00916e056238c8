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

#ifndef RFFENCE_SHIELD_HPP
#define RFFENCE_SHIELD_HPP

#include "rffence/codebook.hpp"
#include "rffence/farfield.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace rffence
{
    struct ShieldParams
    {
        double tau_fsda = 0.95;  // Mask threshold, fraction of each entry's maximum
        double tau_hssa = 0.96;
        double eta = 0.75;       // Compromise factor inside FSDA/HSSA overlaps
        double w_opt = 0.5;      // Weight of the suppression term
        double mu = 0.02;        // Learning rate [m^2/V^2]
        double tolerance = 1e-3; // Relative cost change that ends refinement
        std::size_t max_iterations = 100;
        void validate() const;
    };

    // Boolean masks over an AngularGrid (one byte per cell, theta-major)
    struct RegionMasks
    {
        std::vector<std::uint8_t> fsda, hssa;

        std::vector<std::size_t> fsda_cells() const;
        std::vector<std::size_t> hssa_cells() const;
    };

    // Dominant-direction masks. `maps` holds the d FSDA field maps followed by the HSSA maps. A cell joins a
    // mask when |E_k| > tau max|E_k| for one of its entries; each entry's own argmax cells always join.
    RegionMasks build_masks(std::span<const AngularFieldMap> maps, std::size_t d, const ShieldParams &params);

    // Largest-magnitude FSDA value per cell, scaled by eta where the masks overlap, zero outside the FSDA mask
    AngularFieldMap composite_field(std::span<const AngularFieldMap> maps, std::size_t d, const RegionMasks &masks,
                                    const ShieldParams &params);

    // Matched-filter aperture synthesis:
    //   a_n = sum_dirs E_common(dir) exp(-j psi_out_n(dir)),  Phi_n = (arg(a_n) - psi_inc_n) mod 2pi
    // Throws NumericalError when E_common vanishes everywhere.
    PhaseProfile back_project(const AngularFieldMap &common, const RisArray &array, const PlaneWaveSource &src);

    // Masked least-squares problem J = sum_{M_d} |E - T|^2 + w_opt sum_{M_u} |E|^2 on a fixed set of cells.
    // Cells in both masks appear twice, once per term.
    class ShieldProblem
    {
    public:
        ShieldProblem(const RisArray &array, const PlaneWaveSource &src, const FarFieldConfig &cfg,
                      std::span<const Direction> fsda_dirs, std::span<const cplx> fsda_targets,
                      std::span<const Direction> hssa_dirs, double w_opt);

        // Builds the problem from masks, with targets taken from the composite field
        static ShieldProblem from_masks(const RisArray &array, const PlaneWaveSource &src, const FarFieldConfig &cfg,
                                        const AngularFieldMap &common, const RegionMasks &masks, double w_opt);

        std::size_t elements() const { return elements_; }
        std::size_t cells() const { return scale_.size(); }

        // Returns J; fills dJ/dPhi_n into `grad` unless it is empty
        double cost_and_gradient(const PhaseProfile &phase, std::span<double> grad, Exec exec = Exec::parallel) const;
        double cost(const PhaseProfile &phase, Exec exec = Exec::parallel) const { return cost_and_gradient(phase, {}, exec); }

        // Field at every problem cell
        std::vector<cplx> fields(const PhaseProfile &phase) const;

        std::span<const cplx> steering() const { return steering_; }
        std::span<const double> scale() const { return scale_; }
        std::span<const cplx> targets() const { return target_; }
        std::span<const double> weights() const { return weight_; }
        std::span<const double> incident() const { return psi_inc_; }

    private:
        ShieldProblem() = default;
        void add_cell(const RisArray &array, double k, const FarFieldConfig &cfg, Direction dir, cplx target,
                      double weight);
        std::vector<cplx> phasors(const PhaseProfile &phase) const;

        std::size_t elements_ = 0;
        std::vector<cplx> steering_;
        std::vector<double> scale_, weight_, psi_inc_;
        std::vector<cplx> target_;
    };

    struct RefineResult
    {
        PhaseProfile phase;
        std::size_t iterations = 0;
        std::vector<double> cost_history; // Cost after each accepted step, starting with the initial cost
        double final_mu = 0.0;
    };

    // Gradient descent Phi <- (Phi - mu grad J) mod 2pi. A step that increases the cost is retried with mu
    // halved; the reduced mu carries over to later iterations. Stops when |dJ|/J < tolerance, when no step
    // lowers the cost, or after max_iterations. Throws NumericalError on a non-finite cost.
    RefineResult refine(const ShieldProblem &problem, const PhaseProfile &initial, const ShieldParams &params,
                        Exec exec = Exec::parallel);

    // 20 log10(final / initial), clamped to -200 dB when final < 1e-10 initial. Throws NumericalError if initial <= 0.
    double performance(double final_magnitude, double initial_magnitude);
    inline double performance(const PoiSample &final_sample, const PoiSample &initial_sample)
    {
        return performance(final_sample.magnitude, initial_sample.magnitude);
    }
    inline constexpr double performance_floor_db = -200.0;

    struct RegionResult
    {
        bool hssa = false;
        Direction direction;
        double initial = 0.0; // Codebook peak of the region's steering entry [V/m]
        double common = 0.0;  // |E| at the POI under Phi_common
        double final = 0.0;   // |E| at the POI under Phi_opt
        double p_db = 0.0;    // performance(final, initial)
    };

    struct ShieldResult
    {
        PhaseProfile phi_common, phi_opt;
        std::vector<RegionResult> regions; // d FSDAs then u HSSAs
        std::size_t iterations = 0;
        double initial_cost = 0.0, final_cost = 0.0;
        std::vector<double> cost_history;
        std::size_t fsda_cells = 0, hssa_cells = 0;
    };

    // One SHIELD case: FSDA and HSSA steering entries for a shared incident direction
    struct ShieldCase
    {
        Direction aoa;
        std::vector<Direction> fsda, hssa;
        void validate() const;
    };

    // Steering entries for every region of a case, generated directly (d FSDA entries then u HSSA entries)
    std::vector<CodebookEntry> case_entries(const ArrayDescriptor &desc, const ShieldCase &sc);

    // Same, retrieved from a codebook by nearest-key lookup
    std::vector<CodebookEntry> case_entries(const Codebook &cb, const ShieldCase &sc);

    // Full operating-phase pipeline: masks, composite, back-projection, refinement and per-region metrics.
    // Field maps of the entries are evaluated on `grid` under each entry's own AoA; the operating source is
    // the case AoA.
    ShieldResult run_shield(const ArrayDescriptor &desc, std::span<const CodebookEntry> entries,
                            const ShieldCase &sc, const ShieldParams &params, const AngularGrid &grid,
                            Exec exec = Exec::parallel);

} // namespace rffence

#endif
