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

#ifndef RFFENCE_NEARFIELD_HPP
#define RFFENCE_NEARFIELD_HPP

#include "rffence/em_core.hpp"
#include "rffence/kernels.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rffence
{
    // Enclosed or open square domain [0, L]^3 whose vertical walls carry RIS panels
    struct Scene
    {
        double side = 0.0; // L [m]
        std::vector<RisArray> panels;
        PointSource source;

        double wavenumber() const { return source.wavenumber(); }
        std::size_t element_count() const; // N_RIS
        std::vector<Vec3> element_positions() const; // Panel-major, row-major within a panel
        void validate() const;

        // True when p lies in the plane of a panel and inside its footprint, where the field is not defined
        bool on_panel_surface(const Vec3 &p) const;

        // Four panels centered on the walls x = 0, x = L, y = 0, y = L. Each wall rectangle is shrunk by
        // margin * L on every side and divided into rows x cols equal cells, one element per cell center.
        // Rows run along +z, columns along the horizontal wall axis.
        static Scene four_walls(double side, std::size_t rows, std::size_t cols, double margin, PointSource source);
    };

    struct VolumeFieldMap
    {
        std::vector<cplx> coarse; // One value per coarse point (points inside the sphere included)
        std::vector<cplx> fine;   // One value per fine point
        std::vector<std::uint8_t> coarse_on_surface; // Coarse points on an RIS panel: not evaluated, value 0
    };

    struct QuietZoneMetrics
    {
        double avg_power = 0.0;     // (1/N_QZ) sum |E|^2 over fine points [V^2/m^2]
        double avg_magnitude = 0.0; // (1/N_QZ) sum |E| over fine points [V/m]
        std::optional<double> suppression_db; // 20 log10(avg_magnitude / reference avg_magnitude)
    };

    // E_inc,n = (E_0 / d_n) exp(j k d_n). Throws GeometryError if the source sits on an element.
    std::vector<cplx> illuminate(const Scene &scene);

    // Flattens per-panel profiles into exp(j Phi_n) weights times the incident fields
    std::vector<cplx> element_weights(const Scene &scene, std::span<const PhaseProfile> phases,
                                      std::span<const cplx> incident);

    // Profiles at the PEC baseline Phi = pi for every panel
    std::vector<PhaseProfile> uniform_profiles(const Scene &scene, double phase = pi);

    // E_scat(p) = sum_n E_inc,n exp(j Phi_n) exp(j k R_n(p)) / R_n(p) on both grids. The direct
    // source-to-point path is added only when include_direct is set. Coarse points on a panel surface are
    // skipped; any other point with R = 0 raises GeometryError.
    VolumeFieldMap scatter_to_grid(const Scene &scene, std::span<const PhaseProfile> phases,
                                   std::span<const cplx> incident, const DualVolumeGrid &grid,
                                   Exec exec = Exec::parallel, bool include_direct = false);

    // Fine-grid-only evaluation, used where the coarse volume is not needed
    std::vector<cplx> scatter_to_points(const Scene &scene, std::span<const PhaseProfile> phases,
                                        std::span<const cplx> incident, std::span<const Vec3> points,
                                        Exec exec = Exec::parallel);

    // Statistics over the fine (in-zone) points. Throws ConfigError on an empty zone or size mismatch.
    QuietZoneMetrics quiet_zone_metrics(std::span<const cplx> zone_values, std::span<const cplx> reference = {});
    QuietZoneMetrics quiet_zone_metrics(const VolumeFieldMap &map, const VolumeFieldMap *reference = nullptr);

    // Mean |E| over coarse points outside the sphere and off the panel surfaces
    double outside_mean_magnitude(const VolumeFieldMap &map, const DualVolumeGrid &grid);

} // namespace rffence

#endif
