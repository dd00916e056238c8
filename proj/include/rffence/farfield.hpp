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

#ifndef RFFENCE_FARFIELD_HPP
#define RFFENCE_FARFIELD_HPP

#include "rffence/em_core.hpp"
#include "rffence/kernels.hpp"

#include <vector>

namespace rffence
{
    struct FarFieldConfig
    {
        double rho = 1.0; // Element pattern exponent, cos^(2 rho)(theta); 0 = isotropic
        double e0 = 1.0;  // Normalization of the scattered field [V/m]
        void validate() const;
    };

    struct PoiSample
    {
        Direction direction;
        double magnitude = 0.0; // |E(theta_d, phi_d)| [V/m]
    };

    // psi = k (x cos(phi) + y sin(phi)) sin(theta) for every element, row-major and not wrapped.
    // Used for the incident direction (psi_inc) and for observation directions (psi_out).
    std::vector<double> direction_phase(const RisArray &array, double wavenumber, Direction dir);

    inline std::vector<double> incident_phase(const RisArray &array, const PlaneWaveSource &src)
    {
        return direction_phase(array, src.wavenumber(), src.incidence);
    }

    // exp(j (Phi_n + psi_inc_n)), the direction-independent part of every element contribution
    std::vector<cplx> element_phasors(const RisArray &array, const PhaseProfile &phase, const PlaneWaveSource &src);

    // E(theta, phi) = E_0 cos^(2 rho)(theta) sum_n exp(j (Phi_n + psi_inc_n + psi_out_n(theta, phi)))
    // on every grid direction. Throws ConfigError when the profile does not match the array.
    AngularFieldMap scattered_field(const RisArray &array, const PhaseProfile &phase, const PlaneWaveSource &src,
                                    const AngularGrid &grid, const FarFieldConfig &cfg, Exec exec = Exec::parallel);

    // Same sum evaluated at one exact direction (no grid quantization)
    cplx field_at(const RisArray &array, const PhaseProfile &phase, const PlaneWaveSource &src,
                  const FarFieldConfig &cfg, Direction dir);

    PoiSample field_at_poi(const RisArray &array, const PhaseProfile &phase, const PlaneWaveSource &src,
                           const FarFieldConfig &cfg, Direction dir);

    // Upper bound E_0 N_el cos^(2 rho)(theta), reached only when all element phasors align
    double coherence_bound(const RisArray &array, const FarFieldConfig &cfg, double theta);

} // namespace rffence

#endif
