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

#include "rffence/farfield.hpp"
#include "rffence/errors.hpp"

#include <string>

namespace rffence
{
    void FarFieldConfig::validate() const
    {
        if (!(rho >= 0.0) || !std::isfinite(rho))
            throw ConfigError("farfield.rho", "must be >= 0");
        if (!(e0 > 0.0) || !std::isfinite(e0))
            throw ConfigError("farfield.e0", "must be > 0");
    }

    std::vector<double> direction_phase(const RisArray &array, double wavenumber, Direction dir)
    {
        const double s = wavenumber * std::sin(dir.theta);
        const double cx = std::cos(dir.phi) * s, cy = std::sin(dir.phi) * s;
        std::vector<double> psi(array.size());
        for (std::size_t r = 0; r < array.rows(); ++r)
            for (std::size_t c = 0; c < array.cols(); ++c)
                psi[r * array.cols() + c] = array.local_x(c) * cx + array.local_y(r) * cy;
        return psi;
    }

    namespace
    {
        void check_dimensions(const RisArray &array, const PhaseProfile &phase)
        {
            if (!phase.matches(array))
                throw ConfigError("phase", "profile is " + std::to_string(phase.rows()) + "x" +
                                               std::to_string(phase.cols()) + " but the array is " +
                                               std::to_string(array.rows()) + "x" + std::to_string(array.cols()));
        }
    } // namespace

    std::vector<cplx> element_phasors(const RisArray &array, const PhaseProfile &phase, const PlaneWaveSource &src)
    {
        check_dimensions(array, phase);
        auto psi_inc = incident_phase(array, src);
        std::vector<cplx> a(array.size());
        for (std::size_t n = 0; n < a.size(); ++n)
            a[n] = std::polar(1.0, phase[n] + psi_inc[n]);
        return a;
    }

    AngularFieldMap scattered_field(const RisArray &array, const PhaseProfile &phase, const PlaneWaveSource &src,
                                    const AngularGrid &grid, const FarFieldConfig &cfg, Exec exec)
    {
        cfg.validate();
        auto a = element_phasors(array, phase, src);
        auto x = array.local_x_coords();
        auto y = array.local_y_coords();
        kernels::FarFieldArgs args{x, y, a, src.wavenumber(), cfg.e0, cfg.rho, grid.theta(), grid.phi()};

        AngularFieldMap map(grid);
        if (exec == Exec::serial)
            kernels::far_field_serial(args, map.values);
        else
            kernels::far_field_parallel(args, map.values);
        return map;
    }

    cplx field_at(const RisArray &array, const PhaseProfile &phase, const PlaneWaveSource &src,
                  const FarFieldConfig &cfg, Direction dir)
    {
        check_dimensions(array, phase);
        auto psi_inc = incident_phase(array, src);
        auto psi_out = direction_phase(array, src.wavenumber(), dir);
        cplx sum = 0.0;
        for (std::size_t n = 0; n < array.size(); ++n)
            sum += std::polar(1.0, phase[n] + psi_inc[n] + psi_out[n]);
        return cfg.e0 * kernels::element_pattern(dir.theta, cfg.rho) * sum;
    }

    PoiSample field_at_poi(const RisArray &array, const PhaseProfile &phase, const PlaneWaveSource &src,
                           const FarFieldConfig &cfg, Direction dir)
    {
        return {dir, std::abs(field_at(array, phase, src, cfg, dir))};
    }

    double coherence_bound(const RisArray &array, const FarFieldConfig &cfg, double theta)
    {
        return cfg.e0 * double(array.size()) * kernels::element_pattern(theta, cfg.rho);
    }

} // namespace rffence
