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

#ifndef RFFENCE_KERNELS_HPP
#define RFFENCE_KERNELS_HPP

// Hot loops of the toolkit. Every kernel exists twice: a plain serial reference that follows the
// physics formula term by term, and an OpenMP version that is used by default. Both must produce
// the same numbers (bit-identical where the summation order is the same, 1e-12 relative otherwise);
// the tests and bench/ compare them.

#include "rffence/em_core.hpp"

#include <span>

namespace rffence
{
    enum class Exec
    {
        serial,
        parallel
    };

    namespace kernels
    {
        // Far-field array sum on a (theta, phi) grid:
        //   out[i, j] = e0 cos(theta_i)^(2 rho) sum_{r,c} a[r, c] exp(j k sin(theta_i) (x_c cos(phi_j) + y_r sin(phi_j)))
        // `a` holds the direction-independent phasors exp(j (Phi_n + psi_inc_n)), row-major (rows = y.size()).
        struct FarFieldArgs
        {
            std::span<const double> x;     // Local column coordinates [m]
            std::span<const double> y;     // Local row coordinates [m]
            std::span<const cplx> a;       // rows * cols phasors
            double k = 0.0;                // Wavenumber [1/m]
            double e0 = 1.0;               // Normalization [V/m]
            double rho = 0.0;              // Element pattern exponent
            std::span<const double> theta; // [rad]
            std::span<const double> phi;   // [rad]
        };
        void far_field_serial(const FarFieldArgs &args, std::span<cplx> out);
        void far_field_parallel(const FarFieldArgs &args, std::span<cplx> out);

        // Element pattern cos(theta)^(2 rho)
        double element_pattern(double theta, double rho);

        // Near-field spherical-wave sum: out[p] = sum_n w[n] exp(j k R_pn) / R_pn.
        // Throws GeometryError naming the first (element, point) pair with R = 0.
        void near_field_serial(std::span<const Vec3> elements, std::span<const cplx> w, double k,
                               std::span<const Vec3> points, std::span<cplx> out);
        void near_field_parallel(std::span<const Vec3> elements, std::span<const cplx> w, double k,
                                 std::span<const Vec3> points, std::span<cplx> out);

        // Masked least-squares cost over a list of observation cells and its phase gradient.
        //   E_c   = scale_c sum_n u_n S[c, n],  u_n = exp(j (Phi_n + psi_inc_n))
        //   J     = sum_c weight_c |E_c - target_c|^2
        //   dJ/dPhi_n = sum_c weight_c (-2) Im{ conj(E_c - target_c) scale_c u_n S[c, n] }
        // S is row-major (cells x elements). `field` receives E_c and may be empty; `grad` may be empty.
        struct MaskedCostArgs
        {
            std::span<const cplx> steering; // S, cells * elements
            std::span<const double> scale;  // e0 cos^(2 rho) theta_c per cell
            std::span<const cplx> target;
            std::span<const double> weight;
            std::size_t elements = 0;
        };
        double masked_cost_serial(const MaskedCostArgs &args, std::span<const cplx> u, std::span<cplx> field,
                                  std::span<double> grad);
        double masked_cost_parallel(const MaskedCostArgs &args, std::span<const cplx> u, std::span<cplx> field,
                                    std::span<double> grad);

        // sum_p conj(s[p]) c[p]. The parallel version reduces fixed-size blocks in index order, so its
        // result does not depend on the thread count.
        cplx conj_dot_serial(std::span<const cplx> s, std::span<const cplx> c);
        cplx conj_dot_parallel(std::span<const cplx> s, std::span<const cplx> c);

        // s[p] += delta * c[p]
        void axpy_serial(cplx delta, std::span<const cplx> c, std::span<cplx> s);
        void axpy_parallel(cplx delta, std::span<const cplx> c, std::span<cplx> s);

        inline constexpr std::size_t reduction_block = 2048;

    } // namespace kernels
} // namespace rffence

#endif
