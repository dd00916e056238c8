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

// Serial reference kernels. Written to mirror the formulas directly; no factorization tricks.

#include "rffence/kernels.hpp"
#include "rffence/errors.hpp"

#include <algorithm>
#include <string>

namespace rffence::kernels
{
    double element_pattern(double theta, double rho)
    {
        if (rho == 0.0)
            return 1.0;
        double c = std::cos(theta);
        return std::pow(std::max(c, 0.0), 2.0 * rho);
    }

    void far_field_serial(const FarFieldArgs &args, std::span<cplx> out)
    {
        const std::size_t rows = args.y.size(), cols = args.x.size();
        const std::size_t n_phi = args.phi.size();
        for (std::size_t i = 0; i < args.theta.size(); ++i)
        {
            const double st = std::sin(args.theta[i]);
            const double pattern = args.e0 * element_pattern(args.theta[i], args.rho);
            for (std::size_t j = 0; j < n_phi; ++j)
            {
                const double cp = std::cos(args.phi[j]), sp = std::sin(args.phi[j]);
                cplx sum = 0.0;
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < cols; ++c)
                    {
                        double psi_out = args.k * (args.x[c] * cp + args.y[r] * sp) * st;
                        sum += args.a[r * cols + c] * std::polar(1.0, psi_out);
                    }
                out[i * n_phi + j] = pattern * sum;
            }
        }
    }

    void near_field_serial(std::span<const Vec3> elements, std::span<const cplx> w, double k,
                           std::span<const Vec3> points, std::span<cplx> out)
    {
        for (std::size_t p = 0; p < points.size(); ++p)
        {
            cplx sum = 0.0;
            for (std::size_t n = 0; n < elements.size(); ++n)
            {
                double R = distance(points[p], elements[n]);
                if (R == 0.0)
                    throw GeometryError("observation point " + std::to_string(p) + " coincides with element " +
                                        std::to_string(n) + " (R = 0)");
                sum += w[n] * std::polar(1.0 / R, k * R);
            }
            out[p] = sum;
        }
    }

    double masked_cost_serial(const MaskedCostArgs &args, std::span<const cplx> u, std::span<cplx> field,
                              std::span<double> grad)
    {
        const std::size_t cells = args.scale.size(), N = args.elements;
        std::vector<cplx> q(cells);
        double cost = 0.0;
        for (std::size_t c = 0; c < cells; ++c)
        {
            const cplx *row = args.steering.data() + c * N;
            cplx sum = 0.0;
            for (std::size_t n = 0; n < N; ++n)
                sum += u[n] * row[n];
            cplx E = args.scale[c] * sum;
            if (!field.empty())
                field[c] = E;
            cplx res = E - args.target[c];
            cost += args.weight[c] * std::norm(res);
            q[c] = std::conj(res) * (args.weight[c] * args.scale[c]);
        }
        if (!grad.empty())
            for (std::size_t n = 0; n < N; ++n)
            {
                cplx acc = 0.0;
                for (std::size_t c = 0; c < cells; ++c)
                    acc += q[c] * args.steering[c * N + n];
                grad[n] = -2.0 * std::imag(acc * u[n]);
            }
        return cost;
    }

    cplx conj_dot_serial(std::span<const cplx> s, std::span<const cplx> c)
    {
        cplx acc = 0.0;
        for (std::size_t p = 0; p < s.size(); ++p)
            acc += std::conj(s[p]) * c[p];
        return acc;
    }

    void axpy_serial(cplx delta, std::span<const cplx> c, std::span<cplx> s)
    {
        for (std::size_t p = 0; p < s.size(); ++p)
            s[p] += delta * c[p];
    }

} // namespace rffence::kernels
