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

// OpenMP kernels. Parallelism is always across independent outputs (directions, grid points,
// elements) or across fixed-size blocks that are reduced in index order, so results never depend
// on the number of threads.

#include "rffence/kernels.hpp"
#include "rffence/errors.hpp"

#include <algorithm>
#include <limits>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rffence::kernels
{
    void far_field_parallel(const FarFieldArgs &args, std::span<cplx> out)
    {
        const std::size_t rows = args.y.size(), cols = args.x.size();
        const long long n_theta = (long long)args.theta.size(), n_phi = (long long)args.phi.size();

        // exp(j k sin(theta) (x cos(phi) + y sin(phi))) factorizes into a column term and a row term,
        // so each direction costs rows + cols complex exponentials instead of rows * cols.
#pragma omp parallel
        {
            std::vector<cplx> ex(cols), ey(rows);
#pragma omp for collapse(2) schedule(static)
            for (long long i = 0; i < n_theta; ++i)
                for (long long j = 0; j < n_phi; ++j)
                {
                    const double st = args.k * std::sin(args.theta[i]);
                    const double alpha = st * std::cos(args.phi[j]);
                    const double beta = st * std::sin(args.phi[j]);
                    for (std::size_t c = 0; c < cols; ++c)
                        ex[c] = std::polar(1.0, alpha * args.x[c]);
                    for (std::size_t r = 0; r < rows; ++r)
                        ey[r] = std::polar(1.0, beta * args.y[r]);
                    cplx sum = 0.0;
                    for (std::size_t r = 0; r < rows; ++r)
                    {
                        const cplx *a = args.a.data() + r * cols;
                        cplx inner = 0.0;
                        for (std::size_t c = 0; c < cols; ++c)
                            inner += a[c] * ex[c];
                        sum += ey[r] * inner;
                    }
                    out[i * n_phi + j] = (args.e0 * element_pattern(args.theta[i], args.rho)) * sum;
                }
        }
    }

    void near_field_parallel(std::span<const Vec3> elements, std::span<const cplx> w, double k,
                             std::span<const Vec3> points, std::span<cplx> out)
    {
        const long long n_points = (long long)points.size();
        const std::size_t n_el = elements.size();
        constexpr long long none = std::numeric_limits<long long>::max();
        long long bad_point = none, bad_element = 0;

#pragma omp parallel for schedule(static)
        for (long long p = 0; p < n_points; ++p)
        {
            cplx sum = 0.0;
            const Vec3 pt = points[p];
            for (std::size_t n = 0; n < n_el; ++n)
            {
                double R = distance(pt, elements[n]);
                if (R == 0.0)
                {
#pragma omp critical(rffence_near_field_error)
                    if (p < bad_point)
                        bad_point = p, bad_element = (long long)n;
                    break;
                }
                sum += w[n] * std::polar(1.0 / R, k * R);
            }
            out[p] = sum;
        }
        if (bad_point != none)
            throw GeometryError("observation point " + std::to_string(bad_point) + " coincides with element " +
                                std::to_string(bad_element) + " (R = 0)");
    }

    double masked_cost_parallel(const MaskedCostArgs &args, std::span<const cplx> u, std::span<cplx> field,
                                std::span<double> grad)
    {
        const long long cells = (long long)args.scale.size();
        const std::size_t N = args.elements;
        std::vector<cplx> q(cells);
        std::vector<double> cell_cost(cells);

#pragma omp parallel for schedule(static)
        for (long long c = 0; c < cells; ++c)
        {
            const cplx *row = args.steering.data() + c * N;
            cplx sum = 0.0;
            for (std::size_t n = 0; n < N; ++n)
                sum += u[n] * row[n];
            cplx E = args.scale[c] * sum;
            if (!field.empty())
                field[c] = E;
            cplx res = E - args.target[c];
            cell_cost[c] = args.weight[c] * std::norm(res);
            q[c] = std::conj(res) * (args.weight[c] * args.scale[c]);
        }
        double cost = 0.0;
        for (long long c = 0; c < cells; ++c)
            cost += cell_cost[c];

        if (!grad.empty())
        {
#pragma omp parallel for schedule(static)
            for (long long n = 0; n < (long long)N; ++n)
            {
                cplx acc = 0.0;
                for (long long c = 0; c < cells; ++c)
                    acc += q[c] * args.steering[c * N + n];
                grad[n] = -2.0 * std::imag(acc * u[n]);
            }
        }
        return cost;
    }

    cplx conj_dot_parallel(std::span<const cplx> s, std::span<const cplx> c)
    {
        const std::size_t n = s.size();
        const long long blocks = (long long)((n + reduction_block - 1) / reduction_block);
        if (blocks <= 1)
            return conj_dot_serial(s, c);
        std::vector<cplx> partial(blocks);
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < blocks; ++b)
        {
            std::size_t lo = std::size_t(b) * reduction_block, hi = std::min(n, lo + reduction_block);
            cplx acc = 0.0;
            for (std::size_t p = lo; p < hi; ++p)
                acc += std::conj(s[p]) * c[p];
            partial[b] = acc;
        }
        cplx total = 0.0;
        for (const auto &v : partial)
            total += v;
        return total;
    }

    void axpy_parallel(cplx delta, std::span<const cplx> c, std::span<cplx> s)
    {
        const long long n = (long long)s.size();
        if (n <= (long long)reduction_block)
            return axpy_serial(delta, c, s);
#pragma omp parallel for schedule(static)
        for (long long p = 0; p < n; ++p)
            s[p] += delta * c[p];
    }

} // namespace rffence::kernels
