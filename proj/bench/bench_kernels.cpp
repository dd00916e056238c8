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

// Serial reference kernels against their OpenMP versions. Run with --benchmark_filter to pick a kernel;
// thread count follows OMP_NUM_THREADS.

#include "rffence/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

using namespace rffence;

namespace
{
    struct FarFieldData
    {
        std::vector<double> x, y, theta, phi;
        std::vector<cplx> a, out;

        explicit FarFieldData(std::size_t n, double res_deg)
        {
            std::mt19937_64 rng(1);
            std::uniform_real_distribution<double> u(0.0, two_pi);
            const double d = 6e-5;
            for (std::size_t i = 0; i < n; ++i)
            {
                x.push_back((double(i) - (double(n) - 1) / 2) * d);
                y.push_back((double(i) - (double(n) - 1) / 2) * d);
            }
            for (std::size_t i = 0; i < n * n; ++i)
                a.push_back(std::polar(1.0, u(rng)));
            const double res = deg2rad(res_deg);
            for (double t = 0.0; t <= pi / 2 + 1e-12; t += res)
                theta.push_back(t);
            for (double p = 0.0; p < two_pi - 1e-12; p += res)
                phi.push_back(p);
            out.resize(theta.size() * phi.size());
        }

        kernels::FarFieldArgs args() const { return {x, y, a, two_pi / 3e-4, 1.0, 1.0, theta, phi}; }
    };

    template <bool Parallel>
    void far_field(benchmark::State &state)
    {
        FarFieldData d(std::size_t(state.range(0)), 2.0);
        for (auto _ : state)
        {
            if constexpr (Parallel)
                kernels::far_field_parallel(d.args(), d.out);
            else
                kernels::far_field_serial(d.args(), d.out);
            benchmark::DoNotOptimize(d.out.data());
        }
        state.SetItemsProcessed(state.iterations() * std::int64_t(d.out.size() * d.a.size()));
    }

    struct NearFieldData
    {
        std::vector<Vec3> elements, points;
        std::vector<cplx> w, out;

        NearFieldData(std::size_t n_el, std::size_t n_pts)
        {
            std::mt19937_64 rng(2);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (std::size_t i = 0; i < n_el; ++i)
            {
                elements.push_back({0.0, 4.0 * u(rng), 4.0 * u(rng)});
                w.push_back(std::polar(1.0, two_pi * u(rng)));
            }
            for (std::size_t i = 0; i < n_pts; ++i)
                points.push_back({0.5 + 3.0 * u(rng), 4.0 * u(rng), 4.0 * u(rng)});
            out.resize(n_pts);
        }
    };

    template <bool Parallel>
    void near_field(benchmark::State &state)
    {
        NearFieldData d(1024, std::size_t(state.range(0)));
        const double k = two_pi * 28e9 / speed_of_light;
        for (auto _ : state)
        {
            if constexpr (Parallel)
                kernels::near_field_parallel(d.elements, d.w, k, d.points, d.out);
            else
                kernels::near_field_serial(d.elements, d.w, k, d.points, d.out);
            benchmark::DoNotOptimize(d.out.data());
        }
        state.SetItemsProcessed(state.iterations() * std::int64_t(d.elements.size() * d.points.size()));
    }

    template <bool Parallel>
    void masked_cost(benchmark::State &state)
    {
        const std::size_t elements = std::size_t(state.range(0)), cells = 400;
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, two_pi);
        std::vector<cplx> steering(cells * elements), target(cells), field(cells), ph(elements);
        std::vector<double> scale(cells, 1.0), weight(cells, 1.0), grad(elements);
        for (auto &s : steering)
            s = std::polar(1.0, u(rng));
        for (auto &t : target)
            t = std::polar(10.0, u(rng));
        for (auto &p : ph)
            p = std::polar(1.0, u(rng));
        kernels::MaskedCostArgs args{steering, scale, target, weight, elements};
        for (auto _ : state)
        {
            double J = Parallel ? kernels::masked_cost_parallel(args, ph, field, grad)
                                : kernels::masked_cost_serial(args, ph, field, grad);
            benchmark::DoNotOptimize(J);
        }
        state.SetItemsProcessed(state.iterations() * std::int64_t(cells * elements));
    }

    template <bool Parallel>
    void conj_dot(benchmark::State &state)
    {
        const std::size_t n = std::size_t(state.range(0));
        std::vector<cplx> s(n, cplx(1.0, 0.5)), c(n, cplx(0.25, -1.0));
        for (auto _ : state)
        {
            cplx r = Parallel ? kernels::conj_dot_parallel(s, c) : kernels::conj_dot_serial(s, c);
            benchmark::DoNotOptimize(r);
        }
        state.SetItemsProcessed(state.iterations() * std::int64_t(n));
    }
} // namespace

BENCHMARK(far_field<false>)->Name("far_field/serial")->Arg(16)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(far_field<true>)->Name("far_field/openmp")->Arg(16)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(near_field<false>)->Name("near_field/serial")->Arg(515)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(near_field<true>)->Name("near_field/openmp")->Arg(515)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(masked_cost<false>)->Name("masked_cost/serial")->Arg(256)->Arg(2500)->Unit(benchmark::kMillisecond);
BENCHMARK(masked_cost<true>)->Name("masked_cost/openmp")->Arg(256)->Arg(2500)->Unit(benchmark::kMillisecond);
BENCHMARK(conj_dot<false>)->Name("conj_dot/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(conj_dot<true>)->Name("conj_dot/openmp")->Arg(1 << 16)->Arg(1 << 20);

BENCHMARK_MAIN();
