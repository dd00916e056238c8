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

#include "oracles.hpp"
#include "rffence/errors.hpp"
#include "rffence/quietzone.hpp"

#include <doctest.h>

#include <random>

using namespace rffence;

namespace
{
    RisArray single_on_wall(Vec3 at, Vec3 normal, Vec3 axis_u)
    {
        return RisArray(1, 1, 0.01, 0.01, at, Orientation::from_axes(normal, axis_u));
    }

    Scene small_room(std::size_t n, Vec3 source, double margin = 0.1)
    {
        return Scene::four_walls(4.0, n, n, margin, PointSource{1.0, 28e9, source});
    }

    std::vector<PhaseProfile> random_profiles(const Scene &s, std::mt19937_64 &rng)
    {
        std::vector<PhaseProfile> v;
        for (const auto &p : s.panels)
            v.emplace_back(p.rows(), p.cols(), oracle::random_phases(p.size(), rng));
        return v;
    }

    double rel_norm(std::span<const cplx> a, std::span<const cplx> b)
    {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            num += std::norm(a[i] - b[i]), den += std::norm(b[i]);
        return std::sqrt(num / den);
    }
} // namespace

TEST_SUITE("quietzone")
{
    TEST_CASE("parameter validation")
    {
        QzOptimizerParams p;
        p.initial_step = 0.0;
        CHECK_THROWS_AS(p.validate(), ConfigError);
        p = {};
        p.initial_step = 4.0;
        CHECK_THROWS_AS(p.validate(), ConfigError);
        p = {};
        p.max_iterations = 0;
        CHECK_THROWS_AS(p.validate(), ConfigError);
        p = {};
        p.min_step = 0.0;
        CHECK_THROWS_AS(p.validate(), ConfigError);
    }

    TEST_CASE("cache tracks random updates in both storage modes")
    {
        std::mt19937_64 rng(41);
        Scene s = small_room(6, {2.8, 2.0, 2.0});
        auto grid = build_dual_grid(4.0, {21, 21, 21}, {2, 2, 2}, 0.5, 2.0);
        auto inc = illuminate(s);
        auto ph = random_profiles(s, rng);
        FieldCache stored(s, inc, grid.fine_points(), ph);
        FieldCache lazy(s, inc, grid.fine_points(), ph, Exec::parallel, 0);
        CHECK(stored.stores_columns());
        CHECK(!lazy.stores_columns());
        std::uniform_int_distribution<std::size_t> el(0, stored.elements() - 1);
        std::uniform_real_distribution<double> phase(0.0, two_pi);
        for (int t = 0; t < 300; ++t)
        {
            const std::size_t n = el(rng);
            const double v = phase(rng);
            stored.set_phase(n, v);
            lazy.set_phase(n, v);
        }
        CHECK(stored.divergence() < 1e-9);
        CHECK(lazy.divergence() < 1e-9);
        CHECK(rel_norm(stored.field(), lazy.field()) < 1e-12);

        auto fresh = scatter_to_points(s, stored.profiles(), inc, grid.fine_points());
        CHECK(rel_norm(stored.field(), fresh) < 1e-9);
    }

    TEST_CASE("power change formula matches a direct re-evaluation")
    {
        std::mt19937_64 rng(42);
        Scene s = small_room(4, {1.0, 1.5, 3.0});
        auto grid = build_dual_grid(4.0, {21, 21, 21}, {2, 2, 2}, 0.4, 2.0);
        FieldCache c(s, illuminate(s), grid.fine_points(), random_profiles(s, rng));
        std::vector<cplx> scratch;
        for (std::size_t n : {std::size_t(0), std::size_t(17), std::size_t(63)})
        {
            auto col = c.column(n, scratch);
            const double before = c.power_sum();
            const double predicted = c.power_change(n, c.phase(n) + 0.3, c.overlap(n, col));
            c.set_phase(n, c.phase(n) + 0.3);
            CHECK(c.power_sum() - before == doctest::Approx(predicted).epsilon(1e-9));
        }
    }

    TEST_CASE("single element: closed-form phase, magnitude unchanged")
    {
        Scene s;
        s.side = 10.0;
        s.panels = {single_on_wall({0.0, 5.0, 5.0}, {1, 0, 0}, {0, -1, 0})};
        s.source = PointSource{1.0, 28e9, {5.0, 5.0, 2.0}};
        auto inc = illuminate(s);
        std::vector<Vec3> pts{{5.0, 5.0, 5.0}, {4.0, 6.0, 5.0}};
        std::vector<PhaseProfile> ph{PhaseProfile(1, 1, pi)};
        FieldCache c(s, inc, pts, ph);
        const double before = c.magnitude_sum();
        init_per_element(c);
        CHECK(c.magnitude_sum() == doctest::Approx(before).epsilon(1e-12));
        CHECK(c.phase(0) >= 0.0);
        CHECK(c.phase(0) < two_pi);
    }

    TEST_CASE("two equally coupled elements cancel after initialization")
    {
        Scene s;
        s.side = 10.0;
        s.panels = {single_on_wall({0.0, 5.0, 5.0}, {1, 0, 0}, {0, -1, 0}),
                    single_on_wall({10.0, 5.0, 5.0}, {-1, 0, 0}, {0, 1, 0})};
        s.source = PointSource{1.0, 28e9, {5.0, 5.0, 2.0}};
        auto inc = illuminate(s);
        std::vector<Vec3> pts{{5.0, 5.0, 5.0}};
        FieldCache c(s, inc, pts, uniform_profiles(s));
        init_per_element(c);
        const double alone = std::abs(inc[0]) / 5.0;
        CHECK(std::abs(c.field()[0]) < 1e-9 * alone);
    }

    TEST_CASE("desk scene: initialization does not raise the zone magnitude")
    {
        Scene s = small_room(16, {2.8, 2.0, 2.0});
        auto grid = build_dual_grid(4.0, {41, 41, 41}, {2, 2, 2}, 0.5, 1.0);
        auto inc = illuminate(s);
        auto base = quiet_zone_metrics(scatter_to_points(s, uniform_profiles(s), inc, grid.fine_points()));
        auto init = quiet_zone_metrics(scatter_to_points(s, init_per_element(s, grid), inc, grid.fine_points()));
        CHECK(init.avg_magnitude <= base.avg_magnitude);
        CHECK(init.avg_power <= base.avg_power);
    }

    TEST_CASE("fixed point: no accepted changes, step halves, metric unchanged")
    {
        Scene s;
        s.side = 10.0;
        s.panels = {single_on_wall({0.0, 5.0, 5.0}, {1, 0, 0}, {0, -1, 0})};
        s.source = PointSource{1.0, 28e9, {5.0, 5.0, 2.0}};
        std::vector<Vec3> pts{{5.0, 5.0, 5.0}};
        FieldCache c(s, illuminate(s), pts, uniform_profiles(s));
        QzOptimizerParams p;
        p.max_iterations = 2;
        auto r = optimize(c, p);
        REQUIRE(r.history.size() == 3);
        CHECK(r.history[1].accepted == 0);
        CHECK(r.history[1].step == doctest::Approx(p.initial_step));
        CHECK(r.history[2].step == doctest::Approx(p.initial_step / 2));
        CHECK(r.history[1].avg_magnitude == r.history[0].avg_magnitude);
    }

    TEST_CASE("property: zone power history never increases; runs are deterministic")
    {
        std::mt19937_64 rng(43);
        std::uniform_real_distribution<double> u(0.6, 3.4);
        for (int t = 0; t < 4; ++t)
        {
            Scene s = small_room(6, {u(rng), u(rng), u(rng)});
            auto grid = build_dual_grid(4.0, {21, 21, 21}, {u(rng) * 0.3 + 1.5, 2.0, 2.0}, 0.4, 2.0);
            QzOptimizerParams p;
            p.max_iterations = 40;
            p.self_check = true;
            auto a = run_quiet_zone(s, grid, p);
            for (std::size_t i = 1; i < a.optimization.history.size(); ++i)
                CHECK(a.optimization.history[i].avg_power <= a.optimization.history[i - 1].avg_power);
            CHECK(a.final_zone.avg_power <= a.initial_zone.avg_power);
            auto b = run_quiet_zone(s, grid, p, Exec::parallel, 0);
            CHECK(a.final == b.final);
        }
    }

    TEST_CASE("power and magnitude objectives mostly pick the same candidate")
    {
        std::mt19937_64 rng(44);
        Scene s = small_room(6, {2.8, 2.0, 2.0});
        auto grid = build_dual_grid(4.0, {21, 21, 21}, {2, 2, 2}, 0.5, 2.0);
        auto inc = illuminate(s);
        std::size_t agree = 0, total = 0;
        for (int t = 0; t < 5; ++t)
        {
            FieldCache c(s, inc, grid.fine_points(), random_profiles(s, rng));
            std::vector<cplx> scratch;
            for (std::size_t n = 0; n < c.elements(); n += 3)
            {
                auto col = c.column(n, scratch);
                const double phi = c.phase(n);
                int best_pow = 0, best_mag = 0;
                double bp = 0.0, bm = c.magnitude_sum();
                for (int k : {1, -1})
                {
                    const double cand = phi + k * pi / 8;
                    const double dp = c.power_change(n, cand, c.overlap(n, col));
                    const cplx delta = std::polar(1.0, cand) - std::polar(1.0, phi);
                    double mag = 0.0;
                    for (std::size_t p = 0; p < c.points(); ++p)
                        mag += std::abs(c.field()[p] + delta * col[p]);
                    if (dp < bp)
                        bp = dp, best_pow = k;
                    if (mag < bm)
                        bm = mag, best_mag = k;
                }
                agree += best_pow == best_mag;
                ++total;
            }
        }
        MESSAGE("candidate agreement " << agree << "/" << total);
        CHECK(double(agree) >= 0.8 * double(total));
    }

    TEST_CASE("threshold and tolerance stops")
    {
        Scene s = small_room(6, {2.8, 2.0, 2.0});
        auto grid = build_dual_grid(4.0, {21, 21, 21}, {2, 2, 2}, 0.5, 1.0);
        QzOptimizerParams p;
        p.threshold = 1e6;
        auto r = run_quiet_zone(s, grid, p);
        CHECK(r.optimization.stop == QzStop::threshold);
        CHECK(r.optimization.sweeps == 0);

        p = {};
        p.tolerance = 0.5;
        r = run_quiet_zone(s, grid, p);
        CHECK(r.optimization.stop == QzStop::tolerance);
        CHECK(std::string(to_string(r.optimization.stop)) == "tolerance");
    }

    TEST_CASE("report fields are consistent")
    {
        Scene s = small_room(8, {2.8, 2.0, 2.0});
        auto grid = build_dual_grid(4.0, {21, 21, 21}, {2, 2, 2}, 0.5, 1.0);
        QzOptimizerParams p;
        p.max_iterations = 30;
        auto r = run_quiet_zone(s, grid, p);
        CHECK(*r.baseline_zone.suppression_db == 0.0);
        CHECK(*r.final_zone.suppression_db < 0.0);
        CHECK(r.outside_change_db == doctest::Approx(20.0 * std::log10(r.final_outside / r.baseline_outside)));
        CHECK(r.final_zone.avg_magnitude == doctest::Approx(r.optimization.history.back().avg_magnitude).epsilon(1e-9));
        CHECK(r.final.size() == 4);
    }
}
