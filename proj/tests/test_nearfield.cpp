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
#include "rffence/nearfield.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace rffence;

namespace
{
    RisArray single_on_wall(Vec3 at, Vec3 normal, Vec3 axis_u)
    {
        return RisArray(1, 1, 0.01, 0.01, at, Orientation::from_axes(normal, axis_u));
    }

    // Two single-element panels facing each other across the room at height 5
    Scene mirror_pair(Vec3 source)
    {
        Scene s;
        s.side = 10.0;
        s.panels = {single_on_wall({0.0, 5.0, 5.0}, {1, 0, 0}, {0, -1, 0}),
                    single_on_wall({10.0, 5.0, 5.0}, {-1, 0, 0}, {0, 1, 0})};
        s.source = PointSource{1.0, 28e9, source};
        return s;
    }

    bool lex(const Vec3 &a, const Vec3 &b)
    {
        return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
    }
} // namespace

TEST_SUITE("nearfield")
{
    TEST_CASE("incident field at one and two meters")
    {
        Scene s = mirror_pair({1.0, 5.0, 5.0});
        s.panels.pop_back();
        s.source.amplitude = 2.5;
        auto inc = illuminate(s);
        REQUIRE(inc.size() == 1);
        CHECK(std::abs(inc[0]) == doctest::Approx(2.5).epsilon(1e-14));

        s.source.position = {2.0, 5.0, 5.0};
        inc = illuminate(s);
        CHECK(std::abs(inc[0]) == doctest::Approx(1.25).epsilon(1e-14));
        CHECK(wrap_phase(std::arg(inc[0])) == doctest::Approx(wrap_phase(2.0 * s.wavenumber())).epsilon(1e-9));
    }

    TEST_CASE("source on an element is a geometry error")
    {
        Scene s = mirror_pair({0.0, 5.0, 5.0});
        CHECK_THROWS_AS(illuminate(s), GeometryError);
    }

    TEST_CASE("wall panels match the independent lattice and incident oracle")
    {
        const double L = 10.0;
        Scene s = Scene::four_walls(L, 50, 50, 0.1, PointSource{1.7, 28e9, {9.0, 9.0, 0.0}});
        REQUIRE(s.panels.size() == 4);
        CHECK(s.element_count() == 4 * 2500);
        auto walls = oracle::wall_elements(L, 50, 50, 0.1);
        auto pos = s.element_positions();
        for (std::size_t w = 0; w < 4; ++w)
        {
            std::vector<Vec3> got(pos.begin() + long(w * 2500), pos.begin() + long((w + 1) * 2500));
            std::vector<Vec3> want;
            for (auto p : walls[w])
                want.push_back({p.x, p.y, p.z});
            std::sort(got.begin(), got.end(), lex);
            std::sort(want.begin(), want.end(), lex);
            double worst = 0.0;
            for (std::size_t i = 0; i < got.size(); ++i)
                worst = std::max(worst, distance(got[i], want[i]));
            CHECK(worst < 1e-9);
        }

        auto inc = illuminate(s);
        const double k = two_pi * 28e9 / oracle::c0;
        double worst = 0.0;
        for (std::size_t n = 0; n < pos.size(); ++n)
        {
            const double d = oracle::dist({pos[n].x, pos[n].y, pos[n].z}, {9.0, 9.0, 0.0});
            cplx want = std::polar(1.7 / d, k * d);
            worst = std::max(worst, std::abs(inc[n] - want) / std::abs(want));
        }
        CHECK(worst < 1e-12);
    }

    TEST_CASE("single element, single point closed form")
    {
        Scene s = mirror_pair({3.0, 4.0, 5.0});
        s.panels.pop_back();
        auto inc = illuminate(s);
        PhaseProfile p(1, 1, 0.7);
        std::vector<PhaseProfile> ps{p};
        Vec3 q{2.0, 6.0, 7.0};
        auto v = scatter_to_points(s, ps, inc, std::span<const Vec3>(&q, 1));
        const double k = s.wavenumber();
        const double d = std::sqrt(9.0 + 1.0), R = std::sqrt(4.0 + 1.0 + 4.0);
        cplx want = std::polar(1.0 / d, k * d) * std::polar(1.0, 0.7) * std::polar(1.0 / R, k * R);
        CHECK(std::abs(v[0] - want) < 1e-12 * std::abs(want));
    }

    TEST_CASE("field decays as 1/R along a ray")
    {
        Scene s = mirror_pair({3.0, 4.0, 5.0});
        s.panels.pop_back();
        auto inc = illuminate(s);
        std::vector<PhaseProfile> ps{PhaseProfile(1, 1, 1.0)};
        std::vector<Vec3> q{{1.5, 5.5, 5.5}, {3.0, 6.0, 6.0}};
        auto v = scatter_to_points(s, ps, inc, q);
        CHECK(std::abs(v[1]) == doctest::Approx(0.5 * std::abs(v[0])).epsilon(1e-12));
    }

    TEST_CASE("antipodal phasors cancel at the midpoint")
    {
        Scene s = mirror_pair({5.0, 5.0, 2.0});
        auto inc = illuminate(s);
        std::vector<PhaseProfile> ps{PhaseProfile(1, 1, 0.0),
                                     PhaseProfile(1, 1, pi + std::arg(inc[0]) - std::arg(inc[1]))};
        Vec3 mid{5.0, 5.0, 5.0};
        auto v = scatter_to_points(s, ps, inc, std::span<const Vec3>(&mid, 1));
        CHECK(std::abs(v[0]) < 1e-9 * 2.0 * std::abs(inc[0]) / 5.0);
    }

    TEST_CASE("property: global phase shift rotates every value")
    {
        std::mt19937_64 rng(31);
        Scene s = Scene::four_walls(4.0, 4, 5, 0.1, PointSource{1.0, 28e9, {2.8, 2.0, 2.0}});
        auto inc = illuminate(s);
        auto grid = build_dual_grid(4.0, {9, 9, 9}, {2, 2, 2}, 0.6, 2.0);
        std::vector<PhaseProfile> a, b;
        for (std::size_t w = 0; w < 4; ++w)
        {
            auto ph = oracle::random_phases(20, rng);
            auto sh = ph;
            for (auto &x : sh)
                x += 0.9;
            a.emplace_back(4, 5, ph);
            b.emplace_back(4, 5, sh);
        }
        auto ma = scatter_to_grid(s, a, inc, grid);
        auto mb = scatter_to_grid(s, b, inc, grid);
        const cplx rot = std::polar(1.0, 0.9);
        for (std::size_t i = 0; i < ma.coarse.size(); ++i)
            CHECK(std::abs(mb.coarse[i] - rot * ma.coarse[i]) < 1e-12 * (1.0 + std::abs(ma.coarse[i])));
        for (std::size_t i = 0; i < ma.fine.size(); ++i)
            CHECK(std::abs(mb.fine[i] - rot * ma.fine[i]) < 1e-12 * (1.0 + std::abs(ma.fine[i])));
        auto qa = quiet_zone_metrics(ma), qb = quiet_zone_metrics(mb);
        CHECK(qa.avg_magnitude == doctest::Approx(qb.avg_magnitude).epsilon(1e-12));
    }

    TEST_CASE("property: superposition over a partition of the panels")
    {
        std::mt19937_64 rng(32);
        Scene s = Scene::four_walls(4.0, 6, 6, 0.05, PointSource{1.0, 28e9, {1.0, 3.0, 1.0}});
        auto inc = illuminate(s);
        std::vector<PhaseProfile> ph;
        for (int w = 0; w < 4; ++w)
            ph.emplace_back(6, 6, oracle::random_phases(36, rng));
        std::vector<Vec3> pts;
        std::uniform_real_distribution<double> u(0.5, 3.5);
        for (int i = 0; i < 200; ++i)
            pts.push_back({u(rng), u(rng), u(rng)});
        auto full = scatter_to_points(s, ph, inc, pts);

        Scene a = s, b = s;
        a.panels = {s.panels[0], s.panels[1]};
        b.panels = {s.panels[2], s.panels[3]};
        std::span<const cplx> all(inc);
        auto va = scatter_to_points(a, std::span(ph).subspan(0, 2), all.subspan(0, 72), pts);
        auto vb = scatter_to_points(b, std::span(ph).subspan(2, 2), all.subspan(72, 72), pts);
        for (std::size_t i = 0; i < pts.size(); ++i)
            CHECK(std::abs(va[i] + vb[i] - full[i]) <= 1e-12 * std::max(1.0, std::abs(full[i])) * 10.0);
    }

    TEST_CASE("coarse points on a panel are skipped and excluded")
    {
        // With a 10% margin the wall lattice coincides with coarse points
        Scene s = Scene::four_walls(4.0, 16, 16, 0.1, PointSource{1.0, 28e9, {2.8, 2.0, 2.0}});
        auto grid = build_dual_grid(4.0, {41, 41, 41}, {2, 2, 2}, 0.5, 1.0);
        auto m = scatter_to_grid(s, uniform_profiles(s), illuminate(s), grid);
        std::size_t flagged = 0;
        for (std::size_t i = 0; i < m.coarse.size(); ++i)
        {
            const bool on = s.on_panel_surface(grid.coarse_point(i));
            CHECK(bool(m.coarse_on_surface[i]) == on);
            if (on)
            {
                ++flagged;
                CHECK(m.coarse[i] == cplx{});
            }
            else
                CHECK(std::isfinite(std::abs(m.coarse[i])));
        }
        CHECK(flagged > 0);

        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < m.coarse.size(); ++i)
            if (!grid.coarse_in_zone(i) && !m.coarse_on_surface[i])
                sum += std::abs(m.coarse[i]), ++count;
        CHECK(outside_mean_magnitude(m, grid) == doctest::Approx(sum / double(count)).epsilon(1e-12));
    }

    TEST_CASE("observation point on an element away from the grid is an error")
    {
        Scene s = mirror_pair({5.0, 5.0, 2.0});
        auto inc = illuminate(s);
        Vec3 q{0.0, 5.0, 5.0};
        CHECK_THROWS_AS(scatter_to_points(s, uniform_profiles(s), inc, std::span<const Vec3>(&q, 1)), GeometryError);
    }

    TEST_CASE("zone metrics")
    {
        std::vector<cplx> v(10, std::polar(0.3, 1.0));
        auto m = quiet_zone_metrics(v);
        CHECK(m.avg_power == doctest::Approx(0.09));
        CHECK(m.avg_magnitude == doctest::Approx(0.3));
        CHECK(!m.suppression_db);
        CHECK(*quiet_zone_metrics(v, v).suppression_db == 0.0);
        std::vector<cplx> tenth(10, 0.03);
        CHECK(*quiet_zone_metrics(tenth, v).suppression_db == doctest::Approx(-20.0));
        CHECK_THROWS_AS(quiet_zone_metrics(std::vector<cplx>{}), ConfigError);
        CHECK_THROWS_AS(quiet_zone_metrics(v, std::span<const cplx>(tenth).first(5)), ConfigError);
    }

    TEST_CASE("desk baseline: zone and outside magnitudes are comparable")
    {
        Scene s = Scene::four_walls(4.0, 16, 16, 0.1, PointSource{1.0, 28e9, {2.8, 2.0, 2.0}});
        auto grid = build_dual_grid(4.0, {41, 41, 41}, {2, 2, 2}, 0.5, 1.0);
        auto m = scatter_to_grid(s, uniform_profiles(s), illuminate(s), grid);
        const double zone = quiet_zone_metrics(m).avg_magnitude, outside = outside_mean_magnitude(m, grid);
        CHECK(zone > 0.5 * outside);
        CHECK(zone < 2.0 * outside);
    }

    TEST_CASE("serial and parallel grid evaluation agree")
    {
        Scene s = Scene::four_walls(4.0, 8, 8, 0.1, PointSource{1.0, 28e9, {2.8, 2.0, 2.0}});
        auto grid = build_dual_grid(4.0, {15, 15, 15}, {2, 2, 2}, 0.5, 2.0);
        auto inc = illuminate(s);
        auto a = scatter_to_grid(s, uniform_profiles(s), inc, grid, Exec::serial);
        auto b = scatter_to_grid(s, uniform_profiles(s), inc, grid, Exec::parallel);
        for (std::size_t i = 0; i < a.coarse.size(); ++i)
            CHECK(std::abs(a.coarse[i] - b.coarse[i]) <= 1e-12 * (1.0 + std::abs(a.coarse[i])));
        CHECK(a.coarse_on_surface == b.coarse_on_surface);
    }
}
