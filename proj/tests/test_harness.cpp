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

#include "rffence/errors.hpp"
#include "rffence/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rffence;

namespace
{
    FarFieldScenario desk(std::size_t entries = 60)
    {
        FarFieldScenario ff;
        ff.desc.rows = ff.desc.cols = 8;
        ff.desc.frequency = 1e12;
        ff.desc.spacing_x = ff.desc.spacing_y = ff.desc.wavelength() / 5;
        ff.codebook.entries = entries;
        ff.resolution = deg2rad(2.0);
        return ff;
    }

    std::string slurp(const std::filesystem::path &p)
    {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        return s.str();
    }

    std::filesystem::path scratch(const char *name)
    {
        auto p = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(p);
        return p;
    }
} // namespace

TEST_SUITE("harness")
{
    TEST_CASE("angle sampling is seeded, in range and duplicate-free")
    {
        CodebookSpec spec;
        spec.entries = 300;
        spec.aoas = {Direction{}, Direction::degrees(20, 40)};
        auto a = sample_angle_set(spec, 9), b = sample_angle_set(spec, 9), c = sample_angle_set(spec, 10);
        CHECK(a == b);
        CHECK(a != c);
        REQUIRE(a.size() == 300);
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            CHECK(a[i].aoa == spec.aoas[i % 2]);
            CHECK(a[i].aod.theta >= 0.0);
            CHECK(a[i].aod.theta < pi / 2);
            CHECK(a[i].aod.phi >= 0.0);
            CHECK(a[i].aod.phi < two_pi);
        }
        CHECK_NOTHROW(build_codebook(desk().desc, a));
    }

    TEST_CASE("bin edges")
    {
        CHECK(fsda_bin(0.0) == 0);
        CHECK(fsda_bin(-2.0) == 1);
        CHECK(fsda_bin(-3.99) == 1);
        CHECK(fsda_bin(-4.0) == 2);
        CHECK(fsda_bin(-8.0) == 4);
        CHECK(fsda_bin(-200.0) == 4);
        CHECK(hssa_bin(-19.0) == 0);
        CHECK(hssa_bin(-20.0) == 1);
        CHECK(hssa_bin(-50.0) == 2);
        CHECK(fsda_bin_labels.size() == 5);
        CHECK(hssa_bin_labels.size() == 3);
    }

    TEST_CASE("class performance averages magnitudes before the ratio")
    {
        std::vector<RegionResult> r(3);
        r[0] = {false, {}, 10.0, 0.0, 5.0, 0.0};
        r[1] = {false, {}, 30.0, 0.0, 35.0, 0.0};
        r[2] = {true, {}, 10.0, 0.0, 0.1, 0.0};
        CHECK(class_performance(r, false) == doctest::Approx(0.0));
        CHECK(class_performance(r, true) == doctest::Approx(-40.0));
    }

    TEST_CASE("one-case batch fills one bin per class")
    {
        auto ff = desk();
        auto cb = scenario_codebook(ff, 3);
        auto rep = run_batch(ff, cb, 3, 1);
        REQUIRE(rep.cases.size() == 1);
        CHECK(rep.failures == 0);
        CHECK(rep.fsda_cases.total() == 1);
        CHECK(rep.hssa_cases.total() == 1);
        CHECK(rep.fsda_regions.total() == 2);
        CHECK(rep.hssa_regions.total() == 1);
        std::size_t populated = 0;
        for (auto c : rep.fsda_cases.counts)
            populated += c > 0;
        CHECK(populated == 1);
    }

    TEST_CASE("property: histogram fractions sum to one; same seed gives identical CSVs")
    {
        auto ff = desk();
        auto cb = scenario_codebook(ff, 5);
        auto a = run_batch(ff, cb, 5, 12);
        for (const Histogram *h : {&a.fsda_regions, &a.fsda_cases, &a.hssa_regions, &a.hssa_cases})
        {
            double sum = 0.0;
            for (std::size_t b = 0; b < h->counts.size(); ++b)
                sum += h->fraction(b);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
        auto b = run_batch(ff, scenario_codebook(ff, 5), 5, 12);
        auto da = scratch("rffence_batch_a"), db = scratch("rffence_batch_b");
        write_batch(a, da);
        write_batch(b, db);
        for (const char *f : {"batch_regions.csv", "batch_cases.csv", "batch_histogram.csv", "batch_summary.csv"})
        {
            CAPTURE(f);
            CHECK(slurp(da / f) == slurp(db / f));
            CHECK(slurp(da / f).rfind("\xEF\xBB\xBF", 0) != 0);
        }
        CHECK(slurp(da / "batch_cases.csv").rfind("case,status,", 0) == 0);
    }

    TEST_CASE("batch needs enough entries per angle of arrival")
    {
        auto ff = desk(2);
        CHECK_THROWS_AS(run_batch(ff, scenario_codebook(ff, 1), 1, 3), ConfigError);
    }

    TEST_CASE("sweep layouts and skipped rows")
    {
        SweepSpec spec;
        spec.axis = SweepAxis::azimuth;
        spec.layout = SweepLayout::between;
        spec.base = Direction::degrees(30, 90);
        auto sc = sweep_case(spec, deg2rad(20), {});
        REQUIRE(sc.fsda.size() == 2);
        CHECK(rad2deg(sc.fsda[0].phi) == doctest::Approx(70.0));
        CHECK(rad2deg(sc.fsda[1].phi) == doctest::Approx(110.0));
        CHECK(sc.hssa[0] == spec.base);
        CHECK_THROWS_AS(sweep_case(spec, deg2rad(95), {}), ConfigError);

        spec.axis = SweepAxis::elevation;
        CHECK_THROWS_AS(sweep_case(spec, deg2rad(40), {}), ConfigError);
        spec.layout = SweepLayout::outside;
        spec.gap = deg2rad(15);
        sc = sweep_case(spec, deg2rad(10), {});
        CHECK(rad2deg(sc.fsda[0].theta) == doctest::Approx(40.0));
        CHECK(rad2deg(sc.fsda[1].theta) == doctest::Approx(55.0));
        CHECK_THROWS_AS(sweep_case(spec, deg2rad(50), {}), ConfigError);
        CHECK_THROWS_AS(sweep_case(spec, 0.0, {}), ConfigError);

        auto ff = desk();
        ff.sweep = spec;
        ff.sweep.separations = {deg2rad(5), deg2rad(10), deg2rad(50), deg2rad(20)};
        auto rows = run_sweep(ff);
        CHECK(rows.size() == 4);
        CHECK(rows[2].skipped);
        auto dir = scratch("rffence_sweep");
        write_sweep(rows, dir);
        std::ifstream f(dir / "sweep.csv");
        std::string line;
        std::size_t lines = 0;
        while (std::getline(f, line))
            ++lines;
        CHECK(lines == 1 + 3);
        CHECK(slurp(dir / "sweep_skipped.csv").find("50,") != std::string::npos);
    }

    TEST_CASE("zero-length sweep reproduces the scenario's own run")
    {
        auto ff = desk();
        ff.fsda = {Direction::degrees(30, 75), Direction::degrees(15, 165)};
        ff.hssa = {Direction::degrees(15, 45)};
        auto rows = run_sweep(ff);
        REQUIRE(rows.size() == 1);
        auto res = run_shield(ff.desc, case_entries(ff.desc, ff.shield_case()), ff.shield_case(), ff.shield, ff.grid());
        CHECK(rows[0].fsda_p == class_performance(res.regions, false));
        CHECK(rows[0].hssa_p == class_performance(res.regions, true));
    }

    TEST_CASE("phase CSV round trip")
    {
        PhaseProfile p(3, 4, std::vector<double>{0.1, 0.2, 0.3, 0.4, 1, 2, 3, 4, 5, 6, 0.0, 6.2831});
        auto path = std::filesystem::temp_directory_path() / "rffence_phase.csv";
        write_phase_csv(p, path);
        auto back = read_phase_csv(path, 3, 4);
        for (std::size_t n = 0; n < p.size(); ++n)
            CHECK(back[n] == doctest::Approx(p[n]).epsilon(1e-9));
        CHECK_THROWS_AS(read_phase_csv(path, 4, 4), DimensionError);
        CHECK_THROWS_AS(read_phase_csv(path, 2, 4), FormatError);
        std::filesystem::remove(path);
        CHECK_THROWS_AS(read_phase_csv(path, 3, 4), IoError);
    }
}
