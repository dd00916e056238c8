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
#include "rffence/heatmap.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

using namespace rffence;

namespace
{
    std::filesystem::path tmp(const char *name) { return std::filesystem::temp_directory_path() / name; }

    void write_text(const std::filesystem::path &p, const std::string &s)
    {
        std::ofstream(p, std::ios::binary) << s;
    }
} // namespace

TEST_SUITE("heatmap")
{
    TEST_CASE("scale names")
    {
        CHECK(parse_heatmap_scale("db") == HeatmapScale::db);
        CHECK(parse_heatmap_scale("linear") == HeatmapScale::linear);
        CHECK_THROWS_AS(parse_heatmap_scale("log"), ConfigError);
        CHECK(std::string(to_string(HeatmapScale::db)) == "db");
    }

    TEST_CASE("constant field gives a uniform image")
    {
        std::vector<double> m(12, 4.2);
        for (auto scale : {HeatmapScale::linear, HeatmapScale::db})
        {
            auto h = make_heatmap(m, 4, 3, scale);
            CHECK(std::all_of(h.levels.begin(), h.levels.end(), [&](auto l) { return l == h.levels[0]; }));
        }
    }

    TEST_CASE("single peak is the brightest pixel")
    {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<double> m(20 * 10);
        for (auto &x : m)
            x = u(rng);
        m[137] = 5.0;
        for (auto scale : {HeatmapScale::linear, HeatmapScale::db})
        {
            auto h = make_heatmap(m, 20, 10, scale);
            CHECK(std::max_element(h.levels.begin(), h.levels.end()) - h.levels.begin() == 137);
            CHECK(h.levels[137] == 65535);
        }
    }

    TEST_CASE("file round trip recovers magnitudes within one quantization step")
    {
        std::mt19937_64 rng(2);
        std::lognormal_distribution<double> g(0.0, 2.0);
        std::vector<double> m(37 * 23);
        for (auto &x : m)
            x = g(rng);
        m[5] = 0.0;
        auto path = tmp("rffence_test_heatmap.pgm");
        for (auto scale : {HeatmapScale::linear, HeatmapScale::db})
        {
            auto h = make_heatmap(m, 37, 23, scale, -80.0);
            write_heatmap(h, path);
            auto back = read_heatmap(path);
            CHECK(back.levels == h.levels);
            CHECK(back.mapping.scale == scale);
            auto dec = decode_heatmap(back);
            const auto &mp = back.mapping;
            const double step = (mp.hi - mp.lo) / 65535.0;
            for (std::size_t i = 0; i < m.size(); ++i)
            {
                if (scale == HeatmapScale::linear)
                    CHECK(std::abs(dec[i] - m[i]) <= step * (1.0 + 1e-9));
                else
                {
                    const double want = std::max(20.0 * std::log10(m[i] / mp.reference), mp.floor_db);
                    const double got = std::max(20.0 * std::log10(dec[i] / mp.reference), mp.floor_db);
                    CHECK(std::abs(got - want) <= step * (1.0 + 1e-9));
                }
            }
        }
        std::ifstream f(path, std::ios::binary);
        std::string magic;
        f >> magic;
        CHECK(magic == "P5");
        std::filesystem::remove(path);
        std::filesystem::remove(path.string() + ".txt");
    }

    TEST_CASE("bad input and malformed files")
    {
        std::vector<double> bad{1.0, -1.0};
        CHECK_THROWS_AS(make_heatmap(bad, 2, 1, HeatmapScale::linear), ConfigError);
        std::vector<double> nan{1.0, std::nan("")};
        CHECK_THROWS_AS(make_heatmap(nan, 2, 1, HeatmapScale::db), ConfigError);
        std::vector<double> ok{1.0, 2.0};
        CHECK_THROWS_AS(make_heatmap(ok, 3, 1, HeatmapScale::db), ConfigError);

        auto path = tmp("rffence_test_bad.pgm");
        write_heatmap(make_heatmap(ok, 2, 1, HeatmapScale::linear), path);
        CHECK_NOTHROW(read_heatmap(path));

        write_text(path, "P2\n2 1\n65535\n1 2\n");
        CHECK_THROWS_AS(read_heatmap(path), FormatError);
        write_text(path, std::string("P5\n2 1\n65535\n") + std::string(3, '\0'));
        CHECK_THROWS_AS(read_heatmap(path), FormatError);
        write_text(path, std::string("P5\n2 1\n255\n") + std::string(2, '\0'));
        CHECK_THROWS_AS(read_heatmap(path), FormatError);
        write_text(path, std::string("P5\n3 1\n65535\n") + std::string(6, '\0'));
        CHECK_THROWS_AS(read_heatmap(path), FormatError); // sidecar says 2x1
        write_text(path.string() + ".txt", "format rffence-heatmap\nwidth x\n");
        CHECK_THROWS_AS(read_heatmap(path), FormatError);
        std::filesystem::remove(path.string() + ".txt");
        CHECK_THROWS_AS(read_heatmap(path), IoError);
        std::filesystem::remove(path);
        CHECK_THROWS_AS(read_heatmap(path), IoError);
        CHECK_THROWS_AS(write_heatmap(make_heatmap(ok, 2, 1, HeatmapScale::linear), "/nonexistent-dir/x.pgm"), IoError);
    }
}
