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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <sys/wait.h>

namespace
{
    namespace fs = std::filesystem;

    struct Run
    {
        int code = -1;
        std::string out, err;
    };

    std::string slurp(const fs::path &p)
    {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        return s.str();
    }

    Run cli(const std::string &args)
    {
        const fs::path dir = fs::temp_directory_path();
        const auto out = dir / "rffence_cli_stdout.txt", err = dir / "rffence_cli_stderr.txt";
        const std::string cmd = std::string("\"") + RFFENCE_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                                err.string() + "\"";
        const int status = std::system(cmd.c_str());
        Run r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    fs::path config(const char *name, const std::string &text)
    {
        auto p = fs::temp_directory_path() / name;
        std::ofstream(p) << text;
        return p;
    }

    const std::string far_field = R"({
  "schema_version": 1, "kind": "far_field", "seed": 4, "frequency": 1e12,
  "array": { "rows": 8, "cols": 8, "spacing_wavelengths": 0.2 },
  "farfield": { "resolution_deg": 3 },
  "regions": { "fsda_deg": [[30, 75], [15, 165]], "hssa_deg": [[15, 45]] },
  "codebook": { "entries": 30 },
  "batch": { "cases": 4 },
  "output": { "heatmaps": true }
})";

    // Matches the single-line error contract
    const std::regex error_line(R"(^rffence: error\[(config|geometry|numerical|io|format|usage|internal)\]: [^\n]+\n$)");
} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("shield run writes metrics, profiles and heatmaps")
    {
        auto cfg = config("rffence_cli_ff.json", far_field);
        auto out = fs::temp_directory_path() / "rffence_cli_run";
        fs::remove_all(out);
        auto r = cli("shield run --config \"" + cfg.string() + "\" --out \"" + out.string() + "\" --threads 2");
        CHECK(r.code == 0);
        CHECK(r.err.empty());
        for (const char *f : {"metrics.csv", "cost_history.csv", "phase_common.csv", "phase_opt.csv", "after.pgm",
                              "after.pgm.txt", "common.pgm", "before_0_fsda.pgm", "before_2_hssa.pgm"})
            CHECK_MESSAGE(fs::exists(out / f), f);
        std::istringstream metrics(slurp(out / "metrics.csv"));
        std::string line;
        std::size_t rows = 0;
        while (std::getline(metrics, line))
            ++rows;
        CHECK(rows == 4);
    }

    TEST_CASE("codebook build and render from a phase file")
    {
        auto cfg = config("rffence_cli_ff.json", far_field);
        auto out = fs::temp_directory_path() / "rffence_cli_cb";
        fs::remove_all(out);
        CHECK(cli("codebook build --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"").code == 0);
        CHECK(fs::file_size(out / "codebook.rfcb") == 60 + 30 * (32 + 64 * 8));

        auto run = fs::temp_directory_path() / "rffence_cli_run2";
        fs::remove_all(run);
        CHECK(cli("shield run --config \"" + cfg.string() + "\" --out \"" + run.string() + "\"").code == 0);
        std::string text = far_field;
        text.replace(text.find("\"output\""), 8, "\"render\": { \"phase_file\": \"" + (run / "phase_opt.csv").string() + "\" }, \"output\"");
        auto rcfg = config("rffence_cli_render.json", text);
        auto rout = fs::temp_directory_path() / "rffence_cli_render";
        CHECK(cli("render --config \"" + rcfg.string() + "\" --out \"" + rout.string() + "\"").code == 0);
        CHECK(fs::exists(rout / "field.pgm"));
    }

    TEST_CASE("batch output is reproducible and seed-dependent")
    {
        auto cfg = config("rffence_cli_ff.json", far_field);
        auto a = fs::temp_directory_path() / "rffence_cli_ba", b = fs::temp_directory_path() / "rffence_cli_bb",
             c = fs::temp_directory_path() / "rffence_cli_bc";
        CHECK(cli("shield batch --config \"" + cfg.string() + "\" --out \"" + a.string() + "\" --threads 1").code == 0);
        CHECK(cli("shield batch --config \"" + cfg.string() + "\" --out \"" + b.string() + "\" --threads 3").code == 0);
        CHECK(cli("shield batch --config \"" + cfg.string() + "\" --out \"" + c.string() + "\" --seed 99").code == 0);
        CHECK(slurp(a / "batch_regions.csv") == slurp(b / "batch_regions.csv"));
        CHECK(slurp(a / "batch_summary.csv") == slurp(b / "batch_summary.csv"));
        CHECK(slurp(a / "batch_regions.csv") != slurp(c / "batch_regions.csv"));
    }

    TEST_CASE("quietzone run writes metrics and slices")
    {
        auto cfg = config("rffence_cli_qz.json", R"({
  "schema_version": 1, "kind": "quiet_zone", "frequency": 28e9,
  "scene": { "side": 4, "rows": 6, "cols": 6, "margin": 0.1, "source": [2.8, 2, 2] },
  "grid": { "coarse_counts": [17, 17, 17], "zone_center": [2, 2, 2], "zone_radius": 0.5, "refinement": 2 },
  "quietzone": { "max_iterations": 10 },
  "output": { "slices_z": [1.0, 2.0], "total_field": true }
})");
        auto out = fs::temp_directory_path() / "rffence_cli_qz";
        fs::remove_all(out);
        auto r = cli("quietzone run --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"");
        CHECK(r.code == 0);
        for (const char *f : {"qz_metrics.csv", "qz_history.csv", "qz_summary.csv", "qz_phases.csv",
                              "slice_0_baseline.pgm", "slice_1_final.pgm", "slice_1_final.pgm.txt"})
            CHECK_MESSAGE(fs::exists(out / f), f);
        CHECK(slurp(out / "qz_metrics.csv").rfind("stage,avg_power,avg_magnitude,suppression_db", 0) == 0);
    }

    TEST_CASE("error paths: exit codes and one-line prefixes")
    {
        auto out = (fs::temp_directory_path() / "rffence_cli_err").string();

        std::string neg = far_field;
        neg.replace(neg.find("\"codebook\""), 10, "\"shield\": { \"mu\": -0.1 }, \"codebook\"");
        auto r = cli("shield run --config \"" + config("rffence_cli_neg.json", neg).string() + "\" --out " + out);
        CHECK(r.code == 2);
        CHECK(std::regex_match(r.err, error_line));
        CHECK(r.err.find("error[config]: shield.mu") != std::string::npos);

        r = cli("shield run --config /nonexistent.json --out " + out);
        CHECK(r.code == 4);
        CHECK(std::regex_match(r.err, error_line));

        r = cli("shield run --config \"" + config("rffence_cli_ff.json", far_field).string() + "\" --out /proc/forbidden/x");
        CHECK(r.code == 4);
        CHECK(std::regex_match(r.err, error_line));

        // FSDA fully inside the HSSA mask with eta = 0 leaves nothing to deliver
        std::string empty = far_field;
        empty.replace(empty.find("[[30, 75], [15, 165]]"), 21, "[[15, 45]]");
        empty.replace(empty.find("\"codebook\""), 10,
                      "\"shield\": { \"eta\": 0, \"tau_fsda\": 0.99, \"tau_hssa\": 0.5 }, \"codebook\"");
        r = cli("shield run --config \"" + config("rffence_cli_num.json", empty).string() + "\" --out " + out);
        CHECK(r.code == 3);
        CHECK(std::regex_match(r.err, error_line));
        CHECK(r.err.find("error[numerical]") != std::string::npos);

        r = cli("quietzone run --config \"" + config("rffence_cli_ff.json", far_field).string() + "\" --out " + out);
        CHECK(r.code == 2);
        CHECK(std::regex_match(r.err, error_line));

        r = cli("shield run --out " + out);
        CHECK(r.code == 2);
        CHECK(std::regex_match(r.err, error_line));

        r = cli("");
        CHECK(r.code == 2);
        CHECK(std::regex_match(r.err, error_line));

        r = cli("--help");
        CHECK(r.code == 0);
    }
}
