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

// rffence command-line driver

#include "rffence/errors.hpp"
#include "rffence/harness.hpp"
#include "rffence/scenario.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

namespace
{
    enum Exit
    {
        exit_ok = 0,
        exit_internal = 1,
        exit_config = 2,
        exit_numerical = 3,
        exit_io = 4,
    };

    int fail(const char *kind, int code, std::string msg)
    {
        for (auto &c : msg)
            if (c == '\n' || c == '\r')
                c = ' ';
        std::fprintf(stderr, "rffence: error[%s]: %s\n", kind, msg.c_str());
        return code;
    }

    struct Options
    {
        std::string config;
        std::string out;
        std::optional<std::uint64_t> seed;
        std::optional<int> threads;
    };

    using Command = std::function<std::vector<std::string>(const rffence::Scenario &, const std::filesystem::path &)>;

    void add_common(CLI::App *cmd, Options &opt)
    {
        cmd->add_option("--config", opt.config, "Scenario JSON file")->required();
        cmd->add_option("--out", opt.out, "Output directory")->required();
        cmd->add_option("--seed", opt.seed, "Override the scenario seed");
        cmd->add_option("--threads", opt.threads, "OpenMP thread count")->check(CLI::PositiveNumber);
    }

    int run(const Options &opt, const Command &command)
    {
        using namespace rffence;
        try
        {
            if (opt.threads)
                omp_set_num_threads(*opt.threads);
            Scenario sc = load_scenario(opt.config);
            if (opt.seed)
                sc.seed = *opt.seed;
            for (const auto &line : command(sc, opt.out))
                std::cout << line << "\n";
            return exit_ok;
        }
        catch (const ConfigError &e)
        {
            return fail("config", exit_config, e.what());
        }
        catch (const GeometryError &e)
        {
            return fail("geometry", exit_config, e.what());
        }
        catch (const NumericalError &e)
        {
            return fail("numerical", exit_numerical, e.what());
        }
        catch (const FormatError &e)
        {
            return fail("format", exit_io, e.what());
        }
        catch (const IoError &e)
        {
            return fail("io", exit_io, e.what());
        }
        catch (const std::filesystem::filesystem_error &e)
        {
            return fail("io", exit_io, e.what());
        }
        catch (const std::bad_alloc &)
        {
            return fail("internal", exit_internal, "out of memory");
        }
        catch (const std::exception &e)
        {
            return fail("internal", exit_internal, e.what());
        }
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"rffence: RIS field slicing and quiet-zone optimization"};
    app.require_subcommand(1);

    Options opt;
    Command selected;

    auto leaf = [&](CLI::App *parent, const char *name, const char *help, Command cmd)
    {
        auto *sub = parent->add_subcommand(name, help);
        add_common(sub, opt);
        sub->callback([&selected, cmd] { selected = cmd; });
    };

    auto *codebook = app.add_subcommand("codebook", "Codebook tools")->require_subcommand(1);
    leaf(codebook, "build", "Generate an RFCB codebook", rffence::command_codebook_build);

    auto *shield = app.add_subcommand("shield", "SHIELD far-field slicing")->require_subcommand(1);
    leaf(shield, "run", "Run one scenario", rffence::command_shield_run);
    leaf(shield, "batch", "Run a seeded batch of random cases", rffence::command_shield_batch);
    leaf(shield, "sweep", "Run an angular separation sweep", rffence::command_shield_sweep);

    auto *qz = app.add_subcommand("quietzone", "Near-field quiet zone")->require_subcommand(1);
    leaf(qz, "run", "Optimize a quiet zone", rffence::command_quietzone_run);

    leaf(&app, "render", "Render field heatmaps", rffence::command_render);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::Success &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        return fail("usage", exit_config, e.what());
    }
    return run(opt, selected);
}
