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

#include "rffence/harness.hpp"
#include "rffence/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace rffence
{
    namespace
    {
        std::string num(double v)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.10g", v);
            return buf;
        }

        std::string deg(double rad) { return num(rad2deg(rad)); }

        std::string csv_text(std::string s)
        {
            for (auto &c : s)
                if (c == '\n' || c == '\r')
                    c = ' ';
            if (s.find_first_of(",\"") == std::string::npos)
                return s;
            std::string q = "\"";
            for (char c : s)
                q += c == '"' ? std::string("\"\"") : std::string(1, c);
            return q + "\"";
        }

        class Csv
        {
        public:
            explicit Csv(std::initializer_list<const char *> header)
            {
                bool first = true;
                for (const char *h : header)
                {
                    s_ << (first ? "" : ",") << h;
                    first = false;
                }
                s_ << "\n";
            }

            void row(std::initializer_list<std::string> cells)
            {
                bool first = true;
                for (const auto &c : cells)
                {
                    s_ << (first ? "" : ",") << c;
                    first = false;
                }
                s_ << "\n";
            }

            void save(const std::filesystem::path &path) const
            {
                std::ofstream f(path, std::ios::binary | std::ios::trunc);
                if (!f)
                    throw IoError("cannot open " + path.string() + " for writing");
                f << s_.str();
                if (!f)
                    throw IoError("failed writing " + path.string());
            }

        private:
            std::ostringstream s_;
        };

        void make_dir(const std::filesystem::path &dir)
        {
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec || !std::filesystem::is_directory(dir))
                throw IoError("cannot create output directory " + dir.string());
        }

        std::uint64_t splitmix64(std::uint64_t x)
        {
            x += 0x9E3779B97F4A7C15ull;
            x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
            x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
            return x ^ (x >> 31);
        }

        // Uniform double in [0, 1) from the top 53 bits, identical on every platform
        double unit(std::mt19937_64 &rng) { return double(rng() >> 11) * 0x1.0p-53; }

        const char *region_kind(const RegionResult &r) { return r.hssa ? "hssa" : "fsda"; }
    } // namespace

    // --------------------------------------------------------------------------------------------
    // Codebook sampling

    std::vector<AnglePair> sample_angle_set(const CodebookSpec &spec, std::uint64_t seed)
    {
        if (spec.aoas.empty())
            throw ConfigError("codebook.aoa_deg", "at least one angle of arrival is required");
        std::mt19937_64 rng(seed);
        std::vector<AnglePair> pairs;
        std::set<std::array<double, 4>> seen;
        for (std::size_t i = 0; i < spec.entries; ++i)
        {
            const Direction aoa = spec.aoas[i % spec.aoas.size()];
            while (true)
            {
                Direction aod{unit(rng) * (pi / 2), unit(rng) * two_pi};
                if (seen.insert({aoa.theta, aoa.phi, aod.theta, aod.phi}).second)
                {
                    pairs.push_back({aoa, aod});
                    break;
                }
            }
        }
        return pairs;
    }

    Codebook scenario_codebook(const FarFieldScenario &ff, std::uint64_t seed)
    {
        if (ff.codebook.file)
        {
            Codebook cb = load_codebook(*ff.codebook.file);
            if (!(cb.descriptor() == ff.desc))
                throw ConfigError("codebook.file", "codebook array descriptor does not match the scenario");
            return cb;
        }
        const auto pairs = sample_angle_set(ff.codebook, seed);
        return build_codebook(ff.desc, pairs);
    }

    // --------------------------------------------------------------------------------------------
    // Metrics and histograms

    double class_performance(std::span<const RegionResult> regions, bool hssa)
    {
        double fin = 0.0, ini = 0.0;
        for (const auto &r : regions)
            if (r.hssa == hssa)
                fin += r.final, ini += r.initial;
        return performance(fin, ini);
    }

    std::size_t fsda_bin(double p)
    {
        if (p > -2.0)
            return 0;
        if (p > -4.0)
            return 1;
        if (p > -6.0)
            return 2;
        if (p > -8.0)
            return 3;
        return 4;
    }

    std::size_t hssa_bin(double p)
    {
        if (p > -20.0)
            return 0;
        if (p > -50.0)
            return 1;
        return 2;
    }

    std::size_t Histogram::total() const
    {
        std::size_t t = 0;
        for (auto c : counts)
            t += c;
        return t;
    }

    double Histogram::fraction(std::size_t bin) const
    {
        const std::size_t t = total();
        return t ? double(counts[bin]) / double(t) : 0.0;
    }

    // --------------------------------------------------------------------------------------------
    // Batch

    BatchReport run_batch(const FarFieldScenario &ff, const Codebook &cb, std::uint64_t seed, std::size_t n_cases)
    {
        const std::size_t d = ff.batch.fsda, u = ff.batch.hssa;
        if (n_cases < 1)
            throw ConfigError("batch.cases", "must be >= 1");

        // Entries grouped by AoA, in codebook order
        std::vector<std::pair<Direction, std::vector<std::size_t>>> groups;
        for (std::size_t i = 0; i < cb.size(); ++i)
        {
            auto it = std::find_if(groups.begin(), groups.end(), [&](const auto &g) { return g.first == cb[i].aoa; });
            if (it == groups.end())
                groups.push_back({cb[i].aoa, {i}});
            else
                it->second.push_back(i);
        }
        std::vector<std::size_t> usable;
        for (std::size_t g = 0; g < groups.size(); ++g)
            if (groups[g].second.size() >= d + u)
                usable.push_back(g);
        if (usable.empty())
            throw ConfigError("batch", "no angle of arrival has " + std::to_string(d + u) + " codebook entries");

        const AngularGrid grid = ff.grid();
        BatchReport rep;
        rep.cases.resize(n_cases);
        const auto t0 = std::chrono::steady_clock::now();
        const long long n = (long long)n_cases;
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < n; ++i)
        {
            CaseRecord &rec = rep.cases[i];
            rec.index = std::size_t(i);
            std::mt19937_64 rng(splitmix64(seed ^ splitmix64(std::uint64_t(i))));
            const auto &group = groups[usable[std::size_t(unit(rng) * double(usable.size()))]];
            std::vector<std::size_t> pool = group.second;
            std::vector<CodebookEntry> entries;
            for (std::size_t k = 0; k < d + u; ++k)
            {
                std::size_t j = k + std::size_t(unit(rng) * double(pool.size() - k));
                std::swap(pool[k], pool[j]);
                entries.push_back(cb[pool[k]]);
            }
            rec.sc.aoa = group.first;
            for (std::size_t k = 0; k < d + u; ++k)
                (k < d ? rec.sc.fsda : rec.sc.hssa).push_back(entries[k].aod);
            try
            {
                ShieldResult res = run_shield(cb.descriptor(), entries, rec.sc, ff.shield, grid);
                rec.regions = std::move(res.regions);
                rec.iterations = res.iterations;
                rec.final_cost = res.final_cost;
                rec.fsda_p = class_performance(rec.regions, false);
                rec.hssa_p = class_performance(rec.regions, true);
                rec.ok = true;
            }
            catch (const std::exception &e)
            {
                rec.error = e.what();
            }
        }
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        auto init = [](Histogram &h, auto labels)
        {
            h.labels.assign(labels.begin(), labels.end());
            h.counts.assign(labels.size(), 0);
        };
        init(rep.fsda_regions, fsda_bin_labels);
        init(rep.fsda_cases, fsda_bin_labels);
        init(rep.hssa_regions, hssa_bin_labels);
        init(rep.hssa_cases, hssa_bin_labels);
        std::size_t ok = 0, hssa_good = 0, fsda_good = 0, fsda_regions = 0, fsda_regions_good = 0;
        for (const auto &rec : rep.cases)
        {
            if (!rec.ok)
            {
                ++rep.failures;
                continue;
            }
            ++ok;
            for (const auto &r : rec.regions)
            {
                if (r.hssa)
                    ++rep.hssa_regions.counts[hssa_bin(r.p_db)];
                else
                {
                    ++rep.fsda_regions.counts[fsda_bin(r.p_db)];
                    ++fsda_regions;
                    fsda_regions_good += r.p_db >= -4.0;
                }
            }
            ++rep.fsda_cases.counts[fsda_bin(rec.fsda_p)];
            ++rep.hssa_cases.counts[hssa_bin(rec.hssa_p)];
            hssa_good += rec.hssa_p <= -20.0;
            fsda_good += rec.fsda_p >= -4.0;
        }
        if (ok)
        {
            rep.hssa_case_le20 = double(hssa_good) / double(ok);
            rep.fsda_case_ge4 = double(fsda_good) / double(ok);
        }
        if (fsda_regions)
            rep.fsda_region_ge4 = double(fsda_regions_good) / double(fsda_regions);
        return rep;
    }

    void write_batch(const BatchReport &rep, const std::filesystem::path &dir)
    {
        make_dir(dir);
        Csv regions({"case", "region", "kind", "theta_deg", "phi_deg", "initial", "common", "final", "p_db"});
        Csv cases({"case", "status", "aoa_theta_deg", "aoa_phi_deg", "fsda_p_db", "hssa_p_db", "iterations",
                   "final_cost", "error"});
        for (const auto &rec : rep.cases)
        {
            for (std::size_t k = 0; k < rec.regions.size(); ++k)
            {
                const auto &r = rec.regions[k];
                regions.row({std::to_string(rec.index), std::to_string(k), region_kind(r), deg(r.direction.theta),
                             deg(r.direction.phi), num(r.initial), num(r.common), num(r.final), num(r.p_db)});
            }
            cases.row({std::to_string(rec.index), rec.ok ? "ok" : "failed", deg(rec.sc.aoa.theta),
                       deg(rec.sc.aoa.phi), rec.ok ? num(rec.fsda_p) : "", rec.ok ? num(rec.hssa_p) : "",
                       std::to_string(rec.iterations), rec.ok ? num(rec.final_cost) : "", csv_text(rec.error)});
        }
        regions.save(dir / "batch_regions.csv");
        cases.save(dir / "batch_cases.csv");

        Csv hist({"class", "basis", "bin", "count", "fraction"});
        auto add = [&](const char *cls, const char *basis, const Histogram &h)
        {
            for (std::size_t b = 0; b < h.counts.size(); ++b)
                hist.row({cls, basis, h.labels[b], std::to_string(h.counts[b]), num(h.fraction(b))});
        };
        add("fsda", "region", rep.fsda_regions);
        add("fsda", "case", rep.fsda_cases);
        add("hssa", "region", rep.hssa_regions);
        add("hssa", "case", rep.hssa_cases);
        hist.save(dir / "batch_histogram.csv");

        Csv summary({"metric", "value"});
        summary.row({"cases", std::to_string(rep.cases.size())});
        summary.row({"failures", std::to_string(rep.failures)});
        summary.row({"hssa_case_fraction_le_-20db", num(rep.hssa_case_le20)});
        summary.row({"fsda_case_fraction_ge_-4db", num(rep.fsda_case_ge4)});
        summary.row({"fsda_region_fraction_ge_-4db", num(rep.fsda_region_ge4)});
        summary.save(dir / "batch_summary.csv");
    }

    // --------------------------------------------------------------------------------------------
    // Separation sweep

    ShieldCase sweep_case(const SweepSpec &spec, double s, Direction aoa)
    {
        const Direction b = spec.base;
        if (!(s > 0.0))
            throw ConfigError("sweep", "separation must be > 0");
        ShieldCase sc;
        sc.aoa = aoa;
        sc.hssa = {b};
        if (spec.axis == SweepAxis::azimuth)
        {
            if (!(b.theta > 0.0))
                throw ConfigError("sweep", "azimuth sweeps need a base elevation > 0");
            if (spec.layout == SweepLayout::between)
            {
                if (!(s < pi / 2))
                    throw ConfigError("sweep", "the HSSA is no longer between the FSDAs");
                sc.fsda = {{b.theta, wrap_phase(b.phi - s)}, {b.theta, wrap_phase(b.phi + s)}};
            }
            else
            {
                if (!(spec.gap < pi) || !(s + spec.gap < two_pi - s))
                    throw ConfigError("sweep", "the HSSA is no longer outside the FSDA span");
                sc.fsda = {{b.theta, wrap_phase(b.phi + s)}, {b.theta, wrap_phase(b.phi + s + spec.gap)}};
            }
        }
        else
        {
            if (spec.layout == SweepLayout::between)
            {
                if (!(b.theta - s >= 0.0 && b.theta + s <= pi / 2))
                    throw ConfigError("sweep", "FSDA elevation leaves [0, 90] degrees");
                sc.fsda = {{b.theta - s, b.phi}, {b.theta + s, b.phi}};
            }
            else
            {
                if (!(b.theta + s + spec.gap <= pi / 2))
                    throw ConfigError("sweep", "FSDA elevation leaves [0, 90] degrees");
                sc.fsda = {{b.theta + s, b.phi}, {b.theta + s + spec.gap, b.phi}};
            }
        }
        return sc;
    }

    std::vector<SweepRow> run_sweep(const FarFieldScenario &ff)
    {
        const AngularGrid grid = ff.grid();
        const bool single = ff.sweep.separations.empty();
        std::vector<SweepRow> rows(single ? 1 : ff.sweep.separations.size());
        std::vector<std::string> errors(rows.size());
        const long long n = (long long)rows.size();
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < n; ++i)
        {
            SweepRow &row = rows[i];
            try
            {
                if (single)
                    row.sc = ff.shield_case();
                else
                {
                    row.separation = ff.sweep.separations[i];
                    row.sc = sweep_case(ff.sweep, row.separation, ff.aoa);
                }
            }
            catch (const ConfigError &e)
            {
                row.skipped = true;
                row.reason = e.what();
                continue;
            }
            try
            {
                auto entries = case_entries(ff.desc, row.sc);
                auto res = run_shield(ff.desc, entries, row.sc, ff.shield, grid);
                row.regions = std::move(res.regions);
                row.fsda_p = class_performance(row.regions, false);
                row.hssa_p = class_performance(row.regions, true);
            }
            catch (const std::exception &e)
            {
                errors[i] = e.what();
            }
        }
        for (std::size_t i = 0; i < errors.size(); ++i)
            if (!errors[i].empty())
                throw NumericalError("sweep", "separation " + deg(rows[i].separation) + " deg: " + errors[i]);
        return rows;
    }

    void write_sweep(const std::vector<SweepRow> &rows, const std::filesystem::path &dir)
    {
        make_dir(dir);
        Csv out({"separation_deg", "fsda_p_db", "hssa_p_db"});
        Csv skipped({"separation_deg", "reason"});
        for (const auto &r : rows)
        {
            if (r.skipped)
            {
                skipped.row({deg(r.separation), csv_text(r.reason)});
                continue;
            }
            out.row({deg(r.separation), num(r.fsda_p), num(r.hssa_p)});
        }
        out.save(dir / "sweep.csv");
        skipped.save(dir / "sweep_skipped.csv");
    }

    // --------------------------------------------------------------------------------------------
    // Phase profiles and heatmaps

    void write_phase_csv(const PhaseProfile &phase, const std::filesystem::path &path)
    {
        Csv out({"row", "col", "phase_rad"});
        for (std::size_t r = 0; r < phase.rows(); ++r)
            for (std::size_t c = 0; c < phase.cols(); ++c)
                out.row({std::to_string(r), std::to_string(c), num(phase(r, c))});
        out.save(path);
    }

    void write_phase_csv(std::span<const PhaseProfile> panels, const std::filesystem::path &path)
    {
        Csv out({"panel", "row", "col", "phase_rad"});
        for (std::size_t p = 0; p < panels.size(); ++p)
            for (std::size_t r = 0; r < panels[p].rows(); ++r)
                for (std::size_t c = 0; c < panels[p].cols(); ++c)
                    out.row({std::to_string(p), std::to_string(r), std::to_string(c), num(panels[p](r, c))});
        out.save(path);
    }

    PhaseProfile read_phase_csv(const std::filesystem::path &path, std::size_t rows, std::size_t cols)
    {
        std::ifstream f(path);
        if (!f)
            throw IoError("cannot open " + path.string());
        std::string line;
        if (!std::getline(f, line) || line.rfind("row,col,phase_rad", 0) != 0)
            throw FormatError(path.string() + ": expected the header row,col,phase_rad");
        std::vector<double> values(rows * cols, 0.0);
        std::vector<char> seen(rows * cols, 0);
        std::size_t lineno = 1;
        while (std::getline(f, line))
        {
            ++lineno;
            if (line.empty())
                continue;
            std::istringstream ls(line);
            std::string a, b, c;
            if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
                throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected three columns");
            try
            {
                std::size_t r = std::stoul(a), col = std::stoul(b);
                double v = std::stod(c);
                if (r >= rows || col >= cols || !std::isfinite(v))
                    throw std::out_of_range("index");
                values[r * cols + col] = v;
                seen[r * cols + col] = 1;
            }
            catch (const std::exception &)
            {
                throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad row, column or phase");
            }
        }
        if (std::find(seen.begin(), seen.end(), 0) != seen.end())
            throw DimensionError(path.string() + ": profile does not cover every element");
        return PhaseProfile(rows, cols, std::move(values));
    }

    void render_angular(const AngularFieldMap &map, const std::filesystem::path &path, const OutputOptions &opt)
    {
        std::vector<double> mag(map.values.size());
        for (std::size_t i = 0; i < mag.size(); ++i)
            mag[i] = std::abs(map.values[i]);
        write_heatmap(make_heatmap(mag, map.grid.n_phi(), map.grid.n_theta(), opt.scale, opt.floor_db), path);
    }

    void render_slice(const VolumeFieldMap &map, const DualVolumeGrid &grid, double z,
                      const std::filesystem::path &path, const OutputOptions &opt)
    {
        const auto &n = grid.coarse_counts();
        const double dz = grid.coarse_spacing()[2];
        const std::size_t iz = std::size_t(std::clamp(std::lround(z / dz), 0l, long(n[2] - 1)));
        std::vector<double> mag(n[0] * n[1]);
        for (std::size_t iy = 0; iy < n[1]; ++iy)
            for (std::size_t ix = 0; ix < n[0]; ++ix)
                mag[iy * n[0] + ix] = std::abs(map.coarse[grid.coarse_index(ix, iy, iz)]);
        write_heatmap(make_heatmap(mag, n[0], n[1], opt.scale, opt.floor_db), path);
    }

    // --------------------------------------------------------------------------------------------
    // Commands

    namespace
    {
        const FarFieldScenario &far_field_of(const Scenario &sc)
        {
            if (sc.kind != ScenarioKind::far_field)
                throw ConfigError("kind", "this command needs a far_field scenario");
            return sc.far_field;
        }

        const QuietZoneScenario &quiet_zone_of(const Scenario &sc)
        {
            if (sc.kind != ScenarioKind::quiet_zone)
                throw ConfigError("kind", "this command needs a quiet_zone scenario");
            return sc.quiet_zone;
        }

        std::vector<CodebookEntry> run_entries(const FarFieldScenario &ff, const ShieldCase &sc)
        {
            if (ff.codebook.file)
            {
                Codebook cb = load_codebook(*ff.codebook.file);
                if (!(cb.descriptor() == ff.desc))
                    throw ConfigError("codebook.file", "codebook array descriptor does not match the scenario");
                return case_entries(cb, sc);
            }
            return case_entries(ff.desc, sc);
        }

        std::string fixed(double v, int digits = 2)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.*f", digits, v);
            return buf;
        }
    } // namespace

    std::vector<std::string> command_codebook_build(const Scenario &sc, const std::filesystem::path &out)
    {
        const auto &ff = far_field_of(sc);
        make_dir(out);
        const auto pairs = sample_angle_set(ff.codebook, sc.seed);
        const Codebook cb = build_codebook(ff.desc, pairs);
        save_codebook(cb, out / "codebook.rfcb");
        Csv csv({"index", "aoa_theta_deg", "aoa_phi_deg", "aod_theta_deg", "aod_phi_deg", "peak"});
        for (std::size_t i = 0; i < cb.size(); ++i)
        {
            const auto &e = cb[i];
            csv.row({std::to_string(i), deg(e.aoa.theta), deg(e.aoa.phi), deg(e.aod.theta), deg(e.aod.phi),
                     num(e.peak)});
        }
        csv.save(out / "codebook.csv");
        return {"codebook entries=" + std::to_string(cb.size()) + " file=" + (out / "codebook.rfcb").string()};
    }

    std::vector<std::string> command_shield_run(const Scenario &sc, const std::filesystem::path &out)
    {
        const auto &ff = far_field_of(sc);
        const ShieldCase scase = ff.shield_case();
        scase.validate();
        make_dir(out);
        const auto entries = run_entries(ff, scase);
        const AngularGrid grid = ff.grid();
        const ShieldResult res = run_shield(ff.desc, entries, scase, ff.shield, grid);

        Csv metrics({"region", "kind", "theta_deg", "phi_deg", "initial", "common", "final", "p_db"});
        std::vector<std::string> lines;
        for (std::size_t k = 0; k < res.regions.size(); ++k)
        {
            const auto &r = res.regions[k];
            metrics.row({std::to_string(k), region_kind(r), deg(r.direction.theta), deg(r.direction.phi),
                         num(r.initial), num(r.common), num(r.final), num(r.p_db)});
            lines.push_back(std::string(region_kind(r)) + " (" + fixed(rad2deg(r.direction.theta), 1) + ", " +
                            fixed(rad2deg(r.direction.phi), 1) + ") initial=" + fixed(r.initial) +
                            " final=" + fixed(r.final, 4) + " P=" + fixed(r.p_db) + " dB");
        }
        metrics.save(out / "metrics.csv");

        Csv hist({"iteration", "cost"});
        for (std::size_t i = 0; i < res.cost_history.size(); ++i)
            hist.row({std::to_string(i), num(res.cost_history[i])});
        hist.save(out / "cost_history.csv");
        write_phase_csv(res.phi_common, out / "phase_common.csv");
        write_phase_csv(res.phi_opt, out / "phase_opt.csv");

        if (sc.output.heatmaps)
        {
            const RisArray array = ff.desc.array();
            const PlaneWaveSource src = ff.desc.source(scase.aoa);
            for (std::size_t k = 0; k < entries.size(); ++k)
            {
                auto map = scattered_field(array, entries[k].phase, ff.desc.source(entries[k].aoa), grid, ff.desc.cfg);
                render_angular(map, out / ("before_" + std::to_string(k) + "_" + region_kind(res.regions[k]) + ".pgm"),
                               sc.output);
            }
            render_angular(scattered_field(array, res.phi_common, src, grid, ff.desc.cfg), out / "common.pgm",
                           sc.output);
            render_angular(scattered_field(array, res.phi_opt, src, grid, ff.desc.cfg), out / "after.pgm", sc.output);
        }
        lines.push_back("iterations=" + std::to_string(res.iterations) + " cost " + num(res.initial_cost) + " -> " +
                        num(res.final_cost));
        return lines;
    }

    std::vector<std::string> command_shield_batch(const Scenario &sc, const std::filesystem::path &out)
    {
        const auto &ff = far_field_of(sc);
        make_dir(out);
        const Codebook cb = scenario_codebook(ff, sc.seed);
        const BatchReport rep = run_batch(ff, cb, sc.seed, ff.batch.cases);
        write_batch(rep, out);
        {
            std::ofstream t(out / "batch_timing.txt", std::ios::trunc);
            t << "seconds " << rep.seconds << "\n";
        }
        return {"cases=" + std::to_string(rep.cases.size()) + " failures=" + std::to_string(rep.failures),
                "hssa cases <= -20 dB: " + fixed(100.0 * rep.hssa_case_le20, 1) + "%",
                "fsda cases >= -4 dB: " + fixed(100.0 * rep.fsda_case_ge4, 1) + "% (per region " +
                    fixed(100.0 * rep.fsda_region_ge4, 1) + "%)",
                "wall time " + fixed(rep.seconds) + " s"};
    }

    std::vector<std::string> command_shield_sweep(const Scenario &sc, const std::filesystem::path &out)
    {
        const auto &ff = far_field_of(sc);
        make_dir(out);
        const auto rows = run_sweep(ff);
        write_sweep(rows, out);
        std::size_t skipped = 0;
        for (const auto &r : rows)
            skipped += r.skipped;
        return {"rows=" + std::to_string(rows.size() - skipped) + " skipped=" + std::to_string(skipped)};
    }

    std::vector<std::string> command_quietzone_run(const Scenario &sc, const std::filesystem::path &out)
    {
        const auto &qz = quiet_zone_of(sc);
        make_dir(out);
        const Scene scene = qz.scene();
        const DualVolumeGrid grid = qz.grid();
        const QzReport rep = run_quiet_zone(scene, grid, qz.optimizer, Exec::parallel, qz.memory_budget);

        auto supp = [](const QuietZoneMetrics &m) { return m.suppression_db ? num(*m.suppression_db) : ""; };
        Csv metrics({"stage", "avg_power", "avg_magnitude", "suppression_db", "outside_mean"});
        metrics.row({"baseline", num(rep.baseline_zone.avg_power), num(rep.baseline_zone.avg_magnitude),
                     supp(rep.baseline_zone), num(rep.baseline_outside)});
        metrics.row({"initial", num(rep.initial_zone.avg_power), num(rep.initial_zone.avg_magnitude),
                     supp(rep.initial_zone), ""});
        metrics.row({"final", num(rep.final_zone.avg_power), num(rep.final_zone.avg_magnitude),
                     supp(rep.final_zone), num(rep.final_outside)});
        metrics.save(out / "qz_metrics.csv");

        Csv hist({"sweep", "step", "accepted", "avg_power", "avg_magnitude", "suppression_db"});
        for (const auto &h : rep.optimization.history)
            hist.row({std::to_string(h.sweep), num(h.step), std::to_string(h.accepted), num(h.avg_power),
                      num(h.avg_magnitude), num(20.0 * std::log10(h.avg_magnitude / rep.baseline_zone.avg_magnitude))});
        hist.save(out / "qz_history.csv");

        Csv summary({"metric", "value"});
        summary.row({"fine_points", std::to_string(grid.fine_size())});
        summary.row({"coarse_points", std::to_string(grid.coarse_size())});
        summary.row({"elements", std::to_string(scene.element_count())});
        summary.row({"sweeps", std::to_string(rep.optimization.sweeps)});
        summary.row({"stop", to_string(rep.optimization.stop)});
        summary.row({"zone_suppression_db", supp(rep.final_zone)});
        summary.row({"outside_change_db", num(rep.outside_change_db)});
        summary.save(out / "qz_summary.csv");
        write_phase_csv(rep.final, out / "qz_phases.csv");

        if (sc.output.heatmaps)
        {
            const VolumeFieldMap *before = &rep.baseline_map, *after = &rep.final_map;
            VolumeFieldMap total_before, total_after;
            if (sc.output.total_field)
            {
                const auto inc = illuminate(scene);
                total_before = scatter_to_grid(scene, rep.baseline, inc, grid, Exec::parallel, true);
                total_after = scatter_to_grid(scene, rep.final, inc, grid, Exec::parallel, true);
                before = &total_before;
                after = &total_after;
            }
            auto zs = sc.output.slices_z.empty() ? std::vector<double>{qz.zone_center.z} : sc.output.slices_z;
            for (std::size_t i = 0; i < zs.size(); ++i)
            {
                render_slice(*before, grid, zs[i], out / ("slice_" + std::to_string(i) + "_baseline.pgm"), sc.output);
                render_slice(*after, grid, zs[i], out / ("slice_" + std::to_string(i) + "_final.pgm"), sc.output);
            }
        }
        return {"fine points=" + std::to_string(grid.fine_size()) + " elements=" + std::to_string(scene.element_count()),
                "zone suppression " + fixed(rep.final_zone.suppression_db.value_or(0.0)) + " dB after " +
                    std::to_string(rep.optimization.sweeps) + " sweeps (stop: " + to_string(rep.optimization.stop) + ")",
                "outside mean change " + fixed(rep.outside_change_db) + " dB"};
    }

    std::vector<std::string> command_render(const Scenario &sc, const std::filesystem::path &out)
    {
        make_dir(out);
        std::vector<std::string> lines;
        if (sc.kind == ScenarioKind::far_field)
        {
            const auto &ff = sc.far_field;
            const AngularGrid grid = ff.grid();
            const RisArray array = ff.desc.array();
            if (ff.render_phase_file)
            {
                auto phase = read_phase_csv(*ff.render_phase_file, ff.desc.rows, ff.desc.cols);
                render_angular(scattered_field(array, phase, ff.desc.source(ff.aoa), grid, ff.desc.cfg),
                               out / "field.pgm", sc.output);
                lines.push_back("rendered " + (out / "field.pgm").string());
            }
            else
            {
                const ShieldCase scase = ff.shield_case();
                scase.validate();
                const auto entries = run_entries(ff, scase);
                for (std::size_t k = 0; k < entries.size(); ++k)
                {
                    auto path = out / ("entry_" + std::to_string(k) + ".pgm");
                    render_angular(scattered_field(array, entries[k].phase, ff.desc.source(entries[k].aoa), grid,
                                                   ff.desc.cfg),
                                   path, sc.output);
                    lines.push_back("rendered " + path.string());
                }
            }
        }
        else
        {
            const auto &qz = sc.quiet_zone;
            const Scene scene = qz.scene();
            const DualVolumeGrid grid = qz.grid();
            const auto map = scatter_to_grid(scene, uniform_profiles(scene), illuminate(scene), grid, Exec::parallel,
                                             sc.output.total_field);
            auto zs = sc.output.slices_z.empty() ? std::vector<double>{qz.zone_center.z} : sc.output.slices_z;
            for (std::size_t i = 0; i < zs.size(); ++i)
            {
                auto path = out / ("slice_" + std::to_string(i) + "_baseline.pgm");
                render_slice(map, grid, zs[i], path, sc.output);
                lines.push_back("rendered " + path.string());
            }
        }
        return lines;
    }

} // namespace rffence
