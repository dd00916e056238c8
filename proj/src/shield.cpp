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

#include "rffence/shield.hpp"
#include "rffence/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rffence
{
    void ShieldParams::validate() const
    {
        if (!(tau_fsda > 0.0 && tau_fsda <= 1.0))
            throw ConfigError("shield.tau_fsda", "must lie in (0, 1]");
        if (!(tau_hssa > 0.0 && tau_hssa <= 1.0))
            throw ConfigError("shield.tau_hssa", "must lie in (0, 1]");
        if (!(eta >= 0.0 && eta <= 1.0))
            throw ConfigError("shield.eta", "must lie in [0, 1]");
        if (!(w_opt >= 0.0) || !std::isfinite(w_opt))
            throw ConfigError("shield.w_opt", "must be >= 0");
        if (!(mu > 0.0) || !std::isfinite(mu))
            throw ConfigError("shield.mu", "must be > 0");
        if (!(tolerance >= 0.0) || !std::isfinite(tolerance))
            throw ConfigError("shield.tolerance", "must be >= 0");
    }

    namespace
    {
        std::vector<std::size_t> set_cells(const std::vector<std::uint8_t> &mask)
        {
            std::vector<std::size_t> cells;
            for (std::size_t i = 0; i < mask.size(); ++i)
                if (mask[i])
                    cells.push_back(i);
            return cells;
        }

        void mark_dominant(const AngularFieldMap &map, double tau, std::vector<std::uint8_t> &mask)
        {
            const double peak = map.max_magnitude();
            const double threshold = tau * peak;
            for (std::size_t i = 0; i < map.values.size(); ++i)
            {
                const double m = std::abs(map.values[i]);
                if (m > threshold || m == peak)
                    mask[i] = 1;
            }
        }
    } // namespace

    std::vector<std::size_t> RegionMasks::fsda_cells() const { return set_cells(fsda); }
    std::vector<std::size_t> RegionMasks::hssa_cells() const { return set_cells(hssa); }

    RegionMasks build_masks(std::span<const AngularFieldMap> maps, std::size_t d, const ShieldParams &params)
    {
        if (maps.empty())
            throw ConfigError("shield.regions", "no codebook entries given");
        if (d > maps.size())
            throw ConfigError("shield.regions", "more FSDAs than entries");
        const std::size_t cells = maps[0].grid.size();
        for (const auto &m : maps)
            if (!(m.grid == maps[0].grid))
                throw ConfigError("shield.grid", "entry field maps use different grids");

        RegionMasks masks{std::vector<std::uint8_t>(cells, 0), std::vector<std::uint8_t>(cells, 0)};
        for (std::size_t k = 0; k < maps.size(); ++k)
            mark_dominant(maps[k], k < d ? params.tau_fsda : params.tau_hssa, k < d ? masks.fsda : masks.hssa);
        return masks;
    }

    AngularFieldMap composite_field(std::span<const AngularFieldMap> maps, std::size_t d, const RegionMasks &masks,
                                    const ShieldParams &params)
    {
        if (d == 0 || d > maps.size())
            throw ConfigError("shield.regions", "at least one FSDA entry is required");
        AngularFieldMap common(maps[0].grid);
        for (std::size_t c = 0; c < common.values.size(); ++c)
        {
            if (!masks.fsda[c])
                continue;
            std::size_t best = 0;
            double best_mag = std::abs(maps[0].values[c]);
            for (std::size_t k = 1; k < d; ++k)
            {
                double m = std::abs(maps[k].values[c]);
                if (m > best_mag)
                    best = k, best_mag = m;
            }
            common.values[c] = maps[best].values[c] * (masks.hssa[c] ? params.eta : 1.0);
        }
        return common;
    }

    PhaseProfile back_project(const AngularFieldMap &common, const RisArray &array, const PlaneWaveSource &src)
    {
        const double k = src.wavenumber();
        const auto x = array.local_x_coords();
        const auto y = array.local_y_coords();
        const std::size_t rows = array.rows(), cols = array.cols();
        std::vector<cplx> a(array.size(), 0.0), ex(cols), ey(rows);
        bool active = false;
        for (std::size_t cell = 0; cell < common.values.size(); ++cell)
        {
            const cplx e = common.values[cell];
            if (e == 0.0)
                continue;
            active = true;
            const Direction dir = common.grid.direction(cell);
            const double s = k * std::sin(dir.theta);
            const double cx = s * std::cos(dir.phi), cy = s * std::sin(dir.phi);
            for (std::size_t c = 0; c < cols; ++c)
                ex[c] = std::polar(1.0, -x[c] * cx);
            for (std::size_t r = 0; r < rows; ++r)
            {
                const cplx er = e * std::polar(1.0, -y[r] * cy);
                for (std::size_t c = 0; c < cols; ++c)
                    a[r * cols + c] += er * ex[c];
            }
        }
        if (!active)
            throw NumericalError("back_project", "no active delivery region (composite field is zero everywhere)");

        const auto psi_inc = incident_phase(array, src);
        PhaseProfile phase(rows, cols);
        for (std::size_t n = 0; n < a.size(); ++n)
            phase.set(n, std::arg(a[n]) - psi_inc[n]);
        return phase;
    }

    // --------------------------------------------------------------------------------------------
    // ShieldProblem

    void ShieldProblem::add_cell(const RisArray &array, double k, const FarFieldConfig &cfg, Direction dir,
                                 cplx target, double weight)
    {
        const auto psi = direction_phase(array, k, dir);
        for (double p : psi)
            steering_.push_back(std::polar(1.0, p));
        scale_.push_back(cfg.e0 * kernels::element_pattern(dir.theta, cfg.rho));
        target_.push_back(target);
        weight_.push_back(weight);
    }

    ShieldProblem::ShieldProblem(const RisArray &array, const PlaneWaveSource &src, const FarFieldConfig &cfg,
                                 std::span<const Direction> fsda_dirs, std::span<const cplx> fsda_targets,
                                 std::span<const Direction> hssa_dirs, double w_opt)
    {
        if (fsda_dirs.size() != fsda_targets.size())
            throw ConfigError("shield", "one target per FSDA direction is required");
        cfg.validate();
        elements_ = array.size();
        psi_inc_ = incident_phase(array, src);
        const double k = src.wavenumber();
        for (std::size_t i = 0; i < fsda_dirs.size(); ++i)
            add_cell(array, k, cfg, fsda_dirs[i], fsda_targets[i], 1.0);
        for (const auto &dir : hssa_dirs)
            add_cell(array, k, cfg, dir, 0.0, w_opt);
    }

    ShieldProblem ShieldProblem::from_masks(const RisArray &array, const PlaneWaveSource &src,
                                            const FarFieldConfig &cfg, const AngularFieldMap &common,
                                            const RegionMasks &masks, double w_opt)
    {
        std::vector<Direction> fd, hd;
        std::vector<cplx> ft;
        for (std::size_t c : masks.fsda_cells())
        {
            fd.push_back(common.grid.direction(c));
            ft.push_back(common.values[c]);
        }
        for (std::size_t c : masks.hssa_cells())
            hd.push_back(common.grid.direction(c));
        return ShieldProblem(array, src, cfg, fd, ft, hd, w_opt);
    }

    std::vector<cplx> ShieldProblem::phasors(const PhaseProfile &phase) const
    {
        if (phase.size() != elements_)
            throw ConfigError("phase", "profile size does not match the problem");
        std::vector<cplx> u(elements_);
        for (std::size_t n = 0; n < elements_; ++n)
            u[n] = std::polar(1.0, phase[n] + psi_inc_[n]);
        return u;
    }

    double ShieldProblem::cost_and_gradient(const PhaseProfile &phase, std::span<double> grad, Exec exec) const
    {
        if (!grad.empty() && grad.size() != elements_)
            throw ConfigError("gradient", "buffer size does not match the problem");
        const auto u = phasors(phase);
        kernels::MaskedCostArgs args{steering_, scale_, target_, weight_, elements_};
        if (exec == Exec::serial)
            return kernels::masked_cost_serial(args, u, {}, grad);
        return kernels::masked_cost_parallel(args, u, {}, grad);
    }

    std::vector<cplx> ShieldProblem::fields(const PhaseProfile &phase) const
    {
        const auto u = phasors(phase);
        std::vector<cplx> out(cells());
        kernels::MaskedCostArgs args{steering_, scale_, target_, weight_, elements_};
        kernels::masked_cost_serial(args, u, out, {});
        return out;
    }

    // --------------------------------------------------------------------------------------------
    // Refinement

    RefineResult refine(const ShieldProblem &problem, const PhaseProfile &initial, const ShieldParams &params,
                        Exec exec)
    {
        params.validate();
        constexpr int max_halvings = 64;
        const std::size_t N = problem.elements();

        RefineResult res;
        res.phase = initial;
        res.final_mu = params.mu;
        std::vector<double> grad(N);
        double J = problem.cost_and_gradient(res.phase, grad, exec);
        if (!std::isfinite(J))
            throw NumericalError("shield.refine", "cost diverged at iteration 0");
        res.cost_history.push_back(J);

        double mu = params.mu;
        PhaseProfile trial(initial.rows(), initial.cols());
        while (res.iterations < params.max_iterations && J > 0.0)
        {
            double J_new = J;
            bool accepted = false;
            for (int h = 0; h <= max_halvings; ++h, mu *= 0.5)
            {
                for (std::size_t n = 0; n < N; ++n)
                    trial.set(n, res.phase[n] - mu * grad[n]);
                J_new = problem.cost(trial, exec);
                if (!std::isfinite(J_new))
                    throw NumericalError("shield.refine", "cost diverged at iteration " +
                                                              std::to_string(res.iterations + 1));
                if (J_new <= J)
                {
                    accepted = true;
                    break;
                }
            }
            if (!accepted)
                break;

            ++res.iterations;
            std::swap(res.phase, trial);
            const double rel = std::abs(J - J_new) / J;
            J = problem.cost_and_gradient(res.phase, grad, exec);
            res.cost_history.push_back(J);
            if (rel < params.tolerance)
                break;
        }
        res.final_mu = mu;
        return res;
    }

    double performance(double final_magnitude, double initial_magnitude)
    {
        if (!(initial_magnitude > 0.0))
            throw NumericalError("performance", "initial POI magnitude must be > 0");
        if (final_magnitude < 1e-10 * initial_magnitude)
            return performance_floor_db;
        return 20.0 * std::log10(final_magnitude / initial_magnitude);
    }

    // --------------------------------------------------------------------------------------------
    // Pipeline

    void ShieldCase::validate() const
    {
        if (fsda.empty())
            throw ConfigError("regions.fsda", "at least one FSDA is required");
        if (hssa.empty())
            throw ConfigError("regions.hssa", "at least one HSSA is required");
    }

    std::vector<CodebookEntry> case_entries(const ArrayDescriptor &desc, const ShieldCase &sc)
    {
        sc.validate();
        std::vector<CodebookEntry> out;
        for (const auto &dir : sc.fsda)
            out.push_back(generate_entry(desc, sc.aoa, dir));
        for (const auto &dir : sc.hssa)
            out.push_back(generate_entry(desc, sc.aoa, dir));
        return out;
    }

    std::vector<CodebookEntry> case_entries(const Codebook &cb, const ShieldCase &sc)
    {
        sc.validate();
        std::vector<CodebookEntry> out;
        for (const auto &dir : sc.fsda)
            out.push_back(cb.lookup(sc.aoa, dir));
        for (const auto &dir : sc.hssa)
            out.push_back(cb.lookup(sc.aoa, dir));
        return out;
    }

    ShieldResult run_shield(const ArrayDescriptor &desc, std::span<const CodebookEntry> entries,
                            const ShieldCase &sc, const ShieldParams &params, const AngularGrid &grid, Exec exec)
    {
        desc.validate();
        params.validate();
        sc.validate();
        const std::size_t d = sc.fsda.size();
        if (entries.size() != d + sc.hssa.size())
            throw ConfigError("shield.regions", "expected one codebook entry per region");

        const RisArray array = desc.array();
        const PlaneWaveSource src = desc.source(sc.aoa);

        std::vector<AngularFieldMap> maps;
        maps.reserve(entries.size());
        for (const auto &e : entries)
            maps.push_back(scattered_field(array, e.phase, desc.source(e.aoa), grid, desc.cfg, exec));

        const RegionMasks masks = build_masks(maps, d, params);
        const AngularFieldMap common = composite_field(maps, d, masks, params);

        ShieldResult out;
        out.phi_common = back_project(common, array, src);
        const ShieldProblem problem = ShieldProblem::from_masks(array, src, desc.cfg, common, masks, params.w_opt);
        out.fsda_cells = masks.fsda_cells().size();
        out.hssa_cells = masks.hssa_cells().size();

        RefineResult ref = refine(problem, out.phi_common, params, exec);
        out.phi_opt = std::move(ref.phase);
        out.iterations = ref.iterations;
        out.cost_history = std::move(ref.cost_history);
        out.initial_cost = out.cost_history.front();
        out.final_cost = out.cost_history.back();

        for (std::size_t k = 0; k < entries.size(); ++k)
        {
            RegionResult r;
            r.hssa = k >= d;
            r.direction = r.hssa ? sc.hssa[k - d] : sc.fsda[k];
            r.initial = entries[k].peak;
            r.common = field_at_poi(array, out.phi_common, src, desc.cfg, r.direction).magnitude;
            r.final = field_at_poi(array, out.phi_opt, src, desc.cfg, r.direction).magnitude;
            r.p_db = performance(r.final, r.initial);
            out.regions.push_back(r);
        }
        return out;
    }

} // namespace rffence
