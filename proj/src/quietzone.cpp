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

#include "rffence/quietzone.hpp"
#include "rffence/errors.hpp"

#include <cmath>
#include <string>

namespace rffence
{
    void QzOptimizerParams::validate() const
    {
        if (!(initial_step > 0.0 && initial_step <= pi))
            throw ConfigError("quietzone.initial_step", "must lie in (0, pi]");
        if (max_iterations < 1)
            throw ConfigError("quietzone.max_iterations", "must be >= 1");
        if (!(tolerance >= 0.0) || !std::isfinite(tolerance))
            throw ConfigError("quietzone.tolerance", "must be >= 0");
        if (!(threshold >= 0.0) || !std::isfinite(threshold))
            throw ConfigError("quietzone.threshold", "must be >= 0");
        if (!(min_step > 0.0))
            throw ConfigError("quietzone.min_step", "must be > 0");
    }

    const char *to_string(QzStop s)
    {
        switch (s)
        {
        case QzStop::threshold:
            return "threshold";
        case QzStop::tolerance:
            return "tolerance";
        case QzStop::max_iterations:
            return "max_iterations";
        case QzStop::step_floor:
            return "step_floor";
        }
        return "unknown";
    }

    // --------------------------------------------------------------------------------------------
    // FieldCache

    FieldCache::FieldCache(const Scene &scene, std::span<const cplx> incident, std::span<const Vec3> zone_points,
                           std::span<const PhaseProfile> phases, Exec exec, std::size_t memory_budget)
        : elements_(scene.element_positions()), incident_(incident.begin(), incident.end()),
          points_(zone_points.begin(), zone_points.end()), k_(scene.wavenumber()), exec_(exec)
    {
        if (points_.empty())
            throw ConfigError("quietzone", "the quiet zone contains no grid points");
        if (incident_.size() != elements_.size())
            throw ConfigError("incident", "expected one incident field per element");
        if (phases.size() != scene.panels.size())
            throw ConfigError("phases", "expected one profile per panel");
        for (std::size_t i = 0; i < phases.size(); ++i)
        {
            if (!phases[i].matches(scene.panels[i]))
                throw ConfigError("phases", "profile " + std::to_string(i) + " does not match its panel");
            panel_rows_.push_back(phases[i].rows());
            panel_cols_.push_back(phases[i].cols());
            auto v = phases[i].values();
            phases_.insert(phases_.end(), v.begin(), v.end());
        }

        const std::size_t N = elements_.size(), P = points_.size();
        // R = 0 is checked here once so later column evaluations cannot fail
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t n = 0; n < N; ++n)
                if (distance(points_[p], elements_[n]) == 0.0)
                    throw GeometryError("observation point " + std::to_string(p) + " coincides with element " +
                                        std::to_string(n) + " (R = 0)");

        if (N * P <= memory_budget / sizeof(cplx))
        {
            columns_.resize(N * P);
            const long long NN = (long long)N;
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
            for (long long n = 0; n < NN; ++n)
                fill_column(std::size_t(n), std::span<cplx>(columns_.data() + std::size_t(n) * P, P));
        }

        column_power_.assign(N, 0.0);
        sum_ = recompute();
        const long long NN = (long long)N;
#pragma omp parallel if (exec == Exec::parallel)
        {
            std::vector<cplx> scratch;
#pragma omp for schedule(static)
            for (long long n = 0; n < NN; ++n)
            {
                auto col = column(std::size_t(n), scratch);
                double b = 0.0;
                for (const auto &v : col)
                    b += std::norm(v);
                column_power_[n] = b;
            }
        }
    }

    void FieldCache::fill_column(std::size_t n, std::span<cplx> out) const
    {
        const Vec3 e = elements_[n];
        const cplx inc = incident_[n];
        for (std::size_t p = 0; p < points_.size(); ++p)
        {
            double R = distance(points_[p], e);
            out[p] = inc * std::polar(1.0 / R, k_ * R);
        }
    }

    std::span<const cplx> FieldCache::column(std::size_t n, std::vector<cplx> &scratch) const
    {
        const std::size_t P = points_.size();
        if (!columns_.empty())
            return std::span<const cplx>(columns_.data() + n * P, P);
        scratch.resize(P);
        fill_column(n, scratch);
        return scratch;
    }

    std::vector<PhaseProfile> FieldCache::profiles() const
    {
        std::vector<PhaseProfile> out;
        std::size_t offset = 0;
        for (std::size_t i = 0; i < panel_rows_.size(); ++i)
        {
            const std::size_t n = panel_rows_[i] * panel_cols_[i];
            out.emplace_back(panel_rows_[i], panel_cols_[i],
                             std::vector<double>(phases_.begin() + offset, phases_.begin() + offset + n));
            offset += n;
        }
        return out;
    }

    double FieldCache::power_sum() const
    {
        double s = 0.0;
        for (const auto &v : sum_)
            s += std::norm(v);
        return s;
    }

    double FieldCache::magnitude_sum() const
    {
        double s = 0.0;
        for (const auto &v : sum_)
            s += std::abs(v);
        return s;
    }

    cplx FieldCache::overlap(std::size_t, std::span<const cplx> col) const
    {
        return exec_ == Exec::serial ? kernels::conj_dot_serial(sum_, col) : kernels::conj_dot_parallel(sum_, col);
    }

    double FieldCache::power_change(std::size_t n, double new_phase, cplx overlap) const
    {
        const cplx delta = std::polar(1.0, new_phase) - std::polar(1.0, phases_[n]);
        return 2.0 * std::real(delta * overlap) + std::norm(delta) * column_power_[n];
    }

    void FieldCache::set_phase(std::size_t n, double new_phase, std::span<const cplx> col)
    {
        new_phase = wrap_phase(new_phase);
        const cplx delta = std::polar(1.0, new_phase) - std::polar(1.0, phases_[n]);
        if (exec_ == Exec::serial)
            kernels::axpy_serial(delta, col, sum_);
        else
            kernels::axpy_parallel(delta, col, sum_);
        phases_[n] = new_phase;
    }

    void FieldCache::set_phase(std::size_t n, double new_phase)
    {
        std::vector<cplx> scratch;
        set_phase(n, new_phase, column(n, scratch));
    }

    std::vector<cplx> FieldCache::recompute() const
    {
        std::vector<cplx> w(elements_.size());
        for (std::size_t n = 0; n < w.size(); ++n)
            w[n] = incident_[n] * std::polar(1.0, phases_[n]);
        std::vector<cplx> out(points_.size());
        if (exec_ == Exec::serial)
            kernels::near_field_serial(elements_, w, k_, points_, out);
        else
            kernels::near_field_parallel(elements_, w, k_, points_, out);
        return out;
    }

    double FieldCache::divergence() const
    {
        const auto full = recompute();
        double num = 0.0, den = 0.0;
        for (std::size_t p = 0; p < full.size(); ++p)
        {
            num += std::norm(sum_[p] - full[p]);
            den += std::norm(full[p]);
        }
        return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }

    // --------------------------------------------------------------------------------------------
    // Initialization and descent

    void init_per_element(FieldCache &cache)
    {
        std::vector<cplx> scratch;
        for (std::size_t n = 0; n < cache.elements(); ++n)
        {
            auto col = cache.column(n, scratch);
            // r = conj(A) - B exp(j Phi_n)
            const cplx r = std::conj(cache.overlap(n, col)) - cache.column_power(n) * std::polar(1.0, cache.phase(n));
            if (r == 0.0)
                continue;
            cache.set_phase(n, std::arg(-r), col);
        }
    }

    std::vector<PhaseProfile> init_per_element(const Scene &scene, const DualVolumeGrid &grid, Exec exec)
    {
        auto incident = illuminate(scene);
        auto base = uniform_profiles(scene);
        FieldCache cache(scene, incident, grid.fine_points(), base, exec);
        init_per_element(cache);
        return cache.profiles();
    }

    namespace
    {
        QzSweepRecord snapshot(const FieldCache &cache, std::size_t sweep, double step, std::size_t accepted)
        {
            const double P = double(cache.points());
            return {sweep, step, accepted, cache.power_sum() / P, cache.magnitude_sum() / P};
        }
    } // namespace

    QzOptimizeResult optimize(FieldCache &cache, const QzOptimizerParams &params)
    {
        params.validate();
        QzOptimizeResult res;
        double step = params.initial_step;
        res.history.push_back(snapshot(cache, 0, step, 0));
        if (res.history.back().avg_magnitude <= params.threshold)
        {
            res.stop = QzStop::threshold;
            return res;
        }

        std::vector<cplx> scratch;
        res.stop = QzStop::max_iterations;
        while (res.sweeps < params.max_iterations)
        {
            const double J_start = cache.power_sum();
            double J = J_start;
            std::size_t accepted = 0;
            for (std::size_t n = 0; n < cache.elements(); ++n)
            {
                auto col = cache.column(n, scratch);
                const cplx A = cache.overlap(n, col);
                const double phi = cache.phase(n);
                const double d_plus = cache.power_change(n, phi + step, A);
                const double d_minus = cache.power_change(n, phi - step, A);
                const double best = std::min(d_plus, d_minus);
                if (best < -1e-14 * J)
                {
                    cache.set_phase(n, d_plus <= d_minus ? phi + step : phi - step, col);
                    J += best;
                    ++accepted;
                }
            }
            ++res.sweeps;

            if (params.self_check)
            {
                const double div = cache.divergence();
                if (!(div <= 1e-6))
                    throw NumericalError("quietzone.self_check", "cached zone field diverged from recomputation (" +
                                                                     std::to_string(div) + " relative) in sweep " +
                                                                     std::to_string(res.sweeps));
            }
            res.history.push_back(snapshot(cache, res.sweeps, step, accepted));
            const auto &rec = res.history.back();
            if (!std::isfinite(rec.avg_power))
                throw NumericalError("quietzone.optimize", "non-finite zone power in sweep " + std::to_string(res.sweeps));

            if (rec.avg_magnitude <= params.threshold)
            {
                res.stop = QzStop::threshold;
                break;
            }
            if (accepted == 0)
            {
                step *= 0.5;
                if (step < params.min_step)
                {
                    res.stop = QzStop::step_floor;
                    break;
                }
            }
            else
            {
                const double J_end = cache.power_sum();
                if (J_start > 0.0 && (J_start - J_end) / J_start < params.tolerance)
                {
                    res.stop = QzStop::tolerance;
                    break;
                }
            }
        }
        return res;
    }

    QzReport run_quiet_zone(const Scene &scene, const DualVolumeGrid &grid, const QzOptimizerParams &params,
                            Exec exec, std::size_t memory_budget)
    {
        params.validate();
        QzReport rep;
        const auto incident = illuminate(scene);
        rep.baseline = uniform_profiles(scene);
        rep.baseline_map = scatter_to_grid(scene, rep.baseline, incident, grid, exec);
        rep.baseline_zone = quiet_zone_metrics(rep.baseline_map.fine, rep.baseline_map.fine);
        rep.baseline_outside = outside_mean_magnitude(rep.baseline_map, grid);

        FieldCache cache(scene, incident, grid.fine_points(), rep.baseline, exec, memory_budget);
        init_per_element(cache);
        rep.initial = cache.profiles();
        rep.initial_zone = quiet_zone_metrics(cache.field(), rep.baseline_map.fine);

        rep.optimization = optimize(cache, params);
        rep.final = cache.profiles();

        rep.final_map = scatter_to_grid(scene, rep.final, incident, grid, exec);
        rep.final_zone = quiet_zone_metrics(rep.final_map.fine, rep.baseline_map.fine);
        rep.final_outside = outside_mean_magnitude(rep.final_map, grid);
        if (rep.baseline_outside > 0.0 && rep.final_outside > 0.0)
            rep.outside_change_db = 20.0 * std::log10(rep.final_outside / rep.baseline_outside);
        return rep;
    }

} // namespace rffence
