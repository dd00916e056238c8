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

#include "rffence/nearfield.hpp"
#include "rffence/errors.hpp"

#include <cmath>
#include <string>

namespace rffence
{
    std::size_t Scene::element_count() const
    {
        std::size_t n = 0;
        for (const auto &p : panels)
            n += p.size();
        return n;
    }

    std::vector<Vec3> Scene::element_positions() const
    {
        std::vector<Vec3> out;
        out.reserve(element_count());
        for (const auto &p : panels)
        {
            auto pos = build_element_positions(p);
            out.insert(out.end(), pos.begin(), pos.end());
        }
        return out;
    }

    void Scene::validate() const
    {
        if (!(side > 0.0))
            throw ConfigError("scene.side", "must be > 0");
        if (panels.empty())
            throw ConfigError("scene.panels", "at least one panel is required");
        source.validate();
        const Vec3 &s = source.position;
        for (double c : {s.x, s.y, s.z})
            if (!(c >= 0.0 && c <= side))
                throw ConfigError("scene.source", "source must lie inside [0, L]^3");
    }

    bool Scene::on_panel_surface(const Vec3 &p) const
    {
        const double tol = 1e-12 * side;
        for (const auto &panel : panels)
        {
            const Vec3 d = p - panel.origin();
            const auto &o = panel.orientation();
            if (std::abs(d.dot(o.normal)) > tol)
                continue;
            const double hu = 0.5 * panel.spacing_x() * double(panel.cols());
            const double hv = 0.5 * panel.spacing_y() * double(panel.rows());
            if (std::abs(d.dot(o.axis_u)) <= hu + tol && std::abs(d.dot(o.axis_v)) <= hv + tol)
                return true;
        }
        return false;
    }

    Scene Scene::four_walls(double side, std::size_t rows, std::size_t cols, double margin, PointSource source)
    {
        if (!(side > 0.0))
            throw ConfigError("scene.side", "must be > 0");
        if (!(margin >= 0.0 && margin < 0.5))
            throw ConfigError("scene.margin", "must lie in [0, 0.5)");
        const double span = side * (1.0 - 2.0 * margin);
        const double dx = span / double(cols), dy = span / double(rows);
        const double h = side / 2.0;
        const Vec3 up{0.0, 0.0, 1.0};

        Scene scene;
        scene.side = side;
        scene.source = source;
        auto add = [&](Vec3 center, Vec3 normal, Vec3 axis_u)
        {
            Orientation o;
            o.normal = normal;
            o.axis_u = axis_u;
            o.axis_v = up;
            scene.panels.emplace_back(rows, cols, dx, dy, center, o);
        };
        add({0.0, h, h}, {1.0, 0.0, 0.0}, {0.0, -1.0, 0.0});
        add({side, h, h}, {-1.0, 0.0, 0.0}, {0.0, 1.0, 0.0});
        add({h, 0.0, h}, {0.0, 1.0, 0.0}, {1.0, 0.0, 0.0});
        add({h, side, h}, {0.0, -1.0, 0.0}, {-1.0, 0.0, 0.0});
        scene.validate();
        return scene;
    }

    std::vector<cplx> illuminate(const Scene &scene)
    {
        scene.validate();
        const double k = scene.wavenumber();
        const double e0 = scene.source.amplitude;
        auto pos = scene.element_positions();
        std::vector<cplx> inc(pos.size());
        for (std::size_t n = 0; n < pos.size(); ++n)
        {
            double d = distance(pos[n], scene.source.position);
            if (d == 0.0)
                throw GeometryError("source coincides with element " + std::to_string(n) + " (d = 0)");
            inc[n] = std::polar(e0 / d, k * d);
        }
        return inc;
    }

    std::vector<PhaseProfile> uniform_profiles(const Scene &scene, double phase)
    {
        std::vector<PhaseProfile> out;
        for (const auto &p : scene.panels)
            out.emplace_back(p.rows(), p.cols(), phase);
        return out;
    }

    std::vector<cplx> element_weights(const Scene &scene, std::span<const PhaseProfile> phases,
                                      std::span<const cplx> incident)
    {
        if (phases.size() != scene.panels.size())
            throw ConfigError("phases", "expected one profile per panel");
        if (incident.size() != scene.element_count())
            throw ConfigError("incident", "expected one incident field per element");
        std::vector<cplx> w;
        w.reserve(incident.size());
        std::size_t n = 0;
        for (std::size_t i = 0; i < phases.size(); ++i)
        {
            if (!phases[i].matches(scene.panels[i]))
                throw ConfigError("phases", "profile " + std::to_string(i) + " does not match its panel");
            for (double phi : phases[i].values())
            {
                w.push_back(incident[n] * std::polar(1.0, phi));
                ++n;
            }
        }
        return w;
    }

    std::vector<cplx> scatter_to_points(const Scene &scene, std::span<const PhaseProfile> phases,
                                        std::span<const cplx> incident, std::span<const Vec3> points, Exec exec)
    {
        auto w = element_weights(scene, phases, incident);
        auto pos = scene.element_positions();
        std::vector<cplx> out(points.size());
        if (exec == Exec::serial)
            kernels::near_field_serial(pos, w, scene.wavenumber(), points, out);
        else
            kernels::near_field_parallel(pos, w, scene.wavenumber(), points, out);
        return out;
    }

    VolumeFieldMap scatter_to_grid(const Scene &scene, std::span<const PhaseProfile> phases,
                                   std::span<const cplx> incident, const DualVolumeGrid &grid, Exec exec,
                                   bool include_direct)
    {
        VolumeFieldMap map;
        const auto all_pts = grid.coarse_points();
        map.coarse_on_surface.resize(all_pts.size());
        std::vector<Vec3> coarse_pts;
        std::vector<std::size_t> coarse_idx;
        coarse_pts.reserve(all_pts.size());
        coarse_idx.reserve(all_pts.size());
        for (std::size_t i = 0; i < all_pts.size(); ++i)
        {
            map.coarse_on_surface[i] = scene.on_panel_surface(all_pts[i]);
            if (!map.coarse_on_surface[i])
            {
                coarse_pts.push_back(all_pts[i]);
                coarse_idx.push_back(i);
            }
        }
        auto values = scatter_to_points(scene, phases, incident, coarse_pts, exec);
        map.fine = scatter_to_points(scene, phases, incident, grid.fine_points(), exec);
        if (include_direct)
        {
            const double k = scene.wavenumber(), e0 = scene.source.amplitude;
            auto add_direct = [&](std::span<const Vec3> pts, std::vector<cplx> &vals)
            {
                for (std::size_t p = 0; p < pts.size(); ++p)
                {
                    double d = distance(pts[p], scene.source.position);
                    if (d > 0.0) // The source point itself is singular; leave the scattered value there
                        vals[p] += std::polar(e0 / d, k * d);
                }
            };
            add_direct(coarse_pts, values);
            add_direct(grid.fine_points(), map.fine);
        }
        map.coarse.assign(all_pts.size(), 0.0);
        for (std::size_t i = 0; i < values.size(); ++i)
            map.coarse[coarse_idx[i]] = values[i];
        return map;
    }

    QuietZoneMetrics quiet_zone_metrics(std::span<const cplx> zone_values, std::span<const cplx> reference)
    {
        if (zone_values.empty())
            throw ConfigError("quietzone", "the quiet zone contains no grid points");
        QuietZoneMetrics m;
        for (const auto &v : zone_values)
        {
            m.avg_power += std::norm(v);
            m.avg_magnitude += std::abs(v);
        }
        m.avg_power /= double(zone_values.size());
        m.avg_magnitude /= double(zone_values.size());
        if (!reference.empty())
        {
            if (reference.size() != zone_values.size())
                throw ConfigError("quietzone", "reference map does not share the grid");
            double ref = 0.0;
            for (const auto &v : reference)
                ref += std::abs(v);
            ref /= double(reference.size());
            if (ref > 0.0)
                m.suppression_db = 20.0 * std::log10(m.avg_magnitude / ref);
        }
        return m;
    }

    QuietZoneMetrics quiet_zone_metrics(const VolumeFieldMap &map, const VolumeFieldMap *reference)
    {
        if (reference)
            return quiet_zone_metrics(map.fine, reference->fine);
        return quiet_zone_metrics(map.fine);
    }

    double outside_mean_magnitude(const VolumeFieldMap &map, const DualVolumeGrid &grid)
    {
        if (map.coarse.size() != grid.coarse_size())
            throw ConfigError("quietzone", "coarse map does not match the grid");
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < map.coarse.size(); ++i)
            if (!grid.coarse_in_zone(i) && !(i < map.coarse_on_surface.size() && map.coarse_on_surface[i]))
                sum += std::abs(map.coarse[i]), ++n;
        return n ? sum / double(n) : 0.0;
    }

} // namespace rffence
