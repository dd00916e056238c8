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

#include "rffence/em_core.hpp"
#include "rffence/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <string>

namespace rffence
{
    double wrap_phase(double phase)
    {
        double w = std::fmod(phase, two_pi);
        if (w < 0.0)
            w += two_pi;
        if (w >= two_pi) // fmod of a tiny negative number can round up to 2pi
            w = 0.0;
        return w;
    }

    double circular_difference(double a, double b)
    {
        double d = std::remainder(a - b, two_pi);
        return d;
    }

    // --------------------------------------------------------------------------------------------
    // Orientation

    Orientation Orientation::from_axes(const Vec3 &normal, const Vec3 &axis_u)
    {
        Orientation o;
        o.normal = normal * (1.0 / normal.norm());
        o.axis_u = axis_u * (1.0 / axis_u.norm());
        o.axis_v = o.normal.cross(o.axis_u);
        o.validate();
        return o;
    }

    void Orientation::validate() const
    {
        constexpr double tol = 1e-12;
        auto unit = [](const Vec3 &v)
        { return std::abs(v.norm() - 1.0) < tol; };
        if (!unit(normal) || !unit(axis_u) || !unit(axis_v))
            throw ConfigError("orientation", "axes must be unit vectors");
        if (std::abs(normal.dot(axis_u)) >= tol || std::abs(normal.dot(axis_v)) >= tol ||
            std::abs(axis_u.dot(axis_v)) >= tol)
            throw ConfigError("orientation", "axes must be mutually orthogonal");
    }

    // --------------------------------------------------------------------------------------------
    // RisArray

    RisArray::RisArray(std::size_t rows, std::size_t cols, double spacing_x, double spacing_y,
                       Vec3 origin, Orientation orientation)
        : rows_(rows), cols_(cols), spacing_x_(spacing_x), spacing_y_(spacing_y),
          origin_(origin), orientation_(orientation)
    {
        if (rows == 0 || cols == 0)
            throw ConfigError("array", "rows and cols must be >= 1");
        if (!(spacing_x > 0.0) || !(spacing_y > 0.0) || !std::isfinite(spacing_x) || !std::isfinite(spacing_y))
            throw ConfigError("array", "element spacing must be positive and finite");
        orientation_.validate();
    }

    std::vector<double> RisArray::local_x_coords() const
    {
        std::vector<double> x(cols_);
        for (std::size_t c = 0; c < cols_; ++c)
            x[c] = local_x(c);
        return x;
    }

    std::vector<double> RisArray::local_y_coords() const
    {
        std::vector<double> y(rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            y[r] = local_y(r);
        return y;
    }

    Vec3 RisArray::element_position(std::size_t row, std::size_t col) const
    {
        return origin_ + orientation_.axis_u * local_x(col) + orientation_.axis_v * local_y(row);
    }

    std::vector<Vec3> build_element_positions(const RisArray &array)
    {
        std::vector<Vec3> out;
        out.reserve(array.size());
        for (std::size_t r = 0; r < array.rows(); ++r)
            for (std::size_t c = 0; c < array.cols(); ++c)
                out.push_back(array.element_position(r, c));
        return out;
    }

    // --------------------------------------------------------------------------------------------
    // PhaseProfile

    PhaseProfile::PhaseProfile(std::size_t rows, std::size_t cols, double value)
        : rows_(rows), cols_(cols), values_(rows * cols, wrap_phase(value)) {}

    PhaseProfile::PhaseProfile(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values))
    {
        if (values_.size() != rows * cols)
            throw ConfigError("phase", "value count " + std::to_string(values_.size()) + " does not match " +
                                           std::to_string(rows) + "x" + std::to_string(cols));
        for (auto &v : values_)
            v = wrap_phase(v);
    }

    // --------------------------------------------------------------------------------------------
    // Sources

    void PlaneWaveSource::validate() const
    {
        if (!(amplitude > 0.0) || !std::isfinite(amplitude))
            throw ConfigError("source.amplitude", "must be > 0");
        if (!(wavelength > 0.0) || !std::isfinite(wavelength))
            throw ConfigError("source.wavelength", "must be > 0");
        if (!(incidence.theta >= 0.0 && incidence.theta < pi / 2))
            throw ConfigError("source.theta", "incidence elevation must lie in [0, pi/2)");
        if (!(incidence.phi >= 0.0 && incidence.phi < two_pi))
            throw ConfigError("source.phi", "incidence azimuth must lie in [0, 2pi)");
    }

    void PointSource::validate() const
    {
        if (!(amplitude > 0.0) || !std::isfinite(amplitude))
            throw ConfigError("source.amplitude", "must be > 0");
        if (!(frequency > 0.0) || !std::isfinite(frequency))
            throw ConfigError("source.frequency", "must be > 0");
    }

    // --------------------------------------------------------------------------------------------
    // AngularGrid

    AngularGrid::AngularGrid(std::vector<double> theta, std::vector<double> phi)
        : theta_(std::move(theta)), phi_(std::move(phi))
    {
        if (theta_.empty() || phi_.empty())
            throw ConfigError("grid", "theta and phi samples must be non-empty");
        auto check_uniform = [](const std::vector<double> &v, const char *name) -> double
        {
            if (v.size() < 2)
                return 0.0;
            double step = (v.back() - v.front()) / double(v.size() - 1);
            if (!(step > 0.0))
                throw ConfigError(std::string("grid.") + name, "samples must be ascending");
            for (std::size_t i = 0; i < v.size(); ++i)
                if (std::abs(v[i] - (v.front() + step * double(i))) > 1e-12)
                    throw ConfigError(std::string("grid.") + name, "samples must be uniformly spaced");
            return step;
        };
        double dt = check_uniform(theta_, "theta");
        double dp = check_uniform(phi_, "phi");
        if (theta_.front() < 0.0 || theta_.back() > pi / 2 + 1e-12)
            throw ConfigError("grid.theta", "samples must lie in [0, pi/2]");
        if (phi_.front() < 0.0 || phi_.back() >= two_pi)
            throw ConfigError("grid.phi", "samples must lie in [0, 2pi)");
        resolution_ = dt > 0.0 ? dt : dp;
    }

    AngularGrid AngularGrid::uniform(double resolution)
    {
        if (!(resolution > 0.0) || resolution > pi / 2)
            throw ConfigError("grid.resolution", "must lie in (0, pi/2]");
        auto n_theta = std::size_t(std::llround((pi / 2) / resolution)) + 1;
        auto n_phi = std::size_t(std::llround(two_pi / resolution));
        std::vector<double> theta(n_theta), phi(n_phi);
        for (std::size_t i = 0; i < n_theta; ++i)
            theta[i] = std::min(resolution * double(i), pi / 2);
        for (std::size_t j = 0; j < n_phi; ++j)
            phi[j] = resolution * double(j);
        return AngularGrid(std::move(theta), std::move(phi));
    }

    std::size_t AngularFieldMap::argmax() const
    {
        std::size_t best = 0;
        double best_mag = -1.0;
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            double m = std::abs(values[i]);
            if (m > best_mag)
                best = i, best_mag = m;
        }
        return best;
    }

    double AngularFieldMap::max_magnitude() const
    {
        double m = 0.0;
        for (const auto &v : values)
            m = std::max(m, std::abs(v));
        return m;
    }

    // --------------------------------------------------------------------------------------------
    // DualVolumeGrid

    namespace
    {
        constexpr double zone_tolerance = 1e-12;

        void validate_domain(double side, const std::array<std::size_t, 3> &counts, const Vec3 &center, double radius)
        {
            if (!(side > 0.0) || !std::isfinite(side))
                throw ConfigError("grid.side", "must be > 0");
            for (auto n : counts)
                if (n < 2)
                    throw ConfigError("grid.coarse_counts", "each axis needs at least 2 points");
            if (!(radius > 0.0))
                throw ConfigError("grid.radius", "must be > 0");
            if (radius >= side)
                throw ConfigError("grid.radius", "quiet-zone radius must be smaller than the domain side");
            for (double c : {center.x, center.y, center.z})
                if (!(c >= 0.0 && c <= side))
                    throw ConfigError("grid.center", "quiet-zone center must lie inside [0, L]^3");
        }

        // Visits every lattice point i * L / m (per axis) inside the sphere and inside [0, L]^3
        template <typename Fn>
        void for_each_fine_point(double side, const std::array<double, 3> &m, const Vec3 &center, double radius,
                                 Fn &&fn)
        {
            const double r2 = radius * radius * (1.0 + zone_tolerance);
            auto range = [&](double c, double mm) -> std::pair<long long, long long>
            {
                double h = side / mm;
                long long lo = std::max(0LL, (long long)std::floor((c - radius) / h) - 1);
                long long hi = std::min((long long)std::floor(mm + 1e-9), (long long)std::ceil((c + radius) / h) + 1);
                return {lo, hi};
            };
            auto [x0, x1] = range(center.x, m[0]);
            auto [y0, y1] = range(center.y, m[1]);
            auto [z0, z1] = range(center.z, m[2]);
            for (long long i = x0; i <= x1; ++i)
            {
                double x = double(i) * side / m[0];
                if (x > side)
                    continue;
                for (long long j = y0; j <= y1; ++j)
                {
                    double y = double(j) * side / m[1];
                    if (y > side)
                        continue;
                    for (long long k = z0; k <= z1; ++k)
                    {
                        double z = double(k) * side / m[2];
                        if (z > side)
                            continue;
                        Vec3 p{x, y, z};
                        Vec3 d = p - center;
                        if (d.dot(d) <= r2)
                            fn(p);
                    }
                }
            }
        }

        std::array<double, 3> fine_divisions(const std::array<std::size_t, 3> &counts, double refinement)
        {
            return {double(counts[0] - 1) * refinement, double(counts[1] - 1) * refinement,
                    double(counts[2] - 1) * refinement};
        }

        std::size_t count_fine(double side, const std::array<std::size_t, 3> &counts, const Vec3 &center,
                               double radius, double refinement)
        {
            std::size_t n = 0;
            for_each_fine_point(side, fine_divisions(counts, refinement), center, radius, [&](const Vec3 &)
                                { ++n; });
            return n;
        }
    } // namespace

    bool DualVolumeGrid::in_zone(const Vec3 &p) const
    {
        Vec3 d = p - center_;
        return d.dot(d) <= radius_ * radius_ * (1.0 + zone_tolerance);
    }

    Vec3 DualVolumeGrid::coarse_point(std::size_t index) const
    {
        std::size_t iz = index % counts_[2];
        std::size_t iy = (index / counts_[2]) % counts_[1];
        std::size_t ix = index / (counts_[1] * counts_[2]);
        return {double(ix) * side_ / double(counts_[0] - 1), double(iy) * side_ / double(counts_[1] - 1),
                double(iz) * side_ / double(counts_[2] - 1)};
    }

    std::vector<Vec3> DualVolumeGrid::coarse_points() const
    {
        std::vector<Vec3> pts(coarse_size());
        for (std::size_t i = 0; i < pts.size(); ++i)
            pts[i] = coarse_point(i);
        return pts;
    }

    DualVolumeGrid build_dual_grid(double side, std::array<std::size_t, 3> counts, Vec3 center, double radius,
                                   double refinement)
    {
        validate_domain(side, counts, center, radius);
        if (!(refinement >= 1.0) || !std::isfinite(refinement))
            throw ConfigError("grid.refinement", "must be >= 1");

        DualVolumeGrid g;
        g.side_ = side;
        g.counts_ = counts;
        g.center_ = center;
        g.radius_ = radius;
        g.refinement_ = refinement;
        for (int a = 0; a < 3; ++a)
        {
            g.coarse_spacing_[a] = side / double(counts[a] - 1);
            g.fine_spacing_[a] = g.coarse_spacing_[a] / refinement;
        }

        g.in_zone_.assign(g.coarse_size(), 0);
        for (std::size_t i = 0; i < g.coarse_size(); ++i)
        {
            if (g.in_zone(g.coarse_point(i)))
                g.in_zone_[i] = 1;
            else
                ++g.outside_count_;
        }

        for_each_fine_point(side, fine_divisions(counts, refinement), center, radius, [&](const Vec3 &p)
                            { g.fine_.push_back(p); });
        return g;
    }

    DualVolumeGrid build_dual_grid_for_count(double side, std::array<std::size_t, 3> counts, Vec3 center,
                                             double radius, std::size_t target_points)
    {
        validate_domain(side, counts, center, radius);
        if (target_points == 0)
            throw ConfigError("grid.fine_points", "target must be >= 1");

        std::size_t base = count_fine(side, counts, center, radius, 1.0);
        double guess = base > 0 ? std::cbrt(double(target_points) / double(base)) : 1.0;
        guess = std::max(guess, 1.0);

        double best_ref = 1.0;
        std::size_t best_diff = std::numeric_limits<std::size_t>::max();
        for (int i = -60; i <= 60; ++i)
        {
            double ref = std::max(1.0, guess * (1.0 + 0.0025 * i));
            std::size_t n = count_fine(side, counts, center, radius, ref);
            std::size_t diff = n > target_points ? n - target_points : target_points - n;
            if (diff < best_diff || (diff == best_diff && ref < best_ref))
                best_diff = diff, best_ref = ref;
        }
        return build_dual_grid(side, counts, center, radius, best_ref);
    }

} // namespace rffence
