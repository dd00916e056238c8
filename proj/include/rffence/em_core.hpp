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

#ifndef RFFENCE_EM_CORE_HPP
#define RFFENCE_EM_CORE_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace rffence
{
    using cplx = std::complex<double>;

    inline constexpr double pi = std::numbers::pi;
    inline constexpr double two_pi = 2.0 * std::numbers::pi;
    inline constexpr double speed_of_light = 299792458.0; // [m/s]

    inline constexpr double deg2rad(double deg) { return deg * (pi / 180.0); }
    inline constexpr double rad2deg(double rad) { return rad * (180.0 / pi); }

    // Reduce an angle to [0, 2pi)
    double wrap_phase(double phase);

    // Signed circular difference a - b reduced to [-pi, pi]
    double circular_difference(double a, double b);

    struct Vec3
    {
        double x = 0.0, y = 0.0, z = 0.0;

        Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
        Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
        Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
        Vec3 &operator+=(const Vec3 &o)
        {
            x += o.x, y += o.y, z += o.z;
            return *this;
        }
        bool operator==(const Vec3 &) const = default;

        double dot(const Vec3 &o) const { return x * o.x + y * o.y + z * o.z; }
        Vec3 cross(const Vec3 &o) const { return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x}; }
        double norm() const { return std::sqrt(dot(*this)); }
    };

    inline double distance(const Vec3 &a, const Vec3 &b) { return (a - b).norm(); }

    // Propagation direction in spherical angles. theta is measured from the panel normal (elevation from
    // broadside), phi is the azimuth in the panel plane.
    struct Direction
    {
        double theta = 0.0; // [rad]
        double phi = 0.0;   // [rad]
        bool operator==(const Direction &) const = default;

        static Direction degrees(double theta_deg, double phi_deg) { return {deg2rad(theta_deg), deg2rad(phi_deg)}; }
    };

    // Panel frame: unit normal plus two orthonormal in-plane axes (u along columns, v along rows)
    struct Orientation
    {
        Vec3 normal{0.0, 0.0, 1.0};
        Vec3 axis_u{1.0, 0.0, 0.0};
        Vec3 axis_v{0.0, 1.0, 0.0};

        // Builds a right-handed frame from a normal and the column axis; throws ConfigError if not orthonormal
        static Orientation from_axes(const Vec3 &normal, const Vec3 &axis_u);
        void validate() const;
    };

    // Rectangular RIS panel. Element (r, c) sits at
    //   origin + spacing_x (c - c_center) axis_u + spacing_y (r - r_center) axis_v
    // so the lattice is centered on `origin`. Element index n = r * cols + c.
    class RisArray
    {
    public:
        RisArray(std::size_t rows, std::size_t cols, double spacing_x, double spacing_y,
                 Vec3 origin = {}, Orientation orientation = {});

        std::size_t rows() const { return rows_; }
        std::size_t cols() const { return cols_; }
        std::size_t size() const { return rows_ * cols_; }
        double spacing_x() const { return spacing_x_; }
        double spacing_y() const { return spacing_y_; }
        const Vec3 &origin() const { return origin_; }
        const Orientation &orientation() const { return orientation_; }

        double local_x(std::size_t col) const { return spacing_x_ * (double(col) - 0.5 * double(cols_ - 1)); }
        double local_y(std::size_t row) const { return spacing_y_ * (double(row) - 0.5 * double(rows_ - 1)); }
        std::vector<double> local_x_coords() const; // One entry per column
        std::vector<double> local_y_coords() const; // One entry per row

        Vec3 element_position(std::size_t row, std::size_t col) const;

    private:
        std::size_t rows_, cols_;
        double spacing_x_, spacing_y_;
        Vec3 origin_;
        Orientation orientation_;
    };

    // World-space positions of all elements, row-major
    std::vector<Vec3> build_element_positions(const RisArray &array);

    // Per-element reflection phases, stored row-major and kept in [0, 2pi)
    class PhaseProfile
    {
    public:
        PhaseProfile() = default;
        PhaseProfile(std::size_t rows, std::size_t cols, double value = 0.0);
        PhaseProfile(std::size_t rows, std::size_t cols, std::vector<double> values);

        std::size_t rows() const { return rows_; }
        std::size_t cols() const { return cols_; }
        std::size_t size() const { return values_.size(); }

        double operator[](std::size_t n) const { return values_[n]; }
        double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
        void set(std::size_t n, double phase) { values_[n] = wrap_phase(phase); }
        std::span<const double> values() const { return values_; }

        bool matches(const RisArray &array) const { return rows_ == array.rows() && cols_ == array.cols(); }
        bool operator==(const PhaseProfile &) const = default;

    private:
        std::size_t rows_ = 0, cols_ = 0;
        std::vector<double> values_;
    };

    struct PlaneWaveSource
    {
        double amplitude = 1.0;  // E_0 [V/m]
        double wavelength = 1.0; // [m]
        Direction incidence;     // (theta_i, phi_i)

        double wavenumber() const { return two_pi / wavelength; }
        void validate() const;
    };

    struct PointSource
    {
        double amplitude = 1.0; // E_0 [V/m]
        double frequency = 1.0; // [Hz]
        Vec3 position;

        double wavelength() const { return speed_of_light / frequency; }
        double wavenumber() const { return two_pi * frequency / speed_of_light; }
        void validate() const;
    };

    // Uniform (theta, phi) sampling of the upper half-space
    class AngularGrid
    {
    public:
        AngularGrid(std::vector<double> theta, std::vector<double> phi);

        // theta in [0, pi/2] inclusive, phi in [0, 2pi) exclusive
        static AngularGrid uniform(double resolution = deg2rad(1.0));

        std::span<const double> theta() const { return theta_; }
        std::span<const double> phi() const { return phi_; }
        std::size_t n_theta() const { return theta_.size(); }
        std::size_t n_phi() const { return phi_.size(); }
        std::size_t size() const { return theta_.size() * phi_.size(); }
        double resolution() const { return resolution_; }

        std::size_t index(std::size_t i_theta, std::size_t i_phi) const { return i_theta * phi_.size() + i_phi; }
        Direction direction(std::size_t cell) const { return {theta_[cell / phi_.size()], phi_[cell % phi_.size()]}; }
        bool operator==(const AngularGrid &) const = default;

    private:
        std::vector<double> theta_, phi_;
        double resolution_ = 0.0;
    };

    // Complex field sampled on an AngularGrid, theta-major
    struct AngularFieldMap
    {
        AngularGrid grid;
        std::vector<cplx> values;

        explicit AngularFieldMap(AngularGrid g) : grid(std::move(g)), values(grid.size()) {}

        std::size_t argmax() const; // Lowest cell index among the largest magnitudes
        double max_magnitude() const;
    };

    // Coarse lattice over [0, L]^3 plus a finer lattice restricted to the quiet-zone sphere
    class DualVolumeGrid
    {
    public:
        double side() const { return side_; }
        const std::array<std::size_t, 3> &coarse_counts() const { return counts_; }
        const Vec3 &zone_center() const { return center_; }
        double zone_radius() const { return radius_; }
        const std::array<double, 3> &coarse_spacing() const { return coarse_spacing_; }
        const std::array<double, 3> &fine_spacing() const { return fine_spacing_; }
        double refinement() const { return refinement_; }

        std::size_t coarse_size() const { return counts_[0] * counts_[1] * counts_[2]; }
        std::size_t coarse_index(std::size_t ix, std::size_t iy, std::size_t iz) const
        {
            return (ix * counts_[1] + iy) * counts_[2] + iz;
        }
        Vec3 coarse_point(std::size_t index) const;
        std::vector<Vec3> coarse_points() const;

        // True for coarse points inside the sphere; these are excluded from zone and outside statistics
        bool coarse_in_zone(std::size_t index) const { return in_zone_[index] != 0; }
        std::size_t coarse_outside_count() const { return outside_count_; }

        std::span<const Vec3> fine_points() const { return fine_; }
        std::size_t fine_size() const { return fine_.size(); }

        // Sphere test shared by every consumer: |p - c|^2 <= r^2 (1 + 1e-12)
        bool in_zone(const Vec3 &p) const;

        friend DualVolumeGrid build_dual_grid(double, std::array<std::size_t, 3>, Vec3, double, double);

    private:
        double side_ = 0.0;
        std::array<std::size_t, 3> counts_{};
        Vec3 center_;
        double radius_ = 0.0;
        double refinement_ = 1.0;
        std::array<double, 3> coarse_spacing_{}, fine_spacing_{};
        std::vector<unsigned char> in_zone_;
        std::size_t outside_count_ = 0;
        std::vector<Vec3> fine_;
    };

    // Fine spacing = coarse spacing / refinement, aligned with the coarse lattice and clipped to [0, L]^3.
    // Throws ConfigError for refinement < 1, radius <= 0, radius >= L, center outside the domain or counts < 2.
    DualVolumeGrid build_dual_grid(double side, std::array<std::size_t, 3> counts, Vec3 center, double radius,
                                   double refinement);

    // Picks the refinement whose fine-point count is closest to `target_points` (ties -> smaller refinement).
    // Refinement never drops below 1, so small targets saturate near the coarse count inside the sphere.
    DualVolumeGrid build_dual_grid_for_count(double side, std::array<std::size_t, 3> counts, Vec3 center,
                                             double radius, std::size_t target_points);

} // namespace rffence

#endif
