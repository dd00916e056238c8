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

#ifndef RFFENCE_CODEBOOK_HPP
#define RFFENCE_CODEBOOK_HPP

#include "rffence/farfield.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rffence
{
    // Geometry and model parameters shared by every entry of a codebook
    struct ArrayDescriptor
    {
        std::size_t rows = 1, cols = 1;
        double spacing_x = 0.0, spacing_y = 0.0; // [m]
        double frequency = 0.0;                  // [Hz]
        FarFieldConfig cfg;

        double wavelength() const { return speed_of_light / frequency; }
        double wavenumber() const { return two_pi * frequency / speed_of_light; }
        RisArray array() const { return RisArray(rows, cols, spacing_x, spacing_y); }
        PlaneWaveSource source(Direction aoa) const { return {1.0, wavelength(), aoa}; }
        void validate() const;
        bool operator==(const ArrayDescriptor &o) const;
    };

    struct AnglePair
    {
        Direction aoa, aod;
        bool operator==(const AnglePair &) const = default;
    };

    struct CodebookEntry
    {
        Direction aoa, aod;
        PhaseProfile phase;
        double peak = 0.0; // |E(aod)| under `phase` [V/m]
        bool operator==(const CodebookEntry &) const = default;
    };

    // Phase-conjugate steering profile Phi_n = -(psi_inc_n(aoa) + psi_out_n(aod)) mod 2pi
    CodebookEntry generate_entry(const ArrayDescriptor &desc, Direction aoa, Direction aod);

    class Codebook
    {
    public:
        Codebook(ArrayDescriptor desc, std::vector<CodebookEntry> entries);

        const ArrayDescriptor &descriptor() const { return desc_; }
        std::span<const CodebookEntry> entries() const { return entries_; }
        std::size_t size() const { return entries_.size(); }
        const CodebookEntry &operator[](std::size_t i) const { return entries_[i]; }

        // Exact key match, else the nearest entry under
        //   d^2 = dtheta_i^2 + dphi_i^2 + dtheta_d^2 + dphi_d^2 (azimuth differences taken circularly).
        // Ties go to the lowest entry index.
        std::size_t lookup_index(Direction aoa, Direction aod) const;
        const CodebookEntry &lookup(Direction aoa, Direction aod) const { return entries_[lookup_index(aoa, aod)]; }

        bool operator==(const Codebook &) const = default;

    private:
        ArrayDescriptor desc_;
        std::vector<CodebookEntry> entries_;
    };

    // One entry per pair in input order, generated in parallel. Throws ConfigError on duplicate keys.
    Codebook build_codebook(const ArrayDescriptor &desc, std::span<const AnglePair> pairs);

    // RFCB binary format, little-endian:
    //   "RFCB" | u32 version | f64 frequency | u32 N_r | u32 N_c | f64 dx | f64 dy | f64 rho | f64 E_0 | u32 count
    //   count x ( f64 theta_i | f64 phi_i | f64 theta_d | f64 phi_d | N_r * N_c x f64 phase )
    inline constexpr std::uint32_t rfcb_version = 1;

    std::vector<std::uint8_t> serialize_codebook(const Codebook &cb);

    // Throws FormatVersionError (magic or version), TruncatedFileError (naming the entry), DimensionError
    // (bad array dimensions or trailing bytes) or FormatError (out-of-range values, duplicate keys).
    // Peaks are recomputed from the stored phases.
    Codebook deserialize_codebook(std::span<const std::uint8_t> bytes);

    void save_codebook(const Codebook &cb, const std::filesystem::path &path); // Throws IoError
    Codebook load_codebook(const std::filesystem::path &path);

} // namespace rffence

#endif
