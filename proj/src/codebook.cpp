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

#include "rffence/codebook.hpp"
#include "rffence/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>

namespace rffence
{
    void ArrayDescriptor::validate() const
    {
        if (rows < 1 || cols < 1)
            throw ConfigError("array", "rows and cols must be >= 1");
        if (!(spacing_x > 0.0) || !(spacing_y > 0.0) || !std::isfinite(spacing_x) || !std::isfinite(spacing_y))
            throw ConfigError("array.spacing", "must be > 0");
        if (!(frequency > 0.0) || !std::isfinite(frequency))
            throw ConfigError("frequency", "must be > 0");
        cfg.validate();
    }

    bool ArrayDescriptor::operator==(const ArrayDescriptor &o) const
    {
        return rows == o.rows && cols == o.cols && spacing_x == o.spacing_x && spacing_y == o.spacing_y &&
               frequency == o.frequency && cfg.rho == o.cfg.rho && cfg.e0 == o.cfg.e0;
    }

    namespace
    {
        void validate_angles(Direction aoa, Direction aod)
        {
            if (!(aoa.theta >= 0.0 && aoa.theta < pi / 2) || !(aoa.phi >= 0.0 && aoa.phi < two_pi))
                throw ConfigError("aoa", "expected theta in [0, pi/2) and phi in [0, 2pi)");
            if (!(aod.theta >= 0.0 && aod.theta <= pi / 2) || !(aod.phi >= 0.0 && aod.phi < two_pi))
                throw ConfigError("aod", "expected theta in [0, pi/2] and phi in [0, 2pi)");
        }

        CodebookEntry make_entry(const ArrayDescriptor &desc, const RisArray &array, Direction aoa, Direction aod)
        {
            const double k = desc.wavenumber();
            auto psi_inc = direction_phase(array, k, aoa);
            auto psi_out = direction_phase(array, k, aod);
            PhaseProfile phase(array.rows(), array.cols());
            for (std::size_t n = 0; n < array.size(); ++n)
                phase.set(n, -(psi_inc[n] + psi_out[n]));

            CodebookEntry e{aoa, aod, std::move(phase), 0.0};
            e.peak = field_at_poi(array, e.phase, desc.source(aoa), desc.cfg, aod).magnitude;
            return e;
        }

        double key_distance2(const CodebookEntry &e, Direction aoa, Direction aod)
        {
            double a = e.aoa.theta - aoa.theta, b = circular_difference(e.aoa.phi, aoa.phi);
            double c = e.aod.theta - aod.theta, d = circular_difference(e.aod.phi, aod.phi);
            return a * a + b * b + c * c + d * d;
        }

        bool same_key(const CodebookEntry &a, const CodebookEntry &b) { return a.aoa == b.aoa && a.aod == b.aod; }

        std::optional<std::size_t> find_duplicate(std::span<const CodebookEntry> entries)
        {
            std::vector<std::size_t> order(entries.size());
            for (std::size_t i = 0; i < order.size(); ++i)
                order[i] = i;
            auto key = [&](std::size_t i)
            {
                const auto &e = entries[i];
                return std::array<double, 4>{e.aoa.theta, e.aoa.phi, e.aod.theta, e.aod.phi};
            };
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
            for (std::size_t i = 1; i < order.size(); ++i)
                if (same_key(entries[order[i - 1]], entries[order[i]]))
                    return std::max(order[i - 1], order[i]);
            return std::nullopt;
        }
    } // namespace

    CodebookEntry generate_entry(const ArrayDescriptor &desc, Direction aoa, Direction aod)
    {
        desc.validate();
        validate_angles(aoa, aod);
        return make_entry(desc, desc.array(), aoa, aod);
    }

    Codebook::Codebook(ArrayDescriptor desc, std::vector<CodebookEntry> entries)
        : desc_(std::move(desc)), entries_(std::move(entries))
    {
        desc_.validate();
        for (const auto &e : entries_)
            if (e.phase.rows() != desc_.rows || e.phase.cols() != desc_.cols)
                throw ConfigError("codebook", "entry profile does not match the array descriptor");
        if (auto dup = find_duplicate(entries_))
            throw ConfigError("codebook", "duplicate (AoA, AoD) key at entry " + std::to_string(*dup));
    }

    std::size_t Codebook::lookup_index(Direction aoa, Direction aod) const
    {
        if (entries_.empty())
            throw ConfigError("codebook", "lookup in an empty codebook");
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (entries_[i].aoa == aoa && entries_[i].aod == aod)
                return i;
        std::size_t best = 0;
        double best_d = key_distance2(entries_[0], aoa, aod);
        for (std::size_t i = 1; i < entries_.size(); ++i)
        {
            double d = key_distance2(entries_[i], aoa, aod);
            if (d < best_d)
                best = i, best_d = d;
        }
        return best;
    }

    Codebook build_codebook(const ArrayDescriptor &desc, std::span<const AnglePair> pairs)
    {
        desc.validate();
        if (pairs.empty())
            throw ConfigError("codebook", "the angle set is empty");
        for (const auto &p : pairs)
            validate_angles(p.aoa, p.aod);

        const RisArray array = desc.array();
        std::vector<CodebookEntry> entries(pairs.size());
        const long long n = (long long)pairs.size();
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < n; ++i)
            entries[i] = make_entry(desc, array, pairs[i].aoa, pairs[i].aod);
        return Codebook(desc, std::move(entries));
    }

    // --------------------------------------------------------------------------------------------
    // RFCB serialization

    namespace
    {
        constexpr char magic[4] = {'R', 'F', 'C', 'B'};
        constexpr std::size_t header_size = 4 + 4 + 8 + 4 + 4 + 8 + 8 + 8 + 8 + 4;
        constexpr std::uint32_t max_dimension = 1u << 16;

        class Writer
        {
        public:
            std::vector<std::uint8_t> bytes;

            void u32(std::uint32_t v)
            {
                for (int i = 0; i < 4; ++i)
                    bytes.push_back(std::uint8_t(v >> (8 * i)));
            }
            void f64(double v)
            {
                auto u = std::bit_cast<std::uint64_t>(v);
                for (int i = 0; i < 8; ++i)
                    bytes.push_back(std::uint8_t(u >> (8 * i)));
            }
        };

        class Reader
        {
        public:
            explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

            std::size_t remaining() const { return bytes_.size() - pos_; }
            std::uint32_t u32()
            {
                std::uint32_t v = 0;
                for (int i = 0; i < 4; ++i)
                    v |= std::uint32_t(bytes_[pos_++]) << (8 * i);
                return v;
            }
            double f64()
            {
                std::uint64_t u = 0;
                for (int i = 0; i < 8; ++i)
                    u |= std::uint64_t(bytes_[pos_++]) << (8 * i);
                return std::bit_cast<double>(u);
            }

        private:
            std::span<const std::uint8_t> bytes_;
            std::size_t pos_ = 0;
        };

        std::uint32_t to_u32(std::size_t v, const char *what)
        {
            if (v > 0xFFFFFFFFu)
                throw DimensionError(std::string(what) + " does not fit the RFCB format");
            return std::uint32_t(v);
        }
    } // namespace

    std::vector<std::uint8_t> serialize_codebook(const Codebook &cb)
    {
        const auto &d = cb.descriptor();
        Writer w;
        w.bytes.reserve(header_size + cb.size() * (32 + 8 * d.rows * d.cols));
        w.bytes.insert(w.bytes.end(), std::begin(magic), std::end(magic));
        w.u32(rfcb_version);
        w.f64(d.frequency);
        w.u32(to_u32(d.rows, "rows"));
        w.u32(to_u32(d.cols, "cols"));
        w.f64(d.spacing_x);
        w.f64(d.spacing_y);
        w.f64(d.cfg.rho);
        w.f64(d.cfg.e0);
        w.u32(to_u32(cb.size(), "entry count"));
        for (const auto &e : cb.entries())
        {
            w.f64(e.aoa.theta);
            w.f64(e.aoa.phi);
            w.f64(e.aod.theta);
            w.f64(e.aod.phi);
            for (double v : e.phase.values())
                w.f64(v);
        }
        return std::move(w.bytes);
    }

    Codebook deserialize_codebook(std::span<const std::uint8_t> bytes)
    {
        if (bytes.size() < 4 || std::memcmp(bytes.data(), magic, 4) != 0)
            throw FormatVersionError("not an RFCB file (bad magic bytes)");
        if (bytes.size() < 8)
            throw TruncatedFileError(-1, "RFCB header truncated");
        Reader r(bytes.subspan(4));
        const std::uint32_t version = r.u32();
        if (version != rfcb_version)
            throw FormatVersionError("unsupported RFCB version " + std::to_string(version));
        if (bytes.size() < header_size)
            throw TruncatedFileError(-1, "RFCB header truncated");

        ArrayDescriptor d;
        d.frequency = r.f64();
        const std::uint32_t rows = r.u32(), cols = r.u32();
        d.spacing_x = r.f64();
        d.spacing_y = r.f64();
        d.cfg.rho = r.f64();
        d.cfg.e0 = r.f64();
        const std::uint32_t count = r.u32();

        if (rows == 0 || cols == 0 || rows > max_dimension || cols > max_dimension)
            throw DimensionError("RFCB array dimensions " + std::to_string(rows) + "x" + std::to_string(cols) +
                                 " are invalid");
        d.rows = rows;
        d.cols = cols;
        try
        {
            d.validate();
        }
        catch (const ConfigError &e)
        {
            throw FormatError(std::string("RFCB header: ") + e.what());
        }

        const std::size_t n_el = std::size_t(rows) * cols;
        const std::size_t entry_size = 32 + 8 * n_el;
        const RisArray array = d.array();
        std::vector<CodebookEntry> entries;
        for (std::uint32_t i = 0; i < count; ++i)
        {
            if (r.remaining() < entry_size)
                throw TruncatedFileError(i, "RFCB file truncated in entry " + std::to_string(i));
            CodebookEntry e;
            e.aoa.theta = r.f64();
            e.aoa.phi = r.f64();
            e.aod.theta = r.f64();
            e.aod.phi = r.f64();
            try
            {
                validate_angles(e.aoa, e.aod);
            }
            catch (const ConfigError &err)
            {
                throw FormatError("RFCB entry " + std::to_string(i) + ": " + err.what());
            }
            std::vector<double> values(n_el);
            for (auto &v : values)
            {
                v = r.f64();
                if (!(v >= 0.0 && v < two_pi))
                    throw FormatError("RFCB entry " + std::to_string(i) + ": phase outside [0, 2pi)");
            }
            e.phase = PhaseProfile(rows, cols, std::move(values));
            e.peak = field_at_poi(array, e.phase, d.source(e.aoa), d.cfg, e.aod).magnitude;
            entries.push_back(std::move(e));
        }
        if (r.remaining() != 0)
            throw DimensionError("RFCB file has " + std::to_string(r.remaining()) +
                                 " trailing bytes after " + std::to_string(count) + " entries");
        try
        {
            return Codebook(std::move(d), std::move(entries));
        }
        catch (const ConfigError &e)
        {
            throw FormatError(std::string("RFCB: ") + e.what());
        }
    }

    void save_codebook(const Codebook &cb, const std::filesystem::path &path)
    {
        auto bytes = serialize_codebook(cb);
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f)
            throw IoError("cannot open " + path.string() + " for writing");
        f.write(reinterpret_cast<const char *>(bytes.data()), std::streamsize(bytes.size()));
        if (!f)
            throw IoError("failed writing " + path.string());
    }

    Codebook load_codebook(const std::filesystem::path &path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw IoError("cannot open " + path.string());
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        if (f.bad())
            throw IoError("failed reading " + path.string());
        return deserialize_codebook(bytes);
    }

} // namespace rffence
