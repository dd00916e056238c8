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

#ifndef RFFENCE_ERRORS_HPP
#define RFFENCE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rffence
{
    // Base class for every error raised by the library
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Invalid parameters or malformed scenario configuration (CLI exit code 2)
    class ConfigError : public Error
    {
    public:
        ConfigError(std::string path, const std::string &what, std::size_t line = 0)
            : Error(format(path, what, line)), path_(std::move(path)), line_(line) {}
        explicit ConfigError(const std::string &what) : Error(what) {}

        const std::string &path() const { return path_; } // Dotted field path, may be empty
        std::size_t line() const { return line_; }        // 1-based line in the config file, 0 if unknown

    private:
        static std::string format(const std::string &path, const std::string &what, std::size_t line)
        {
            std::string s = path.empty() ? what : path + ": " + what;
            if (line > 0)
                s += " (line " + std::to_string(line) + ")";
            return s;
        }
        std::string path_;
        std::size_t line_ = 0;
    };

    // Coincident source/element/observation positions (R = 0 or d = 0)
    class GeometryError : public Error
    {
    public:
        using Error::Error;
    };

    // Divergence, non-finite values or failed internal consistency checks (CLI exit code 3)
    class NumericalError : public Error
    {
    public:
        NumericalError(std::string stage, const std::string &what)
            : Error(stage + ": " + what), stage_(std::move(stage)) {}
        const std::string &stage() const { return stage_; }

    private:
        std::string stage_;
    };

    // Filesystem failures (CLI exit code 4)
    class IoError : public Error
    {
    public:
        using Error::Error;
    };

    // Malformed binary files. Each subclass is a distinct failure mode.
    class FormatError : public IoError
    {
    public:
        using IoError::IoError;
    };

    class FormatVersionError : public FormatError // Bad magic bytes or unsupported version
    {
    public:
        using FormatError::FormatError;
    };

    class TruncatedFileError : public FormatError
    {
    public:
        // entry < 0 means the header itself is truncated
        TruncatedFileError(long long entry, const std::string &what)
            : FormatError(what), entry_(entry) {}
        long long entry() const { return entry_; }

    private:
        long long entry_;
    };

    class DimensionError : public FormatError // Header or payload sizes that do not agree
    {
    public:
        using FormatError::FormatError;
    };

} // namespace rffence

#endif
