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

#include "rffence/scenario.hpp"
#include "rffence/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace rffence
{
    namespace
    {
        using json = nlohmann::json;
        using LineMap = std::map<std::string, std::size_t>;

        // Forward iterator over the config text that keeps a running line count, so SAX callbacks can see
        // where they are in the file
        class LineCountingIterator
        {
        public:
            using iterator_category = std::forward_iterator_tag;
            using value_type = char;
            using difference_type = std::ptrdiff_t;
            using pointer = const char *;
            using reference = const char &;

            LineCountingIterator() = default;
            LineCountingIterator(const char *p, std::size_t *line) : p_(p), line_(line) {}

            reference operator*() const { return *p_; }
            LineCountingIterator &operator++()
            {
                if (*p_ == '\n')
                    ++*line_;
                ++p_;
                return *this;
            }
            LineCountingIterator operator++(int)
            {
                auto tmp = *this;
                ++*this;
                return tmp;
            }
            bool operator==(const LineCountingIterator &o) const { return p_ == o.p_; }
            bool operator!=(const LineCountingIterator &o) const { return p_ != o.p_; }

        private:
            const char *p_ = nullptr;
            std::size_t *line_ = nullptr;
        };

        // Records the line of every object member and array element under its dotted path
        class LineRecorder : public nlohmann::json_sax<json>
        {
        public:
            explicit LineRecorder(const std::size_t *line) : line_(line) {}
            LineMap lines;

            bool null() override { return value(); }
            bool boolean(bool) override { return value(); }
            bool number_integer(number_integer_t) override { return value(); }
            bool number_unsigned(number_unsigned_t) override { return value(); }
            bool number_float(number_float_t, const string_t &) override { return value(); }
            bool string(string_t &) override { return value(); }
            bool binary(binary_t &) override { return value(); }
            bool start_object(std::size_t) override { return open(false); }
            bool end_object() override { return close(); }
            bool start_array(std::size_t) override { return open(true); }
            bool end_array() override { return close(); }
            bool key(string_t &k) override
            {
                auto &f = stack_.back();
                f.current = f.path.empty() ? k : f.path + "." + k;
                lines.emplace(f.current, *line_);
                return true;
            }
            bool parse_error(std::size_t, const std::string &, const nlohmann::detail::exception &) override
            {
                return false;
            }

        private:
            struct Frame
            {
                bool array;
                std::string path, current;
                std::size_t index = 0;
            };

            std::string element_path()
            {
                if (stack_.empty())
                    return {};
                auto &f = stack_.back();
                if (!f.array)
                    return f.current;
                std::string p = f.path + "[" + std::to_string(f.index++) + "]";
                lines.emplace(p, *line_);
                return p;
            }
            bool value()
            {
                element_path();
                return true;
            }
            bool open(bool array)
            {
                std::string p = element_path();
                stack_.push_back({array, p, {}, 0});
                return true;
            }
            bool close()
            {
                stack_.pop_back();
                return true;
            }

            const std::size_t *line_;
            std::vector<Frame> stack_;
        };

        std::size_t line_of_offset(const std::string &text, std::size_t offset)
        {
            offset = std::min(offset, text.size());
            return 1 + std::size_t(std::count(text.begin(), text.begin() + std::ptrdiff_t(offset), '\n'));
        }

        // Typed, path-aware view of one JSON value
        class Node
        {
        public:
            Node(const json &j, std::string path, const LineMap &lines) : j_(&j), path_(std::move(path)), lines_(&lines) {}

            const std::string &path() const { return path_; }
            const json &raw() const { return *j_; }

            std::size_t line_of(std::string p) const
            {
                while (!p.empty())
                {
                    auto it = lines_->find(p);
                    if (it != lines_->end())
                        return it->second;
                    auto cut = p.find_last_of(".[");
                    p = cut == std::string::npos ? std::string() : p.substr(0, cut);
                }
                return 0;
            }

            [[noreturn]] void fail(const std::string &what) const { throw ConfigError(path_, what, line_of(path_)); }

            std::string child_path(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

            bool has(const std::string &key) const { return j_->is_object() && j_->contains(key); }

            Node at(const std::string &key) const
            {
                if (!j_->is_object())
                    fail("expected an object");
                auto it = j_->find(key);
                if (it == j_->end())
                    throw ConfigError(child_path(key), "required field is missing", line_of(path_));
                return Node(*it, child_path(key), *lines_);
            }

            std::optional<Node> find(const std::string &key) const
            {
                if (!has(key))
                    return std::nullopt;
                return at(key);
            }

            Node element(std::size_t i) const
            {
                return Node((*j_)[i], path_ + "[" + std::to_string(i) + "]", *lines_);
            }

            std::size_t size() const { return j_->size(); }

            void allow_keys(std::initializer_list<const char *> keys) const
            {
                if (!j_->is_object())
                    fail("expected an object");
                std::set<std::string> ok(keys.begin(), keys.end());
                for (auto it = j_->begin(); it != j_->end(); ++it)
                    if (!ok.count(it.key()))
                        throw ConfigError(child_path(it.key()), "unknown field", line_of(child_path(it.key())));
            }

            double number() const
            {
                if (!j_->is_number())
                    fail("expected a number");
                double v = j_->get<double>();
                if (!std::isfinite(v))
                    fail("must be finite");
                return v;
            }

            std::uint64_t unsigned_integer() const
            {
                if (!j_->is_number_unsigned() && !(j_->is_number_integer() && j_->get<long long>() >= 0))
                    fail("expected a non-negative integer");
                return j_->get<std::uint64_t>();
            }

            bool boolean() const
            {
                if (!j_->is_boolean())
                    fail("expected true or false");
                return j_->get<bool>();
            }

            std::string string() const
            {
                if (!j_->is_string())
                    fail("expected a string");
                return j_->get<std::string>();
            }

            std::vector<double> numbers(std::size_t expected = 0) const
            {
                if (!j_->is_array())
                    fail("expected an array of numbers");
                if (expected && j_->size() != expected)
                    fail("expected " + std::to_string(expected) + " numbers");
                std::vector<double> out;
                for (std::size_t i = 0; i < j_->size(); ++i)
                    out.push_back(element(i).number());
                return out;
            }

            Vec3 vec3() const
            {
                auto v = numbers(3);
                return {v[0], v[1], v[2]};
            }

            // [theta_deg, phi_deg]; phi is reduced to [0, 360)
            Direction direction() const
            {
                auto v = numbers(2);
                if (!(v[0] >= 0.0 && v[0] <= 90.0))
                    fail("elevation must lie in [0, 90] degrees");
                return {deg2rad(v[0]), wrap_phase(deg2rad(v[1]))};
            }

            std::vector<Direction> directions() const
            {
                if (!j_->is_array())
                    fail("expected an array of [theta_deg, phi_deg] pairs");
                std::vector<Direction> out;
                for (std::size_t i = 0; i < j_->size(); ++i)
                    out.push_back(element(i).direction());
                return out;
            }

            // Numeric field helpers with range checks
            double positive(const std::string &key) const
            {
                auto n = at(key);
                double v = n.number();
                if (!(v > 0.0))
                    n.fail("must be > 0");
                return v;
            }
            double positive_or(const std::string &key, double def) const { return has(key) ? positive(key) : def; }
            double number_or(const std::string &key, double def) const { return has(key) ? at(key).number() : def; }
            std::size_t count_or(const std::string &key, std::size_t def, std::size_t min = 0) const
            {
                if (!has(key))
                    return def;
                auto n = at(key);
                auto v = n.unsigned_integer();
                if (v < min)
                    n.fail("must be >= " + std::to_string(min));
                return std::size_t(v);
            }

        private:
            const json *j_;
            std::string path_;
            const LineMap *lines_;
        };

        // Re-raises library validation errors with the line of the field they name
        template <class F>
        void validated(const Node &root, F &&f)
        {
            try
            {
                f();
            }
            catch (const ConfigError &e)
            {
                if (e.line() > 0 || e.path().empty())
                    throw;
                std::string msg = e.what();
                const std::string prefix = e.path() + ": ";
                if (msg.rfind(prefix, 0) == 0)
                    msg = msg.substr(prefix.size());
                throw ConfigError(e.path(), msg, root.line_of(e.path()));
            }
        }

        std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p)
        {
            std::filesystem::path path(p);
            return path.is_absolute() || base.empty() ? path : base / path;
        }

        void parse_output(const Node &root, OutputOptions &out)
        {
            auto n = root.find("output");
            if (!n)
                return;
            n->allow_keys({"heatmaps", "scale", "floor_db", "slices_z", "total_field"});
            if (n->has("heatmaps"))
                out.heatmaps = n->at("heatmaps").boolean();
            if (n->has("scale"))
            {
                auto s = n->at("scale");
                try
                {
                    out.scale = parse_heatmap_scale(s.string());
                }
                catch (const ConfigError &)
                {
                    s.fail("expected \"linear\" or \"db\"");
                }
            }
            if (n->has("floor_db"))
            {
                auto f = n->at("floor_db");
                out.floor_db = f.number();
                if (!(out.floor_db < 0.0))
                    f.fail("must be < 0");
            }
            if (n->has("slices_z"))
                out.slices_z = n->at("slices_z").numbers();
            if (n->has("total_field"))
                out.total_field = n->at("total_field").boolean();
        }

        void parse_far_field(const Node &root, const std::filesystem::path &base, FarFieldScenario &ff)
        {
            root.allow_keys({"schema_version", "kind", "name", "seed", "frequency", "array", "farfield", "aoa_deg",
                             "regions", "shield", "codebook", "batch", "sweep", "render", "output"});
            auto &d = ff.desc;
            d.frequency = root.positive("frequency");

            auto arr = root.at("array");
            arr.allow_keys({"rows", "cols", "spacing_wavelengths", "spacing_x", "spacing_y"});
            d.rows = arr.count_or("rows", 0, 1);
            d.cols = arr.count_or("cols", 0, 1);
            if (!arr.has("rows") || !arr.has("cols"))
                arr.fail("rows and cols are required");
            if (arr.has("spacing_wavelengths"))
            {
                if (arr.has("spacing_x") || arr.has("spacing_y"))
                    arr.fail("give either spacing_wavelengths or spacing_x/spacing_y");
                d.spacing_x = d.spacing_y = arr.positive("spacing_wavelengths") * d.wavelength();
            }
            else
            {
                d.spacing_x = arr.positive("spacing_x");
                d.spacing_y = arr.positive("spacing_y");
            }

            if (auto f = root.find("farfield"))
            {
                f->allow_keys({"rho", "e0", "resolution_deg"});
                d.cfg.rho = f->number_or("rho", d.cfg.rho);
                d.cfg.e0 = f->number_or("e0", d.cfg.e0);
                if (f->has("resolution_deg"))
                {
                    double r = f->positive("resolution_deg");
                    if (!(r <= 90.0))
                        f->at("resolution_deg").fail("must be <= 90");
                    ff.resolution = deg2rad(r);
                }
            }
            validated(root, [&] { d.validate(); });

            if (root.has("aoa_deg"))
            {
                auto a = root.at("aoa_deg");
                ff.aoa = a.direction();
                if (!(ff.aoa.theta < pi / 2))
                    a.fail("angle of arrival must have elevation < 90 degrees");
            }

            if (auto r = root.find("regions"))
            {
                r->allow_keys({"fsda_deg", "hssa_deg"});
                if (r->has("fsda_deg"))
                    ff.fsda = r->at("fsda_deg").directions();
                if (r->has("hssa_deg"))
                    ff.hssa = r->at("hssa_deg").directions();
            }

            if (auto s = root.find("shield"))
            {
                s->allow_keys({"tau_fsda", "tau_hssa", "eta", "w_opt", "mu", "tolerance", "max_iterations"});
                auto &p = ff.shield;
                p.tau_fsda = s->number_or("tau_fsda", p.tau_fsda);
                p.tau_hssa = s->number_or("tau_hssa", p.tau_hssa);
                p.eta = s->number_or("eta", p.eta);
                p.w_opt = s->number_or("w_opt", p.w_opt);
                p.mu = s->number_or("mu", p.mu);
                p.tolerance = s->number_or("tolerance", p.tolerance);
                p.max_iterations = s->count_or("max_iterations", p.max_iterations);
            }
            validated(root, [&] { ff.shield.validate(); });

            if (auto c = root.find("codebook"))
            {
                c->allow_keys({"entries", "aoa_deg", "file"});
                ff.codebook.entries = c->count_or("entries", ff.codebook.entries, 1);
                if (c->has("aoa_deg"))
                {
                    auto a = c->at("aoa_deg");
                    ff.codebook.aoas = a.directions();
                    if (ff.codebook.aoas.empty())
                        a.fail("at least one angle of arrival is required");
                    for (std::size_t i = 0; i < ff.codebook.aoas.size(); ++i)
                        if (!(ff.codebook.aoas[i].theta < pi / 2))
                            a.element(i).fail("angle of arrival must have elevation < 90 degrees");
                }
                if (c->has("file"))
                    ff.codebook.file = resolve(base, c->at("file").string());
            }

            if (auto b = root.find("batch"))
            {
                b->allow_keys({"cases", "fsda", "hssa"});
                ff.batch.cases = b->count_or("cases", ff.batch.cases, 1);
                ff.batch.fsda = b->count_or("fsda", ff.batch.fsda, 1);
                ff.batch.hssa = b->count_or("hssa", ff.batch.hssa, 1);
            }

            if (auto s = root.find("sweep"))
            {
                s->allow_keys({"axis", "layout", "base_deg", "gap_deg", "separations_deg"});
                if (s->has("axis"))
                {
                    auto a = s->at("axis");
                    auto v = a.string();
                    if (v == "azimuth")
                        ff.sweep.axis = SweepAxis::azimuth;
                    else if (v == "elevation")
                        ff.sweep.axis = SweepAxis::elevation;
                    else
                        a.fail("expected \"azimuth\" or \"elevation\"");
                }
                if (s->has("layout"))
                {
                    auto l = s->at("layout");
                    auto v = l.string();
                    if (v == "between")
                        ff.sweep.layout = SweepLayout::between;
                    else if (v == "outside")
                        ff.sweep.layout = SweepLayout::outside;
                    else
                        l.fail("expected \"between\" or \"outside\"");
                }
                if (s->has("base_deg"))
                    ff.sweep.base = s->at("base_deg").direction();
                if (s->has("gap_deg"))
                    ff.sweep.gap = deg2rad(s->positive("gap_deg"));
                if (s->has("separations_deg"))
                {
                    auto sep = s->at("separations_deg");
                    for (double v : sep.numbers())
                    {
                        if (!(v >= 0.0))
                            sep.fail("separations must be >= 0");
                        ff.sweep.separations.push_back(deg2rad(v));
                    }
                }
            }

            if (auto r = root.find("render"))
            {
                r->allow_keys({"phase_file"});
                if (r->has("phase_file"))
                    ff.render_phase_file = resolve(base, r->at("phase_file").string());
            }
        }

        void parse_quiet_zone(const Node &root, QuietZoneScenario &qz)
        {
            root.allow_keys({"schema_version", "kind", "name", "seed", "frequency", "scene", "grid", "quietzone",
                             "output"});
            qz.frequency = root.positive("frequency");

            auto s = root.at("scene");
            s.allow_keys({"side", "rows", "cols", "margin", "source", "amplitude"});
            qz.side = s.positive("side");
            qz.rows = s.count_or("rows", qz.rows, 1);
            qz.cols = s.count_or("cols", qz.cols, 1);
            if (s.has("margin"))
            {
                auto m = s.at("margin");
                qz.margin = m.number();
                if (!(qz.margin >= 0.0 && qz.margin < 0.5))
                    m.fail("must lie in [0, 0.5)");
            }
            auto src = s.at("source");
            qz.source = src.vec3();
            for (double c : {qz.source.x, qz.source.y, qz.source.z})
                if (!(c >= 0.0 && c <= qz.side))
                    src.fail("source must lie inside [0, side]^3");
            qz.amplitude = s.positive_or("amplitude", qz.amplitude);

            auto g = root.at("grid");
            g.allow_keys({"coarse_counts", "zone_center", "zone_radius", "refinement", "fine_points"});
            auto counts = g.at("coarse_counts");
            auto cv = counts.numbers(3);
            for (std::size_t i = 0; i < 3; ++i)
            {
                if (!(cv[i] >= 2.0) || cv[i] != std::floor(cv[i]) || cv[i] > 4096.0)
                    counts.element(i).fail("must be an integer in [2, 4096]");
                qz.coarse_counts[i] = std::size_t(cv[i]);
            }
            qz.zone_center = g.at("zone_center").vec3();
            qz.zone_radius = g.positive("zone_radius");
            if (g.has("refinement") && g.has("fine_points"))
                g.fail("give either refinement or fine_points");
            if (g.has("refinement"))
            {
                auto r = g.at("refinement");
                qz.refinement = r.number();
                if (!(qz.refinement >= 1.0))
                    r.fail("must be >= 1");
            }
            if (g.has("fine_points"))
                qz.fine_points = g.count_or("fine_points", 0, 1);

            if (auto o = root.find("quietzone"))
            {
                o->allow_keys({"initial_step", "max_iterations", "tolerance", "threshold", "min_step", "self_check",
                               "memory_budget_mb"});
                auto &p = qz.optimizer;
                p.initial_step = o->number_or("initial_step", p.initial_step);
                p.max_iterations = o->count_or("max_iterations", p.max_iterations);
                p.tolerance = o->number_or("tolerance", p.tolerance);
                p.threshold = o->number_or("threshold", p.threshold);
                p.min_step = o->number_or("min_step", p.min_step);
                if (o->has("self_check"))
                    p.self_check = o->at("self_check").boolean();
                if (o->has("memory_budget_mb"))
                    qz.memory_budget = o->count_or("memory_budget_mb", 0) << 20;
            }
            validated(root, [&] { qz.optimizer.validate(); });
            validated(root, [&] {
                (void)build_dual_grid(qz.side, {2, 2, 2}, qz.zone_center, qz.zone_radius, 1.0);
            });
        }
    } // namespace

    Scene QuietZoneScenario::scene() const
    {
        return Scene::four_walls(side, rows, cols, margin, PointSource{amplitude, frequency, source});
    }

    DualVolumeGrid QuietZoneScenario::grid() const
    {
        if (fine_points)
            return build_dual_grid_for_count(side, coarse_counts, zone_center, zone_radius, *fine_points);
        return build_dual_grid(side, coarse_counts, zone_center, zone_radius, refinement);
    }

    Scenario parse_scenario(const std::string &text, const std::filesystem::path &base_dir)
    {
        std::size_t line = 1;
        LineRecorder recorder(&line);
        LineCountingIterator first(text.data(), &line), last(text.data() + text.size(), &line);
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            std::string msg = e.what();
            auto pos = msg.find(": ", msg.find("parse error"));
            throw ConfigError("", "invalid JSON" + (pos == std::string::npos ? std::string() : msg.substr(pos)),
                              line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
        }
        json::sax_parse(first, last, &recorder);
        const LineMap &lines = recorder.lines;

        Node root(j, "", lines);
        if (!j.is_object())
            root.fail("the scenario must be a JSON object");

        Scenario sc;
        auto ver = root.at("schema_version");
        if (ver.unsigned_integer() != std::uint64_t(scenario_schema_version))
            ver.fail("unsupported schema version (expected " + std::to_string(scenario_schema_version) + ")");
        auto kind = root.at("kind");
        const std::string k = kind.string();
        if (k == "far_field")
            sc.kind = ScenarioKind::far_field;
        else if (k == "quiet_zone")
            sc.kind = ScenarioKind::quiet_zone;
        else
            kind.fail("expected \"far_field\" or \"quiet_zone\"");
        if (root.has("name"))
            sc.name = root.at("name").string();
        if (root.has("seed"))
            sc.seed = root.at("seed").unsigned_integer();
        parse_output(root, sc.output);

        if (sc.kind == ScenarioKind::far_field)
            parse_far_field(root, base_dir, sc.far_field);
        else
            parse_quiet_zone(root, sc.quiet_zone);
        return sc;
    }

    Scenario load_scenario(const std::filesystem::path &path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw IoError("cannot open scenario file " + path.string());
        std::ostringstream ss;
        ss << f.rdbuf();
        return parse_scenario(ss.str(), path.parent_path());
    }

} // namespace rffence
