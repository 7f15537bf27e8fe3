#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rhjb/grid.hpp"
#include "rhjb/problem.hpp"

namespace rhjb {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Minimal sectioned key = value document. Keys keep file order; lookups
// report the section and line of offending entries.
class Config {
  public:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool used = false;
    };

    static Config parse(const std::string& text, const std::string& origin = "<config>") {
        Config c;
        c.origin_ = origin;
        std::istringstream in(text);
        std::string raw;
        std::string section = "";
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            std::string line = strip_comment(raw);
            const std::string t = trim(line);
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(line_no) +
                                      ": malformed section header '" + t + "'");
                section = trim(t.substr(1, t.size() - 2));
                c.sections_[section];
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + t + "'");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
            c.sections_[section][key] = Entry{value, line_no, false};
        }
        return c;
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        if (s == sections_.end()) return false;
        return s->second.count(key) > 0;
    }

    bool has_section(const std::string& section) const {
        return sections_.count(section) > 0;
    }

    std::string get(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        if (s == sections_.end() || !s->second.count(key))
            throw ConfigError(origin_ + ": missing key '" + key + "' in section [" +
                              section + "]");
        const Entry& e = s->second.at(key);
        e.used = true;
        return e.value;
    }

    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const {
        return has(section, key) ? get(section, key) : fallback;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return parse_double(section, key, get(section, key));
    }
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }
    long get_int(const std::string& section, const std::string& key) const {
        const std::string v = get(section, key);
        try {
            std::size_t pos = 0;
            const long r = std::stol(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw ConfigError(where(section, key) + ": expected an integer, got '" + v + "'");
        }
    }
    long get_int_or(const std::string& section, const std::string& key, long fallback) const {
        return has(section, key) ? get_int(section, key) : fallback;
    }

    std::vector<double> get_doubles(const std::string& section, const std::string& key) const {
        std::vector<double> out;
        std::istringstream in(get(section, key));
        std::string tok;
        while (in >> tok) out.push_back(parse_double(section, key, tok));
        if (out.empty())
            throw ConfigError(where(section, key) + ": expected at least one number");
        return out;
    }

    std::vector<std::string> get_words(const std::string& section, const std::string& key) const {
        std::vector<std::string> out;
        std::istringstream in(get(section, key));
        std::string tok;
        while (in >> tok) out.push_back(tok);
        return out;
    }

    std::string where(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        if (s != sections_.end()) {
            const auto e = s->second.find(key);
            if (e != s->second.end())
                return origin_ + ":" + std::to_string(e->second.line) + " ([" + section +
                       "] " + key + ")";
        }
        return origin_ + " ([" + section + "] " + key + ")";
    }

  private:
    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }
    static std::string strip_comment(const std::string& s) {
        const auto h = s.find('#');
        return h == std::string::npos ? s : s.substr(0, h);
    }
    double parse_double(const std::string& section, const std::string& key,
                        const std::string& v) const {
        try {
            std::size_t pos = 0;
            const double r = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw ConfigError(where(section, key) + ": expected a number, got '" + v + "'");
        }
    }

    std::string origin_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
};

namespace detail {

inline Vec vec_from(const std::vector<double>& xs, const std::string& where) {
    if (static_cast<int>(xs.size()) > kMaxDim)
        throw ConfigError(where + ": vector longer than the supported dimension");
    Vec v(static_cast<int>(xs.size()));
    for (int i = 0; i < v.n; ++i) v[i] = xs[static_cast<std::size_t>(i)];
    return v;
}

inline ScalarField load_scalar_field(const Config& c, const std::string& section,
                                     const std::string& prefix, int dim, int ctrl_dim) {
    const std::string fam = c.get(section, prefix + "family");
    if (fam == "constant") {
        return constant_scalar(c.get_double(section, prefix + "c0"));
    }
    if (fam == "affine") {
        ScalarField f = affine_scalar(
            c.get_double_or(section, prefix + "c0", 0.0),
            c.has(section, prefix + "cx")
                ? vec_from(c.get_doubles(section, prefix + "cx"), c.where(section, prefix + "cx"))
                : zeros(dim),
            c.get_double_or(section, prefix + "ct", 0.0),
            c.has(section, prefix + "ca")
                ? vec_from(c.get_doubles(section, prefix + "ca"), c.where(section, prefix + "ca"))
                : zeros(ctrl_dim));
        if (f.cx.n != dim)
            throw ConfigError(c.where(section, prefix + "cx") + ": expected " +
                              std::to_string(dim) + " coefficients");
        if (f.ca.n != ctrl_dim)
            throw ConfigError(c.where(section, prefix + "ca") + ": expected " +
                              std::to_string(ctrl_dim) + " coefficients");
        return f;
    }
    if (fam == "tabulated") {
        ScalarField f;
        f.family = FieldFamily::Tabulated;
        f.axis = static_cast<int>(c.get_int_or(section, prefix + "axis", -1));
        f.table.lo = c.get_double(section, prefix + "lo");
        f.table.hi = c.get_double(section, prefix + "hi");
        f.table.values = c.get_doubles(section, prefix + "values");
        if (f.table.values.size() < 2)
            throw ConfigError(c.where(section, prefix + "values") +
                              ": tabulated family needs at least 2 values");
        return f;
    }
    if (fam == "clamped-abs") {
        return clamped_abs_scalar(c.get_double(section, prefix + "scale"),
                                  c.get_double(section, prefix + "cap"),
                                  static_cast<int>(c.get_int_or(section, prefix + "axis", -1)));
    }
    throw ConfigError(c.where(section, prefix + "family") + ": unknown family '" + fam +
                      "' (expected constant, affine, tabulated or clamped-abs)");
}

inline ControlSample load_controls_axis(const Config& c, const std::string& section,
                                        const std::string& key) {
    const std::vector<std::string> words = c.get_words(section, key);
    if (words.empty()) throw ConfigError(c.where(section, key) + ": empty control spec");
    if (words[0] == "uniform") {
        if (words.size() != 4)
            throw ConfigError(c.where(section, key) + ": expected 'uniform COUNT LO HI'");
        return uniform_controls(std::stoi(words[1]), std::stod(words[2]), std::stod(words[3]));
    }
    if (words[0] == "list") {
        ControlSample s;
        for (std::size_t i = 1; i < words.size(); ++i) s.values.push_back(Vec{std::stod(words[i])});
        if (s.values.empty())
            throw ConfigError(c.where(section, key) + ": control list is empty");
        return s;
    }
    throw ConfigError(c.where(section, key) + ": expected 'uniform ...' or 'list ...'");
}

inline ControlSample load_controls(const Config& c, const std::string& side) {
    if (c.has("controls", side)) return load_controls_axis(c, "controls", side);
    // vector controls: one axis per key side*-axisK, product of the axes
    std::vector<ControlSample> axes;
    for (int ax = 1; ax <= kMaxDim; ++ax) {
        const std::string key = side + "-axis" + std::to_string(ax);
        if (!c.has("controls", key)) break;
        axes.push_back(load_controls_axis(c, "controls", key));
    }
    if (axes.empty())
        throw ConfigError("missing [controls] " + side + " (or " + side + "-axis1 ...)");
    return product_controls(axes);
}

inline SideData load_side(const Config& c, const std::string& section, int dim, int ctrl_dim) {
    SideData s;
    VectorField b;
    for (int comp = 1; comp <= dim; ++comp) {
        const std::string prefix = "b" + std::to_string(comp) + "-";
        b.components.push_back(load_scalar_field(c, section, prefix, dim, ctrl_dim));
    }
    s.dynamics = b;
    s.cost = load_scalar_field(c, section, "cost-", dim, ctrl_dim);
    s.bounds.speed_bound = c.get_double(section, "speed-bound");
    s.bounds.speed_lipschitz = c.get_double(section, "speed-lipschitz");
    s.bounds.cost_bound = c.get_double(section, "cost-bound");
    s.bounds.cost_lipschitz = c.get_double(section, "cost-lipschitz");
    return s;
}

}  // namespace detail

// Builds the problem from a configuration document: either one of the two
// shipped presets or a fully custom [side1]/[side2]/[terminal]/[controls]
// description using the closed family vocabulary.
inline ProblemSpec load_problem(const Config& c) {
    const std::string preset = c.get_or("problem", "preset", "custom");
    ProblemSpec spec;
    if (preset == "gap-demo") {
        spec = make_gap_problem(
            static_cast<int>(c.get_int_or("problem", "controls-per-side", 21)));
    } else if (preset == "eikonal-demo") {
        spec = make_eikonal_problem(
            static_cast<int>(c.get_int_or("problem", "controls-per-side", 21)));
    } else if (preset == "custom") {
        spec.dimension = static_cast<int>(c.get_int("problem", "dimension"));
        if (spec.dimension < 1 || spec.dimension > kMaxDim)
            throw ConfigError(c.where("problem", "dimension") + ": unsupported dimension");
        spec.controls1 = detail::load_controls(c, "side1");
        spec.controls2 = detail::load_controls(c, "side2");
        const int ctrl_dim = spec.controls1.control_dim();
        spec.side1 = detail::load_side(c, "side1", spec.dimension, ctrl_dim);
        spec.side2 = detail::load_side(c, "side2", spec.dimension,
                                       spec.controls2.control_dim());
        spec.terminal_cost =
            detail::load_scalar_field(c, "terminal", "", spec.dimension, 0);
        spec.box_lo = detail::vec_from(c.get_doubles("problem", "box-lo"),
                                       c.where("problem", "box-lo"));
        spec.box_hi = detail::vec_from(c.get_doubles("problem", "box-hi"),
                                       c.where("problem", "box-hi"));
    } else {
        throw ConfigError(c.where("problem", "preset") + ": unknown preset '" + preset +
                          "' (expected gap-demo, eikonal-demo or custom)");
    }
    spec.horizon = c.get_double_or("problem", "horizon", spec.horizon);
    spec.delta = c.get_double_or("problem", "delta", spec.delta);
    if (c.has("problem", "mu-grid"))
        spec.mu_grid = static_cast<int>(c.get_int("problem", "mu-grid"));
    if (spec.mu_grid < 1)
        throw ConfigError(c.where("problem", "mu-grid") + ": mu grid must be >= 1");
    spec.validate();
    return spec;
}

inline GridSpec load_grid(const Config& c, const ProblemSpec& spec) {
    const double cfl = c.get_double_or("grid", "cfl", 0.5);
    if (c.has("grid", "dx")) return GridSpec::make_uniform(spec, c.get_double("grid", "dx"), cfl);
    std::array<int, kMaxDim> nodes{};
    const std::vector<double> ns = c.get_doubles("grid", "nodes");
    if (static_cast<int>(ns.size()) != spec.dimension)
        throw ConfigError(c.where("grid", "nodes") + ": expected one count per dimension");
    for (int ax = 0; ax < spec.dimension; ++ax)
        nodes[static_cast<std::size_t>(ax)] = static_cast<int>(ns[static_cast<std::size_t>(ax)]);
    return GridSpec::make(spec.box_lo, spec.box_hi, nodes, spec.horizon,
                          spec.max_speed_bound(), cfl);
}

}  // namespace rhjb
