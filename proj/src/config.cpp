#include "activelc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <set>
#include <sstream>

#include "activelc/errors.hpp"
#include "activelc/io.hpp"

namespace activelc {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

/// Typed access to the property tree that records which keys were read.
class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    template <class T>
    void get(const std::string& section, const std::string& key, T& value) {
        const auto raw = find(section, key);
        if (!raw) return;
        value = convert<T>(*raw, section, key);
    }

    /// Every key in the document must have been read.
    void require_all_used() const {
        for (const auto& [section, child] : tree_) {
            if (child.empty() && !child.data().empty())
                throw ConfigError(fmt::format("key '{}' outside of any section", section));
            for (const auto& [key, _] : child)
                if (!used_.count(section + "." + key))
                    throw ConfigError(fmt::format("unknown configuration key [{}] {}", section, key));
        }
    }

private:
    std::optional<std::string> find(const std::string& section, const std::string& key) {
        const auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto v = sec->get_child_optional(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        used_.insert(section + "." + key);
        return trim(v->data());
    }

    template <class T>
    static T convert(const std::string& raw, const std::string& section, const std::string& key) {
        auto bad = [&](const char* what) {
            return ConfigError(fmt::format("[{}] {} = '{}' is not a valid {}", section, key, raw, what));
        };
        if constexpr (std::is_same_v<T, bool>) {
            const std::string v = lower(raw);
            if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
            if (v == "false" || v == "0" || v == "no" || v == "off") return false;
            throw bad("boolean");
        } else if constexpr (std::is_same_v<T, std::string>) {
            return raw;
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            std::vector<double> out;
            for (const auto& item : split_list(raw)) out.push_back(convert<double>(item, section, key));
            return out;
        } else {
            std::istringstream is(raw);
            T v{};
            is >> v;
            if (!is || !(is >> std::ws).eof()) throw bad("number");
            return v;
        }
    }

    const pt::ptree& tree_;
    std::set<std::string> used_;
};

std::array<bool, 3> parse_periodic(const std::string& text) {
    std::array<bool, 3> p{false, false, false};
    const std::string v = lower(trim(text));
    if (v.empty() || v == "none") return p;
    for (const auto& axis : split_list(v)) {
        if (axis == "x") p[0] = true;
        else if (axis == "y") p[1] = true;
        else if (axis == "z") p[2] = true;
        else throw ConfigError(fmt::format("[grid] periodic: unknown axis '{}' (use x, y, z or none)", axis));
    }
    return p;
}

}  // namespace

MomentumMode parse_mode(const std::string& name) {
    if (name == "grid") return MomentumMode::Grid;
    if (name == "galerkin") return MomentumMode::Galerkin;
    throw ConfigError(fmt::format("unknown momentum mode '{}' (grid or galerkin)", name));
}

std::string to_string(MomentumMode mode) { return mode == MomentumMode::Grid ? "grid" : "galerkin"; }

Grid GridSpec::make() const {
    std::array<int, 3> n = cells;
    std::array<double, 3> len = lengths;
    if (dims == 2) {
        n[2] = 1;
        len[2] = 1.0;
    }
    return Grid(dims, n, len, periodic);
}

void require_descending(const std::vector<double>& values, std::string_view what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] < 0.0)
            throw ConfigError(fmt::format("{} list entries must be finite and >= 0", what));
        if (i > 0 && !(values[i] < values[i - 1]))
            throw ConfigError(fmt::format("{} list must be sorted strictly descending (got {})", what, fmt::join(values, ", ")));
    }
}

void RunConfig::validate() const {
    if (grid.dims != 2 && grid.dims != 3) throw ConfigError(fmt::format("grid dims must be 2 or 3 (got {})", grid.dims));
    (void)grid.make();
    phys.validate();
    reg.validate();
    control.validate();
    if (reg.delta > 0.0 && !(reg.beta_exp > std::max(4.0, phys.gamma_exp)))
        throw ConfigError(fmt::format("artificial pressure exponent constraint violated: beta > max(4, gamma) = {} required when delta > 0 (got {})",
                                      std::max(4.0, phys.gamma_exp), reg.beta_exp));
    if (!std::isfinite(t_final) || t_final < 0.0) throw ConfigError("t_final must be finite and >= 0");
    if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
    if (!std::isfinite(fixed_dt) || fixed_dt < 0.0) throw ConfigError("dt must be finite and >= 0");
    if (!(c_lower > 0.0) || !(c_upper >= c_lower))
        throw ConfigError(fmt::format("concentration bounds must satisfy 0 < c_lower <= c_upper (got {}, {})", c_lower, c_upper));
    if (output.series_every < 1) throw ConfigError("series_every must be >= 1");
    if (output.vtk_every < 0 || output.checkpoint_every < 0) throw ConfigError("output cadences must be >= 0");
    if (galerkin_modes < 1) throw ConfigError("galerkin_modes must be >= 1");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    if (!(initial.u_amplitude >= 0.0) || !(initial.q_amplitude >= 0.0))
        throw ConfigError("initial amplitudes must be >= 0");
    require_descending(epsilon_list, "epsilon continuation");
    require_descending(delta_list, "delta continuation");
    if (!delta_list.empty()) {
        const double beta_min = RegParams::continuation_beta_threshold(phys.gamma_exp);
        if (!(reg.beta_exp > beta_min))
            throw ConfigError(fmt::format("delta continuation requires beta > max(6 gamma/(2 gamma - 3), gamma, 4) = {} (got {})",
                                          beta_min, reg.beta_exp));
    }
    if (!(continuation_k > 0.0)) throw ConfigError("continuation k must be > 0");
    if (!(monitor.c_tolerance >= 0.0) || !(monitor.mass_tolerance >= 0.0) || !(monitor.envelope_slack >= 0.0))
        throw ConfigError("monitor tolerances must be >= 0");
    if (monitor.theta >= 0.0) {
        const double sup = std::min(0.25, 2.0 * phys.gamma_exp / 3.0 - 1.0);
        if (!(monitor.theta > 0.0 && monitor.theta < sup))
            throw ConfigError(fmt::format("monitor theta must lie in (0, min(1/4, 2 gamma/3 - 1)) = (0, {})", sup));
    }
}

std::string RunConfig::canonical() const {
    const Grid g = grid.make();
    return fmt::format(
        "dims={};cells={},{},{};lengths={},{},{};periodic={},{},{};"
        "D0={};mu={};nu={};Gamma={};c_star={};b={};sigma_star={};gamma={};"
        "epsilon={};delta={};beta={};cfl={};dt_max={};advection={};implicit={};acoustic={};floor={};"
        "cg_rtol={};cg_max_iter={};t_final={};dt={};max_steps={};ic={};seed={};u_amp={};q_amp={};ic_path={};"
        "mode={};galerkin_modes={}",
        g.dims(), g.cells()[0], g.cells()[1], g.cells()[2], g.lengths()[0], g.lengths()[1], g.lengths()[2],
        g.periodic(0), g.periodic(1), g.periodic(2), phys.D0, phys.mu, phys.nu, phys.Gamma, phys.c_star, phys.b,
        phys.sigma_star, phys.gamma_exp, reg.epsilon, reg.delta, reg.beta_exp, control.cfl, control.dt_max,
        to_string(control.advection), control.implicit_diffusion, control.acoustic_bound, control.vacuum_floor,
        control.cg.rtol, control.cg.max_iter, t_final, fixed_dt, max_steps, to_string(initial.preset), initial.seed,
        initial.u_amplitude, initial.q_amplitude, initial.path, to_string(mode), galerkin_modes);
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

RunConfig parse_config(std::string_view text) {
    pt::ptree tree;
    try {
        std::istringstream is{std::string(text)};
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("malformed configuration (line {}): {}", e.line(), e.message()));
    }
    Reader in(tree);
    RunConfig c;

    in.get("grid", "dims", c.grid.dims);
    in.get("grid", "nx", c.grid.cells[0]);
    in.get("grid", "ny", c.grid.cells[1]);
    in.get("grid", "nz", c.grid.cells[2]);
    in.get("grid", "lx", c.grid.lengths[0]);
    in.get("grid", "ly", c.grid.lengths[1]);
    in.get("grid", "lz", c.grid.lengths[2]);
    if (c.grid.dims == 3 && !tree.get_child_optional("grid.nz")) c.grid.cells[2] = c.grid.cells[0];
    std::string periodic;
    in.get("grid", "periodic", periodic);
    c.grid.periodic = parse_periodic(periodic);

    in.get("physics", "D0", c.phys.D0);
    in.get("physics", "mu", c.phys.mu);
    in.get("physics", "nu", c.phys.nu);
    in.get("physics", "Gamma", c.phys.Gamma);
    in.get("physics", "c_star", c.phys.c_star);
    in.get("physics", "b", c.phys.b);
    in.get("physics", "sigma_star", c.phys.sigma_star);
    in.get("physics", "gamma", c.phys.gamma_exp);

    in.get("regularization", "epsilon", c.reg.epsilon);
    in.get("regularization", "delta", c.reg.delta);
    in.get("regularization", "beta", c.reg.beta_exp);

    in.get("control", "cfl", c.control.cfl);
    in.get("control", "dt_max", c.control.dt_max);
    std::string advection{to_string(c.control.advection)};
    in.get("control", "advection", advection);
    c.control.advection = parse_advection_scheme(advection);
    in.get("control", "implicit_diffusion", c.control.implicit_diffusion);
    in.get("control", "acoustic_bound", c.control.acoustic_bound);
    in.get("control", "check_stability", c.control.check_stability);
    in.get("control", "vacuum_floor", c.control.vacuum_floor);
    in.get("control", "cg_rtol", c.control.cg.rtol);
    in.get("control", "cg_max_iter", c.control.cg.max_iter);

    in.get("run", "t_final", c.t_final);
    in.get("run", "max_steps", c.max_steps);
    in.get("run", "dt", c.fixed_dt);
    std::string mode = to_string(c.mode);
    in.get("run", "mode", mode);
    c.mode = parse_mode(mode);
    in.get("run", "galerkin_modes", c.galerkin_modes);
    in.get("run", "deterministic", c.deterministic);
    in.get("run", "threads", c.threads);
    in.get("run", "out", c.output.dir);
    in.get("run", "series_every", c.output.series_every);
    in.get("run", "vtk_every", c.output.vtk_every);
    in.get("run", "checkpoint_every", c.output.checkpoint_every);
    in.get("run", "identities", c.output.identities);

    std::string preset = to_string(c.initial.preset);
    in.get("initial", "preset", preset);
    c.initial.preset = parse_ic_preset(preset);
    in.get("initial", "seed", c.initial.seed);
    in.get("initial", "u_amplitude", c.initial.u_amplitude);
    in.get("initial", "q_amplitude", c.initial.q_amplitude);
    in.get("initial", "path", c.initial.path);
    in.get("initial", "c_lower", c.c_lower);
    in.get("initial", "c_upper", c.c_upper);

    in.get("monitor", "c_tolerance", c.monitor.c_tolerance);
    in.get("monitor", "mass_tolerance", c.monitor.mass_tolerance);
    in.get("monitor", "envelope_slack", c.monitor.envelope_slack);
    in.get("monitor", "theta", c.monitor.theta);

    in.get("continuation", "epsilon", c.epsilon_list);
    in.get("continuation", "delta", c.delta_list);
    in.get("continuation", "k", c.continuation_k);

    in.require_all_used();
    c.validate();
    const Grid g = c.grid.make();
    validate_initial_state(make_initial_state(c.initial, g, c.phys), g, c.c_lower, c.c_upper);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text);
}

}  // namespace activelc
