#include "searchtrack/config.hpp"

#include "searchtrack/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace searchtrack::config {

namespace detail {
// Defined in the generated fixtures source.
const std::vector<std::pair<std::string, std::string>>& fixtures();
}  // namespace detail

namespace {

using Keys = std::initializer_list<const char*>;

ParseError parse_error(const std::string& message, const YAML::Mark& mark) {
    if (mark.is_null()) return ParseError(message, 0, 0);
    return ParseError(message, static_cast<std::size_t>(mark.line) + 1, static_cast<std::size_t>(mark.column) + 1);
}

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

/// Null sections count as empty mappings.
bool section(const YAML::Node& parent, const char* key, YAML::Node& out) {
    const YAML::Node n = parent[key];
    if (!n || n.IsNull()) return false;
    out = n;
    return true;
}

void check_keys(const YAML::Node& map, Keys allowed, const std::string& prefix) {
    if (!map.IsMap()) throw parse_error("'" + (prefix.empty() ? "document" : prefix) + "' must be a mapping", map.Mark());
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!known) throw parse_error("unknown key '" + join(prefix, key) + "'", kv.first.Mark());
    }
}

template <class T>
const char* type_name() {
    if constexpr (std::is_same_v<T, double>) return "a number";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_same_v<T, std::string>) return "a string";
    else return "a list";
}

template <class T>
T as(const YAML::Node& n, const std::string& field) {
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw parse_error("'" + field + "' must be " + type_name<T>(), n.Mark());
    }
}

template <class T>
bool read(const YAML::Node& map, const char* key, T& out, const std::string& prefix) {
    const YAML::Node n = map[key];
    if (!n || n.IsNull()) return false;
    out = as<T>(n, join(prefix, key));
    return true;
}

Position read_point(const YAML::Node& n, const std::string& field) {
    const auto v = as<std::vector<double>>(n, field);
    if (v.size() != 2) throw parse_error("'" + field + "' must be a list [x, y]", n.Mark());
    return {v[0], v[1]};
}

Eigen::Matrix4d read_matrix(const YAML::Node& n, const std::string& field) {
    const auto rows = as<std::vector<std::vector<double>>>(n, field);
    if (rows.size() != 4 || std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.size() != 4; }))
        throw parse_error("'" + field + "' must be a 4x4 list of rows", n.Mark());
    Eigen::Matrix4d m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

Rect read_rect(const YAML::Node& n, const std::string& prefix, Rect r) {
    check_keys(n, {"xmin", "ymin", "xmax", "ymax"}, prefix);
    read(n, "xmin", r.xmin, prefix);
    read(n, "ymin", r.ymin, prefix);
    read(n, "xmax", r.xmax, prefix);
    read(n, "ymax", r.ymax, prefix);
    return r;
}

void apply_override(YAML::Node& root, const std::string& item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError("override '" + item + "' must look like key=value", 0, 0);
    const std::string key = item.substr(0, eq);
    YAML::Node value;
    try {
        value = YAML::Load(item.substr(eq + 1));
    } catch (const YAML::ParserException& e) {
        throw ParseError("override '" + item + "': " + e.msg, 0, 0);
    }
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) {
        if (part.empty()) throw ParseError("override '" + item + "' has an empty key segment", 0, 0);
        parts.push_back(part);
    }
    YAML::Node node = root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node child = node[parts[i]];
        if (!child.IsMap()) child = YAML::Node(YAML::NodeType::Map);
        node.reset(child);
    }
    node[parts.back()] = value;
}

sim::Scenario decode(const YAML::Node& root) {
    sim::Scenario s;
    if (!root || root.IsNull()) return s;
    check_keys(root, {"seed", "horizon", "area", "motion", "truth", "sensing", "control", "plan", "filter", "metrics",
                      "agents", "targets", "experiment"},
               "");
    read(root, "seed", s.seed, "");
    read(root, "horizon", s.horizon, "");

    YAML::Node n;
    if (section(root, "area", n)) s.area = read_rect(n, "area", s.area);

    if (section(root, "motion", n)) {
        check_keys(n, {"T", "survival", "F", "Q"}, "motion");
        double T = 1.0;
        double survival = 0.99;
        read(n, "T", T, "motion");
        read(n, "survival", survival, "motion");
        MotionParams cv = MotionParams::constant_velocity(T, survival);
        Eigen::Matrix4d F = cv.F();
        Eigen::Matrix4d Q = cv.Q();
        if (n["F"]) F = read_matrix(n["F"], "motion.F");
        if (n["Q"]) Q = read_matrix(n["Q"], "motion.Q");
        s.motion = MotionParams(F, Q, survival, T);
    }

    if (section(root, "truth", n)) {
        check_keys(n, {"process_noise_scale"}, "truth");
        read(n, "process_noise_scale", s.truth_noise_scale, "truth");
    }

    if (section(root, "sensing", n)) {
        check_keys(n, {"pd_max", "r0", "eta", "phi0", "beta_phi", "zeta0", "beta_zeta", "clutter_rate"}, "sensing");
        auto& sp = s.sensing;
        read(n, "pd_max", sp.pd_max, "sensing");
        read(n, "r0", sp.r0, "sensing");
        read(n, "eta", sp.eta, "sensing");
        read(n, "phi0", sp.phi0, "sensing");
        read(n, "beta_phi", sp.beta_phi, "sensing");
        read(n, "zeta0", sp.zeta0, "sensing");
        read(n, "beta_zeta", sp.beta_zeta, "sensing");
        read(n, "clutter_rate", sp.clutter_rate, "sensing");
    }

    if (section(root, "control", n)) {
        check_keys(n, {"delta_r", "n_r", "n_theta"}, "control");
        read(n, "delta_r", s.control.delta_r, "control");
        read(n, "n_r", s.control.n_r, "control");
        read(n, "n_theta", s.control.n_theta, "control");
    }

    if (section(root, "plan", n)) {
        check_keys(n, {"d_min", "grid_step", "backend", "exhaustive_limit", "mode_selection", "mode_count", "w", "ga_population",
                       "ga_max_iters", "ga_epsilon", "ga_stall"},
                   "plan");
        auto& p = s.plan;
        read(n, "d_min", p.d_min, "plan");
        read(n, "grid_step", p.grid_step, "plan");
        std::string text;
        if (read(n, "backend", text, "plan")) {
            const auto b = control::parse_backend(text);
            if (!b) throw ValidationError("plan.backend", "expected greedy, exhaustive or ga, got '" + text + "'");
            p.backend = *b;
        }
        read(n, "exhaustive_limit", p.exhaustive_limit, "plan");
        if (read(n, "mode_selection", text, "plan")) {
            const auto m = control::parse_mode_selection(text);
            if (!m) throw ValidationError("plan.mode_selection", "expected heuristic or powerset, got '" + text + "'");
            p.mode_selection = *m;
        }
        if (read(n, "mode_count", text, "plan")) {
            const auto m = control::parse_mode_count(text);
            if (!m) throw ValidationError("plan.mode_count", "expected all or sensing_range, got '" + text + "'");
            p.mode_count = *m;
        }
        read(n, "w", p.w, "plan");
        read(n, "ga_population", p.ga_population, "plan");
        read(n, "ga_max_iters", p.ga_max_iters, "plan");
        read(n, "ga_epsilon", p.ga_epsilon, "plan");
        read(n, "ga_stall", p.ga_stall, "plan");
    }

    if (section(root, "filter", n)) {
        check_keys(n, {"particles", "prune_threshold", "max_components", "birth"}, "filter");
        auto& f = s.filter;
        read(n, "particles", f.particles, "filter");
        read(n, "prune_threshold", f.prune_threshold, "filter");
        read(n, "max_components", f.max_components, "filter");
        YAML::Node b;
        if (section(n, "birth", b)) {
            check_keys(b, {"count", "existence", "velocity_std", "particles"}, "filter.birth");
            read(b, "count", f.birth.count, "filter.birth");
            read(b, "existence", f.birth.existence, "filter.birth");
            read(b, "velocity_std", f.birth.velocity_std, "filter.birth");
            read(b, "particles", f.birth.particles, "filter.birth");
        }
    }

    if (section(root, "metrics", n)) {
        check_keys(n, {"ospa_c", "ospa_p", "coverage_threshold"}, "metrics");
        read(n, "ospa_c", s.ospa.c, "metrics");
        read(n, "ospa_p", s.ospa.p, "metrics");
        read(n, "coverage_threshold", s.coverage_threshold, "metrics");
    }

    if (section(root, "agents", n)) {
        check_keys(n, {"count", "starts", "spawn"}, "agents");
        YAML::Node starts;
        if (section(n, "starts", starts)) {
            if (!starts.IsSequence()) throw parse_error("'agents.starts' must be a list of [x, y]", starts.Mark());
            for (std::size_t i = 0; i < starts.size(); ++i)
                s.agent_starts.push_back(read_point(starts[i], "agents.starts[" + std::to_string(i) + "]"));
            s.agent_count = static_cast<int>(s.agent_starts.size());
        }
        read(n, "count", s.agent_count, "agents");
        YAML::Node spawn;
        if (section(n, "spawn", spawn)) s.spawn_box = read_rect(spawn, "agents.spawn", s.area);
    }

    if (section(root, "targets", n)) {
        if (!n.IsSequence()) throw parse_error("'targets' must be a list", n.Mark());
        for (std::size_t i = 0; i < n.size(); ++i) {
            const YAML::Node t = n[i];
            const std::string prefix = "targets[" + std::to_string(i) + "]";
            check_keys(t, {"birth_step", "death_step", "state", "birth", "death"}, prefix);
            sim::ScriptedTarget target;
            read(t, "birth_step", target.birth_step, prefix);
            target.death_step = s.horizon;
            read(t, "death_step", target.death_step, prefix);
            if (t["state"]) {
                if (t["birth"] || t["death"])
                    throw parse_error("'" + prefix + "' gives both a state and birth/death positions", t.Mark());
                const auto v = as<std::vector<double>>(t["state"], prefix + ".state");
                if (v.size() != 4) throw parse_error("'" + prefix + ".state' must be [px, vx, py, vy]", t["state"].Mark());
                target.state = {v[0], v[1], v[2], v[3]};
            } else if (t["birth"]) {
                const Position b = read_point(t["birth"], prefix + ".birth");
                Position d = b;
                if (t["death"]) d = read_point(t["death"], prefix + ".death");
                // Constant velocity that reaches the death position at the death step.
                const int steps = target.death_step - target.birth_step;
                const double span = steps > 0 ? steps * s.motion.T() : 1.0;
                target.state = {b.x, steps > 0 ? (d.x - b.x) / span : 0.0, b.y, steps > 0 ? (d.y - b.y) / span : 0.0};
            } else {
                throw parse_error("'" + prefix + "' needs either 'state' or 'birth'", t.Mark());
            }
            s.targets.push_back(target);
        }
    }

    if (section(root, "experiment", n)) {
        check_keys(n, {"trials", "agent_counts"}, "experiment");
        read(n, "trials", s.experiment.trials, "experiment");
        read(n, "agent_counts", s.experiment.agent_counts, "experiment");
    }

    s.validate();
    return s;
}

void emit_rect(YAML::Emitter& out, const Rect& r) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "xmin" << YAML::Value << r.xmin << YAML::Key << "ymin"
        << YAML::Value << r.ymin << YAML::Key << "xmax" << YAML::Value << r.xmax << YAML::Key << "ymax" << YAML::Value
        << r.ymax << YAML::EndMap;
}

void emit_matrix(YAML::Emitter& out, const Eigen::Matrix4d& m) {
    out << YAML::BeginSeq;
    for (int i = 0; i < 4; ++i) {
        out << YAML::Flow << YAML::BeginSeq;
        for (int j = 0; j < 4; ++j) out << m(i, j);
        out << YAML::EndSeq;
    }
    out << YAML::EndSeq;
}

}  // namespace

sim::Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw parse_error(e.msg, e.mark);
    }
    if (!overrides.empty()) {
        if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
        if (!root.IsMap()) throw parse_error("'document' must be a mapping", root.Mark());
        for (const auto& o : overrides) apply_override(root, o);
    }
    try {
        return decode(root);
    } catch (const YAML::Exception& e) {
        throw parse_error(e.msg, e.mark);
    }
}

sim::Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read scenario '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), overrides);
}

std::string serialize(const sim::Scenario& s) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "seed" << YAML::Value << s.seed;
    out << YAML::Key << "horizon" << YAML::Value << s.horizon;
    out << YAML::Key << "area" << YAML::Value;
    emit_rect(out, s.area);

    out << YAML::Key << "motion" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "T" << YAML::Value << s.motion.T();
    out << YAML::Key << "survival" << YAML::Value << s.motion.survival();
    out << YAML::Key << "F" << YAML::Value;
    emit_matrix(out, s.motion.F());
    out << YAML::Key << "Q" << YAML::Value;
    emit_matrix(out, s.motion.Q());
    out << YAML::EndMap;

    out << YAML::Key << "truth" << YAML::Value << YAML::BeginMap << YAML::Key << "process_noise_scale" << YAML::Value
        << s.truth_noise_scale << YAML::EndMap;

    const auto& sp = s.sensing;
    out << YAML::Key << "sensing" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "pd_max" << YAML::Value << sp.pd_max;
    out << YAML::Key << "r0" << YAML::Value << sp.r0;
    out << YAML::Key << "eta" << YAML::Value << sp.eta;
    out << YAML::Key << "phi0" << YAML::Value << sp.phi0;
    out << YAML::Key << "beta_phi" << YAML::Value << sp.beta_phi;
    out << YAML::Key << "zeta0" << YAML::Value << sp.zeta0;
    out << YAML::Key << "beta_zeta" << YAML::Value << sp.beta_zeta;
    out << YAML::Key << "clutter_rate" << YAML::Value << sp.clutter_rate;
    out << YAML::EndMap;

    out << YAML::Key << "control" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "delta_r" << YAML::Value << s.control.delta_r;
    out << YAML::Key << "n_r" << YAML::Value << s.control.n_r;
    out << YAML::Key << "n_theta" << YAML::Value << s.control.n_theta;
    out << YAML::EndMap;

    const auto& p = s.plan;
    out << YAML::Key << "plan" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "d_min" << YAML::Value << p.d_min;
    out << YAML::Key << "grid_step" << YAML::Value << p.grid_step;
    out << YAML::Key << "backend" << YAML::Value << control::to_string(p.backend);
    out << YAML::Key << "exhaustive_limit" << YAML::Value << p.exhaustive_limit;
    out << YAML::Key << "mode_selection" << YAML::Value << control::to_string(p.mode_selection);
    out << YAML::Key << "mode_count" << YAML::Value << control::to_string(p.mode_count);
    out << YAML::Key << "w" << YAML::Value << p.w;
    out << YAML::Key << "ga_population" << YAML::Value << p.ga_population;
    out << YAML::Key << "ga_max_iters" << YAML::Value << p.ga_max_iters;
    out << YAML::Key << "ga_epsilon" << YAML::Value << p.ga_epsilon;
    out << YAML::Key << "ga_stall" << YAML::Value << p.ga_stall;
    out << YAML::EndMap;

    const auto& f = s.filter;
    out << YAML::Key << "filter" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "particles" << YAML::Value << f.particles;
    out << YAML::Key << "prune_threshold" << YAML::Value << f.prune_threshold;
    out << YAML::Key << "max_components" << YAML::Value << f.max_components;
    out << YAML::Key << "birth" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "count" << YAML::Value << f.birth.count;
    out << YAML::Key << "existence" << YAML::Value << f.birth.existence;
    out << YAML::Key << "velocity_std" << YAML::Value << f.birth.velocity_std;
    out << YAML::Key << "particles" << YAML::Value << f.birth.particles;
    out << YAML::EndMap << YAML::EndMap;

    out << YAML::Key << "metrics" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "ospa_c" << YAML::Value << s.ospa.c;
    out << YAML::Key << "ospa_p" << YAML::Value << s.ospa.p;
    out << YAML::Key << "coverage_threshold" << YAML::Value << s.coverage_threshold;
    out << YAML::EndMap;

    out << YAML::Key << "agents" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "count" << YAML::Value << s.agent_count;
    out << YAML::Key << "starts" << YAML::Value << YAML::BeginSeq;
    for (const auto& a : s.agent_starts) out << YAML::Flow << YAML::BeginSeq << a.x << a.y << YAML::EndSeq;
    out << YAML::EndSeq;
    if (s.spawn_box) {
        out << YAML::Key << "spawn" << YAML::Value;
        emit_rect(out, *s.spawn_box);
    }
    out << YAML::EndMap;

    out << YAML::Key << "targets" << YAML::Value << YAML::BeginSeq;
    for (const auto& t : s.targets) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "birth_step" << YAML::Value << t.birth_step;
        out << YAML::Key << "death_step" << YAML::Value << t.death_step;
        out << YAML::Key << "state" << YAML::Value << YAML::Flow << YAML::BeginSeq << t.state.px << t.state.vx
            << t.state.py << t.state.vy << YAML::EndSeq;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "trials" << YAML::Value << s.experiment.trials;
    out << YAML::Key << "agent_counts" << YAML::Value << YAML::Flow << s.experiment.agent_counts;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::vector<std::string> fixture_names() {
    std::vector<std::string> names;
    for (const auto& [name, text] : detail::fixtures()) names.push_back(name);
    return names;
}

const std::string& fixture_text(const std::string& name) {
    for (const auto& [n, text] : detail::fixtures())
        if (n == name) return text;
    throw ValidationError("scenario", "unknown fixture '" + name + "'");
}

}  // namespace searchtrack::config
