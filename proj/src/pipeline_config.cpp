#include "uwpde/error.hpp"
#include "uwpde/pipeline.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace uwpde {

namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

void require_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) config_error(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) config_error(where + ": unknown key '" + key + "'");
    }
}

double get_real(const json& obj, const char* key, double fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    }
    config_error(where + "." + key + ": expected a number");
}

int get_int(const json& obj, const char* key, int fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == std::floor(d) && std::abs(d) < 1e9) return static_cast<int>(d);
    }
    config_error(where + "." + key + ": expected an integer");
}

bool get_bool(const json& obj, const char* key, bool fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) config_error(where + "." + key + ": expected true or false");
    return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback,
                       const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) config_error(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

json real_json(double v) {
    if (std::isinf(v)) return "inf";
    return v;
}

// ---- operators -------------------------------------------------------------

json operator_to_json(const OperatorSpec& op) {
    return std::visit(Overloaded{
                          [](const ClaheParams& p) {
                              return json{{"op", "clahe"},         {"tiles_x", p.tiles_x},
                                          {"tiles_y", p.tiles_y},  {"bins", p.bins},
                                          {"clip_factor", real_json(p.clip_factor)},
                                          {"per_channel", p.per_channel}};
                          },
                          [](const PwlSpec& s) {
                              json j{{"op", "pwl"}, {"p_low_frac", s.p_low_frac}, {"p_high_frac", s.p_high_frac}};
                              if (!s.points.empty()) {
                                  json pts = json::array();
                                  for (const auto& pt : s.points) pts.push_back({pt.in, pt.out});
                                  j["points"] = pts;
                              }
                              return j;
                          },
                          [](const StretchSpec& s) {
                              return json{{"op", s.params.per_channel ? "hs" : "cs"},
                                          {"p_low_frac", s.params.p_low_frac},
                                          {"p_high_frac", s.params.p_high_frac}};
                          },
                          [](const GocParams& p) {
                              json j{{"op", p.variant == 3 ? "goc3" : "goc2"}};
                              if (p.variant == 3) j["gamma"] = p.gamma;
                              return j;
                          },
                      },
                      op);
}

OperatorSpec operator_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("op") || !j.at("op").is_string()) {
        config_error(where + ": operator needs an \"op\" name");
    }
    const std::string name = j.at("op").get<std::string>();
    const std::string at = where + "(" + name + ")";
    if (name == "clahe") {
        require_keys(j, at, {"op", "tiles_x", "tiles_y", "bins", "clip_factor", "per_channel"});
        ClaheParams p;
        p.tiles_x = get_int(j, "tiles_x", p.tiles_x, at);
        p.tiles_y = get_int(j, "tiles_y", p.tiles_y, at);
        p.bins = get_int(j, "bins", p.bins, at);
        p.clip_factor = get_real(j, "clip_factor", p.clip_factor, at);
        p.per_channel = get_bool(j, "per_channel", p.per_channel, at);
        return p;
    }
    if (name == "pwl") {
        require_keys(j, at, {"op", "p_low_frac", "p_high_frac", "points"});
        PwlSpec s;
        s.p_low_frac = get_real(j, "p_low_frac", s.p_low_frac, at);
        s.p_high_frac = get_real(j, "p_high_frac", s.p_high_frac, at);
        if (j.contains("points")) {
            const json& pts = j.at("points");
            if (!pts.is_array()) config_error(at + ".points: expected an array of [in, out] pairs");
            for (const json& pt : pts) {
                if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
                    config_error(at + ".points: expected [in, out] pairs");
                }
                s.points.push_back({pt[0].get<double>(), pt[1].get<double>()});
            }
        }
        return s;
    }
    if (name == "hs" || name == "cs") {
        require_keys(j, at, {"op", "p_low_frac", "p_high_frac"});
        StretchSpec s{StretchParams{0.01, 0.99, name == "hs"}};
        s.params.p_low_frac = get_real(j, "p_low_frac", s.params.p_low_frac, at);
        s.params.p_high_frac = get_real(j, "p_high_frac", s.params.p_high_frac, at);
        return s;
    }
    if (name == "goc2") {
        require_keys(j, at, {"op"});
        return GocParams{2, 1.0};
    }
    if (name == "goc3") {
        require_keys(j, at, {"op", "gamma"});
        return GocParams{3, get_real(j, "gamma", std::get<GocParams>(default_operator("goc3")).gamma, at)};
    }
    config_error(where + ": unknown operator '" + name + "'");
}

json ops_to_json(const std::vector<OperatorSpec>& ops) {
    json arr = json::array();
    for (const auto& op : ops) arr.push_back(operator_to_json(op));
    return arr;
}

std::vector<OperatorSpec> ops_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) config_error(where + ": expected an array of operators");
    std::vector<OperatorSpec> ops;
    for (std::size_t i = 0; i < j.size(); ++i) {
        ops.push_back(operator_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return ops;
}

// ---- triggers --------------------------------------------------------------

void trigger_to_json(const TriggerParams& t, json& j) {
    j["trigger"] = t.when == Trigger::Always ? "always" : "dark-or-faded";
    j["dark_mean"] = t.dark_mean;
    j["faded_range"] = t.faded_range;
}

TriggerParams trigger_from_json(const json& j, TriggerParams t, const std::string& where) {
    const std::string when = get_string(j, "trigger", t.when == Trigger::Always ? "always" : "dark-or-faded", where);
    if (when == "always") {
        t.when = Trigger::Always;
    } else if (when == "dark-or-faded") {
        t.when = Trigger::DarkOrFaded;
    } else {
        config_error(where + ".trigger: expected \"always\" or \"dark-or-faded\"");
    }
    t.dark_mean = get_real(j, "dark_mean", t.dark_mean, where);
    t.faded_range = get_real(j, "faded_range", t.faded_range, where);
    return t;
}

// ---- stages ----------------------------------------------------------------

json stage_to_json(const Stage& stage) {
    return std::visit(
        Overloaded{
            [](const PdeStage& s) {
                const PdeConfig& c = s.cfg;
                return json{{"type", "pde-evolve"},
                            {"model", c.model == PdeModel::Eq2 ? "eq2" : "eq3"},
                            {"term_mode", c.term_mode == TermMode::Residual ? "residual" : "faithful"},
                            {"lambda_diff", c.lambda_diff},
                            {"lambda_local", c.lambda_local},
                            {"lambda_global", c.lambda_global},
                            {"lambda_colour", c.lambda_colour},
                            {"lambda_f", c.lambda_f},
                            {"dt", c.dt},
                            {"max_iters", c.max_iters},
                            {"tol", c.tol},
                            {"pm_K", c.pm_K},
                            {"eps", c.eps},
                            {"sigma_min", c.sigma_min},
                            {"local_ops", ops_to_json(c.local_ops)},
                            {"global_ops", ops_to_json(c.global_ops)}};
            },
            [](const OperatorStage& s) { return json{{"type", "operator"}, {"operator", operator_to_json(s.op)}}; },
            [](const XyzCastStage& s) {
                return json{{"type", "xyz-cast-removal"}, {"srgb_transfer", s.opts.srgb_transfer}};
            },
            [](const HomomorphicStage& s) {
                const HomomorphicParams& p = s.params;
                json j{{"type", "fuzzy-homomorphic"},
                       {"gamma_low", p.gamma_low},
                       {"gamma_high", p.gamma_high},
                       {"sharpness_c", p.sharpness_c},
                       {"cutoff_frac", p.cutoff_frac},
                       {"log_floor", p.log_floor},
                       {"fuzzy_slope", p.fuzzy_slope},
                       {"fuzzy_center", p.fuzzy_center ? json(*p.fuzzy_center) : json(nullptr)},
                       {"fuzzy_enabled", p.fuzzy_enabled}};
                trigger_to_json(s.trigger, j);
                return j;
            },
            [](const FinisherStage& s) {
                json j{{"type", "pwl-finisher"}, {"p_low_frac", s.p_low_frac}, {"p_high_frac", s.p_high_frac}};
                trigger_to_json(s.trigger, j);
                return j;
            },
        },
        stage);
}

Stage stage_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
        config_error(where + ": stage needs a \"type\"");
    }
    const std::string type = j.at("type").get<std::string>();
    const std::string at = where + "(" + type + ")";
    if (type == "pde-evolve") {
        require_keys(j, at,
                     {"type", "model", "term_mode", "lambda_diff", "lambda_local", "lambda_global",
                      "lambda_colour", "lambda_f", "dt", "max_iters", "tol", "pm_K", "eps", "sigma_min",
                      "local_ops", "global_ops"});
        PdeConfig c;
        const std::string model = get_string(j, "model", "eq3", at);
        if (model != "eq2" && model != "eq3") config_error(at + ".model: expected \"eq2\" or \"eq3\"");
        c.model = model == "eq2" ? PdeModel::Eq2 : PdeModel::Eq3;
        const std::string mode = get_string(j, "term_mode", "residual", at);
        if (mode != "residual" && mode != "faithful") {
            config_error(at + ".term_mode: expected \"residual\" or \"faithful\"");
        }
        c.term_mode = mode == "faithful" ? TermMode::Faithful : TermMode::Residual;
        c.lambda_diff = get_real(j, "lambda_diff", c.lambda_diff, at);
        c.lambda_local = get_real(j, "lambda_local", c.lambda_local, at);
        c.lambda_global = get_real(j, "lambda_global", c.lambda_global, at);
        c.lambda_colour = get_real(j, "lambda_colour", c.lambda_colour, at);
        c.lambda_f = get_real(j, "lambda_f", c.lambda_f, at);
        c.dt = get_real(j, "dt", c.dt, at);
        c.max_iters = get_int(j, "max_iters", c.max_iters, at);
        c.tol = get_real(j, "tol", c.tol, at);
        c.pm_K = get_real(j, "pm_K", c.pm_K, at);
        c.eps = get_real(j, "eps", c.eps, at);
        c.sigma_min = get_real(j, "sigma_min", c.sigma_min, at);
        if (j.contains("local_ops")) c.local_ops = ops_from_json(j.at("local_ops"), at + ".local_ops");
        if (j.contains("global_ops")) c.global_ops = ops_from_json(j.at("global_ops"), at + ".global_ops");
        return PdeStage{c};
    }
    if (type == "operator") {
        require_keys(j, at, {"type", "operator"});
        if (!j.contains("operator")) config_error(at + ": missing \"operator\"");
        return OperatorStage{operator_from_json(j.at("operator"), at + ".operator")};
    }
    if (type == "xyz-cast-removal") {
        require_keys(j, at, {"type", "srgb_transfer"});
        return XyzCastStage{ColourOptions{get_bool(j, "srgb_transfer", false, at)}};
    }
    if (type == "fuzzy-homomorphic") {
        require_keys(j, at,
                     {"type", "gamma_low", "gamma_high", "sharpness_c", "cutoff_frac", "log_floor",
                      "fuzzy_slope", "fuzzy_center", "fuzzy_enabled", "trigger", "dark_mean", "faded_range"});
        HomomorphicStage s;
        HomomorphicParams& p = s.params;
        p.gamma_low = get_real(j, "gamma_low", p.gamma_low, at);
        p.gamma_high = get_real(j, "gamma_high", p.gamma_high, at);
        p.sharpness_c = get_real(j, "sharpness_c", p.sharpness_c, at);
        p.cutoff_frac = get_real(j, "cutoff_frac", p.cutoff_frac, at);
        p.log_floor = get_real(j, "log_floor", p.log_floor, at);
        p.fuzzy_slope = get_real(j, "fuzzy_slope", p.fuzzy_slope, at);
        if (j.contains("fuzzy_center") && !j.at("fuzzy_center").is_null()) {
            p.fuzzy_center = get_real(j, "fuzzy_center", 0.5, at);
        }
        p.fuzzy_enabled = get_bool(j, "fuzzy_enabled", p.fuzzy_enabled, at);
        s.trigger = trigger_from_json(j, s.trigger, at);
        return s;
    }
    if (type == "pwl-finisher") {
        require_keys(j, at, {"type", "p_low_frac", "p_high_frac", "trigger", "dark_mean", "faded_range"});
        FinisherStage s;
        s.p_low_frac = get_real(j, "p_low_frac", s.p_low_frac, at);
        s.p_high_frac = get_real(j, "p_high_frac", s.p_high_frac, at);
        s.trigger = trigger_from_json(j, s.trigger, at);
        return s;
    }
    config_error(where + ": unknown stage type '" + type + "'");
}

json spec_to_json(const PipelineSpec& spec) {
    json stages = json::array();
    for (const Stage& s : spec.stages) stages.push_back(stage_to_json(s));
    return json{{"name", spec.name}, {"stages", stages}};
}

PipelineSpec spec_from_json(const json& j) {
    require_keys(j, "pipeline", {"name", "stages"});
    PipelineSpec spec;
    spec.name = get_string(j, "name", "custom", "pipeline");
    if (!j.contains("stages") || !j.at("stages").is_array()) {
        config_error("pipeline: \"stages\" must be an array");
    }
    const json& stages = j.at("stages");
    for (std::size_t i = 0; i < stages.size(); ++i) {
        spec.stages.push_back(stage_from_json(stages[i], "stages[" + std::to_string(i) + "]"));
    }
    try {
        spec.validate();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidConfig) throw;
        config_error(e.what());
    }
    return spec;
}

// Maps the first component of a dotted override key to the JSON objects it targets.
void collect_targets(json& root, const std::string& group, std::vector<json*>& out) {
    auto match_op = [&](json& op) {
        if (op.is_object() && op.value("op", std::string{}) == group) out.push_back(&op);
    };
    for (json& stage : root["stages"]) {
        const std::string type = stage.value("type", std::string{});
        if (group == "pde" && type == "pde-evolve") out.push_back(&stage);
        if (group == "xyz" && type == "xyz-cast-removal") out.push_back(&stage);
        if (group == "homomorphic" && type == "fuzzy-homomorphic") out.push_back(&stage);
        if (group == "finisher" && type == "pwl-finisher") out.push_back(&stage);
        if (type == "pde-evolve") {
            for (json& op : stage["local_ops"]) match_op(op);
            for (json& op : stage["global_ops"]) match_op(op);
        }
        if (type == "operator") match_op(stage["operator"]);
    }
}

json parse_override_value(const std::string& text) {
    json v = json::parse(text, nullptr, false);
    if (v.is_discarded()) return text;
    return v;
}

}  // namespace

std::string pipeline_to_config(const PipelineSpec& spec) { return spec_to_json(spec).dump(2) + "\n"; }

PipelineSpec pipeline_from_config(const std::string& text) {
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) config_error("pipeline config is not valid JSON");
    return spec_from_json(j);
}

PipelineSpec load_pipeline_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return pipeline_from_config(text.str());
}

PipelineSpec apply_overrides(const PipelineSpec& spec,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
    json root = spec_to_json(spec);
    for (const auto& [key, value] : overrides) {
        const auto dot = key.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == key.size() ||
            key.find('.', dot + 1) != std::string::npos) {
            config_error("override key '" + key + "' must look like group.field");
        }
        const std::string group = key.substr(0, dot);
        const std::string field = key.substr(dot + 1);
        if (field == "type" || field == "op") config_error("override key '" + key + "' is not settable");
        std::vector<json*> targets;
        collect_targets(root, group, targets);
        if (targets.empty()) {
            config_error("override '" + key + "' matches no stage of pipeline '" + spec.name + "'");
        }
        for (json* t : targets) (*t)[field] = parse_override_value(value);
    }
    return spec_from_json(root);
}

}  // namespace uwpde
