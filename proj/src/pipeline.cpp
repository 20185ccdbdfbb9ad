#include "uwpde/pipeline.hpp"

#include "uwpde/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace uwpde {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate_operator(const OperatorSpec& op) {
    std::visit(Overloaded{
                   [](const ClaheParams& p) { p.validate(); },
                   [](const PwlSpec& s) {
                       if (s.points.empty()) {
                           StretchParams{s.p_low_frac, s.p_high_frac, true}.validate();
                       } else {
                           PwlMap check(s.points);
                       }
                   },
                   [](const StretchSpec& s) { s.params.validate(); },
                   [](const GocParams& p) { p.validate(); },
               },
               op);
}

void validate_trigger(const TriggerParams& t) {
    if (!std::isfinite(t.dark_mean) || !std::isfinite(t.faded_range)) {
        throw Error(ErrorCode::InvalidParameter, "trigger thresholds must be finite");
    }
    StretchParams{t.p_low_frac, t.p_high_frac, true}.validate();
}

}  // namespace

bool is_dark_or_faded(const ImageBuffer& buf, const TriggerParams& t) {
    const ImageBuffer lum = luminance(buf);
    const ChannelStats s = stats_of(lum.plane(0), kDefaultBins, t.p_low_frac, t.p_high_frac);
    return s.mean < t.dark_mean || (s.p_high - s.p_low) < t.faded_range;
}

std::string stage_label(const Stage& stage) {
    return std::visit(Overloaded{
                          [](const PdeStage&) -> std::string { return "pde-evolve"; },
                          [](const OperatorStage& s) -> std::string {
                              return "operator:" + operator_name(s.op);
                          },
                          [](const XyzCastStage&) -> std::string { return "xyz-cast-removal"; },
                          [](const HomomorphicStage&) -> std::string { return "fuzzy-homomorphic"; },
                          [](const FinisherStage&) -> std::string { return "pwl-finisher"; },
                      },
                      stage);
}

void PipelineSpec::validate() const {
    if (stages.empty()) {
        throw Error(ErrorCode::InvalidConfig, "pipeline '" + name + "' has no stages");
    }
    for (const Stage& stage : stages) {
        std::visit(Overloaded{
                       [](const PdeStage& s) {
                           check_gain_budget(s.cfg);
                           for (const auto& op : s.cfg.local_ops) validate_operator(op);
                           for (const auto& op : s.cfg.global_ops) validate_operator(op);
                       },
                       [](const OperatorStage& s) { validate_operator(s.op); },
                       [](const XyzCastStage&) {},
                       [](const HomomorphicStage& s) {
                           s.params.validate();
                           validate_trigger(s.trigger);
                       },
                       [](const FinisherStage& s) {
                           StretchParams{s.p_low_frac, s.p_high_frac, true}.validate();
                           validate_trigger(s.trigger);
                       },
                   },
                   stage);
    }
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{
        "pde-clahe-hs",  "pde-clahe-goc2", "pde-clahe-goc3", "pde-clahe-pwl", "pde-clahe-cs",
        "pde-hs-clahe",  "pde-goc2-clahe", "pde-goc3-clahe", "pde-pwl-clahe", "pde-cs-clahe",
        "pa-1",          "pa-2",
    };
    return names;
}

PdeConfig preset_pde_config(std::vector<OperatorSpec> forcing) {
    PdeConfig cfg;
    cfg.model = PdeModel::Eq3;
    cfg.term_mode = TermMode::Residual;
    cfg.lambda_diff = 0.1;
    cfg.lambda_local = 1.0;
    cfg.lambda_global = 0.0;
    cfg.lambda_colour = 0.02;
    cfg.lambda_f = 0.0;
    cfg.local_ops = std::move(forcing);
    cfg.global_ops.clear();
    return cfg;
}

PdeConfig cast_pipeline_pde_config() {
    // Full three-term form: PWL-CLAHE in the local slot, gray-world GOC2 kept
    // as the global operator. The global term is what pulls a residual cast
    // back after per-channel equalization.
    PdeConfig cfg = preset_pde_config({default_operator("pwl"), default_operator("clahe")});
    cfg.lambda_local = 0.5;
    cfg.lambda_global = 0.5;
    cfg.global_ops = {default_operator("goc2")};
    return cfg;
}

PipelineSpec resolve_named(const std::string& name) {
    if (name == "pa-1") {
        return {name,
                {XyzCastStage{}, PdeStage{cast_pipeline_pde_config()}, HomomorphicStage{}, FinisherStage{}}};
    }
    if (name == "pa-2") {
        return {name, {PdeStage{cast_pipeline_pde_config()}, XyzCastStage{}, FinisherStage{}}};
    }
    static const std::vector<std::string> globals{"hs", "goc2", "goc3", "pwl", "cs"};
    if (name.rfind("pde-", 0) == 0) {
        const std::string rest = name.substr(4);
        const auto dash = rest.find('-');
        if (dash != std::string::npos) {
            const std::string first = rest.substr(0, dash);
            const std::string second = rest.substr(dash + 1);
            const bool known = (first == "clahe" && std::count(globals.begin(), globals.end(), second)) ||
                               (second == "clahe" && std::count(globals.begin(), globals.end(), first));
            if (known) {
                return {name,
                        {PdeStage{preset_pde_config({default_operator(first), default_operator(second)})}}};
            }
        }
    }
    throw Error(ErrorCode::UnknownPipeline, "'" + name + "'");
}

PipelineResult run_pipeline(const ImageBuffer& buf, const PipelineSpec& spec) {
    spec.validate();
    require_finite(buf, "run_pipeline");
    PipelineResult result{buf, {}};
    result.report.input = quality_report(buf);
    for (const Stage& stage : spec.stages) {
        StageReport sr;
        sr.stage = stage_label(stage);
        ImageBuffer& img = result.image;
        std::visit(Overloaded{
                       [&](const PdeStage& s) {
                           EvolveResult evolved = evolve(img, s.cfg);
                           img = std::move(evolved.image);
                           result.report.traces.push_back(std::move(evolved.trace));
                       },
                       [&](const OperatorStage& s) { img = apply_operator(img, s.op); },
                       [&](const XyzCastStage& s) { img = xyz_cast_removal(img, s.opts); },
                       [&](const HomomorphicStage& s) {
                           sr.applied = s.trigger.when == Trigger::Always || is_dark_or_faded(img, s.trigger);
                           if (sr.applied) img = fuzzy_homomorphic(img, s.params);
                       },
                       [&](const FinisherStage& s) {
                           sr.applied = s.trigger.when == Trigger::Always || is_dark_or_faded(img, s.trigger);
                           if (sr.applied) img = pwl_apply(img, pwl_from_stats(img, s.p_low_frac, s.p_high_frac));
                       },
                   },
                   stage);
        sr.quality = quality_report(img);
        result.report.stages.push_back(std::move(sr));
    }
    return result;
}

PipelineResult run_pa1(const ImageBuffer& buf) {
    require_colour(buf, "pa-1");
    return run_pipeline(buf, resolve_named("pa-1"));
}

PipelineResult run_pa2(const ImageBuffer& buf) {
    require_colour(buf, "pa-2");
    return run_pipeline(buf, resolve_named("pa-2"));
}

Diagnosis diagnose(const ImageBuffer& buf) {
    require_colour(buf, "diagnose");
    Diagnosis d;
    d.cast_score = cast_score(buf);
    for (int c = 0; c < 3; ++c) {
        d.histograms[static_cast<std::size_t>(c)] = channel_histogram(buf, c, kDefaultBins);
    }
    if (d.cast_score > kCastHintThreshold) {
        d.hint = PipelineFamily::CastRemoval;
        d.suggested = {"pa-1", "pa-2"};
    } else {
        d.hint = PipelineFamily::OperatorOrder;
        d.suggested = {"pde-pwl-clahe", "pde-clahe-pwl"};
    }
    return d;
}

void RunReport::write_csv(std::ostream& os) const {
    os << "stage_index,stage,applied,entropy,rms_contrast,colourfulness,mean_gradient,cast_score\n";
    auto row = [&os](std::size_t index, const std::string& name, bool applied, const QualityReport& q) {
        os << index << ',' << name << ',' << (applied ? 1 : 0) << ',' << format_real(q.entropy) << ','
           << format_real(q.rms_contrast) << ',' << format_real(q.colourfulness) << ','
           << format_real(q.mean_gradient) << ',' << format_real(q.cast_score) << '\n';
    };
    row(0, "input", true, input);
    for (std::size_t i = 0; i < stages.size(); ++i) {
        row(i + 1, stages[i].stage, stages[i].applied, stages[i].quality);
    }
}

void RunReport::write_trace_csv(std::ostream& os) const {
    if (traces.empty()) {
        EvolutionTrace{}.write_csv(os);
        return;
    }
    bool header_done = false;
    for (const EvolutionTrace& t : traces) {
        std::ostringstream part;
        t.write_csv(part);
        std::string text = part.str();
        if (header_done) {
            text.erase(0, text.find('\n') + 1);
        }
        os << text;
        header_done = true;
    }
}

}  // namespace uwpde
