#pragma once

#include "uwpde/analysis.hpp"
#include "uwpde/colour.hpp"
#include "uwpde/contrast.hpp"
#include "uwpde/image.hpp"
#include "uwpde/pde.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace uwpde {

enum class Trigger { Always, DarkOrFaded };

/// Condition for the optional stages: mean luminance below dark_mean, or
/// luminance percentile spread (p_low_frac..p_high_frac) below faded_range.
struct TriggerParams {
    Trigger when = Trigger::Always;
    double dark_mean = 0.35;
    double faded_range = 0.5;
    double p_low_frac = 0.01;
    double p_high_frac = 0.99;

    friend bool operator==(const TriggerParams&, const TriggerParams&) = default;
};

bool is_dark_or_faded(const ImageBuffer& buf, const TriggerParams& t);

struct PdeStage {
    PdeConfig cfg;
    friend bool operator==(const PdeStage&, const PdeStage&) = default;
};

struct OperatorStage {
    OperatorSpec op;
    friend bool operator==(const OperatorStage&, const OperatorStage&) = default;
};

struct XyzCastStage {
    ColourOptions opts;
    friend bool operator==(const XyzCastStage& a, const XyzCastStage& b) {
        return a.opts.srgb_transfer == b.opts.srgb_transfer;
    }
};

struct HomomorphicStage {
    HomomorphicParams params;
    TriggerParams trigger;
    friend bool operator==(const HomomorphicStage&, const HomomorphicStage&) = default;
};

/// Percentile PWL stretch applied when the image is dark or faded.
struct FinisherStage {
    double p_low_frac = 0.01;
    double p_high_frac = 0.99;
    TriggerParams trigger{Trigger::DarkOrFaded};
    friend bool operator==(const FinisherStage&, const FinisherStage&) = default;
};

using Stage = std::variant<PdeStage, OperatorStage, XyzCastStage, HomomorphicStage, FinisherStage>;

std::string stage_label(const Stage& stage);

struct PipelineSpec {
    std::string name;
    std::vector<Stage> stages;

    void validate() const;
    friend bool operator==(const PipelineSpec&, const PipelineSpec&) = default;
};

struct StageReport {
    std::string stage;
    bool applied = true;
    QualityReport quality;
};

struct RunReport {
    QualityReport input;
    std::vector<StageReport> stages;
    /// One trace per PDE stage, in stage order.
    std::vector<EvolutionTrace> traces;

    void write_csv(std::ostream& os) const;
    /// Concatenated PDE traces; header only when the pipeline has no PDE stage.
    void write_trace_csv(std::ostream& os) const;
};

struct PipelineResult {
    ImageBuffer image;
    RunReport report;
};

/// The ten operator-order presets followed by pa-1 and pa-2.
const std::vector<std::string>& preset_names();

/// Named presets. "pde-A-B" evolves the residual Eq3 model whose fidelity
/// operator is the cascade A then B (name order is application order).
PipelineSpec resolve_named(const std::string& name);

/// Evolution settings shared by every preset, with the given forcing cascade.
PdeConfig preset_pde_config(std::vector<OperatorSpec> forcing);

/// PDE stage of pa-1/pa-2: PWL-CLAHE local forcing plus GOC2 global forcing,
/// gains 0.5/0.5.
PdeConfig cast_pipeline_pde_config();

PipelineResult run_pipeline(const ImageBuffer& buf, const PipelineSpec& spec);

/// xyz cast removal -> PDE PWL-CLAHE -> fuzzy homomorphic -> conditional PWL finisher.
PipelineResult run_pa1(const ImageBuffer& buf);

/// PDE PWL-CLAHE -> xyz cast removal -> conditional PWL finisher.
PipelineResult run_pa2(const ImageBuffer& buf);

inline constexpr double kCastHintThreshold = 0.15;

enum class PipelineFamily { OperatorOrder, CastRemoval };

struct Diagnosis {
    double cast_score = 0.0;
    std::array<Histogram, 3> histograms;
    PipelineFamily hint = PipelineFamily::OperatorOrder;
    std::vector<std::string> suggested;
};

/// Hint only; never changes processing. cast_score > 0.15 suggests pa-1/pa-2.
Diagnosis diagnose(const ImageBuffer& buf);

// ---------------------------------------------------------------------------
// Config files (JSON). See README for the schema.
// ---------------------------------------------------------------------------

std::string pipeline_to_config(const PipelineSpec& spec);
PipelineSpec pipeline_from_config(const std::string& text);
PipelineSpec load_pipeline_config(const std::filesystem::path& path);

/// Dotted-key overrides such as pde.dt=0.05 or clahe.clip_factor=inf.
/// Every key must name a known field of at least one stage; the result is
/// revalidated. Throws InvalidConfig.
PipelineSpec apply_overrides(const PipelineSpec& spec,
                             const std::vector<std::pair<std::string, std::string>>& overrides);

}  // namespace uwpde
