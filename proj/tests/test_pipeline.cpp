#include <doctest.h>

#include "support.hpp"
#include "uwpde/corpus.hpp"
#include "uwpde/error.hpp"
#include "uwpde/pipeline.hpp"

#include <algorithm>
#include <set>
#include <sstream>

using namespace uwpde;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

// Neutral image whose planes all reach 0 and 1.
ImageBuffer neutral_full_range() {
    ImageBuffer img(64, 64, 3);
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            const double v = static_cast<double>((x * 7 + y * 13) % 64) / 63.0;
            for (int c = 0; c < 3; ++c) img(x, y, c) = v;
        }
    }
    return img;
}

}  // namespace

TEST_CASE("preset names resolve") {
    const auto& names = preset_names();
    CHECK(names.size() == 12);
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == 12);
    for (const std::string& n : names) {
        const PipelineSpec a = resolve_named(n);
        CHECK(a.name == n);
        CHECK(a == resolve_named(n));
        CHECK_NOTHROW(a.validate());
    }
    CHECK(code_of([] { resolve_named("pde-xyz-magic"); }) == ErrorCode::UnknownPipeline);
    CHECK(code_of([] { resolve_named("pde-hs-goc2"); }) == ErrorCode::UnknownPipeline);
    CHECK(code_of([] { resolve_named(""); }) == ErrorCode::UnknownPipeline);
}

TEST_CASE("operator-order presets encode application order") {
    const PipelineSpec pc = resolve_named("pde-pwl-clahe");
    REQUIRE(pc.stages.size() == 1);
    const PdeConfig& cfg = std::get<PdeStage>(pc.stages[0]).cfg;
    CHECK(cfg.model == PdeModel::Eq3);
    REQUIRE(cfg.local_ops.size() == 2);
    CHECK(operator_name(cfg.local_ops[0]) == "pwl");
    CHECK(operator_name(cfg.local_ops[1]) == "clahe");

    const PdeConfig& rev = std::get<PdeStage>(resolve_named("pde-clahe-pwl").stages[0]).cfg;
    CHECK(operator_name(rev.local_ops[0]) == "clahe");
    CHECK(operator_name(rev.local_ops[1]) == "pwl");

    const PdeConfig& g3 = std::get<PdeStage>(resolve_named("pde-clahe-goc3").stages[0]).cfg;
    CHECK(std::get<GocParams>(g3.local_ops[1]).variant == 3);
}

TEST_CASE("cast pipelines") {
    const PipelineSpec pa1 = resolve_named("pa-1");
    const PipelineSpec pa2 = resolve_named("pa-2");
    CHECK(pa2.stages.size() < pa1.stages.size());
    std::vector<std::string> l1, l2;
    for (const Stage& s : pa1.stages) l1.push_back(stage_label(s));
    for (const Stage& s : pa2.stages) l2.push_back(stage_label(s));
    CHECK(l1 == std::vector<std::string>{"xyz-cast-removal", "pde-evolve", "fuzzy-homomorphic", "pwl-finisher"});
    CHECK(l2 == std::vector<std::string>{"pde-evolve", "xyz-cast-removal", "pwl-finisher"});
    const PdeConfig& cfg = std::get<PdeStage>(pa2.stages[0]).cfg;
    CHECK(operator_name(cfg.local_ops.at(0)) == "pwl");
    CHECK(operator_name(cfg.local_ops.at(1)) == "clahe");

    CHECK(code_of([] { run_pa1(ImageBuffer(32, 32, 1, 0.3)); }) == ErrorCode::NotColourImage);
    CHECK(code_of([] { run_pa2(ImageBuffer(32, 32, 1, 0.3)); }) == ErrorCode::NotColourImage);
}

TEST_CASE("cast pipelines halve synthetic casts") {
    for (double k : {0.1, 0.2, 0.3}) {
        const ImageBuffer img = synthetic_cast_image(k);
        const double before = cast_score(img);
        CHECK(cast_score(run_pa1(img).image) <= 0.5 * before);
        CHECK(cast_score(run_pa2(img).image) <= 0.5 * before);
    }
}

TEST_CASE("run reports") {
    const ImageBuffer img = synthetic_corpus()[0].image;
    const PipelineResult r = run_pa1(img);
    CHECK(r.report.stages.size() == 4);
    CHECK(r.report.traces.size() == 1);
    CHECK(r.report.input.cast_score == cast_score(img));
    CHECK(r.report.stages.back().quality.cast_score == cast_score(r.image));

    std::ostringstream csv;
    r.report.write_csv(csv);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "stage_index,stage,applied,entropy,rms_contrast,colourfulness,mean_gradient,cast_score");
    std::getline(lines, line);
    CHECK(line.rfind("0,input,", 0) == 0);
    std::getline(lines, line);
    CHECK(line.rfind("1,xyz-cast-removal,1,", 0) == 0);

    std::ostringstream trace;
    r.report.write_trace_csv(trace);
    CHECK(trace.str().rfind("iter,", 0) == 0);

    PipelineSpec plain{"plain", {XyzCastStage{}}};
    std::ostringstream empty;
    run_pipeline(img, plain).report.write_trace_csv(empty);
    const std::string header_only = empty.str();
    CHECK(std::count(header_only.begin(), header_only.end(), '\n') == 1);
}

TEST_CASE("run pipeline matches manual composition") {
    const ImageBuffer img = synthetic_corpus()[7].image;
    const PipelineSpec pc = resolve_named("pde-pwl-clahe");
    CHECK(run_pipeline(img, pc).image == evolve(img, std::get<PdeStage>(pc.stages[0]).cfg).image);

    const PipelineSpec two{"two", {XyzCastStage{}, OperatorStage{default_operator("hs")}}};
    CHECK(run_pipeline(img, two).image == apply_operator(xyz_cast_removal(img), default_operator("hs")));

    const PipelineSpec ident{"ident", {OperatorStage{PwlSpec{{{0.0, 0.0}, {1.0, 1.0}}, 0.01, 0.99}}}};
    CHECK(run_pipeline(img, ident).image == img);

    CHECK(code_of([&] { run_pipeline(img, PipelineSpec{"empty", {}}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("neutral full-range image") {
    const ImageBuffer img = neutral_full_range();
    CHECK(max_abs_diff(xyz_cast_removal(img), img) <= 1e-6);
    const PipelineResult r = run_pa1(img);
    CHECK_FALSE(r.report.stages.back().applied);
    CHECK(r.report.stages[2].applied);

    const PipelineResult r2 = run_pa2(img);
    const PdeConfig cfg = std::get<PdeStage>(resolve_named("pa-2").stages[0]).cfg;
    const ImageBuffer after_pde = evolve(img, cfg).image;
    CHECK(max_abs_diff(xyz_cast_removal(after_pde), after_pde) <= 1e-6);
    CHECK(max_abs_diff(after_pde, img) > 1e-3);
}

TEST_CASE("dark or faded trigger") {
    TriggerParams t{Trigger::DarkOrFaded};
    CHECK(is_dark_or_faded(ImageBuffer(8, 8, 3, 0.2), t));
    CHECK(is_dark_or_faded(ImageBuffer(8, 8, 3, 0.6), t));  // flat counts as faded
    CHECK_FALSE(is_dark_or_faded(neutral_full_range(), t));
    ImageBuffer narrow(16, 16, 3);
    for (int i = 0; i < 256; ++i) {
        for (int c = 0; c < 3; ++c) narrow.plane(c)[static_cast<std::size_t>(i)] = 0.4 + 0.3 * (i % 16) / 15.0;
    }
    CHECK(is_dark_or_faded(narrow, t));
    t.faded_range = 0.2;
    CHECK_FALSE(is_dark_or_faded(narrow, t));
}

TEST_CASE("diagnose") {
    const Diagnosis gray = diagnose(ImageBuffer(8, 8, 3, 0.5));
    CHECK(gray.cast_score == 0.0);
    CHECK(gray.hint == PipelineFamily::OperatorOrder);
    CHECK(gray.histograms[0].counts == gray.histograms[2].counts);

    ImageBuffer cast(2, 2, 3);
    const double means[3] = {0.2, 0.5, 0.8};
    for (int c = 0; c < 3; ++c) {
        for (double& v : cast.plane(c)) v = means[c];
    }
    const Diagnosis d = diagnose(cast);
    CHECK(d.hint == PipelineFamily::CastRemoval);
    CHECK(d.suggested == std::vector<std::string>{"pa-1", "pa-2"});

    // exactly at the threshold stays with the operator-order family
    ImageBuffer edge(2, 2, 3, 0.0);
    for (double& v : edge.plane(2)) v = kCastHintThreshold;
    REQUIRE(cast_score(edge) == kCastHintThreshold);
    CHECK(diagnose(edge).hint == PipelineFamily::OperatorOrder);

    CHECK(code_of([] { diagnose(ImageBuffer(2, 2, 1)); }) == ErrorCode::NotColourImage);
}

TEST_CASE("operator order is observable") {
    const auto corpus = synthetic_corpus();
    const PipelineSpec a = resolve_named("pde-pwl-clahe"), b = resolve_named("pde-clahe-pwl");
    double best = 0.0;
    for (std::size_t i = 0; i < corpus.size(); i += 6) {
        best = std::max(best, max_abs_diff(run_pipeline(corpus[i].image, a).image,
                                           run_pipeline(corpus[i].image, b).image));
    }
    CHECK(best > 1e-3);
}

TEST_CASE("every preset runs on corpus samples") {
    const auto corpus = synthetic_corpus();
    for (const std::string& name : preset_names()) {
        const PipelineSpec spec = resolve_named(name);
        for (std::size_t i : {1u, 14u}) {
            const PipelineResult r = run_pipeline(corpus[i].image, spec);
            CHECK(r.image.all_finite());
            CHECK(std::all_of(r.image.values().begin(), r.image.values().end(),
                              [](double v) { return v >= 0.0 && v <= 1.0; }));
            CHECK(r.image == run_pipeline(corpus[i].image, spec).image);
        }
    }
}
