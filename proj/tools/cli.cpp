#include "cli.hpp"

#include "render.hpp"
#include "uwpde/analysis.hpp"
#include "uwpde/corpus.hpp"
#include "uwpde/error.hpp"
#include "uwpde/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace uwpde::cli {

namespace {

/// Runs task(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& task) {
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) task(i);
        });
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
}

void ensure_writable_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string());
    }
    const fs::path probe = dir / ".uwpde-write-probe";
    {
        std::ofstream test(probe);
        if (!test) throw Error(ErrorCode::IoError, "output directory " + dir.string() + " is not writable");
    }
    fs::remove(probe, ec);
}

std::vector<fs::path> sorted_unique_inputs(std::vector<fs::path> inputs) {
    std::sort(inputs.begin(), inputs.end());
    std::set<std::string> stems;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (i > 0 && inputs[i] == inputs[i - 1]) {
            throw Error(ErrorCode::InvalidConfig, "input listed twice: " + inputs[i].string());
        }
        if (!stems.insert(inputs[i].stem().string()).second) {
            throw Error(ErrorCode::InvalidConfig, "two inputs share the file stem '" +
                                                      inputs[i].stem().string() + "'");
        }
    }
    return inputs;
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char ch : text) {
        if (ch == '"') quoted += '"';
        quoted += ch == '\n' ? ' ' : ch;
    }
    return quoted + "\"";
}

std::string quality_fields(const std::optional<QualityReport>& q) {
    if (!q) return ",,,,";
    return format_real(q->entropy) + "," + format_real(q->rms_contrast) + "," + format_real(q->colourfulness) +
           "," + format_real(q->mean_gradient) + "," + format_real(q->cast_score);
}

}  // namespace

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw Error(ErrorCode::InvalidConfig, "expected KEY=VALUE, got '" + text + "'");
    }
    return {text.substr(0, eq), text.substr(eq + 1)};
}

// ---------------------------------------------------------------------------
// enhance
// ---------------------------------------------------------------------------

int cmd_enhance(const RunManifest& manifest, std::ostream& out, std::ostream& err) {
    PipelineSpec spec;
    std::vector<fs::path> inputs;
    try {
        if (manifest.inputs.empty()) {
            throw Error(ErrorCode::InvalidConfig, "no input images given");
        }
        if (manifest.bit_depth != 8 && manifest.bit_depth != 16) {
            throw Error(ErrorCode::InvalidConfig, "--bit-depth must be 8 or 16");
        }
        spec = manifest.config.empty() ? resolve_named(manifest.pipeline) : load_pipeline_config(manifest.config);
        spec = apply_overrides(spec, manifest.overrides);
        inputs = sorted_unique_inputs(manifest.inputs);
        ensure_writable_dir(manifest.out_dir);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::IoError ? kExitFailure : kExitUsage;
    }

    struct Outcome {
        bool ok = false;
        fs::path output;
        std::optional<QualityReport> quality;
        std::string reason;
    };
    std::vector<Outcome> outcomes(inputs.size());
    parallel_for(inputs.size(), manifest.jobs, [&](std::size_t i) {
        Outcome& o = outcomes[i];
        try {
            const ImageBuffer image = load_image(inputs[i]);
            const PipelineResult result = run_pipeline(image, spec);
            const std::string base = inputs[i].stem().string() + "." + spec.name;
            o.output = manifest.out_dir / (base + ".png");
            save_image(result.image, o.output, manifest.bit_depth);
            std::ostringstream report;
            result.report.write_csv(report);
            write_text(manifest.out_dir / (base + ".report.csv"), report.str());
            std::ostringstream trace;
            result.report.write_trace_csv(trace);
            write_text(manifest.out_dir / (base + ".trace.csv"), trace.str());
            o.quality = result.report.stages.back().quality;
            o.ok = true;
        } catch (const std::exception& e) {
            o.reason = e.what();
        }
    });

    std::ostringstream summary;
    summary << "input,status,output,entropy,rms_contrast,colourfulness,mean_gradient,cast_score,reason\n";
    int failures = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Outcome& o = outcomes[i];
        summary << csv_field(inputs[i].string()) << ',' << (o.ok ? "ok" : "failed") << ','
                << csv_field(o.ok ? o.output.filename().string() : "") << ',' << quality_fields(o.quality) << ','
                << csv_field(o.reason) << '\n';
        if (o.ok) {
            out << "ok      " << inputs[i].string() << " -> " << o.output.string() << '\n';
        } else {
            ++failures;
            err << "failed  " << inputs[i].string() << ": " << o.reason << '\n';
        }
    }
    try {
        write_text(manifest.out_dir / "enhance_summary.csv", summary.str());
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    out << inputs.size() - static_cast<std::size_t>(failures) << " succeeded, " << failures << " failed\n";
    return failures == 0 ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

int cmd_analyze(const fs::path& input, const fs::path& out_csv, std::ostream& out, std::ostream& err) {
    try {
        const ImageBuffer image = load_image(input);
        if (image.channels() != 3) {
            err << "error: analysis requires 3 channels, " << input.string() << " has "
                << image.channels() << '\n';
            return kExitFailure;
        }
        const Diagnosis d = diagnose(image);
        if (out_csv.has_parent_path()) ensure_writable_dir(out_csv.parent_path());

        std::ostringstream csv;
        csv << "bin,bin_center,red,green,blue\n";
        for (int b = 0; b < kDefaultBins; ++b) {
            const auto ub = static_cast<std::size_t>(b);
            csv << b << ',' << format_real(d.histograms[0].bin_center(b)) << ',' << d.histograms[0].counts[ub]
                << ',' << d.histograms[1].counts[ub] << ',' << d.histograms[2].counts[ub] << '\n';
        }
        write_text(out_csv, csv.str());
        fs::path plot = out_csv;
        plot.replace_extension(".png");
        save_image(render_histogram_plot(d.histograms), plot, 8);

        out << "cast_score " << format_real(d.cast_score) << '\n';
        out << "hint " << (d.hint == PipelineFamily::CastRemoval ? "cast-removal" : "operator-order") << ':';
        for (const std::string& s : d.suggested) out << ' ' << s;
        out << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

int cmd_compare(const std::vector<fs::path>& inputs_in, const std::vector<std::string>& pipelines,
                const fs::path& out_dir, int jobs, std::ostream& out, std::ostream& err,
                const std::vector<std::pair<std::string, std::string>>& overrides) {
    if (inputs_in.empty() || pipelines.empty()) {
        err << "usage: compare needs at least one image and at least one --pipeline\n";
        return kExitUsage;
    }
    std::vector<PipelineSpec> specs;
    std::vector<fs::path> inputs;
    try {
        for (const std::string& name : pipelines) {
            specs.push_back(resolve_named(name));
            if (!overrides.empty()) specs.back() = apply_overrides(specs.back(), overrides);
        }
        inputs = sorted_unique_inputs(inputs_in);
        ensure_writable_dir(out_dir);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::IoError ? kExitFailure : kExitUsage;
    }

    struct Cell {
        std::optional<QualityReport> quality;
        std::string reason;
    };
    struct ImageRows {
        std::vector<Cell> cells;  // baseline first
        bool montage_ok = false;
        std::string montage_error;
    };
    std::vector<ImageRows> rows(inputs.size());
    parallel_for(inputs.size(), jobs, [&](std::size_t i) {
        ImageRows& r = rows[i];
        r.cells.resize(specs.size() + 1);
        ImageBuffer original;
        try {
            original = load_image(inputs[i]);
            r.cells[0].quality = quality_report(original);
        } catch (const std::exception& e) {
            for (Cell& c : r.cells) c.reason = e.what();
            r.montage_error = e.what();
            return;
        }
        std::vector<ImageBuffer> panels{original};
        std::vector<std::string> labels{"original"};
        for (std::size_t p = 0; p < specs.size(); ++p) {
            try {
                PipelineResult res = run_pipeline(original, specs[p]);
                r.cells[p + 1].quality = res.report.stages.back().quality;
                panels.push_back(std::move(res.image));
                labels.push_back(specs[p].name);
            } catch (const std::exception& e) {
                r.cells[p + 1].reason = e.what();
            }
        }
        try {
            save_image(render_montage(panels, labels), out_dir / (inputs[i].stem().string() + ".montage.png"), 8);
            r.montage_ok = true;
        } catch (const std::exception& e) {
            r.montage_error = e.what();
        }
    });

    std::ostringstream csv;
    csv << "image_id,pipeline,entropy,rms_contrast,colourfulness,mean_gradient,cast_score,reason\n";
    int failures = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const std::string id = csv_field(inputs[i].stem().string());
        for (std::size_t p = 0; p <= specs.size(); ++p) {
            const Cell& cell = rows[i].cells[p];
            if (!cell.quality) ++failures;
            csv << id << ',' << (p == 0 ? std::string("original") : specs[p - 1].name) << ','
                << quality_fields(cell.quality) << ',' << csv_field(cell.reason) << '\n';
        }
        if (!rows[i].montage_ok) {
            ++failures;
            err << "failed  " << inputs[i].string() << ": " << rows[i].montage_error << '\n';
        }
    }
    try {
        write_text(out_dir / "compare.csv", csv.str());
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    out << "wrote " << (out_dir / "compare.csv").string() << " (" << inputs.size() << " images x "
        << specs.size() + 1 << " rows)\n";
    return failures == 0 ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// presets / corpus
// ---------------------------------------------------------------------------

int cmd_presets(const std::string& dump_name, std::ostream& out, std::ostream& err) {
    try {
        if (!dump_name.empty()) {
            out << pipeline_to_config(resolve_named(dump_name));
            return kExitOk;
        }
        for (const std::string& name : preset_names()) {
            const PipelineSpec spec = resolve_named(name);
            out << name << ':';
            for (const Stage& s : spec.stages) out << ' ' << stage_label(s);
            out << '\n';
        }
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::UnknownPipeline ? kExitUsage : kExitFailure;
    }
}

int cmd_seed_corpus(const fs::path& out_dir, std::ostream& out, std::ostream& err) {
    try {
        ensure_writable_dir(out_dir);
        for (const CorpusImage& item : synthetic_corpus()) {
            const fs::path path = out_dir / (item.name + ".png");
            save_image(item.image, path, 8);
            out << path.string() << '\n';
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace uwpde::cli
