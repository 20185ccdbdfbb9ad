#include "cli.hpp"

#include "uwpde/error.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace uwpde::cli;

    CLI::App app{"PDE-based underwater image enhancement"};
    app.require_subcommand(0, 1);

    bool seed_corpus = false;
    fs::path seed_out;
    app.add_flag("--seed-corpus", seed_corpus, "Write the bundled 24-image synthetic corpus to --out");
    app.add_option("--out", seed_out, "Output directory for --seed-corpus");

    RunManifest manifest;
    std::vector<std::string> enhance_sets;
    auto* enhance = app.add_subcommand("enhance", "Enhance images with a preset or configured pipeline");
    enhance->add_option("inputs", manifest.inputs, "Input images (PNG/PPM)")->required();
    auto* pipeline_opt = enhance->add_option("--pipeline", manifest.pipeline, "Preset name (see `presets`)");
    auto* config_opt = enhance->add_option("--config", manifest.config, "Pipeline config file (JSON)");
    pipeline_opt->excludes(config_opt);
    enhance->add_option("--set", enhance_sets, "Override KEY=VALUE, e.g. pde.dt=0.05 (repeatable)");
    enhance->add_option("--out", manifest.out_dir, "Output directory")->required();
    enhance->add_option("--bit-depth", manifest.bit_depth, "Output bit depth")->check(CLI::IsMember({8, 16}));
    enhance->add_option("--jobs", manifest.jobs, "Worker threads")->check(CLI::PositiveNumber);

    fs::path analyze_in;
    fs::path analyze_out;
    auto* analyze = app.add_subcommand("analyze", "Per-channel histograms, cast score and pipeline hint");
    analyze->add_option("input", analyze_in, "Colour image")->required();
    analyze->add_option("--out", analyze_out, "Histogram CSV path (plot written next to it as .png)")->required();

    std::vector<fs::path> compare_in;
    std::vector<std::string> compare_pipelines;
    std::vector<std::string> compare_sets;
    fs::path compare_out;
    int compare_jobs = 1;
    auto* compare = app.add_subcommand("compare", "Quality metrics and montages for several pipelines");
    compare->add_option("inputs", compare_in, "Input images");
    compare->add_option("--pipeline", compare_pipelines, "Preset name (repeatable)");
    compare->add_option("--set", compare_sets, "Override KEY=VALUE applied to every pipeline (repeatable)");
    compare->add_option("--out", compare_out, "Output directory")->required();
    compare->add_option("--jobs", compare_jobs, "Worker threads")->check(CLI::PositiveNumber);

    std::string dump_name;
    auto* presets = app.add_subcommand("presets", "List named pipelines or dump one as a config file");
    presets->add_option("--dump", dump_name, "Print the config of this preset");

    CLI11_PARSE(app, argc, argv);

    try {
        if (seed_corpus) {
            if (seed_out.empty()) {
                std::cerr << "error: --seed-corpus needs --out DIR\n";
                return kExitUsage;
            }
            return cmd_seed_corpus(seed_out, std::cout, std::cerr);
        }
        if (*enhance) {
            if (manifest.pipeline.empty() && manifest.config.empty()) {
                std::cerr << "error: enhance needs --pipeline or --config\n";
                return kExitUsage;
            }
            for (const auto& s : enhance_sets) manifest.overrides.push_back(parse_assignment(s));
            return cmd_enhance(manifest, std::cout, std::cerr);
        }
        if (*analyze) {
            return cmd_analyze(analyze_in, analyze_out, std::cout, std::cerr);
        }
        if (*compare) {
            std::vector<std::pair<std::string, std::string>> overrides;
            for (const auto& s : compare_sets) overrides.push_back(parse_assignment(s));
            return cmd_compare(compare_in, compare_pipelines, compare_out, compare_jobs, std::cout, std::cerr,
                               overrides);
        }
        if (*presets) {
            return cmd_presets(dump_name, std::cout, std::cerr);
        }
    } catch (const uwpde::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    std::cout << app.help();
    return kExitUsage;
}
