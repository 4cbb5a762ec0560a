// SPDX-License-Identifier: Apache-2.0
//
// twrhar command line: dataset generation, training, the full experiment
// protocol, bound evaluation from checkpoints, and gap reporting.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "twr/bound.hpp"
#include "twr/config.hpp"
#include "twr/harness.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset = "desk";
    std::string out_dir;
    double delta = -1.0;  // negative: keep config value
    long long seed = -1;  // negative: keep config value
};

twr::ExperimentConfig build_config(const CommonOpts& opts) {
    twr::ExperimentConfig cfg;
    if (opts.preset == "desk") cfg = twr::desk_preset();
    else if (opts.preset == "paper") cfg = twr::paper_preset();
    else throw twr::DataError("unknown preset: " + opts.preset);
    if (!opts.config_path.empty())
        twr::apply_config(cfg, twr::parse_config_file(opts.config_path));
    if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
    if (opts.delta > 0.0) cfg.delta = opts.delta;
    if (opts.seed >= 0) cfg.dataset_seed = std::uint64_t(opts.seed);
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "flat key = value config file");
    cmd->add_option("--preset", opts.preset, "desk or paper scale")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--delta", opts.delta, "confidence level for the bound");
    cmd->add_option("--seed", opts.seed, "seed override");
}

int cmd_gen(const CommonOpts& opts) {
    const twr::ExperimentConfig cfg = build_config(opts);
    const twr::DatasetManifest manifest = twr::gen_dataset(cfg);
    std::printf("wrote %zu samples to %s\n", manifest.samples.size(),
                manifest.data_path.c_str());
    return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& variant_str) {
    twr::ExperimentConfig cfg = build_config(opts);
    const twr::Variant variant =
        variant_str == "full" ? twr::Variant::full : twr::Variant::reduced;
    if (opts.seed >= 0) cfg.seeds = {std::uint64_t(opts.seed)};

    const twr::DatasetManifest manifest = twr::load_manifest(cfg.output_dir);
    const twr::Dataset data = twr::load_dataset(manifest, variant);
    twr::TrainConfig tc = cfg.train;
    tc.seed = cfg.seeds.front();
    twr::MLPModel model = twr::make_experiment_mlp(data.d_in, tc.seed);
    const twr::TrainTrace trace = twr::train(model, data, tc);

    namespace fs = std::filesystem;
    fs::create_directories(fs::path(cfg.output_dir) / "runs");
    const std::string base = cfg.output_dir;
    const auto curves = twr::run_file(base, "curves", variant, tc.seed, ".csv");
    twr::write_curves(curves, trace);
    twr::write_steps(twr::run_file(base, "steps", variant, tc.seed, ".csv"),
                             trace);
    twr::write_meta(twr::run_file(base, "meta", variant, tc.seed, ".csv"),
                            trace);
    twr::save_model(model, twr::run_file(base, "checkpoint", variant, tc.seed, ".mlp"));

    const auto& last = trace.evals.back();
    std::printf("seed %llu %s: train %.4f val %.4f test1 %.4f test2 %.4f (curves: %s)\n",
                (unsigned long long)tc.seed, twr::variant_name(variant), last.train.accuracy,
                last.val.accuracy, last.test1.accuracy, last.test2.accuracy, curves.c_str());
    return 0;
}

int cmd_experiment(const CommonOpts& opts) {
    const twr::ExperimentConfig cfg = build_config(opts);
    twr::DatasetManifest manifest;
    namespace fs = std::filesystem;
    if (fs::exists(fs::path(cfg.output_dir) / "dataset" / "manifest.csv")) {
        manifest = twr::load_manifest(cfg.output_dir);
        std::printf("reusing dataset with %zu samples\n", manifest.samples.size());
    } else {
        manifest = twr::gen_dataset(cfg);
        std::printf("generated %zu samples\n", manifest.samples.size());
    }
    const twr::RunArtifacts artifacts = twr::run_experiment(manifest, cfg);
    for (const auto& r : artifacts.reports)
        std::printf("seed %llu: GEB %.6g GEB_reduced %.6g ratio %.6g gap_full %.4f "
                    "gap_reduced %.4f\n",
                    (unsigned long long)r.seed, r.geb_full, r.geb_reduced, r.ratio,
                    r.gap_full.loss_gap, r.gap_reduced.loss_gap);
    std::printf("artifacts under %s\n", cfg.output_dir.c_str());
    return 0;
}

int cmd_bound(const CommonOpts& opts) {
    const twr::ExperimentConfig cfg = build_config(opts);
    bool wrote = false;
    for (const std::uint64_t seed : cfg.seeds) {
        std::array<twr::BoundParams, 2> params;
        std::array<twr::GapSummary, 2> gaps;
        bool have_both = true;
        for (const twr::Variant variant : {twr::Variant::full, twr::Variant::reduced}) {
            const std::string ckpt =
                twr::run_file(cfg.output_dir, "checkpoint", variant, seed, ".mlp");
            const std::string meta =
                twr::run_file(cfg.output_dir, "meta", variant, seed, ".csv");
            if (!std::filesystem::exists(ckpt) || !std::filesystem::exists(meta)) {
                have_both = false;
                break;
            }
            const twr::MLPModel model = twr::load_model(ckpt);
            twr::TrainTrace trace;
            twr::TrainTrace::EvalPoint e{};
            for (const auto& row : twr::read_csv(meta)) {
                if (row.size() != 2) continue;
                const std::string& k = row[0];
                if (k == "n_rounds") trace.n_rounds = std::stoull(row[1]);
                else if (k == "m_train") trace.m_train = std::stoull(row[1]);
                else if (k == "train_loss") e.train.mean_loss = std::stod(row[1]);
                else if (k == "val_acc") e.val.accuracy = std::stod(row[1]);
                else if (k == "test1_acc") e.test1.accuracy = std::stod(row[1]);
                else if (k == "test1_loss") e.test1.mean_loss = std::stod(row[1]);
                else if (k == "test2_acc") e.test2.accuracy = std::stod(row[1]);
                else if (k == "test2_loss") e.test2.mean_loss = std::stod(row[1]);
            }
            trace.evals.push_back(e);
            params[std::size_t(variant)] = twr::extract_params(model, trace, cfg.delta);
            gaps[std::size_t(variant)] = twr::gap_summary(trace);
        }
        if (!have_both) continue;
        const twr::GebReport r =
            twr::make_geb_report(seed, params[0], params[1], gaps[0], gaps[1]);
        twr::write_geb_text(std::cout, r);
        std::cout << "\n";
        wrote = true;
    }
    if (!wrote)
        throw twr::DataError("bound: no checkpoint pairs found under " + cfg.output_dir +
                             "/runs for the configured seeds");
    return 0;
}

int cmd_report(const CommonOpts& opts) {
    const twr::ExperimentConfig cfg = build_config(opts);
    const std::string path = (std::filesystem::path(cfg.output_dir) / "gap_table.csv").string();
    const auto rows = twr::read_csv(path);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::string cell = row[i];
            // gap columns print in the two-decimal percent convention
            if (r > 0 && (i == 5 || i == 6) && !cell.empty())
                cell = twr::format_pct(std::stod(cell) / 100.0) + "%";
            std::printf("%s%s", i ? "  " : "", cell.c_str());
        }
        std::printf("\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"through-the-wall radar human activity recognition benchmark"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string variant = "full";

    CLI::App* gen = app.add_subcommand("gen", "generate the simulated dataset");
    add_common(gen, opts);
    CLI::App* train = app.add_subcommand("train", "train one model variant");
    add_common(train, opts);
    train->add_option("--variant", variant, "full or reduced features")
        ->check(CLI::IsMember({"full", "reduced"}));
    CLI::App* experiment = app.add_subcommand("experiment", "run the full protocol");
    add_common(experiment, opts);
    CLI::App* bound = app.add_subcommand("bound", "bound report from stored checkpoints");
    add_common(bound, opts);
    CLI::App* report = app.add_subcommand("report", "print the gap table");
    add_common(report, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return cmd_gen(opts);
        if (train->parsed()) return cmd_train(opts, variant);
        if (experiment->parsed()) return cmd_experiment(opts);
        if (bound->parsed()) return cmd_bound(opts);
        if (report->parsed()) return cmd_report(opts);
        std::fprintf(stderr, "no subcommand\n");
        return 1;
    } catch (const twr::NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const twr::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
