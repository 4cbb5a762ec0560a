// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: dataset generation (simulate -> maps ->
// corners -> stored features), training of the full-feature and
// corner-reduced models over the seed list, and emission of curves, gap
// tables and the bound report. Artifacts are plain CSV plus the binary
// map container; reruns with the same config are byte-identical.

#ifndef TWR_HARNESS_HPP
#define TWR_HARNESS_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "twr/bound.hpp"
#include "twr/config.hpp"
#include "twr/corners.hpp"
#include "twr/dataproc.hpp"
#include "twr/io.hpp"
#include "twr/nn.hpp"
#include "twr/radar_sim.hpp"
#include "twr/sigproc.hpp"

namespace twr {

inline constexpr std::size_t kFullFeatureLen = 2 * kMapSize * kMapSize;  // 8192

enum class SplitId : int { train = 0, val = 1, test1 = 2, test2 = 3 };

inline const char* split_name(SplitId s) {
    static const char* names[4] = {"train", "val", "test1", "test2"};
    return names[static_cast<int>(s)];
}

struct SampleRecord {
    std::size_t id = 0;
    SplitId split = SplitId::train;
    int label = 0;
    double height = 1.8;
    std::uint64_t seed = 0;
    std::uint64_t off_r2tm = 0, off_d2tm = 0, off_pcrd = 0, off_full = 0;
};

struct DatasetManifest {
    std::vector<SampleRecord> samples;
    std::string data_path;      // binary blob with all containers
    std::string manifest_path;  // CSV twin of `samples`
};

/// One sample all the way through the processing chain.
struct ProcessedSample {
    EnhancedMap r2tm, d2tm;
    PointCloudRD pcrd;
    std::vector<float> full_feature;     // 8192: [R2TM; D2TM] row-major
    std::vector<float> reduced_feature;  // 180: flattened PC-RD
};

inline ProcessedSample process_sample(ActivityKind activity, double height,
                                      std::uint64_t seed, const ExperimentConfig& cfg) {
    const ScattererTrack track = synth_trajectory(activity, height, cfg.radar, seed);
    const FrequencyEcho echo = recover_baseband(
        simulate_echo(track, cfg.radar, cfg.wall, cfg.snr_db, seed, cfg.noise_floor));
    const ComplexMatrix profiles = ifft_range_profile(echo);
    const RangeTimeMap rtm =
        build_rtm(profiles, cfg.radar.range_resolution(), cfg.radar.prf);
    const DopplerTimeMap dtm = build_dtm(profiles, cfg.stft, cfg.radar.prf);

    ProcessedSample out;
    out.r2tm = enhance_map(rtm.data, MapKind::r2tm, cfg.emd, cfg.clahe);
    out.d2tm = enhance_map(dtm.data, MapKind::d2tm, cfg.emd, cfg.clahe);
    out.pcrd = build_pcrd(out.r2tm, out.d2tm, cfg.dog);

    out.full_feature.reserve(kFullFeatureLen);
    for (double v : out.r2tm.data.storage()) out.full_feature.push_back(float(v));
    for (double v : out.d2tm.data.storage()) out.full_feature.push_back(float(v));
    const std::vector<double> flat = flatten_pcrd(out.pcrd);
    out.reduced_feature.assign(flat.begin(), flat.end());
    return out;
}

namespace detail {

/// Class labels for one split: round robin, with the remainder classes
/// rotated across splits so the dataset stays balanced overall.
inline std::vector<int> split_labels(std::size_t count, int& class_cursor) {
    std::vector<int> labels(count);
    const std::size_t whole = count / kNumClasses * kNumClasses;
    for (std::size_t i = 0; i < whole; ++i) labels[i] = int(i % kNumClasses);
    for (std::size_t i = whole; i < count; ++i) {
        labels[i] = class_cursor;
        class_cursor = (class_cursor + 1) % int(kNumClasses);
    }
    return labels;
}

}  // namespace detail

/// Simulate and store every sample of every split. Deterministic in
/// (config, dataset seed); per-sample seeds derive from the global id.
inline DatasetManifest gen_dataset(const ExperimentConfig& cfg) {
    cfg.validate();
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(cfg.output_dir) / "dataset";
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("gen_dataset: cannot create " + dir.string());

    DatasetManifest manifest;
    manifest.data_path = (dir / "data.bin").string();
    manifest.manifest_path = (dir / "manifest.csv").string();

    std::ofstream blob(manifest.data_path, std::ios::binary);
    if (!blob) throw DataError("gen_dataset: cannot open " + manifest.data_path);

    const SplitSpec* specs[4] = {&cfg.train_split, &cfg.val_split, &cfg.test1_split,
                                 &cfg.test2_split};
    int class_cursor = 0;
    std::size_t id = 0;
    for (int s = 0; s < 4; ++s) {
        const std::vector<int> labels = detail::split_labels(specs[s]->count, class_cursor);
        for (std::size_t i = 0; i < specs[s]->count; ++i, ++id) {
            SampleRecord rec;
            rec.id = id;
            rec.split = static_cast<SplitId>(s);
            rec.label = labels[i];
            rec.height = specs[s]->height;
            rec.seed = mix_seed(cfg.dataset_seed, id);
            const ProcessedSample ps =
                process_sample(activity_from_code(rec.label), rec.height, rec.seed, cfg);

            rec.off_r2tm = std::uint64_t(blob.tellp());
            write_container(blob, to_container(ps.r2tm.data, ContainerKind::r2tm));
            rec.off_d2tm = std::uint64_t(blob.tellp());
            write_container(blob, to_container(ps.d2tm.data, ContainerKind::d2tm));
            rec.off_pcrd = std::uint64_t(blob.tellp());
            write_container(blob, to_container(ps.pcrd.points, ContainerKind::pcrd));

            rec.off_full = std::uint64_t(blob.tellp());
            MapContainer full;
            full.kind = ContainerKind::feature;
            full.rows = 1;
            full.cols = std::uint32_t(ps.full_feature.size());
            full.data = ps.full_feature;
            write_container(blob, full);

            manifest.samples.push_back(rec);
        }
    }
    blob.close();

    CsvWriter csv(manifest.manifest_path);
    csv.row({"id", "split", "label", "height", "seed", "off_r2tm", "off_d2tm", "off_pcrd",
             "off_full"});
    for (const auto& r : manifest.samples)
        csv.row({std::to_string(r.id), split_name(r.split), std::to_string(r.label),
                 format_double(r.height), std::to_string(r.seed), std::to_string(r.off_r2tm),
                 std::to_string(r.off_d2tm), std::to_string(r.off_pcrd),
                 std::to_string(r.off_full)});
    return manifest;
}

inline DatasetManifest load_manifest(const std::string& out_dir) {
    namespace fs = std::filesystem;
    DatasetManifest manifest;
    manifest.data_path = (fs::path(out_dir) / "dataset" / "data.bin").string();
    manifest.manifest_path = (fs::path(out_dir) / "dataset" / "manifest.csv").string();
    const auto rows = read_csv(manifest.manifest_path);
    if (rows.size() < 2 || rows[0].size() != 9)
        throw DataError("load_manifest: malformed " + manifest.manifest_path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        SampleRecord rec;
        rec.id = std::stoull(r[0]);
        int s = 0;
        while (s < 4 && r[1] != split_name(static_cast<SplitId>(s))) ++s;
        if (s == 4) throw DataError("load_manifest: unknown split " + r[1]);
        rec.split = static_cast<SplitId>(s);
        rec.label = std::stoi(r[2]);
        rec.height = std::stod(r[3]);
        rec.seed = std::stoull(r[4]);
        rec.off_r2tm = std::stoull(r[5]);
        rec.off_d2tm = std::stoull(r[6]);
        rec.off_pcrd = std::stoull(r[7]);
        rec.off_full = std::stoull(r[8]);
        manifest.samples.push_back(rec);
    }
    return manifest;
}

enum class Variant : int { full = 0, reduced = 1 };

inline const char* variant_name(Variant v) { return v == Variant::full ? "full" : "reduced"; }

/// Materialize the four splits for one feature variant from the stored
/// containers (features go through f32 storage on purpose, so in-memory
/// and reloaded runs see identical inputs).
inline Dataset load_dataset(const DatasetManifest& manifest, Variant variant) {
    std::ifstream blob(manifest.data_path, std::ios::binary);
    if (!blob) throw DataError("load_dataset: cannot open " + manifest.data_path);

    std::array<std::vector<const SampleRecord*>, 4> by_split;
    for (const auto& r : manifest.samples) by_split[std::size_t(r.split)].push_back(&r);

    Dataset data;
    data.d_in = variant == Variant::full ? kFullFeatureLen : kFlatFeatureLen;
    Split* splits[4] = {&data.train, &data.val, &data.test1, &data.test2};
    for (int s = 0; s < 4; ++s) {
        const auto& recs = by_split[std::size_t(s)];
        if (recs.empty()) throw DataError("load_dataset: empty split in manifest");
        Split& split = *splits[s];
        split.x = RealMatrix(data.d_in, recs.size());
        split.labels.resize(recs.size());
        split.height = recs.front()->height;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            blob.seekg(std::streamoff(variant == Variant::full ? recs[i]->off_full
                                                               : recs[i]->off_pcrd));
            const MapContainer c = read_container(blob);
            if (std::size_t(c.rows) * c.cols != data.d_in)
                throw DataError("load_dataset: stored feature has unexpected length");
            for (std::size_t f = 0; f < data.d_in; ++f) split.x(f, i) = double(c.data[f]);
            split.labels[i] = recs[i]->label;
        }
    }
    return data;
}

struct RunArtifacts {
    std::vector<GebReport> reports;           // one per seed
    std::vector<std::string> files;           // everything written
    struct Row {
        std::uint64_t seed;
        Variant variant;
        GapSummary gaps;
        std::size_t n_rounds;
    };
    std::vector<Row> rows;
};

inline std::string run_file(const std::string& out_dir, const char* stem, Variant v,
                            std::uint64_t seed, const char* ext) {
    namespace fs = std::filesystem;
    return (fs::path(out_dir) / "runs" /
            (std::string(stem) + "_" + variant_name(v) + "_seed" + std::to_string(seed) + ext))
        .string();
}

inline void write_curves(const std::string& path, const TrainTrace& trace) {
    CsvWriter csv(path);
    csv.row({"step", "train_acc", "train_loss", "val_acc", "val_loss", "test1_acc",
             "test1_loss", "test2_acc", "test2_loss"});
    for (const auto& e : trace.evals)
        csv.row({std::to_string(e.step), format_double(e.train.accuracy),
                 format_double(e.train.mean_loss), format_double(e.val.accuracy),
                 format_double(e.val.mean_loss), format_double(e.test1.accuracy),
                 format_double(e.test1.mean_loss), format_double(e.test2.accuracy),
                 format_double(e.test2.mean_loss)});
}

inline void write_steps(const std::string& path, const TrainTrace& trace) {
    CsvWriter csv(path);
    csv.row({"step", "dw1_fro", "dw2_fro", "dw3_fro"});
    for (std::size_t i = 0; i < trace.step_norms.size(); ++i)
        csv.row({std::to_string(i + 1), format_double(trace.step_norms[i][0]),
                 format_double(trace.step_norms[i][1]), format_double(trace.step_norms[i][2])});
}

inline void write_meta(const std::string& path, const TrainTrace& trace) {
    const auto& e = trace.evals.back();
    CsvWriter csv(path);
    csv.row({"key", "value"});
    csv.row({"n_rounds", std::to_string(trace.n_rounds)});
    csv.row({"m_train", std::to_string(trace.m_train)});
    csv.row({"final_step", std::to_string(e.step)});
    csv.row({"train_acc", format_double(e.train.accuracy)});
    csv.row({"train_loss", format_double(e.train.mean_loss)});
    csv.row({"val_acc", format_double(e.val.accuracy)});
    csv.row({"val_loss", format_double(e.val.mean_loss)});
    csv.row({"test1_acc", format_double(e.test1.accuracy)});
    csv.row({"test1_loss", format_double(e.test1.mean_loss)});
    csv.row({"test2_acc", format_double(e.test2.accuracy)});
    csv.row({"test2_loss", format_double(e.test2.mean_loss)});
}

namespace detail {

inline std::vector<std::string> geb_csv_header() {
    return {"seed",
            "geb_full", "geb_reduced", "ratio",
            "log10_geb_full", "log10_geb_reduced",
            "q_full", "log10_q_full", "q_reduced", "log10_q_reduced",
            "lambda1_full", "lambda2_full", "lambda3_full", "kappa_full",
            "fro1_full", "fro2_full", "fro3_full", "omega_full", "omega_literal_full",
            "lambda1_reduced", "lambda2_reduced", "lambda3_reduced", "kappa_reduced",
            "fro1_reduced", "fro2_reduced", "fro3_reduced", "omega_reduced",
            "omega_literal_reduced",
            "B", "M", "Lp", "h", "C", "alpha", "beta_act", "delta", "N",
            "term_c3_full", "term_sqrt_full", "term_c3_reduced", "term_sqrt_reduced",
            "proof1_lhs", "proof1_rhs", "proof1_holds",
            "proof2_lhs", "proof2_rhs", "proof2_holds",
            "relax_lhs", "relax_rhs", "relax_holds",
            "gap_full", "gap_reduced", "bound_holds_full", "bound_holds_reduced"};
}

inline std::vector<std::string> geb_csv_row(const GebReport& r) {
    auto f = format_double;
    return {std::to_string(r.seed),
            f(r.geb_full), f(r.geb_reduced), f(r.ratio),
            f(std::log10(r.geb_full)), f(std::log10(r.geb_reduced)),
            f(r.q_full.value), f(r.q_full.log10_value), f(r.q_reduced.value),
            f(r.q_reduced.log10_value),
            f(r.full.lambdas[0]), f(r.full.lambdas[1]), f(r.full.lambdas[2]), f(r.full.kappa),
            f(r.full.fro_norms[0]), f(r.full.fro_norms[1]), f(r.full.fro_norms[2]),
            f(r.full.omega), f(r.full.omega_literal),
            f(r.reduced.lambdas[0]), f(r.reduced.lambdas[1]), f(r.reduced.lambdas[2]),
            f(r.reduced.kappa),
            f(r.reduced.fro_norms[0]), f(r.reduced.fro_norms[1]), f(r.reduced.fro_norms[2]),
            f(r.reduced.omega), f(r.reduced.omega_literal),
            f(r.full.B), std::to_string(r.full.M), f(r.full.Lp), f(r.full.h), f(r.full.C),
            f(r.full.alpha), f(r.full.beta_act), f(r.full.delta), std::to_string(r.full.N),
            f(r.term_c3_full), f(r.term_sqrt_full), f(r.term_c3_reduced), f(r.term_sqrt_reduced),
            f(r.proof.proof1_lhs), f(r.proof.proof1_rhs), r.proof.proof1_holds ? "1" : "0",
            f(r.proof.proof2_lhs), f(r.proof.proof2_rhs), r.proof.proof2_holds ? "1" : "0",
            f(r.proof.relax_lhs), f(r.proof.relax_rhs), r.proof.relax_holds ? "1" : "0",
            f(r.gap_full.loss_gap), f(r.gap_reduced.loss_gap),
            r.bound_holds_full ? "1" : "0", r.bound_holds_reduced ? "1" : "0"};
}

}  // namespace detail

inline void write_geb_text(std::ostream& out, const GebReport& r) {
    auto line = [&](const std::string& k, const std::string& v) {
        out << "  " << k << " = " << v << "\n";
    };
    out << "seed " << r.seed << "\n";
    line("GEB (full)", format_double(r.geb_full) + "  (log10 " +
                       format_double(std::log10(r.geb_full)) + ")");
    line("GEB (reduced)", format_double(r.geb_reduced) + "  (log10 " +
                          format_double(std::log10(r.geb_reduced)) + ")");
    line("ratio reduced/full", format_double(r.ratio));
    line("Q full", format_double(r.q_full.value) + "  (log10 " +
                       format_double(r.q_full.log10_value) + ")");
    line("Q reduced", format_double(r.q_reduced.value) + "  (log10 " +
                          format_double(r.q_reduced.log10_value) + ")");
    line("lambda full", format_double(r.full.lambdas[0]) + ", " +
                            format_double(r.full.lambdas[1]) + ", " +
                            format_double(r.full.lambdas[2]));
    line("lambda reduced", format_double(r.reduced.lambdas[0]) + ", " +
                               format_double(r.reduced.lambdas[1]) + ", " +
                               format_double(r.reduced.lambdas[2]));
    line("kappa full / reduced",
         format_double(r.full.kappa) + " / " + format_double(r.reduced.kappa));
    line("omega full / reduced",
         format_double(r.full.omega) + " / " + format_double(r.reduced.omega));
    line("N rounds", std::to_string(r.full.N));
    line("proof1 lhs <= rhs", format_double(r.proof.proof1_lhs) + " <= " +
                                  format_double(r.proof.proof1_rhs) +
                                  (r.proof.proof1_holds ? "  [holds]" : "  [fails]"));
    line("proof2 lhs <= rhs", format_double(r.proof.proof2_lhs) + " <= " +
                                  format_double(r.proof.proof2_rhs) +
                                  (r.proof.proof2_holds ? "  [holds]" : "  [fails]"));
    line("relaxed width check", format_double(r.proof.relax_lhs) + " < " +
                                    format_double(r.proof.relax_rhs) +
                                    (r.proof.relax_holds ? "  [holds]" : "  [fails]"));
    line("empirical gap full", format_double(r.gap_full.loss_gap) +
                                   (r.bound_holds_full ? "  [<= GEB]" : "  [exceeds GEB]"));
    line("empirical gap reduced",
         format_double(r.gap_reduced.loss_gap) +
             (r.bound_holds_reduced ? "  [<= GEB_reduced]" : "  [exceeds GEB_reduced]"));
}

inline std::string report_gaps(const RunArtifacts& artifacts, const std::string& out_dir);

/// Train both variants for every seed, write curves/steps/meta CSVs,
/// checkpoints, the per-seed bound report and the gap table.
inline RunArtifacts run_experiment(const DatasetManifest& manifest,
                                   const ExperimentConfig& cfg) {
    cfg.validate();
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(cfg.output_dir) / "runs", ec);
    if (ec) throw DataError("run_experiment: cannot create runs directory");

    const Dataset data_full = load_dataset(manifest, Variant::full);
    const Dataset data_reduced = load_dataset(manifest, Variant::reduced);

    RunArtifacts artifacts;
    for (const std::uint64_t seed : cfg.seeds) {
        std::array<GapSummary, 2> gaps;
        std::array<BoundParams, 2> params;
        for (const Variant variant : {Variant::full, Variant::reduced}) {
            const Dataset& data = variant == Variant::full ? data_full : data_reduced;
            TrainConfig tc = cfg.train;
            tc.seed = seed;
            MLPModel model = make_experiment_mlp(data.d_in, seed);
            const TrainTrace trace = train(model, data, tc);

            const std::string curves = run_file(cfg.output_dir, "curves", variant, seed, ".csv");
            const std::string steps = run_file(cfg.output_dir, "steps", variant, seed, ".csv");
            const std::string meta = run_file(cfg.output_dir, "meta", variant, seed, ".csv");
            const std::string ckpt = run_file(cfg.output_dir, "checkpoint", variant, seed, ".mlp");
            write_curves(curves, trace);
            write_steps(steps, trace);
            write_meta(meta, trace);
            save_model(model, ckpt);
            for (const auto& p : {curves, steps, meta, ckpt}) artifacts.files.push_back(p);

            gaps[std::size_t(variant)] = gap_summary(trace);
            params[std::size_t(variant)] = extract_params(model, trace, cfg.delta);
            artifacts.rows.push_back({seed, variant, gaps[std::size_t(variant)], trace.n_rounds});
        }
        artifacts.reports.push_back(make_geb_report(seed, params[0], params[1], gaps[0], gaps[1]));
    }

    // bound report CSV + text block
    const std::string geb_csv_path = (fs::path(cfg.output_dir) / "geb_report.csv").string();
    CsvWriter geb_csv(geb_csv_path);
    geb_csv.row(detail::geb_csv_header());
    for (const auto& r : artifacts.reports) geb_csv.row(detail::geb_csv_row(r));
    artifacts.files.push_back(geb_csv_path);

    const std::string geb_txt_path = (fs::path(cfg.output_dir) / "geb_report.txt").string();
    std::ofstream txt(geb_txt_path, std::ios::binary);
    for (const auto& r : artifacts.reports) {
        write_geb_text(txt, r);
        txt << "\n";
    }
    txt.close();
    artifacts.files.push_back(geb_txt_path);

    artifacts.files.push_back(report_gaps(artifacts, cfg.output_dir));

    // artifacts must parse back
    for (const auto& f : artifacts.files) {
        std::ifstream check(f, std::ios::binary);
        if (!check) throw DataError("run_experiment: missing artifact " + f);
    }
    return artifacts;
}

/// Gap table: one row per (seed, variant) with end-of-training accuracy
/// gaps in percent, plus per-variant means and the bound ratio.
inline std::string report_gaps(const RunArtifacts& artifacts, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const std::string path = (fs::path(out_dir) / "gap_table.csv").string();
    CsvWriter csv(path);
    csv.row({"seed", "variant", "val_acc", "test1_acc", "test2_acc", "gap_val_test1_pct",
             "gap_val_test2_pct", "geb_ratio"});

    std::array<double, 2> sum_g1{}, sum_g2{};
    std::array<std::size_t, 2> counts{};
    for (const auto& row : artifacts.rows) {
        const GebReport* report = nullptr;
        for (const auto& r : artifacts.reports)
            if (r.seed == row.seed) report = &r;
        const double g1 = row.gaps.acc_gap_val_test1 * 100.0;
        const double g2 = row.gaps.acc_gap_val_test2 * 100.0;
        sum_g1[std::size_t(row.variant)] += g1;
        sum_g2[std::size_t(row.variant)] += g2;
        ++counts[std::size_t(row.variant)];
        csv.row({std::to_string(row.seed), variant_name(row.variant),
                 format_double(row.gaps.final_val_acc), format_double(row.gaps.final_test1_acc),
                 format_double(row.gaps.final_test2_acc), format_double(g1), format_double(g2),
                 report ? format_double(report->ratio) : "nan"});
    }
    for (int v = 0; v < 2; ++v) {
        if (counts[std::size_t(v)] == 0) continue;
        csv.row({"mean", variant_name(static_cast<Variant>(v)), "", "", "",
                 format_double(sum_g1[std::size_t(v)] / double(counts[std::size_t(v)])),
                 format_double(sum_g2[std::size_t(v)] / double(counts[std::size_t(v)])), ""});
    }
    return path;
}

}  // namespace twr

#endif  // TWR_HARNESS_HPP
