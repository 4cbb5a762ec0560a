// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: split sizes and heights, every stage's
// sub-config, seeds and the confidence level. Overridable from a flat
// key = value text file with namespaced keys (radar.f_min, train.lr,
// dog.sigma1, ...).

#ifndef TWR_CONFIG_HPP
#define TWR_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "twr/common.hpp"
#include "twr/corners.hpp"
#include "twr/dataproc.hpp"
#include "twr/emd.hpp"
#include "twr/nn.hpp"
#include "twr/radar_sim.hpp"
#include "twr/sigproc.hpp"

namespace twr {

struct SplitSpec {
    std::size_t count = 0;
    double height = 1.8;
};

struct ExperimentConfig {
    // desk-scale defaults; paper_preset() scales to 3200/800/400/400
    SplitSpec train_split{1200, 1.8};
    SplitSpec val_split{300, 1.8};
    SplitSpec test1_split{150, 1.7};
    SplitSpec test2_split{150, 1.6};

    RadarConfig radar;
    WallModel wall;
    STFTConfig stft;
    EMDConfig emd;
    CLAHEConfig clahe;
    DoGConfig dog;
    TrainConfig train;

    double snr_db = 20.0;
    double noise_floor = 0.05;
    std::uint64_t dataset_seed = 42;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    double delta = 0.05;
    std::string output_dir = "out";

    std::size_t total_samples() const {
        return train_split.count + val_split.count + test1_split.count + test2_split.count;
    }

    void validate() const {
        radar.validate();
        wall.validate();
        stft.validate();
        emd.validate();
        clahe.validate();
        dog.validate();
        train.validate();
        if (train_split.count == 0 || val_split.count == 0 || test1_split.count == 0 ||
            test2_split.count == 0)
            throw DataError("ExperimentConfig: every split needs at least one sample");
        if (total_samples() % kNumClasses != 0)
            throw DataError("ExperimentConfig: total sample count must divide by 12 for "
                            "class balance");
        if (seeds.empty()) throw DataError("ExperimentConfig: need at least one seed");
        if (!(delta > 0.0 && delta < 1.0))
            throw DataError("ExperimentConfig: delta must lie in (0,1)");
    }
};

inline ExperimentConfig desk_preset() { return ExperimentConfig{}; }

inline ExperimentConfig paper_preset() {
    ExperimentConfig cfg;
    cfg.train_split.count = 3200;
    cfg.val_split.count = 800;
    cfg.test1_split.count = 400;
    cfg.test2_split.count = 400;
    return cfg;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Parse a flat key = value file; '#' starts a comment line.
inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("config: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw DataError("config: missing '=' at line " + std::to_string(lineno));
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty()) throw DataError("config: empty key at line " + std::to_string(lineno));
        kv[key] = value;
    }
    return kv;
}

/// Apply key/value overrides onto a config; unknown keys are an error.
inline void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv) {
    auto as_double = [](const std::string& k, const std::string& v) {
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw DataError("config: bad numeric value for " + k + ": " + v);
        }
    };
    auto as_count = [&](const std::string& k, const std::string& v) {
        const double d = as_double(k, v);
        if (d < 0 || d != std::floor(d))
            throw DataError("config: expected a non-negative integer for " + k);
        return static_cast<std::size_t>(d);
    };
    auto as_bool = [](const std::string& k, const std::string& v) {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw DataError("config: expected true/false for " + k);
    };

    for (const auto& [key, value] : kv) {
        if (key == "counts.train") cfg.train_split.count = as_count(key, value);
        else if (key == "counts.val") cfg.val_split.count = as_count(key, value);
        else if (key == "counts.test1") cfg.test1_split.count = as_count(key, value);
        else if (key == "counts.test2") cfg.test2_split.count = as_count(key, value);
        else if (key == "heights.train") cfg.train_split.height = as_double(key, value);
        else if (key == "heights.val") cfg.val_split.height = as_double(key, value);
        else if (key == "heights.test1") cfg.test1_split.height = as_double(key, value);
        else if (key == "heights.test2") cfg.test2_split.height = as_double(key, value);
        else if (key == "radar.f_min") cfg.radar.f_min = as_double(key, value);
        else if (key == "radar.f_max") cfg.radar.f_max = as_double(key, value);
        else if (key == "radar.n_freq") cfg.radar.n_freq = as_count(key, value);
        else if (key == "radar.prf") cfg.radar.prf = as_double(key, value);
        else if (key == "radar.duration") cfg.radar.duration = as_double(key, value);
        else if (key == "radar.carrier_sim") cfg.radar.carrier_sim = as_bool(key, value);
        else if (key == "wall.thickness") cfg.wall.thickness = as_double(key, value);
        else if (key == "wall.rel_permittivity") cfg.wall.rel_permittivity = as_double(key, value);
        else if (key == "wall.loss_factor") cfg.wall.loss_factor = as_double(key, value);
        else if (key == "stft.window_len") cfg.stft.window_len = as_count(key, value);
        else if (key == "stft.hop") cfg.stft.hop = as_count(key, value);
        else if (key == "stft.n_doppler_keep") cfg.stft.n_doppler_keep = as_count(key, value);
        else if (key == "emd.max_imfs") cfg.emd.max_imfs = as_count(key, value);
        else if (key == "emd.max_sift") cfg.emd.max_sift = as_count(key, value);
        else if (key == "emd.sift_sd_stop") cfg.emd.sift_sd_stop = as_double(key, value);
        else if (key == "emd.drop_imfs") cfg.emd.drop_imfs = as_count(key, value);
        else if (key == "clahe.tiles") cfg.clahe.tiles = as_count(key, value);
        else if (key == "clahe.clip_limit") cfg.clahe.clip_limit = as_double(key, value);
        else if (key == "clahe.bins") cfg.clahe.bins = as_count(key, value);
        else if (key == "dog.sigma1") cfg.dog.sigma1 = as_double(key, value);
        else if (key == "dog.k") cfg.dog.k = as_double(key, value);
        else if (key == "dog.nms_radius") cfg.dog.nms_radius = as_count(key, value);
        else if (key == "train.epochs") cfg.train.epochs = as_count(key, value);
        else if (key == "train.batch") cfg.train.batch = as_count(key, value);
        else if (key == "train.lr") cfg.train.lr = as_double(key, value);
        else if (key == "train.eval_every") cfg.train.eval_every = as_count(key, value);
        else if (key == "train.clip_fro") cfg.train.clip_fro = as_double(key, value);
        else if (key == "sim.snr_db") cfg.snr_db = as_double(key, value);
        else if (key == "sim.noise_floor") cfg.noise_floor = as_double(key, value);
        else if (key == "dataset.seed") cfg.dataset_seed = as_count(key, value);
        else if (key == "delta") cfg.delta = as_double(key, value);
        else if (key == "out") cfg.output_dir = value;
        else if (key == "seeds") {
            cfg.seeds.clear();
            std::stringstream ss(value);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                const std::string t = detail::trim(tok);
                if (!t.empty()) cfg.seeds.push_back(as_count(key, t));
            }
            if (cfg.seeds.empty()) throw DataError("config: seeds list is empty");
        } else {
            throw DataError("config: unknown key " + key);
        }
    }
}

}  // namespace twr

#endif  // TWR_CONFIG_HPP
