#pragma once

// Subcommand implementations. Each command takes a plain config struct, writes
// its primary output files and returns a process exit code; failures surface
// as stegica::Error and are mapped to exit codes by run_guarded().

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stegica/analysis.hpp"
#include "stegica/coupling.hpp"
#include "stegica/cross_validation.hpp"
#include "stegica/error.hpp"
#include "stegica/feature_store.hpp"
#include "stegica/image_io.hpp"
#include "stegica/manifest.hpp"
#include "stegica/model_io.hpp"
#include "stegica/pipeline.hpp"
#include "stegica/rng.hpp"
#include "stegica/stegosim.hpp"
#include "stegica/synthetic.hpp"

namespace stegica::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

inline int exit_code(ErrorKind k) { return static_cast<int>(k); }

/// Runs `fn`, reporting any stegica::Error (or other exception) on `err`.
inline int run_guarded(const std::function<int()>& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::bad_alloc&) {
        err << "error: out of memory\n";
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
}

/// Sidecar run-log next to a primary output: the exact configuration, no timestamps.
inline void write_run_log(const fs::path& path, const nlohmann::ordered_json& config) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << config.dump(2) << '\n';
}

inline std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// ---------------------------------------------------------------------------
// gen

struct GenConfig {
    std::string mode = "additive"; // additive | inn
    double alpha = 0.2;
    int n = 200;
    std::uint64_t seed = 0;
    int size = 128;
    fs::path out = "corpus";
    bool force = false;
    int blocks = kDefaultCouplingBlocks;
    double weight_cap = kDefaultWeightCap;
};

inline constexpr const char* kManifestName = "manifest.jsonl";
inline constexpr const char* kTripletsName = "triplets.jsonl";
inline constexpr const char* kGenLogName = "gen_params.json";

inline std::string indexed_name(const char* stem, int i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%05d.png", stem, i);
    return buf;
}

inline int cmd_gen(const GenConfig& cfg, std::ostream& log) {
    if (cfg.n <= 0) throw UsageError("--n must be positive");
    if (cfg.size < 8 || cfg.size % 2) throw UsageError("--size must be even and at least 8");
    if (cfg.mode != "additive" && cfg.mode != "inn") throw UsageError("--mode must be additive or inn");
    MixParams mix{cfg.alpha, MixParams::default_targets()};
    if (cfg.mode == "additive") mix.validate();

    const fs::path manifest_path = cfg.out / kManifestName;
    if (!cfg.force) {
        for (const char* name : {kManifestName, kTripletsName, kGenLogName})
            if (fs::exists(cfg.out / name))
                throw UsageError((cfg.out / name).string() + " already exists (pass --force to overwrite)");
    }
    for (const char* sub : {"covers", "payloads", "stegos"}) fs::create_directories(cfg.out / sub);

    std::optional<CouplingNet> net;
    if (cfg.mode == "inn")
        net = CouplingNet::random(derive_seed(cfg.seed, "gen.net", 0), cfg.blocks, cfg.weight_cap);

    DatasetManifest covers, stegos;
    std::ofstream triplets(cfg.out / kTripletsName, std::ios::trunc | std::ios::binary);
    if (!triplets) throw DataError("cannot write " + (cfg.out / kTripletsName).string());
    double psnr_sum = 0.0;
    for (int i = 0; i < cfg.n; ++i) {
        const auto idx = static_cast<std::uint64_t>(i);
        const Image cover = synthetic_image(cfg.size, cfg.size, derive_seed(cfg.seed, "gen.cover", idx));
        const Image payload = synthetic_image(cfg.size, cfg.size, derive_seed(cfg.seed, "gen.payload", idx));
        const Image stego = net ? inn_embed(cover, payload, *net).stego : additive_mix(cover, payload, mix);
        psnr_sum += std::min(psnr(cover, stego), 100.0);

        const std::string c = "covers/" + indexed_name("cover", i);
        const std::string p = "payloads/" + indexed_name("payload", i);
        const std::string s = "stegos/" + indexed_name("stego", i);
        save_png(cover, cfg.out / c);
        save_png(payload, cfg.out / p);
        save_png(stego, cfg.out / s);
        covers.add({c, Label::cover, std::nullopt, Role::unsplit});
        stegos.add({s, Label::stego, cfg.mode, Role::unsplit});
        nlohmann::ordered_json t;
        t["cover"] = c;
        t["payload"] = p;
        t["stego"] = s;
        triplets << t.dump() << '\n';
    }
    DatasetManifest all;
    for (const auto& e : covers.entries()) all.add(e);
    for (const auto& e : stegos.entries()) all.add(e);
    write_manifest(all, manifest_path);

    nlohmann::ordered_json p;
    p["command"] = "gen";
    p["mode"] = cfg.mode;
    p["n"] = cfg.n;
    p["seed"] = cfg.seed;
    p["size"] = cfg.size;
    if (cfg.mode == "additive") {
        p["alpha"] = cfg.alpha;
        p["target_bands"] = mix.target_bands;
    } else {
        p["blocks"] = cfg.blocks;
        p["weight_cap"] = cfg.weight_cap;
        p["rho_bias"] = kDefaultRhoBias;
    }
    write_run_log(cfg.out / kGenLogName, p);
    log << "wrote " << cfg.n << " covers + " << cfg.n << " stegos to " << cfg.out.string()
        << " (mean PSNR " << fixed2(psnr_sum / cfg.n) << " dB)\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// extract

struct ExtractConfig {
    fs::path manifest;
    fs::path out = "features.csv";
    int pair_first = kDefaultPair.first();
    int pair_second = kDefaultPair.second();
    std::uint64_t seed = 0;
    std::optional<fs::path> dump_subbands;
};

inline void dump_subbands(const Image& img, std::size_t index, const std::string& entry, const fs::path& dir) {
    fs::create_directories(dir);
    const SubBandStack s = haar_dwt(img);
    char prefix[32];
    std::snprintf(prefix, sizeof prefix, "%05zu_", index);
    const std::string stem = prefix + fs::path(entry).stem().string();
    for (int b = 0; b < kNumBands; ++b)
        save_pgm_stretched(s.band(b), s.band_height, s.band_width, dir / (stem + "_" + band_name(b) + ".pgm"));
}

struct ExtractOutcome {
    std::vector<FeatureRecord> records;
    std::size_t skipped = 0;
};

/// Per-image feature extraction in manifest order; failures are logged and skipped.
inline ExtractOutcome extract_manifest(const fs::path& manifest_path, const DatasetManifest& m, ComponentIndexPair pair,
                                       std::uint64_t seed, const std::optional<fs::path>& dump_dir, std::ostream& log) {
    ExtractOutcome out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const ManifestEntry& e = m.entries()[i];
        try {
            const Image img = load_image(resolve_entry_path(manifest_path, e.path));
            if (dump_dir) dump_subbands(img, i, e.path, *dump_dir);
            ICAParams ica;
            ica.seed = derive_seed(seed, "extract.ica", i);
            out.records.push_back({e.path, e.label, extract_features(img, pair, ica)});
        } catch (const Error& ex) {
            ++out.skipped;
            log << "skip " << e.path << ": " << ex.what() << '\n';
        }
    }
    return out;
}

inline int cmd_extract(const ExtractConfig& cfg, std::ostream& log) {
    const ComponentIndexPair pair(cfg.pair_first, cfg.pair_second);
    const DatasetManifest m = read_manifest(cfg.manifest);
    if (m.empty()) throw DataError("manifest " + cfg.manifest.string() + " is empty");
    const ExtractOutcome r = extract_manifest(cfg.manifest, m, pair, cfg.seed, cfg.dump_subbands, log);
    write_features(r.records, cfg.out);

    nlohmann::ordered_json p;
    p["command"] = "extract";
    p["manifest"] = cfg.manifest.string();
    p["pair"] = {pair.first(), pair.second()};
    p["seed"] = cfg.seed;
    write_run_log(fs::path(cfg.out.string() + ".run.json"), p);

    log << "extracted " << r.records.size() << " of " << m.size() << " images";
    if (r.skipped) log << " (" << r.skipped << " skipped)";
    log << '\n';
    return r.skipped ? kData : kOk;
}

// ---------------------------------------------------------------------------
// train / eval

struct TrainConfig {
    fs::path features;
    fs::path model = "model.svm";
    double C = 1.0;
    double gamma_k = 0.125;
};

inline int cmd_train(const TrainConfig& cfg, std::ostream& log) {
    const LabeledMatrix m = to_matrix(read_features(cfg.features));
    SVMParams params;
    params.C = cfg.C;
    params.gamma_k = cfg.gamma_k;
    const SVMTrainResult r = train_classifier(m.x, m.y, params);
    if (!r.converged) log << "warning: SMO stopped at the iteration limit (gap " << r.final_gap << ")\n";
    save_model(r.model, cfg.model);
    log << "trained on " << m.x.rows() << " rows, " << r.model.support_vectors.rows() << " support vectors\n";
    return kOk;
}

struct EvalConfig {
    fs::path features;
    int k = 5;
    double C = 1.0;
    double gamma_k = 0.125;
    std::uint64_t seed = 0;
    bool tune = false;
    std::optional<fs::path> model;
};

inline std::string table_line(double mean, double std) {
    return "Acc (%) " + fixed2(100.0 * mean) + "  Std (±%) " + fixed2(100.0 * std);
}

inline int cmd_eval(const EvalConfig& cfg, std::ostream& out) {
    const std::vector<FeatureRecord> records = read_features(cfg.features);
    if (records.empty()) throw DataError(cfg.features.string() + " has no rows");
    if (cfg.model) {
        const SVMModel model = load_model(*cfg.model);
        std::size_t ok = 0;
        for (const auto& r : records) {
            const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(r.features.data(), kFeatureDim);
            if (svm_predict(model, x).label == r.label) ++ok;
        }
        out << "Acc (%) " << fixed2(100.0 * static_cast<double>(ok) / static_cast<double>(records.size())) << "  ("
            << ok << "/" << records.size() << ")\n";
        return kOk;
    }
    CVOptions o;
    o.k = cfg.k;
    o.C = cfg.C;
    o.gamma_k = cfg.gamma_k;
    o.seed = cfg.seed;
    o.tune = cfg.tune;
    const CVReport rep = kfold_cv(records, o);
    out << table_line(rep.mean_accuracy, rep.std_accuracy) << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------
// gridsearch

struct GridConfig {
    fs::path manifest;
    fs::path out = "pair_scores.csv";
    int k = 5;
    double C = 1.0;
    double gamma_k = 0.125;
    std::uint64_t seed = 0;
};

inline int cmd_gridsearch(const GridConfig& cfg, std::ostream& log) {
    const DatasetManifest m = read_manifest(cfg.manifest);
    if (m.empty()) throw DataError("manifest " + cfg.manifest.string() + " is empty");

    // PCA is pair-independent, so it is fitted once per image.
    struct Prepared {
        std::size_t index;
        const ManifestEntry* entry;
        PreparedImage prep;
    };
    std::vector<Prepared> images;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const ManifestEntry& e = m.entries()[i];
        try {
            images.push_back({i, &e, prepare_image(load_image(resolve_entry_path(cfg.manifest, e.path)))});
        } catch (const Error& ex) {
            ++skipped;
            log << "skip " << e.path << ": " << ex.what() << '\n';
        }
    }
    auto features_for = [&](ComponentIndexPair pair) {
        std::vector<FeatureRecord> recs;
        for (const auto& im : images) {
            ICAParams ica;
            ica.seed = derive_seed(cfg.seed, "extract.ica", im.index);
            try {
                recs.push_back({im.entry->path, im.entry->label, extract_features(im.prep, pair, ica)});
            } catch (const Error& ex) {
                log << "skip " << im.entry->path << " for pair (" << pair.first() << "," << pair.second()
                    << "): " << ex.what() << '\n';
            }
        }
        return recs;
    };
    CVOptions o;
    o.k = cfg.k;
    o.C = cfg.C;
    o.gamma_k = cfg.gamma_k;
    o.seed = cfg.seed;
    const auto pairs = all_component_pairs();
    const GridSearchResult res = grid_search_pca_pair(features_for, pairs, o);
    write_score_table(res.table, cfg.out);
    double best_std = 0.0;
    for (const auto& r : res.table)
        if (r.i == res.best.first() && r.j == res.best.second()) best_std = r.std_accuracy;
    log << "best pair (" << res.best.first() << "," << res.best.second() << ") "
        << table_line(res.best_mean_accuracy, best_std) << '\n';
    return skipped ? kData : kOk;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeConfig {
    fs::path triplets;
    fs::path out = "correlation.csv";
    std::optional<fs::path> heatmap;
};

inline std::vector<Triplet> read_triplets(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open triplet list " + path.string());
    std::vector<Triplet> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& ex) {
            throw DataError("triplet line " + std::to_string(lineno) + ": " + ex.what());
        }
        auto get = [&](const char* key) {
            if (!j.is_object() || !j.contains(key) || !j[key].is_string())
                throw DataError("triplet line " + std::to_string(lineno) + ": missing string key '" + key + "'");
            return load_image(resolve_entry_path(path, j[key].get<std::string>()));
        };
        out.push_back({get("cover"), get("payload"), get("stego")});
    }
    if (out.empty()) throw DataError("triplet list " + path.string() + " is empty");
    return out;
}

inline int cmd_analyze(const AnalyzeConfig& cfg, std::ostream& log) {
    const std::vector<Triplet> t = read_triplets(cfg.triplets);
    const CorrelationMatrix m = correlation_matrix(t);
    write_correlation_csv(m, cfg.out);
    if (cfg.heatmap) write_correlation_heatmap(m, *cfg.heatmap);
    const Eigen::Matrix4d avg = m.channel_averaged();
    log << "analyzed " << m.triplets << " triplets; channel-averaged LL->LL correlation " << fixed2(avg(0, 0)) << '\n';
    if (m.degenerate.any()) log << "note: some entries involved zero-variance bands and were set to 0\n";
    return kOk;
}

} // namespace stegica::cli
