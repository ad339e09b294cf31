#pragma once

// Argument parsing for the `stegica` tool. Kept in a header so tests can drive
// the exact same entry point in-process.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stegica/cli/commands.hpp"

namespace stegica::cli {

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Wavelet/PCA/ICA steganalysis toolkit", "stegica"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Global seed for every randomized step")->capture_default_str();

    GenConfig gen;
    auto* g = app.add_subcommand("gen", "Generate a synthetic cover/stego corpus");
    g->add_option("--mode", gen.mode, "additive | inn")->capture_default_str()->check(CLI::IsMember({"additive", "inn"}));
    g->add_option("--alpha", gen.alpha, "Additive mixer strength in [0, 1]")->capture_default_str();
    g->add_option("--n", gen.n, "Number of cover/stego pairs")->capture_default_str();
    g->add_option("--size", gen.size, "Square image side in pixels (even)")->capture_default_str();
    g->add_option("--out", gen.out, "Output directory")->capture_default_str();
    g->add_option("--blocks", gen.blocks, "Coupling blocks (inn mode)")->capture_default_str();
    g->add_option("--weight-cap", gen.weight_cap, "Coupling weight bound (inn mode)")->capture_default_str();
    g->add_flag("--force", gen.force, "Overwrite an existing corpus");
    g->add_option("--seed", seed, "Global seed");

    ExtractConfig ex;
    std::vector<int> pair{ex.pair_first, ex.pair_second};
    std::string dump;
    auto* e = app.add_subcommand("extract", "Extract 8 moment features per manifest image");
    e->add_option("--manifest", ex.manifest, "JSON Lines manifest")->required();
    e->add_option("--out", ex.out, "Feature CSV")->capture_default_str();
    e->add_option("--pair", pair, "1-based PCA component indices")->expected(2)->capture_default_str();
    e->add_option("--dump-subbands", dump, "Write each image's 12 sub-bands as PGM into this directory");
    e->add_option("--seed", seed, "Global seed");

    TrainConfig tr;
    auto* t = app.add_subcommand("train", "Train an RBF SVM on a feature CSV");
    t->add_option("--features", tr.features, "Feature CSV")->required();
    t->add_option("--model", tr.model, "Output model file")->capture_default_str();
    t->add_option("--C", tr.C, "Soft-margin penalty")->capture_default_str();
    t->add_option("--gamma", tr.gamma_k, "RBF width gamma_k")->capture_default_str();

    EvalConfig ev;
    std::string model_path;
    auto* v = app.add_subcommand("eval", "Stratified k-fold CV (or score a saved model)");
    v->add_option("--features", ev.features, "Feature CSV")->required();
    v->add_option("--k", ev.k, "Folds")->capture_default_str();
    v->add_option("--C", ev.C, "Soft-margin penalty")->capture_default_str();
    v->add_option("--gamma", ev.gamma_k, "RBF width gamma_k")->capture_default_str();
    v->add_flag("--tune", ev.tune, "Pick C/gamma by inner CV on each training split");
    v->add_option("--model", model_path, "Score this saved model instead of cross-validating");
    v->add_option("--seed", seed, "Global seed");

    GridConfig gr;
    auto* s = app.add_subcommand("gridsearch", "Cross-validate all 66 PCA component pairs");
    s->add_option("--manifest", gr.manifest, "JSON Lines manifest")->required();
    s->add_option("--out", gr.out, "Score table CSV")->capture_default_str();
    s->add_option("--k", gr.k, "Folds")->capture_default_str();
    s->add_option("--C", gr.C, "Soft-margin penalty")->capture_default_str();
    s->add_option("--gamma", gr.gamma_k, "RBF width gamma_k")->capture_default_str();
    s->add_option("--seed", seed, "Global seed");

    AnalyzeConfig an;
    std::string heatmap;
    auto* a = app.add_subcommand("analyze", "Payload vs embedding-change sub-band correlations");
    a->add_option("--triplets", an.triplets, "JSON Lines of {cover, payload, stego} paths")->required();
    a->add_option("--out", an.out, "Correlation CSV")->capture_default_str();
    a->add_option("--heatmap", heatmap, "Optional PGM heatmap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& pe) {
        err << "error: " << pe.what() << '\n';
        return kUsage;
    }

    return run_guarded(
        [&]() -> int {
            if (*g) {
                gen.seed = seed;
                return cmd_gen(gen, out);
            }
            if (*e) {
                ex.pair_first = pair.at(0);
                ex.pair_second = pair.at(1);
                ex.seed = seed;
                if (!dump.empty()) ex.dump_subbands = dump;
                return cmd_extract(ex, err);
            }
            if (*t) return cmd_train(tr, out);
            if (*v) {
                ev.seed = seed;
                if (!model_path.empty()) ev.model = model_path;
                return cmd_eval(ev, out);
            }
            if (*s) {
                gr.seed = seed;
                return cmd_gridsearch(gr, out);
            }
            if (!heatmap.empty()) an.heatmap = heatmap;
            return cmd_analyze(an, out);
        },
        err);
}

} // namespace stegica::cli
