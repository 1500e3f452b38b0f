// hce: train and evaluate entity/category embeddings.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hce/hce.hpp"

namespace fs = std::filesystem;

namespace {

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    if (path.empty()) throw hce::Error("missing input path");
    std::ifstream in(path, mode);
    if (!in) throw hce::Error("cannot open '" + path + "'");
    return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    if (path.empty()) throw hce::Error("missing output path");
    if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream out(path, mode);
    if (!out) throw hce::Error("cannot write '" + path + "'");
    return out;
}

void echo_config(const hce::RunConfig& cfg, const std::string& path) {
    auto out = open_out(path);
    out << "# effective configuration\n";
    hce::write_config(out, cfg);
}

hce::VectorStore load_store(const hce::RunConfig& cfg) {
    auto fmt = hce::parse_format(cfg.format);
    auto in = open_in(cfg.embeddings, fmt == hce::VectorFormat::Binary ? std::ios::in | std::ios::binary : std::ios::in);
    return hce::read_vectors(in, fmt);
}

void save_store(const hce::VectorStore& store, const std::string& path, hce::VectorFormat fmt) {
    auto out = open_out(path, fmt == hce::VectorFormat::Binary ? std::ios::out | std::ios::binary : std::ios::out);
    hce::write_vectors(out, store, fmt);
}

hce::TrainingWorld load_training_world(const hce::RunConfig& cfg) {
    auto c = open_in(cfg.corpus);
    auto h = open_in(cfg.hierarchy);
    return hce::load_world(c, h, cfg.root, cfg.drop_patterns, cfg.min_count);
}

// Finds `--config <path>` / `--config=<path>` ahead of the real parse so
// that file values become option defaults and flags override them.
hce::RunConfig preload_config(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        std::string path;
        if (a == "--config" && i + 1 < argc) path = argv[i + 1];
        else if (a.rfind("--config=", 0) == 0) path = a.substr(9);
        if (path.empty()) continue;
        auto in = open_in(path);
        return hce::read_config(in);
    }
    return {};
}

void add_world_options(CLI::App* app, hce::RunConfig& cfg) {
    app->add_option("--corpus", cfg.corpus, "Corpus file: target<TAB>cats<TAB>contexts");
    app->add_option("--hierarchy", cfg.hierarchy, "Hierarchy file: parent<TAB>child");
    app->add_option("--root", cfg.root, "Root category label")->capture_default_str();
    app->add_option("--drop-pattern", cfg.drop_patterns, "Drop categories whose label contains this substring")
        ->delimiter(',');
    app->add_option("--min-count", cfg.min_count, "Minimum entity occurrence count")->capture_default_str();
}

void add_embedding_input(CLI::App* app, hce::RunConfig& cfg) {
    app->add_option("--embeddings", cfg.embeddings, "Exported embedding file");
    app->add_option("--format", cfg.format, "Embedding file format (text|binary)")->capture_default_str();
}

// ---------------------------------------------------------------------------

int cmd_build_vocab(const hce::RunConfig& cfg) {
    auto in = open_in(cfg.corpus);
    auto raw = hce::parse_corpus(in);
    auto vocab = hce::build_vocabulary(raw, cfg.min_count);
    if (!cfg.hierarchy.empty()) {
        auto h = open_in(cfg.hierarchy);
        hce::load_hierarchy(h, vocab);
    }
    std::map<std::string, std::size_t> label_uses;
    for (const auto& d : raw)
        for (const auto& l : d.labels) ++label_uses[l];
    auto out = open_out(cfg.output);
    for (std::uint32_t i = 0; i < vocab.entity_size(); ++i)
        out << "e:" << vocab.label(hce::EntityId{i}) << '\t' << vocab.count(hce::EntityId{i}) << '\n';
    for (std::uint32_t i = 0; i < vocab.category_size(); ++i) {
        const auto& l = vocab.label(hce::CategoryId{i});
        out << "c:" << l << '\t' << label_uses[l] << '\n';
    }
    echo_config(cfg, cfg.output + ".config");
    std::cerr << "vocabulary: " << vocab.entity_size() << " entities, " << vocab.category_size() << " categories\n";
    return 0;
}

int cmd_train(const hce::RunConfig& cfg) {
    cfg.train.validate();
    auto fmt = hce::parse_format(cfg.format);
    if (cfg.output.empty()) throw hce::Error("missing output path");
    auto world = load_training_world(cfg);
    if (cfg.verbosity > 0) {
        const auto& p = world.prune;
        std::cerr << "hierarchy: " << world.graph.present_count() << " categories, " << world.graph.edge_count()
                  << " edges (removed: " << p.pattern_nodes_removed << " by pattern, " << p.unreachable_nodes_removed
                  << " unreachable, " << p.back_edges_removed << " back edges)\n";
        const auto& s = world.corpus.stats;
        std::cerr << "corpus: " << world.corpus.documents.size() << " documents, " << world.corpus.pair_count()
                  << " pairs (skipped " << s.skipped_target_oov << " oov targets, " << s.skipped_no_labels
                  << " unlabeled; dropped " << s.contexts_dropped << " contexts)\n";
    }
    echo_config(cfg, cfg.output + ".config");

    hce::TrainHooks hooks;
    if (cfg.verbosity > 0)
        hooks.on_chunk = [](const hce::TrainProgress& p) {
            std::fprintf(stderr, "epoch %zu chunk %zu pairs %zu/%zu lr %.6f loss %.5f smoothed %.5f\n", p.epoch + 1,
                         p.chunk, p.pairs_done, p.pairs_total, p.learning_rate, p.chunk_loss, p.smoothed_loss);
        };
    hooks.on_checkpoint = [&](const hce::EmbeddingTable& snap, std::size_t chunk) {
        save_store(hce::export_vectors(snap, world.vocab, world.graph), cfg.output + ".ckpt", fmt);
        auto conf = cfg;
        conf.train.checkpoint_every = cfg.train.checkpoint_every;
        echo_config(conf, cfg.output + ".ckpt.config");
        if (cfg.verbosity > 0) std::cerr << "checkpoint after chunk " << chunk << '\n';
    };
    auto result = hce::train(world.corpus, world.vocab, world.graph, cfg.train, hooks);
    save_store(hce::export_vectors(result.table, world.vocab, world.graph), cfg.output, fmt);
    if (cfg.verbosity > 0) {
        for (std::size_t e = 0; e < result.epoch_losses.size(); ++e)
            std::fprintf(stderr, "epoch %zu mean loss %.6f\n", e + 1, result.epoch_losses[e]);
        std::cerr << "wrote " << cfg.output << '\n';
    }
    return 0;
}

void write_reports(const std::string& prefix, const hce::RunConfig& cfg, const hce::json& j,
                   const std::string& text) {
    std::cout << text;
    if (prefix.empty()) return;
    open_out(prefix + ".json") << j.dump(2) << '\n';
    open_out(prefix + ".txt") << text;
    echo_config(cfg, prefix + ".config");
}

int cmd_eval_categorize(const hce::RunConfig& cfg) {
    auto store = load_store(cfg);
    auto gin = open_in(cfg.gold);
    auto gold = hce::GoldLabeling::from_rows(hce::parse_gold(gin));
    hce::CategorizeSweep sweep;
    sweep.restarts = cfg.restarts;
    sweep.max_iters = cfg.max_iters;
    sweep.seed = cfg.train.seed;
    auto report = hce::run_categorization(store, gold, hce::parse_categorize_method(cfg.method), sweep);
    std::ostringstream text;
    hce::write_text(text, report);
    write_reports(cfg.output, cfg, hce::to_json(report), text.str());
    return 0;
}

int cmd_eval_relatedness(const hce::RunConfig& cfg) {
    if (cfg.datasets.empty()) throw hce::Error("no --dataset given");
    auto store = load_store(cfg);
    hce::json all = hce::json::array();
    std::ostringstream text;
    for (const auto& path : cfg.datasets) {
        auto in = open_in(path);
        auto ds = hce::parse_relatedness(in, fs::path(path).filename().string());
        auto report = hce::run_relatedness(store, ds);
        all.push_back(hce::to_json(report));
        hce::write_text(text, report);
    }
    write_reports(cfg.output, cfg, all, text.str());
    return 0;
}

int cmd_neighbors(const hce::RunConfig& cfg, const std::string& label, std::size_t top) {
    auto store = load_store(cfg);
    std::optional<hce::NodeId> node;
    const auto& v = store.vocab();
    if (label.rfind("e:", 0) == 0) {
        if (auto e = v.find_entity(label.substr(2))) node = hce::NodeId::entity(*e);
    } else if (label.rfind("c:", 0) == 0) {
        if (auto c = v.find_category(label.substr(2))) node = hce::NodeId::category(*c);
    } else {
        node = hce::LexicalMatcher(v).node(label);
    }
    if (!node) throw hce::Error("label '" + label + "' not found in " + cfg.embeddings);

    std::vector<std::pair<double, hce::NodeId>> scored;
    for (auto n : store.nodes())
        if (n != *node) scored.emplace_back(hce::relatedness_score(store, *node, n), n);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    scored.resize(std::min(top, scored.size()));
    for (const auto& [score, n] : scored)
        std::printf("%s%s\t%.6f\n", std::string(hce::kind_prefix(n.kind)).c_str(), v.label(n).c_str(), score);
    return 0;
}

int cmd_inspect_weights(const hce::RunConfig& cfg, const std::string& label) {
    auto world = load_training_world(cfg);
    auto e = world.vocab.find_entity(label);
    if (!e) throw hce::Error("entity '" + label + "' not in vocabulary");
    auto direct = world.graph.entity_categories(*e);
    if (direct.empty()) throw hce::Error("entity '" + label + "' has no categories (never a document target)");
    auto weights = cfg.train.mode == hce::Mode::HCE ? hce::category_weights(world.graph, direct)
                                                    : hce::ce_weights(direct);
    std::vector<hce::CategoryId> cats;
    for (const auto& w : weights) cats.push_back(w.category);
    auto steps = hce::avg_steps_down_all(world.graph, cats, direct);
    std::printf("category\tavg_steps_down\tweight\n");
    for (std::size_t i = 0; i < weights.size(); ++i)
        std::printf("%s\t%.6f\t%.6f\n", world.vocab.label(weights[i].category).c_str(), steps[i], weights[i].weight);
    return 0;
}

int cmd_gen_synthetic(hce::RunConfig cfg) {
    if (cfg.output.empty()) throw hce::Error("missing --output directory");
    auto spec = cfg.synthetic;
    spec.seed = cfg.train.seed;
    spec.root = cfg.root;
    auto world = hce::generate_synthetic(spec);
    fs::path dir(cfg.output);
    fs::create_directories(dir);
    open_out((dir / "corpus.tsv").string()) << world.corpus;
    open_out((dir / "hierarchy.tsv").string()) << world.hierarchy;
    open_out((dir / "gold.tsv").string()) << world.gold;
    cfg.corpus = (dir / "corpus.tsv").string();
    cfg.hierarchy = (dir / "hierarchy.tsv").string();
    cfg.gold = (dir / "gold.tsv").string();
    echo_config(cfg, (dir / "synthetic.config").string());
    std::cerr << "wrote " << world.entities.size() << " entities, " << world.leaves.size() << " leaves, " << spec.docs
              << " documents to " << dir.string() << '\n';
    return 0;
}

int cmd_export(const hce::RunConfig& cfg, const std::string& to) {
    auto store = load_store(cfg);
    save_store(store, cfg.output, hce::parse_format(to));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        hce::RunConfig cfg = preload_config(argc, argv);
        std::string config_path;
        std::string mode = hce::to_string(cfg.train.mode);
        std::string label;
        std::size_t top = 10;
        std::string to = "binary";

        CLI::App app{"Entity and category embeddings over a category hierarchy"};
        app.require_subcommand(1);
        auto add_config = [&](CLI::App* sub) {
            sub->add_option("--config", config_path, "key=value config file; flags override its values");
            sub->add_option("-v,--verbosity", cfg.verbosity, "0 = quiet")->capture_default_str();
        };

        auto* build = app.add_subcommand("build-vocab", "Count entities and categories in a corpus");
        add_config(build);
        add_world_options(build, cfg);
        build->add_option("--output", cfg.output, "Vocabulary file to write");

        auto* tr = app.add_subcommand("train", "Train CE or HCE embeddings");
        add_config(tr);
        add_world_options(tr, cfg);
        tr->add_option("--mode", mode, "ce or hce")->capture_default_str();
        tr->add_option("--dim", cfg.train.dim, "Vector dimensionality")->capture_default_str();
        tr->add_option("--epochs", cfg.train.epochs, "Passes over the corpus")->capture_default_str();
        tr->add_option("--lr0", cfg.train.lr0, "Initial learning rate")->capture_default_str();
        tr->add_option("--lr-min", cfg.train.lr_min, "Final learning rate")->capture_default_str();
        tr->add_option("--negatives", cfg.train.negatives, "Negative samples per pair (k)")->capture_default_str();
        tr->add_option("--chunk", cfg.train.chunk, "Pairs per learning-rate update (B)")->capture_default_str();
        tr->add_option("--alpha", cfg.train.noise_exponent, "Noise distribution exponent")->capture_default_str();
        tr->add_option("--seed", cfg.train.seed, "Random seed")->capture_default_str();
        tr->add_option("--workers", cfg.train.workers, "Training threads")->capture_default_str();
        tr->add_option("--shuffle", cfg.train.shuffle, "Shuffle document order each epoch")->capture_default_str();
        tr->add_option("--subsample", cfg.train.subsample, "Context subsampling threshold (0 = off)")
            ->capture_default_str();
        tr->add_option("--checkpoint-every", cfg.train.checkpoint_every, "Checkpoint period in chunks (0 = off)")
            ->capture_default_str();
        tr->add_option("--output", cfg.output, "Embedding file to write");
        tr->add_option("--format", cfg.format, "text or binary")->capture_default_str();

        auto* cat = app.add_subcommand("eval-categorize", "Concept categorization: clustering purity and NN");
        add_config(cat);
        add_embedding_input(cat, cfg);
        cat->add_option("--gold", cfg.gold, "Gold file: entity<TAB>category");
        cat->add_option("--method", cfg.method, "cluster, nn or both")->capture_default_str();
        cat->add_option("--restarts", cfg.restarts, "k-means restarts")->capture_default_str();
        cat->add_option("--max-iters", cfg.max_iters, "k-means iteration cap")->capture_default_str();
        cat->add_option("--seed", cfg.train.seed, "k-means seed")->capture_default_str();
        cat->add_option("--output", cfg.output, "Report prefix (writes .txt, .json, .config)");

        auto* rel = app.add_subcommand("eval-relatedness", "Spearman correlation with human relatedness scores");
        add_config(rel);
        add_embedding_input(rel, cfg);
        rel->add_option("--dataset", cfg.datasets, "Dataset file: word1<TAB>word2<TAB>score (repeatable)");
        rel->add_option("--output", cfg.output, "Report prefix (writes .txt, .json, .config)");

        auto* nb = app.add_subcommand("neighbors", "Nearest nodes by cosine similarity");
        add_config(nb);
        add_embedding_input(nb, cfg);
        nb->add_option("--label", label, "Node label, optionally prefixed e: or c:")->required();
        nb->add_option("--top", top, "Rows to print")->capture_default_str();

        auto* iw = app.add_subcommand("inspect-weights", "Print an entity's category weights");
        add_config(iw);
        add_world_options(iw, cfg);
        iw->add_option("--mode", mode, "ce or hce")->capture_default_str();
        iw->add_option("--label", label, "Entity label")->required();

        auto* gen = app.add_subcommand("gen-synthetic", "Write a seeded toy corpus, hierarchy and gold file");
        add_config(gen);
        gen->add_option("--branching", cfg.synthetic.branching, "Fan-out per level below the root")
            ->delimiter(',')
            ->capture_default_str();
        gen->add_option("--entities-per-leaf", cfg.synthetic.entities_per_leaf, "Entities per leaf category")
            ->capture_default_str();
        gen->add_option("--p-in", cfg.synthetic.p_in, "Probability a context shares the target's leaf")
            ->capture_default_str();
        gen->add_option("--docs", cfg.synthetic.docs, "Documents")->capture_default_str();
        gen->add_option("--contexts", cfg.synthetic.contexts_per_doc, "Contexts per document")->capture_default_str();
        gen->add_option("--seed", cfg.train.seed, "Random seed")->capture_default_str();
        gen->add_option("--root", cfg.root, "Root label")->capture_default_str();
        gen->add_option("--output", cfg.output, "Output directory");

        auto* ex = app.add_subcommand("export", "Convert an embedding file between text and binary");
        add_config(ex);
        add_embedding_input(ex, cfg);
        ex->add_option("--to", to, "Output format: text or binary")->capture_default_str();
        ex->add_option("--output", cfg.output, "File to write");

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            return app.exit(e);
        }
        cfg.train.mode = hce::parse_mode(mode);

        if (build->parsed()) return cmd_build_vocab(cfg);
        if (tr->parsed()) return cmd_train(cfg);
        if (cat->parsed()) return cmd_eval_categorize(cfg);
        if (rel->parsed()) return cmd_eval_relatedness(cfg);
        if (nb->parsed()) return cmd_neighbors(cfg, label, top);
        if (iw->parsed()) return cmd_inspect_weights(cfg, label);
        if (gen->parsed()) return cmd_gen_synthetic(cfg);
        if (ex->parsed()) return cmd_export(cfg, to);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
