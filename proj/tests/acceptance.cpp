// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "hce/hce.hpp"
#include "oracles.hpp"

using namespace hce;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double time_limit;  // seconds; 0 = none
    std::function<Outcome()> body;
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

TrainingWorld world_of(const SyntheticWorld& w, const std::string& root) {
    std::istringstream c(w.corpus), h(w.hierarchy);
    return load_world(c, h, root);
}

// ---------------------------------------------------------------------------

Outcome gradient_oracle() {
    std::mt19937_64 gen(101);
    const double eps = 1e-5;
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        std::size_t d = 1 + gen() % 8, k = 1 + gen() % 3, cats = gen() % 4;
        EmbeddingTable table(d, 6, 3);
        oracle::fill_random(table, gen, 0.8);
        TrainingPair pair{EntityId{static_cast<std::uint32_t>(gen() % 6)}, EntityId{static_cast<std::uint32_t>(gen() % 6)}};
        AncestorWeights w;
        std::uniform_real_distribution<double> u(0.05, 1.0);
        for (std::uint32_t c = 0; c < cats; ++c) w.push_back({CategoryId{c}, u(gen)});
        std::vector<EntityId> negs;
        for (std::size_t i = 0; i < k; ++i) negs.push_back(EntityId{static_cast<std::uint32_t>(gen() % 6)});

        auto g = pair_loss_and_grad(table, pair, w, negs);
        auto loss_at = [&] {
            PairGradient tmp;
            detail::PairScratch s;
            pair_loss_and_grad(table, pair, w, negs, tmp, s);
            return tmp.loss;
        };
        for (auto tab : {Table::EntityInput, Table::CategoryInput, Table::EntityOutput})
            for (std::uint32_t r = 0; r < table.rows(tab); ++r) {
                auto analytic = g.find({tab, r});
                auto row = table.row({tab, r});
                for (std::size_t i = 0; i < d; ++i) {
                    double keep = row[i];
                    row[i] = keep + eps;
                    double up = loss_at();
                    row[i] = keep - eps;
                    double down = loss_at();
                    row[i] = keep;
                    double fd = (up - down) / (2 * eps);
                    double a = analytic.empty() ? 0.0 : analytic[i];
                    double scale = std::max({std::abs(a), std::abs(fd), 1e-6});
                    worst = std::max(worst, std::abs(a - fd) / scale);
                }
            }
    }
    return {worst < 1e-4, fmt("max relative error %.2e over 100 instances", worst)};
}

Outcome purity_oracle() {
    std::size_t checked = 0;
    for (int n = 1; n <= 6; ++n) {
        auto parts = oracle::partitions(n);
        for (const auto& a : parts)
            for (const auto& b : parts) {
                std::size_t k = *std::max_element(a.begin(), a.end()) + 1;
                ClusteringSolution s{{a.begin(), a.end()}, k};
                std::vector<std::size_t> gold(b.begin(), b.end());
                if (purity(s, gold) != oracle::purity(a, b))
                    return {false, fmt("mismatch at n=%d", n)};
                ++checked;
            }
    }
    return {true, fmt("%zu partition pairs checked", checked)};
}

Outcome spearman_oracle() {
    std::mt19937_64 gen(303);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        std::size_t n = 2 + gen() % 50;
        std::vector<double> a(n), b(n);
        std::iota(a.begin(), a.end(), 1.0);
        std::iota(b.begin(), b.end(), 1.0);
        std::shuffle(a.begin(), a.end(), gen);
        std::shuffle(b.begin(), b.end(), gen);
        worst = std::max(worst, std::abs(spearman(a, b) - oracle::spearman_closed_form(a, b)));
    }
    bool invariant = true;
    std::normal_distribution<double> nd;
    for (int t = 0; t < 200; ++t) {
        std::vector<double> a(20), b(20), fa(20), fb(20);
        for (auto& x : a) x = nd(gen);
        for (auto& x : b) x = nd(gen);
        for (std::size_t i = 0; i < 20; ++i) {
            fa[i] = std::exp(a[i]);
            fb[i] = 5.0 * b[i] - 2.0;
        }
        invariant = invariant && spearman(a, b) == spearman(fa, fb);
    }
    std::vector<double> x{1, 2, 3}, y{2, 1, 3};
    double hand = spearman(x, y);
    bool ok = worst <= 1e-12 && invariant && std::abs(hand - 0.5) <= 1e-12;
    return {ok, fmt("closed-form max diff %.1e, monotone invariance %s, hand example %.12g", worst,
                    invariant ? "exact" : "broken", hand)};
}

Outcome weight_contract() {
    std::mt19937_64 gen(404);
    std::size_t brute = 0;
    for (int t = 0; t < 1000; ++t) {
        int n = 2 + static_cast<int>(gen() % 19);
        auto dag = oracle::random_dag(gen, n, 0.2);
        auto g = oracle::to_graph(dag.children, 0);
        std::vector<int> direct;
        std::size_t want = 1 + gen() % 3;
        while (direct.size() < want) direct.push_back(1 + static_cast<int>(gen() % (n - 1)));
        auto ids = oracle::to_ids(direct);
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

        auto w = category_weights(g, ids);
        std::vector<CategoryId> cats;
        for (const auto& x : w) cats.push_back(x.category);
        auto steps = avg_steps_down_all(g, cats, ids);
        double sum = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (!(w[i].weight > 0.0)) return {false, fmt("non-positive weight on DAG %d", t)};
            sum += w[i].weight;
            for (std::size_t j = 0; j < w.size(); ++j)
                if (steps[i] < steps[j] && !(w[i].weight > w[j].weight))
                    return {false, fmt("weights not decreasing in steps on DAG %d", t)};
        }
        if (std::abs(sum - 1.0) > 1e-9) return {false, fmt("weights sum to %.12f on DAG %d", sum, t)};

        if (n <= 12) {
            ++brute;
            auto expect = oracle::ancestors(dag.children, direct);
            expect.erase(0);
            auto got = ancestors(g, ids);
            if (got.size() != expect.size()) return {false, fmt("ancestor set differs on DAG %d", t)};
            for (std::size_t i = 0; i < got.size(); ++i) {
                if (!expect.count(static_cast<int>(got[i].value))) return {false, fmt("ancestor set differs on DAG %d", t)};
                double ref = oracle::avg_steps(dag.children, static_cast<int>(got[i].value), direct);
                if (std::abs(avg_steps_down(g, got[i], ids) - ref) > 1e-9)
                    return {false, fmt("avg steps differ on DAG %d", t)};
            }
        }
    }
    return {true, fmt("1000 DAGs, %zu brute-forced", brute)};
}

double nn_and_cluster(const VectorStore& store, const std::string& gold_text, double& cluster_best) {
    std::istringstream gin(gold_text);
    auto gold = GoldLabeling::from_rows(parse_gold(gin));
    auto r = run_categorization(store, gold, CategorizeMethod::Both);
    cluster_best = r.cluster->best_purity();
    return r.nn->purity;
}

Outcome synthetic_categorization() {
    RunConfig cfg;  // same defaults as `hce gen-synthetic` / `hce train`
    cfg.synthetic.branching = {3, 1};
    cfg.synthetic.entities_per_leaf = 10;
    cfg.synthetic.p_in = 0.9;
    cfg.synthetic.docs = 200;
    cfg.synthetic.seed = 1;
    auto sw = generate_synthetic(cfg.synthetic);
    auto w = world_of(sw, cfg.synthetic.root);
    TrainConfig tc;
    tc.dim = 50;
    tc.epochs = 5;
    tc.negatives = 10;
    tc.chunk = 500;
    tc.seed = 1;
    tc.workers = 1;
    tc.mode = Mode::HCE;
    auto r = train(w.corpus, w.vocab, w.graph, tc);
    auto store = export_vectors(r.table, w.vocab, w.graph);
    double cluster = 0.0;
    double nn = nn_and_cluster(store, sw.gold, cluster);
    return {nn >= 0.95 && cluster >= 0.90, fmt("NN purity %.4f (>= 0.95), best clustering purity %.4f (>= 0.90)", nn, cluster)};
}

Outcome hierarchy_probe() {
    int good = 0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SyntheticSpec spec;
        spec.branching = {2, 3};
        spec.seed = seed;
        auto sw = generate_synthetic(spec);
        auto w = world_of(sw, spec.root);
        TrainConfig tc;
        tc.dim = 50;
        tc.epochs = 5;
        tc.seed = seed;
        auto store = export_vectors(train(w.corpus, w.vocab, w.graph, tc).table, w.vocab, w.graph);

        std::vector<std::vector<double>> centroid(2, std::vector<double>(store.dim(), 0.0));
        std::vector<std::size_t> parents, leaf_parent(sw.leaves.size());
        for (std::size_t c = 0; c < sw.categories.size(); ++c) {
            if (sw.categories[c].depth != 1) continue;
            for (auto l : sw.categories[c].leaves) leaf_parent[l] = parents.size();
            parents.push_back(c);
        }
        for (std::size_t i = 0; i < sw.entities.size(); ++i) {
            auto e = store.vocab().find_entity(sw.entities[i]);
            if (!e) continue;
            std::size_t parent = leaf_parent[sw.entity_leaf[i]];
            auto v = store.vector(*e);
            for (std::size_t j = 0; j < v.size(); ++j) centroid[parent][j] += v[j];
        }
        bool ok = true;
        for (std::size_t p = 0; p < 2; ++p) {
            auto c = store.vocab().find_category(sw.categories[parents.at(p)].label);
            if (!c) {
                ok = false;
                continue;
            }
            auto pv = store.vector(*c);
            ok = ok && cosine(pv, centroid[p]) > cosine(pv, centroid[1 - p]);
        }
        good += ok;
        per_seed += ok ? '+' : '-';
    }
    return {good >= 9, fmt("%d/10 seeds [%s]", good, per_seed.c_str())};
}

Outcome sampler_distribution() {
    std::vector<std::uint64_t> counts{3, 1};
    NoiseTable table(counts, 1.0);
    Rng rng(707);
    const std::size_t n = 1'000'000;
    std::size_t first = 0;
    for (std::size_t i = 0; i < n; ++i) first += table.sample(rng).value == 0;
    double f0 = static_cast<double>(first) / n, f1 = 1.0 - f0;
    bool ok = std::abs(f0 - 0.75) <= 0.01 && std::abs(f1 - 0.25) <= 0.01;
    return {ok, fmt("frequencies (%.4f, %.4f)", f0, f1)};
}

Outcome dag_preprocessing() {
    std::mt19937_64 gen(808);
    std::size_t cyclic = 0;
    for (int t = 0; t < 1000; ++t) {
        int n = 3 + static_cast<int>(gen() % 18);
        auto raw = oracle::random_digraph(gen, n, 0.2);
        // Guarantee at least one cycle through the root.
        raw.add_edge(CategoryId{0}, CategoryId{1});
        raw.add_edge(CategoryId{1}, CategoryId{0});
        Vocabulary v;
        for (int i = 0; i < n; ++i) v.add_category("n" + std::to_string(i));
        auto p = prune_to_dag(raw, v, "n0");
        cyclic += p.stats.back_edges_removed > 0;
        if (!topological_order(p.graph) || !oracle::acyclic(p.graph)) return {false, fmt("cycle left in graph %d", t)};
        auto again = prune_to_dag(p.graph.to_directed(), v, "n0");
        if (!(again.graph == p.graph)) return {false, fmt("not idempotent on graph %d", t)};
    }
    return {true, fmt("1000 digraphs (%zu had back edges removed), all acyclic and idempotent", cyclic)};
}

Outcome determinism() {
    auto sw = generate_synthetic({});
    auto w = world_of(sw, "root");
    TrainConfig tc;
    tc.dim = 32;
    tc.workers = 1;
    tc.seed = 99;
    std::string out[2];
    for (auto& s : out) {
        std::ostringstream os;
        write_text(os, export_vectors(train(w.corpus, w.vocab, w.graph, tc).table, w.vocab, w.graph));
        s = os.str();
    }
    std::ifstream in(HCE_DATA_DIR "/dota.tsv");
    if (!in) return {false, "cannot open DOTA fixture"};
    auto rows = parse_gold(in);
    std::map<std::string, std::size_t> per;
    for (const auto& r : rows) ++per[r.category];
    bool dota = rows.size() == 450 && per.size() == 15 &&
                std::all_of(per.begin(), per.end(), [](const auto& kv) { return kv.second == 30; });
    bool same = out[0] == out[1];
    return {same && dota, fmt("exports %s (%zu bytes); DOTA %zu classes x %s rows", same ? "identical" : "differ",
                              out[0].size(), per.size(), dota ? "30" : "?")};
}

Outcome skipgram_reduction() {
    std::mt19937_64 gen(1010);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        std::size_t d = 1 + gen() % 10;
        EmbeddingTable table(d, 8, 2);
        oracle::fill_random(table, gen, 1.0);
        TrainingPair pair{EntityId{static_cast<std::uint32_t>(gen() % 8)}, EntityId{static_cast<std::uint32_t>(gen() % 8)}};
        std::vector<EntityId> negs;
        for (std::size_t i = 0, k = 1 + gen() % 5; i < k; ++i) negs.push_back(EntityId{static_cast<std::uint32_t>(gen() % 8)});
        auto ref = oracle::sgns_terms(table, pair, negs);

        // Positive term alone, then each negative term as the increment it adds.
        std::vector<EntityId> none;
        double pos = pair_loss_and_grad(table, pair, {}, none).loss;
        worst = std::max(worst, std::abs(pos - ref[0]));
        for (std::size_t i = 0; i < negs.size(); ++i) {
            std::vector<EntityId> one{negs[i]};
            double term = pair_loss_and_grad(table, pair, {}, one).loss - pos;
            worst = std::max(worst, std::abs(term - ref[i + 1]));
        }
        double total = 0.0;
        for (double x : ref) total += x;
        worst = std::max(worst, std::abs(pair_loss_and_grad(table, pair, {}, negs).loss - total));
    }
    return {worst <= 1e-12, fmt("max term difference %.1e", worst)};
}

}  // namespace

int main() {
    std::vector<Criterion> criteria{
        {1, "gradient matches finite differences", 5, gradient_oracle},
        {2, "purity matches brute force", 10, purity_oracle},
        {3, "spearman closed form, invariance, hand example", 0, spearman_oracle},
        {4, "HCE weight contract", 0, weight_contract},
        {5, "synthetic categorization (HCE)", 60, synthetic_categorization},
        {6, "parent vector nearer own subtree", 0, hierarchy_probe},
        {7, "negative sampler distribution", 0, sampler_distribution},
        {8, "prune_to_dag acyclic and idempotent", 0, dag_preprocessing},
        {9, "determinism and DOTA fixture", 0, determinism},
        {10, "skip-gram reduction", 0, skipgram_reduction},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool in_time = c.time_limit == 0 || secs < c.time_limit;
        bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("%s %2d %s: %s; %.2f s%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), secs,
                    c.time_limit > 0 ? fmt(" (limit %.0f s)", c.time_limit).c_str() : "");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures;
}
