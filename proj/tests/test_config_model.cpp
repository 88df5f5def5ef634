#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "critsir/config_model.hpp"
#include "critsir/degree_law.hpp"
#include "critsir/rng.hpp"
#include "critsir/stats.hpp"
#include "fixture_bf.hpp"

using namespace critsir;

namespace {

using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

EdgeList canonical(const MultiGraph& g) {
    EdgeList norm;
    norm.reserve(g.edges.size());
    for (const auto& e : g.edges)
        norm.emplace_back(std::min(e.first, e.second), std::max(e.first, e.second));
    std::sort(norm.begin(), norm.end());
    return norm;
}

// exhaustive enumeration of all perfect matchings of the stubs: the exact
// multigraph law that construct() and multigraph_probability() must follow
void enumerate_rec(const std::vector<std::uint32_t>& sv, std::vector<bool>& used,
                   EdgeList& cur, std::map<EdgeList, std::uint64_t>& out) {
    std::size_t first = sv.size();
    for (std::size_t i = 0; i < sv.size(); ++i)
        if (!used[i]) {
            first = i;
            break;
        }
    if (first == sv.size()) {
        EdgeList key = cur;
        std::sort(key.begin(), key.end());
        ++out[key];
        return;
    }
    used[first] = true;
    for (std::size_t j = first + 1; j < sv.size(); ++j) {
        if (used[j]) continue;
        used[j] = true;
        cur.emplace_back(std::min(sv[first], sv[j]), std::max(sv[first], sv[j]));
        enumerate_rec(sv, used, cur, out);
        cur.pop_back();
        used[j] = false;
    }
    used[first] = false;
}

std::map<EdgeList, std::uint64_t> enumerate_pairings(const std::vector<std::uint64_t>& degrees) {
    std::vector<std::uint32_t> sv;
    for (std::size_t v = 0; v < degrees.size(); ++v)
        for (std::uint64_t k = 0; k < degrees[v]; ++k)
            sv.push_back(static_cast<std::uint32_t>(v));
    std::vector<bool> used(sv.size(), false);
    EdgeList cur;
    std::map<EdgeList, std::uint64_t> out;
    enumerate_rec(sv, used, cur, out);
    return out;
}

void partitions_rec(std::uint64_t m, std::uint64_t maxpart, std::vector<std::uint64_t>& cur,
                    std::vector<std::vector<std::uint64_t>>& out) {
    if (m == 0) {
        out.push_back(cur);
        return;
    }
    for (std::uint64_t p = std::min(m, maxpart); p >= 1; --p) {
        cur.push_back(p);
        partitions_rec(m - p, p, cur, out);
        cur.pop_back();
    }
}

std::vector<std::vector<std::uint64_t>> even_partitions_up_to(std::uint64_t mmax) {
    std::vector<std::vector<std::uint64_t>> out;
    for (std::uint64_t m = 2; m <= mmax; m += 2) {
        std::vector<std::uint64_t> cur;
        partitions_rec(m, m, cur, out);
    }
    return out;
}

MultiGraph graph_from_edges(std::uint64_t n, const EdgeList& edges) {
    MultiGraph g;
    g.n = n;
    g.edges = edges;
    return g;
}

} // namespace

TEST_CASE("pairing formula matches exhaustive enumeration on all small sequences") {
    const auto seqs = even_partitions_up_to(8);
    CHECK(seqs.size() == 40);
    std::size_t graphs_checked = 0;
    for (const auto& degrees : seqs) {
        const auto table = enumerate_pairings(degrees);
        std::uint64_t total = 0;
        for (const auto& [key, cnt] : table) total += cnt;
        double mass = 0.0;
        for (const auto& [key, cnt] : table) {
            const auto g = graph_from_edges(degrees.size(), key);
            const double exact = static_cast<double>(cnt) / static_cast<double>(total);
            CHECK(multigraph_probability(degrees, g) == Catch::Approx(exact).epsilon(1e-12));
            mass += exact;
            ++graphs_checked;
        }
        CHECK(mass == Catch::Approx(1.0).epsilon(1e-12));
    }
    CHECK(graphs_checked > 100);
}

TEST_CASE("pairing probability on the worked examples") {
    // degrees (1,1): the only pairing is the single edge
    CHECK(multigraph_probability({1, 1}, graph_from_edges(2, {{0, 1}})) ==
          Catch::Approx(1.0).epsilon(1e-14));

    // degrees (1,1,2): path through the degree-2 vertex vs edge plus loop
    CHECK(multigraph_probability({1, 1, 2}, graph_from_edges(3, {{0, 2}, {1, 2}})) ==
          Catch::Approx(2.0 / 3.0).epsilon(1e-13));
    CHECK(multigraph_probability({1, 1, 2}, graph_from_edges(3, {{0, 1}, {2, 2}})) ==
          Catch::Approx(1.0 / 3.0).epsilon(1e-13));

    CHECK_THROWS_AS(multigraph_probability({1, 1, 2}, graph_from_edges(3, {{0, 1}, {0, 2}})),
                    DegreeMismatch);
    CHECK_THROWS_AS(multigraph_probability({1, 1}, graph_from_edges(3, {{0, 1}})),
                    DegreeMismatch);
}

TEST_CASE("construct handles the degenerate sequences") {
    Rng rng(derive_stream(0xc09f16, 1));

    // single vertex of degree 2: forced self-loop; the partner stub is
    // already active when drawn, so the loop is a backedge
    auto [g1, log1] = construct(std::vector<std::uint64_t>{2}, ExploreMode::BF, rng);
    CHECK(g1.edges == EdgeList{{0, 0}});
    CHECK(g1.loop_count(0) == 1);
    CHECK(log1.backedges.size() == 1);
    CHECK(log1.root_choices.size() == 1);
    const auto f1 = split_backedges(g1, log1);
    CHECK(f1.size() == 3);
    CHECK(f1.new_leaf_pairs == std::vector<std::pair<std::uint64_t, std::uint64_t>>{{2, 3}});

    // two degree-1 vertices: forced single edge, no backedge
    auto [g2, log2] = construct(std::vector<std::uint64_t>{1, 1}, ExploreMode::BF, rng);
    CHECK(canonical(g2) == EdgeList{{0, 1}});
    CHECK(log2.backedges.empty());
    CHECK(split_backedges(g2, log2).size() == 2);

    CHECK_THROWS_AS(construct(std::vector<std::uint64_t>{1, 1, 1}, ExploreMode::BF, rng),
                    ParityError);
    CHECK_THROWS_AS(construct(std::vector<std::uint64_t>{2, 0}, ExploreMode::BF, rng),
                    DomainError);
    CHECK_THROWS_AS(construct(std::vector<std::uint64_t>{}, ExploreMode::BF, rng), DomainError);
}

TEST_CASE("construct is deterministic for a fixed stream") {
    const std::vector<std::uint64_t> degrees{3, 2, 2, 1, 1, 1, 2};
    Rng a(derive_stream(0xc09f16, 2)), b(derive_stream(0xc09f16, 2));
    auto [ga, loga] = construct(degrees, ExploreMode::DF, a);
    auto [gb, logb] = construct(degrees, ExploreMode::DF, b);
    CHECK(ga.edges == gb.edges);
    CHECK(loga.order == logb.order);
    CHECK(loga.backedges.size() == logb.backedges.size());
}

TEST_CASE("empirical law of (1,1,2) constructions in both modes") {
    const std::vector<std::uint64_t> degrees{1, 1, 2};
    const EdgeList path{{0, 2}, {1, 2}};
    const std::size_t reps = 100000;
    for (ExploreMode mode : {ExploreMode::BF, ExploreMode::DF}) {
        Rng rng(derive_stream(0xc09f16, 3, mode == ExploreMode::BF ? 0 : 1));
        std::uint64_t paths = 0, loops = 0;
        for (std::size_t i = 0; i < reps; ++i) {
            auto [g, log] = construct(degrees, mode, rng);
            if (canonical(g) == path)
                ++paths;
            else
                ++loops;
        }
        CHECK(loops == reps - paths);
        CHECK(std::abs(binomial_z(static_cast<double>(paths), static_cast<double>(reps),
                                  2.0 / 3.0)) < 3.0);
    }
}

TEST_CASE("empirical multigraph law matches the enumeration for all sums up to 6") {
    const auto seqs = even_partitions_up_to(6);
    CHECK(seqs.size() == 18);
    const std::size_t reps = 20000;
    std::size_t seq_index = 0;
    for (const auto& degrees : seqs) {
        const auto table = enumerate_pairings(degrees);
        std::uint64_t total = 0;
        for (const auto& [key, cnt] : table) total += cnt;

        Rng rng(derive_stream(0xc09f16, 4, seq_index++));
        std::map<EdgeList, std::uint64_t> observed;
        for (std::size_t i = 0; i < reps; ++i) {
            auto [g, log] = construct(degrees, ExploreMode::BF, rng);
            ++observed[canonical(g)];
        }
        for (const auto& [key, cnt] : observed) CHECK(table.count(key) == 1);
        for (const auto& [key, cnt] : table) {
            const double p = static_cast<double>(cnt) / static_cast<double>(total);
            const auto it = observed.find(key);
            const double obs = it == observed.end() ? 0.0 : static_cast<double>(it->second);
            CHECK(std::abs(binomial_z(obs, static_cast<double>(reps), p)) < 4.0);
        }
    }
}

TEST_CASE("splitting the hand-labeled component reproduces its forest") {
    auto [g, log] = fixture::bf_component();
    CHECK(g.degree_sequence() == std::vector<std::uint64_t>{2, 4, 3, 4, 2, 1, 2, 2, 2});
    // backedges close cycles but none of them doubles an edge here
    CHECK(g.is_simple());

    const auto f = split_backedges(g, log);
    REQUIRE(f.size() == 15);
    CHECK(f.component_starts == std::vector<std::uint64_t>{0});

    CHECK(f.chi == std::vector<std::uint64_t>{2, 3, 2, 3, 1, 0, 1, 0, 1, 0, 0, 1, 0, 0, 0});
    CHECK(f.graph_vertex ==
          std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6, -1, 7, -1, -1, 8, -1, -1, -1});
    CHECK(f.parent ==
          std::vector<std::int64_t>{-1, 0, 0, 1, 1, 1, 2, 2, 3, 3, 3, 4, 6, 8, 11});
    CHECK(f.is_new_leaf ==
          std::vector<std::uint8_t>{0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 1, 0, 1, 1, 1});
    CHECK(f.new_leaf_pairs == std::vector<std::pair<std::uint64_t, std::uint64_t>>{
                                  {8, 11}, {10, 13}, {14, 15}});

    // walk of children-minus-one along the forest labels
    std::vector<double> x;
    double run = 0;
    for (std::uint64_t c : f.chi) {
        run += static_cast<double>(c) - 1.0;
        x.push_back(run);
    }
    CHECK(x == std::vector<double>{1, 3, 4, 6, 6, 5, 5, 4, 4, 3, 2, 2, 1, 0, -1});

    const auto levels = forest_levels(f);
    std::vector<std::uint64_t> counts;
    for (std::uint64_t u = 0; u < f.size(); ++u) {
        if (levels[u] >= counts.size()) counts.resize(levels[u] + 1, 0);
        ++counts[levels[u]];
    }
    CHECK(counts == std::vector<std::uint64_t>{1, 2, 5, 5, 2});
}

TEST_CASE("structural invariants hold over random constructions") {
    CriticalDegreeLaw law = solve_critical_family(1.5, 0.1);
    for (ExploreMode mode : {ExploreMode::BF, ExploreMode::DF}) {
        Rng rng(derive_stream(0xc09f16, 5, mode == ExploreMode::BF ? 0 : 1));
        for (int rep = 0; rep < 60; ++rep) {
            const DegreeSequence ds = sample_degrees(law, 150, rng);
            auto [g, log] = construct(ds, mode, rng);
            const std::uint64_t n = ds.degrees.size();

            CHECK(g.degree_sequence() == ds.degrees);
            std::uint64_t total = 0;
            for (auto d : ds.degrees) total += d;
            CHECK(g.edges.size() == total / 2);
            CHECK(log.pairs.size() == total / 2);

            // order is a permutation and components are recorded in it
            std::vector<std::uint8_t> seen(n, 0);
            for (auto v : log.order) {
                CHECK(seen[v] == 0);
                seen[v] = 1;
            }
            CHECK(log.order.size() == n);
            REQUIRE(!log.component_boundaries.empty());
            CHECK(log.component_boundaries.front() == 0);
            CHECK(log.root_choices.size() == log.component_boundaries.size());
            for (std::size_t c = 0; c < log.component_boundaries.size(); ++c)
                CHECK(log.order[log.component_boundaries[c]] == log.root_choices[c]);

            for (const auto& [lhe, rhe] : log.backedges)
                CHECK(!(lhe.vertex == rhe.vertex && lhe.rank == rhe.rank));

            const auto f = split_backedges(g, log);
            const std::uint64_t p = f.size();
            CHECK(p == n + 2 * log.backedges.size());
            CHECK((p - n) % 2 == 0);

            std::uint64_t leaves = 0;
            for (auto b : f.is_new_leaf) leaves += b;
            CHECK(leaves == 2 * log.backedges.size());
            for (const auto& [l, r] : f.new_leaf_pairs) {
                CHECK(l < r);
                CHECK(f.is_new_leaf[l - 1] == 1);
                CHECK(f.is_new_leaf[r - 1] == 1);
            }

            // chi counts children: degree for roots, degree-1 otherwise
            std::vector<std::uint8_t> is_root(p, 0);
            for (auto s : f.component_starts) is_root[s] = 1;
            for (std::uint64_t u = 0; u < p; ++u) {
                if (f.is_new_leaf[u]) {
                    CHECK(f.chi[u] == 0);
                } else {
                    const auto d = ds.degrees[static_cast<std::uint64_t>(f.graph_vertex[u])];
                    CHECK(f.chi[u] == (is_root[u] ? d : d - 1));
                }
            }

            // every component excursion sums to -1 and stays nonnegative before its end
            for (std::size_t c = 0; c < f.component_starts.size(); ++c) {
                const std::uint64_t a = f.component_starts[c];
                const std::uint64_t b = c + 1 < f.component_starts.size()
                                            ? f.component_starts[c + 1]
                                            : p;
                std::int64_t run = 0;
                for (std::uint64_t u = a; u < b; ++u) {
                    run += static_cast<std::int64_t>(f.chi[u]) - 1;
                    if (u + 1 < b)
                        CHECK(run >= 0);
                    else
                        CHECK(run == -1);
                }
            }

            if (mode == ExploreMode::BF) {
                // bfs layering: discovery order respects graph distance, and the
                // forest level of a graph vertex equals its graph distance
                std::vector<std::vector<std::uint32_t>> adj(n);
                for (const auto& e : g.edges) {
                    adj[e.first].push_back(e.second);
                    adj[e.second].push_back(e.first);
                }
                std::vector<std::int64_t> dist(n, -1);
                for (std::size_t c = 0; c < log.component_boundaries.size(); ++c) {
                    std::vector<std::uint32_t> q{log.root_choices[c]};
                    dist[log.root_choices[c]] = 0;
                    for (std::size_t h = 0; h < q.size(); ++h) {
                        const auto v = q[h];
                        for (auto w : adj[v])
                            if (dist[w] < 0) {
                                dist[w] = dist[v] + 1;
                                q.push_back(w);
                            }
                    }
                }
                const auto levels = forest_levels(f);
                std::vector<std::int64_t> last(log.component_boundaries.size(), -1);
                std::vector<std::size_t> comp_of(n, 0);
                for (std::size_t c = 0; c < log.component_boundaries.size(); ++c) {
                    const std::uint64_t hi = c + 1 < log.component_boundaries.size()
                                                 ? log.component_boundaries[c + 1]
                                                 : n;
                    for (std::uint64_t i = log.component_boundaries[c]; i < hi; ++i)
                        comp_of[log.order[i]] = c;
                }
                for (std::uint64_t i = 0; i < n; ++i) {
                    const auto v = log.order[i];
                    CHECK(dist[v] >= last[comp_of[v]]);
                    last[comp_of[v]] = dist[v];
                }
                for (std::uint64_t u = 0; u < p; ++u)
                    if (!f.is_new_leaf[u])
                        CHECK(static_cast<std::int64_t>(levels[u]) ==
                              dist[static_cast<std::uint64_t>(f.graph_vertex[u])]);
            }
        }
    }
}

TEST_CASE("walk rebuild is deterministic when no backedge is possible") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        StepPath s;
        s.values = {-1, -2};
        Rng rng(derive_stream(0xc09f16, 6, seed));
        const auto r = rebuild_x_from_s(s, {1, 1}, rng);
        CHECK(r.x_walk.values == std::vector<double>{0, -1});
        CHECK(r.marks.pairs.empty());
        CHECK(r.backedge_counts.values == std::vector<double>{0, 0, 0});

        StepPath s4;
        s4.values = {-1, -2, -3, -4};
        const auto r4 = rebuild_x_from_s(s4, {1, 1, 1, 1}, rng);
        CHECK(r4.x_walk.values == std::vector<double>{0, -1, -1, -2});
        CHECK(r4.marks.pairs.empty());
    }
}

TEST_CASE("walk rebuild on (2,1,1) matches the hand-computed branch structure") {
    // exploration order (2,1,1): a single decision with leaf probability 1/3;
    // the leaf path gives X = (1,0,-1,-1,-2) with mark pair (2,3), the other
    // path gives X = (1,0,-1)
    StepPath s;
    s.values = {0, -1, -2};
    const std::vector<std::uint64_t> degrees{2, 1, 1};
    std::size_t with_mark = 0;
    const std::size_t reps = 100000;
    for (std::size_t i = 0; i < reps; ++i) {
        Rng rng(derive_stream(0xc09f16, 7, i));
        const auto r = rebuild_x_from_s(s, degrees, rng);
        if (r.marks.pairs.empty()) {
            CHECK(r.x_walk.values == std::vector<double>{1, 0, -1});
        } else {
            CHECK(r.x_walk.values == std::vector<double>{1, 0, -1, -1, -2});
            CHECK(r.marks.pairs ==
                  std::vector<std::pair<std::uint64_t, std::uint64_t>>{{2, 3}});
            CHECK(r.backedge_counts.values.back() == 1.0);
            ++with_mark;
        }
    }
    CHECK(std::abs(binomial_z(static_cast<double>(with_mark), static_cast<double>(reps),
                              1.0 / 3.0)) < 3.0);

    // exploration order (1,2,1) never admits a backedge; (1,1,2) always has one
    StepPath s121;
    s121.values = {-1, -1, -2};
    StepPath s112;
    s112.values = {-1, -2, -2};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng a(derive_stream(0xc09f16, 8, seed)), b(derive_stream(0xc09f16, 9, seed));
        CHECK(rebuild_x_from_s(s121, {1, 2, 1}, a).marks.pairs.empty());
        CHECK(rebuild_x_from_s(s112, {1, 1, 2}, b).marks.pairs.size() == 1);
    }
}

TEST_CASE("walk rebuild backedge law agrees with direct construction") {
    // size-biased exploration order + rebuild must reproduce the multigraph
    // law of backedge counts; compare against construct() on (2,1,1)
    const std::vector<std::uint64_t> degrees{2, 1, 1};
    const std::size_t reps = 100000;

    Rng mrng(derive_stream(0xc09f16, 10));
    std::uint64_t machine_marks = 0;
    for (std::size_t i = 0; i < reps; ++i) {
        const auto ordered = size_biased_order(degrees, mrng);
        StepPath s;
        double run = 0;
        for (auto d : ordered) {
            run += static_cast<double>(d) - 2.0;
            s.values.push_back(run);
        }
        machine_marks += rebuild_x_from_s(s, ordered, mrng).marks.pairs.size();
    }

    Rng crng(derive_stream(0xc09f16, 11));
    std::uint64_t construct_marks = 0;
    for (std::size_t i = 0; i < reps; ++i) {
        auto [g, log] = construct(degrees, ExploreMode::BF, crng);
        construct_marks += log.backedges.size();
    }

    const double pm = static_cast<double>(machine_marks) / reps;
    const double pc = static_cast<double>(construct_marks) / reps;
    const double pooled = (pm + pc) / 2.0;
    const double z = (pm - pc) / std::sqrt(pooled * (1.0 - pooled) * 2.0 / reps);
    CHECK(std::abs(z) < 3.0);
    CHECK(std::abs(binomial_z(static_cast<double>(machine_marks), reps, 1.0 / 3.0)) < 3.0);
}

TEST_CASE("shared-randomness rebuild gives identical walks and infima") {
    CriticalDegreeLaw law = solve_critical_family(1.5, 0.1);
    Rng deg_rng(derive_stream(0xc09f16, 12));
    for (int rep = 0; rep < 20; ++rep) {
        const DegreeSequence ds = sample_degrees(law, 200, deg_rng);
        Rng order_rng(derive_stream(0xc09f16, 13, rep));
        const auto ordered = size_biased_order(ds.degrees, order_rng);
        StepPath s;
        double run = 0;
        for (auto d : ordered) {
            run += static_cast<double>(d) - 2.0;
            s.values.push_back(run);
        }
        const std::uint64_t seed = derive_stream(0xc09f16, 14, rep);
        Rng ra(seed), rb(seed);
        const auto a = rebuild_x_from_s(s, ordered, ra);
        const auto b = rebuild_x_from_s(s, ordered, rb);
        CHECK(a.x_walk.values == b.x_walk.values);
        CHECK(a.marks.pairs == b.marks.pairs);
        CHECK(a.backedge_counts.values == b.backedge_counts.values);
        double mina = 0, minb = 0;
        for (std::size_t k = 0; k < a.x_walk.values.size(); ++k) {
            mina = std::min(mina, a.x_walk.values[k]);
            minb = std::min(minb, b.x_walk.values[k]);
            CHECK(mina == minb);
        }
    }
}

TEST_CASE("walk rebuild rejects inconsistent input") {
    Rng rng(derive_stream(0xc09f16, 15));
    StepPath bad_len;
    bad_len.values = {0, -1};
    CHECK_THROWS_AS(rebuild_x_from_s(bad_len, {2, 1, 1}, rng), StateError);

    StepPath bad_incr;
    bad_incr.values = {1, 0, -1};
    CHECK_THROWS_AS(rebuild_x_from_s(bad_incr, {2, 1, 1}, rng), StateError);

    CHECK_THROWS_AS(rebuild_x_from_s(StepPath{}, {}, rng), StateError);

    // a zero-degree entry cannot come from a graph: the walk jumps past a
    // mark level and the active count goes negative (or a mark never closes)
    StepPath s301;
    s301.values = {1, -1, -2};
    bool threw = false;
    for (std::uint64_t seed = 0; seed < 64 && !threw; ++seed) {
        Rng r(derive_stream(0xc09f16, 16, seed));
        try {
            rebuild_x_from_s(s301, {3, 0, 1}, r);
        } catch (const StateError&) {
            threw = true;
        }
    }
    CHECK(threw);
}

TEST_CASE("size-biased order favors large degrees") {
    const std::vector<std::uint64_t> degrees{3, 1};
    Rng rng(derive_stream(0xc09f16, 17));
    std::uint64_t first_is_three = 0;
    const std::size_t reps = 40000;
    for (std::size_t i = 0; i < reps; ++i) {
        const auto o = size_biased_order(degrees, rng);
        CHECK(o.size() == 2);
        first_is_three += o[0] == 3;
    }
    CHECK(std::abs(binomial_z(static_cast<double>(first_is_three),
                              static_cast<double>(reps), 0.75)) < 4.0);
    CHECK_THROWS_AS(size_biased_order({1, 0}, rng), DomainError);
}
