#pragma once

// Uniform multigraph construction from a fixed degree sequence by sequential
// half-edge pairing. Half-edges are sleeping, active, or dead; the explorer
// repeatedly kills the least active stub of the frontier vertex and pairs it
// with a uniformly chosen living stub. A pair whose partner was already
// active is a backedge. Splitting every backedge into two fresh leaves turns
// each component into a tree; the forest is relabeled in breadth-first or
// depth-first order. rebuild_x_from_s reconstructs the forest walk from the
// degree walk alone, driving the same law with explicit mark bookkeeping.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "degree_law.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "step_path.hpp"

namespace critsir {

enum class ExploreMode { BF, DF };

struct HalfEdge {
    std::uint32_t vertex = 0;
    std::uint32_t rank = 0; // position within the vertex's stub order, < deg(vertex)
    friend bool operator==(const HalfEdge& a, const HalfEdge& b) {
        return a.vertex == b.vertex && a.rank == b.rank;
    }
};

struct MultiGraph {
    std::uint64_t n = 0;
    // (frontier-side vertex, drawn-side vertex) in creation order
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

    std::uint64_t loop_count(std::uint32_t i) const {
        std::uint64_t c = 0;
        for (const auto& e : edges) c += (e.first == i && e.second == i) ? 1 : 0;
        return c;
    }
    std::uint64_t mult(std::uint32_t i, std::uint32_t j) const {
        if (i == j) return loop_count(i);
        std::uint64_t c = 0;
        for (const auto& e : edges)
            c += ((e.first == i && e.second == j) || (e.first == j && e.second == i)) ? 1 : 0;
        return c;
    }
    // loops count twice
    std::vector<std::uint64_t> degree_sequence() const {
        std::vector<std::uint64_t> deg(n, 0);
        for (const auto& e : edges) {
            ++deg[e.first];
            ++deg[e.second];
        }
        return deg;
    }
    bool is_simple() const {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> norm;
        norm.reserve(edges.size());
        for (const auto& e : edges) {
            if (e.first == e.second) return false;
            norm.emplace_back(std::min(e.first, e.second), std::max(e.first, e.second));
        }
        std::sort(norm.begin(), norm.end());
        return std::adjacent_find(norm.begin(), norm.end()) == norm.end();
    }
};

struct ExplorationLog {
    ExploreMode mode = ExploreMode::BF;
    std::vector<std::uint32_t> order; // discovery order: order[i] is the (i+1)-th found vertex
    // every matched (l, r) stub pair in creation order; the flag marks pairs
    // whose r side was active (backedges). The full pairing is kept because
    // the forest replay needs to know which stub played which role.
    std::vector<std::pair<HalfEdge, HalfEdge>> pairs;
    std::vector<std::uint8_t> pair_is_backedge;
    std::vector<std::pair<HalfEdge, HalfEdge>> backedges;
    std::vector<std::uint64_t> component_boundaries; // index into order of each component start
    std::vector<std::uint32_t> root_choices;         // vertex of each size-biased root
};

struct ExploredForest {
    std::vector<std::int64_t> parent;       // 0-based index of parent, -1 for roots
    std::vector<std::uint8_t> is_new_leaf;  // 1 for the leaves created by splitting
    std::vector<std::int64_t> graph_vertex; // original vertex id, -1 for new leaves
    std::vector<std::uint64_t> chi;         // child counts
    // (l, r) with l < r, 1-based forest labels; one pair per backedge, the
    // l entry is the leaf found while exploring the frontier-side stub
    std::vector<std::pair<std::uint64_t, std::uint64_t>> new_leaf_pairs;
    std::vector<std::uint64_t> component_starts; // 0-based index of each root

    std::uint64_t size() const { return parent.size(); }
};

// Pair half-edges uniformly at random, exploring breadth-first (frontier =
// earliest discovered vertex with an active stub) or depth-first (latest).
// Components restart from a uniformly chosen sleeping stub, which makes each
// root size-biased by degree.
inline std::pair<MultiGraph, ExplorationLog> construct(const std::vector<std::uint64_t>& degrees,
                                                       ExploreMode mode, Rng& rng) {
    const std::uint64_t n = degrees.size();
    if (n == 0) throw DomainError("construct: empty degree sequence");
    std::uint64_t total = 0;
    for (std::uint64_t d : degrees) {
        if (d == 0) throw DomainError("construct: degrees must be positive");
        total += d;
    }
    if (total % 2 != 0) throw ParityError("construct: odd number of half-edges");

    std::vector<std::uint64_t> offset(n + 1, 0);
    for (std::uint64_t v = 0; v < n; ++v) offset[v + 1] = offset[v] + degrees[v];

    enum : std::uint8_t { SLEEPING = 0, ACTIVE = 1, DEAD = 2 };
    std::vector<std::uint8_t> state(total, SLEEPING);
    std::vector<std::uint32_t> stub_vertex(total);
    for (std::uint64_t v = 0; v < n; ++v)
        for (std::uint64_t s = offset[v]; s < offset[v + 1]; ++s)
            stub_vertex[s] = static_cast<std::uint32_t>(v);

    // living = sleeping + active, uniform draws via swap-delete
    std::vector<std::uint64_t> living(total), pos(total);
    std::iota(living.begin(), living.end(), std::uint64_t{0});
    std::iota(pos.begin(), pos.end(), std::uint64_t{0});
    auto unlive = [&](std::uint64_t s) {
        const std::uint64_t p = pos[s];
        const std::uint64_t back = living.back();
        living[p] = back;
        pos[back] = p;
        living.pop_back();
    };

    std::vector<std::uint64_t> active_count(n, 0), least_ptr(n, 0);

    MultiGraph g;
    g.n = n;
    g.edges.reserve(total / 2);
    ExplorationLog log;
    log.mode = mode;
    log.order.reserve(n);
    std::vector<std::uint64_t> df_stack; // discovery indices, kept increasing
    std::uint64_t bf_front = 0;

    auto discover = [&](std::uint32_t w) {
        for (std::uint64_t s = offset[w]; s < offset[w] + degrees[w]; ++s) state[s] = ACTIVE;
        active_count[w] = degrees[w];
        log.order.push_back(w);
        if (mode == ExploreMode::DF) df_stack.push_back(log.order.size() - 1);
    };

    // discovery index of the frontier vertex, -1 when no stub is active
    auto frontier = [&]() -> std::int64_t {
        if (mode == ExploreMode::BF) {
            while (bf_front < log.order.size() && active_count[log.order[bf_front]] == 0)
                ++bf_front;
            return bf_front < log.order.size() ? static_cast<std::int64_t>(bf_front) : -1;
        }
        while (!df_stack.empty() && active_count[log.order[df_stack.back()]] == 0)
            df_stack.pop_back();
        return df_stack.empty() ? -1 : static_cast<std::int64_t>(df_stack.back());
    };

    while (true) {
        const std::int64_t fi = frontier();
        if (fi < 0) {
            if (living.empty()) break;
            // every living stub is sleeping here, so this draw is uniform
            // over sleeping stubs: the root comes out size-biased
            const std::uint64_t r0 = living[rng.uniform_below(living.size())];
            log.component_boundaries.push_back(log.order.size());
            log.root_choices.push_back(stub_vertex[r0]);
            discover(stub_vertex[r0]);
            continue;
        }
        const std::uint32_t v = log.order[static_cast<std::uint64_t>(fi)];
        std::uint64_t lp = least_ptr[v];
        while (state[offset[v] + lp] != ACTIVE) ++lp;
        least_ptr[v] = lp;
        const std::uint64_t l = offset[v] + lp;
        state[l] = DEAD;
        unlive(l);
        --active_count[v];

        const std::uint64_t r = living[rng.uniform_below(living.size())];
        const std::uint32_t w = stub_vertex[r];
        const bool fresh = state[r] == SLEEPING;
        if (fresh) discover(w);
        state[r] = DEAD;
        unlive(r);
        --active_count[w];

        const HalfEdge lhe{v, static_cast<std::uint32_t>(l - offset[v])};
        const HalfEdge rhe{w, static_cast<std::uint32_t>(r - offset[w])};
        log.pairs.emplace_back(lhe, rhe);
        log.pair_is_backedge.push_back(fresh ? 0 : 1);
        if (!fresh) log.backedges.emplace_back(lhe, rhe);
        g.edges.emplace_back(v, w);
    }
    return {g, log};
}

inline std::pair<MultiGraph, ExplorationLog> construct(const DegreeSequence& degrees,
                                                       ExploreMode mode, Rng& rng) {
    return construct(degrees.degrees, mode, rng);
}

// Probability that uniform half-edge pairing of the given degrees produces
// exactly this labeled multigraph:
//   prod d_j! / ((sum d - 1)!! * prod_i 2^loop(i) loop(i)! * prod_{i<j} mult(i,j)!)
inline double multigraph_probability(const std::vector<std::uint64_t>& degrees,
                                     const MultiGraph& g) {
    if (g.n != degrees.size() || g.degree_sequence() != degrees)
        throw DegreeMismatch("multigraph_probability: graph degrees differ from input");
    std::uint64_t total = 0;
    for (std::uint64_t d : degrees) total += d;

    std::vector<std::uint64_t> loops(g.n, 0);
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> mult;
    for (const auto& e : g.edges) {
        if (e.first == e.second)
            ++loops[e.first];
        else
            ++mult[{std::min(e.first, e.second), std::max(e.first, e.second)}];
    }

    double logp = 0.0;
    for (std::uint64_t d : degrees) logp += std::lgamma(static_cast<double>(d) + 1.0);
    for (std::uint64_t k = 1; k < total; k += 2) logp -= std::log(static_cast<double>(k));
    for (std::uint64_t lc : loops)
        logp -= static_cast<double>(lc) * std::log(2.0) +
                std::lgamma(static_cast<double>(lc) + 1.0);
    for (const auto& [e, m] : mult) {
        (void)e;
        logp -= std::lgamma(static_cast<double>(m) + 1.0);
    }
    return std::exp(logp);
}

inline double multigraph_probability(const DegreeSequence& degrees, const MultiGraph& g) {
    return multigraph_probability(degrees.degrees, g);
}

// Replace each backedge by two fresh leaves (one per stub) and relabel the
// resulting forest in the log's exploration order. Children of a vertex are
// its non-parent stubs in rank order; a stub that belonged to a backedge
// contributes a new leaf in place of the removed edge.
inline ExploredForest split_backedges(const MultiGraph& g, const ExplorationLog& log) {
    const std::uint64_t n = g.n;
    const std::vector<std::uint64_t> degrees = g.degree_sequence();
    std::vector<std::uint64_t> offset(n + 1, 0);
    for (std::uint64_t v = 0; v < n; ++v) offset[v + 1] = offset[v] + degrees[v];
    const std::uint64_t total = offset[n];

    constexpr std::int64_t kNone = -1;
    std::vector<std::int64_t> tree_child(total, kNone); // target vertex of a tree-edge stub
    std::vector<std::uint8_t> parent_link(total, 0);
    std::vector<std::int64_t> leaf_of(total, kNone); // backedge index owning this stub
    std::vector<std::uint8_t> leaf_side(total, 0);   // 0 = frontier side, 1 = drawn side

    std::uint64_t nb = 0;
    for (std::size_t k = 0; k < log.pairs.size(); ++k) {
        const auto& [lhe, rhe] = log.pairs[k];
        const std::uint64_t ls = offset[lhe.vertex] + lhe.rank;
        const std::uint64_t rs = offset[rhe.vertex] + rhe.rank;
        if (log.pair_is_backedge[k]) {
            leaf_of[ls] = static_cast<std::int64_t>(nb);
            leaf_side[ls] = 0;
            leaf_of[rs] = static_cast<std::int64_t>(nb);
            leaf_side[rs] = 1;
            ++nb;
        } else {
            tree_child[ls] = rhe.vertex;
            parent_link[rs] = 1;
        }
    }

    ExploredForest f;
    const std::uint64_t p = n + 2 * nb;
    f.parent.reserve(p);
    f.is_new_leaf.reserve(p);
    f.graph_vertex.reserve(p);
    f.chi.reserve(p);
    f.new_leaf_pairs.assign(nb, {0, 0});

    struct Node {
        std::int64_t vertex;   // graph vertex, or -1 for a new leaf
        std::int64_t backedge; // owning backedge when a leaf
        std::uint8_t side;
        std::int64_t parent;
    };
    std::vector<Node> pending;

    for (std::uint32_t root : log.root_choices) {
        f.component_starts.push_back(f.parent.size());
        pending.clear();
        pending.push_back({root, kNone, 0, kNone});
        std::size_t head = 0;
        while (log.mode == ExploreMode::BF ? head < pending.size() : !pending.empty()) {
            Node node{};
            if (log.mode == ExploreMode::BF) {
                node = pending[head++];
            } else {
                node = pending.back();
                pending.pop_back();
            }
            const std::uint64_t u = f.parent.size();
            f.parent.push_back(node.parent);
            if (node.backedge >= 0) {
                f.is_new_leaf.push_back(1);
                f.graph_vertex.push_back(kNone);
                f.chi.push_back(0);
                auto& pr = f.new_leaf_pairs[static_cast<std::uint64_t>(node.backedge)];
                (node.side == 0 ? pr.first : pr.second) = u + 1; // 1-based labels
            } else {
                f.is_new_leaf.push_back(0);
                f.graph_vertex.push_back(node.vertex);
                const auto v = static_cast<std::uint64_t>(node.vertex);
                std::uint64_t kids = 0;
                const std::size_t first_kid = pending.size();
                for (std::uint64_t s = offset[v]; s < offset[v + 1]; ++s) {
                    if (parent_link[s]) continue;
                    if (tree_child[s] >= 0)
                        pending.push_back({tree_child[s], kNone, 0, static_cast<std::int64_t>(u)});
                    else if (leaf_of[s] >= 0)
                        pending.push_back({kNone, leaf_of[s], leaf_side[s],
                                           static_cast<std::int64_t>(u)});
                    else
                        throw DomainError("split_backedges: pairing log does not cover graph");
                    ++kids;
                }
                f.chi.push_back(kids);
                // depth-first pops from the back, so reverse to keep rank order
                if (log.mode == ExploreMode::DF)
                    std::reverse(pending.begin() + static_cast<std::ptrdiff_t>(first_kid),
                                 pending.end());
            }
        }
    }
    return f;
}

// depth of every forest node below its component root; parents always
// precede children in both labelings
inline std::vector<std::uint64_t> forest_levels(const ExploredForest& f) {
    std::vector<std::uint64_t> level(f.size(), 0);
    for (std::uint64_t u = 0; u < f.size(); ++u)
        if (f.parent[u] >= 0) level[u] = level[static_cast<std::uint64_t>(f.parent[u])] + 1;
    return level;
}

struct RebuildResult {
    StepPath x_walk;           // X(1..p); the zero origin is implicit
    MarkSet marks;             // completed (open, close) label pairs, 1-based
    StepPath backedge_counts;  // N(0..p) with the origin stored explicitly
};

// Reconstruct the forest walk X from the degree walk S alone. At each step
// either a new component opens (X sits one below its past minimum), a marked
// level is hit and the pending backedge closes, or a fresh vertex / new leaf
// is placed: the leaf probability is
//   (X - min X - #marks) / (X - min X - #marks + remaining degree mass),
// with the mark level drawn uniformly from the unmarked levels in
// [min X, X-1]. The numerator is the count of still-active half-edges in the
// matching graph exploration.
inline RebuildResult rebuild_x_from_s(const StepPath& s,
                                      const std::vector<std::uint64_t>& degrees, Rng& rng) {
    const std::uint64_t n = degrees.size();
    if (n == 0) throw StateError("rebuild_x_from_s: empty degree sequence");
    if (s.values.size() != n)
        throw StateError("rebuild_x_from_s: walk length does not match degree count");
    double prev = 0.0;
    for (std::uint64_t j = 0; j < n; ++j) {
        const auto d = static_cast<std::int64_t>(std::llround(s.values[j] - prev)) + 2;
        if (d < 0 || static_cast<std::uint64_t>(d) != degrees[j])
            throw StateError("rebuild_x_from_s: walk increments disagree with degrees");
        prev = s.values[j];
    }
    std::vector<std::uint64_t> suffix(n + 1, 0);
    for (std::uint64_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] + degrees[j];

    std::int64_t x = 0;
    std::int64_t min_incl = 0;                 // over indices <= k
    std::int64_t min_excl = INT64_MAX / 2;     // over indices <= k-1
    std::map<std::int64_t, std::uint64_t> open; // mark level -> opening label
    std::uint64_t tau = 0, nback = 0;
    RebuildResult res;
    res.backedge_counts.values.push_back(0.0);

    for (std::uint64_t k = 0;; ++k) {
        std::int64_t xnext = 0;
        if (k == 0 || x == min_excl - 1) {
            if (tau == n) break; // whole forest rebuilt
            ++tau;
            xnext = x + static_cast<std::int64_t>(degrees[tau - 1]) - 1;
        } else if (open.count(x)) {
            res.marks.pairs.emplace_back(open[x], k + 1);
            open.erase(x);
            xnext = x - 1;
        } else {
            const std::int64_t num = x - min_incl - static_cast<std::int64_t>(open.size());
            if (num < 0) throw StateError("rebuild_x_from_s: negative active count");
            const double den = static_cast<double>(num) + static_cast<double>(suffix[tau]);
            if (den <= 0.0) throw StateError("rebuild_x_from_s: no half-edges left to pair");
            if (rng.uniform01() * den < static_cast<double>(num)) {
                // new leaf opening a backedge; pick its partner level among
                // the unmarked levels of [min X, X-1]
                ++nback;
                std::int64_t level =
                    min_incl + static_cast<std::int64_t>(
                                   rng.uniform_below(static_cast<std::uint64_t>(num)));
                for (const auto& [ml, mi] : open) {
                    (void)mi;
                    if (ml <= level)
                        ++level;
                    else
                        break;
                }
                open.emplace(level, k + 1);
                xnext = x - 1;
            } else {
                if (tau == n)
                    throw StateError("rebuild_x_from_s: degree sequence exhausted mid-component");
                ++tau;
                xnext = x + static_cast<std::int64_t>(degrees[tau - 1]) - 2;
            }
        }
        res.x_walk.values.push_back(static_cast<double>(xnext));
        res.backedge_counts.values.push_back(static_cast<double>(nback));
        min_excl = min_incl;
        min_incl = std::min(min_incl, xnext);
        x = xnext;
    }
    if (!open.empty()) throw StateError("rebuild_x_from_s: unclosed backedge marks");
    res.x_walk.kind = PathKind::walk;
    res.backedge_counts.kind = PathKind::cumulative;
    return res;
}

// Size-biased random reordering of a degree sequence: sampling without
// replacement with probability proportional to degree, realized as an
// exponential race with rates equal to the degrees.
inline std::vector<std::uint64_t> size_biased_order(const std::vector<std::uint64_t>& degrees,
                                                    Rng& rng) {
    std::vector<std::pair<double, std::uint64_t>> keyed(degrees.size());
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        if (degrees[i] == 0) throw DomainError("size_biased_order: degrees must be positive");
        keyed[i] = {rng.exponential(1.0) / static_cast<double>(degrees[i]), degrees[i]};
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::uint64_t> out(degrees.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) out[i] = keyed[i].second;
    return out;
}

} // namespace critsir
