#pragma once

// Walk- and profile-valued statistics of explored multigraphs and their
// split forests: degree and child-count walks, height profiles by graph
// distance, the discrete Lamperti correspondence between a walk and level
// sizes, excursion decomposition above the running infimum, the depth
// process of a depth-first walk, mark pairs with surplus counts, and
// profile comparison.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "config_model.hpp"
#include "errors.hpp"
#include "step_path.hpp"

namespace critsir {

// S(k) = sum_{j<=k} (deg(v_j) - 2) over the discovery order.
inline StepPath s_walk(const ExplorationLog& log, const std::vector<std::uint64_t>& degrees) {
    StepPath s;
    s.kind = PathKind::walk;
    s.values.reserve(log.order.size());
    double run = 0.0;
    for (std::uint32_t v : log.order) {
        run += static_cast<double>(degrees[v]) - 2.0;
        s.values.push_back(run);
    }
    return s;
}

// X(k) = sum_{j<=k} (chi(u_j) - 1) over the forest labels.
inline StepPath x_walk(const ExploredForest& f) {
    StepPath x;
    x.kind = PathKind::walk;
    x.values.reserve(f.size());
    double run = 0.0;
    for (std::uint64_t c : f.chi) {
        run += static_cast<double>(c) - 1.0;
        x.values.push_back(run);
    }
    return x;
}

// The walk of a single component, shifted to start from level zero.
inline StepPath component_walk(const ExploredForest& f, std::size_t component) {
    const std::uint64_t a = f.component_starts[component];
    const std::uint64_t b = component + 1 < f.component_starts.size()
                                ? f.component_starts[component + 1]
                                : f.size();
    StepPath x;
    x.kind = PathKind::walk;
    x.values.reserve(b - a);
    double run = 0.0;
    for (std::uint64_t u = a; u < b; ++u) {
        run += static_cast<double>(f.chi[u]) - 1.0;
        x.values.push_back(run);
    }
    return x;
}

// Number of forest nodes at each depth below the component's root.
inline std::vector<std::uint64_t> forest_level_counts(const ExploredForest& f,
                                                      std::size_t component) {
    const std::uint64_t a = f.component_starts[component];
    const std::uint64_t b = component + 1 < f.component_starts.size()
                                ? f.component_starts[component + 1]
                                : f.size();
    std::vector<std::uint64_t> depth(b - a, 0), counts;
    for (std::uint64_t u = a; u < b; ++u) {
        if (f.parent[u] >= 0) depth[u - a] = depth[static_cast<std::uint64_t>(f.parent[u]) - a] + 1;
        if (depth[u - a] >= counts.size()) counts.resize(depth[u - a] + 1, 0);
        ++counts[depth[u - a]];
    }
    return counts;
}

// Height profile by graph distance from the root, confined to the root's
// component. Loops and edge multiplicities do not change distances. Returns
// the profile Z and its running sum C; C's last entry is the component size.
inline std::pair<StepPath, StepPath> height_profile(const MultiGraph& g, std::uint32_t root) {
    if (root >= g.n) throw DomainError("height_profile: root outside graph");
    std::vector<std::vector<std::uint32_t>> adj(g.n);
    for (const auto& e : g.edges) {
        adj[e.first].push_back(e.second);
        adj[e.second].push_back(e.first);
    }
    std::vector<std::int64_t> dist(g.n, -1);
    std::vector<std::uint32_t> queue{root};
    dist[root] = 0;
    std::vector<double> z{1.0};
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::uint32_t v = queue[head];
        for (std::uint32_t w : adj[v]) {
            if (dist[w] >= 0) continue;
            dist[w] = dist[v] + 1;
            if (static_cast<std::size_t>(dist[w]) >= z.size()) z.resize(dist[w] + 1, 0.0);
            z[static_cast<std::size_t>(dist[w])] += 1.0;
            queue.push_back(w);
        }
    }
    StepPath Z, C;
    Z.kind = PathKind::profile;
    Z.values = std::move(z);
    C.kind = PathKind::cumulative;
    C.values.reserve(Z.values.size());
    double run = 0.0;
    for (double v : Z.values) {
        run += v;
        C.values.push_back(run);
    }
    return {Z, C};
}

// Z(0) = z0, C(h) = sum_{j<=h} Z(j), Z(h+1) = z0 + x(C(h)); stops when Z
// reaches zero. The walk is read at integer times, x(0) = 0 implicit.
inline std::pair<StepPath, StepPath> discrete_lamperti(const StepPath& x, std::uint64_t z0) {
    StepPath Z, C;
    Z.kind = PathKind::profile;
    C.kind = PathKind::cumulative;
    double z = static_cast<double>(z0);
    Z.values.push_back(z);
    std::uint64_t c = 0;
    while (z > 0.0) {
        c += static_cast<std::uint64_t>(std::llround(z));
        if (c > x.values.size())
            throw IndexError("discrete_lamperti: cumulative mass leaves the walk's domain");
        C.values.push_back(static_cast<double>(c));
        z = static_cast<double>(z0) + x.values[c - 1];
        Z.values.push_back(z);
    }
    return {Z, C};
}

struct Excursion {
    std::uint64_t start = 0;  // time of the delimiter the excursion sits on
    std::uint64_t length = 0;
    std::vector<double> values; // shifted to start from level 0
};
using ExcursionList = std::vector<Excursion>;

// Split a walk at the first hitting times of -1, -2, ...; each piece is
// shifted to start at 0. A trailing incomplete piece is kept. Sorted by
// decreasing length, ties by start index.
inline ExcursionList excursions_above_min(const StepPath& x) {
    ExcursionList out;
    std::uint64_t start = 0;
    std::int64_t level = 0;
    std::vector<double> cur;
    for (std::uint64_t t = 1; t <= x.values.size(); ++t) {
        const double v = x.values[t - 1];
        if (v < static_cast<double>(level) - 1.5)
            throw DomainError("excursions_above_min: walk jumps below -1");
        cur.push_back(v - static_cast<double>(level));
        if (std::llround(v) == level - 1) {
            out.push_back({start, t - start, std::move(cur)});
            cur.clear();
            start = t;
            --level;
        }
    }
    if (!cur.empty()) out.push_back({start, x.values.size() - start, std::move(cur)});
    std::sort(out.begin(), out.end(), [](const Excursion& a, const Excursion& b) {
        if (a.length != b.length) return a.length > b.length;
        return a.start < b.start;
    });
    return out;
}

// H(k) = #{j < k : x(j) = inf_{j<=l<=k} x(l)} with x(0) = 0 prefixed; for a
// depth-first walk this is the depth of the (k+1)-th forest node. Monotone
// stack, O(m) amortized.
inline StepPath discrete_height(const StepPath& x) {
    const std::size_t m = x.values.size();
    StepPath h;
    h.kind = PathKind::height;
    h.values.reserve(m);
    std::vector<double> stack;
    for (std::size_t k = 0; k < m; ++k) {
        const double xk = k == 0 ? 0.0 : x.values[k - 1];
        while (!stack.empty() && stack.back() > xk) stack.pop_back();
        h.values.push_back(static_cast<double>(stack.size()));
        stack.push_back(xk);
    }
    return h;
}

// Mark pairs of the forest plus the surplus (= backedge = independent cycle)
// count. The pair coordinates live on the exploration-time axis, so only the
// time factor rescales them; the height factor is carried by callers that
// scale profiles.
inline std::pair<MarkSet, std::uint64_t> marks_and_surplus(const ExploredForest& f) {
    MarkSet m;
    m.pairs = f.new_leaf_pairs;
    return {std::move(m), f.new_leaf_pairs.size()};
}

inline std::pair<MarkSet, std::uint64_t> marks_and_surplus(const ExploredForest& f,
                                                           std::pair<double, double> scale) {
    auto [m, s] = marks_and_surplus(f);
    m.rescaled.reserve(m.pairs.size());
    for (const auto& [l, r] : m.pairs)
        m.rescaled.emplace_back(static_cast<double>(l) * scale.first,
                                static_cast<double>(r) * scale.first);
    return {std::move(m), s};
}

// Surplus per component: pairs are counted by the component range their
// labels fall in (both labels of a pair always share a component).
inline std::vector<std::uint64_t> surplus_by_component(const ExploredForest& f) {
    std::vector<std::uint64_t> out(f.component_starts.size(), 0);
    for (const auto& [l, r] : f.new_leaf_pairs) {
        (void)r;
        std::size_t c = f.component_starts.size();
        while (c > 0 && f.component_starts[c - 1] >= l) --c; // l is 1-based
        ++out[c == 0 ? 0 : c - 1];
    }
    return out;
}

// sum_h |Z_graph(h) - Z_forest(h)|, missing heights counted as zero.
inline std::uint64_t profile_discrepancy(const StepPath& z_graph, const StepPath& z_forest) {
    const std::size_t m = std::max(z_graph.values.size(), z_forest.values.size());
    std::uint64_t total = 0;
    for (std::size_t h = 0; h < m; ++h) {
        const double a = h < z_graph.values.size() ? z_graph.values[h] : 0.0;
        const double b = h < z_forest.values.size() ? z_forest.values[h] : 0.0;
        total += static_cast<std::uint64_t>(std::llabs(std::llround(a - b)));
    }
    return total;
}

// Running sum of a profile; dt and recorded scales carry over.
inline StepPath cumulate(const StepPath& profile) {
    StepPath c = profile;
    c.kind = PathKind::cumulative;
    double run = 0.0;
    for (double& v : c.values) {
        run += v;
        v = run;
    }
    return c;
}

// Multiply values by a space factor and the grid spacing by a time factor;
// the applied factors accumulate in the provenance fields.
inline StepPath rescale(const StepPath& p, double time_scale, double space_scale) {
    StepPath q = p;
    q.dt *= time_scale;
    q.time_scale *= time_scale;
    q.space_scale *= space_scale;
    for (double& v : q.values) v *= space_scale;
    return q;
}

} // namespace critsir
