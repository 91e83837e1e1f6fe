#ifndef ERGOLAB_CLUSTER_HPP
#define ERGOLAB_CLUSTER_HPP

#include <ergolab/bernoulli.hpp>
#include <ergolab/percolation.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ergolab {

/// The cluster relation on the percolation-label extension of a finite
/// graphing: (x, omega) ~ (y, omega) iff x and y lie in the same open
/// cluster of omega. Exhaustive over all 2^(n|C|) label patterns per class.
struct ClusterRelation {
    EqRel ext;                 // full extension relation (x, omega) ~ (y, omega) iff x R y
    EqRel cl;                  // cluster refinement
    std::vector<char> bigLocus;  // per cl-class (by class index): cluster size >= threshold
};

inline ClusterRelation cluster_relation(const Graphing& g, const Rat& p, int size_threshold,
                                        long long budget = 1'000'000) {
    const EqRel& rel = g.rel;
    const int n = static_cast<int>(g.n());
    long long total = 0;
    std::vector<long long> offset(rel.size(), 0);
    for (std::size_t x = 0; x < rel.size(); ++x) {
        offset[x] = total;
        long long codes = detail::checked_pow(2, g.n() * rel.cls(static_cast<int>(x)).size(), budget);
        if (codes > budget || total > budget - codes) throw BudgetError("cluster relation exceeds budget");
        total += codes;
    }

    std::vector<Rat> w(static_cast<std::size_t>(total));
    std::vector<std::vector<int>> ext_parts, cl_parts;
    std::vector<char> big;
    const Rat q = Rat(1) - p;
    for (const auto& c : rel.classes) {
        const int slots = n * static_cast<int>(c.size());
        const long long codes = 1ll << slots;
        for (long long mask = 0; mask < codes; ++mask) {
            Rat product = 1;
            for (int s = 0; s < slots; ++s) product *= (mask >> s) & 1 ? p : q;
            std::vector<int> cls;
            for (int y : c) {
                int id = static_cast<int>(offset[y] + mask);
                w[id] = rel.space.weight[y] * product;
                cls.push_back(id);
            }
            ext_parts.push_back(cls);

            // open slot (pos, i) joins c[pos] with theta_i(c[pos])
            detail::UnionFind uf(c.size());
            auto pos_of = [&c](int point) {
                return static_cast<int>(std::lower_bound(c.begin(), c.end(), point) - c.begin());
            };
            for (std::size_t pos = 0; pos < c.size(); ++pos)
                for (int i = 0; i < n; ++i)
                    if ((mask >> (static_cast<int>(pos) * n + i)) & 1)
                        uf.unite(static_cast<int>(pos), pos_of(g.gens[i](c[pos])));
            std::vector<std::vector<int>> groups(c.size());
            for (std::size_t pos = 0; pos < c.size(); ++pos)
                groups[uf.find(static_cast<int>(pos))].push_back(
                    static_cast<int>(offset[c[pos]] + mask));
            for (auto& grp : groups)
                if (!grp.empty()) {
                    big.push_back(grp.size() >= static_cast<std::size_t>(size_threshold) ? 1 : 0);
                    cl_parts.push_back(std::move(grp));
                }
        }
    }
    ClusterRelation out;
    ProbSpace space(std::move(w));
    out.ext = EqRel::from_classes(space, std::move(ext_parts));
    out.cl = EqRel::from_classes(space, cl_parts);
    // from_classes sorts classes by minimum id; realign the locus flags
    out.bigLocus.assign(big.size(), 0);
    for (std::size_t i = 0; i < cl_parts.size(); ++i) {
        std::sort(cl_parts[i].begin(), cl_parts[i].end());
        out.bigLocus[out.cl.class_index(cl_parts[i].front())] = big[i];
    }
    return out;
}

enum class EndsVerdict { one, two, threePlus, inconclusive };

struct EndsEstimate {
    int cluster = -1;
    std::vector<int> counts;  // boundary-reaching components per scale
    EndsVerdict verdict = EndsVerdict::inconclusive;
};

/// Deletes the radius-r ball around the cluster's root (its minimum vertex)
/// inside the open subgraph and counts the remaining components that still
/// reach the window boundary; the verdict needs agreement across scales.
inline EndsEstimate ends_estimator(const PercConfig& cfg, const ClusterPartition& part,
                                   int cluster, const std::vector<int>& scales) {
    const CayleyWindow& w = *cfg.window;
    EndsEstimate est;
    est.cluster = cluster;
    if (part.boundary_touches(cluster) == 0) return est;  // interior cluster: inconclusive

    // open adjacency restricted to the cluster
    std::vector<std::vector<int>> adj(w.vertex_count());
    for (const auto& e : w.edges)
        if (e.u != e.v && cfg.open(e) && part.cluster_of[e.u] == cluster &&
            part.cluster_of[e.v] == cluster) {
            adj[e.u].push_back(e.v);
            adj[e.v].push_back(e.u);
        }
    // BFS distances from the root within the cluster
    std::vector<int> dist(w.vertex_count(), -1);
    std::vector<int> queue{cluster};
    dist[cluster] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        int v = queue[head];
        for (int u : adj[v])
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
    }

    for (int r : scales) {
        detail::UnionFind uf(w.vertex_count());
        for (std::size_t v = 0; v < w.vertex_count(); ++v) {
            if (part.cluster_of[v] != cluster || dist[v] < 0 || dist[v] <= r) continue;
            for (int u : adj[v])
                if (dist[u] > r) uf.unite(static_cast<int>(v), u);
        }
        std::vector<char> counted(w.vertex_count(), 0);
        int comps = 0;
        for (std::size_t v = 0; v < w.vertex_count(); ++v) {
            if (part.cluster_of[v] != cluster || dist[v] < 0 || dist[v] <= r) continue;
            if (!w.is_boundary(static_cast<int>(v))) continue;
            int root = uf.find(static_cast<int>(v));
            if (!counted[root]) {
                counted[root] = 1;
                ++comps;
            }
        }
        est.counts.push_back(comps);
    }
    bool stable = !est.counts.empty();
    for (int c : est.counts)
        if (c != est.counts.front()) stable = false;
    if (!stable) return est;
    int c = est.counts.front();
    est.verdict = c >= 3 ? EndsVerdict::threePlus
                         : (c == 2 ? EndsVerdict::two
                                   : (c == 1 ? EndsVerdict::one : EndsVerdict::inconclusive));
    return est;
}

/// Default scale ladder r, 2r, 4r with r = window radius / 8 (at least 1).
inline std::vector<int> default_ends_scales(const CayleyWindow& w) {
    int r = std::max(1, w.radius / 8);
    return {r, 2 * r, 4 * r};
}

struct CostProxy {
    long long forestEdges = 0;  // sum over clusters of |V_c| - 1
    long long vertices = 0;
    long long firstBetti = 0;   // open edges on the big locus - |V_big| + #big clusters
};

inline CostProxy cost_proxies(const PercConfig& cfg, const ClusterPartition& part,
                              std::size_t big_size) {
    const CayleyWindow& w = *cfg.window;
    CostProxy cost;
    cost.vertices = static_cast<long long>(w.vertex_count());
    cost.forestEdges = cost.vertices - static_cast<long long>(part.roots.size());
    long long big_vertices = 0, big_clusters = 0, big_edges = 0;
    for (int r : part.roots)
        if (part.size_of(r) >= static_cast<int>(big_size)) {
            ++big_clusters;
            big_vertices += part.size_of(r);
        }
    for (const auto& e : w.edges)
        if (e.u != e.v && cfg.open(e) && part.cluster_of[e.u] == part.cluster_of[e.v] &&
            part.size_of(part.cluster_of[e.u]) >= static_cast<int>(big_size))
            ++big_edges;
    cost.firstBetti = big_edges - big_vertices + big_clusters;
    return cost;
}

struct ExchangeReport {
    double stat = 0.0;    // mean paired difference of the cluster feature
    double pValue = 1.0;  // two-sided sign-flip permutation test
    bool reject = false;  // at alpha = 0.01
    int pairs = 0;
};

namespace detail {

inline double betti_density(const PercConfig& cfg, const ClusterPartition& part, int cluster) {
    long long edges = 0;
    for (const auto& e : cfg.window->edges)
        if (e.u != e.v && cfg.open(e) && part.cluster_of[e.u] == cluster &&
            part.cluster_of[e.v] == cluster)
            ++edges;
    long long v = part.size_of(cluster);
    return static_cast<double>(edges - v + 1) / static_cast<double>(v);
}

}  // namespace detail

/// Indistinguishability probe: per seed, compares a feature (first Betti
/// density) of the two largest big clusters; exchangeability is tested with
/// a deterministic sign-flip permutation test.
inline ExchangeReport exchangeability_probe(const CayleyWindow& w, double p,
                                            const std::vector<std::uint64_t>& seeds,
                                            std::size_t big_size, int flips = 10000) {
    std::vector<double> diffs;
    for (std::uint64_t seed : seeds) {
        PercConfig cfg{p, &w, EdgeLabels{seed}};
        ClusterPartition part = percolate(cfg);
        int first = -1, second = -1;
        for (int r : part.roots) {
            if (part.size_of(r) < static_cast<int>(big_size)) continue;
            if (first < 0 || part.size_of(r) > part.size_of(first)) {
                second = first;
                first = r;
            } else if (second < 0 || part.size_of(r) > part.size_of(second)) {
                second = r;
            }
        }
        if (first < 0 || second < 0) continue;
        diffs.push_back(detail::betti_density(cfg, part, first) -
                        detail::betti_density(cfg, part, second));
    }
    ExchangeReport rep;
    rep.pairs = static_cast<int>(diffs.size());
    if (diffs.empty()) return rep;
    for (double d : diffs) rep.stat += d / static_cast<double>(diffs.size());

    SplitMix rng(0x45584348u);
    int at_least = 0;
    for (int f = 0; f < flips; ++f) {
        double s = 0.0;
        for (double d : diffs) s += (rng.next() & 1 ? d : -d) / static_cast<double>(diffs.size());
        if (std::abs(s) >= std::abs(rep.stat) - 1e-15) ++at_least;
    }
    rep.pValue = static_cast<double>(at_least + 1) / static_cast<double>(flips + 1);
    rep.reject = rep.pValue < 0.01;
    return rep;
}

}  // namespace ergolab

#endif
