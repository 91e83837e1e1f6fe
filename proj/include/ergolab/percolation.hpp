#ifndef ERGOLAB_PERCOLATION_HPP
#define ERGOLAB_PERCOLATION_HPP

#include <ergolab/cayley.hpp>
#include <ergolab/graphing.hpp>
#include <ergolab/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergolab {

/// Uniform edge labels keyed by (seed, edge key): order-independent and
/// stable as windows grow. `scale` rescales labels for second-round
/// percolation on an already-thinned subgraph (labels conditioned on being
/// <= scale are uniform on [0,1) after division).
struct EdgeLabels {
    std::uint64_t seed = 0;
    std::string rngId = "splitmix64-counter";
    double scale = 1.0;

    double operator()(std::uint64_t key) const { return to_unit(mix64(seed, key)) / scale; }
};

struct PercConfig {
    double p = 0.0;
    const CayleyWindow* window = nullptr;
    EdgeLabels labels;

    bool open(const CayleyWindow::Edge& e) const { return labels(e.key) <= p; }
};

/// Clusters of the open subgraph. Cluster ids are canonical: the minimum
/// vertex id in the cluster.
struct ClusterPartition {
    std::vector<int> cluster_of;
    std::vector<int> roots;                    // sorted cluster ids
    std::vector<int> size_at;                  // valid at cluster ids
    std::vector<std::uint64_t> boundary_mask;  // valid at cluster ids; bit per component, saturating at 64

    int size_of(int cluster) const { return size_at[cluster]; }
    int boundary_touches(int cluster) const {
        return __builtin_popcountll(boundary_mask[cluster]);
    }
};

inline ClusterPartition percolate(const PercConfig& cfg) {
    const CayleyWindow& w = *cfg.window;
    const std::size_t nv = w.vertex_count();
    detail::UnionFind uf(nv);
    for (const auto& e : w.edges)
        if (e.u != e.v && cfg.open(e)) uf.unite(e.u, e.v);

    ClusterPartition part;
    part.cluster_of.assign(nv, -1);
    std::vector<int> min_of(nv, -1);
    for (std::size_t v = 0; v < nv; ++v) {
        int r = uf.find(static_cast<int>(v));
        if (min_of[r] < 0) min_of[r] = static_cast<int>(v);  // first hit = minimum (ascending scan)
    }
    part.size_at.assign(nv, 0);
    part.boundary_mask.assign(nv, 0);
    for (std::size_t v = 0; v < nv; ++v) {
        int c = min_of[uf.find(static_cast<int>(v))];
        part.cluster_of[v] = c;
        ++part.size_at[c];
        int b = w.boundary_component[v];
        if (b >= 0) part.boundary_mask[c] |= 1ull << std::min(b, 63);
        if (c == static_cast<int>(v)) part.roots.push_back(c);
    }
    return part;
}

struct SweepOptions {
    double frac_threshold = 0.05;  // mean largest-fraction crossing defines the p_c estimate
    std::size_t big_size = 0;      // 0 = |V|^0.6
};

struct SweepRow {
    double p;
    std::uint64_t seed;
    double largestFrac;
    int bigClusters;
    int spanning;
};

struct PhaseReport {
    std::vector<double> p_grid;
    std::size_t big_size = 0;
    std::vector<SweepRow> rows;          // sorted by (seed, p)
    std::vector<double> mean_largest;    // per grid p
    std::vector<double> mean_big;        // uniqueness indicator per grid p
    double p_c_hat = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline std::size_t default_big_size(std::size_t nv) {
    return static_cast<std::size_t>(std::pow(static_cast<double>(nv), 0.6));
}

/// Incremental percolation state over one seed's sorted edge order.
/// Adding edges in ascending label order realizes the monotone coupling:
/// the state at p is the state after all edges with label <= p.
class SweepState {
public:
    SweepState(const CayleyWindow& w, std::size_t big_size)
        : window_(w),
          uf_(w.vertex_count()),
          size_(w.vertex_count(), 1),
          mask_(w.vertex_count(), 0),
          big_size_(big_size),
          need_(w.boundary_component_count() >= 2 ? 2 : 1) {
        for (std::size_t v = 0; v < w.vertex_count(); ++v) {
            int b = w.boundary_component[v];
            if (b >= 0) mask_[v] = 1ull << std::min(b, 63);
        }
        largest_ = w.vertex_count() ? 1 : 0;
        if (big_size_ <= 1) big_ = static_cast<int>(w.vertex_count());
    }

    void add_edge(int u, int v) {
        int a = uf_.find(u), b = uf_.find(v);
        if (a == b) return;
        if (size_[a] >= static_cast<long long>(big_size_)) --big_;
        if (size_[b] >= static_cast<long long>(big_size_)) --big_;
        uf_.unite(a, b);
        int r = uf_.find(a);
        size_[r] = size_[a] + size_[b];
        mask_[r] = mask_[a] | mask_[b];
        if (size_[r] >= static_cast<long long>(big_size_)) ++big_;
        largest_ = std::max(largest_, size_[r]);
        if (!spanning_ && __builtin_popcountll(mask_[r]) >= need_ &&
            (need_ == 2 || size_[r] >= static_cast<long long>(big_size_)))
            spanning_ = true;
    }

    double largest_frac() const {
        return static_cast<double>(largest_) / static_cast<double>(window_.vertex_count());
    }
    int big_clusters() const { return big_; }
    int spanning() const { return spanning_ ? 1 : 0; }

private:
    const CayleyWindow& window_;
    UnionFind uf_;
    std::vector<long long> size_;
    std::vector<std::uint64_t> mask_;
    std::size_t big_size_;
    int need_;
    long long largest_ = 0;
    int big_ = 0;
    bool spanning_ = false;
};

}  // namespace detail

/// Full phase sweep: one set of labels per seed shared across the whole grid
/// (monotone coupling), processed incrementally in ascending label order.
inline PhaseReport sweep(const CayleyWindow& w, const std::vector<double>& p_grid,
                         const std::vector<std::uint64_t>& seeds, SweepOptions opts = {},
                         double label_scale = 1.0) {
    if (!std::is_sorted(p_grid.begin(), p_grid.end()))
        throw std::invalid_argument("p grid must be ascending");
    PhaseReport rep;
    rep.p_grid = p_grid;
    rep.big_size = opts.big_size ? opts.big_size : detail::default_big_size(w.vertex_count());

    std::vector<double> label(w.edges.size());
    std::vector<std::uint32_t> order(w.edges.size());
    for (std::uint64_t seed : seeds) {
        EdgeLabels labels{seed, "splitmix64-counter", label_scale};
        for (std::size_t i = 0; i < w.edges.size(); ++i) label[i] = labels(w.edges[i].key);
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(),
                  [&label](std::uint32_t a, std::uint32_t b) { return label[a] < label[b]; });

        detail::SweepState state(w, rep.big_size);
        std::size_t next = 0;
        for (double p : p_grid) {
            while (next < order.size() && label[order[next]] <= p) {
                const auto& e = w.edges[order[next]];
                if (e.u != e.v) state.add_edge(e.u, e.v);
                ++next;
            }
            rep.rows.push_back({p, seed, state.largest_frac(), state.big_clusters(), state.spanning()});
        }
    }

    rep.mean_largest.assign(p_grid.size(), 0.0);
    rep.mean_big.assign(p_grid.size(), 0.0);
    for (std::size_t s = 0; s < seeds.size(); ++s)
        for (std::size_t i = 0; i < p_grid.size(); ++i) {
            const auto& row = rep.rows[s * p_grid.size() + i];
            rep.mean_largest[i] += row.largestFrac / static_cast<double>(seeds.size());
            rep.mean_big[i] += static_cast<double>(row.bigClusters) / static_cast<double>(seeds.size());
        }
    for (std::size_t i = 0; i < p_grid.size(); ++i)
        if (rep.mean_largest[i] > opts.frac_threshold) {
            rep.p_c_hat = p_grid[i];
            break;
        }
    return rep;
}

struct Interval {
    bool empty = true;
    double lo = 0.0;
    double hi = 0.0;
};

/// The nonuniqueness interval (1/(2n - normT + 1), 1/normT); Empty when the
/// bounds cross.
inline Interval interval_for_p(int n, double normT) {
    if (normT <= 0.0) throw std::invalid_argument("operator norm must be positive");
    if (normT > 2.0 * n + 1e-12) throw std::invalid_argument("operator norm exceeds 2n");
    Interval iv;
    iv.lo = 1.0 / (2.0 * n - normT + 1.0);
    iv.hi = 1.0 / normT;
    iv.empty = iv.lo >= iv.hi;
    return iv;
}

struct ProbeReport {
    double meanBigClusters = 0.0;
    double fractionWithMany = 0.0;
    int manyThreshold = 10;
    std::vector<int> counts;  // per seed
};

/// Counts clusters of size >= sizeThreshold per seed; "many" = >= 10.
inline ProbeReport nonuniqueness_probe(const CayleyWindow& w, double p,
                                       const std::vector<std::uint64_t>& seeds,
                                       long long size_threshold) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("p must lie in (0,1)");
    ProbeReport rep;
    for (std::uint64_t seed : seeds) {
        PercConfig cfg{p, &w, EdgeLabels{seed}};
        ClusterPartition part = percolate(cfg);
        int big = 0;
        for (int r : part.roots)
            if (part.size_of(r) >= size_threshold) ++big;
        rep.counts.push_back(big);
        rep.meanBigClusters += static_cast<double>(big) / static_cast<double>(seeds.size());
        if (big >= rep.manyThreshold) rep.fractionWithMany += 1.0 / static_cast<double>(seeds.size());
    }
    return rep;
}

struct RescaleReport {
    double base_pc = 0.0;
    double second_pc = 0.0;
    double expected = 0.0;  // base_pc / p0
    std::size_t cluster_size = 0;
};

/// Two-round percolation: percolate at p0, then sweep the largest cluster's
/// open subgraph. Second-round labels are the first-round labels divided by
/// p0 (uniform again on the surviving edges), so p0 = 1 reproduces the base
/// sweep exactly and the composite keep-probability at second-round q is
/// q * p0.
inline RescaleReport rescaled_pc(const CayleyWindow& w, double p0,
                                 const std::vector<double>& p_grid,
                                 const std::vector<std::uint64_t>& seeds,
                                 SweepOptions opts = {}) {
    PhaseReport base = sweep(w, p_grid, seeds, opts);
    if (std::isnan(base.p_c_hat) || p0 <= base.p_c_hat)
        throw std::invalid_argument("first round subcritical");

    RescaleReport rep;
    rep.base_pc = base.p_c_hat;
    rep.expected = base.p_c_hat / p0;

    // Second-round windows per seed would differ; use the first seed's
    // largest cluster as the substrate and sweep all seeds' rescaled labels
    // on it. The rescaled label of a kept edge is its label / p0.
    PercConfig first{p0, &w, EdgeLabels{seeds.front()}};
    ClusterPartition part = percolate(first);
    int best = part.roots.front();
    for (int r : part.roots)
        if (part.size_of(r) > part.size_of(best)) best = r;

    CayleyWindow sub;
    sub.kind = w.kind + "-rescaled";
    sub.radius = w.radius;
    sub.degree_interior = w.degree_interior;
    std::vector<int> new_id(w.vertex_count(), -1);
    for (std::size_t v = 0; v < w.vertex_count(); ++v)
        if (part.cluster_of[v] == best) {
            new_id[v] = static_cast<int>(sub.boundary_component.size());
            sub.boundary_component.push_back(w.boundary_component[v]);
        }
    rep.cluster_size = sub.boundary_component.size();
    for (const auto& e : w.edges)
        if (e.u != e.v && new_id[e.u] >= 0 && new_id[e.v] >= 0 && first.open(e))
            sub.edges.push_back({new_id[e.u], new_id[e.v], e.label, e.key});

    PhaseReport second = sweep(sub, p_grid, {seeds.front()}, opts, p0);
    rep.second_pc = second.p_c_hat;
    return rep;
}

/// Closed window view of a finite class graph (no boundary), so percolation
/// diagnostics run on finite models too. Edge keys are positional.
inline CayleyWindow window_from_class_graph(const ClassGraph& cg) {
    CayleyWindow w;
    w.kind = "class-graph";
    w.degree_interior = cg.vertices.empty() ? 0 : cg.degree(cg.vertices.front());
    w.boundary_component.assign(cg.vertices.size(), -1);
    auto idx = [&cg](int point) {
        return static_cast<int>(std::lower_bound(cg.vertices.begin(), cg.vertices.end(), point) -
                                cg.vertices.begin());
    };
    for (std::size_t i = 0; i < cg.edges.size(); ++i)
        w.edges.push_back({idx(cg.edges[i].u), idx(cg.edges[i].v), cg.edges[i].gen,
                           static_cast<std::uint64_t>(i)});
    return w;
}

}  // namespace ergolab

#endif
