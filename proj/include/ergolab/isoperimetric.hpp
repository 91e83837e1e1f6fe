#ifndef ERGOLAB_ISOPERIMETRIC_HPP
#define ERGOLAB_ISOPERIMETRIC_HPP

#include <ergolab/cayley.hpp>
#include <ergolab/graphing.hpp>
#include <ergolab/rng.hpp>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ergolab {

namespace detail {

/// Common view for isoperimetric search: edge list plus the vertex set
/// candidate subsets may use. Windows exclude boundary vertices so |dF| is
/// exact; finite class graphs restrict to |F| <= |V|/2.
struct IsoView {
    std::size_t vertex_count = 0;
    std::vector<std::pair<int, int>> edges;  // self-loops dropped (never boundary)
    std::vector<int> allowed;                // candidate vertices for F
    std::size_t max_subset = 0;              // 0 = no cap
};

inline IsoView iso_view(const ClassGraph& cg) {
    IsoView v;
    v.vertex_count = cg.vertices.size();
    auto idx = [&cg](int point) {
        return static_cast<int>(std::lower_bound(cg.vertices.begin(), cg.vertices.end(), point) -
                                cg.vertices.begin());
    };
    for (const auto& e : cg.edges)
        if (e.u != e.v) v.edges.emplace_back(idx(e.u), idx(e.v));
    for (std::size_t i = 0; i < v.vertex_count; ++i) v.allowed.push_back(static_cast<int>(i));
    v.max_subset = v.vertex_count / 2;
    return v;
}

inline IsoView iso_view(const CayleyWindow& w) {
    IsoView v;
    v.vertex_count = w.vertex_count();
    for (const auto& e : w.edges)
        if (e.u != e.v) v.edges.emplace_back(e.u, e.v);
    for (std::size_t i = 0; i < v.vertex_count; ++i)
        if (!w.is_boundary(static_cast<int>(i))) v.allowed.push_back(static_cast<int>(i));
    v.max_subset = 0;
    return v;
}

}  // namespace detail

struct IsoEstimate {
    bool exact = false;
    double value = std::numeric_limits<double>::infinity();  // best |dF|/|F|
    std::vector<int> certificate;                            // F achieving it
};

constexpr std::size_t kIsoExactCap = 24;

/// Exhaustive edge-isoperimetric constant by Gray-code subset enumeration.
inline IsoEstimate isoperimetric_exact(const detail::IsoView& view) {
    const std::size_t k = view.allowed.size();
    if (k == 0 || k > kIsoExactCap) throw std::invalid_argument("exact mode needs 1..24 candidate vertices");

    // incidence of candidate slots on edges
    std::vector<std::vector<int>> slot_edges(k);
    std::vector<int> slot_of(view.vertex_count, -1);
    for (std::size_t i = 0; i < k; ++i) slot_of[view.allowed[i]] = static_cast<int>(i);
    for (std::size_t e = 0; e < view.edges.size(); ++e) {
        auto [u, vv] = view.edges[e];
        if (slot_of[u] >= 0) slot_edges[slot_of[u]].push_back(static_cast<int>(e));
        if (slot_of[vv] >= 0) slot_edges[slot_of[vv]].push_back(static_cast<int>(e));
    }

    std::vector<char> in(view.vertex_count, 0);
    long long boundary = 0;
    long long fsize = 0;
    IsoEstimate best;
    best.exact = true;
    std::uint64_t best_mask = 0, mask = 0;
    const std::uint64_t total = 1ull << k;
    for (std::uint64_t g = 1; g < total; ++g) {
        // Gray code: flip the lowest set bit position of g.
        int slot = __builtin_ctzll(g);
        int vert = view.allowed[static_cast<std::size_t>(slot)];
        bool adding = !in[vert];
        // update boundary: edges incident to vert flip their crossing state
        for (int e : slot_edges[static_cast<std::size_t>(slot)]) {
            auto [u, vv] = view.edges[static_cast<std::size_t>(e)];
            int other = (u == vert) ? vv : u;
            bool other_in = in[other];
            if (adding)
                boundary += other_in ? -1 : 1;
            else
                boundary += other_in ? 1 : -1;
        }
        in[vert] = adding ? 1 : 0;
        fsize += adding ? 1 : -1;
        mask ^= 1ull << slot;
        if (fsize == 0) continue;
        if (view.max_subset && static_cast<std::size_t>(fsize) > view.max_subset) continue;
        double ratio = static_cast<double>(boundary) / static_cast<double>(fsize);
        if (ratio < best.value) {
            best.value = ratio;
            best_mask = mask;
        }
    }
    for (std::size_t i = 0; i < k; ++i)
        if (best_mask & (1ull << i)) best.certificate.push_back(view.allowed[i]);
    return best;
}

namespace detail {

inline long long boundary_size(const IsoView& view, const std::vector<char>& in) {
    long long b = 0;
    for (auto [u, v] : view.edges) b += (in[u] != in[v]) ? 1 : 0;
    return b;
}

/// Random connected subset of the allowed vertex set, grown by BFS with
/// random frontier picks.
inline std::vector<int> random_connected_subset(const IsoView& view,
                                                const std::vector<std::vector<int>>& adj,
                                                std::size_t target, SplitMix& rng) {
    std::vector<char> allowed(view.vertex_count, 0);
    for (int v : view.allowed) allowed[v] = 1;
    int start = view.allowed[rng.below(view.allowed.size())];
    std::vector<char> in(view.vertex_count, 0);
    std::vector<int> subset{start}, frontier;
    in[start] = 1;
    for (int u : adj[start])
        if (allowed[u] && !in[u]) frontier.push_back(u);
    while (subset.size() < target && !frontier.empty()) {
        std::size_t pick = rng.below(frontier.size());
        int v = frontier[pick];
        frontier[pick] = frontier.back();
        frontier.pop_back();
        if (in[v]) continue;
        in[v] = 1;
        subset.push_back(v);
        for (int u : adj[v])
            if (allowed[u] && !in[u]) frontier.push_back(u);
    }
    return subset;
}

}  // namespace detail

/// Sampled upper bound: random connected subsets plus greedy descent on
/// |dF|/|F| (single-vertex moves within the allowed set).
inline IsoEstimate isoperimetric_sampled(const detail::IsoView& view, int samples,
                                         std::uint64_t seed) {
    if (view.allowed.empty()) throw std::invalid_argument("no candidate vertices");
    std::vector<std::vector<int>> adj(view.vertex_count);
    for (auto [u, v] : view.edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    SplitMix rng(seed);
    IsoEstimate best;
    best.exact = false;
    std::size_t cap = view.max_subset ? view.max_subset : view.allowed.size();
    for (int s = 0; s < samples; ++s) {
        std::size_t target = 1 + rng.below(cap);
        auto subset = detail::random_connected_subset(view, adj, target, rng);
        std::vector<char> in(view.vertex_count, 0);
        for (int v : subset) in[v] = 1;
        long long boundary = detail::boundary_size(view, in);
        long long fsize = static_cast<long long>(subset.size());
        std::vector<char> allowed(view.vertex_count, 0);
        for (int v : view.allowed) allowed[v] = 1;
        // greedy descent
        bool improved = true;
        while (improved) {
            improved = false;
            for (int v : view.allowed) {
                bool adding = !in[v];
                if (!adding && fsize == 1) continue;
                if (adding && static_cast<std::size_t>(fsize) >= cap) continue;
                long long delta = 0;
                for (int u : adj[v]) {
                    if (u == v) continue;
                    delta += (in[u] == in[v]) ? 1 : -1;
                }
                long long nb = boundary + delta;
                long long nf = fsize + (adding ? 1 : -1);
                if (static_cast<double>(nb) * fsize < static_cast<double>(boundary) * nf) {
                    in[v] = adding ? 1 : 0;
                    boundary = nb;
                    fsize = nf;
                    improved = true;
                }
            }
        }
        double ratio = static_cast<double>(boundary) / static_cast<double>(fsize);
        if (ratio < best.value) {
            best.value = ratio;
            best.certificate.clear();
            for (std::size_t v = 0; v < in.size(); ++v)
                if (in[v]) best.certificate.push_back(static_cast<int>(v));
        }
    }
    return best;
}

enum class IsoMode { Exact, AnnealedSample };

inline IsoEstimate isoperimetric(const ClassGraph& cg, IsoMode mode, int samples = 200,
                                 std::uint64_t seed = 1) {
    auto view = detail::iso_view(cg);
    return mode == IsoMode::Exact ? isoperimetric_exact(view)
                                  : isoperimetric_sampled(view, samples, seed);
}

inline IsoEstimate isoperimetric(const CayleyWindow& w, IsoMode mode, int samples = 200,
                                 std::uint64_t seed = 1) {
    auto view = detail::iso_view(w);
    return mode == IsoMode::Exact ? isoperimetric_exact(view)
                                  : isoperimetric_sampled(view, samples, seed);
}

struct IsoBoundReport {
    bool pass = true;
    double bound = 0.0;       // 2n - normOracle
    double min_ratio = std::numeric_limits<double>::infinity();
    std::vector<int> violator;  // certificate if pass == false
};

/// Checks |dF| >= (2n - normOracle)|F| over sampled interior subsets F.
inline IsoBoundReport iso_bound_check(const CayleyWindow& w, double norm_oracle, int samples,
                                      std::uint64_t seed = 1) {
    auto view = detail::iso_view(w);
    if (view.allowed.empty()) throw std::invalid_argument("window has no interior");
    std::vector<std::vector<int>> adj(view.vertex_count);
    for (auto [u, v] : view.edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    IsoBoundReport rep;
    rep.bound = static_cast<double>(w.degree_interior) - norm_oracle;
    SplitMix rng(seed);
    for (int s = 0; s < samples; ++s) {
        std::size_t target = 1 + rng.below(view.allowed.size());
        auto subset = detail::random_connected_subset(view, adj, target, rng);
        std::vector<char> in(view.vertex_count, 0);
        for (int v : subset) in[v] = 1;
        long long boundary = detail::boundary_size(view, in);
        double ratio = static_cast<double>(boundary) / static_cast<double>(subset.size());
        rep.min_ratio = std::min(rep.min_ratio, ratio);
        if (static_cast<double>(boundary) + 1e-9 < rep.bound * static_cast<double>(subset.size())) {
            rep.pass = false;
            rep.violator = subset;
        }
    }
    return rep;
}

}  // namespace ergolab

#endif
