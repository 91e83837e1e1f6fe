#ifndef ERGOLAB_CAYLEY_HPP
#define ERGOLAB_CAYLEY_HPP

#include <ergolab/graphing.hpp>
#include <ergolab/rng.hpp>
#include <ergolab/spectral.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergolab {

/// Finite truncation of an infinite vertex-transitive graph. Interior
/// vertices carry their full edge neighborhood; boundary vertices are
/// truncated and marked with a boundary-component id.
struct CayleyWindow {
    struct Edge {
        int u, v;
        int label;          // generator index
        std::uint64_t key;  // stable id for counter-based edge labels
    };
    std::vector<Edge> edges;
    std::vector<int> boundary_component;  // per vertex; -1 = interior
    int degree_interior = 0;              // 2n
    int radius = 0;
    std::string kind;

    std::size_t vertex_count() const { return boundary_component.size(); }
    bool is_boundary(int v) const { return boundary_component[v] >= 0; }

    int boundary_component_count() const {
        int m = 0;
        for (int b : boundary_component) m = std::max(m, b + 1);
        return m;
    }

    std::vector<std::vector<int>> adjacency() const {
        std::vector<std::vector<int>> adj(vertex_count());
        for (const auto& e : edges) {
            adj[e.u].push_back(e.v);
            if (e.u != e.v) adj[e.v].push_back(e.u);
        }
        return adj;
    }
};

/// Ball of the given radius in the d-regular tree. Vertices are numbered in
/// BFS order, so ids and edge keys are stable as the radius grows.
inline CayleyWindow tree_window(int degree, int radius) {
    if (degree < 2 || radius < 0) throw std::invalid_argument("bad tree window parameters");
    CayleyWindow w;
    w.kind = "tree-d" + std::to_string(degree);
    w.radius = radius;
    w.degree_interior = degree;
    std::vector<int> shell_start{0, 1};  // shell_start[r] = first id at distance r
    std::size_t count = 1;
    for (int r = 1; r <= radius; ++r) {
        std::size_t shell = (r == 1) ? static_cast<std::size_t>(degree)
                                     : (count - shell_start[r - 1]) * static_cast<std::size_t>(degree - 1);
        // BFS parent edges: children of vertex p are consecutive.
        std::size_t child = count;
        for (int p = shell_start[r - 1]; p < static_cast<int>(count); ++p) {
            int kids = (r == 1) ? degree : degree - 1;
            for (int k = 0; k < kids; ++k, ++child)
                w.edges.push_back({p, static_cast<int>(child), k, static_cast<std::uint64_t>(child)});
        }
        count += shell;
        shell_start.push_back(static_cast<int>(count));
    }
    w.boundary_component.assign(count, -1);
    if (radius > 0)
        for (int v = shell_start[radius]; v < static_cast<int>(count); ++v) w.boundary_component[v] = 0;
    else
        w.boundary_component[0] = 0;  // a bare root is all boundary
    return w;
}

/// Ball in the Cayley graph of the free group of the given rank: the
/// 2r-regular tree with edges labeled by generator (label i and i+rank for
/// the inverse direction collapse to one unoriented edge labeled i).
inline CayleyWindow free_group_window(int rank, int radius) {
    if (rank < 1) throw std::invalid_argument("free rank must be >= 1");
    CayleyWindow w = tree_window(2 * rank, radius);
    w.kind = "free-rank" + std::to_string(rank);
    for (auto& e : w.edges) e.label %= rank;
    return w;
}

/// Box window of the integer lattice Z^d. Boundary components are the box
/// faces (2d of them); a corner vertex reports its lowest-index face.
inline CayleyWindow grid_window(const std::vector<int>& dims) {
    if (dims.empty()) throw std::invalid_argument("empty grid dims");
    std::size_t total = 1;
    for (int d : dims) {
        if (d < 2) throw std::invalid_argument("grid dimension must be >= 2");
        total *= static_cast<std::size_t>(d);
    }
    CayleyWindow w;
    w.kind = "grid";
    w.radius = *std::max_element(dims.begin(), dims.end()) / 2;
    w.degree_interior = 2 * static_cast<int>(dims.size());
    w.boundary_component.assign(total, -1);
    std::vector<std::size_t> stride(dims.size(), 1);
    for (std::size_t a = 1; a < dims.size(); ++a)
        stride[a] = stride[a - 1] * static_cast<std::size_t>(dims[a - 1]);
    std::vector<int> coord(dims.size(), 0);
    for (std::size_t v = 0; v < total; ++v) {
        for (std::size_t a = 0; a < dims.size(); ++a) {
            if (coord[a] == 0) {
                w.boundary_component[v] = w.boundary_component[v] < 0
                                              ? static_cast<int>(2 * a)
                                              : w.boundary_component[v];
            }
            if (coord[a] == dims[a] - 1 && w.boundary_component[v] < 0)
                w.boundary_component[v] = static_cast<int>(2 * a + 1);
            if (coord[a] + 1 < dims[a]) {
                std::size_t u = v + stride[a];
                w.edges.push_back({static_cast<int>(v), static_cast<int>(u), static_cast<int>(a),
                                   static_cast<std::uint64_t>(v * dims.size() + a)});
            }
        }
        for (std::size_t a = 0; a < dims.size(); ++a) {
            if (++coord[a] < dims[a]) break;
            coord[a] = 0;
        }
    }
    return w;
}

/// Schreier graph of explicit permutations on {0..N-1}. Closed (no
/// truncation), so there is no boundary.
inline CayleyWindow perm_window(const std::vector<std::vector<int>>& generators) {
    if (generators.empty()) throw std::invalid_argument("no generators");
    const std::size_t n = generators.front().size();
    CayleyWindow w;
    w.kind = "perm";
    w.degree_interior = 2 * static_cast<int>(generators.size());
    w.boundary_component.assign(n, -1);
    for (std::size_t i = 0; i < generators.size(); ++i) {
        const auto& g = generators[i];
        if (g.size() != n) throw std::invalid_argument("generator size mismatch");
        for (std::size_t y = 0; y < n; ++y)
            w.edges.push_back({static_cast<int>(y), g[y], static_cast<int>(i),
                               static_cast<std::uint64_t>(y * generators.size() + i)});
    }
    return w;
}

inline bool window_connected(const CayleyWindow& w) {
    if (w.vertex_count() == 0) return false;
    auto adj = w.adjacency();
    std::vector<char> seen(w.vertex_count(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : adj[v])
            if (!seen[u]) {
                seen[u] = 1;
                ++reached;
                stack.push_back(u);
            }
    }
    return reached == w.vertex_count();
}

/// Top eigenvalue of the window's symmetric adjacency operator by power
/// iteration (deterministic start). Monotone in the radius and converges to
/// the infinite-graph norm from below.
inline SpectralEstimate window_norm(const CayleyWindow& w) {
    if (!window_connected(w)) throw std::invalid_argument("disconnected window");
    const std::size_t n = w.vertex_count();
    return detail::power_iteration(
        n,
        [&w](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
            out.setZero(v.size());
            for (const auto& e : w.edges) {
                if (e.u == e.v) {
                    out[e.u] += 2.0 * v[e.u];
                } else {
                    out[e.u] += v[e.v];
                    out[e.v] += v[e.u];
                }
            }
        },
        static_cast<double>(w.degree_interior));
}

}  // namespace ergolab

#endif
