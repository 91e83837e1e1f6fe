#ifndef ERGOLAB_GRAPHING_HPP
#define ERGOLAB_GRAPHING_HPP

#include <ergolab/eqrel.hpp>

#include <numeric>
#include <stdexcept>
#include <vector>

namespace ergolab {

namespace detail {
/// Union-find with path halving and union by size.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    // Returns false if already joined.
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }
    int component_size(int x) { return size_[find(x)]; }

private:
    std::vector<int> parent_;
    std::vector<int> size_;
};
}  // namespace detail

/// Multigraph induced on one equivalence class by a graphing. Vertices are
/// the class members (original point ids); each point y contributes one edge
/// (y, theta_i(y)) per generator, so the graph is 2n-regular counting
/// self-loops twice.
struct ClassGraph {
    std::vector<int> vertices;  // sorted class members
    struct Edge {
        int u, v;   // original point ids
        int gen;    // generator index
    };
    std::vector<Edge> edges;

    int degree(int point) const {
        int d = 0;
        for (const auto& e : edges) {
            if (e.u == point) ++d;
            if (e.v == point) ++d;  // self-loops count twice
        }
        return d;
    }
};

/// Ordered list of full-group automorphisms generating (or not) a relation.
struct Graphing {
    EqRel rel;
    std::vector<Automorphism> gens;

    Graphing() = default;
    Graphing(EqRel r, std::vector<Automorphism> g) : rel(std::move(r)), gens(std::move(g)) {
        for (const auto& a : gens)
            if (!a.valid_for(rel)) throw std::invalid_argument("generator not in the full group");
    }

    std::size_t n() const { return gens.size(); }

    /// True when the generator edges connect each class exactly.
    bool generating() const {
        detail::UnionFind uf(rel.size());
        for (const auto& g : gens)
            for (std::size_t x = 0; x < rel.size(); ++x) uf.unite(static_cast<int>(x), g(static_cast<int>(x)));
        for (const auto& c : rel.classes) {
            for (int p : c)
                if (uf.find(p) != uf.find(c.front())) return false;
        }
        // Generators never join distinct classes (full-group membership), so
        // connectivity within classes is the whole condition.
        return true;
    }
};

/// One multigraph per class of the graphing's relation.
inline std::vector<ClassGraph> class_graphs(const Graphing& g) {
    std::vector<ClassGraph> out;
    out.reserve(g.rel.classes.size());
    for (const auto& c : g.rel.classes) {
        ClassGraph cg;
        cg.vertices = c;
        for (int y : c)
            for (std::size_t i = 0; i < g.gens.size(); ++i)
                cg.edges.push_back({y, g.gens[i](y), static_cast<int>(i)});
        out.push_back(std::move(cg));
    }
    return out;
}

}  // namespace ergolab

#endif
