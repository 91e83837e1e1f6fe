#ifndef ERGOLAB_EQREL_HPP
#define ERGOLAB_EQREL_HPP

#include <ergolab/rational.hpp>

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ergolab {

/// Finite probability space. Point ids are dense integers 0..n-1; every
/// point carries strictly positive rational mass and the masses sum to 1.
struct ProbSpace {
    std::vector<Rat> weight;

    ProbSpace() = default;
    explicit ProbSpace(std::vector<Rat> w) : weight(std::move(w)) { validate(); }

    static ProbSpace uniform(std::size_t n) {
        if (n == 0) throw std::invalid_argument("empty probability space");
        return ProbSpace(std::vector<Rat>(n, Rat(1, static_cast<unsigned>(n))));
    }

    std::size_t size() const { return weight.size(); }

    void validate() const {
        if (weight.empty()) throw std::invalid_argument("empty probability space");
        Rat total = 0;
        for (const Rat& w : weight) {
            if (w <= 0) throw std::invalid_argument("nonpositive point weight");
            total += w;
        }
        if (total != 1) throw std::invalid_argument("weights do not sum to 1");
    }
};

/// Finite equivalence relation: a partition of the point set. Class ids are
/// the minimum member id, so identical partitions compare equal structurally.
struct EqRel {
    ProbSpace space;
    std::vector<int> class_of;               // point id -> class id
    std::vector<std::vector<int>> classes;   // sorted class list, each sorted

    EqRel() = default;

    static EqRel from_classes(ProbSpace space, std::vector<std::vector<int>> parts) {
        EqRel r;
        r.space = std::move(space);
        const int n = static_cast<int>(r.space.size());
        r.class_of.assign(n, -1);
        for (auto& c : parts) {
            if (c.empty()) throw std::invalid_argument("empty class");
            std::sort(c.begin(), c.end());
            for (int p : c) {
                if (p < 0 || p >= n) throw std::invalid_argument("class member out of range");
                if (r.class_of[p] != -1) throw std::invalid_argument("classes overlap");
                r.class_of[p] = c.front();
            }
        }
        for (int p = 0; p < n; ++p)
            if (r.class_of[p] == -1) throw std::invalid_argument("classes do not cover point set");
        std::sort(parts.begin(), parts.end(),
                  [](const auto& a, const auto& b) { return a.front() < b.front(); });
        r.classes = std::move(parts);
        return r;
    }

    static EqRel identity(ProbSpace space) {
        std::vector<std::vector<int>> parts;
        for (int p = 0; p < static_cast<int>(space.size()); ++p) parts.push_back({p});
        return from_classes(std::move(space), std::move(parts));
    }

    static EqRel full(ProbSpace space) {
        std::vector<int> all(space.size());
        for (std::size_t p = 0; p < space.size(); ++p) all[p] = static_cast<int>(p);
        return from_classes(std::move(space), {all});
    }

    std::size_t size() const { return space.size(); }
    bool related(int x, int y) const { return class_of[x] == class_of[y]; }
    const std::vector<int>& cls(int x) const { return classes[class_index(x)]; }

    /// Position of [x] in the sorted class list.
    int class_index(int x) const {
        int cid = class_of[x];
        auto it = std::lower_bound(classes.begin(), classes.end(), cid,
                                   [](const auto& c, int id) { return c.front() < id; });
        return static_cast<int>(it - classes.begin());
    }

    /// Ergodicity proxy for finite models: transitivity.
    bool single_class() const { return classes.size() == 1; }

    /// Every sub-class contained in one of our classes.
    bool refines(const EqRel& sub) const {
        if (sub.size() != size()) return false;
        for (const auto& c : sub.classes)
            for (int p : c)
                if (class_of[p] != class_of[c.front()]) return false;
        return true;
    }

    bool operator==(const EqRel& o) const {
        return space.weight == o.space.weight && classes == o.classes;
    }
};

/// Element of the full group: a class-preserving, measure-preserving
/// permutation of the point set.
struct Automorphism {
    std::vector<int> map;

    Automorphism() = default;
    explicit Automorphism(std::vector<int> m) : map(std::move(m)) {}

    static Automorphism identity(std::size_t n) {
        std::vector<int> m(n);
        for (std::size_t i = 0; i < n; ++i) m[i] = static_cast<int>(i);
        return Automorphism(std::move(m));
    }

    int operator()(int x) const { return map[x]; }
    std::size_t size() const { return map.size(); }

    Automorphism inverse() const {
        std::vector<int> inv(map.size());
        for (std::size_t i = 0; i < map.size(); ++i) inv[map[i]] = static_cast<int>(i);
        return Automorphism(std::move(inv));
    }

    /// this after other: x -> this(other(x)).
    Automorphism compose(const Automorphism& other) const {
        std::vector<int> m(map.size());
        for (std::size_t i = 0; i < map.size(); ++i) m[i] = map[other.map[i]];
        return Automorphism(std::move(m));
    }

    bool is_identity() const {
        for (std::size_t i = 0; i < map.size(); ++i)
            if (map[i] != static_cast<int>(i)) return false;
        return true;
    }

    bool valid_for(const EqRel& rel) const {
        if (map.size() != rel.size()) return false;
        std::vector<char> hit(map.size(), 0);
        for (std::size_t x = 0; x < map.size(); ++x) {
            int y = map[x];
            if (y < 0 || y >= static_cast<int>(map.size()) || hit[y]) return false;
            hit[y] = 1;
            if (!rel.related(static_cast<int>(x), y)) return false;
            if (rel.space.weight[x] != rel.space.weight[y]) return false;
        }
        return true;
    }

    bool operator==(const Automorphism& o) const { return map == o.map; }
};

/// Partial isomorphism: injective class- and measure-preserving map defined
/// on a subset of points. Undefined points map to -1.
struct PartialIso {
    std::vector<int> map;  // point -> image or -1

    explicit PartialIso(std::size_t n) : map(n, -1) {}
    explicit PartialIso(std::vector<int> m) : map(std::move(m)) {}

    bool defined(int x) const { return map[x] >= 0; }
    int operator()(int x) const { return map[x]; }

    std::vector<int> domain() const {
        std::vector<int> d;
        for (std::size_t x = 0; x < map.size(); ++x)
            if (map[x] >= 0) d.push_back(static_cast<int>(x));
        return d;
    }

    Rat domain_mass(const ProbSpace& space) const {
        Rat m = 0;
        for (std::size_t x = 0; x < map.size(); ++x)
            if (map[x] >= 0) m += space.weight[x];
        return m;
    }

    bool valid_for(const EqRel& rel) const {
        if (map.size() != rel.size()) return false;
        std::vector<char> hit(map.size(), 0);
        for (std::size_t x = 0; x < map.size(); ++x) {
            int y = map[x];
            if (y < 0) continue;
            if (y >= static_cast<int>(map.size()) || hit[y]) return false;
            hit[y] = 1;
            if (!rel.related(static_cast<int>(x), y)) return false;
            if (rel.space.weight[x] != rel.space.weight[y]) return false;
        }
        return true;
    }
};

struct Restriction {
    EqRel rel;
    Rat scale;                 // mass of the restricted set in the original space
    std::vector<int> points;   // original ids, sorted; new id = position
};

/// R restricted to a subset, with weights renormalized by 1/mu(A).
inline Restriction restrict_rel(const EqRel& rel, std::vector<int> subset) {
    std::sort(subset.begin(), subset.end());
    subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
    if (subset.empty()) throw std::invalid_argument("null restriction");
    Rat mass = 0;
    std::vector<int> new_id(rel.size(), -1);
    for (std::size_t i = 0; i < subset.size(); ++i) {
        int p = subset[i];
        if (p < 0 || p >= static_cast<int>(rel.size()))
            throw std::invalid_argument("restriction point out of range");
        new_id[p] = static_cast<int>(i);
        mass += rel.space.weight[p];
    }
    std::vector<Rat> w(subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i) w[i] = rel.space.weight[subset[i]] / mass;

    std::vector<std::vector<int>> parts;
    for (const auto& c : rel.classes) {
        std::vector<int> part;
        for (int p : c)
            if (new_id[p] >= 0) part.push_back(new_id[p]);
        if (!part.empty()) parts.push_back(std::move(part));
    }
    Restriction out;
    out.rel = EqRel::from_classes(ProbSpace(std::move(w)), std::move(parts));
    out.scale = mass;
    out.points = std::move(subset);
    return out;
}

struct IndexResult {
    bool constant = false;
    long long value = 0;                 // set when constant
    std::pair<int, int> witness{-1, -1}; // class ids with differing counts
};

/// Number of sub-classes per rel-class, when that number is constant.
inline IndexResult index_of(const EqRel& rel, const EqRel& sub) {
    if (!rel.refines(sub)) {
        for (const auto& c : sub.classes)
            for (int p : c)
                if (rel.class_of[p] != rel.class_of[c.front()])
                    throw std::invalid_argument("sub is not a refinement of rel; witness point " +
                                                std::to_string(p));
        throw std::invalid_argument("sub is not a refinement of rel");
    }
    IndexResult res;
    long long first = -1;
    int first_class = -1;
    for (const auto& c : rel.classes) {
        long long count = 0;
        for (int p : c)
            if (sub.class_of[p] == p) ++count;  // p is a sub-class id iff it is its class min
        if (first < 0) {
            first = count;
            first_class = c.front();
        } else if (count != first) {
            res.constant = false;
            res.witness = {first_class, c.front()};
            return res;
        }
    }
    res.constant = true;
    res.value = first;
    return res;
}

/// Class-bijective extension/expansion data: proj maps the source point set
/// onto the target point set.
struct ExtensionMap {
    EqRel source;
    EqRel target;
    std::vector<int> proj;  // source point -> target point
};

struct ExtensionViolation {
    int condition;  // 1 = measure, 2 = class-injective, 3 = class-surjective, 4 = class-containing
    int witness;    // source or target point id
    std::string detail;
};

struct ExtensionReport {
    bool isExtension = false;
    bool isExpansion = false;
    std::vector<ExtensionViolation> violations;
};

/// Exhaustive check of the class-bijective extension axioms.
inline ExtensionReport check_extension(const ExtensionMap& ext) {
    ExtensionReport rep;
    const EqRel& src = ext.source;
    const EqRel& tgt = ext.target;
    if (ext.proj.size() != src.size())
        throw std::invalid_argument("proj not defined on all source points");

    // (1) measure preserving: fibre masses match target weights.
    std::vector<Rat> fibre(tgt.size(), Rat(0));
    for (std::size_t x = 0; x < src.size(); ++x) {
        int t = ext.proj[x];
        if (t < 0 || t >= static_cast<int>(tgt.size()))
            throw std::invalid_argument("proj out of range");
        fibre[t] += src.space.weight[x];
    }
    for (std::size_t t = 0; t < tgt.size(); ++t)
        if (fibre[t] != tgt.space.weight[t])
            rep.violations.push_back({1, static_cast<int>(t), "fibre mass mismatch"});

    bool injective = true, surjective = true, containing = true;
    for (const auto& c : src.classes) {
        std::vector<int> image;
        for (int x : c) image.push_back(ext.proj[x]);
        std::sort(image.begin(), image.end());
        // (2) class-injective
        for (std::size_t i = 0; i + 1 < image.size(); ++i)
            if (image[i] == image[i + 1]) {
                injective = false;
                rep.violations.push_back({2, image[i], "two class members share a projection"});
                break;
            }
        // (3) equal: the image is exactly the target class of every member
        if (image != tgt.cls(image.front())) {
            surjective = false;
            rep.violations.push_back({3, c.front(), "projection of class is not the whole target class"});
        }
        // (3') containing: the image covers the target class of each member
        // (it may span several target classes)
        for (int y : image) {
            const auto& tcls = tgt.cls(y);
            if (!std::includes(image.begin(), image.end(), tcls.begin(), tcls.end())) {
                containing = false;
                rep.violations.push_back({4, y, "target class not covered by the projection"});
                break;
            }
        }
    }
    bool measure_ok = true;
    for (const auto& v : rep.violations)
        if (v.condition == 1) measure_ok = false;
    rep.isExtension = measure_ok && injective && surjective;
    rep.isExpansion = measure_ok && injective && containing;
    return rep;
}

struct Quotient {
    std::vector<int> transversal;  // one point per finite-sub class, minimum id
    Restriction restriction;       // R restricted to the transversal
    Rat muY;
};

/// Quotient by a finite subrelation, realized as restriction to a transversal.
inline Quotient quotient_by_finite(const EqRel& rel, const EqRel& finite_sub) {
    if (!rel.refines(finite_sub)) throw std::invalid_argument("finite_sub is not a refinement");
    Quotient q;
    for (const auto& c : finite_sub.classes) q.transversal.push_back(c.front());
    q.restriction = restrict_rel(rel, q.transversal);
    q.muY = q.restriction.scale;
    return q;
}

}  // namespace ergolab

#endif
