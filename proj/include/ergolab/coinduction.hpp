#ifndef ERGOLAB_COINDUCTION_HPP
#define ERGOLAB_COINDUCTION_HPP

#include <ergolab/bernoulli.hpp>
#include <ergolab/eqrel.hpp>

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergolab {

/// A finite group acting simultaneously on two spaces, presented by aligned
/// generator permutations. Elements are closed under composition; the action
/// on the first space indexes the group (it must be faithful, which freeness
/// guarantees).
struct PairedAction {
    std::vector<Automorphism> on_x;  // [0] = identity
    std::vector<Automorphism> on_y;
    bool free_on_x = false;

    std::size_t order() const { return on_x.size(); }

    static PairedAction close(const std::vector<Automorphism>& gen_x,
                              const std::vector<Automorphism>& gen_y, std::size_t cap = 20000) {
        if (gen_x.empty() || gen_x.size() != gen_y.size())
            throw std::invalid_argument("generator lists disagree");
        const std::size_t nx = gen_x.front().size();
        const std::size_t ny = gen_y.front().size();
        PairedAction act;
        std::map<std::vector<int>, std::size_t> index;
        auto push = [&act, &index](const Automorphism& x, const Automorphism& y) {
            auto [it, fresh] = index.emplace(x.map, act.on_x.size());
            if (!fresh) {
                if (!(act.on_y[it->second] == y))
                    throw std::invalid_argument("second action is not an action of the same group");
                return false;
            }
            act.on_x.push_back(x);
            act.on_y.push_back(y);
            return true;
        };
        push(Automorphism::identity(nx), Automorphism::identity(ny));
        for (std::size_t head = 0; head < act.on_x.size(); ++head) {
            if (act.on_x.size() > cap) throw std::invalid_argument("group closure exceeds cap");
            for (std::size_t g = 0; g < gen_x.size(); ++g) {
                Automorphism x = gen_x[g].compose(act.on_x[head]);
                Automorphism y = gen_y[g].compose(act.on_y[head]);
                push(x, y);
            }
        }
        act.free_on_x = true;
        for (std::size_t e = 1; e < act.on_x.size(); ++e)
            for (std::size_t p = 0; p < nx; ++p)
                if (act.on_x[e](static_cast<int>(p)) == static_cast<int>(p)) act.free_on_x = false;
        return act;
    }

    /// Orbit relation of the first action.
    EqRel orbit_relation_x(const ProbSpace& space) const {
        std::vector<std::vector<int>> parts;
        std::vector<char> seen(space.size(), 0);
        for (std::size_t p = 0; p < space.size(); ++p) {
            if (seen[p]) continue;
            std::vector<int> orbit;
            for (const auto& e : on_x) {
                int q = e(static_cast<int>(p));
                if (!seen[q]) {
                    seen[q] = 1;
                    orbit.push_back(q);
                }
            }
            parts.push_back(std::move(orbit));
        }
        return EqRel::from_classes(space, std::move(parts));
    }

    /// Orbit relation of the second action on a given space.
    EqRel orbit_relation_y(const ProbSpace& space) const {
        std::vector<std::vector<int>> parts;
        std::vector<char> seen(space.size(), 0);
        for (std::size_t p = 0; p < space.size(); ++p) {
            if (seen[p]) continue;
            std::vector<int> orbit;
            for (const auto& e : on_y) {
                int q = e(static_cast<int>(p));
                if (!seen[q]) {
                    seen[q] = 1;
                    orbit.push_back(q);
                }
            }
            parts.push_back(std::move(orbit));
        }
        return EqRel::from_classes(space, std::move(parts));
    }
};

/// Choice functions C_0..C_{N-1} with C_0 = id, plus the derived permutation
/// cocycle and group cocycle. Orbit k of a class means the k-th orbit of the
/// first action inside that class, ordered by minimum id.
struct ChoiceSystem {
    EqRel rel;
    EqRel orbitSub;  // orbit relation of the first action
    PairedAction action;
    int N = 0;
    std::vector<Automorphism> choice;

    /// perm(x, x'): n = perm[k] iff C_n(x') lies in the orbit of C_k(x).
    std::vector<int> perm(int x, int xp) const {
        std::vector<int> p(static_cast<std::size_t>(N), -1);
        for (int k = 0; k < N; ++k) {
            int target = orbitSub.class_of[choice[k](x)];
            for (int n = 0; n < N; ++n)
                if (orbitSub.class_of[choice[n](xp)] == target) {
                    p[k] = n;
                    break;
                }
        }
        return p;
    }

    /// delta(x, x')(n) = the unique group element g with
    /// g . C_k(x) = C_n(x'), where n = perm(x, x')(k). Indexes into
    /// action.on_x / action.on_y.
    std::vector<int> delta(int x, int xp) const {
        std::vector<int> p = perm(x, xp);
        std::vector<int> d(static_cast<std::size_t>(N), -1);
        for (int k = 0; k < N; ++k) {
            int n = p[k];
            int from = choice[k](x);
            int to = choice[n](xp);
            for (std::size_t e = 0; e < action.order(); ++e)
                if (action.on_x[e](from) == to) {
                    if (d[n] != -1) throw std::invalid_argument("ambiguous delta: action is not free");
                    d[n] = static_cast<int>(e);
                }
            if (d[n] == -1) throw std::invalid_argument("no group element realizes the cocycle step");
        }
        return d;
    }
};

/// Greedy deterministic choice functions: within each class, C_j shifts the
/// orbits cyclically (orbit k to orbit k+j, matching sorted positions). The
/// reverse flag reverses the orbit order, giving an alternative system for
/// the swap probe.
inline ChoiceSystem build_choice_system(const EqRel& rel, const PairedAction& beta,
                                        bool reverse_orbits = false) {
    ChoiceSystem cs;
    cs.rel = rel;
    cs.action = beta;
    if (!beta.free_on_x) throw std::invalid_argument("ambiguous delta: action is not free");
    cs.orbitSub = beta.orbit_relation_x(rel.space);
    if (!rel.refines(cs.orbitSub)) throw std::invalid_argument("orbits leave the classes");
    IndexResult idx = index_of(rel, cs.orbitSub);
    if (!idx.constant) throw std::invalid_argument("non-constant orbit count per class");
    cs.N = static_cast<int>(idx.value);

    for (int j = 0; j < cs.N; ++j) {
        std::vector<int> m(rel.size());
        for (const auto& c : rel.classes) {
            std::vector<const std::vector<int>*> orbits;
            for (const auto& o : cs.orbitSub.classes)
                if (rel.class_of[o.front()] == c.front()) orbits.push_back(&o);
            if (reverse_orbits) std::reverse(orbits.begin(), orbits.end());
            for (std::size_t k = 0; k < orbits.size(); ++k) {
                const auto& src = *orbits[k];
                const auto& dst = *orbits[(k + static_cast<std::size_t>(j)) % orbits.size()];
                if (src.size() != dst.size())
                    throw std::invalid_argument("orbit sizes differ within a class");
                for (std::size_t t = 0; t < src.size(); ++t) m[src[t]] = dst[t];
            }
        }
        Automorphism a(std::move(m));
        if (!a.valid_for(rel))
            throw std::invalid_argument("weights do not align across orbits; choice functions "
                                        "require uniform weights within each class");
        cs.choice.push_back(std::move(a));
    }
    if (!cs.choice.front().is_identity())
        throw std::invalid_argument("choice construction broke C_0 = id");
    return cs;
}

/// The co-induced relation on X x Y^N: (x, y) ~ (x', y') iff x R x' and
/// y'_n = delta(x,x')(n) . y_{perm(x,x')^{-1}(n)} for all n.
struct Coinduced {
    EqRel relAlpha;
    ProbSpace ySpace;
    int N = 0;
    long long y_codes = 0;  // |Y|^N

    int x_of(int id) const { return static_cast<int>(id / y_codes); }
    long long code_of(int id) const { return id % y_codes; }
    int point_id(int x, long long code) const { return static_cast<int>(x * y_codes + code); }
    int y_digit(long long code, int n) const {
        for (int t = 0; t < n; ++t) code /= static_cast<long long>(ySpace.size());
        return static_cast<int>(code % static_cast<long long>(ySpace.size()));
    }
};

inline Coinduced coinduce(const ChoiceSystem& cs, const ProbSpace& y_space,
                          long long budget = 1'000'000) {
    Coinduced co;
    co.ySpace = y_space;
    co.N = cs.N;
    co.y_codes = detail::checked_pow(static_cast<long long>(y_space.size()),
                                     static_cast<std::size_t>(cs.N), budget);
    const long long total = co.y_codes * static_cast<long long>(cs.rel.size());
    if (co.y_codes > budget || total > budget) throw BudgetError("co-induced space exceeds budget");

    std::vector<Rat> w(static_cast<std::size_t>(total));
    for (std::size_t x = 0; x < cs.rel.size(); ++x)
        for (long long code = 0; code < co.y_codes; ++code) {
            Rat product = cs.rel.space.weight[x];
            long long rest = code;
            for (int n = 0; n < cs.N; ++n) {
                product *= y_space.weight[static_cast<std::size_t>(
                    rest % static_cast<long long>(y_space.size()))];
                rest /= static_cast<long long>(y_space.size());
            }
            w[static_cast<std::size_t>(x) * co.y_codes + code] = product;
        }

    detail::UnionFind uf(static_cast<std::size_t>(total));
    const long long ny = static_cast<long long>(y_space.size());
    for (std::size_t x = 0; x < cs.rel.size(); ++x) {
        for (int xp : cs.rel.cls(static_cast<int>(x))) {
            if (xp == static_cast<int>(x)) continue;
            std::vector<int> p = cs.perm(static_cast<int>(x), xp);
            std::vector<int> d = cs.delta(static_cast<int>(x), xp);
            std::vector<int> pinv(p.size());
            for (int k = 0; k < cs.N; ++k) pinv[p[k]] = k;
            for (long long code = 0; code < co.y_codes; ++code) {
                long long out = 0, place = 1;
                for (int n = 0; n < cs.N; ++n) {
                    long long digit = code;
                    for (int t = 0; t < pinv[n]; ++t) digit /= ny;
                    int y = static_cast<int>(digit % ny);
                    out += static_cast<long long>(cs.action.on_y[d[n]](y)) * place;
                    place *= ny;
                }
                uf.unite(static_cast<int>(x * co.y_codes + code),
                         static_cast<int>(xp * co.y_codes + out));
            }
        }
    }

    std::vector<std::vector<int>> parts(static_cast<std::size_t>(total));
    std::vector<int> min_of(static_cast<std::size_t>(total), -1);
    for (long long id = 0; id < total; ++id) {
        int r = uf.find(static_cast<int>(id));
        if (min_of[r] < 0) min_of[r] = static_cast<int>(id);
        parts[min_of[r]].push_back(static_cast<int>(id));
    }
    std::vector<std::vector<int>> cls;
    for (auto& c : parts)
        if (!c.empty()) cls.push_back(std::move(c));
    co.relAlpha = EqRel::from_classes(ProbSpace(std::move(w)), std::move(cls));
    return co;
}

/// Checks that the defining formula is symmetric and transitive at the level
/// of partners: the partner map from x to x' composed with x' to x'' matches
/// x to x'' (the cocycle identities in action), and each class has exactly
/// one point over each member of [x]_R.
inline bool coinduced_classes_consistent(const ChoiceSystem& cs, const Coinduced& co) {
    for (const auto& c : co.relAlpha.classes) {
        // one point per base-class member
        std::vector<int> base;
        for (int id : c) base.push_back(co.x_of(id));
        std::sort(base.begin(), base.end());
        if (base != cs.rel.cls(base.front())) return false;
    }
    return true;
}

struct CocycleReport {
    bool permCocycle = true;   // perm(x,x') perm(x',x'') = perm(x,x'')
    bool deltaRelation = true; // C_n(x') = delta(x,x')(n) . C_k(x), n = perm(x,x')(k)
    bool reflexive = true;     // perm(x,x) = id, delta(x,x) = identity vector
};

inline CocycleReport verify_cocycles(const ChoiceSystem& cs) {
    CocycleReport rep;
    for (const auto& c : cs.rel.classes) {
        for (int x : c) {
            std::vector<int> p = cs.perm(x, x);
            std::vector<int> d = cs.delta(x, x);
            for (int k = 0; k < cs.N; ++k) {
                if (p[k] != k) rep.reflexive = false;
                if (d[k] != 0) rep.reflexive = false;
            }
            for (int xp : c) {
                std::vector<int> p1 = cs.perm(x, xp);
                std::vector<int> d1 = cs.delta(x, xp);
                for (int k = 0; k < cs.N; ++k) {
                    int n = p1[k];
                    if (cs.action.on_x[d1[n]](cs.choice[k](x)) != cs.choice[n](xp))
                        rep.deltaRelation = false;
                }
                for (int xpp : c) {
                    std::vector<int> p2 = cs.perm(xp, xpp);
                    std::vector<int> p3 = cs.perm(x, xpp);
                    for (int k = 0; k < cs.N; ++k)
                        if (p2[p1[k]] != p3[k]) rep.permCocycle = false;
                }
            }
        }
    }
    return rep;
}

struct CindReport {
    bool extensionOk = false;      // projection to x is a class-bijective extension
    bool expansionContainment = false;  // y_0 image of each class contains the full orbit
    bool expansionMeasure = false;      // y_0 projection is measure preserving
    Rat injFailureMeasure;         // mass of points sharing their y_0 image with a classmate
};

inline CindReport verify_cind_props(const ChoiceSystem& cs, const Coinduced& co) {
    CindReport rep;

    ExtensionMap to_x;
    to_x.source = co.relAlpha;
    to_x.target = cs.rel;
    to_x.proj.resize(co.relAlpha.size());
    for (std::size_t id = 0; id < co.relAlpha.size(); ++id)
        to_x.proj[id] = co.x_of(static_cast<int>(id));
    rep.extensionOk = check_extension(to_x).isExtension;

    // y_0 projection against the orbit relation of the second action
    EqRel y_rel = cs.action.orbit_relation_y(co.ySpace);
    rep.expansionMeasure = true;
    std::vector<Rat> fibre(co.ySpace.size(), Rat(0));
    for (std::size_t id = 0; id < co.relAlpha.size(); ++id)
        fibre[co.y_digit(co.code_of(static_cast<int>(id)), 0)] +=
            co.relAlpha.space.weight[id];
    for (std::size_t y = 0; y < co.ySpace.size(); ++y)
        if (fibre[y] != co.ySpace.weight[y]) rep.expansionMeasure = false;

    rep.expansionContainment = true;
    rep.injFailureMeasure = 0;
    for (const auto& c : co.relAlpha.classes) {
        std::vector<int> image;
        for (int id : c) image.push_back(co.y_digit(co.code_of(id), 0));
        std::vector<int> sorted = image;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        // the image may span several orbits; each touched orbit must be covered
        for (int y : sorted) {
            const auto& orbit = y_rel.cls(y);
            if (!std::includes(sorted.begin(), sorted.end(), orbit.begin(), orbit.end()))
                rep.expansionContainment = false;
        }
        for (std::size_t i = 0; i < c.size(); ++i) {
            bool collides = false;
            for (std::size_t j = 0; j < c.size(); ++j)
                if (i != j && image[i] == image[j]) collides = true;
            if (collides) rep.injFailureMeasure += co.relAlpha.space.weight[c[i]];
        }
    }
    return rep;
}

/// Finite-relation isomorphism up to relabeling: the sorted multiset of
/// class weight-profiles must match.
inline bool relations_isomorphic(const EqRel& a, const EqRel& b) {
    if (a.size() != b.size() || a.classes.size() != b.classes.size()) return false;
    auto profile = [](const EqRel& r) {
        std::vector<std::vector<Rat>> prof;
        for (const auto& c : r.classes) {
            std::vector<Rat> ws;
            for (int p : c) ws.push_back(r.space.weight[p]);
            std::sort(ws.begin(), ws.end());
            prof.push_back(std::move(ws));
        }
        std::sort(prof.begin(), prof.end());
        return prof;
    };
    return profile(a) == profile(b);
}

}  // namespace ergolab

#endif
