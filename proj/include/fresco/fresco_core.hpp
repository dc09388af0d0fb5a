#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "fresco/ab_algebra.hpp"

namespace fresco {

/// Class of a rational modulo 1, represented in the half-open interval (0, 1].
struct InvariantClass {
    Rational representative;
    friend bool operator==(const InvariantClass& a, const InvariantClass& b) = default;
};

inline InvariantClass class_of(const Rational& r) { return InvariantClass{class_representative(r)}; }

// Total order on Q induced by the inclusion Q/Z into (0, 1]: classes compare
// through their representatives, members of one class through the usual order.
inline int qorder_compare(const Rational& lambda, const Rational& mu) {
    int c = cmp(class_representative(lambda), class_representative(mu));
    if (c != 0) return c;
    return cmp(lambda, mu);
}

inline bool qorder_less(const Rational& lambda, const Rational& mu) { return qorder_compare(lambda, mu) < 0; }

/// Sorts mu_j + j increasingly (class order, ties stable) and returns lambda_j = sorted_j - j.
inline std::vector<Rational> principal_invariants(const std::vector<Rational>& mu) {
    std::vector<Rational> v;
    v.reserve(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) v.push_back(mu[j] + Rational(static_cast<long>(j) + 1));
    std::stable_sort(v.begin(), v.end(), qorder_less);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] -= Rational(static_cast<long>(j) + 1);
    return v;
}

// A fresco in principal presentation: rank k, fundamental invariants
// lambda_1..lambda_k with lambda_j + j > k and lambda_j + j increasing for the
// class order, connection units S_1..S_{k-1} with S_j(0) = 1, and the working
// truncation order shared by every coordinate computation.
class Fresco {
public:
    Fresco(std::vector<Rational> lambda, std::vector<PowerSeries> connections, int order)
        : lambda_(std::move(lambda)), s_(std::move(connections)), order_(order) {
        const int k = static_cast<int>(lambda_.size());
        if (k < 1) throw ValidationError("rank", "rank must be at least 1");
        if (static_cast<int>(s_.size()) != k - 1)
            throw ValidationError("S", "expected " + std::to_string(k - 1) + " connection units, got " +
                                           std::to_string(s_.size()));
        if (order_ < 2) throw ValidationError("truncation", "working order must be at least 2");
        for (int j = 1; j <= k; ++j) {
            if (lambda_[j - 1] + j <= k)
                throw ValidationError("lambda[" + std::to_string(j) + "]",
                                      "geometric condition violated: lambda_j + j > k requires " +
                                          to_string(lambda_[j - 1]) + " + " + std::to_string(j) + " > " +
                                          std::to_string(k));
            if (j > 1 && qorder_compare(lambda_[j - 2] + (j - 1), lambda_[j - 1] + j) > 0)
                throw ValidationError("lambda[" + std::to_string(j) + "]",
                                      "not a principal presentation: lambda_j + j must be increasing "
                                      "for the class order");
        }
        for (int j = 1; j < k; ++j) {
            s_[j - 1] = s_[j - 1].truncated(order_);
            if (s_[j - 1].coeff(0) != 1)
                throw ValidationError("S" + std::to_string(j), "connection unit must have constant term 1");
        }
    }

    int rank() const { return static_cast<int>(lambda_.size()); }
    int order() const { return order_; }

    /// Fundamental invariant lambda_j, 1-based.
    const Rational& lambda(int j) const { return lambda_.at(static_cast<std::size_t>(j - 1)); }
    /// Connection unit S_j between e_j and e_{j+1}, 1-based, j in [1, k-1].
    const PowerSeries& connection(int j) const { return s_.at(static_cast<std::size_t>(j - 1)); }

    const std::vector<Rational>& lambdas() const { return lambda_; }
    const std::vector<PowerSeries>& connections() const { return s_; }

    /// Step p_j = lambda_{j+1} - lambda_j + 1, 1-based, j in [1, k-1].
    Rational p(int j) const { return lambda(j + 1) - lambda(j) + 1; }

private:
    std::vector<Rational> lambda_;
    std::vector<PowerSeries> s_;
    int order_;
};

/// Default working order 2 * sum_j max(p_j, 1) + 2k + 8 for the given invariants.
inline int default_order(const std::vector<Rational>& lambda) {
    const int k = static_cast<int>(lambda.size());
    Integer acc = 0;
    for (int j = 0; j + 1 < k; ++j) {
        Integer p = ceil_int(lambda[static_cast<std::size_t>(j) + 1] - lambda[static_cast<std::size_t>(j)] + 1);
        if (!p.fits_slong_p() || p.get_si() > 1000000)
            throw Error("invariant steps too large for a working order");
        acc += std::max(p.get_si(), 1L);
    }
    if (!acc.fits_slong_p() || acc.get_si() > 1000000) throw Error("invariant steps too large for a working order");
    return 2 * static_cast<int>(acc.get_si()) + 2 * k + 8;
}

// Module element in the principal basis e_1..e_k, as the coordinate vector
// (U_1, ..., U_k).
struct Element {
    std::vector<PowerSeries> u;

    const PowerSeries& coord(int j) const { return u.at(static_cast<std::size_t>(j - 1)); }
    int rank() const { return static_cast<int>(u.size()); }
};

inline Element zero_element(const Fresco& f) {
    return Element{std::vector<PowerSeries>(static_cast<std::size_t>(f.rank()), PowerSeries::zero(f.order()))};
}

/// Basis element e_j, 1-based.
inline Element basis_element(const Fresco& f, int j) {
    Element x = zero_element(f);
    x.u[static_cast<std::size_t>(j - 1)] = PowerSeries::one(f.order());
    return x;
}

inline Element operator+(const Element& x, const Element& y) {
    Element z;
    z.u.reserve(x.u.size());
    for (std::size_t i = 0; i < x.u.size(); ++i) z.u.push_back(x.u[i] + y.u[i]);
    return z;
}

inline Element operator-(const Element& x, const Element& y) {
    Element z;
    z.u.reserve(x.u.size());
    for (std::size_t i = 0; i < x.u.size(); ++i) z.u.push_back(x.u[i] - y.u[i]);
    return z;
}

inline Element operator*(const Rational& c, const Element& x) {
    Element z;
    z.u.reserve(x.u.size());
    for (const auto& ui : x.u) z.u.push_back(c * ui);
    return z;
}

inline Element scale(const PowerSeries& s, const Element& x) {
    Element z;
    z.u.reserve(x.u.size());
    for (const auto& ui : x.u) z.u.push_back(s * ui);
    return z;
}

/// Multiplication by b.
inline Element b_shift(const Element& x) {
    Element z;
    z.u.reserve(x.u.size());
    for (const auto& ui : x.u) z.u.push_back(shifted(ui, 1));
    return z;
}

// Action of a: component j of a.x is b^2.U_j' + lambda_j.b.U_j + S_j.U_{j+1},
// realizing the basis relations (a - lambda_j.b).e_j = S_{j-1}.e_{j-1}.
inline Element a_action(const Fresco& f, const Element& x) {
    const int k = f.rank();
    Element z;
    z.u.reserve(static_cast<std::size_t>(k));
    for (int j = 1; j <= k; ++j) {
        PowerSeries out = shifted(derivative(x.coord(j)), 2) + f.lambda(j) * shifted(x.coord(j), 1);
        if (j < k) out = out + f.connection(j) * x.coord(j + 1);
        z.u.push_back(out);
    }
    return z;
}

/// (a - mu.b).x
inline Element a_minus_action(const Fresco& f, const Rational& mu, const Element& x) {
    return a_action(f, x) - mu * b_shift(x);
}

/// Applies an operator in normal form to a module element.
inline Element ab_apply(const Fresco& f, const AbElement& q, const Element& x) {
    if (q.is_zero()) return zero_element(f);
    Element acc = scale(q.coeff(0), x);
    Element cur = x;
    for (int j = 1; j <= q.degree(); ++j) {
        cur = a_action(f, cur);
        acc = acc + scale(q.coeff(j), cur);
    }
    return acc;
}

/// True iff x generates the module: the top coordinate is a unit.
inline bool is_generator(const Fresco& f, const Element& x) { return x.coord(f.rank()).is_unit(); }

/// Sub-quotient F_j / F_{i-1} of the principal flag, 1 <= i <= j <= k.
inline Fresco window(const Fresco& f, int i, int j) {
    if (i < 1 || j < i || j > f.rank()) throw PreconditionFailed("window indices out of range");
    std::vector<Rational> lambda(f.lambdas().begin() + (i - 1), f.lambdas().begin() + j);
    std::vector<PowerSeries> s(f.connections().begin() + (i - 1), f.connections().begin() + (j - 1));
    return Fresco(std::move(lambda), std::move(s), f.order());
}

/// Restriction of an element of F_j (coordinates above j must vanish) to window(f, 1, j).
inline Element restrict_to_flag(const Fresco& f, const Element& x, int j) {
    for (int i = j + 1; i <= f.rank(); ++i)
        if (!x.coord(i).known_zero()) throw PreconditionFailed("element does not lie in the flag member");
    return Element{std::vector<PowerSeries>(x.u.begin(), x.u.begin() + j)};
}

// Peels the presentation of the submodule generated by x top-down: T_k is the
// normalized top coordinate, (a - lambda_k.b).(T_k^{-1}.x) generates the next
// flag member, and recursion yields units T_1..T_k with T_j(0) = 1.  For a
// generator x the annihilator of x is (a-lambda_1.b).T_1^{-1}...(a-lambda_k.b).T_k^{-1}.
inline std::vector<PowerSeries> annihilator_presentation(const Fresco& f, const Element& x) {
    const int k = f.rank();
    std::vector<PowerSeries> t(static_cast<std::size_t>(k), PowerSeries());
    Fresco cur = f;
    Element y = x;
    for (int r = k; r >= 1; --r) {
        if (!is_generator(cur, y)) throw NotAGenerator();
        const PowerSeries& top = y.coord(r);
        PowerSeries tr = (1 / top.coeff(0)) * top;
        t[static_cast<std::size_t>(r - 1)] = tr;
        if (r == 1) break;
        Element scaled = scale(invert(tr), y);
        Element next = a_minus_action(cur, cur.lambda(r), scaled);
        y = restrict_to_flag(cur, next, r - 1);
        cur = window(cur, 1, r - 1);
    }
    return t;
}

/// The fresco re-presented through the generator x (same invariants, units from the peel).
inline Fresco represent_through(const Fresco& f, const Element& x) {
    std::vector<PowerSeries> t = annihilator_presentation(f, x);
    t.pop_back();
    return Fresco(f.lambdas(), std::move(t), f.order());
}

/// Ordered homogeneous product (a - lambda_1.b)...(a - lambda_k.b).
inline AbElement bernstein_element(const Fresco& f) {
    AbElement p = AbElement::a_minus(f.lambda(1), f.order());
    for (int j = 2; j <= f.rank(); ++j) p = ab_mul(p, AbElement::a_minus(f.lambda(j), f.order()));
    return p;
}

/// Multiset of Bernstein roots -(lambda_j + j - k), sorted increasingly.
inline std::vector<Rational> bernstein_roots(const Fresco& f) {
    std::vector<Rational> roots;
    const int k = f.rank();
    for (int j = 1; j <= k; ++j) roots.push_back(-(f.lambda(j) + j - k));
    std::sort(roots.begin(), roots.end());
    return roots;
}

inline Rational mu(const Fresco& f) {
    Rational acc = 0;
    for (const Rational& l : f.lambdas()) acc += l;
    return acc;
}

/// Tensor shift by E_delta: replaces a by a + delta.b, i.e. lambda_j by lambda_j + delta.
inline Fresco shift_tensor(const Fresco& f, const Rational& delta) {
    const int k = f.rank();
    std::vector<Rational> lambda;
    lambda.reserve(static_cast<std::size_t>(k));
    for (int j = 1; j <= k; ++j) {
        Rational l = f.lambda(j) + delta;
        if (l + j <= k) throw NotGeometric();
        lambda.push_back(std::move(l));
    }
    return Fresco(std::move(lambda), f.connections(), f.order());
}

struct PrimitiveBlock {
    InvariantClass cls;
    int first; // 1-based, inclusive
    int last;
};

/// Contiguous index blocks of equal class [lambda_j], in class order.
inline std::vector<PrimitiveBlock> primitive_blocks(const std::vector<Rational>& lambda) {
    std::vector<PrimitiveBlock> blocks;
    for (int j = 1; j <= static_cast<int>(lambda.size()); ++j) {
        InvariantClass c = class_of(lambda[static_cast<std::size_t>(j - 1)]);
        if (!blocks.empty() && blocks.back().cls == c)
            blocks.back().last = j;
        else
            blocks.push_back(PrimitiveBlock{c, j, j});
    }
    return blocks;
}

inline std::vector<PrimitiveBlock> primitive_blocks(const Fresco& f) { return primitive_blocks(f.lambdas()); }

} // namespace fresco
