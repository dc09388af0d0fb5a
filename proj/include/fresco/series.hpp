#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "fresco/rational.hpp"

namespace fresco {

// Truncated formal power series in b with exact rational coefficients.
//
// `order` is the reliable truncation order: every coefficient of b^n with
// n < order is exact, b^order and beyond are unknown.  Reading an unknown
// coefficient throws InsufficientPrecision.  Zero coefficients are never
// stored.
class PowerSeries {
public:
    PowerSeries() = default;

    static PowerSeries zero(int order) { return PowerSeries({}, order); }

    static PowerSeries constant(const Rational& c, int order) {
        std::map<int, Rational> m;
        if (sgn(c) != 0) m[0] = c;
        return PowerSeries(std::move(m), order);
    }

    static PowerSeries monomial(const Rational& c, int exponent, int order) {
        std::map<int, Rational> m;
        if (sgn(c) != 0) m[exponent] = c;
        return PowerSeries(std::move(m), order);
    }

    static PowerSeries one(int order) { return constant(1, order); }

    PowerSeries(std::map<int, Rational> coeffs, int order) : coeffs_(std::move(coeffs)), order_(order) {
        for (auto it = coeffs_.begin(); it != coeffs_.end();) {
            if (it->first < 0 || it->first >= order_)
                throw Error("power series coefficient at exponent " + std::to_string(it->first) +
                            " outside [0, " + std::to_string(order_) + ")");
            if (sgn(it->second) == 0)
                it = coeffs_.erase(it);
            else
                ++it;
        }
    }

    int order() const { return order_; }

    const std::map<int, Rational>& terms() const { return coeffs_; }

    const Rational& coeff(int n) const {
        static const Rational kZero = 0;
        if (n < 0) return kZero;
        if (n >= order_) throw InsufficientPrecision(n, order_);
        auto it = coeffs_.find(n);
        return it == coeffs_.end() ? kZero : it->second;
    }

    /// True when every reliable coefficient is zero.
    bool known_zero() const { return coeffs_.empty(); }

    bool is_unit() const { return sgn(coeff(0)) != 0; }

    /// Smallest exponent with a nonzero coefficient; `order()` when none is visible.
    int valuation() const { return coeffs_.empty() ? order_ : coeffs_.begin()->first; }

    PowerSeries truncated(int new_order) const {
        if (new_order >= order_) return *this;
        std::map<int, Rational> m(coeffs_.begin(), coeffs_.lower_bound(new_order));
        return PowerSeries(std::move(m), new_order);
    }

    friend bool operator==(const PowerSeries& a, const PowerSeries& b) {
        return a.order_ == b.order_ && a.coeffs_ == b.coeffs_;
    }

private:
    std::map<int, Rational> coeffs_;
    int order_ = 0;
};

/// Coefficientwise agreement below the common reliable order.
inline bool agree(const PowerSeries& a, const PowerSeries& b) {
    int n = std::min(a.order(), b.order());
    for (const auto& [e, c] : a.terms())
        if (e < n && c != b.coeff(e)) return false;
    for (const auto& [e, c] : b.terms())
        if (e < n && c != a.coeff(e)) return false;
    return true;
}

inline PowerSeries operator+(const PowerSeries& a, const PowerSeries& b) {
    int order = std::min(a.order(), b.order());
    std::map<int, Rational> m;
    for (const auto& [e, c] : a.terms())
        if (e < order) m[e] = c;
    for (const auto& [e, c] : b.terms())
        if (e < order) m[e] += c;
    return PowerSeries(std::move(m), order);
}

inline PowerSeries operator-(const PowerSeries& a) {
    std::map<int, Rational> m;
    for (const auto& [e, c] : a.terms()) m[e] = -c;
    return PowerSeries(std::move(m), a.order());
}

inline PowerSeries operator-(const PowerSeries& a, const PowerSeries& b) { return a + (-b); }

/// Cauchy product; the result is reliable below min(a.order, b.order).
inline PowerSeries operator*(const PowerSeries& a, const PowerSeries& b) {
    int order = std::min(a.order(), b.order());
    std::map<int, Rational> m;
    for (const auto& [i, ci] : a.terms()) {
        if (i >= order) break;
        for (const auto& [j, cj] : b.terms()) {
            if (i + j >= order) break;
            m[i + j] += ci * cj;
        }
    }
    return PowerSeries(std::move(m), order);
}

inline PowerSeries operator*(const Rational& c, const PowerSeries& a) {
    std::map<int, Rational> m;
    if (sgn(c) != 0)
        for (const auto& [e, x] : a.terms()) m[e] = c * x;
    return PowerSeries(std::move(m), a.order());
}

/// Multiplication by b^k; negative k requires the low coefficients to be known zero.
inline PowerSeries shifted(const PowerSeries& a, int k) {
    if (k < 0 && a.order() < -k) throw InsufficientPrecision(-k, a.order());
    std::map<int, Rational> m;
    for (const auto& [e, c] : a.terms()) {
        if (e + k < 0) throw Error("shift below b^0 hits a nonzero coefficient");
        m[e + k] = c;
    }
    return PowerSeries(std::move(m), a.order() + k);
}

/// Formal derivative d/db; loses one order of reliability.
inline PowerSeries derivative(const PowerSeries& a) {
    std::map<int, Rational> m;
    int order = std::max(a.order() - 1, 0);
    for (const auto& [e, c] : a.terms())
        if (e >= 1 && e - 1 < order) m[e - 1] = Rational(e) * c;
    return PowerSeries(std::move(m), order);
}

/// Multiplicative inverse of a unit, to the same reliable order.
inline PowerSeries invert(const PowerSeries& a) {
    const Rational& c0 = a.coeff(0);
    if (sgn(c0) == 0) throw NotAUnit();
    int order = a.order();
    std::vector<Rational> u(order);
    u[0] = 1 / c0;
    for (int n = 1; n < order; ++n) {
        Rational acc = 0;
        for (const auto& [i, ci] : a.terms()) {
            if (i < 1) continue;
            if (i > n) break;
            acc += ci * u[n - i];
        }
        u[n] = -acc / c0;
    }
    std::map<int, Rational> m;
    for (int n = 0; n < order; ++n)
        if (sgn(u[n]) != 0) m[n] = u[n];
    return PowerSeries(std::move(m), order);
}

// Affine solution set of  b.V' - m.V = R, solved coefficientwise through
// (n - m).v_n = r_n.  When m is a non-negative integer q the coefficient r_q
// is the obstruction (it must vanish for solvability) and b^q spans the
// homogeneous solutions; the particular solution zeroes that free direction.
struct SolutionSpace {
    struct Obstruction {
        int exponent;
        Rational value;
    };
    std::optional<PowerSeries> particular;
    std::vector<PowerSeries> homogeneous;
    std::optional<Obstruction> obstruction;
};

inline SolutionSpace euler_solve(const Rational& m, const PowerSeries& r) {
    SolutionSpace out;
    const int order = r.order();
    long q = -1;
    if (is_nonnegative_integer(m)) {
        q = to_long(m);
        out.obstruction = SolutionSpace::Obstruction{static_cast<int>(q), r.coeff(static_cast<int>(q))};
        out.homogeneous.push_back(PowerSeries::monomial(1, static_cast<int>(q), order));
    }
    if (!out.obstruction || sgn(out.obstruction->value) == 0) {
        std::map<int, Rational> v;
        for (const auto& [n, rn] : r.terms()) {
            if (n == q) continue;
            v[n] = rn / (Rational(n) - m);
        }
        out.particular = PowerSeries(std::move(v), order);
    }
    return out;
}

} // namespace fresco
