#pragma once

#include <utility>
#include <vector>

#include "fresco/series.hpp"

namespace fresco {

// Element of the algebra generated by a and b with a.b - b.a = b^2, kept in
// left-coefficient normal form  T_0(b) + T_1(b).a + ... + T_k(b).a^k.
class AbElement {
public:
    AbElement() = default; // zero

    explicit AbElement(std::vector<PowerSeries> t) : t_(std::move(t)) {
        while (!t_.empty() && t_.back().known_zero()) t_.pop_back();
    }

    static AbElement one(int order) { return AbElement({PowerSeries::one(order)}); }

    static AbElement a_power(int j, int order) {
        std::vector<PowerSeries> t(j + 1, PowerSeries::zero(order));
        t[j] = PowerSeries::one(order);
        return AbElement(std::move(t));
    }

    /// a - lambda.b
    static AbElement a_minus(const Rational& lambda, int order) {
        return AbElement({PowerSeries::monomial(-lambda, 1, order), PowerSeries::one(order)});
    }

    bool is_zero() const { return t_.empty(); }

    int degree() const { return static_cast<int>(t_.size()) - 1; }

    const PowerSeries& coeff(int j) const { return t_.at(static_cast<std::size_t>(j)); }

    const std::vector<PowerSeries>& coeffs() const { return t_; }

    bool monic_in_a() const { return !t_.empty() && t_.back().is_unit(); }

private:
    std::vector<PowerSeries> t_;
};

inline AbElement operator+(const AbElement& x, const AbElement& y) {
    std::vector<PowerSeries> t;
    int d = std::max(x.degree(), y.degree());
    for (int j = 0; j <= d; ++j) {
        if (j <= x.degree() && j <= y.degree())
            t.push_back(x.coeff(j) + y.coeff(j));
        else if (j <= x.degree())
            t.push_back(x.coeff(j));
        else
            t.push_back(y.coeff(j));
    }
    return AbElement(std::move(t));
}

inline AbElement operator-(const AbElement& x) {
    std::vector<PowerSeries> t;
    for (int j = 0; j <= x.degree(); ++j) t.push_back(-x.coeff(j));
    return AbElement(std::move(t));
}

inline AbElement operator-(const AbElement& x, const AbElement& y) { return x + (-y); }

/// Left multiplication by a series (the coefficients stay on the left).
inline AbElement scale_left(const PowerSeries& s, const AbElement& x) {
    std::vector<PowerSeries> t;
    for (int j = 0; j <= x.degree(); ++j) t.push_back(s * x.coeff(j));
    return AbElement(std::move(t));
}

inline AbElement operator*(const Rational& c, const AbElement& x) {
    std::vector<PowerSeries> t;
    for (int j = 0; j <= x.degree(); ++j) t.push_back(c * x.coeff(j));
    return AbElement(std::move(t));
}

// Product in normal form.  Powers of a move left past a series by iterating
// a.S = S.a + b^2.S', which gives a^i.S = sum_m C(i,m) D^m(S) a^(i-m) with
// D(S) = b^2.S'.
inline AbElement ab_mul(const AbElement& x, const AbElement& y) {
    if (x.is_zero() || y.is_zero()) return {};
    const int dx = x.degree(), dy = y.degree();

    // derivs[j][m] = D^m(U_j)
    std::vector<std::vector<PowerSeries>> derivs(static_cast<std::size_t>(dy) + 1);
    for (int j = 0; j <= dy; ++j) {
        derivs[j].push_back(y.coeff(j));
        for (int m = 1; m <= dx; ++m) derivs[j].push_back(shifted(derivative(derivs[j].back()), 2));
    }

    std::vector<std::vector<Integer>> binom(static_cast<std::size_t>(dx) + 1);
    for (int i = 0; i <= dx; ++i) {
        binom[i].assign(static_cast<std::size_t>(i) + 1, 1);
        for (int m = 1; m < i; ++m) binom[i][m] = binom[i - 1][m - 1] + binom[i - 1][m];
    }

    std::vector<std::optional<PowerSeries>> acc(static_cast<std::size_t>(dx + dy) + 1);
    for (int i = 0; i <= dx; ++i) {
        for (int j = 0; j <= dy; ++j) {
            for (int m = 0; m <= i; ++m) {
                PowerSeries term = x.coeff(i) * (Rational(binom[i][m]) * derivs[j][m]);
                auto& slot = acc[static_cast<std::size_t>(i - m + j)];
                slot = slot ? (*slot + term) : term;
            }
        }
    }
    std::vector<PowerSeries> t;
    t.reserve(acc.size());
    for (auto& s : acc) t.push_back(*s);
    return AbElement(std::move(t));
}

inline AbElement operator*(const AbElement& x, const AbElement& y) { return ab_mul(x, y); }

/// Coefficientwise agreement below the common reliable orders.
inline bool ab_agree(const AbElement& x, const AbElement& y) {
    int d = std::max(x.degree(), y.degree());
    for (int j = 0; j <= d; ++j) {
        if (j > x.degree()) {
            if (!y.coeff(j).known_zero()) return false;
        } else if (j > y.degree()) {
            if (!x.coeff(j).known_zero()) return false;
        } else if (!agree(x.coeff(j), y.coeff(j))) {
            return false;
        }
    }
    return true;
}

// Coordinates of Q.(S.e_lambda) in the basis {b^n.e_lambda} of the rank-1
// module E_lambda, where a acts by S |-> lambda.b.S + b^2.S'.
inline PowerSeries act_on_rank1(const AbElement& q, const Rational& lambda, const PowerSeries& s) {
    if (q.is_zero()) return PowerSeries::zero(s.order());
    std::optional<PowerSeries> acc;
    PowerSeries cur = s;
    for (int j = 0; j <= q.degree(); ++j) {
        PowerSeries term = q.coeff(j) * cur;
        acc = acc ? (*acc + term) : term;
        if (j < q.degree()) cur = lambda * shifted(cur, 1) + shifted(derivative(cur), 2);
    }
    return *acc;
}

/// Lowest (a,b)-homogeneous part, a and b both of weight 1.
inline AbElement initial_form(const AbElement& q) {
    if (q.is_zero()) return q;
    int d = -1;
    int unknown = q.coeff(0).order();
    for (int j = 0; j <= q.degree(); ++j) {
        unknown = std::min(unknown, j + q.coeff(j).order());
        for (const auto& [i, c] : q.coeff(j).terms())
            if (d < 0 || i + j < d) d = i + j;
    }
    if (d < 0 || d >= unknown) throw InsufficientPrecision(d < 0 ? unknown : d, unknown);
    std::vector<PowerSeries> t;
    for (int j = 0; j <= q.degree() && j <= d; ++j) {
        const Rational& c = (d - j < q.coeff(j).order()) ? q.coeff(j).coeff(d - j) : 0;
        t.push_back(PowerSeries::monomial(c, d - j, q.coeff(j).order()));
    }
    return AbElement(std::move(t));
}

struct RightFactor {
    PowerSeries unit;   // S with S(0) = 1
    AbElement quotient; // Q' with Q.S = Q'.(a - lambda.b)
};

namespace detail {

/// Exact division Z = Q'.(a - lambda.b); the remainder must vanish.
inline AbElement right_divide_linear(const AbElement& z, const Rational& lambda, int order) {
    AbElement rem = z;
    AbElement d = AbElement::a_minus(lambda, order);
    std::vector<PowerSeries> w(static_cast<std::size_t>(std::max(z.degree(), 1)), PowerSeries::zero(order));
    for (int j = z.degree() - 1; j >= 0; --j) {
        if (rem.degree() < j + 1) continue;
        PowerSeries wj = rem.coeff(j + 1);
        w[static_cast<std::size_t>(j)] = wj;
        std::vector<PowerSeries> mono(static_cast<std::size_t>(j) + 1, PowerSeries::zero(wj.order()));
        mono[static_cast<std::size_t>(j)] = wj;
        rem = rem - ab_mul(AbElement(std::move(mono)), d);
    }
    if (!rem.is_zero())
        throw Error("right division by (a - lambda.b) left a nonzero remainder");
    return AbElement(std::move(w));
}

} // namespace detail

// Peels the rightmost rank-1 quotient off a monic operator: finds the unit S
// with S(0) = 1 and the monic Q' of degree deg(Q) - 1 such that
// Q.S = Q'.(a - lambda.b).  S solves the linear recursion act_on_rank1(Q,
// lambda, S) = 0; free parameters of the solution space are set to zero.
inline RightFactor right_factor_extract(const AbElement& q, const Rational& lambda) {
    if (q.degree() < 1 || !q.monic_in_a())
        throw PreconditionFailed("right_factor_extract needs a monic-in-a operator of degree >= 1");
    const int k = q.degree();

    // Reliability horizon of the columns act_on_rank1(q, lambda, b^n) and the
    // lowest visible (a,b)-weight d0 of q; for a fresco annihilator d0 = k.
    int w = q.coeff(0).order();
    int d0 = -1;
    for (int j = 0; j <= k; ++j) {
        w = std::min(w, q.coeff(j).order() + j);
        for (const auto& [i, c] : q.coeff(j).terms())
            if (d0 < 0 || i + j < d0) d0 = i + j;
    }
    if (d0 < 0 || d0 >= w) throw InsufficientPrecision(std::max(d0, 0), w);

    // act(q, lambda, b^n) has valuation >= n + d0, so the coefficient
    // recursion marches with offset d0: the equation at exponent n + d0
    // determines s_n unless its diagonal vanishes, in which case s_n is free
    // (s_0 := 1, later frees := 0) and the residual is an obstruction.
    const int ncols = w - d0;
    std::map<int, Rational> sm;
    PowerSeries residual = PowerSeries::zero(w);
    for (int n = 0; n < ncols; ++n) {
        Rational rising = 1;
        std::optional<PowerSeries> c;
        for (int j = 0; j <= k; ++j) {
            PowerSeries term = shifted(rising * q.coeff(j), n + j);
            c = c ? (*c + term) : term;
            rising *= lambda + n + j;
        }
        const PowerSeries& col = *c;
        const Rational& dia = col.coeff(n + d0);
        const Rational& res = residual.coeff(n + d0);
        Rational sn;
        if (sgn(dia) != 0) {
            sn = -res / dia;
        } else if (sgn(res) != 0) {
            throw NoUnitSolution("no unit right-factor: obstruction at b^" + std::to_string(n + d0) +
                                 " does not vanish");
        } else {
            sn = (n == 0) ? 1 : 0;
        }
        if (n == 0 && sgn(sn) == 0) throw NoUnitSolution();
        if (sgn(sn) != 0) {
            sm[n] = sn;
            residual = residual + sn * col;
        }
    }
    PowerSeries unit(std::move(sm), ncols);

    AbElement z = ab_mul(q, AbElement({unit}));
    return RightFactor{unit, detail::right_divide_linear(z, lambda, ncols)};
}

} // namespace fresco
