#pragma once

#include <complex>
#include <cmath>
#include <set>
#include <vector>

#include "fresco/invariants.hpp"

namespace fresco {

// Module in matrix form: a acts as M(b) + b^2.d/db on coordinate vectors.
// M(0) must be a principal nilpotent for the module to be monogenic.
struct MatrixModule {
    int rank;
    std::vector<std::vector<PowerSeries>> m; // m[i][j] = coefficient of e_i in a.e_j
    int order;
};

/// Transcribes the principal basis relations: diagonal lambda_j.b, super-diagonal S_j.
inline MatrixModule matrix_presentation(const Fresco& f) {
    const int k = f.rank(), n = f.order();
    std::vector<std::vector<PowerSeries>> m(static_cast<std::size_t>(k),
                                            std::vector<PowerSeries>(static_cast<std::size_t>(k), PowerSeries::zero(n)));
    for (int c = 0; c < k; ++c) {
        m[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)] = PowerSeries::monomial(f.lambda(c + 1), 1, n);
        if (c >= 1) m[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(c)] = f.connection(c);
    }
    return MatrixModule{k, std::move(m), n};
}

namespace detail {

using Vec = std::vector<PowerSeries>;

inline Vec mat_a_apply(const MatrixModule& mm, const Vec& x) {
    Vec out;
    out.reserve(x.size());
    for (int i = 0; i < mm.rank; ++i) {
        PowerSeries acc = shifted(derivative(x[static_cast<std::size_t>(i)]), 2);
        for (int j = 0; j < mm.rank; ++j) {
            const PowerSeries& mij = mm.m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (!mij.known_zero()) acc = acc + mij * x[static_cast<std::size_t>(j)];
        }
        out.push_back(std::move(acc));
    }
    return out;
}

inline int vec_valuation(const Vec& x) {
    int v = x.empty() ? 0 : x[0].order();
    for (const auto& c : x) v = std::min(v, c.valuation());
    return v;
}

/// Integer roots (with multiplicity) of a monic integer polynomial known to
/// split over Z.  Numeric root hints are verified exactly and deflated.
inline std::vector<Integer> integer_roots_monic(std::vector<Integer> psi) {
    std::vector<Integer> roots;
    auto horner = [](const std::vector<Integer>& p, const Integer& y) {
        Integer acc = 0;
        for (std::size_t i = p.size(); i-- > 0;) acc = acc * y + p[i];
        return acc;
    };
    while (psi.size() > 1) {
        const int deg = static_cast<int>(psi.size()) - 1;
        std::set<Integer> candidates;
        candidates.insert(0);
        // Durand-Kerner in doubles as a hint generator.
        bool finite = true;
        std::vector<double> pd;
        pd.reserve(psi.size());
        for (const auto& c : psi) {
            double v = c.get_d();
            if (!std::isfinite(v)) finite = false;
            pd.push_back(v);
        }
        if (finite) {
            std::vector<std::complex<double>> r(static_cast<std::size_t>(deg));
            std::complex<double> seed(0.4, 0.9), acc(1.0, 0.0);
            for (auto& ri : r) {
                acc *= seed;
                ri = acc;
            }
            for (int it = 0; it < 300; ++it) {
                for (int i = 0; i < deg; ++i) {
                    std::complex<double> num = pd[static_cast<std::size_t>(deg)];
                    for (int d = deg - 1; d >= 0; --d)
                        num = num * r[static_cast<std::size_t>(i)] + pd[static_cast<std::size_t>(d)];
                    std::complex<double> den(1.0, 0.0);
                    for (int j = 0; j < deg; ++j)
                        if (j != i) den *= r[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(j)];
                    if (std::abs(den) > 1e-300) r[static_cast<std::size_t>(i)] -= num / den;
                }
            }
            for (const auto& ri : r) {
                double re = ri.real();
                if (std::isfinite(re) && std::abs(re) < 9e15) {
                    long base = std::lround(re);
                    for (long d = -2; d <= 2; ++d) candidates.insert(Integer(base + d));
                }
            }
        }
        // Small divisors of the constant term as a fallback.
        if (sgn(psi[0]) != 0 && psi[0].fits_slong_p()) {
            long c0 = std::labs(psi[0].get_si());
            for (long d = 1; d * d <= c0 && d <= 100000; ++d) {
                if (c0 % d != 0) continue;
                for (long s : {d, c0 / d}) {
                    candidates.insert(Integer(s));
                    candidates.insert(Integer(-s));
                }
            }
        }
        bool found = false;
        for (const auto& y : candidates) {
            if (sgn(horner(psi, y)) != 0) continue;
            roots.push_back(y);
            std::vector<Integer> quo(psi.size() - 1);
            Integer carry = 0;
            for (std::size_t i = psi.size(); i-- > 1;) {
                carry = psi[i] + carry * y;
                quo[i - 1] = carry;
            }
            psi = std::move(quo);
            found = true;
            break;
        }
        if (!found) throw NotGeometric("characteristic polynomial of the initial form does not split over Q");
    }
    return roots;
}

} // namespace detail

// Recovers the canonical presentation of a monogenic matrix module: picks a
// generator off the image of M(0), eliminates the monic annihilator from the
// iterates e, a.e, ..., a^k.e, reads the invariants off the initial form's
// characteristic polynomial, and peels the connection units by repeated
// right-factor extraction in principal order.
inline Fresco canonicalize(const MatrixModule& mm) {
    const int k = mm.rank;
    if (k < 1 || static_cast<int>(mm.m.size()) != k) throw NotMonogenic("bad matrix dimensions");

    // Constant part and the principal nilpotent test.
    std::vector<std::vector<Rational>> m0(static_cast<std::size_t>(k), std::vector<Rational>(static_cast<std::size_t>(k)));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) m0[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            mm.m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].coeff(0);

    // Row-reduce [m0 | I]; with rank k-1 exactly one reduced row vanishes and
    // its transform row tests membership in the column space.
    std::vector<std::vector<Rational>> red = m0;
    std::vector<std::vector<Rational>> tr(static_cast<std::size_t>(k), std::vector<Rational>(static_cast<std::size_t>(k)));
    for (int i = 0; i < k; ++i) tr[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    int rank0 = 0;
    for (int c = 0; c < k && rank0 < k; ++c) {
        int piv = -1;
        for (int r = rank0; r < k; ++r)
            if (sgn(red[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) != 0) { piv = r; break; }
        if (piv < 0) continue;
        std::swap(red[static_cast<std::size_t>(piv)], red[static_cast<std::size_t>(rank0)]);
        std::swap(tr[static_cast<std::size_t>(piv)], tr[static_cast<std::size_t>(rank0)]);
        Rational inv = 1 / red[static_cast<std::size_t>(rank0)][static_cast<std::size_t>(c)];
        for (int cc = 0; cc < k; ++cc) {
            red[static_cast<std::size_t>(rank0)][static_cast<std::size_t>(cc)] *= inv;
            tr[static_cast<std::size_t>(rank0)][static_cast<std::size_t>(cc)] *= inv;
        }
        for (int r = 0; r < k; ++r) {
            if (r == rank0) continue;
            Rational fctr = red[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            if (sgn(fctr) == 0) continue;
            for (int cc = 0; cc < k; ++cc) {
                red[static_cast<std::size_t>(r)][static_cast<std::size_t>(cc)] -= fctr * red[static_cast<std::size_t>(rank0)][static_cast<std::size_t>(cc)];
                tr[static_cast<std::size_t>(r)][static_cast<std::size_t>(cc)] -= fctr * tr[static_cast<std::size_t>(rank0)][static_cast<std::size_t>(cc)];
            }
        }
        ++rank0;
    }
    if (k > 1 && rank0 != k - 1) throw NotMonogenic();
    if (k == 1 && rank0 != 0) throw NotMonogenic();
    std::vector<std::vector<Rational>> pw = m0;
    for (int n = 1; n < k; ++n) {
        std::vector<std::vector<Rational>> nx(static_cast<std::size_t>(k), std::vector<Rational>(static_cast<std::size_t>(k)));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                for (int l = 0; l < k; ++l)
                    nx[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                        pw[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] * m0[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)];
        pw = std::move(nx);
    }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (sgn(pw[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) != 0)
                throw NotMonogenic("constant part is not nilpotent");

    int gen = -1;
    for (int i = 0; i < k && gen < 0; ++i)
        if (k == 1 || sgn(tr[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(i)]) != 0) gen = i;
    if (gen < 0) throw NotMonogenic();

    // Iterates e, a.e, ..., a^k.e and the monic annihilator.
    detail::Vec v(static_cast<std::size_t>(k), PowerSeries::zero(mm.order));
    v[static_cast<std::size_t>(gen)] = PowerSeries::one(mm.order);
    std::vector<detail::Vec> iter{v};
    for (int n = 0; n < k; ++n) iter.push_back(detail::mat_a_apply(mm, iter.back()));

    // Unit-pivot Gauss-Jordan over the series ring: [v_0 .. v_{k-1} | -v_k].
    std::vector<std::vector<PowerSeries>> aug(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) aug[static_cast<std::size_t>(r)].push_back(iter[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)]);
        aug[static_cast<std::size_t>(r)].push_back(-iter[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)]);
    }
    for (int c = 0; c < k; ++c) {
        int piv = -1;
        for (int r = c; r < k; ++r)
            if (aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].is_unit()) { piv = r; break; }
        if (piv < 0) throw NotMonogenic("iterates of the generator do not form a basis");
        std::swap(aug[static_cast<std::size_t>(piv)], aug[static_cast<std::size_t>(c)]);
        PowerSeries inv = invert(aug[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)]);
        for (int cc = c; cc <= k; ++cc) aug[static_cast<std::size_t>(c)][static_cast<std::size_t>(cc)] =
            inv * aug[static_cast<std::size_t>(c)][static_cast<std::size_t>(cc)];
        for (int r = 0; r < k; ++r) {
            if (r == c) continue;
            const PowerSeries f = aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            if (f.known_zero()) continue;
            for (int cc = c; cc <= k; ++cc)
                aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(cc)] =
                    aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(cc)] - f * aug[static_cast<std::size_t>(c)][static_cast<std::size_t>(cc)];
        }
    }
    std::vector<PowerSeries> t;
    t.reserve(static_cast<std::size_t>(k) + 1);
    for (int r = 0; r < k; ++r) t.push_back(aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)]);
    t.push_back(PowerSeries::one(mm.order));
    AbElement p_raw(std::move(t));

    // Initial form must be purely of weight k; its characteristic polynomial
    // chi(x) = sum_m t_{m,k-m} x(x+1)...(x+m-1) has the roots lambda_j + j - k.
    for (int m = 0; m <= p_raw.degree(); ++m)
        for (const auto& [i, c] : p_raw.coeff(m).terms())
            if (i + m < k)
                throw NotMonogenic("annihilator has (a,b)-weight below the rank");
    std::vector<Rational> chi(static_cast<std::size_t>(k) + 1);
    std::vector<Rational> rising{1}; // x(x+1)...(x+m-1)
    for (int m = 0; m <= k; ++m) {
        const Rational& c = (m <= p_raw.degree() && k - m < p_raw.coeff(m).order()) ? p_raw.coeff(m).coeff(k - m) : 0;
        if (sgn(c) != 0)
            for (std::size_t i = 0; i < rising.size(); ++i) chi[i] += c * rising[i];
        // multiply by (x + m) for the next round
        std::vector<Rational> nxt(rising.size() + 1);
        for (std::size_t i = 0; i < rising.size(); ++i) {
            nxt[i] += Rational(m) * rising[i];
            nxt[i + 1] += rising[i];
        }
        rising = std::move(nxt);
    }

    Integer lcm_den = 1;
    for (const auto& c : chi) {
        Integer g;
        mpz_lcm(g.get_mpz_t(), lcm_den.get_mpz_t(), c.get_den().get_mpz_t());
        lcm_den = g;
    }
    std::vector<Integer> psi(chi.size());
    for (std::size_t i = 0; i < chi.size(); ++i) {
        Integer scale;
        mpz_pow_ui(scale.get_mpz_t(), lcm_den.get_mpz_t(), static_cast<unsigned long>(k - static_cast<int>(i)));
        Rational v = chi[i] * Rational(scale);
        psi[i] = v.get_num(); // exact by construction
    }
    std::vector<Integer> yroots = detail::integer_roots_monic(psi);

    std::vector<Rational> vals;
    vals.reserve(yroots.size());
    for (const auto& y : yroots) {
        Rational x = Rational(y) / Rational(lcm_den);
        x.canonicalize();
        if (sgn(x) <= 0) throw NotGeometric("Bernstein roots are not strictly negative");
        vals.push_back(x + k); // lambda_j + j
    }
    std::stable_sort(vals.begin(), vals.end(), qorder_less);
    std::vector<Rational> lambda;
    lambda.reserve(vals.size());
    for (int j = 1; j <= k; ++j) lambda.push_back(vals[static_cast<std::size_t>(j - 1)] - j);

    // Peel in principal order; the first extraction returns presentation gauge.
    std::vector<PowerSeries> connections(static_cast<std::size_t>(std::max(k - 1, 0)), PowerSeries());
    AbElement q = p_raw;
    for (int j = k; j >= 1; --j) {
        RightFactor rf = right_factor_extract(q, lambda[static_cast<std::size_t>(j - 1)]);
        if (j < k) connections[static_cast<std::size_t>(j - 1)] = rf.unit;
        q = rf.quotient;
    }
    return Fresco(std::move(lambda), std::move(connections), mm.order);
}

// Twisted dual E* (x) E_delta: dual matrix -M(b)^T + delta.b.Id, then
// canonical form.  The invariants must come out as delta - lambda_{k+1-j};
// this is validated against the Bernstein roots of the output.
inline Fresco dual_twist(const Fresco& f, const Rational& delta) {
    const int k = f.rank();
    for (int j = 1; j <= k; ++j)
        if (delta - f.lambda(k + 1 - j) + j <= k)
            throw NotGeometric("twist parameter too small to restore the geometric condition");

    MatrixModule mm = matrix_presentation(f);
    std::vector<std::vector<PowerSeries>> dual(static_cast<std::size_t>(k),
                                               std::vector<PowerSeries>(static_cast<std::size_t>(k)));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            PowerSeries v = -mm.m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            if (i == j) v = v + PowerSeries::monomial(delta, 1, mm.order);
            dual[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::move(v);
        }
    Fresco out = canonicalize(MatrixModule{k, std::move(dual), mm.order});

    std::vector<Rational> expected;
    for (int j = 1; j <= k; ++j) expected.push_back(-(delta - f.lambda(k + 1 - j) + j - k));
    std::sort(expected.begin(), expected.end());
    if (bernstein_roots(out) != expected)
        throw Error("dual invariants disagree with the Bernstein roots of the canonical form");
    return out;
}

// Change of variable theta, theta(0) = 0, chi = theta'(0) != 0.
struct ChangeOfVariable {
    std::vector<Rational> coeffs; // coeffs[n-1] = coefficient of a^n

    explicit ChangeOfVariable(std::vector<Rational> c) : coeffs(std::move(c)) {
        if (coeffs.empty() || sgn(coeffs[0]) == 0)
            throw PreconditionFailed("change of variable needs theta'(0) != 0");
    }

    const Rational& chi() const { return coeffs[0]; }
};

namespace detail {

/// Compositional inverse via Lagrange inversion: eta_n = [z^{n-1}] (z/theta)^n / n.
inline std::vector<Rational> series_inverse(const std::vector<Rational>& theta, int depth) {
    std::map<int, Rational> g0;
    for (std::size_t i = 0; i < theta.size() && static_cast<int>(i) < depth; ++i)
        if (sgn(theta[i]) != 0) g0[static_cast<int>(i)] = theta[i];
    PowerSeries g = invert(PowerSeries(std::move(g0), depth)); // z/theta(z)
    std::vector<Rational> eta(static_cast<std::size_t>(depth));
    PowerSeries p = g;
    for (int n = 1; n <= depth; ++n) {
        eta[static_cast<std::size_t>(n - 1)] = p.coeff(n - 1) / n;
        if (n < depth) p = p * g;
    }
    return eta;
}

inline Vec vec_scale(const Rational& c, const Vec& x) {
    Vec out;
    out.reserve(x.size());
    for (const auto& s : x) out.push_back(c * s);
    return out;
}

inline Vec vec_add(const Vec& x, const Vec& y) {
    Vec out;
    out.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out.push_back(x[i] + y[i]);
    return out;
}

inline Vec vec_sub(const Vec& x, const Vec& y) {
    Vec out;
    out.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out.push_back(x[i] - y[i]);
    return out;
}

inline Vec vec_b_shift(const Vec& x) {
    Vec out;
    out.reserve(x.size());
    for (const auto& s : x) out.push_back(shifted(s, 1));
    return out;
}

} // namespace detail

// Transport of structure along the substitution of variables: with eta the
// compositional inverse of theta, the new operators on the old coordinates
// are a~ = eta(A) and b~ = b . eta'(A).  The result is re-expressed in a
// basis over the new b and canonicalized; the invariants must be unchanged.
inline Fresco change_variable(const Fresco& f, const ChangeOfVariable& cov) {
    const int k = f.rank(), order = f.order();
    MatrixModule mm = matrix_presentation(f);

    const int cap = order + 4 * k + 32 + static_cast<int>(ceil_int(mu(f)).get_si());
    std::vector<Rational> eta = detail::series_inverse(cov.coeffs, cap);

    std::size_t last_eta = 0;
    for (std::size_t n = 0; n < eta.size(); ++n)
        if (sgn(eta[n]) != 0) last_eta = n + 1;

    auto a_tilde_and_eta_prime = [&](const detail::Vec& x) {
        detail::Vec acc_a(x.size(), PowerSeries::zero(order));
        detail::Vec acc_p(x.size(), PowerSeries::zero(order));
        detail::Vec pow = x;
        bool converged = false;
        for (std::size_t n = 1; n <= eta.size(); ++n) {
            if (n > last_eta) { converged = true; break; }
            if (sgn(eta[n - 1]) != 0) {
                acc_p = detail::vec_add(acc_p, detail::vec_scale(Rational(static_cast<long>(n)) * eta[n - 1], pow));
            }
            pow = detail::mat_a_apply(mm, pow);
            if (sgn(eta[n - 1]) != 0) acc_a = detail::vec_add(acc_a, detail::vec_scale(eta[n - 1], pow));
            if (detail::vec_valuation(pow) >= order) { converged = true; break; }
        }
        if (!converged) throw NonConvergent();
        return std::pair<detail::Vec, detail::Vec>(std::move(acc_a), std::move(acc_p));
    };
    auto b_tilde = [&](const detail::Vec& x) { return detail::vec_b_shift(a_tilde_and_eta_prime(x).second); };

    // Leading matrix of eta'(A) mod b; invertible since M(0) is nilpotent.
    std::vector<std::vector<Rational>> m0(static_cast<std::size_t>(k), std::vector<Rational>(static_cast<std::size_t>(k)));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) m0[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            mm.m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].coeff(0);
    std::vector<std::vector<Rational>> g(static_cast<std::size_t>(k), std::vector<Rational>(static_cast<std::size_t>(k)));
    {
        std::vector<std::vector<Rational>> pw(static_cast<std::size_t>(k), std::vector<Rational>(static_cast<std::size_t>(k)));
        for (int i = 0; i < k; ++i) pw[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
        for (int n = 1; n <= k && static_cast<std::size_t>(n) <= eta.size(); ++n) {
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                        Rational(n) * eta[static_cast<std::size_t>(n - 1)] * pw[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (n == k) break;
            std::vector<std::vector<Rational>> nx(static_cast<std::size_t>(k), std::vector<Rational>(static_cast<std::size_t>(k)));
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    for (int l = 0; l < k; ++l)
                        nx[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                            pw[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] * m0[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)];
            pw = std::move(nx);
        }
    }
    auto mat_inverse = [&](std::vector<std::vector<Rational>> a) {
        std::vector<std::vector<Rational>> inv(static_cast<std::size_t>(k), std::vector<Rational>(static_cast<std::size_t>(k)));
        for (int i = 0; i < k; ++i) inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
        for (int c = 0; c < k; ++c) {
            int piv = -1;
            for (int r = c; r < k; ++r)
                if (sgn(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) != 0) { piv = r; break; }
            if (piv < 0) throw Error("singular leading matrix in change of variable");
            std::swap(a[static_cast<std::size_t>(piv)], a[static_cast<std::size_t>(c)]);
            std::swap(inv[static_cast<std::size_t>(piv)], inv[static_cast<std::size_t>(c)]);
            Rational s = 1 / a[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
            for (int cc = 0; cc < k; ++cc) {
                a[static_cast<std::size_t>(c)][static_cast<std::size_t>(cc)] *= s;
                inv[static_cast<std::size_t>(c)][static_cast<std::size_t>(cc)] *= s;
            }
            for (int r = 0; r < k; ++r) {
                if (r == c) continue;
                Rational fr = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
                if (sgn(fr) == 0) continue;
                for (int cc = 0; cc < k; ++cc) {
                    a[static_cast<std::size_t>(r)][static_cast<std::size_t>(cc)] -= fr * a[static_cast<std::size_t>(c)][static_cast<std::size_t>(cc)];
                    inv[static_cast<std::size_t>(r)][static_cast<std::size_t>(cc)] -= fr * inv[static_cast<std::size_t>(c)][static_cast<std::size_t>(cc)];
                }
            }
        }
        return inv;
    };
    std::vector<std::vector<Rational>> g_inv = mat_inverse(g);

    // w[j][v] = b~^v (e_j), a triangular basis by valuation with leading G^v e_j.
    std::vector<std::vector<detail::Vec>> w(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        detail::Vec e(static_cast<std::size_t>(k), PowerSeries::zero(order));
        e[static_cast<std::size_t>(j)] = PowerSeries::one(order);
        w[static_cast<std::size_t>(j)].push_back(e);
        for (int v = 1; v < order; ++v) w[static_cast<std::size_t>(j)].push_back(b_tilde(w[static_cast<std::size_t>(j)].back()));
    }

    std::vector<std::vector<PowerSeries>> mt(static_cast<std::size_t>(k),
                                             std::vector<PowerSeries>(static_cast<std::size_t>(k)));
    std::vector<std::vector<std::map<int, Rational>>> entry(static_cast<std::size_t>(k),
                                                            std::vector<std::map<int, Rational>>(static_cast<std::size_t>(k)));
    int out_order = order;
    for (int j = 0; j < k; ++j) {
        detail::Vec e(static_cast<std::size_t>(k), PowerSeries::zero(order));
        e[static_cast<std::size_t>(j)] = PowerSeries::one(order);
        detail::Vec y = a_tilde_and_eta_prime(e).first;
        int horizon = order;
        for (const auto& comp : y) horizon = std::min(horizon, comp.order());
        out_order = std::min(out_order, horizon);

        std::vector<std::vector<Rational>> ginv_pow(static_cast<std::size_t>(k), std::vector<Rational>(static_cast<std::size_t>(k)));
        for (int i = 0; i < k; ++i) ginv_pow[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
        for (int v = 0; v < horizon; ++v) {
            std::vector<Rational> lead(static_cast<std::size_t>(k));
            bool any = false;
            for (int i = 0; i < k; ++i) {
                lead[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)].coeff(v);
                if (sgn(lead[static_cast<std::size_t>(i)]) != 0) any = true;
            }
            if (any) {
                std::vector<Rational> c(static_cast<std::size_t>(k));
                for (int i = 0; i < k; ++i)
                    for (int l = 0; l < k; ++l)
                        c[static_cast<std::size_t>(i)] += ginv_pow[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] * lead[static_cast<std::size_t>(l)];
                for (int i = 0; i < k; ++i) {
                    if (sgn(c[static_cast<std::size_t>(i)]) == 0) continue;
                    entry[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][v] = c[static_cast<std::size_t>(i)];
                    y = detail::vec_sub(y, detail::vec_scale(c[static_cast<std::size_t>(i)], w[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)]));
                }
            }
            // advance G^{-v}
            std::vector<std::vector<Rational>> nx(static_cast<std::size_t>(k), std::vector<Rational>(static_cast<std::size_t>(k)));
            for (int i = 0; i < k; ++i)
                for (int jj = 0; jj < k; ++jj)
                    for (int l = 0; l < k; ++l)
                        nx[static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)] +=
                            g_inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] * ginv_pow[static_cast<std::size_t>(l)][static_cast<std::size_t>(jj)];
            ginv_pow = std::move(nx);
        }
    }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            mt[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                PowerSeries(std::move(entry[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]), out_order);

    Fresco out = canonicalize(MatrixModule{k, std::move(mt), out_order});
    if (out.lambdas() != f.lambdas())
        throw Error("change of variable altered the fundamental invariants");
    return out;
}

} // namespace fresco
