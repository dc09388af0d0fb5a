#pragma once

#include <optional>
#include <set>
#include <vector>

#include "fresco/fresco_core.hpp"

namespace fresco {

/// Rank-2 parameter: p not a non-negative integer forces alpha = 0, p = 0 forces alpha = 1,
/// otherwise alpha is the coefficient of b^p in the connection unit.
inline Rational alpha(const Fresco& f) {
    if (f.rank() != 2) throw PreconditionFailed("alpha is defined for rank-2 frescos");
    Rational p = f.p(1);
    if (!is_nonnegative_integer(p)) return 0;
    if (sgn(p) == 0) return 1;
    return f.connection(1).coeff(static_cast<int>(to_long(p)));
}

/// alpha of the rank-2 window F_{j+1}/F_{j-1}, 1 <= j <= k-1.
inline Rational alpha_j(const Fresco& f, int j) {
    if (j < 1 || j >= f.rank()) throw PreconditionFailed("alpha_j index out of range");
    return alpha(window(f, j, j + 1));
}

/// Isomorphism class data of a rank-2 fresco.
struct Rank2Class {
    Rational lambda1;
    Rational lambda2;
    Rational p; // lambda2 - lambda1 + 1
    Rational alpha;
};

// Generator e' = e_k + V.e_{k-1} with (a - lambda_{k-1}.b).(a - lambda_k.b).e'
// in F_{k-2}; the balancing constant is S_{k-1}(0) = 1 and V solves
// b.V' - (p_{k-1}-1).V = (1 - S_{k-1})/b with its free parameter zeroed.  The
// Euler obstruction is exactly the coefficient alpha_{k-1}.
inline Element adjusted_generator(const Fresco& f) {
    const int k = f.rank();
    if (k < 3) throw PreconditionFailed("adjusted_generator needs rank >= 3");
    const PowerSeries& s = f.connection(k - 1);
    Rational m = f.lambda(k) - f.lambda(k - 1); // p_{k-1} - 1
    SolutionSpace sol = euler_solve(m, shifted(PowerSeries::one(s.order()) - s, -1));
    if (!sol.particular)
        throw PreconditionFailed("window (" + std::to_string(k - 1) + "," + std::to_string(k) +
                                 ") is not semi-simple: alpha obstruction " +
                                 to_string(sol.obstruction->value) + " at b^" +
                                 std::to_string(sol.obstruction->exponent + 1));
    Element e = basis_element(f, k);
    e.u[static_cast<std::size_t>(k - 2)] = *sol.particular;

    Element h = a_minus_action(f, f.lambda(k - 1), a_minus_action(f, f.lambda(k), e));
    if (!h.coord(k).known_zero() || !h.coord(k - 1).known_zero())
        throw Error("adjusted generator postcondition failed");
    return e;
}

// The normal submodule G^tau generated by (a - (lambda_{k-1}-1).b).eps(tau)
// with eps(tau) = e' + tau.b^{p_{k-1}-1}.e_{k-1}, presented as the rank k-1
// fresco (lambda_1..lambda_{k-2}, lambda_k + 1; T_1..T_{k-2}) where the T's
// present the generator (a - lambda_{k-1}.b).(a - lambda_k.b).eps of F_{k-2}.
inline Fresco beta_submodule(const Fresco& f, const Rational& tau) {
    const int k = f.rank();
    Element eps = adjusted_generator(f);
    if (sgn(tau) != 0) {
        Rational pk1 = f.p(k - 1);
        if (!is_positive_integer(pk1))
            throw PreconditionFailed("tau direction needs p_{k-1} to be a positive integer");
        eps.u[static_cast<std::size_t>(k - 2)] =
            eps.coord(k - 1) + PowerSeries::monomial(tau, static_cast<int>(to_long(pk1)) - 1, f.order());
    }
    Element h = a_minus_action(f, f.lambda(k - 1), a_minus_action(f, f.lambda(k), eps));
    if (!h.coord(k).known_zero() || !h.coord(k - 1).known_zero())
        throw Error("beta submodule generator does not land in F_{k-2}");

    Fresco w = window(f, 1, k - 2);
    std::vector<PowerSeries> t = annihilator_presentation(w, restrict_to_flag(f, h, k - 2));

    std::vector<Rational> lambda(f.lambdas().begin(), f.lambdas().begin() + (k - 2));
    lambda.push_back(f.lambda(k) + 1);
    return Fresco(std::move(lambda), std::move(t), f.order());
}

namespace detail {

/// beta without the recursive semi-simplicity re-checks; callers must
/// guarantee the stratum membership (stratum_level does, level by level).
inline Rational beta_unchecked(const Fresco& f) {
    if (f.rank() < 2) throw PreconditionFailed("beta needs rank >= 2");
    if (f.rank() == 2) return alpha(f);
    return beta_unchecked(beta_submodule(f, 0));
}

} // namespace detail

struct StratumReport {
    struct WindowBeta {
        int i; // 1-based window [i, j]
        int j;
        Rational beta;
    };
    int level;                        // h in [1, k]; h = k iff semi-simple
    std::vector<WindowBeta> failing;  // all windows of the first failing level, empty when level = k
};

// Stratification level: for h = 2..k every window of size h must have
// vanishing beta; the previous level guarantees the preconditions of beta at
// the next one.  Level k means semi-simple.
inline StratumReport stratum_level(const Fresco& f) {
    const int k = f.rank();
    for (int h = 2; h <= k; ++h) {
        std::vector<StratumReport::WindowBeta> row;
        bool fail = false;
        for (int i = 1; i + h - 1 <= k; ++i) {
            Rational v = detail::beta_unchecked(window(f, i, i + h - 1));
            if (sgn(v) != 0) fail = true;
            row.push_back(StratumReport::WindowBeta{i, i + h - 1, std::move(v)});
        }
        if (fail) return StratumReport{h - 1, std::move(row)};
    }
    return StratumReport{k, {}};
}

inline bool is_semisimple(const Fresco& f) { return stratum_level(f).level == f.rank(); }

// The beta invariant: alpha in rank 2, and recursively beta(G^0) above, with
// the stratum preconditions re-checked at every level of the recursion.
inline Rational beta(const Fresco& f) {
    if (f.rank() < 2) throw PreconditionFailed("beta needs rank >= 2");
    if (f.rank() == 2) return alpha(f);
    if (!is_semisimple(window(f, 1, f.rank() - 1)))
        throw PreconditionFailed("beta precondition failed: F_{k-1} is not semi-simple");
    if (!is_semisimple(window(f, 2, f.rank())))
        throw PreconditionFailed("beta precondition failed: E/F_1 is not semi-simple");
    return beta(beta_submodule(f, 0));
}

/// Closed rank-3 formula p_2 . sum_{j != p_2} s1_{p_1+p_2-j} . s2_j / (p_2 - j).
inline Rational beta_rank3_closed(const Fresco& f) {
    if (f.rank() != 3) throw PreconditionFailed("beta_rank3_closed needs rank 3");
    if (!is_positive_integer(f.p(1)) || !is_positive_integer(f.p(2)))
        throw PreconditionFailed("beta_rank3_closed needs positive integer steps p_1, p_2");
    const long p1 = to_long(f.p(1)), p2 = to_long(f.p(2));
    if (sgn(f.connection(1).coeff(static_cast<int>(p1))) != 0 ||
        sgn(f.connection(2).coeff(static_cast<int>(p2))) != 0)
        throw PreconditionFailed("beta_rank3_closed needs s1_{p_1} = s2_{p_2} = 0");
    Rational acc = 0;
    for (long j = 0; j <= p1 + p2; ++j) {
        if (j == p2) continue;
        const Rational& s1 = f.connection(1).coeff(static_cast<int>(p1 + p2 - j));
        const Rational& s2 = f.connection(2).coeff(static_cast<int>(j));
        if (sgn(s1) != 0 && sgn(s2) != 0) acc += s1 * s2 / Rational(p2 - j);
    }
    return Rational(p2) * acc;
}

/// Rank-3 oracle via the differential equation b.V' = p_2 (V - S_2): beta is
/// the coefficient of b^{p_1+p_2} in V.S_1.
inline Rational beta_rank3_ode(const Fresco& f) {
    if (f.rank() != 3) throw PreconditionFailed("beta_rank3_ode needs rank 3");
    if (!is_positive_integer(f.p(1)) || !is_positive_integer(f.p(2)))
        throw PreconditionFailed("beta_rank3_ode needs positive integer steps p_1, p_2");
    const long p1 = to_long(f.p(1)), p2 = to_long(f.p(2));
    if (sgn(f.connection(1).coeff(static_cast<int>(p1))) != 0 ||
        sgn(f.connection(2).coeff(static_cast<int>(p2))) != 0)
        throw PreconditionFailed("beta_rank3_ode needs s1_{p_1} = s2_{p_2} = 0");
    SolutionSpace sol = euler_solve(Rational(p2), Rational(-p2) * f.connection(2));
    if (!sol.particular) throw PreconditionFailed("obstruction did not vanish despite s2_{p_2} = 0");
    return ((*sol.particular) * f.connection(1)).coeff(static_cast<int>(p1 + p2));
}

/// p(E) = sum of the steps p_j; requires every p_j to be a positive integer.
inline Rational p_total(const Fresco& f) {
    Rational acc = 0;
    for (int j = 1; j < f.rank(); ++j) {
        Rational p = f.p(j);
        if (!is_positive_integer(p))
            throw PreconditionFailed("p(E) needs positive integer steps; p_" + std::to_string(j) + " = " +
                                     to_string(p));
        acc += p;
    }
    return acc;
}

// Isomorphism class of every normal rank-2 sub-theme when beta does not
// vanish: invariants (lambda_1, lambda_k + k - 2) and parameter beta(E).
inline Rank2Class rank2_subtheme_class(const Fresco& f) {
    Rational b = beta(f);
    if (sgn(b) == 0) throw BetaVanishes();
    Rational l1 = f.lambda(1);
    Rational l2 = f.lambda(f.rank()) + f.rank() - 2;
    Rational p = l2 - l1 + 1;
    return Rank2Class{std::move(l1), std::move(l2), std::move(p), std::move(b)};
}

/// beta of the twisted dual: (-1)^k . p_1(p_1+p_2)...(p_1+..+p_{k-2}) /
/// (p_{k-1}(p_{k-2}+p_{k-1})...(p_2+..+p_{k-1})) . beta(E).
inline Rational beta_star(const Fresco& f) {
    Rational b = beta(f);
    if (sgn(b) == 0) return 0;
    const int k = f.rank();
    Rational num = 1, den = 1, up = 0, down = 0;
    for (int i = 1; i <= k - 2; ++i) {
        up += f.p(i);
        num *= up;
        down += f.p(k - i);
        den *= down;
    }
    Rational out = num / den * b;
    return (k % 2 == 0) ? out : -out;
}

// ---------------------------------------------------------------------------
// Rank-1 normal submodules

/// Basis of the solutions of (a - mu.b).x = 0, solved component by component
/// from the top through euler_solve; free parameters surface as directions.
struct Rank1Family {
    Rational mu;
    Element generator;               // member with a unit coordinate, lowest such coordinate normalized to 1
    std::vector<Element> directions; // remaining basis vectors of the solution space
};

namespace detail {

/// Restricts dirs to the combinations with sum tau_d * vals_d = 0.
inline void eliminate_constraint(std::vector<Element>& dirs, const std::vector<Rational>& vals) {
    int piv = -1;
    for (std::size_t d = 0; d < vals.size(); ++d)
        if (sgn(vals[d]) != 0) { piv = static_cast<int>(d); break; }
    if (piv < 0) return;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        if (static_cast<int>(d) == piv || sgn(vals[d]) == 0) continue;
        dirs[d] = dirs[d] - (vals[d] / vals[static_cast<std::size_t>(piv)]) * dirs[static_cast<std::size_t>(piv)];
    }
    dirs.erase(dirs.begin() + piv);
}

inline std::vector<Element> rank1_solution_basis(const Fresco& f, const Rational& mu) {
    const int k = f.rank(), order = f.order();
    std::vector<Element> dirs;
    for (int j = k; j >= 1; --j) {
        Rational m = mu - f.lambda(j);
        const bool nonneg_int = is_nonnegative_integer(m);
        const long q = nonneg_int ? to_long(m) : -1;
        if (j < k) {
            // S_j.U_{j+1} must vanish at b^0 before dividing by b.
            std::vector<Rational> consts;
            consts.reserve(dirs.size());
            for (const auto& d : dirs) consts.push_back(d.coord(j + 1).coeff(0));
            eliminate_constraint(dirs, consts);
            if (nonneg_int) {
                // Obstruction r_q, visible only below the reliable order.
                std::vector<Rational> obstructions;
                obstructions.reserve(dirs.size());
                for (const auto& d : dirs) {
                    PowerSeries rhs = -shifted(f.connection(j) * d.coord(j + 1), -1);
                    obstructions.push_back(q < rhs.order() ? rhs.coeff(static_cast<int>(q)) : Rational(0));
                }
                eliminate_constraint(dirs, obstructions);
            }
            for (auto& d : dirs) {
                PowerSeries rhs = -shifted(f.connection(j) * d.coord(j + 1), -1);
                if (nonneg_int && q < rhs.order()) {
                    SolutionSpace sol = euler_solve(m, rhs);
                    d.u[static_cast<std::size_t>(j - 1)] = *sol.particular;
                } else {
                    // No visible obstruction or free direction: every visible
                    // coefficient is determined by (n - m).v_n = r_n.
                    std::map<int, Rational> v;
                    for (const auto& [n, rn] : rhs.terms()) v[n] = rn / (Rational(n) - m);
                    d.u[static_cast<std::size_t>(j - 1)] = PowerSeries(std::move(v), rhs.order());
                }
            }
        }
        if (nonneg_int && q < order) {
            Element fresh = zero_element(f);
            fresh.u[static_cast<std::size_t>(j - 1)] = PowerSeries::monomial(1, static_cast<int>(q), order);
            dirs.push_back(std::move(fresh));
        }
    }
    return dirs;
}

inline std::optional<int> lowest_unit_coordinate(const Element& x) {
    for (int j = 1; j <= x.rank(); ++j)
        if (x.coord(j).is_unit()) return j;
    return std::nullopt;
}

} // namespace detail

// Enumerates the rank-1 normal submodules: candidates mu = lambda_j + q for
// q in [0, N-1], cascaded solve of (a - mu.b).x = 0, keeping the solution
// families that contain a member outside b.E.
inline std::vector<Rank1Family> rank1_normal_submodules(const Fresco& f) {
    std::set<Rational> candidates;
    for (int j = 1; j <= f.rank(); ++j)
        for (int q = 0; q < f.order(); ++q) candidates.insert(f.lambda(j) + q);

    std::vector<Rank1Family> out;
    for (const Rational& mu : candidates) {
        std::vector<Element> dirs = detail::rank1_solution_basis(f, mu);
        int pick = -1;
        for (std::size_t d = 0; d < dirs.size(); ++d)
            if (detail::lowest_unit_coordinate(dirs[d])) { pick = static_cast<int>(d); break; }
        if (pick < 0) continue;
        Element gen = dirs[static_cast<std::size_t>(pick)];
        dirs.erase(dirs.begin() + pick);
        gen = (1 / gen.coord(*detail::lowest_unit_coordinate(gen)).coeff(0)) * gen;
        out.push_back(Rank1Family{mu, std::move(gen), std::move(dirs)});
    }
    return out;
}

} // namespace fresco
