#pragma once

#include <gmpxx.h>

#include <string>

#include "fresco/errors.hpp"

namespace fresco {

// Exact rational scalar. mpq_class keeps the canonical reduced form with a
// positive denominator, which is exactly the invariant we need.
using Rational = mpq_class;
using Integer = mpz_class;

inline bool is_integer(const Rational& r) { return r.get_den() == 1; }

inline bool is_nonnegative_integer(const Rational& r) { return is_integer(r) && sgn(r) >= 0; }

inline bool is_positive_integer(const Rational& r) { return is_integer(r) && sgn(r) > 0; }

inline long to_long(const Rational& r) {
    if (!is_integer(r)) throw Error("expected an integer, got " + r.get_str());
    if (!r.get_num().fits_slong_p()) throw Error("integer out of range: " + r.get_str());
    return r.get_num().get_si();
}

inline Integer floor_int(const Rational& r) {
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
    return q;
}

inline Integer ceil_int(const Rational& r) {
    Integer q;
    mpz_cdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
    return q;
}

/// Representative of r mod 1 in the half-open interval (0, 1].
inline Rational class_representative(const Rational& r) {
    Rational rep = r - Rational(floor_int(r));
    if (sgn(rep) == 0) rep = 1;
    return rep;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

/// Parses "p", "-p" or "p/q" with q > 0 after canonicalization.
inline Rational parse_rational(const std::string& s) {
    if (s.empty()) throw ValidationError("rational", "empty rational literal");
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    bool seen_digit = false, seen_slash = false;
    for (; i < s.size(); ++i) {
        if (s[i] == '/') {
            if (seen_slash || !seen_digit) throw ValidationError("rational", "malformed rational '" + s + "'");
            seen_slash = true;
            seen_digit = false;
        } else if (s[i] >= '0' && s[i] <= '9') {
            seen_digit = true;
        } else {
            throw ValidationError("rational", "malformed rational '" + s + "'");
        }
    }
    if (!seen_digit) throw ValidationError("rational", "malformed rational '" + s + "'");
    Rational r;
    if (mpq_set_str(r.get_mpq_t(), s.c_str(), 10) != 0)
        throw ValidationError("rational", "malformed rational '" + s + "'");
    if (sgn(Rational(r.get_den())) == 0) throw ValidationError("rational", "zero denominator in '" + s + "'");
    r.canonicalize();
    return r;
}

} // namespace fresco
