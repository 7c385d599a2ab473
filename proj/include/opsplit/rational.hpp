#pragma once

// Exact rational linear algebra used by the certificate machinery.  Numbers
// are GMP rationals; elimination, rank, rowspace membership, and nullspace
// extraction are all exact, so every certificate below is a proof, not a
// floating-point plausibility check.

#include <gmpxx.h>

#include <cstddef>
#include <string>
#include <vector>

#include "opsplit/common.hpp"

namespace opsplit {

using Rational = mpq_class;
using RatRow = std::vector<Rational>;
using RatMatrix = std::vector<RatRow>;

inline Rational rat(long num, long den = 1) {
    if (den == 0) throw MalformedSystem("rational: zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

// Accepts "p" or "p/q" with optional sign; used by the JSON reader.
inline Rational parse_rational(const std::string& s) {
    if (s.empty()) throw MalformedSystem("rational: empty literal");
    for (char c : s)
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '/'))
            throw MalformedSystem("rational: bad literal '" + s + "'");
    // GMP rejects an explicit leading plus, so strip it before parsing.
    const std::string body = (s.front() == '+') ? s.substr(1) : s;
    if (body.empty()) throw MalformedSystem("rational: bad literal '" + s + "'");
    Rational q;
    if (q.set_str(body, 10) != 0) throw MalformedSystem("rational: bad literal '" + s + "'");
    if (q.get_den() == 0) throw MalformedSystem("rational: zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
}

inline std::string rational_str(const Rational& q) { return q.get_str(); }

inline void check_rect(const RatMatrix& m, const char* where) {
    if (m.empty()) return;
    const std::size_t n = m.front().size();
    for (const auto& row : m)
        if (row.size() != n)
            throw MalformedSystem(std::string(where) + ": ragged rational matrix");
}

// Row echelon rank by exact Gaussian elimination.
inline std::size_t rational_rank(RatMatrix m) {
    check_rect(m, "rational_rank");
    if (m.empty() || m.front().empty()) return 0;
    const std::size_t rows = m.size(), cols = m.front().size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && m[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(m[r], m[piv]);
        for (std::size_t i = r + 1; i < rows; ++i) {
            if (m[i][c] == 0) continue;
            Rational f = m[i][c] / m[r][c];
            for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        ++r;
    }
    return r;
}

// Does c lie in the row space of m?  Exact Farkas-style test:
// rank([m; c]) == rank(m).
inline bool in_rowspace(const RatMatrix& m, const RatRow& c) {
    if (!m.empty() && m.front().size() != c.size())
        throw MalformedSystem("in_rowspace: row width mismatch");
    RatMatrix aug = m;
    aug.push_back(c);
    return rational_rank(aug) == rational_rank(m);
}

// Basis of {v : M v = 0} from the reduced row echelon form; one basis vector
// per free column.
inline RatMatrix nullspace_basis(RatMatrix m, std::size_t cols) {
    check_rect(m, "nullspace_basis");
    for (const auto& row : m)
        if (row.size() != cols) throw MalformedSystem("nullspace_basis: row width mismatch");
    const std::size_t rows = m.size();
    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && m[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(m[r], m[piv]);
        Rational inv = m[r][c];
        for (std::size_t j = c; j < cols; ++j) m[r][j] /= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c] == 0) continue;
            Rational f = m[i][c];
            for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        pivot_col.push_back(c);
        ++r;
    }
    std::vector<bool> is_pivot(cols, false);
    for (std::size_t c : pivot_col) is_pivot[c] = true;
    RatMatrix basis;
    for (std::size_t free = 0; free < cols; ++free) {
        if (is_pivot[free]) continue;
        RatRow v(cols, Rational(0));
        v[free] = 1;
        for (std::size_t i = 0; i < pivot_col.size(); ++i) v[pivot_col[i]] = -m[i][free];
        basis.push_back(std::move(v));
    }
    return basis;
}

inline Rational rat_dot(const RatRow& a, const RatRow& b) {
    if (a.size() != b.size()) throw MalformedSystem("rat_dot: size mismatch");
    Rational s(0);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0 && b[i] != 0) s += a[i] * b[i];
    return s;
}

}  // namespace opsplit
