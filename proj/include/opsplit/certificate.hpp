#pragma once

// Linear-algebraic certificates for fixed-point encodings of splitting
// methods.  A scalar-block system collects, with exact rational entries, the
// linear relations that hold between the quantities appearing in one step of
// a method at a fixed point (iterate blocks, resolvent inputs and outputs,
// operator outputs, the T and S read-outs); each scalar column stands for a
// d x d block acting on an arbitrary dimension d.
//
// A claimed consequence row c is implied by the relations M exactly when c
// lies in the row space of M, i.e. rank([M; c]) = rank(M); otherwise any
// nullspace vector of M that c does not annihilate is a concrete
// counterexample assignment.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "opsplit/common.hpp"
#include "opsplit/rational.hpp"
#include "opsplit/rng.hpp"

namespace opsplit {

enum class ColKind { ZInput, ResolventInput, ResolventOutput, TOutput, OpOutput, SOutput };

inline const char* to_string(ColKind k) {
    switch (k) {
        case ColKind::ZInput: return "z_input";
        case ColKind::ResolventInput: return "resolvent_input";
        case ColKind::ResolventOutput: return "resolvent_output";
        case ColKind::TOutput: return "t_output";
        case ColKind::OpOutput: return "op_output";
        default: return "s_output";
    }
}

inline ColKind col_kind_from_string(const std::string& s) {
    if (s == "z_input") return ColKind::ZInput;
    if (s == "resolvent_input") return ColKind::ResolventInput;
    if (s == "resolvent_output") return ColKind::ResolventOutput;
    if (s == "t_output") return ColKind::TOutput;
    if (s == "op_output") return ColKind::OpOutput;
    if (s == "s_output") return ColKind::SOutput;
    throw MalformedSystem("unknown column kind '" + s + "'");
}

// Marks a column as the output of a resolvent of one of the operators
// A, B, C with the given (positive) step.
struct ResolventTag {
    std::size_t x_col = 0;
    char op = 'A';
    Rational step = 1;
};

struct ScalarBlockSystem {
    std::vector<std::string> columns;
    std::vector<ColKind> kinds;
    RatMatrix rows;
    std::vector<ResolventTag> tags;

    std::size_t col(const std::string& label) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == label) return i;
        throw MalformedSystem("no column labeled '" + label + "'");
    }

    void validate() const {
        if (columns.empty()) throw MalformedSystem("system: no columns");
        if (kinds.size() != columns.size())
            throw MalformedSystem("system: kinds and columns differ in length");
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i].empty()) throw MalformedSystem("system: empty column label");
            for (std::size_t j = i + 1; j < columns.size(); ++j)
                if (columns[i] == columns[j])
                    throw MalformedSystem("system: duplicate column label '" + columns[i] + "'");
        }
        for (const auto& row : rows)
            if (row.size() != columns.size())
                throw MalformedSystem("system: row width does not match column count");
        for (const auto& t : tags) {
            if (t.x_col >= columns.size()) throw MalformedSystem("system: tag column out of range");
            if (kinds[t.x_col] != ColKind::ResolventOutput)
                throw MalformedSystem("system: tag on a non-resolvent-output column");
            if (t.op != 'A' && t.op != 'B' && t.op != 'C')
                throw MalformedSystem("system: tag operator must be A, B, or C");
            if (t.step <= 0) throw MalformedSystem("system: tag step must be positive");
        }
    }
};

// Target rows whose membership in the row space is certified.
struct EncodingTargets {
    std::vector<std::pair<std::string, std::string>> consensus;  // equal resolvent outputs
    std::pair<std::string, std::string> solution;                // S column equals an x column
    std::vector<std::string> zero_sum;                           // operator outputs sum to zero
};

struct EncodingReport {
    std::vector<std::pair<std::string, bool>> consensus;
    bool solution_ok = false;
    bool zero_sum_ok = false;
    std::string violated;  // first failing target, empty when all hold
    std::optional<RatRow> counterexample;

    bool all_ok() const {
        if (!solution_ok || !zero_sum_ok) return false;
        for (const auto& [name, ok] : consensus)
            if (!ok) return false;
        return true;
    }
};

namespace detail {

inline RatRow difference_row(const ScalarBlockSystem& sys, const std::string& plus,
                             const std::string& minus) {
    RatRow c(sys.columns.size(), Rational(0));
    c[sys.col(plus)] = 1;
    c[sys.col(minus)] -= 1;
    return c;
}

inline RatRow sum_row(const ScalarBlockSystem& sys, const std::vector<std::string>& labels) {
    RatRow c(sys.columns.size(), Rational(0));
    for (const auto& l : labels) c[sys.col(l)] += 1;
    return c;
}

// Nullspace vector of m that the target row does not annihilate; exists
// precisely when the target is outside the row space.
inline std::optional<RatRow> extract_counterexample(const RatMatrix& m, std::size_t cols,
                                                    const RatRow& target) {
    for (auto& v : nullspace_basis(m, cols)) {
        if (rat_dot(target, v) == 0) continue;
        for (const auto& row : m)
            if (rat_dot(row, v) != 0)
                throw NumericalError("certificate: nullspace vector fails exact recheck");
        return std::move(v);
    }
    return std::nullopt;
}

}  // namespace detail

inline EncodingReport verify_encoding(const ScalarBlockSystem& sys,
                                      const EncodingTargets& targets) {
    sys.validate();
    EncodingReport rep;
    auto check = [&](const RatRow& c, const std::string& name, bool& ok_out) {
        bool ok = in_rowspace(sys.rows, c);
        ok_out = ok;
        if (!ok && rep.violated.empty()) {
            rep.violated = name;
            rep.counterexample = detail::extract_counterexample(sys.rows, sys.columns.size(), c);
            if (!rep.counterexample)
                throw NumericalError("certificate: failing target without a counterexample");
        }
    };
    for (const auto& [xa, xb] : targets.consensus) {
        bool ok = false;
        check(detail::difference_row(sys, xa, xb), xa + "=" + xb, ok);
        rep.consensus.emplace_back(xa + "=" + xb, ok);
    }
    check(detail::difference_row(sys, targets.solution.first, targets.solution.second),
          targets.solution.first + "=" + targets.solution.second, rep.solution_ok);
    check(detail::sum_row(sys, targets.zero_sum), "zero_sum", rep.zero_sum_ok);
    return rep;
}

// ---------------------------------------------------------------------------
// Builders.

// Two-operator family at a fixed point.  Columns follow the step order of
// the method: the iterate z0, the resolvent input/output pairs of A and B,
// the T read-out, the two operator outputs, and the S read-out.  Rows:
//   (1) z1 = z0                      (A's resolvent input)
//   (2) z2 = -t1 z0 - t2 x1          (B's resolvent input)
//   (3) T  = -t3 z0 - t4 x1 - t5 x2  (T read-out)
//   (4) T  = z0                      (fixed point)
//   (5) a Atil = z1 - x1             (A's resolvent relation)
//   (6) b Btil = z2 - x2             (B's resolvent relation)
//   (7) S  = -t6 z0 - t7 x1 - t8 x2  (S read-out)
inline ScalarBlockSystem build_family_system(const Rational& alpha, const Rational& beta,
                                             const std::array<Rational, 8>& t) {
    if (alpha <= 0 || beta <= 0)
        throw MalformedSystem("family system: steps must be positive");
    ScalarBlockSystem sys;
    sys.columns = {"z0", "z1", "x1", "z2", "x2", "T", "Atil", "Btil", "S"};
    sys.kinds = {ColKind::ZInput,          ColKind::ResolventInput, ColKind::ResolventOutput,
                 ColKind::ResolventInput,  ColKind::ResolventOutput, ColKind::TOutput,
                 ColKind::OpOutput,        ColKind::OpOutput,        ColKind::SOutput};
    auto row = [&](std::initializer_list<Rational> vals) { sys.rows.emplace_back(vals); };
    row({-1, 1, 0, 0, 0, 0, 0, 0, 0});
    row({t[0], 0, t[1], 1, 0, 0, 0, 0, 0});
    row({t[2], 0, t[3], 0, t[4], 1, 0, 0, 0});
    row({-1, 0, 0, 0, 0, 1, 0, 0, 0});
    row({0, -1, 1, 0, 0, 0, alpha, 0, 0});
    row({0, 0, 0, -1, 1, 0, 0, beta, 0});
    row({t[5], 0, t[6], 0, t[7], 0, 0, 0, 1});
    sys.tags = {{sys.col("x1"), 'A', alpha}, {sys.col("x2"), 'B', beta}};
    sys.validate();
    return sys;
}

// Coefficients that make the family system encode
//   x1 = J_{aA}(z), x2 = J_{bB}((1+b/a)x1 - (b/a)z),
//   T = z + th (x2 - x1), S = eta x1 + (1 - eta) x2.
inline std::array<Rational, 8> family_step_thetas(const Rational& alpha, const Rational& beta,
                                                  const Rational& theta, const Rational& eta) {
    if (alpha <= 0 || beta <= 0)
        throw MalformedSystem("family system: steps must be positive");
    const Rational r = beta / alpha;
    return {r, -(1 + r), Rational(-1), theta, -theta, Rational(0), -eta, eta - 1};
}

inline EncodingTargets family_targets() {
    EncodingTargets t;
    t.consensus = {{"x1", "x2"}};
    t.solution = {"S", "x1"};
    t.zero_sum = {"Atil", "Btil"};
    return t;
}

// Minimal-lifting three-operator method at a fixed point (two iterate
// blocks).  Rows: three resolvent relations, two T read-outs, the averaged
// S read-out, and both fixed-point identities.
inline ScalarBlockSystem build_ryu3_system(const Rational& alpha, const Rational& theta) {
    if (alpha <= 0) throw MalformedSystem("ryu3 system: alpha must be positive");
    if (theta <= 0) throw MalformedSystem("ryu3 system: theta must be positive");
    ScalarBlockSystem sys;
    sys.columns = {"z1", "z2", "x1", "x2", "x3", "T1", "T2", "Atil", "Btil", "Ctil", "S"};
    sys.kinds = {ColKind::ZInput,           ColKind::ZInput,          ColKind::ResolventOutput,
                 ColKind::ResolventOutput,  ColKind::ResolventOutput, ColKind::TOutput,
                 ColKind::TOutput,          ColKind::OpOutput,        ColKind::OpOutput,
                 ColKind::OpOutput,         ColKind::SOutput};
    auto row = [&](std::initializer_list<Rational> vals) { sys.rows.emplace_back(vals); };
    const Rational third(1, 3);
    row({-1, 0, 1, 0, 0, 0, 0, alpha, 0, 0, 0});           // x1 + a Atil = z1
    row({0, -1, -1, 1, 0, 0, 0, 0, alpha, 0, 0});          // x2 + a Btil = x1 + z2
    row({1, 1, -1, -1, 1, 0, 0, 0, 0, alpha, 0});          // x3 + a Ctil = x1 - z1 + x2 - z2
    row({-1, 0, theta, 0, -theta, 1, 0, 0, 0, 0, 0});      // T1 = z1 + th (x3 - x1)
    row({0, -1, 0, theta, -theta, 0, 1, 0, 0, 0, 0});      // T2 = z2 + th (x3 - x2)
    row({0, 0, -third, -third, -third, 0, 0, 0, 0, 0, 1}); // S = (x1 + x2 + x3) / 3
    row({-1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0});               // T1 = z1
    row({0, -1, 0, 0, 0, 0, 1, 0, 0, 0, 0});               // T2 = z2
    sys.tags = {{sys.col("x1"), 'A', alpha},
                {sys.col("x2"), 'B', alpha},
                {sys.col("x3"), 'C', alpha}};
    sys.validate();
    return sys;
}

inline EncodingTargets ryu3_targets() {
    EncodingTargets t;
    t.consensus = {{"x1", "x2"}, {"x2", "x3"}};
    t.solution = {"S", "x1"};
    t.zero_sum = {"Atil", "Btil", "Ctil"};
    return t;
}

// PPXA with three blocks at a fixed point.
inline ScalarBlockSystem build_ppxa_system(const Rational& gamma,
                                           const std::array<Rational, 3>& omega,
                                           const Rational& theta) {
    if (gamma <= 0) throw MalformedSystem("ppxa system: gamma must be positive");
    if (omega[0] + omega[1] + omega[2] != 1)
        throw MalformedSystem("ppxa system: weights must sum to one exactly");
    for (const auto& w : omega)
        if (w <= 0) throw MalformedSystem("ppxa system: weights must be positive");
    if (theta <= 0 || theta >= 2) throw MalformedSystem("ppxa system: theta must lie in (0,2)");
    ScalarBlockSystem sys;
    sys.columns = {"zA", "zB", "zC", "xA", "xB", "xC", "TA", "TB", "TC",
                   "Atil", "Btil", "Ctil", "S"};
    sys.kinds = {ColKind::ZInput,          ColKind::ZInput,          ColKind::ZInput,
                 ColKind::ResolventOutput, ColKind::ResolventOutput, ColKind::ResolventOutput,
                 ColKind::TOutput,         ColKind::TOutput,         ColKind::TOutput,
                 ColKind::OpOutput,        ColKind::OpOutput,        ColKind::OpOutput,
                 ColKind::SOutput};
    const std::size_t n = sys.columns.size();
    // Resolvent relations x_i + (gamma / w_i) Op_i = z_i.
    for (std::size_t i = 0; i < 3; ++i) {
        RatRow r(n, Rational(0));
        r[i] = -1;
        r[3 + i] = 1;
        r[9 + i] = gamma / omega[i];
        sys.rows.push_back(std::move(r));
    }
    // T_i = z_i + theta (2 xbar - zbar - x_i).
    for (std::size_t i = 0; i < 3; ++i) {
        RatRow r(n, Rational(0));
        for (std::size_t j = 0; j < 3; ++j) {
            r[j] += theta * omega[j];           // + theta zbar
            r[3 + j] -= 2 * theta * omega[j];   // - 2 theta xbar
        }
        r[i] -= 1;          // - z_i
        r[3 + i] += theta;  // + theta x_i
        r[6 + i] = 1;       // + T_i
        sys.rows.push_back(std::move(r));
    }
    // S = xA.
    {
        RatRow r(n, Rational(0));
        r[3] = -1;
        r[12] = 1;
        sys.rows.push_back(std::move(r));
    }
    // Fixed-point identities T_i = z_i.
    for (std::size_t i = 0; i < 3; ++i) {
        RatRow r(n, Rational(0));
        r[i] = -1;
        r[6 + i] = 1;
        sys.rows.push_back(std::move(r));
    }
    sys.tags = {{sys.col("xA"), 'A', gamma / omega[0]},
                {sys.col("xB"), 'B', gamma / omega[1]},
                {sys.col("xC"), 'C', gamma / omega[2]}};
    sys.validate();
    return sys;
}

inline EncodingTargets ppxa_targets() {
    EncodingTargets t;
    t.consensus = {{"xA", "xB"}, {"xB", "xC"}};
    t.solution = {"S", "xA"};
    t.zero_sum = {"Atil", "Btil", "Ctil"};
    return t;
}

// ---------------------------------------------------------------------------
// Impossibility probe: does a candidate system prove consensus across all
// three operators?  For unlifted candidates (one iterate column, one T
// read-out) it also reports the rank of the block [m; N], where m is the T
// read-out row with T eliminated through the fixed-point row and N holds the
// within-operator consensus rows; proving full consensus would need that
// rank to reach one less than the number of resolvents.

struct ProbeReport {
    bool implies_ab = false;
    bool implies_bc = false;
    bool within_consensus_added = true;
    std::size_t resolvent_count = 0;
    std::size_t needed = 0;
    bool no_lifting_shape = false;
    std::optional<std::size_t> rank_mn;

    bool both() const { return implies_ab && implies_bc; }
};

inline ProbeReport impossibility_probe(const ScalarBlockSystem& sys,
                                       bool add_within_consensus = true) {
    sys.validate();
    std::map<char, std::vector<std::size_t>> groups;
    for (const auto& t : sys.tags) groups[t.op].push_back(t.x_col);
    for (char op : {'A', 'B', 'C'})
        if (groups[op].empty())
            throw MalformedSystem(std::string("probe: no resolvent tagged for operator ") + op);

    ProbeReport rep;
    rep.within_consensus_added = add_within_consensus;
    rep.resolvent_count = sys.tags.size();
    rep.needed = rep.resolvent_count - 1;

    const std::size_t n = sys.columns.size();
    RatMatrix within;  // x_{op,k} = x_{op,0} rows
    for (auto& [op, cols] : groups)
        for (std::size_t k = 1; k < cols.size(); ++k) {
            RatRow r(n, Rational(0));
            r[cols[k]] = 1;
            r[cols[0]] -= 1;
            within.push_back(std::move(r));
        }

    RatMatrix base = sys.rows;
    if (add_within_consensus)
        for (const auto& r : within) base.push_back(r);

    auto cross = [&](char op1, char op2) {
        RatRow c(n, Rational(0));
        c[groups[op1].front()] = 1;
        c[groups[op2].front()] -= 1;
        return c;
    };
    rep.implies_ab = in_rowspace(base, cross('A', 'B'));
    rep.implies_bc = in_rowspace(base, cross('B', 'C'));

    // Codimension accounting for the unlifted shape.
    std::vector<std::size_t> z_cols, t_cols;
    for (std::size_t i = 0; i < n; ++i) {
        if (sys.kinds[i] == ColKind::ZInput) z_cols.push_back(i);
        if (sys.kinds[i] == ColKind::TOutput) t_cols.push_back(i);
    }
    if (z_cols.size() == 1 && t_cols.size() == 1) {
        rep.no_lifting_shape = true;
        const std::size_t zc = z_cols[0], tc = t_cols[0];
        std::optional<std::size_t> fp_row, tdef_row;
        bool shape_ok = true;
        for (std::size_t i = 0; i < sys.rows.size(); ++i) {
            if (sys.rows[i][tc] == 0) continue;
            bool is_fp = sys.rows[i][zc] == -sys.rows[i][tc];
            if (is_fp)
                for (std::size_t j = 0; j < n && is_fp; ++j)
                    if (j != zc && j != tc && sys.rows[i][j] != 0) is_fp = false;
            if (is_fp && !fp_row)
                fp_row = i;
            else if (!tdef_row)
                tdef_row = i;
            else
                shape_ok = false;
        }
        if (shape_ok && fp_row && tdef_row) {
            RatRow m = sys.rows[*tdef_row];
            const Rational f = m[tc] / sys.rows[*fp_row][tc];
            for (std::size_t j = 0; j < n; ++j) m[j] -= f * sys.rows[*fp_row][j];
            RatMatrix mn;
            mn.push_back(std::move(m));
            for (const auto& r : within) mn.push_back(r);
            rep.rank_mn = rational_rank(mn);
        }
    }
    return rep;
}

// Random unlifted three-operator candidate in eliminated form: resolvent
// inputs are arbitrary rational combinations of the iterate and earlier
// resolvent outputs, the T read-out mixes everything, and the fixed-point
// row closes the loop.  per_op resolvents are tagged to each operator.
inline ScalarBlockSystem random_nolifting_candidate(std::size_t per_op, SplitMix64& rng) {
    if (per_op == 0 || per_op > 4)
        throw MalformedSystem("random candidate: per_op must be between 1 and 4");
    const std::size_t nres = 3 * per_op;
    auto coeff = [&rng]() {
        static const long nums[] = {0, 0, 0, 1, -1, 2, -2, 3, -3, 1, -1, 5, -5, 7, 1, -2};
        static const long dens[] = {1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 1, 1, 3, 3, 3};
        const std::size_t i = std::size_t(rng.below(16));
        return rat(nums[i], dens[i]);
    };

    ScalarBlockSystem sys;
    sys.columns.push_back("z0");
    sys.kinds.push_back(ColKind::ZInput);
    for (std::size_t i = 1; i <= nres; ++i) {
        sys.columns.push_back("z" + std::to_string(i));
        sys.kinds.push_back(ColKind::ResolventInput);
        sys.columns.push_back("x" + std::to_string(i));
        sys.kinds.push_back(ColKind::ResolventOutput);
    }
    sys.columns.push_back("T");
    sys.kinds.push_back(ColKind::TOutput);
    const std::size_t n = sys.columns.size();
    auto zcol = [](std::size_t i) { return 2 * i - 1; };
    auto xcol = [](std::size_t i) { return 2 * i; };

    // z_i is a combination of z0 and x_j for j < i.
    for (std::size_t i = 1; i <= nres; ++i) {
        RatRow r(n, Rational(0));
        r[zcol(i)] = 1;
        r[0] = coeff();
        for (std::size_t j = 1; j < i; ++j) r[xcol(j)] = coeff();
        sys.rows.push_back(std::move(r));
    }
    // T mixes z0 and all resolvent outputs.
    {
        RatRow r(n, Rational(0));
        r[n - 1] = 1;
        r[0] = coeff();
        for (std::size_t j = 1; j <= nres; ++j) r[xcol(j)] = coeff();
        sys.rows.push_back(std::move(r));
    }
    // Fixed point: T = z0.
    {
        RatRow r(n, Rational(0));
        r[0] = -1;
        r[n - 1] = 1;
        sys.rows.push_back(std::move(r));
    }

    // Tag resolvents to operators round-robin with a random step from a
    // small positive pool (the step does not enter the linear relations).
    static const char ops[3] = {'A', 'B', 'C'};
    for (std::size_t i = 1; i <= nres; ++i) {
        Rational step = rat(1 + long(rng.below(4)), 1 + long(rng.below(3)));
        sys.tags.push_back({xcol(i), ops[(i - 1) % 3], step});
    }
    sys.validate();
    return sys;
}

// ---------------------------------------------------------------------------
// JSON round-trip and report formatting.

inline nlohmann::json system_to_json(const ScalarBlockSystem& sys) {
    sys.validate();
    nlohmann::json j;
    j["columns"] = sys.columns;
    std::vector<std::string> kinds;
    for (ColKind k : sys.kinds) kinds.emplace_back(to_string(k));
    j["kinds"] = kinds;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : sys.rows) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& q : row) r.push_back(rational_str(q));
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    nlohmann::json tags = nlohmann::json::array();
    for (const auto& t : sys.tags)
        tags.push_back({{"x", sys.columns[t.x_col]},
                        {"op", std::string(1, t.op)},
                        {"step", rational_str(t.step)}});
    j["resolvents"] = std::move(tags);
    return j;
}

inline ScalarBlockSystem system_from_json(const nlohmann::json& j) {
    ScalarBlockSystem sys;
    try {
        sys.columns = j.at("columns").get<std::vector<std::string>>();
        for (const auto& k : j.at("kinds")) sys.kinds.push_back(col_kind_from_string(k));
        for (const auto& row : j.at("rows")) {
            RatRow r;
            for (const auto& cell : row) r.push_back(parse_rational(cell.get<std::string>()));
            sys.rows.push_back(std::move(r));
        }
        for (const auto& t : j.at("resolvents")) {
            ResolventTag tag;
            tag.x_col = 0;  // resolved below once columns exist
            const std::string x = t.at("x").get<std::string>();
            const std::string op = t.at("op").get<std::string>();
            if (op.size() != 1) throw MalformedSystem("system JSON: bad operator tag '" + op + "'");
            tag.op = op[0];
            tag.step = parse_rational(t.at("step").get<std::string>());
            tag.x_col = sys.col(x);
            sys.tags.push_back(tag);
        }
    } catch (const nlohmann::json::exception& e) {
        throw MalformedSystem(std::string("system JSON: ") + e.what());
    }
    sys.validate();
    return sys;
}

inline std::optional<EncodingTargets> targets_from_json(const nlohmann::json& j) {
    if (!j.contains("targets")) return std::nullopt;
    const auto& t = j.at("targets");
    EncodingTargets out;
    try {
        for (const auto& pair : t.at("consensus"))
            out.consensus.emplace_back(pair.at(0).get<std::string>(),
                                       pair.at(1).get<std::string>());
        out.solution = {t.at("solution").at(0).get<std::string>(),
                        t.at("solution").at(1).get<std::string>()};
        out.zero_sum = t.at("zero_sum").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw MalformedSystem(std::string("targets JSON: ") + e.what());
    }
    return out;
}

inline nlohmann::json report_to_json(const EncodingReport& rep) {
    nlohmann::json j;
    nlohmann::json cons = nlohmann::json::object();
    for (const auto& [name, ok] : rep.consensus) cons[name] = ok;
    j["consensus"] = std::move(cons);
    j["solution"] = rep.solution_ok;
    j["zero_sum"] = rep.zero_sum_ok;
    j["all_ok"] = rep.all_ok();
    if (rep.counterexample) {
        nlohmann::json v = nlohmann::json::array();
        for (const auto& q : *rep.counterexample) v.push_back(rational_str(q));
        j["violated"] = rep.violated;
        j["counterexample"] = std::move(v);
    }
    return j;
}

inline std::string report_to_text(const EncodingReport& rep,
                                  const ScalarBlockSystem& sys) {
    std::ostringstream os;
    os << "encoding certificate\n";
    for (const auto& [name, ok] : rep.consensus)
        os << "  consensus " << name << ": " << (ok ? "implied" : "NOT implied") << '\n';
    os << "  solution map: " << (rep.solution_ok ? "implied" : "NOT implied") << '\n';
    os << "  zero-sum:     " << (rep.zero_sum_ok ? "implied" : "NOT implied") << '\n';
    if (rep.counterexample) {
        os << "  violated target: " << rep.violated << "\n  counterexample:";
        for (std::size_t i = 0; i < rep.counterexample->size(); ++i)
            if ((*rep.counterexample)[i] != 0)
                os << ' ' << sys.columns[i] << '=' << rational_str((*rep.counterexample)[i]);
        os << '\n';
    }
    os << "  verdict: " << (rep.all_ok() ? "PASS" : "FAIL") << '\n';
    return os.str();
}

inline nlohmann::json probe_to_json(const ProbeReport& rep) {
    nlohmann::json j;
    j["implies_ab"] = rep.implies_ab;
    j["implies_bc"] = rep.implies_bc;
    j["both"] = rep.both();
    j["within_consensus_added"] = rep.within_consensus_added;
    j["resolvent_count"] = rep.resolvent_count;
    j["needed"] = rep.needed;
    j["no_lifting_shape"] = rep.no_lifting_shape;
    if (rep.rank_mn) j["rank_mn"] = *rep.rank_mn;
    return j;
}

inline std::string probe_to_text(const ProbeReport& rep) {
    std::ostringstream os;
    os << "impossibility probe\n"
       << "  resolvents: " << rep.resolvent_count
       << " (consensus needs codimension " << rep.needed << ")\n"
       << "  cross-consensus A=B: " << (rep.implies_ab ? "implied" : "not implied") << '\n'
       << "  cross-consensus B=C: " << (rep.implies_bc ? "implied" : "not implied") << '\n'
       << "  both implications:   " << (rep.both() ? "yes" : "no") << '\n';
    if (rep.no_lifting_shape && rep.rank_mn)
        os << "  unlifted shape: rank[m;N] = " << *rep.rank_mn << " < " << rep.needed
           << " required\n";
    return os.str();
}

}  // namespace opsplit
