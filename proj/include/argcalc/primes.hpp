#ifndef ARGCALC_PRIMES_HPP
#define ARGCALC_PRIMES_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "argcalc/formula.hpp"

namespace argcalc {

// Literals pack a variable and a polarity: +(v+1) positive, -(v+1) negative.
using Lit = std::int32_t;

inline Lit make_lit(VarId v, bool positive) {
    Lit body = static_cast<Lit>(v) + 1;
    return positive ? body : -body;
}

inline VarId lit_var(Lit l) { return static_cast<VarId>((l > 0 ? l : -l) - 1); }
inline bool lit_positive(Lit l) { return l > 0; }
inline Lit lit_negated(Lit l) { return -l; }

// Order literals by variable, positive before negative.
inline bool lit_less(Lit a, Lit b) {
    VarId va = lit_var(a), vb = lit_var(b);
    if (va != vb)
        return va < vb;
    return lit_positive(a) && !lit_positive(b);
}

// A sorted set of literals over distinct variables.  Read as a conjunction
// it is a term, as a disjunction a clause; the algorithms below are shared.
using LitSet = std::vector<Lit>;

// Sorts and dedupes; nullopt when a complementary pair shows up (a
// tautological clause or contradictory term).
inline std::optional<LitSet> normalize_litset(LitSet lits) {
    std::sort(lits.begin(), lits.end(), lit_less);
    LitSet out;
    for (Lit l : lits) {
        if (!out.empty() && out.back() == l)
            continue;
        if (!out.empty() && lit_var(out.back()) == lit_var(l))
            return std::nullopt;
        out.push_back(l);
    }
    return out;
}

inline bool litset_subsumes(const LitSet& a, const LitSet& b) {
    if (a.size() > b.size())
        return false;
    std::size_t j = 0;
    for (Lit l : a) {
        while (j < b.size() && lit_less(b[j], l))
            ++j;
        if (j >= b.size() || b[j] != l)
            return false;
        ++j;
    }
    return true;
}

inline bool litset_less(const LitSet& a, const LitSet& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), lit_less);
}

namespace detail {

// Set-of-sets container that keeps only subsumption-minimal members.
class MinimalSets {
public:
    MinimalSets() = default;

    explicit MinimalSets(std::vector<LitSet> sets) {
        for (auto& s : sets)
            insert(std::move(s));
    }

    // Adds s unless something kept already subsumes it; drops anything s
    // subsumes.  Returns true when s was kept.
    bool insert(LitSet s) {
        for (const auto& kept : sets_)
            if (litset_subsumes(kept, s))
                return false;
        std::erase_if(sets_, [&](const LitSet& kept) { return litset_subsumes(s, kept); });
        sets_.push_back(std::move(s));
        return true;
    }

    bool contains_empty() const {
        return sets_.size() == 1 && sets_[0].empty();
    }

    const std::vector<LitSet>& sets() const { return sets_; }

    std::vector<LitSet> take_sorted() {
        std::sort(sets_.begin(), sets_.end(), litset_less);
        return std::move(sets_);
    }

private:
    std::vector<LitSet> sets_;
};

// Pairwise unions of two minimized families, dropping inconsistent results.
// This is the distribution step of clause-form conversion.
inline MinimalSets cross_sets(const std::vector<LitSet>& xs, const std::vector<LitSet>& ys) {
    MinimalSets out;
    for (const auto& x : xs)
        for (const auto& y : ys) {
            LitSet u = x;
            u.insert(u.end(), y.begin(), y.end());
            if (auto n = normalize_litset(std::move(u)))
                out.insert(std::move(*n));
        }
    return out;
}

// Clause-set translation by structural recursion with sharing-aware
// memoization.  `negated` asks for clauses of the node's negation, so
// negation flows down without building new formulas.
class CnfBuilder {
public:
    std::vector<LitSet> clauses(Formula f, bool negated) {
        std::uint64_t key = (static_cast<std::uint64_t>(f.id()) << 1) | (negated ? 1 : 0);
        auto it = memo_.find(key);
        if (it != memo_.end())
            return it->second;
        std::vector<LitSet> out = build(f, negated);
        memo_.emplace(key, out);
        return out;
    }

private:
    static std::vector<LitSet> valid_set() { return {}; }
    static std::vector<LitSet> unsat_set() { return {LitSet{}}; }

    std::vector<LitSet> merge(std::vector<LitSet> a, const std::vector<LitSet>& b) {
        MinimalSets out(std::move(a));
        for (const auto& s : b)
            out.insert(s);
        return out.take_sorted();
    }

    std::vector<LitSet> cross(const std::vector<LitSet>& a, const std::vector<LitSet>& b) {
        return cross_sets(a, b).take_sorted();
    }

    std::vector<LitSet> build(Formula f, bool neg) {
        switch (f.kind()) {
        case Kind::False:
            return neg ? valid_set() : unsat_set();
        case Kind::True:
            return neg ? unsat_set() : valid_set();
        case Kind::Var:
            return {LitSet{make_lit(f.var(), !neg)}};
        case Kind::Not:
            return clauses(f.child(), !neg);
        case Kind::And:
            if (!neg)
                return merge(clauses(f.left(), false), clauses(f.right(), false));
            return cross(clauses(f.left(), true), clauses(f.right(), true));
        case Kind::Or:
            if (!neg)
                return cross(clauses(f.left(), false), clauses(f.right(), false));
            return merge(clauses(f.left(), true), clauses(f.right(), true));
        case Kind::Implies:
            if (!neg)
                return cross(clauses(f.left(), true), clauses(f.right(), false));
            return merge(clauses(f.left(), false), clauses(f.right(), true));
        case Kind::Iff: {
            // a <=> b as (a | !b ... ) via ((a & b) | (!a & !b)), negated
            // form swaps one side's polarity.
            auto pos_pos = merge(clauses(f.left(), false), clauses(f.right(), neg));
            auto neg_neg = merge(clauses(f.left(), true), clauses(f.right(), !neg));
            return cross(pos_pos, neg_neg);
        }
        }
        return unsat_set();
    }

    std::unordered_map<std::uint64_t, std::vector<LitSet>> memo_;
};

inline std::vector<VarId> litsets_vars(const std::vector<LitSet>& sets) {
    std::vector<VarId> vars;
    for (const auto& s : sets)
        for (Lit l : s)
            vars.push_back(lit_var(l));
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

// Resolvent of two sets clashing on v; nullopt when another pair clashes too.
inline std::optional<LitSet> consensus(const LitSet& a, const LitSet& b, VarId v) {
    LitSet u;
    u.reserve(a.size() + b.size() - 2);
    for (Lit l : a)
        if (lit_var(l) != v)
            u.push_back(l);
    for (Lit l : b)
        if (lit_var(l) != v)
            u.push_back(l);
    return normalize_litset(std::move(u));
}

// Iterated consensus, one variable at a time, with absorption.  Starting
// from any equivalent clause (term) family this closes to exactly the prime
// implicates (implicants).
inline std::vector<LitSet> tison_closure(std::vector<LitSet> start) {
    MinimalSets acc(std::move(start));
    for (VarId v : litsets_vars(acc.sets())) {
        std::vector<LitSet> pos, neg;
        for (const auto& s : acc.sets()) {
            if (std::binary_search(s.begin(), s.end(), make_lit(v, true), lit_less))
                pos.push_back(s);
            else if (std::binary_search(s.begin(), s.end(), make_lit(v, false), lit_less))
                neg.push_back(s);
        }
        for (const auto& p : pos)
            for (const auto& n : neg)
                if (auto r = consensus(p, n, v))
                    acc.insert(std::move(*r));
    }
    return acc.take_sorted();
}

// Existential elimination of the given variables from a clause family:
// clauses mentioning v are replaced by all their v-resolvents.
inline std::vector<LitSet> resolve_away(std::vector<LitSet> cnf, std::span<const VarId> order) {
    MinimalSets acc(std::move(cnf));
    for (VarId v : order) {
        std::vector<LitSet> pos, neg;
        MinimalSets rest;
        for (const auto& s : acc.sets()) {
            if (std::binary_search(s.begin(), s.end(), make_lit(v, true), lit_less))
                pos.push_back(s);
            else if (std::binary_search(s.begin(), s.end(), make_lit(v, false), lit_less))
                neg.push_back(s);
            else
                rest.insert(s);
        }
        for (const auto& p : pos)
            for (const auto& n : neg)
                if (auto r = consensus(p, n, v))
                    rest.insert(std::move(*r));
        acc = std::move(rest);
    }
    return acc.take_sorted();
}

inline std::vector<LitSet> complement_each(std::vector<LitSet> sets) {
    for (auto& s : sets) {
        for (Lit& l : s)
            l = lit_negated(l);
        std::sort(s.begin(), s.end(), lit_less);
    }
    return sets;
}

} // namespace detail

// Minimized clause family equivalent to f ({} means valid, {{}} unsatisfiable).
inline std::vector<LitSet> cnf_litsets(Formula f) {
    detail::CnfBuilder b;
    return b.clauses(f, false);
}

// Minimized term family equivalent to f ({} unsatisfiable, {{}} valid).
inline std::vector<LitSet> dnf_litsets(Formula f) {
    detail::CnfBuilder b;
    return detail::MinimalSets(detail::complement_each(b.clauses(f, true))).take_sorted();
}

struct Clause {
    LitSet lits; // read disjunctively
    friend bool operator==(const Clause&, const Clause&) = default;
};

struct Term {
    LitSet lits; // read conjunctively
    friend bool operator==(const Term&, const Term&) = default;
};

// All prime implicates, sorted lexicographically.  Valid formulas give an
// empty family; unsatisfiable ones the single empty clause.
inline std::vector<Clause> prime_implicates(Formula f) {
    std::vector<Clause> out;
    for (auto& s : detail::tison_closure(cnf_litsets(f)))
        out.push_back({std::move(s)});
    return out;
}

// All prime implicants, sorted.  Unsatisfiable formulas give an empty
// family; valid ones the single empty term.
inline std::vector<Term> prime_implicants(Formula f) {
    std::vector<Term> out;
    for (auto& s : detail::tison_closure(dnf_litsets(f)))
        out.push_back({std::move(s)});
    return out;
}

// Keeps only clauses whose variables all have the given sort.
inline std::vector<Clause> restrict_to_sort(const std::vector<Clause>& clauses,
                                            const Context& ctx, Sort sort) {
    std::vector<Clause> out;
    for (const auto& c : clauses) {
        bool ok = true;
        for (Lit l : c.lits)
            if (ctx.var_sort(lit_var(l)) != sort) {
                ok = false;
                break;
            }
        if (ok)
            out.push_back(c);
    }
    return out;
}

inline Formula litset_conjunction(const Context& ctx, const LitSet& lits) {
    Formula acc = ctx.constant(true);
    for (Lit l : lits) {
        Formula x = ctx.variable(lit_var(l));
        acc = ctx.conjunction(acc, lit_positive(l) ? x : ctx.negation(x));
    }
    return acc;
}

inline Formula litset_disjunction(const Context& ctx, const LitSet& lits) {
    Formula acc = ctx.constant(false);
    for (Lit l : lits) {
        Formula x = ctx.variable(lit_var(l));
        acc = ctx.disjunction(acc, lit_positive(l) ? x : ctx.negation(x));
    }
    return acc;
}

inline Formula formula_of(const Context& ctx, const Term& t) {
    return litset_conjunction(ctx, t.lits);
}

inline Formula formula_of(const Context& ctx, const Clause& c) {
    return litset_disjunction(ctx, c.lits);
}

inline Formula formula_of(const Context& ctx, const std::vector<Term>& terms) {
    Formula acc = ctx.constant(false);
    for (const auto& t : terms)
        acc = ctx.disjunction(acc, formula_of(ctx, t));
    return acc;
}

inline Formula formula_of(const Context& ctx, const std::vector<Clause>& clauses) {
    Formula acc = ctx.constant(true);
    for (const auto& c : clauses)
        acc = ctx.conjunction(acc, formula_of(ctx, c));
    return acc;
}

// Canonical form: the disjunction of all prime implicants, terms sorted,
// literals sorted within each term.  Equivalent inputs print identically.
inline Formula blake_canonical(Formula f) {
    return formula_of(*f.context(), prime_implicants(f));
}

inline std::string to_string(const Context& ctx, const LitSet& lits, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < lits.size(); ++i) {
        if (i)
            out += sep;
        if (!lit_positive(lits[i]))
            out += '!';
        out += ctx.var_name(lit_var(lits[i]));
    }
    return out;
}

inline std::string to_string(const Context& ctx, const Term& t) {
    if (t.lits.empty())
        return "true";
    return to_string(ctx, t.lits, " & ");
}

inline std::string to_string(const Context& ctx, const Clause& c) {
    if (c.lits.empty())
        return "false";
    return to_string(ctx, c.lits, " | ");
}

} // namespace argcalc

#endif
