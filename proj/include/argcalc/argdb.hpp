#ifndef ARGCALC_ARGDB_HPP
#define ARGCALC_ARGDB_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "argcalc/errors.hpp"
#include "argcalc/formula.hpp"
#include "argcalc/parser.hpp"
#include "argcalc/primes.hpp"
#include "argcalc/sat.hpp"

namespace argcalc {

// One database sentence alpha :- phi, denoting the implication alpha => phi
// with alpha over assumption variables and phi over domain variables.
struct Sentence {
    Formula antecedent;
    Formula consequent;
};

namespace detail {

// Flattened postorder form of a formula for fast repeated evaluation.
struct FlatFormula {
    struct Op {
        Kind kind;
        std::uint32_t a;
        std::uint32_t b;
        std::uint32_t slot; // Kind::Var only
    };
    std::vector<Op> ops;

    static FlatFormula compile(Formula f, const std::unordered_map<VarId, std::uint32_t>& slots) {
        FlatFormula out;
        std::unordered_map<std::uint32_t, std::uint32_t> index;
        std::vector<std::pair<Formula, bool>> stack{{f, false}};
        while (!stack.empty()) {
            auto [g, expanded] = stack.back();
            stack.pop_back();
            if (index.count(g.id()))
                continue;
            Kind k = g.kind();
            bool leaf = (k == Kind::False || k == Kind::True || k == Kind::Var);
            if (!leaf && !expanded) {
                stack.push_back({g, true});
                stack.push_back({g.left(), false});
                if (k != Kind::Not)
                    stack.push_back({g.right(), false});
                continue;
            }
            Op op{};
            op.kind = k;
            if (k == Kind::Var)
                op.slot = slots.at(g.var());
            else if (!leaf) {
                op.a = index.at(g.left().id());
                op.b = (k == Kind::Not) ? op.a : index.at(g.right().id());
            }
            index.emplace(g.id(), static_cast<std::uint32_t>(out.ops.size()));
            out.ops.push_back(op);
        }
        return out;
    }

    bool eval(const std::vector<char>& slot_values, std::vector<char>& scratch) const {
        scratch.resize(ops.size());
        for (std::size_t i = 0; i < ops.size(); ++i) {
            const Op& op = ops[i];
            char v = 0;
            switch (op.kind) {
            case Kind::False: v = 0; break;
            case Kind::True: v = 1; break;
            case Kind::Var: v = slot_values[op.slot]; break;
            case Kind::Not: v = !scratch[op.a]; break;
            case Kind::And: v = scratch[op.a] && scratch[op.b]; break;
            case Kind::Or: v = scratch[op.a] || scratch[op.b]; break;
            case Kind::Implies: v = !scratch[op.a] || scratch[op.b]; break;
            case Kind::Iff: v = scratch[op.a] == scratch[op.b]; break;
            }
            scratch[i] = v;
        }
        return ops.empty() ? false : scratch.back() != 0;
    }
};

// Model table for the enumeration oracle: one bitmap of satisfying
// domain-assignments per assumption-assignment.
struct OracleTable {
    std::vector<VarId> avars;
    std::vector<VarId> lvars;
    std::size_t lwords = 0;
    std::vector<std::uint64_t> sat; // [amask * lwords + word]

    bool bit(std::uint32_t amask, std::uint32_t lmask) const {
        return (sat[static_cast<std::size_t>(amask) * lwords + lmask / 64] >>
                (lmask % 64)) & 1;
    }
};

} // namespace detail

// An immutable argument database over a shared vocabulary.  The domain
// (L) and assumption (A) languages are the context's sort partition.
class ArgumentDatabase {
public:
    ArgumentDatabase(std::shared_ptr<Context> ctx, std::vector<Sentence> sentences,
                     std::vector<VarId> elimination_order = {})
        : ctx_(std::move(ctx)), sentences_(std::move(sentences)),
          caches_(std::make_shared<Caches>()) {
        for (std::size_t i = 0; i < sentences_.size(); ++i) {
            check_sorted(sentences_[i].antecedent, Sort::assumption, i);
            check_sorted(sentences_[i].consequent, Sort::domain, i);
        }
        std::vector<VarId> domain = ctx_->vars_of_sort(Sort::domain);
        if (elimination_order.empty()) {
            elimination_order_ = std::move(domain);
        } else {
            std::vector<VarId> a = elimination_order, b = domain;
            std::sort(a.begin(), a.end());
            if (a != b)
                throw Error("elimination order must permute the domain variables");
            elimination_order_ = std::move(elimination_order);
        }
    }

    const Context& ctx() const { return *ctx_; }
    const std::shared_ptr<Context>& ctx_ptr() const { return ctx_; }
    const std::vector<Sentence>& sentences() const { return sentences_; }
    const std::vector<VarId>& elimination_order() const { return elimination_order_; }

    std::vector<VarId> domain_vars() const { return ctx_->vars_of_sort(Sort::domain); }
    std::vector<VarId> assumption_vars() const { return ctx_->vars_of_sort(Sort::assumption); }

    // Conjunction of the sentence implications.
    Formula delta_star() const {
        std::lock_guard<std::mutex> lock(caches_->mu);
        if (!caches_->delta_star) {
            Formula acc = ctx_->constant(true);
            for (const auto& s : sentences_)
                acc = ctx_->conjunction(acc, ctx_->implication(s.antecedent, s.consequent));
            caches_->delta_star = acc;
        }
        return *caches_->delta_star;
    }

    // Minimized clause form of delta_star.
    std::vector<LitSet> delta_star_clauses() const {
        std::lock_guard<std::mutex> lock(caches_->mu);
        if (!caches_->delta_cnf) {
            detail::CnfBuilder b;
            detail::MinimalSets acc;
            for (const auto& s : sentences_) {
                Formula imp = ctx_->implication(s.antecedent, s.consequent);
                for (auto& c : b.clauses(imp, false))
                    acc.insert(std::move(c));
            }
            caches_->delta_cnf = acc.take_sorted();
        }
        return *caches_->delta_cnf;
    }

private:
    void check_sorted(Formula f, Sort sort, std::size_t line) const {
        if (f.context() != ctx_.get())
            throw Error("sentence formula from a different context");
        for (VarId v : variables_of(f))
            if (ctx_->var_sort(v) != sort)
                throw SortError("sentence " + std::to_string(line + 1) + ": variable '" +
                                ctx_->var_name(v) + "' has the wrong language");
    }

    struct Caches {
        std::mutex mu;
        std::optional<Formula> delta_star;
        std::optional<std::vector<LitSet>> delta_cnf;
        std::unordered_map<std::uint32_t, Formula> argument_memo;
        std::unique_ptr<detail::OracleTable> oracle;
    };

    std::shared_ptr<Context> ctx_;
    std::vector<Sentence> sentences_;
    std::vector<VarId> elimination_order_;
    std::shared_ptr<Caches> caches_;

    friend Formula argument(const ArgumentDatabase&, Formula);
    friend Formula argument_oracle(const ArgumentDatabase&, Formula);
};

struct ValidationReport {
    bool ok = true;
    std::string message;
    std::vector<std::pair<VarId, bool>> witness; // assumption assignment
};

// A database is admissible when its assumptions never force an
// unsatisfiable domain sentence: projecting delta_star onto the assumption
// language by resolving away every domain variable must leave nothing.
inline ValidationReport validate_database(const ArgumentDatabase& db) {
    auto projected = detail::resolve_away(db.delta_star_clauses(), db.elimination_order());
    if (projected.empty())
        return {};
    ValidationReport report;
    report.ok = false;
    const LitSet& clause = projected.front();
    std::string shown;
    for (Lit l : clause) {
        report.witness.emplace_back(lit_var(l), !lit_positive(l));
        if (!shown.empty())
            shown += ", ";
        shown += db.ctx().var_name(lit_var(l));
        shown += lit_positive(l) ? " = F" : " = T";
    }
    if (clause.empty())
        shown = "the empty assignment";
    report.message = "database entails an unsatisfiable domain sentence under " + shown;
    return report;
}

namespace detail {

inline void check_domain_formula(const ArgumentDatabase& db, Formula phi, const char* what) {
    if (phi.context() != &db.ctx())
        throw Error(std::string(what) + ": formula from a different context");
    for (VarId v : variables_of(phi))
        if (db.ctx().var_sort(v) != Sort::domain)
            throw SortError(std::string(what) + ": variable '" + db.ctx().var_name(v) +
                            "' is not a domain variable");
}

} // namespace detail

// The weakest assumption sentence that together with the database entails
// phi.  Computed clausally: resolve every domain variable out of
// delta_star & !phi, then negate; this is the universal forgetting of the
// domain language from (delta_star => phi).  Returned in Blake canonical
// form (sorted disjunction of all prime implicants).
inline Formula argument(const ArgumentDatabase& db, Formula phi) {
    detail::check_domain_formula(db, phi, "argument");
    {
        std::lock_guard<std::mutex> lock(db.caches_->mu);
        auto it = db.caches_->argument_memo.find(phi.id());
        if (it != db.caches_->argument_memo.end())
            return it->second;
    }
    detail::MinimalSets acc(db.delta_star_clauses());
    detail::CnfBuilder builder;
    for (auto& c : builder.clauses(phi, true))
        acc.insert(std::move(c));
    auto projected = detail::resolve_away(acc.take_sorted(), db.elimination_order());
    auto implicants = detail::tison_closure(detail::complement_each(std::move(projected)));
    Formula out = db.ctx().constant(false);
    for (const auto& t : implicants)
        out = db.ctx().disjunction(out, litset_conjunction(db.ctx(), t));
    std::lock_guard<std::mutex> lock(db.caches_->mu);
    db.caches_->argument_memo.emplace(phi.id(), out);
    return out;
}

// Brute-force reference for argument(): enumerate every assumption
// assignment and keep those whose induced domain theory entails phi.
// Independent of the clausal path; used to cross-check it.
inline Formula argument_oracle(const ArgumentDatabase& db, Formula phi) {
    detail::check_domain_formula(db, phi, "argument_oracle");
    Formula dstar = db.delta_star();
    std::lock_guard<std::mutex> lock(db.caches_->mu);
    auto& table_ptr = db.caches_->oracle;
    if (!table_ptr) {
        auto table = std::make_unique<detail::OracleTable>();
        table->avars = db.assumption_vars();
        table->lvars = db.domain_vars();
        if (table->avars.size() + table->lvars.size() > 24)
            throw SizeGuardError("argument_oracle: more than 24 variables");
        std::unordered_map<VarId, std::uint32_t> slots;
        for (std::size_t i = 0; i < table->avars.size(); ++i)
            slots.emplace(table->avars[i], static_cast<std::uint32_t>(i));
        for (std::size_t i = 0; i < table->lvars.size(); ++i)
            slots.emplace(table->lvars[i],
                          static_cast<std::uint32_t>(table->avars.size() + i));
        auto flat = detail::FlatFormula::compile(dstar, slots);
        std::size_t abits = table->avars.size(), lbits = table->lvars.size();
        table->lwords = ((std::size_t{1} << lbits) + 63) / 64;
        table->sat.assign((std::size_t{1} << abits) * table->lwords, 0);
        std::vector<char> values(abits + lbits, 0);
        std::vector<char> scratch;
        for (std::uint64_t amask = 0; amask < (std::uint64_t{1} << abits); ++amask) {
            for (std::size_t i = 0; i < abits; ++i)
                values[i] = (amask >> i) & 1;
            for (std::uint64_t lmask = 0; lmask < (std::uint64_t{1} << lbits); ++lmask) {
                for (std::size_t i = 0; i < lbits; ++i)
                    values[abits + i] = (lmask >> i) & 1;
                if (flat.eval(values, scratch))
                    table->sat[amask * table->lwords + lmask / 64] |=
                        std::uint64_t{1} << (lmask % 64);
            }
        }
        table_ptr = std::move(table);
    }
    const detail::OracleTable& table = *table_ptr;
    std::size_t abits = table.avars.size(), lbits = table.lvars.size();
    std::unordered_map<VarId, std::uint32_t> slots;
    for (std::size_t i = 0; i < abits; ++i)
        slots.emplace(table.avars[i], static_cast<std::uint32_t>(i));
    for (std::size_t i = 0; i < lbits; ++i)
        slots.emplace(table.lvars[i], static_cast<std::uint32_t>(abits + i));
    auto flat_phi = detail::FlatFormula::compile(phi, slots);
    std::vector<char> values(abits + lbits, 0);
    std::vector<char> scratch;
    std::vector<Formula> terms;
    for (std::uint64_t amask = 0; amask < (std::uint64_t{1} << abits); ++amask) {
        for (std::size_t i = 0; i < abits; ++i)
            values[i] = (amask >> i) & 1;
        bool all_models_satisfy = true;
        for (std::uint64_t lmask = 0; lmask < (std::uint64_t{1} << lbits); ++lmask) {
            if (!table.bit(static_cast<std::uint32_t>(amask),
                           static_cast<std::uint32_t>(lmask)))
                continue;
            for (std::size_t i = 0; i < lbits; ++i)
                values[abits + i] = (lmask >> i) & 1;
            if (!flat_phi.eval(values, scratch)) {
                all_models_satisfy = false;
                break;
            }
        }
        if (!all_models_satisfy)
            continue;
        Formula term = db.ctx().constant(true);
        for (std::size_t i = 0; i < abits; ++i) {
            Formula x = db.ctx().variable(table.avars[i]);
            term = db.ctx().conjunction(term, ((amask >> i) & 1) ? x : db.ctx().negation(x));
        }
        terms.push_back(term);
    }
    return db.ctx().disjunction_balanced(terms);
}

// Argument for psi under the condition phi: an assumption state qualifies
// when it makes phi entail psi without refuting phi outright.
inline Formula conditional_argument(const ArgumentDatabase& db, Formula psi, Formula phi) {
    const Context& ctx = db.ctx();
    Formula upper = argument(db, ctx.implication(phi, psi));
    Formula refute = argument(db, ctx.negation(phi));
    return blake_canonical(ctx.conjunction(upper, ctx.negation(refute)));
}

// alpha qualifies when it sits between the conditional argument and the
// unconditional argument for phi => psi.
inline bool is_sufficient_argument(const ArgumentDatabase& db, Formula alpha,
                                   Formula psi, Formula phi) {
    if (alpha.context() != &db.ctx())
        throw Error("is_sufficient_argument: formula from a different context");
    for (VarId v : variables_of(alpha))
        if (db.ctx().var_sort(v) != Sort::assumption)
            throw SortError("is_sufficient_argument: alpha must be an assumption formula");
    return entails(conditional_argument(db, psi, phi), alpha) &&
           entails(alpha, argument(db, db.ctx().implication(phi, psi)));
}

// Assumption states under which phi supports psi: phi entails psi, phi is
// not refuted, and psi is not already established without phi.
inline Formula positive_influence(const ArgumentDatabase& db, Formula phi, Formula psi) {
    const Context& ctx = db.ctx();
    Formula f = ctx.conjunction(
        ctx.conjunction(argument(db, ctx.implication(phi, psi)),
                        ctx.negation(argument(db, ctx.negation(phi)))),
        ctx.negation(argument(db, psi)));
    return blake_canonical(f);
}

// Assumption states arguing for psi together with the falsity of phi.
inline Formula negative_influence(const ArgumentDatabase& db, Formula phi, Formula psi) {
    const Context& ctx = db.ctx();
    return argument(db, ctx.conjunction(psi, ctx.negation(phi)));
}

struct IndependenceQuery {
    std::vector<VarId> i;
    std::vector<VarId> k; // empty for the unconditional form
    std::vector<VarId> j;
    bool plus_flavor = true;
};

struct IndependenceVerdict {
    bool independent = true;
    // populated on failure: the instantiation that breaks the entailment
    Term i_term;
    Term k_term;
    Term j_term;
};

namespace detail {

inline void check_query_sets(const ArgumentDatabase& db, const IndependenceQuery& q) {
    auto check_set = [&](const std::vector<VarId>& vars, const char* name, bool allow_empty) {
        if (vars.empty() && !allow_empty)
            throw Error(std::string("independence: set ") + name + " must be nonempty");
        for (VarId v : vars) {
            if (v >= db.ctx().var_count())
                throw Error("independence: unknown variable");
            if (db.ctx().var_sort(v) != Sort::domain)
                throw SortError(std::string("independence: '") + db.ctx().var_name(v) +
                                "' is not a domain variable");
        }
    };
    check_set(q.i, "I", false);
    check_set(q.k, "K", true);
    check_set(q.j, "J", false);
    std::vector<VarId> all;
    all.insert(all.end(), q.i.begin(), q.i.end());
    all.insert(all.end(), q.k.begin(), q.k.end());
    all.insert(all.end(), q.j.begin(), q.j.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw Error("independence: I, K, J must be pairwise disjoint");
    if (all.size() > 16)
        throw SizeGuardError("independence: more than 16 instantiation bits");
}

inline Term instantiation_term(std::vector<VarId> vars, std::uint32_t mask) {
    std::sort(vars.begin(), vars.end());
    LitSet lits;
    for (std::size_t b = 0; b < vars.size(); ++b)
        lits.push_back(make_lit(vars[b], (mask >> b) & 1));
    std::sort(lits.begin(), lits.end(), lit_less);
    return Term{std::move(lits)};
}

} // namespace detail

// True when, for every full instantiation of I, K and J, conditioning on J
// over and above K never strengthens the argument for the I state.
inline IndependenceVerdict plus_independent(const ArgumentDatabase& db,
                                            const std::vector<VarId>& i,
                                            const std::vector<VarId>& k,
                                            const std::vector<VarId>& j) {
    detail::check_query_sets(db, {i, k, j, true});
    const Context& ctx = db.ctx();
    for (std::uint32_t im = 0; im < (1u << i.size()); ++im)
        for (std::uint32_t km = 0; km < (1u << k.size()); ++km)
            for (std::uint32_t jm = 0; jm < (1u << j.size()); ++jm) {
                Term it = detail::instantiation_term(i, im);
                Term kt = detail::instantiation_term(k, km);
                Term jt = detail::instantiation_term(j, jm);
                Formula fi = formula_of(ctx, it);
                Formula fk = formula_of(ctx, kt);
                Formula fj = formula_of(ctx, jt);
                Formula with_j = conditional_argument(db, fi, ctx.conjunction(fk, fj));
                Formula without_j = conditional_argument(db, fi, fk);
                if (!entails(with_j, without_j))
                    return {false, it, kt, jt};
            }
    return {};
}

// True when conditioning on J never weakens the argument for the I state.
inline IndependenceVerdict minus_independent(const ArgumentDatabase& db,
                                             const std::vector<VarId>& i,
                                             const std::vector<VarId>& j) {
    detail::check_query_sets(db, {i, {}, j, false});
    const Context& ctx = db.ctx();
    for (std::uint32_t im = 0; im < (1u << i.size()); ++im)
        for (std::uint32_t jm = 0; jm < (1u << j.size()); ++jm) {
            Term it = detail::instantiation_term(i, im);
            Term jt = detail::instantiation_term(j, jm);
            Formula fi = formula_of(ctx, it);
            Formula fj = formula_of(ctx, jt);
            if (!entails(argument(db, fi), conditional_argument(db, fi, fj)))
                return {false, it, Term{}, jt};
        }
    return {};
}

inline IndependenceVerdict check_independence(const ArgumentDatabase& db,
                                              const IndependenceQuery& q) {
    if (q.plus_flavor)
        return plus_independent(db, q.i, q.k, q.j);
    if (!q.k.empty())
        throw Error("independence: the minus flavor takes no conditioning set");
    return minus_independent(db, q.i, q.j);
}

// ---- database text format ----------------------------------------------

namespace detail {

inline std::string strip_comment(std::string line) {
    auto pos = line.find('#');
    if (pos != std::string::npos)
        line.erase(pos);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
        line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    return start == std::string::npos ? std::string() : line.substr(start);
}

inline std::vector<std::string> split_names(const std::string& s, int line_no) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string piece = s.substr(pos, comma == std::string::npos ? std::string::npos
                                                                     : comma - pos);
        std::size_t b = piece.find_first_not_of(" \t");
        std::size_t e = piece.find_last_not_of(" \t");
        if (b == std::string::npos)
            throw ParseError("empty name in declaration", line_no, 1);
        piece = piece.substr(b, e - b + 1);
        if (!is_identifier(piece))
            throw ParseError("bad variable name '" + piece + "'", line_no, 1);
        out.push_back(piece);
        if (comma == std::string::npos)
            break;
        pos = comma + 1;
    }
    return out;
}

} // namespace detail

// Parses the database format: `lang L:`/`lang A:` declaration lines, then
// one `<assumption formula> :- <domain formula>` sentence per line.
inline ArgumentDatabase parse_database(const std::string& text) {
    auto ctx = std::make_shared<Context>();
    std::vector<Sentence> sentences;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string raw = text.substr(pos, eol == std::string::npos ? std::string::npos
                                                                    : eol - pos);
        ++line_no;
        std::string line = detail::strip_comment(raw);
        if (!line.empty()) {
            if (line.rfind("lang L:", 0) == 0) {
                for (auto& name : detail::split_names(line.substr(7), line_no))
                    ctx->declare(std::move(name), Sort::domain);
            } else if (line.rfind("lang A:", 0) == 0) {
                for (auto& name : detail::split_names(line.substr(7), line_no))
                    ctx->declare(std::move(name), Sort::assumption);
            } else {
                std::size_t sep = line.find(":-");
                if (sep == std::string::npos)
                    throw ParseError("expected '<assumptions> :- <sentence>'", line_no, 1);
                Formula ant = parse_formula(*ctx, line.substr(0, sep), line_no);
                Formula cons = parse_formula(*ctx, line.substr(sep + 2), line_no);
                for (VarId v : variables_of(ant))
                    if (ctx->var_sort(v) != Sort::assumption)
                        throw ParseError("'" + ctx->var_name(v) +
                                         "' is not an assumption variable", line_no, 1);
                for (VarId v : variables_of(cons))
                    if (ctx->var_sort(v) != Sort::domain)
                        throw ParseError("'" + ctx->var_name(v) +
                                         "' is not a domain variable", line_no, 1);
                sentences.push_back({ant, cons});
            }
        }
        if (eol == std::string::npos)
            break;
        pos = eol + 1;
    }
    return ArgumentDatabase(std::move(ctx), std::move(sentences));
}

inline std::string print_database(const ArgumentDatabase& db) {
    std::string out;
    auto emit_lang = [&](const char* tag, Sort sort) {
        auto vars = db.ctx().vars_of_sort(sort);
        if (vars.empty())
            return;
        out += tag;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            out += i ? ", " : " ";
            out += db.ctx().var_name(vars[i]);
        }
        out += '\n';
    };
    emit_lang("lang L:", Sort::domain);
    emit_lang("lang A:", Sort::assumption);
    for (const auto& s : db.sentences()) {
        out += to_string(s.antecedent);
        out += " :- ";
        out += to_string(s.consequent);
        out += '\n';
    }
    return out;
}

} // namespace argcalc

#endif
