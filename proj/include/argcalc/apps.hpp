#ifndef ARGCALC_APPS_HPP
#define ARGCALC_APPS_HPP

#include <algorithm>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "argcalc/argdb.hpp"
#include "argcalc/errors.hpp"
#include "argcalc/formula.hpp"
#include "argcalc/parser.hpp"
#include "argcalc/primes.hpp"
#include "argcalc/sat.hpp"

namespace argcalc {

// A plain theory: domain sentences with no assumption structure yet.
struct PlainDatabase {
    std::shared_ptr<Context> ctx;
    std::vector<Formula> sentences;
};

// Parses `lang L:` declarations followed by one bare formula per line.
inline PlainDatabase parse_plain_database(const std::string& text) {
    auto ctx = std::make_shared<Context>();
    std::vector<Formula> sentences;
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
            } else {
                sentences.push_back(parse_formula(*ctx, line, line_no));
            }
        }
        if (eol == std::string::npos)
            break;
        pos = eol + 1;
    }
    return {std::move(ctx), std::move(sentences)};
}

// Tags each sentence phi_i with a fresh assumption a_i, giving the
// database {a_i :- phi_i}.  The index of a sentence doubles as the index
// of its tag, so results over assumptions map back to sentences.
inline ArgumentDatabase wrap_plain_database(const PlainDatabase& plain) {
    std::vector<Sentence> sentences;
    int next = 1;
    for (Formula phi : plain.sentences) {
        for (VarId v : variables_of(phi))
            if (plain.ctx->var_sort(v) != Sort::domain)
                throw SortError("wrap_plain_database: sentences must be over the domain");
        std::string name;
        do {
            name = "a" + std::to_string(next++);
        } while (plain.ctx->lookup(name));
        VarId tag = plain.ctx->declare(name, Sort::assumption);
        sentences.push_back({plain.ctx->variable(tag), phi});
    }
    return ArgumentDatabase(plain.ctx, std::move(sentences));
}

namespace detail {

// Wrapped shape: every antecedent is a distinct bare assumption variable.
inline std::vector<VarId> wrapper_tags(const ArgumentDatabase& db, const char* what) {
    std::vector<VarId> tags;
    for (const auto& s : db.sentences()) {
        if (s.antecedent.kind() != Kind::Var)
            throw Error(std::string(what) + ": database is not in wrapped form");
        tags.push_back(s.antecedent.var());
    }
    std::vector<VarId> sorted = tags;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw Error(std::string(what) + ": database is not in wrapped form");
    return tags;
}

} // namespace detail

// Whether the plain theory entails phi: with every tag switched on, the
// wrapped database must argue for phi.
inline bool database_entails(const ArgumentDatabase& db, Formula phi) {
    auto tags = detail::wrapper_tags(db, "database_entails");
    const Context& ctx = db.ctx();
    Formula all = ctx.constant(true);
    for (VarId t : tags)
        all = ctx.conjunction(all, ctx.variable(t));
    return entails(all, argument(db, phi));
}

struct RetractionCandidate {
    std::vector<std::size_t> retract; // sentence indices to drop
    std::vector<std::size_t> keep;    // sentence indices that must stay
};

// Minimal ways to restore consistency with an observation.  Each prime
// implicant of the negated argument against obs names the sentences to
// drop (negative literals) and those whose presence the implicant relies
// on (positive literals).  A consistent observation yields the trivial
// candidate.  Candidates are ordered by retraction size, then indices.
inline std::vector<RetractionCandidate> retraction_candidates(const ArgumentDatabase& db,
                                                              Formula obs) {
    auto tags = detail::wrapper_tags(db, "retraction_candidates");
    const Context& ctx = db.ctx();
    detail::check_domain_formula(db, obs, "retraction_candidates");

    Formula gamma = ctx.constant(true);
    for (const auto& s : db.sentences())
        gamma = ctx.conjunction(gamma, s.consequent);
    if (is_satisfiable(ctx.conjunction(gamma, obs))) {
        RetractionCandidate trivial;
        for (std::size_t i = 0; i < db.sentences().size(); ++i)
            trivial.keep.push_back(i);
        return {std::move(trivial)};
    }

    std::vector<std::size_t> tag_index(ctx.var_count(), SIZE_MAX);
    for (std::size_t i = 0; i < tags.size(); ++i)
        tag_index[tags[i]] = i;

    Formula refute = argument(db, ctx.negation(obs));
    std::vector<RetractionCandidate> out;
    for (const Term& t : prime_implicants(ctx.negation(refute))) {
        RetractionCandidate c;
        for (Lit l : t.lits) {
            std::size_t idx = tag_index[lit_var(l)];
            if (idx == SIZE_MAX)
                continue;
            (lit_positive(l) ? c.keep : c.retract).push_back(idx);
        }
        std::sort(c.retract.begin(), c.retract.end());
        std::sort(c.keep.begin(), c.keep.end());
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const RetractionCandidate& a,
                                         const RetractionCandidate& b) {
        if (a.retract.size() != b.retract.size())
            return a.retract.size() < b.retract.size();
        if (a.retract != b.retract)
            return a.retract < b.retract;
        return a.keep < b.keep;
    });
    return out;
}

using Label = std::vector<Term>;

// Minimal assumption states arguing for phi.
inline Label atms_label(const ArgumentDatabase& db, Formula phi) {
    return prime_implicants(argument(db, phi));
}

// Prime implicates of delta_star & !phi that are not already implicates
// of delta_star: the minimal sentences whose addition would establish phi.
inline std::vector<Clause> minimal_supports(const ArgumentDatabase& db, Formula phi) {
    detail::check_domain_formula(db, phi, "minimal_supports");
    const Context& ctx = db.ctx();
    Formula with_neg = ctx.conjunction(db.delta_star(), ctx.negation(phi));
    Formula dstar = db.delta_star();
    std::vector<Clause> out;
    for (auto& c : prime_implicates(with_neg))
        if (!entails(dstar, formula_of(ctx, c)))
            out.push_back(std::move(c));
    return out;
}

using Diagnosis = std::vector<Term>;

// Minimal assumption states consistent with the observation.
inline Diagnosis kernel_diagnoses(const ArgumentDatabase& db, Formula obs) {
    detail::check_domain_formula(db, obs, "kernel_diagnoses");
    const Context& ctx = db.ctx();
    return prime_implicants(ctx.negation(argument(db, ctx.negation(obs))));
}

// Same set computed the long way round: conjoin the assumption-sort prime
// implicates of delta_star & obs and take the prime implicants.
inline Diagnosis kernel_diagnoses_direct(const ArgumentDatabase& db, Formula obs) {
    detail::check_domain_formula(db, obs, "kernel_diagnoses");
    const Context& ctx = db.ctx();
    Formula joined = ctx.conjunction(db.delta_star(), obs);
    auto implicates = restrict_to_sort(prime_implicates(joined), ctx, Sort::assumption);
    return prime_implicants(formula_of(ctx, implicates));
}

// The strongest assumption sentence the database entails, by existential
// elimination of the domain language.  Both computation paths are run and
// compared: splitting on each domain variable, and conjoining the
// assumption-sort prime implicates.
inline Formula strongest_assumption_consequence(const ArgumentDatabase& db) {
    const Context& ctx = db.ctx();
    Formula dstar = db.delta_star();
    std::vector<VarId> lvars = db.elimination_order();
    Formula via_forgetting = forget(dstar, lvars, ForgetMode::existential);
    auto implicates = restrict_to_sort(prime_implicates(dstar), ctx, Sort::assumption);
    Formula via_implicates = formula_of(ctx, implicates);
    if (!equivalent(via_forgetting, via_implicates))
        throw Error("strongest_assumption_consequence: computation paths disagree");
    return via_implicates;
}

} // namespace argcalc

#endif
