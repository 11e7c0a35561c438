#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace argcalc;
using testutil::data_path;
using testutil::enumerated_prime_implicants;
using testutil::random_database;
using testutil::random_formula;
using testutil::read_file;
using testutil::term_litsets;
using testutil::tt_entails;
using testutil::tt_equivalent;
using testutil::tt_satisfiable;

namespace {

ArgumentDatabase wrapped_garden() {
    return wrap_plain_database(parse_plain_database(read_file(data_path("garden.pdb"))));
}

ArgumentDatabase circuit() {
    return parse_database(read_file(data_path("circuit.adb")));
}

Formula q(const ArgumentDatabase& db, const std::string& text) {
    return parse_formula(const_cast<Context&>(db.ctx()), text);
}

LitSet negated(const Term& t) {
    LitSet out;
    for (Lit l : t.lits)
        out.push_back(lit_negated(l));
    std::sort(out.begin(), out.end(), lit_less);
    return out;
}

// A random plain theory over a handful of domain variables.
PlainDatabase random_plain(std::mt19937& rng, int nl, int ns) {
    PlainDatabase plain;
    plain.ctx = std::make_shared<Context>();
    std::vector<VarId> vars;
    for (int i = 1; i <= nl; ++i)
        vars.push_back(plain.ctx->declare("p" + std::to_string(i), Sort::domain));
    for (int i = 0; i < ns; ++i)
        plain.sentences.push_back(random_formula(*plain.ctx, vars, rng, 2));
    return plain;
}

} // namespace

TEST_CASE("plain theories wrap into tagged databases") {
    PlainDatabase plain = parse_plain_database(read_file(data_path("garden.pdb")));
    REQUIRE(plain.sentences.size() == 6);
    REQUIRE(plain.ctx->vars_of_sort(Sort::domain).size() == 4);

    ArgumentDatabase db = wrap_plain_database(plain);
    REQUIRE(db.sentences().size() == 6);
    REQUIRE(validate_database(db).ok);
    for (std::size_t i = 0; i < db.sentences().size(); ++i) {
        const Sentence& s = db.sentences()[i];
        REQUIRE(s.antecedent.kind() == Kind::Var);
        REQUIRE(db.ctx().var_name(s.antecedent.var()) == "a" + std::to_string(i + 1));
        REQUIRE(s.consequent == plain.sentences[i]);
    }

    SECTION("tag names step over taken ones") {
        PlainDatabase clash = parse_plain_database("lang L: p, a2\np\na2\n");
        ArgumentDatabase wrapped = wrap_plain_database(clash);
        REQUIRE(wrapped.ctx().var_name(wrapped.sentences()[0].antecedent.var()) == "a1");
        REQUIRE(wrapped.ctx().var_name(wrapped.sentences()[1].antecedent.var()) == "a3");
    }

    SECTION("sentences must stay in the domain language") {
        PlainDatabase bad;
        bad.ctx = std::make_shared<Context>();
        VarId b = bad.ctx->declare("b", Sort::assumption);
        bad.sentences.push_back(bad.ctx->variable(b));
        REQUIRE_THROWS_AS(wrap_plain_database(bad), SortError);
    }

    SECTION("empty theory") {
        PlainDatabase none;
        none.ctx = std::make_shared<Context>();
        ArgumentDatabase wrapped = wrap_plain_database(none);
        REQUIRE(wrapped.sentences().empty());
    }
}

TEST_CASE("wrapped entailment matches the plain theory") {
    ArgumentDatabase db = wrapped_garden();
    REQUIRE(database_entails(db, q(db, "wet_grass")));
    REQUIRE(database_entails(db, q(db, "wet_shoes")));
    REQUIRE(database_entails(db, q(db, "rain | !rain")));
    REQUIRE_FALSE(database_entails(db, q(db, "!rain")));
    REQUIRE_FALSE(database_entails(db, q(db, "rain & !rain")));

    // tags-on entailment is exactly entailment from the conjoined theory
    std::mt19937 rng(1122);
    for (int trial = 0; trial < 12; ++trial) {
        PlainDatabase plain = random_plain(rng, 3, 4);
        Formula gamma = plain.ctx->constant(true);
        for (Formula s : plain.sentences)
            gamma = plain.ctx->conjunction(gamma, s);
        std::vector<VarId> vars = plain.ctx->vars_of_sort(Sort::domain);
        ArgumentDatabase wrapped = wrap_plain_database(plain);
        for (int query = 0; query < 6; ++query) {
            Formula f = random_formula(*plain.ctx, vars, rng, 2);
            REQUIRE(database_entails(wrapped, f) == tt_entails(gamma, f));
        }
    }

    SECTION("only wrapped databases qualify") {
        ArgumentDatabase complex_tag =
            parse_database("lang L: p\nlang A: b\n!b :- p\n");
        REQUIRE_THROWS_WITH(database_entails(complex_tag, q(complex_tag, "p")),
                            Catch::Matchers::ContainsSubstring("wrapped form"));
        ArgumentDatabase repeated_tag =
            parse_database("lang L: p, r\nlang A: b\nb :- p\nb :- r\n");
        REQUIRE_THROWS_WITH(database_entails(repeated_tag, q(repeated_tag, "p")),
                            Catch::Matchers::ContainsSubstring("wrapped form"));
    }
}

TEST_CASE("retraction lists the minimal ways out of a contradiction") {
    ArgumentDatabase db = wrapped_garden();
    auto candidates = retraction_candidates(db, q(db, "!wet_grass"));
    REQUIRE(candidates.size() == 4);

    std::vector<std::vector<std::size_t>> retracts;
    for (const auto& c : candidates) {
        REQUIRE(c.keep.empty());
        retracts.push_back(c.retract);
    }
    REQUIRE(retracts == std::vector<std::vector<std::size_t>>{
                            {0, 1, 4}, {0, 3, 4}, {1, 2, 4}, {2, 3, 4}});

    SECTION("a consistent observation needs no retraction") {
        auto fine = retraction_candidates(db, q(db, "wet_shoes"));
        REQUIRE(fine.size() == 1);
        REQUIRE(fine[0].retract.empty());
        REQUIRE(fine[0].keep == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
    }

    SECTION("each candidate restores consistency and is minimal") {
        const auto& sentences = db.sentences();
        Formula obs = q(db, "!wet_grass");
        for (const auto& c : candidates) {
            Formula rest = db.ctx().constant(true);
            for (std::size_t i = 0; i < sentences.size(); ++i)
                if (std::find(c.retract.begin(), c.retract.end(), i) == c.retract.end())
                    rest = db.ctx().conjunction(rest, sentences[i].consequent);
            REQUIRE(tt_satisfiable(db.ctx().conjunction(rest, obs)));
            for (std::size_t r : c.retract) {
                Formula readded = db.ctx().conjunction(rest, sentences[r].consequent);
                REQUIRE_FALSE(tt_satisfiable(db.ctx().conjunction(readded, obs)));
            }
        }
    }
}

TEST_CASE("retraction behaves on random plain theories") {
    std::mt19937 rng(3344);
    int interesting = 0;
    while (interesting < 15) {
        PlainDatabase plain = random_plain(rng, 3, 4);
        std::vector<VarId> vars = plain.ctx->vars_of_sort(Sort::domain);
        Formula gamma = plain.ctx->constant(true);
        for (Formula s : plain.sentences)
            gamma = plain.ctx->conjunction(gamma, s);
        ArgumentDatabase db = wrap_plain_database(plain);
        Formula obs = random_formula(*plain.ctx, vars, rng, 2);

        auto candidates = retraction_candidates(db, obs);
        if (!tt_satisfiable(obs)) {
            REQUIRE(candidates.empty());
            continue;
        }
        if (tt_satisfiable(plain.ctx->conjunction(gamma, obs))) {
            REQUIRE(candidates.size() == 1);
            REQUIRE(candidates[0].retract.empty());
            continue;
        }
        ++interesting;
        REQUIRE_FALSE(candidates.empty());
        for (const auto& c : candidates) {
            REQUIRE(c.keep.empty());
            Formula rest = plain.ctx->constant(true);
            for (std::size_t i = 0; i < plain.sentences.size(); ++i)
                if (std::find(c.retract.begin(), c.retract.end(), i) == c.retract.end())
                    rest = plain.ctx->conjunction(rest, plain.sentences[i]);
            REQUIRE(tt_satisfiable(plain.ctx->conjunction(rest, obs)));
            for (std::size_t r : c.retract) {
                Formula readded = plain.ctx->conjunction(rest, plain.sentences[r]);
                REQUIRE_FALSE(tt_satisfiable(plain.ctx->conjunction(readded, obs)));
            }
        }
    }
}

TEST_CASE("labels collect the minimal argument states") {
    ArgumentDatabase db = circuit();
    Label label = atms_label(db, q(db, "!A & B & C => F"));
    const Context& ctx = db.ctx();
    VarId okx = ctx.var("OK_X"), oky = ctx.var("OK_Y"), okz = ctx.var("OK_Z");
    REQUIRE(term_litsets(label) ==
            std::vector<LitSet>{{make_lit(okx, true), make_lit(okz, true)},
                                {make_lit(oky, true), make_lit(okz, true)}});

    REQUIRE(term_litsets(atms_label(db, q(db, "A | !A"))) ==
            std::vector<LitSet>{{}});
    REQUIRE(atms_label(db, q(db, "A & !A")).empty());

    SECTION("every label term argues for the sentence on its own") {
        std::mt19937 rng(5566);
        for (int trial = 0; trial < 20; ++trial) {
            auto rdb = random_database(rng, 3, 3, 4);
            Formula f = random_formula(*rdb.ctx, rdb.lvars, rng, 2);
            Label terms = atms_label(*rdb.db, f);
            for (const Term& t : terms)
                REQUIRE(tt_entails(rdb.ctx->conjunction(rdb.db->delta_star(),
                                                        formula_of(*rdb.ctx, t)),
                                   f));
            REQUIRE(term_litsets(terms) ==
                    enumerated_prime_implicants(argument(*rdb.db, f)));
        }
    }
}

TEST_CASE("labels and minimal supports mirror each other") {
    ArgumentDatabase db = circuit();
    Formula f = q(db, "!A & B & C => F");

    auto supports = minimal_supports(db, f);
    std::vector<LitSet> asort;
    for (const Clause& c : supports) {
        bool all_a = true;
        for (Lit l : c.lits)
            all_a &= db.ctx().var_sort(lit_var(l)) == Sort::assumption;
        if (all_a)
            asort.push_back(c.lits);
    }
    std::sort(asort.begin(), asort.end(), litset_less);

    std::vector<LitSet> flipped;
    for (const Term& t : atms_label(db, f))
        flipped.push_back(negated(t));
    std::sort(flipped.begin(), flipped.end(), litset_less);
    REQUIRE(asort == flipped);

    SECTION("the mirror holds on random databases") {
        std::mt19937 rng(7788);
        for (int trial = 0; trial < 15; ++trial) {
            auto rdb = random_database(rng, 3, 3, 4);
            Formula g = random_formula(*rdb.ctx, rdb.lvars, rng, 2);
            std::vector<LitSet> a_clauses;
            for (const Clause& c : minimal_supports(*rdb.db, g)) {
                REQUIRE(tt_entails(rdb.ctx->conjunction(rdb.db->delta_star(),
                                                        rdb.ctx->negation(g)),
                                   formula_of(*rdb.ctx, c)));
                REQUIRE_FALSE(tt_entails(rdb.db->delta_star(), formula_of(*rdb.ctx, c)));
                bool all_a = true;
                for (Lit l : c.lits)
                    all_a &= rdb.ctx->var_sort(lit_var(l)) == Sort::assumption;
                if (all_a)
                    a_clauses.push_back(c.lits);
            }
            std::sort(a_clauses.begin(), a_clauses.end(), litset_less);
            std::vector<LitSet> label_flipped;
            for (const Term& t : atms_label(*rdb.db, g))
                label_flipped.push_back(negated(t));
            std::sort(label_flipped.begin(), label_flipped.end(), litset_less);
            REQUIRE(a_clauses == label_flipped);
        }
    }

    SECTION("an empty database supports nothing in the assumption language") {
        auto ctx = std::make_shared<Context>();
        ctx->declare("p", Sort::domain);
        ctx->declare("b", Sort::assumption);
        ArgumentDatabase none(ctx, {});
        auto out = minimal_supports(none, parse_formula(*ctx, "p"));
        REQUIRE(out.size() == 1);
        REQUIRE(out[0].lits == LitSet{make_lit(ctx->var("p"), false)});
    }
}

TEST_CASE("kernel diagnoses name the broken parts") {
    ArgumentDatabase db = circuit();
    const Context& ctx = db.ctx();
    VarId okx = ctx.var("OK_X"), oky = ctx.var("OK_Y"), okz = ctx.var("OK_Z");

    Diagnosis diag = kernel_diagnoses(db, q(db, "!A & B & C & !F"));
    REQUIRE(term_litsets(diag) ==
            std::vector<LitSet>{{make_lit(okx, false), make_lit(oky, false)},
                                {make_lit(okz, false)}});
    REQUIRE(kernel_diagnoses_direct(db, q(db, "!A & B & C & !F")) == diag);

    // an unconstrained observation lets every assumption state stand
    REQUIRE(term_litsets(kernel_diagnoses(db, q(db, "A"))) ==
            std::vector<LitSet>{{}});
    REQUIRE(kernel_diagnoses(db, q(db, "A & !A")).empty());

    SECTION("both routes agree on random databases") {
        std::mt19937 rng(9900);
        for (int trial = 0; trial < 20; ++trial) {
            auto rdb = random_database(rng, 3, 3, 4);
            Formula obs = random_formula(*rdb.ctx, rdb.lvars, rng, 2);
            REQUIRE(kernel_diagnoses(*rdb.db, obs) ==
                    kernel_diagnoses_direct(*rdb.db, obs));
        }
    }
}

TEST_CASE("the strongest assumption consequence tracks both routes") {
    ArgumentDatabase garden = wrapped_garden();
    REQUIRE(strongest_assumption_consequence(garden) == garden.ctx().constant(true));

    // an inadmissible database projects onto a real constraint
    auto ctx = std::make_shared<Context>();
    VarId rain = ctx->declare("rain", Sort::domain);
    VarId a1 = ctx->declare("a1", Sort::assumption);
    Formula fa = ctx->variable(a1), fr = ctx->variable(rain);
    ArgumentDatabase clash(ctx, {{fa, fr}, {fa, ctx->negation(fr)}});
    REQUIRE(equivalent(strongest_assumption_consequence(clash), ctx->negation(fa)));

    SECTION("forgetting agrees with assignment enumeration") {
        std::mt19937 rng(2244);
        for (int trial = 0; trial < 15; ++trial) {
            auto rdb = random_database(rng, 3, 3, 4);
            Formula out = strongest_assumption_consequence(*rdb.db);
            Formula dstar = rdb.db->delta_star();
            Assignment a;
            for (std::uint32_t am = 0; am < (1u << rdb.avars.size()); ++am) {
                for (std::size_t i = 0; i < rdb.avars.size(); ++i)
                    a.set(rdb.avars[i], (am >> i) & 1);
                bool reachable = false;
                for (std::uint32_t lm = 0; lm < (1u << rdb.lvars.size()); ++lm) {
                    for (std::size_t i = 0; i < rdb.lvars.size(); ++i)
                        a.set(rdb.lvars[i], (lm >> i) & 1);
                    if (evaluate(dstar, a)) {
                        reachable = true;
                        break;
                    }
                }
                for (std::size_t i = 0; i < rdb.lvars.size(); ++i)
                    a.set(rdb.lvars[i], false);
                REQUIRE(evaluate(out, a) == reachable);
            }
        }
    }

    SECTION("diagnoses drop out of the projection of theory plus observation") {
        ArgumentDatabase db = circuit();
        Formula obs = q(db, "!A & B & C & !F");
        std::vector<Sentence> with_obs = db.sentences();
        with_obs.push_back({db.ctx().constant(true), obs});
        ArgumentDatabase joined(db.ctx_ptr(), std::move(with_obs));
        Formula projected = strongest_assumption_consequence(joined);
        REQUIRE(prime_implicants(projected) == kernel_diagnoses(db, obs));
    }
}
