#ifndef ARGCALC_TEST_HELPERS_HPP
#define ARGCALC_TEST_HELPERS_HPP

#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "argcalc/argcalc.hpp"

namespace testutil {

using namespace argcalc;

inline std::string data_path(const std::string& name) {
    return std::string(TEST_DATA_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Truth-table comparison over the union of both variable sets.
inline std::vector<VarId> tt_vars(Formula f, Formula g) {
    std::vector<VarId> vars = variables_of(f);
    for (VarId v : variables_of(g))
        vars.push_back(v);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

inline bool tt_entails(Formula f, Formula g) {
    std::vector<VarId> vars = tt_vars(f, g);
    Assignment a;
    for (std::uint32_t mask = 0; mask < (1u << vars.size()); ++mask) {
        for (std::size_t i = 0; i < vars.size(); ++i)
            a.set(vars[i], (mask >> i) & 1);
        if (evaluate(f, a) && !evaluate(g, a))
            return false;
    }
    return true;
}

inline bool tt_equivalent(Formula f, Formula g) {
    return tt_entails(f, g) && tt_entails(g, f);
}

inline bool tt_satisfiable(Formula f) {
    std::vector<VarId> vars = variables_of(f);
    Assignment a;
    for (std::uint32_t mask = 0; mask < (1u << vars.size()); ++mask) {
        for (std::size_t i = 0; i < vars.size(); ++i)
            a.set(vars[i], (mask >> i) & 1);
        if (evaluate(f, a))
            return true;
    }
    return false;
}

// Random formula over the given variables; depth-bounded, biased toward
// binary connectives so formulas stay interesting.
inline Formula random_formula(const Context& ctx, const std::vector<VarId>& vars,
                              std::mt19937& rng, int depth) {
    auto pick_var = [&]() {
        return ctx.variable(vars[rng() % vars.size()]);
    };
    if (depth <= 0 || vars.empty()) {
        if (vars.empty() || rng() % 16 == 0)
            return ctx.constant(rng() % 2 == 0);
        return pick_var();
    }
    switch (rng() % 12) {
    case 0:
    case 1:
        return pick_var();
    case 2:
        return ctx.raw_not(random_formula(ctx, vars, rng, depth - 1));
    case 3:
    case 4:
    case 5:
        return ctx.raw_and(random_formula(ctx, vars, rng, depth - 1),
                           random_formula(ctx, vars, rng, depth - 1));
    case 6:
    case 7:
    case 8:
        return ctx.raw_or(random_formula(ctx, vars, rng, depth - 1),
                          random_formula(ctx, vars, rng, depth - 1));
    case 9:
    case 10:
        return ctx.raw_implies(random_formula(ctx, vars, rng, depth - 1),
                               random_formula(ctx, vars, rng, depth - 1));
    default:
        return ctx.raw_iff(random_formula(ctx, vars, rng, depth - 1),
                           random_formula(ctx, vars, rng, depth - 1));
    }
}

// All prime implicants by exhaustive search: every partial assignment is
// tested for being an implicant, then pruned to the subset-minimal ones.
// Wholly independent of the consensus machinery.
inline std::vector<LitSet> enumerated_prime_implicants(Formula f) {
    std::vector<VarId> vars = variables_of(f);
    std::size_t n = vars.size();
    std::vector<bool> onset(std::size_t{1} << n);
    Assignment a;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        for (std::size_t i = 0; i < n; ++i)
            a.set(vars[i], (mask >> i) & 1);
        onset[mask] = evaluate(f, a);
    }
    std::set<LitSet> implicants;
    // 3^n candidates: per variable absent / positive / negative
    std::vector<int> state(n, 0);
    for (;;) {
        std::uint32_t fixed = 0, value = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (state[i]) {
                fixed |= 1u << i;
                if (state[i] == 1)
                    value |= 1u << i;
            }
        bool implies = true;
        std::uint32_t free_mask = ~fixed & ((n == 32 ? 0u : (1u << n)) - 1);
        std::uint32_t sub = 0;
        for (;;) {
            if (!onset[sub | value]) {
                implies = false;
                break;
            }
            if (sub == free_mask)
                break;
            sub = (sub - free_mask) & free_mask;
        }
        if (implies) {
            LitSet lits;
            for (std::size_t i = 0; i < n; ++i)
                if (state[i])
                    lits.push_back(make_lit(vars[i], state[i] == 1));
            std::sort(lits.begin(), lits.end(), lit_less);
            implicants.insert(std::move(lits));
        }
        std::size_t i = 0;
        while (i < n && state[i] == 2)
            state[i++] = 0;
        if (i == n)
            break;
        ++state[i];
    }
    std::vector<LitSet> prime;
    for (const auto& t : implicants) {
        bool minimal = true;
        for (std::size_t drop = 0; drop < t.size() && minimal; ++drop) {
            LitSet shorter;
            for (std::size_t i = 0; i < t.size(); ++i)
                if (i != drop)
                    shorter.push_back(t[i]);
            if (implicants.count(shorter))
                minimal = false;
        }
        if (minimal)
            prime.push_back(t);
    }
    std::sort(prime.begin(), prime.end(), litset_less);
    return prime;
}

// Rejection-samples a database that passes validation, so every assumption
// state leaves the domain theory satisfiable.
struct RandomDb {
    std::shared_ptr<Context> ctx;
    std::optional<ArgumentDatabase> db;
    std::vector<VarId> lvars;
    std::vector<VarId> avars;
};

inline RandomDb random_database(std::mt19937& rng, int nl, int na, int ns) {
    for (int attempt = 0; attempt < 500; ++attempt) {
        auto ctx = std::make_shared<Context>();
        RandomDb out;
        out.ctx = ctx;
        for (int i = 0; i < nl; ++i)
            out.lvars.push_back(ctx->declare("x" + std::to_string(i + 1), Sort::domain));
        for (int i = 0; i < na; ++i)
            out.avars.push_back(ctx->declare("b" + std::to_string(i + 1), Sort::assumption));
        std::vector<Sentence> sentences;
        for (int i = 0; i < ns; ++i) {
            Formula ant = random_formula(*ctx, out.avars, rng, 1);
            Formula cons = random_formula(*ctx, out.lvars, rng, 2);
            sentences.push_back({ant, cons});
        }
        ArgumentDatabase db(ctx, std::move(sentences));
        if (!validate_database(db).ok) {
            out.lvars.clear();
            out.avars.clear();
            continue;
        }
        out.db = std::move(db);
        return out;
    }
    throw std::runtime_error("no admissible database found");
}

// All full instantiations of the given variables, as conjunction terms.
inline std::vector<Formula> all_instantiations(const Context& ctx,
                                               const std::vector<VarId>& vars) {
    std::vector<Formula> out;
    for (std::uint32_t mask = 0; mask < (1u << vars.size()); ++mask) {
        Formula t = ctx.constant(true);
        for (std::size_t i = 0; i < vars.size(); ++i) {
            Formula x = ctx.variable(vars[i]);
            t = ctx.conjunction(t, (mask >> i) & 1 ? x : ctx.negation(x));
        }
        out.push_back(t);
    }
    return out;
}

// Random valid network: acyclic by construction and rows exclusive by
// construction, so validate_network always passes.  With polytree set the
// undirected skeleton stays a forest (possibly with several components).
struct RandomNet {
    std::shared_ptr<Context> ctx;
    std::optional<ArgumentNetwork> net;
    std::vector<VarId> nodes;
    std::vector<VarId> avars;
};

inline RandomNet random_network(std::mt19937& rng, int num_nodes, int num_avars,
                                int max_parents, bool polytree) {
    RandomNet out;
    out.ctx = std::make_shared<Context>();
    Context& ctx = *out.ctx;
    for (int i = 1; i <= num_avars; ++i)
        out.avars.push_back(out.ctx->declare("b" + std::to_string(i), Sort::assumption));
    for (int i = 1; i <= num_nodes; ++i)
        out.nodes.push_back(out.ctx->declare("x" + std::to_string(i), Sort::domain));

    std::vector<int> comp(num_nodes);
    std::iota(comp.begin(), comp.end(), 0);
    std::function<int(int)> find = [&](int v) {
        while (comp[v] != v)
            v = comp[v] = comp[comp[v]];
        return v;
    };

    std::vector<NetNode> nodes;
    for (int t = 0; t < num_nodes; ++t) {
        NetNode n;
        n.var = out.nodes[t];
        int want = static_cast<int>(rng() % (max_parents + 1));
        std::vector<int> prev(t);
        std::iota(prev.begin(), prev.end(), 0);
        std::shuffle(prev.begin(), prev.end(), rng);
        for (int p : prev) {
            if (static_cast<int>(n.parents.size()) >= want)
                break;
            if (polytree) {
                if (find(p) == find(t))
                    continue;
                comp[find(p)] = find(t);
            }
            n.parents.push_back(out.nodes[p]);
        }
        for (std::uint32_t mask = 0; mask < (1u << n.parents.size()); ++mask) {
            Formula pos = random_formula(ctx, out.avars, rng, 1);
            Formula neg = ctx.conjunction(random_formula(ctx, out.avars, rng, 1),
                                          ctx.negation(pos));
            n.rows.push_back({mask, pos, neg});
        }
        nodes.push_back(std::move(n));
    }
    out.net.emplace(out.ctx, std::move(nodes));
    return out;
}

inline std::vector<LitSet> term_litsets(const std::vector<Term>& terms) {
    std::vector<LitSet> out;
    for (const auto& t : terms)
        out.push_back(t.lits);
    return out;
}

inline std::vector<LitSet> clause_litsets(const std::vector<Clause>& clauses) {
    std::vector<LitSet> out;
    for (const auto& c : clauses)
        out.push_back(c.lits);
    return out;
}

} // namespace testutil

#endif
