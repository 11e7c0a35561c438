#ifndef ARGCALC_SAT_HPP
#define ARGCALC_SAT_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "argcalc/formula.hpp"

namespace argcalc {

namespace detail {

// Small DPLL solver over int literals (var n is literal +-n, n >= 1).
// Deterministic: branches on the lowest unassigned variable, true first.
class DpllSolver {
public:
    int new_var() { return ++nvars_; }

    void add_clause(std::vector<int> lits) {
        std::sort(lits.begin(), lits.end(), [](int a, int b) {
            int va = a < 0 ? -a : a, vb = b < 0 ? -b : b;
            return va != vb ? va < vb : a > b;
        });
        std::vector<int> out;
        for (int l : lits) {
            if (!out.empty() && out.back() == l)
                continue;
            if (!out.empty() && out.back() == -l)
                return; // tautology
            out.push_back(l);
        }
        if (out.empty()) {
            contradiction_ = true;
            return;
        }
        clauses_.push_back(std::move(out));
    }

    bool solve() {
        if (contradiction_)
            return false;
        value_.assign(nvars_ + 1, 0);
        occ_.assign(2 * nvars_ + 2, {});
        for (std::uint32_t i = 0; i < clauses_.size(); ++i)
            for (int l : clauses_[i])
                occ_[lit_index(l)].push_back(i);
        trail_.clear();
        for (const auto& c : clauses_)
            if (c.size() == 1 && !enqueue(c[0]))
                return false;
        return search();
    }

    // Valid after a successful solve; unassigned variables read as false.
    bool model_value(int var) const {
        return var < static_cast<int>(value_.size()) && value_[var] == 1;
    }

private:
    static std::size_t lit_index(int l) {
        return l > 0 ? 2 * static_cast<std::size_t>(l) : 2 * static_cast<std::size_t>(-l) + 1;
    }

    int lit_value(int l) const {
        int v = value_[l > 0 ? l : -l];
        return l > 0 ? v : -v;
    }

    bool enqueue(int l) {
        if (lit_value(l) == 1)
            return true;
        if (lit_value(l) == -1)
            return false;
        value_[l > 0 ? l : -l] = l > 0 ? 1 : -1;
        trail_.push_back(l);
        return true;
    }

    // Propagates every unit clause reachable from trail position `head`.
    bool propagate(std::size_t head) {
        while (head < trail_.size()) {
            int falsified = -trail_[head++];
            for (std::uint32_t ci : occ_[lit_index(falsified)]) {
                const auto& c = clauses_[ci];
                int unassigned = 0;
                bool satisfied = false;
                for (int l : c) {
                    int v = lit_value(l);
                    if (v == 1) {
                        satisfied = true;
                        break;
                    }
                    if (v == 0) {
                        if (unassigned) {
                            unassigned = 0;
                            satisfied = true; // two free literals: not unit yet
                            break;
                        }
                        unassigned = l;
                    }
                }
                if (satisfied)
                    continue;
                if (unassigned == 0)
                    return false;
                if (!enqueue(unassigned))
                    return false;
            }
        }
        return true;
    }

    bool search() {
        struct Frame {
            std::size_t trail_mark;
            int var;
            int tried; // 0 none, 1 true branch, 2 both
        };
        std::vector<Frame> stack;
        std::size_t head = 0;
        for (;;) {
            if (!propagate(head)) {
                // backtrack to the last frame with an untried branch
                for (;;) {
                    if (stack.empty())
                        return false;
                    Frame& fr = stack.back();
                    while (trail_.size() > fr.trail_mark) {
                        int l = trail_.back();
                        trail_.pop_back();
                        value_[l > 0 ? l : -l] = 0;
                    }
                    if (fr.tried == 1) {
                        fr.tried = 2;
                        head = trail_.size();
                        enqueue(-fr.var);
                        break;
                    }
                    stack.pop_back();
                }
                continue;
            }
            head = trail_.size();
            int branch = 0;
            for (int v = 1; v <= nvars_; ++v)
                if (value_[v] == 0) {
                    branch = v;
                    break;
                }
            if (branch == 0)
                return true;
            stack.push_back({trail_.size(), branch, 1});
            enqueue(branch);
        }
    }

    int nvars_ = 0;
    bool contradiction_ = false;
    std::vector<std::vector<int>> clauses_;
    std::vector<std::vector<std::uint32_t>> occ_;
    std::vector<std::int8_t> value_;
    std::vector<int> trail_;
};

// Definitional clause translation of a formula DAG.  Each shared node gets
// one defining variable; the auxiliary variables stay inside the solver.
class Encoder {
public:
    explicit Encoder(DpllSolver& solver) : solver_(solver) {}

    int encode(Formula f) {
        // iterative post-order over the DAG
        std::vector<std::pair<Formula, bool>> stack{{f, false}};
        while (!stack.empty()) {
            auto [g, expanded] = stack.back();
            stack.pop_back();
            if (lit_.count(g.id()))
                continue;
            Kind k = g.kind();
            if (k == Kind::False || k == Kind::True) {
                lit_[g.id()] = (k == Kind::True) ? const_true() : -const_true();
                continue;
            }
            if (k == Kind::Var) {
                lit_[g.id()] = var_literal(g.var());
                continue;
            }
            if (!expanded) {
                stack.push_back({g, true});
                stack.push_back({g.left(), false});
                if (k != Kind::Not)
                    stack.push_back({g.right(), false});
                continue;
            }
            int a = lit_.at(g.left().id());
            if (k == Kind::Not) {
                lit_[g.id()] = -a;
                continue;
            }
            int b = lit_.at(g.right().id());
            int x = solver_.new_var();
            switch (k) {
            case Kind::And:
                solver_.add_clause({-x, a});
                solver_.add_clause({-x, b});
                solver_.add_clause({x, -a, -b});
                break;
            case Kind::Or:
                solver_.add_clause({x, -a});
                solver_.add_clause({x, -b});
                solver_.add_clause({-x, a, b});
                break;
            case Kind::Implies:
                solver_.add_clause({x, a});
                solver_.add_clause({x, -b});
                solver_.add_clause({-x, -a, b});
                break;
            case Kind::Iff:
                solver_.add_clause({-x, -a, b});
                solver_.add_clause({-x, a, -b});
                solver_.add_clause({x, a, b});
                solver_.add_clause({x, -a, -b});
                break;
            default:
                break;
            }
            lit_[g.id()] = x;
        }
        return lit_.at(f.id());
    }

    int var_literal(VarId v) {
        auto it = var_lit_.find(v);
        if (it != var_lit_.end())
            return it->second;
        int x = solver_.new_var();
        var_lit_.emplace(v, x);
        return x;
    }

    const std::unordered_map<VarId, int>& var_literals() const { return var_lit_; }

private:
    int const_true() {
        if (!true_lit_) {
            true_lit_ = solver_.new_var();
            solver_.add_clause({true_lit_});
        }
        return true_lit_;
    }

    DpllSolver& solver_;
    std::unordered_map<std::uint32_t, int> lit_;
    std::unordered_map<VarId, int> var_lit_;
    int true_lit_ = 0;
};

} // namespace detail

// Satisfying assignment over the variables of f, or nullopt.
inline std::optional<Assignment> find_model(Formula f) {
    detail::DpllSolver solver;
    detail::Encoder enc(solver);
    solver.add_clause({enc.encode(f)});
    if (!solver.solve())
        return std::nullopt;
    Assignment a;
    for (auto [v, lit] : enc.var_literals())
        a.set(v, solver.model_value(lit));
    return a;
}

inline bool is_satisfiable(Formula f) { return find_model(f).has_value(); }

inline bool entails(Formula f, Formula g) {
    const Context* ctx = f.context();
    return !is_satisfiable(ctx->conjunction(f, ctx->negation(g)));
}

inline bool equivalent(Formula f, Formula g) {
    return entails(f, g) && entails(g, f);
}

inline bool is_valid(Formula f) {
    return !is_satisfiable(f.context()->negation(f));
}

} // namespace argcalc

#endif
