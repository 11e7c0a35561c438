#ifndef ARGCALC_FORMULA_HPP
#define ARGCALC_FORMULA_HPP

#include <algorithm>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "argcalc/errors.hpp"

namespace argcalc {

enum class Sort : std::uint8_t { domain, assumption };

using VarId = std::uint32_t;

enum class Kind : std::uint8_t { False, True, Var, Not, And, Or, Implies, Iff };

class Context;

// Value handle into a Context's node store.  Cheap to copy, compares by
// identity (two handles are == iff they denote the same stored node).
class Formula {
public:
    Formula() = default;

    bool valid() const { return ctx_ != nullptr; }
    const Context* context() const { return ctx_; }
    std::uint32_t id() const { return id_; }

    Kind kind() const;
    VarId var() const;     // Kind::Var only
    Formula left() const;  // binary nodes
    Formula right() const; // binary nodes
    Formula child() const; // Kind::Not only

    friend bool operator==(Formula a, Formula b) {
        return a.ctx_ == b.ctx_ && a.id_ == b.id_;
    }
    friend bool operator!=(Formula a, Formula b) { return !(a == b); }

private:
    friend class Context;
    Formula(const Context* ctx, std::uint32_t id) : ctx_(ctx), id_(id) {}

    const Context* ctx_ = nullptr;
    std::uint32_t id_ = 0;
};

namespace detail {

inline bool is_identifier(std::string_view s) {
    if (s.empty())
        return false;
    auto head = [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
    };
    auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
    if (!head(s[0]))
        return false;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!tail(s[i]))
            return false;
    return s != "true" && s != "false";
}

} // namespace detail

// Owns the variable table and a hash-consed store of formula nodes.  Nodes
// are immutable and deduplicated, so handle equality is pointer equality.
// Creation is serialized by a mutex; reading through handles needs no lock
// (the deque never moves settled nodes).
class Context {
public:
    Context() {
        nodes_.push_back({Kind::False, 0, 0, 0});
        nodes_.push_back({Kind::True, 0, 0, 0});
    }

    Context(const Context&) = delete;
    Context& operator=(const Context&) = delete;

    VarId declare(std::string name, Sort sort) {
        if (!detail::is_identifier(name))
            throw Error("bad variable name '" + name + "'");
        std::lock_guard<std::mutex> lock(mu_);
        auto it = var_index_.find(name);
        if (it != var_index_.end()) {
            if (var_sorts_[it->second] != sort)
                throw SortError("variable '" + name + "' redeclared with a different sort");
            return it->second;
        }
        VarId id = static_cast<VarId>(var_names_.size());
        var_index_.emplace(name, id);
        var_names_.push_back(std::move(name));
        var_sorts_.push_back(sort);
        return id;
    }

    std::optional<VarId> lookup(std::string_view name) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = var_index_.find(std::string(name));
        if (it == var_index_.end())
            return std::nullopt;
        return it->second;
    }

    VarId var(std::string_view name) const {
        auto id = lookup(name);
        if (!id)
            throw Error("unknown variable '" + std::string(name) + "'");
        return *id;
    }

    const std::string& var_name(VarId v) const { return var_names_.at(v); }
    Sort var_sort(VarId v) const { return var_sorts_.at(v); }
    std::size_t var_count() const { return var_names_.size(); }

    std::vector<VarId> vars_of_sort(Sort s) const {
        std::vector<VarId> out;
        for (VarId v = 0; v < var_names_.size(); ++v)
            if (var_sorts_[v] == s)
                out.push_back(v);
        return out;
    }

    Formula constant(bool b) const { return Formula(this, b ? 1u : 0u); }

    Formula variable(VarId v) const {
        if (v >= var_names_.size())
            throw Error("unknown variable id");
        return Formula(this, intern(Kind::Var, v, 0, 0));
    }

    // Raw constructors: structure is kept exactly as given (used by the
    // parser so that parsing and printing round-trip).
    Formula raw_not(Formula a) const { return make1(Kind::Not, a); }
    Formula raw_and(Formula a, Formula b) const { return make2(Kind::And, a, b); }
    Formula raw_or(Formula a, Formula b) const { return make2(Kind::Or, a, b); }
    Formula raw_implies(Formula a, Formula b) const { return make2(Kind::Implies, a, b); }
    Formula raw_iff(Formula a, Formula b) const { return make2(Kind::Iff, a, b); }

    // Folding constructors: constant folding plus collapse of identical
    // operands.  Substitution and forgetting build through these so that
    // intermediate formulas stay small.
    Formula negation(Formula a) const {
        switch (a.kind()) {
        case Kind::False: return constant(true);
        case Kind::True: return constant(false);
        case Kind::Not: return a.child();
        default: return raw_not(a);
        }
    }

    Formula conjunction(Formula a, Formula b) const {
        if (a.kind() == Kind::False || b.kind() == Kind::False)
            return constant(false);
        if (a.kind() == Kind::True)
            return b;
        if (b.kind() == Kind::True)
            return a;
        if (a == b)
            return a;
        return raw_and(a, b);
    }

    Formula disjunction(Formula a, Formula b) const {
        if (a.kind() == Kind::True || b.kind() == Kind::True)
            return constant(true);
        if (a.kind() == Kind::False)
            return b;
        if (b.kind() == Kind::False)
            return a;
        if (a == b)
            return a;
        return raw_or(a, b);
    }

    Formula implication(Formula a, Formula b) const {
        if (a.kind() == Kind::False || b.kind() == Kind::True)
            return constant(true);
        if (a.kind() == Kind::True)
            return b;
        if (b.kind() == Kind::False)
            return negation(a);
        if (a == b)
            return constant(true);
        return raw_implies(a, b);
    }

    Formula biconditional(Formula a, Formula b) const {
        if (a.kind() == Kind::True)
            return b;
        if (b.kind() == Kind::True)
            return a;
        if (a.kind() == Kind::False)
            return negation(b);
        if (b.kind() == Kind::False)
            return negation(a);
        if (a == b)
            return constant(true);
        return raw_iff(a, b);
    }

    // Left folds; empty spans give the neutral element.
    Formula conjunction(std::span<const Formula> fs) const {
        Formula acc = constant(true);
        for (Formula f : fs)
            acc = conjunction(acc, f);
        return acc;
    }

    Formula disjunction(std::span<const Formula> fs) const {
        Formula acc = constant(false);
        for (Formula f : fs)
            acc = disjunction(acc, f);
        return acc;
    }

    // Balanced fold: keeps depth logarithmic for very wide disjunctions
    // (enumeration oracles produce thousands of disjuncts).
    Formula disjunction_balanced(std::span<const Formula> fs) const {
        if (fs.empty())
            return constant(false);
        if (fs.size() == 1)
            return fs[0];
        std::size_t mid = fs.size() / 2;
        return disjunction(disjunction_balanced(fs.subspan(0, mid)),
                           disjunction_balanced(fs.subspan(mid)));
    }

    std::size_t node_count() const {
        std::lock_guard<std::mutex> lock(mu_);
        return nodes_.size();
    }

private:
    friend class Formula;

    struct Node {
        Kind kind;
        VarId var;
        std::uint32_t lhs;
        std::uint32_t rhs;
    };

    struct NodeKey {
        Kind kind;
        VarId var;
        std::uint32_t lhs;
        std::uint32_t rhs;
        bool operator==(const NodeKey&) const = default;
    };

    struct NodeKeyHash {
        std::size_t operator()(const NodeKey& k) const {
            std::uint64_t h = static_cast<std::uint64_t>(k.kind);
            h = h * 0x9e3779b97f4a7c15ull + k.var;
            h = h * 0x9e3779b97f4a7c15ull + k.lhs;
            h = h * 0x9e3779b97f4a7c15ull + k.rhs;
            return static_cast<std::size_t>(h ^ (h >> 32));
        }
    };

    const Node& node(std::uint32_t id) const { return nodes_[id]; }

    std::uint32_t intern(Kind kind, VarId var, std::uint32_t lhs, std::uint32_t rhs) const {
        NodeKey key{kind, var, lhs, rhs};
        std::lock_guard<std::mutex> lock(mu_);
        auto it = node_index_.find(key);
        if (it != node_index_.end())
            return it->second;
        std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({kind, var, lhs, rhs});
        node_index_.emplace(key, id);
        return id;
    }

    void check_mine(Formula f) const {
        if (f.context() != this)
            throw Error("formula belongs to a different context");
    }

    Formula make1(Kind k, Formula a) const {
        check_mine(a);
        return Formula(this, intern(k, 0, a.id(), a.id()));
    }

    Formula make2(Kind k, Formula a, Formula b) const {
        check_mine(a);
        check_mine(b);
        return Formula(this, intern(k, 0, a.id(), b.id()));
    }

    mutable std::mutex mu_;
    mutable std::deque<Node> nodes_;
    mutable std::unordered_map<NodeKey, std::uint32_t, NodeKeyHash> node_index_;
    std::vector<std::string> var_names_;
    std::vector<Sort> var_sorts_;
    std::unordered_map<std::string, VarId> var_index_;
};

inline Kind Formula::kind() const { return ctx_->node(id_).kind; }
inline VarId Formula::var() const { return ctx_->node(id_).var; }
inline Formula Formula::left() const { return Formula(ctx_, ctx_->node(id_).lhs); }
inline Formula Formula::right() const { return Formula(ctx_, ctx_->node(id_).rhs); }
inline Formula Formula::child() const { return left(); }

// Partial or total map from variables to truth values.
class Assignment {
public:
    void set(VarId v, bool value) {
        if (values_.size() <= v)
            values_.resize(v + 1, -1);
        values_[v] = value ? 1 : 0;
    }

    void unset(VarId v) {
        if (v < values_.size())
            values_[v] = -1;
    }

    std::optional<bool> get(VarId v) const {
        if (v >= values_.size() || values_[v] < 0)
            return std::nullopt;
        return values_[v] == 1;
    }

private:
    std::vector<std::int8_t> values_;
};

// Evaluates f under a; every variable of f must be covered.  Iterative so
// that formulas of arbitrary depth are safe.
inline bool evaluate(Formula f, const Assignment& a) {
    const Context* ctx = f.context();
    if (!ctx)
        throw EvalError("evaluating an empty formula handle");
    std::unordered_map<std::uint32_t, bool> memo;
    std::vector<std::pair<Formula, bool>> stack;
    stack.push_back({f, false});
    while (!stack.empty()) {
        auto [g, expanded] = stack.back();
        stack.pop_back();
        if (memo.count(g.id()))
            continue;
        Kind k = g.kind();
        if (k == Kind::False || k == Kind::True) {
            memo[g.id()] = (k == Kind::True);
            continue;
        }
        if (k == Kind::Var) {
            auto v = a.get(g.var());
            if (!v)
                throw EvalError("assignment misses variable '" + ctx->var_name(g.var()) + "'");
            memo[g.id()] = *v;
            continue;
        }
        if (!expanded) {
            stack.push_back({g, true});
            stack.push_back({g.left(), false});
            if (k != Kind::Not)
                stack.push_back({g.right(), false});
            continue;
        }
        bool l = memo.at(g.left().id());
        bool result = false;
        switch (k) {
        case Kind::Not: result = !l; break;
        case Kind::And: result = l && memo.at(g.right().id()); break;
        case Kind::Or: result = l || memo.at(g.right().id()); break;
        case Kind::Implies: result = !l || memo.at(g.right().id()); break;
        case Kind::Iff: result = l == memo.at(g.right().id()); break;
        default: break;
        }
        memo[g.id()] = result;
    }
    return memo.at(f.id());
}

// Sorted list of the distinct variables occurring in f.
inline std::vector<VarId> variables_of(Formula f) {
    std::vector<VarId> out;
    if (!f.valid())
        return out;
    std::unordered_map<std::uint32_t, bool> seen;
    std::vector<Formula> stack{f};
    std::vector<bool> have;
    while (!stack.empty()) {
        Formula g = stack.back();
        stack.pop_back();
        if (seen.count(g.id()))
            continue;
        seen[g.id()] = true;
        switch (g.kind()) {
        case Kind::Var: {
            VarId v = g.var();
            if (have.size() <= v)
                have.resize(v + 1, false);
            if (!have[v]) {
                have[v] = true;
                out.push_back(v);
            }
            break;
        }
        case Kind::Not:
            stack.push_back(g.child());
            break;
        case Kind::And:
        case Kind::Or:
        case Kind::Implies:
        case Kind::Iff:
            stack.push_back(g.left());
            stack.push_back(g.right());
            break;
        default:
            break;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

inline Formula cofactor_rec(Formula f, VarId v, bool value,
                            std::unordered_map<std::uint32_t, Formula>& memo) {
    auto it = memo.find(f.id());
    if (it != memo.end())
        return it->second;
    const Context* ctx = f.context();
    Formula out;
    switch (f.kind()) {
    case Kind::False:
    case Kind::True:
        out = f;
        break;
    case Kind::Var:
        out = (f.var() == v) ? ctx->constant(value) : f;
        break;
    case Kind::Not:
        out = ctx->negation(cofactor_rec(f.child(), v, value, memo));
        break;
    case Kind::And:
        out = ctx->conjunction(cofactor_rec(f.left(), v, value, memo),
                               cofactor_rec(f.right(), v, value, memo));
        break;
    case Kind::Or:
        out = ctx->disjunction(cofactor_rec(f.left(), v, value, memo),
                               cofactor_rec(f.right(), v, value, memo));
        break;
    case Kind::Implies:
        out = ctx->implication(cofactor_rec(f.left(), v, value, memo),
                               cofactor_rec(f.right(), v, value, memo));
        break;
    case Kind::Iff:
        out = ctx->biconditional(cofactor_rec(f.left(), v, value, memo),
                                 cofactor_rec(f.right(), v, value, memo));
        break;
    }
    memo.emplace(f.id(), out);
    return out;
}

} // namespace detail

// f with v fixed to the given value, folded.
inline Formula cofactor(Formula f, VarId v, bool value) {
    std::unordered_map<std::uint32_t, Formula> memo;
    return detail::cofactor_rec(f, v, value, memo);
}

enum class ForgetMode { existential, universal };

// Variable elimination by repeated splitting: existential forgetting of v
// yields f[v/true] | f[v/false], universal forgetting the conjunction.
// Variables are eliminated in the order given.
inline Formula forget(Formula f, std::span<const VarId> vars, ForgetMode mode) {
    const Context* ctx = f.context();
    for (VarId v : vars) {
        Formula hi = cofactor(f, v, true);
        Formula lo = cofactor(f, v, false);
        f = (mode == ForgetMode::existential) ? ctx->disjunction(hi, lo)
                                              : ctx->conjunction(hi, lo);
    }
    return f;
}

inline Formula forget(Formula f, std::initializer_list<VarId> vars, ForgetMode mode) {
    return forget(f, std::span<const VarId>(vars.begin(), vars.size()), mode);
}

namespace detail {

// Precedence levels used by the printer; higher binds tighter.
inline int print_level(Kind k) {
    switch (k) {
    case Kind::Iff: return 0;
    case Kind::Implies: return 1;
    case Kind::Or: return 2;
    case Kind::And: return 3;
    case Kind::Not: return 4;
    default: return 5;
    }
}

inline void print_rec(Formula f, int min_level, std::string& out) {
    int level = print_level(f.kind());
    bool parens = level < min_level;
    if (parens)
        out += '(';
    switch (f.kind()) {
    case Kind::False:
        out += "false";
        break;
    case Kind::True:
        out += "true";
        break;
    case Kind::Var:
        out += f.context()->var_name(f.var());
        break;
    case Kind::Not:
        out += '!';
        print_rec(f.child(), 4, out);
        break;
    case Kind::And:
        print_rec(f.left(), 3, out);
        out += " & ";
        print_rec(f.right(), 4, out);
        break;
    case Kind::Or:
        print_rec(f.left(), 2, out);
        out += " | ";
        print_rec(f.right(), 3, out);
        break;
    case Kind::Implies:
        print_rec(f.left(), 2, out);
        out += " => ";
        print_rec(f.right(), 1, out);
        break;
    case Kind::Iff:
        print_rec(f.left(), 1, out);
        out += " <=> ";
        print_rec(f.right(), 0, out);
        break;
    }
    if (parens)
        out += ')';
}

} // namespace detail

// Renders f with the minimal parentheses that reparse to the same tree.
inline std::string to_string(Formula f) {
    std::string out;
    detail::print_rec(f, 0, out);
    return out;
}

} // namespace argcalc

#endif
