#ifndef ARGCALC_PROPAGATION_HPP
#define ARGCALC_PROPAGATION_HPP

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "argcalc/errors.hpp"
#include "argcalc/network.hpp"
#include "argcalc/primes.hpp"

namespace argcalc {

// Outcome of a propagation run.  Formula pairs are indexed by literal:
// [0] the positive literal, [1] the negative one.  Messages are local to
// the skeleton side they came from; supports are global.
struct PropagationResult {
    std::shared_ptr<Context> ctx;
    Evidence evidence;
    Formula evidence_term;

    // support(i) = argument for (evidence => literal), per unobserved node
    std::map<VarId, std::array<Formula, 2>> support;

    // directed edge j->i keyed (j, i), indexed by literal of parent j
    std::map<std::pair<VarId, VarId>, std::array<Formula, 2>> pi_messages;
    // reversed edge k->i keyed (k, i) with k a child of i, indexed by
    // literal of parent i
    std::map<std::pair<VarId, VarId>, std::array<Formula, 2>> lambda_messages;

    std::map<VarId, std::array<Formula, 2>> fused_pi;     // unobserved nodes
    std::map<VarId, std::array<Formula, 2>> fused_lambda; // unobserved nodes

    Formula negated_evidence; // argument against the evidence as a whole
    std::size_t message_count = 0;
};

namespace detail {

class Propagator {
public:
    Propagator(const ArgumentNetwork& net, const Evidence& ev)
        : net_(net), ctx_(net.ctx()) {
        if (!is_singly_connected(net))
            throw NotSinglyConnectedError(
                "propagation requires a singly connected network");
        for (const auto& [v, value] : ev.observations) {
            if (!net.has_node(v))
                throw Error("evidence on unknown node '" + ctx_.var_name(v) + "'");
            if (observed_.count(v))
                throw Error("node '" + ctx_.var_name(v) + "' observed twice");
            if (!net.children(v).empty() || net.node(v).parents.size() != 1)
                throw EvidenceNotAtLeavesError(
                    "observed node '" + ctx_.var_name(v) +
                    "' is not a single-parent leaf; push evidence to leaves first");
            observed_.emplace(v, value);
        }
        for (const auto& n : net.nodes()) {
            neighbors_[n.var];
            for (VarId p : n.parents) {
                neighbors_[n.var].insert(p);
                neighbors_[p].insert(n.var);
            }
        }
        result_.ctx = net.ctx_ptr();
        result_.evidence = ev;
        Formula term = ctx_.constant(true);
        for (const auto& [v, value] : ev.observations) {
            Formula x = ctx_.variable(v);
            term = ctx_.conjunction(term, value ? x : ctx_.negation(x));
        }
        result_.evidence_term = term;
    }

    PropagationResult run() {
        std::set<VarId> unvisited;
        for (const auto& n : net_.nodes())
            unvisited.insert(n.var);

        struct Component {
            std::vector<VarId> members;
            Formula refutation;
        };
        std::vector<Component> components;
        std::map<VarId, std::size_t> component_of;

        while (!unvisited.empty()) {
            // collect the skeleton component of the smallest remaining node
            std::vector<VarId> members;
            {
                std::vector<VarId> work{*unvisited.begin()};
                while (!work.empty()) {
                    VarId v = work.back();
                    work.pop_back();
                    if (!unvisited.erase(v))
                        continue;
                    members.push_back(v);
                    for (VarId w : neighbors_.at(v))
                        work.push_back(w);
                }
                std::sort(members.begin(), members.end());
            }
            VarId root = members.front();
            for (VarId v : members)
                if (!observed_.count(v)) {
                    root = v;
                    break;
                }

            // breadth-first order rooted there
            std::vector<VarId> order;
            std::map<VarId, VarId> up;
            {
                std::set<VarId> seen{root};
                order.push_back(root);
                for (std::size_t q = 0; q < order.size(); ++q)
                    for (VarId w : neighbors_.at(order[q]))
                        if (seen.insert(w).second) {
                            up[w] = order[q];
                            order.push_back(w);
                        }
            }
            for (auto it = order.rbegin(); it != order.rend(); ++it)
                if (*it != root)
                    compute_message(*it, up.at(*it));
            for (VarId v : order)
                for (VarId w : neighbors_.at(v))
                    if (w != v && up.count(w) && up.at(w) == v)
                        compute_message(v, w);

            Component comp;
            comp.members = members;
            comp.refutation = ctx_.constant(false);
            for (VarId v : members) {
                if (observed_.count(v))
                    continue;
                auto pi = fused_pi_of(v);
                auto lambda = fused_lambda_of(v);
                std::array<Formula, 2> local = {
                    blake_canonical(ctx_.disjunction(pi[0], lambda[0])),
                    blake_canonical(ctx_.disjunction(pi[1], lambda[1]))};
                result_.fused_pi.emplace(v, pi);
                result_.fused_lambda.emplace(v, lambda);
                result_.support.emplace(v, local);
                component_of[v] = components.size();
                if (comp.refutation.kind() == Kind::False)
                    comp.refutation = blake_canonical(ctx_.conjunction(local[0], local[1]));
            }
            components.push_back(std::move(comp));
        }

        // Evidence in one component refutes globally: fold each component's
        // refutation into the supports of all the others.
        Formula total = ctx_.constant(false);
        for (const auto& c : components)
            total = ctx_.disjunction(total, c.refutation);
        result_.negated_evidence = blake_canonical(total);
        if (components.size() > 1) {
            for (auto& [v, pair] : result_.support) {
                Formula other = ctx_.constant(false);
                for (std::size_t t = 0; t < components.size(); ++t)
                    if (t != component_of.at(v))
                        other = ctx_.disjunction(other, components[t].refutation);
                pair = {blake_canonical(ctx_.disjunction(pair[0], other)),
                        blake_canonical(ctx_.disjunction(pair[1], other))};
            }
        }

        result_.message_count =
            result_.pi_messages.size() + result_.lambda_messages.size();
        return std::move(result_);
    }

private:
    bool is_dag_parent(VarId u, VarId v) const {
        for (VarId p : net_.node(v).parents)
            if (p == u)
                return true;
        return false;
    }

    // Does the skeleton side of u, looking away from v, contain evidence?
    bool side_has_evidence(VarId u, VarId v) {
        auto key = std::make_pair(u, v);
        auto it = side_ev_.find(key);
        if (it != side_ev_.end())
            return it->second;
        bool ev = observed_.count(u) != 0;
        for (VarId w : neighbors_.at(u))
            if (!ev && w != v)
                ev = side_has_evidence(w, u);
        side_ev_.emplace(key, ev);
        return ev;
    }

    void compute_message(VarId u, VarId v) {
        if (is_dag_parent(u, v))
            result_.pi_messages.emplace(std::make_pair(u, v), pi_message(u, v));
        else
            result_.lambda_messages.emplace(std::make_pair(u, v), lambda_message(u, v));
    }

    // Fused causal support of node i from its parents' sides.
    std::array<Formula, 2> fused_pi_of(VarId i) {
        auto it = fused_pi_cache_.find(i);
        if (it != fused_pi_cache_.end())
            return it->second;
        const NetNode& n = net_.node(i);
        std::array<Formula, 2> out;
        for (int idx = 0; idx < 2; ++idx) {
            Formula acc = ctx_.constant(true);
            for (std::uint32_t mask = 0; mask < (1u << n.parents.size()); ++mask) {
                Formula alt = n.entry(mask, idx == 0);
                for (std::size_t b = 0; b < n.parents.size(); ++b) {
                    // the row pins parent b to one literal; the parent's
                    // side may refute that literal
                    int opp = ((mask >> b) & 1) ? 1 : 0;
                    alt = ctx_.disjunction(
                        alt, result_.pi_messages.at({n.parents[b], i})[opp]);
                }
                acc = ctx_.conjunction(acc, alt);
            }
            out[idx] = blake_canonical(acc);
        }
        fused_pi_cache_.emplace(i, out);
        return out;
    }

    // Fused diagnostic support of node i from its children's sides.
    std::array<Formula, 2> fused_lambda_of(VarId i) {
        std::array<Formula, 2> out = {ctx_.constant(false), ctx_.constant(false)};
        for (VarId c : net_.children(i)) {
            const auto& m = result_.lambda_messages.at({c, i});
            out[0] = ctx_.disjunction(out[0], m[0]);
            out[1] = ctx_.disjunction(out[1], m[1]);
        }
        out[0] = blake_canonical(out[0]);
        out[1] = blake_canonical(out[1]);
        return out;
    }

    // Message along dag edge j->i: j's own support plus anything arriving
    // at j from its other children.
    std::array<Formula, 2> pi_message(VarId j, VarId i) {
        auto pj = fused_pi_of(j);
        std::array<Formula, 2> out;
        for (int idx = 0; idx < 2; ++idx) {
            Formula acc = pj[idx];
            for (VarId c : net_.children(j))
                if (c != i)
                    acc = ctx_.disjunction(acc, result_.lambda_messages.at({c, j})[idx]);
            out[idx] = blake_canonical(acc);
        }
        return out;
    }

    // Message against the flow of dag edge i->k, indexed by literal of i.
    // The k side argues for a literal of i by ruling out both values of k
    // under the opposite literal of i: each value w of k is excluded
    // either below k (support for the complement of w) or at k's table
    // (for every state of k's other parents, the entry forcing the
    // complement of w holds unless some other parent's side refutes that
    // state).  For an observed leaf child this collapses to the single
    // entry Q(opposite row, complement of the observed literal).
    std::array<Formula, 2> lambda_message(VarId k, VarId i) {
        if (!side_has_evidence(k, i))
            return {ctx_.constant(false), ctx_.constant(false)};
        const NetNode& n = net_.node(k);
        std::size_t bi = 0;
        while (n.parents[bi] != i)
            ++bi;
        std::array<Formula, 2> out;
        auto obs = observed_.find(k);
        if (obs != observed_.end()) {
            bool khat = obs->second;
            for (int idx = 0; idx < 2; ++idx) {
                std::uint32_t mask = (idx == 0 ? 0u : 1u) << bi;
                out[idx] = blake_canonical(n.entry(mask, !khat));
            }
            return out;
        }
        auto lk = fused_lambda_of(k);
        std::vector<std::size_t> others;
        for (std::size_t b = 0; b < n.parents.size(); ++b)
            if (b != bi)
                others.push_back(b);
        for (int idx = 0; idx < 2; ++idx) {
            std::uint32_t base = (idx == 0 ? 0u : 1u) << bi;
            Formula acc = ctx_.constant(true);
            for (int w = 0; w < 2; ++w) {
                // rule out k having the value of literal index w
                Formula from_below = lk[1 - w];
                Formula from_rows = ctx_.constant(true);
                for (std::uint32_t rm = 0; rm < (1u << others.size()); ++rm) {
                    std::uint32_t mask = base;
                    for (std::size_t ob = 0; ob < others.size(); ++ob)
                        if ((rm >> ob) & 1)
                            mask |= 1u << others[ob];
                    Formula alt = n.entry(mask, w == 1);
                    for (std::size_t ob = 0; ob < others.size(); ++ob) {
                        int opp = ((rm >> ob) & 1) ? 1 : 0;
                        alt = ctx_.disjunction(
                            alt,
                            result_.pi_messages.at({n.parents[others[ob]], k})[opp]);
                    }
                    from_rows = ctx_.conjunction(from_rows, alt);
                }
                acc = ctx_.conjunction(acc, ctx_.disjunction(from_below, from_rows));
            }
            out[idx] = blake_canonical(acc);
        }
        return out;
    }

    const ArgumentNetwork& net_;
    const Context& ctx_;
    std::map<VarId, bool> observed_;
    std::map<VarId, std::set<VarId>> neighbors_;
    std::map<std::pair<VarId, VarId>, bool> side_ev_;
    std::map<VarId, std::array<Formula, 2>> fused_pi_cache_;
    PropagationResult result_;
};

} // namespace detail

// Runs the polytree message-passing algorithm.  Requires a validated,
// singly connected network with every observation on a single-parent leaf
// (see push_evidence_to_leaves); empty evidence yields plain arguments.
inline PropagationResult propagate(const ArgumentNetwork& net, const Evidence& ev) {
    detail::Propagator p(net, ev);
    return p.run();
}

// The argument against the evidence, read off any unobserved node.
inline Formula negated_evidence_argument(const PropagationResult& result, VarId node) {
    auto it = result.support.find(node);
    if (it == result.support.end())
        throw Error("negated_evidence_argument: node is observed or unknown");
    return blake_canonical(result.ctx->conjunction(it->second[0], it->second[1]));
}

// Conditional argument for a literal given the evidence.
inline Formula conditional_from_propagation(const PropagationResult& result, VarId node,
                                            bool positive) {
    auto it = result.support.find(node);
    if (it == result.support.end())
        throw Error("conditional_from_propagation: node is observed or unknown");
    Formula support = it->second[positive ? 0 : 1];
    return blake_canonical(result.ctx->conjunction(
        support, result.ctx->negation(result.negated_evidence)));
}

} // namespace argcalc

#endif
