#ifndef ARGCALC_NETWORK_HPP
#define ARGCALC_NETWORK_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "argcalc/argdb.hpp"
#include "argcalc/errors.hpp"
#include "argcalc/formula.hpp"
#include "argcalc/parser.hpp"
#include "argcalc/sat.hpp"

namespace argcalc {

// One node of an argument network: a domain variable, its parents, and a
// table assigning an assumption formula to each (parent state, literal)
// pair.  Row r covers the parent state where parent b is positive exactly
// when bit b of r.mask is set.
struct NetNode {
    VarId var;
    std::vector<VarId> parents;

    struct Row {
        std::uint32_t mask;
        Formula positive;
        Formula negative;
    };
    std::vector<Row> rows; // as written in the source file

    const Row& row_for(std::uint32_t mask) const {
        for (const auto& r : rows)
            if (r.mask == mask)
                return r;
        throw Error("missing table row");
    }

    Formula entry(std::uint32_t mask, bool positive_literal) const {
        const Row& r = row_for(mask);
        return positive_literal ? r.positive : r.negative;
    }
};

// Observed node states, in the order given.
struct Evidence {
    std::vector<std::pair<VarId, bool>> observations;

    std::optional<bool> value_of(VarId v) const {
        for (const auto& [node, val] : observations)
            if (node == v)
                return val;
        return std::nullopt;
    }

    bool empty() const { return observations.empty(); }
};

class ArgumentNetwork {
public:
    ArgumentNetwork(std::shared_ptr<Context> ctx, std::vector<NetNode> nodes)
        : ctx_(std::move(ctx)), nodes_(std::move(nodes)) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (index_.count(nodes_[i].var))
                throw Error("node '" + ctx_->var_name(nodes_[i].var) + "' declared twice");
            index_.emplace(nodes_[i].var, i);
        }
        for (const auto& n : nodes_)
            for (VarId p : n.parents) {
                if (!index_.count(p))
                    throw Error("unknown parent '" + ctx_->var_name(p) + "'");
                children_of_[p].push_back(n.var);
            }
    }

    const Context& ctx() const { return *ctx_; }
    const std::shared_ptr<Context>& ctx_ptr() const { return ctx_; }
    const std::vector<NetNode>& nodes() const { return nodes_; }

    bool has_node(VarId v) const { return index_.count(v) != 0; }

    const NetNode& node(VarId v) const {
        auto it = index_.find(v);
        if (it == index_.end())
            throw Error("unknown node '" + ctx_->var_name(v) + "'");
        return nodes_[it->second];
    }

    std::vector<VarId> children(VarId v) const {
        auto it = children_of_.find(v);
        return it == children_of_.end() ? std::vector<VarId>{} : it->second;
    }

    // Node variables, parents before children; throws on a cyclic graph.
    std::vector<VarId> topological_order() const {
        std::unordered_map<VarId, std::size_t> pending;
        for (const auto& n : nodes_)
            pending[n.var] = n.parents.size();
        std::vector<VarId> order;
        std::vector<VarId> ready;
        for (const auto& n : nodes_)
            if (pending[n.var] == 0)
                ready.push_back(n.var);
        while (!ready.empty()) {
            VarId v = ready.front();
            ready.erase(ready.begin());
            order.push_back(v);
            for (VarId c : children(v))
                if (--pending[c] == 0)
                    ready.push_back(c);
        }
        if (order.size() != nodes_.size())
            throw Error("network graph is cyclic");
        return order;
    }

private:
    std::shared_ptr<Context> ctx_;
    std::vector<NetNode> nodes_;
    std::unordered_map<VarId, std::size_t> index_;
    std::unordered_map<VarId, std::vector<VarId>> children_of_;
};

struct NetworkReport {
    bool ok = true;
    std::string message;
};

// Structural and semantic checks: acyclic graph, full row coverage, table
// entries over assumptions only, and per-row exclusivity (no assumption
// state may argue for both literals of a node under one parent state).
inline NetworkReport validate_network(const ArgumentNetwork& net) {
    try {
        net.topological_order();
    } catch (const Error& e) {
        return {false, e.what()};
    }
    for (const auto& n : net.nodes()) {
        const std::string& name = net.ctx().var_name(n.var);
        if (net.ctx().var_sort(n.var) != Sort::domain)
            return {false, "node '" + name + "' is not a domain variable"};
        std::unordered_set<VarId> distinct(n.parents.begin(), n.parents.end());
        if (distinct.size() != n.parents.size())
            return {false, "node '" + name + "' repeats a parent"};
        if (n.parents.size() > 20)
            return {false, "node '" + name + "' has too many parents"};
        std::uint32_t nrows = 1u << n.parents.size();
        std::vector<bool> seen(nrows, false);
        for (const auto& r : n.rows) {
            if (r.mask >= nrows || seen[r.mask])
                return {false, "node '" + name + "' has a duplicate or stray row"};
            seen[r.mask] = true;
            for (Formula f : {r.positive, r.negative})
                for (VarId v : variables_of(f))
                    if (net.ctx().var_sort(v) != Sort::assumption)
                        return {false, "node '" + name + "' table mentions domain variable '" +
                                           net.ctx().var_name(v) + "'"};
            if (is_satisfiable(net.ctx().conjunction(r.positive, r.negative))) {
                std::string state;
                for (std::size_t b = 0; b < n.parents.size(); ++b) {
                    if (b)
                        state += ", ";
                    if (!((r.mask >> b) & 1))
                        state += "!";
                    state += net.ctx().var_name(n.parents[b]);
                }
                if (state.empty())
                    state = "-";
                return {false, "node '" + name + "' row (" + state +
                                   "): entries for both literals can hold together"};
            }
        }
        for (std::uint32_t m = 0; m < nrows; ++m)
            if (!seen[m])
                return {false, "node '" + name + "' is missing a table row"};
    }
    return {};
}

// Compiles the network into its database: each table entry Q yields the
// sentence Q :- (parent state => literal); rows with entry false are
// dropped as vacuous.  Domain variables are eliminated children-first.
inline ArgumentDatabase to_database(const ArgumentNetwork& net) {
    const Context& ctx = net.ctx();
    std::vector<Sentence> sentences;
    for (const auto& n : net.nodes()) {
        Formula lit_pos = ctx.variable(n.var);
        Formula lit_neg = ctx.negation(lit_pos);
        for (std::uint32_t mask = 0; mask < (1u << n.parents.size()); ++mask) {
            Formula state = ctx.constant(true);
            for (std::size_t b = 0; b < n.parents.size(); ++b) {
                Formula p = ctx.variable(n.parents[b]);
                state = ctx.conjunction(state, ((mask >> b) & 1) ? p : ctx.negation(p));
            }
            const NetNode::Row& row = n.row_for(mask);
            if (row.positive.kind() != Kind::False)
                sentences.push_back({row.positive, ctx.implication(state, lit_pos)});
            if (row.negative.kind() != Kind::False)
                sentences.push_back({row.negative, ctx.implication(state, lit_neg)});
        }
    }
    std::vector<VarId> order = net.topological_order();
    std::reverse(order.begin(), order.end());
    // domain variables outside the network (observation helpers added by a
    // later transformation share the context) keep declaration order
    std::vector<VarId> elim;
    for (VarId v : order)
        elim.push_back(v);
    for (VarId v : net.ctx().vars_of_sort(Sort::domain))
        if (!net.has_node(v))
            elim.push_back(v);
    return ArgumentDatabase(net.ctx_ptr(), std::move(sentences), std::move(elim));
}

// Reachability test for d-separation.  A path is blocked at a chain or
// fork node inside K and at a collider whose descendants all avoid K.
inline bool d_separated(const ArgumentNetwork& net, const std::vector<VarId>& i_set,
                        const std::vector<VarId>& k_set, const std::vector<VarId>& j_set) {
    for (const auto* set : {&i_set, &k_set, &j_set})
        for (VarId v : *set)
            if (!net.has_node(v))
                throw Error("d_separated: unknown node '" + net.ctx().var_name(v) + "'");
    std::unordered_set<VarId> blocked(k_set.begin(), k_set.end());
    std::unordered_set<VarId> targets(j_set.begin(), j_set.end());

    // K together with its ancestors: the set where colliders stay open.
    std::unordered_set<VarId> k_ancestors;
    std::vector<VarId> work(k_set.begin(), k_set.end());
    while (!work.empty()) {
        VarId v = work.back();
        work.pop_back();
        if (!k_ancestors.insert(v).second)
            continue;
        for (VarId p : net.node(v).parents)
            work.push_back(p);
    }

    // State: (node, entered-from-child?).
    std::vector<std::pair<VarId, bool>> frontier;
    std::unordered_set<std::uint64_t> visited;
    auto push = [&](VarId v, bool from_child) {
        std::uint64_t key = (static_cast<std::uint64_t>(v) << 1) | (from_child ? 1 : 0);
        if (visited.insert(key).second)
            frontier.push_back({v, from_child});
    };
    for (VarId v : i_set)
        push(v, true);
    while (!frontier.empty()) {
        auto [v, from_child] = frontier.back();
        frontier.pop_back();
        if (!blocked.count(v) && targets.count(v))
            return false;
        if (from_child) {
            if (!blocked.count(v)) {
                for (VarId p : net.node(v).parents)
                    push(p, true);
                for (VarId c : net.children(v))
                    push(c, false);
            }
        } else {
            if (!blocked.count(v))
                for (VarId c : net.children(v))
                    push(c, false);
            if (k_ancestors.count(v))
                for (VarId p : net.node(v).parents)
                    push(p, true);
        }
    }
    return true;
}

// True when the undirected skeleton has no cycle.
inline bool is_singly_connected(const ArgumentNetwork& net) {
    std::unordered_map<VarId, VarId> root;
    std::function<VarId(VarId)> find = [&](VarId v) {
        while (root[v] != v)
            v = root[v] = root[root[v]];
        return v;
    };
    for (const auto& n : net.nodes())
        root[n.var] = n.var;
    for (const auto& n : net.nodes())
        for (VarId p : n.parents) {
            VarId a = find(n.var), b = find(p);
            if (a == b)
                return false;
            root[a] = b;
        }
    return true;
}

// Rewrites observations so each lands on a single-parent leaf: an observed
// node that is not one gains a fresh child obs_<name> whose table copies
// the node's value, and the observation moves to that child.  Arguments
// over the original variables are unchanged.
inline std::pair<ArgumentNetwork, Evidence> push_evidence_to_leaves(const ArgumentNetwork& net,
                                                                    const Evidence& ev) {
    const auto& ctx_ptr = net.ctx_ptr();
    const Context& ctx = *ctx_ptr;
    std::vector<NetNode> nodes = net.nodes();
    Evidence out;
    for (const auto& [v, value] : ev.observations) {
        if (!net.has_node(v))
            throw Error("evidence on unknown node '" + ctx.var_name(v) + "'");
        if (out.value_of(v))
            throw Error("node '" + ctx.var_name(v) + "' observed twice");
        bool single_parent_leaf =
            net.children(v).empty() && net.node(v).parents.size() == 1;
        if (single_parent_leaf) {
            out.observations.push_back({v, value});
            continue;
        }
        std::string name = "obs_" + ctx.var_name(v);
        while (ctx.lookup(name))
            name += "_x";
        VarId obs = ctx_ptr->declare(name, Sort::domain);
        NetNode child;
        child.var = obs;
        child.parents = {v};
        child.rows = {{0u, ctx.constant(false), ctx.constant(true)},
                      {1u, ctx.constant(true), ctx.constant(false)}};
        nodes.push_back(std::move(child));
        out.observations.push_back({obs, value});
    }
    return {ArgumentNetwork(ctx_ptr, std::move(nodes)), std::move(out)};
}

// ---- network text format -------------------------------------------------

namespace detail {

// Splits "rain, !sprinkler_on" into (name, polarity) pairs.
inline std::vector<std::pair<std::string, bool>> split_names_allow_bang(const std::string& s,
                                                                        int line_no) {
    std::vector<std::pair<std::string, bool>> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string piece = s.substr(pos, comma == std::string::npos ? std::string::npos
                                                                     : comma - pos);
        std::size_t b = piece.find_first_not_of(" \t");
        std::size_t e = piece.find_last_not_of(" \t");
        if (b == std::string::npos)
            throw ParseError("empty literal in parent state", line_no, 1);
        piece = piece.substr(b, e - b + 1);
        bool positive = true;
        while (!piece.empty() && piece[0] == '!') {
            positive = !positive;
            piece.erase(piece.begin());
            while (!piece.empty() && (piece[0] == ' ' || piece[0] == '\t'))
                piece.erase(piece.begin());
        }
        if (!is_identifier(piece))
            throw ParseError("bad literal '" + piece + "'", line_no, 1);
        out.push_back({std::move(piece), positive});
        if (comma == std::string::npos)
            break;
        pos = comma + 1;
    }
    return out;
}

} // namespace detail

// Format: a `lang A:` line declaring assumption names, then node blocks
//   node <name> parents: <p1> <p2> { <rows> }
// with one row per line, `<parent literals or -> : <formula+> ; <formula->`.
inline ArgumentNetwork parse_network(const std::string& text) {
    auto ctx = std::make_shared<Context>();

    struct RawRow {
        std::string state, positive, negative;
        int line;
    };
    struct RawNode {
        std::string name;
        std::vector<std::string> parents;
        std::vector<RawRow> rows;
        int line;
    };
    std::vector<RawNode> raw;

    std::vector<std::pair<std::string, int>> lines;
    {
        std::size_t pos = 0;
        int line_no = 0;
        while (pos <= text.size()) {
            std::size_t eol = text.find('\n', pos);
            std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos
                                                                         : eol - pos);
            ++line_no;
            lines.push_back({detail::strip_comment(std::move(line)), line_no});
            if (eol == std::string::npos)
                break;
            pos = eol + 1;
        }
    }

    std::size_t i = 0;
    auto next_token = [](const std::string& s, std::size_t& p) {
        while (p < s.size() && (s[p] == ' ' || s[p] == '\t'))
            ++p;
        std::size_t start = p;
        while (p < s.size() && s[p] != ' ' && s[p] != '\t')
            ++p;
        return s.substr(start, p - start);
    };
    while (i < lines.size()) {
        auto [line, line_no] = lines[i];
        if (line.empty()) {
            ++i;
            continue;
        }
        if (line.rfind("lang A:", 0) == 0) {
            for (auto& name : detail::split_names(line.substr(7), line_no))
                ctx->declare(std::move(name), Sort::assumption);
            ++i;
            continue;
        }
        if (line.rfind("node", 0) != 0)
            throw ParseError("expected 'lang A:' or 'node'", line_no, 1);
        RawNode n;
        n.line = line_no;
        std::size_t p = 4;
        n.name = next_token(line, p);
        if (!detail::is_identifier(n.name))
            throw ParseError("expected node name", line_no, static_cast<int>(p));
        std::string tok = next_token(line, p);
        if (tok == "parents:") {
            for (;;) {
                std::string parent = next_token(line, p);
                if (parent == "{" || parent.empty()) {
                    tok = parent;
                    break;
                }
                if (!detail::is_identifier(parent))
                    throw ParseError("bad parent name '" + parent + "'", line_no,
                                     static_cast<int>(p));
                n.parents.push_back(parent);
            }
            if (n.parents.empty())
                throw ParseError("empty parents list", line_no, 1);
        }
        if (tok != "{")
            throw ParseError("expected '{'", line_no, 1);
        ++i;
        bool closed = false;
        while (i < lines.size()) {
            auto [row_line, row_no] = lines[i];
            ++i;
            if (row_line.empty())
                continue;
            if (row_line == "}") {
                closed = true;
                break;
            }
            std::size_t colon = row_line.find(':');
            std::size_t semi = row_line.find(';');
            if (colon == std::string::npos || semi == std::string::npos || semi < colon)
                throw ParseError("expected '<state> : <formula> ; <formula>'", row_no, 1);
            n.rows.push_back({row_line.substr(0, colon),
                              row_line.substr(colon + 1, semi - colon - 1),
                              row_line.substr(semi + 1), row_no});
        }
        if (!closed)
            throw ParseError("unterminated node block", n.line, 1);
        raw.push_back(std::move(n));
    }

    // declare node variables first so parents may be written before their
    // own node blocks appear
    for (const auto& n : raw)
        ctx->declare(n.name, Sort::domain);

    std::vector<NetNode> nodes;
    for (const auto& n : raw) {
        NetNode node;
        node.var = *ctx->lookup(n.name);
        for (const auto& pname : n.parents) {
            auto pv = ctx->lookup(pname);
            if (!pv || ctx->var_sort(*pv) != Sort::domain)
                throw ParseError("unknown parent '" + pname + "'", n.line, 1);
            node.parents.push_back(*pv);
        }
        for (const auto& r : n.rows) {
            std::uint32_t mask = 0;
            std::string state = r.state;
            std::size_t b = state.find_first_not_of(" \t");
            std::size_t e = state.find_last_not_of(" \t");
            state = (b == std::string::npos) ? std::string() : state.substr(b, e - b + 1);
            if (node.parents.empty()) {
                if (state != "-")
                    throw ParseError("root rows use '-' for the parent state", r.line, 1);
            } else {
                auto lits = detail::split_names_allow_bang(state, r.line);
                if (lits.size() != node.parents.size())
                    throw ParseError("row must list every parent once, in order", r.line, 1);
                for (std::size_t k = 0; k < lits.size(); ++k) {
                    auto [name, positive] = lits[k];
                    auto pv = ctx->lookup(name);
                    if (!pv || *pv != node.parents[k])
                        throw ParseError("row literal '" + name +
                                         "' does not match parent list order", r.line, 1);
                    if (positive)
                        mask |= 1u << k;
                }
            }
            Formula pos = parse_formula(*ctx, r.positive, r.line);
            Formula neg = parse_formula(*ctx, r.negative, r.line);
            node.rows.push_back({mask, pos, neg});
        }
        std::uint32_t nrows = 1u << node.parents.size();
        std::vector<bool> seen(nrows, false);
        for (const auto& row : node.rows) {
            if (seen[row.mask])
                throw ParseError("duplicate table row", n.line, 1);
            seen[row.mask] = true;
        }
        for (std::uint32_t m = 0; m < nrows; ++m)
            if (!seen[m])
                throw ParseError("node '" + n.name + "' is missing a table row", n.line, 1);
        nodes.push_back(std::move(node));
    }
    return ArgumentNetwork(std::move(ctx), std::move(nodes));
}

inline std::string print_network(const ArgumentNetwork& net) {
    const Context& ctx = net.ctx();
    std::string out;
    auto avars = ctx.vars_of_sort(Sort::assumption);
    if (!avars.empty()) {
        out += "lang A:";
        for (std::size_t i = 0; i < avars.size(); ++i) {
            out += i ? ", " : " ";
            out += ctx.var_name(avars[i]);
        }
        out += '\n';
    }
    for (const auto& n : net.nodes()) {
        out += "\nnode " + ctx.var_name(n.var);
        if (!n.parents.empty()) {
            out += " parents:";
            for (VarId p : n.parents)
                out += " " + ctx.var_name(p);
        }
        out += " {\n";
        for (const auto& r : n.rows) {
            out += "  ";
            if (n.parents.empty()) {
                out += "-";
            } else {
                for (std::size_t b = 0; b < n.parents.size(); ++b) {
                    if (b)
                        out += ", ";
                    if (!((r.mask >> b) & 1))
                        out += "!";
                    out += ctx.var_name(n.parents[b]);
                }
            }
            out += " : " + to_string(r.positive) + " ; " + to_string(r.negative) + "\n";
        }
        out += "}\n";
    }
    return out;
}

} // namespace argcalc

#endif
