#include <argcalc/argcalc.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace argcalc;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Database files carry ":-" sentences; anything else is read as a plain
// theory and wrapped with fresh assumption tags.
ArgumentDatabase load_database(const std::string& path) {
    std::string text = read_file(path);
    if (text.find(":-") != std::string::npos ||
        text.find("lang A") != std::string::npos)
        return parse_database(text);
    return wrap_plain_database(parse_plain_database(text));
}

ArgumentNetwork load_network(const std::string& path) {
    return parse_network(read_file(path));
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty())
                out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

std::vector<VarId> parse_vars(const Context& ctx, const std::string& text) {
    std::vector<VarId> out;
    for (const std::string& name : split_list(text))
        out.push_back(ctx.var(name));
    return out;
}

Evidence parse_evidence(const Context& ctx, const std::string& text) {
    Evidence ev;
    for (std::string tok : split_list(text)) {
        bool value = true;
        if (tok.front() == '!') {
            value = false;
            tok.erase(0, 1);
        }
        ev.observations.emplace_back(ctx.var(tok), value);
    }
    return ev;
}

std::string lit_string(const Context& ctx, Lit l) {
    return (lit_positive(l) ? "" : "!") + ctx.var_name(lit_var(l));
}

std::string term_string(const Context& ctx, const Term& t) {
    if (t.lits.empty())
        return "true";
    std::string out;
    for (std::size_t i = 0; i < t.lits.size(); ++i) {
        if (i)
            out += " & ";
        out += lit_string(ctx, t.lits[i]);
    }
    return out;
}

json term_json(const Context& ctx, const Term& t) {
    json arr = json::array();
    for (Lit l : t.lits)
        arr.push_back(lit_string(ctx, l));
    return arr;
}

struct Output {
    bool as_json = false;
    json doc;
    std::vector<std::string> lines;

    void line(std::string s) { lines.push_back(std::move(s)); }

    void flush() const {
        if (as_json) {
            std::cout << doc.dump(2) << "\n";
            return;
        }
        for (const std::string& s : lines)
            std::cout << s << "\n";
    }
};

// Emits one term per line; an empty list is the query-level no-result.
int emit_terms(Output& out, const Context& ctx, const std::vector<Term>& terms,
               const char* key) {
    json arr = json::array();
    for (const Term& t : terms) {
        arr.push_back(term_json(ctx, t));
        out.line(term_string(ctx, t));
    }
    out.doc[key] = arr;
    return terms.empty() ? 1 : 0;
}

int check_failed(const std::string& what, const std::string& fast,
                 const std::string& brute) {
    std::cerr << "check failed: " << what << "\n  computed: " << fast
              << "\n  oracle:   " << brute << "\n";
    return 3;
}

// ---- brute-force paths ----------------------------------------------------

Formula oracle_conditional(const ArgumentDatabase& db, Formula psi, Formula phi) {
    const Context& ctx = db.ctx();
    Formula forward = argument_oracle(db, ctx.implication(phi, psi));
    Formula against = argument_oracle(db, ctx.negation(phi));
    return ctx.conjunction(forward, ctx.negation(against));
}

Term instantiation(std::vector<VarId> vars, std::uint32_t mask) {
    std::sort(vars.begin(), vars.end());
    LitSet lits;
    for (std::size_t b = 0; b < vars.size(); ++b)
        lits.push_back(make_lit(vars[b], (mask >> b) & 1));
    std::sort(lits.begin(), lits.end(), lit_less);
    return Term{std::move(lits)};
}

IndependenceVerdict oracle_independent(const ArgumentDatabase& db,
                                       const IndependenceQuery& q) {
    const Context& ctx = db.ctx();
    for (std::uint32_t im = 0; im < (1u << q.i.size()); ++im)
        for (std::uint32_t km = 0; km < (1u << q.k.size()); ++km)
            for (std::uint32_t jm = 0; jm < (1u << q.j.size()); ++jm) {
                Term it = instantiation(q.i, im);
                Term kt = instantiation(q.k, km);
                Term jt = instantiation(q.j, jm);
                Formula fi = formula_of(ctx, it);
                Formula fj = formula_of(ctx, jt);
                if (q.plus_flavor) {
                    Formula fk = formula_of(ctx, kt);
                    Formula with_j =
                        oracle_conditional(db, fi, ctx.conjunction(fk, fj));
                    if (!entails(with_j, oracle_conditional(db, fi, fk)))
                        return {false, it, kt, jt};
                } else {
                    if (!entails(argument_oracle(db, fi),
                                 oracle_conditional(db, fi, fj)))
                        return {false, it, kt, jt};
                }
            }
    return {};
}

// d-separation by enumerating simple undirected paths and applying the
// blocking rules directly, as a slow counterpart of the reachability pass.
bool dsep_by_paths(const ArgumentNetwork& net, const std::vector<VarId>& i_set,
                   const std::vector<VarId>& k_set,
                   const std::vector<VarId>& j_set) {
    std::set<VarId> k(k_set.begin(), k_set.end());
    std::map<VarId, std::set<VarId>> desc;
    std::vector<VarId> order = net.topological_order();
    for (auto itr = order.rbegin(); itr != order.rend(); ++itr) {
        std::set<VarId> d{*itr};
        for (VarId c : net.children(*itr))
            d.insert(desc[c].begin(), desc[c].end());
        desc[*itr] = std::move(d);
    }
    auto observed_at_or_below = [&](VarId v) {
        for (VarId d : desc[v])
            if (k.count(d))
                return true;
        return false;
    };
    auto is_parent = [&](VarId p, VarId c) {
        const auto& ps = net.node(c).parents;
        return std::find(ps.begin(), ps.end(), p) != ps.end();
    };

    std::set<VarId> targets(j_set.begin(), j_set.end());
    std::vector<VarId> path;
    std::set<VarId> on_path;
    std::function<bool(VarId)> reaches = [&](VarId v) -> bool {
        path.push_back(v);
        on_path.insert(v);
        bool open = true;
        if (path.size() >= 3) {
            VarId u = path[path.size() - 3];
            VarId m = path[path.size() - 2];
            bool collider = is_parent(u, m) && is_parent(v, m);
            open = collider ? observed_at_or_below(m) : !k.count(m);
        }
        bool found = false;
        if (open) {
            if (targets.count(v)) {
                found = true;
            } else {
                std::vector<VarId> nbrs = net.node(v).parents;
                for (VarId c : net.children(v))
                    nbrs.push_back(c);
                for (VarId n : nbrs)
                    if (!on_path.count(n) && reaches(n)) {
                        found = true;
                        break;
                    }
            }
        }
        path.pop_back();
        on_path.erase(v);
        return found;
    };

    for (VarId s : i_set)
        if (targets.count(s) || reaches(s))
            return false;
    return true;
}

// ---- subcommand handlers ----------------------------------------------------

int do_argue(Output& out, const std::string& db_file, const std::string& net_file,
             const std::string& query, bool oracle, bool check) {
    if (db_file.empty() == net_file.empty())
        throw Error("argue needs exactly one of --db or --net");

    Formula fast;
    Formula brute;
    std::shared_ptr<Context> owner;
    std::string method = oracle ? "oracle" : "forgetting";
    if (!net_file.empty()) {
        ArgumentNetwork net = load_network(net_file);
        ArgumentDatabase db = to_database(net);
        owner = db.ctx_ptr();
        Formula f = parse_formula(db.ctx(), query);
        bool positive = f.kind() == Kind::Var;
        bool literal = positive ||
                       (f.kind() == Kind::Not && f.child().kind() == Kind::Var);
        VarId v = literal ? (positive ? f.var() : f.child().var()) : VarId{0};
        if (!oracle && literal && net.has_node(v) && is_singly_connected(net)) {
            PropagationResult r = propagate(net, Evidence{});
            fast = r.support.at(v)[positive ? 0 : 1];
            method = "propagation";
        } else if (!oracle) {
            fast = argument(db, f);
        }
        if (oracle || check)
            brute = blake_canonical(argument_oracle(db, f));
    } else {
        ArgumentDatabase db = load_database(db_file);
        owner = db.ctx_ptr();
        Formula f = parse_formula(db.ctx(), query);
        if (!oracle)
            fast = argument(db, f);
        if (oracle || check)
            brute = blake_canonical(argument_oracle(db, f));
    }
    if (oracle)
        fast = brute;
    else if (check && !equivalent(fast, brute))
        return check_failed("argument", to_string(fast), to_string(brute));

    const Context& ctx = *owner;
    out.doc["command"] = "argue";
    out.doc["method"] = method;
    out.doc["formula"] = to_string(fast);
    out.line("# method: " + method);
    return emit_terms(out, ctx, prime_implicants(fast), "implicants");
}

int do_condition(Output& out, const std::string& db_file, const std::string& target,
                 const std::string& given, bool oracle, bool check) {
    ArgumentDatabase db = load_database(db_file);
    Formula psi = parse_formula(db.ctx(), target);
    Formula phi = parse_formula(db.ctx(), given);
    Formula fast = conditional_argument(db, psi, phi);
    if (oracle || check) {
        Formula brute = blake_canonical(oracle_conditional(db, psi, phi));
        if (oracle)
            fast = brute;
        else if (!equivalent(fast, brute))
            return check_failed("conditional argument", to_string(fast),
                                to_string(brute));
    }
    out.doc["command"] = "condition";
    out.doc["formula"] = to_string(fast);
    return emit_terms(out, db.ctx(), prime_implicants(fast), "implicants");
}

int do_independent(Output& out, const std::string& db_file, const std::string& ivars,
                   const std::string& jvars, const std::string& kvars,
                   const std::string& flavor, bool oracle, bool check) {
    ArgumentDatabase db = load_database(db_file);
    IndependenceQuery q{parse_vars(db.ctx(), ivars), parse_vars(db.ctx(), kvars),
                        parse_vars(db.ctx(), jvars), flavor == "plus"};
    if (!q.plus_flavor && !q.k.empty())
        throw Error("--k is not meaningful with --flavor minus");

    IndependenceVerdict v = oracle ? oracle_independent(db, q)
                                   : check_independence(db, q);
    if (check) {
        IndependenceVerdict w = oracle_independent(db, q);
        if (w.independent != v.independent)
            return check_failed("independence verdict",
                                v.independent ? "yes" : "no",
                                w.independent ? "yes" : "no");
    }

    out.doc["command"] = "independent";
    out.doc["flavor"] = flavor;
    out.doc["independent"] = v.independent;
    out.line(v.independent ? "yes" : "no");
    if (!v.independent) {
        json witness;
        witness["i"] = term_string(db.ctx(), v.i_term);
        out.line("i: " + term_string(db.ctx(), v.i_term));
        if (q.plus_flavor) {
            witness["k"] = term_string(db.ctx(), v.k_term);
            out.line("k: " + term_string(db.ctx(), v.k_term));
        }
        witness["j"] = term_string(db.ctx(), v.j_term);
        out.line("j: " + term_string(db.ctx(), v.j_term));
        out.doc["witness"] = witness;
    }
    return 0;
}

int do_label(Output& out, const std::string& db_file, const std::string& query,
             bool oracle, bool check) {
    ArgumentDatabase db = load_database(db_file);
    Formula f = parse_formula(db.ctx(), query);
    Label fast = atms_label(db, f);
    if (oracle || check) {
        Label brute = prime_implicants(argument_oracle(db, f));
        if (oracle)
            fast = brute;
        else if (fast != brute)
            return check_failed("label", std::to_string(fast.size()) + " terms",
                                std::to_string(brute.size()) + " terms");
    }
    out.doc["command"] = "label";
    return emit_terms(out, db.ctx(), fast, "terms");
}

int do_diagnose(Output& out, const std::string& db_file, const std::string& obs,
                bool oracle, bool check) {
    ArgumentDatabase db = load_database(db_file);
    Formula f = parse_formula(db.ctx(), obs);
    Diagnosis fast = oracle ? kernel_diagnoses_direct(db, f)
                            : kernel_diagnoses(db, f);
    if (check) {
        Diagnosis other = kernel_diagnoses_direct(db, f);
        if (fast != other)
            return check_failed("diagnoses", std::to_string(fast.size()) + " terms",
                                std::to_string(other.size()) + " terms");
    }
    out.doc["command"] = "diagnose";
    return emit_terms(out, db.ctx(), fast, "diagnoses");
}

int do_retract(Output& out, const std::string& db_file, const std::string& obs_text,
               bool oracle, bool check) {
    ArgumentDatabase db = load_database(db_file);
    const Context& ctx = db.ctx();
    Formula obs = parse_formula(ctx, obs_text);
    auto fast = retraction_candidates(db, obs);

    if (oracle || check) {
        std::map<VarId, std::size_t> tag_index;
        Formula gamma = ctx.constant(true);
        for (std::size_t i = 0; i < db.sentences().size(); ++i) {
            tag_index[db.sentences()[i].antecedent.var()] = i;
            gamma = ctx.conjunction(gamma, db.sentences()[i].consequent);
        }
        std::vector<RetractionCandidate> brute;
        if (is_satisfiable(ctx.conjunction(gamma, obs))) {
            RetractionCandidate keep_all;
            for (std::size_t i = 0; i < db.sentences().size(); ++i)
                keep_all.keep.push_back(i);
            brute.push_back(std::move(keep_all));
        } else {
            Formula culprits =
                ctx.negation(argument_oracle(db, ctx.negation(obs)));
            for (const Term& t : prime_implicants(culprits)) {
                RetractionCandidate c;
                for (Lit l : t.lits) {
                    auto itr = tag_index.find(lit_var(l));
                    if (itr == tag_index.end())
                        continue;
                    (lit_positive(l) ? c.keep : c.retract).push_back(itr->second);
                }
                std::sort(c.retract.begin(), c.retract.end());
                std::sort(c.keep.begin(), c.keep.end());
                brute.push_back(std::move(c));
            }
            std::sort(brute.begin(), brute.end(), [](const auto& a, const auto& b) {
                if (a.retract.size() != b.retract.size())
                    return a.retract.size() < b.retract.size();
                if (a.retract != b.retract)
                    return a.retract < b.retract;
                return a.keep < b.keep;
            });
        }
        bool same = fast.size() == brute.size();
        for (std::size_t i = 0; same && i < fast.size(); ++i)
            same = fast[i].retract == brute[i].retract &&
                   fast[i].keep == brute[i].keep;
        if (oracle)
            fast = brute;
        else if (!same)
            return check_failed("retraction candidates",
                                std::to_string(fast.size()) + " candidates",
                                std::to_string(brute.size()) + " candidates");
    }

    auto sentence_list = [&](const std::vector<std::size_t>& idx) {
        std::string text = "[";
        json arr = json::array();
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (i)
                text += ", ";
            text += to_string(db.sentences()[idx[i]].consequent);
            arr.push_back(to_string(db.sentences()[idx[i]].consequent));
        }
        text += "]";
        return std::pair{text, arr};
    };
    json arr = json::array();
    for (const auto& c : fast) {
        auto [rtext, rjson] = sentence_list(c.retract);
        auto [ktext, kjson] = sentence_list(c.keep);
        out.line("retract: " + rtext + " keep: " + ktext);
        arr.push_back({{"retract", rjson}, {"keep", kjson}});
    }
    out.doc["command"] = "retract";
    out.doc["candidates"] = arr;
    return fast.empty() ? 1 : 0;
}

int do_dsep(Output& out, const std::string& net_file, const std::string& ivars,
            const std::string& jvars, const std::string& kvars, bool oracle,
            bool check) {
    ArgumentNetwork net = load_network(net_file);
    const Context& ctx = net.ctx();
    std::vector<VarId> i = parse_vars(ctx, ivars);
    std::vector<VarId> j = parse_vars(ctx, jvars);
    std::vector<VarId> k = parse_vars(ctx, kvars);
    bool fast = oracle ? dsep_by_paths(net, i, k, j) : d_separated(net, i, k, j);
    if (check) {
        bool brute = dsep_by_paths(net, i, k, j);
        if (fast != brute)
            return check_failed("d-separation", fast ? "yes" : "no",
                                brute ? "yes" : "no");
    }
    out.doc["command"] = "dsep";
    out.doc["separated"] = fast;
    out.line(fast ? "yes" : "no");
    return 0;
}

int do_propagate(Output& out, const std::string& net_file,
                 const std::string& evidence_text, bool oracle, bool check) {
    ArgumentNetwork parsed = load_network(net_file);
    Evidence raw = parse_evidence(parsed.ctx(), evidence_text);
    auto [net, ev] = push_evidence_to_leaves(parsed, raw);
    PropagationResult result = propagate(net, ev);
    const Context& ctx = *result.ctx;

    ArgumentDatabase db = to_database(net);
    Formula delta = result.evidence_term;
    Formula negated = result.negated_evidence;
    if (oracle || check) {
        Formula brute = blake_canonical(argument_oracle(db, ctx.negation(delta)));
        if (oracle)
            negated = brute;
        else if (!equivalent(negated, brute))
            return check_failed("negated evidence", to_string(negated),
                                to_string(brute));
    }

    out.line("evidence: " + to_string(delta));
    out.line("negated-evidence: " + to_string(negated));
    out.line("messages: " + std::to_string(result.message_count));
    out.doc["command"] = "propagate";
    out.doc["evidence"] = to_string(delta);
    out.doc["negated_evidence"] = to_string(negated);
    out.doc["message_count"] = result.message_count;

    json nodes = json::array();
    for (VarId v : net.topological_order()) {
        auto itr = result.support.find(v);
        if (itr == result.support.end())
            continue;
        std::array<Formula, 2> sup = itr->second;
        std::array<Formula, 2> cond = {conditional_from_propagation(result, v, true),
                                       conditional_from_propagation(result, v, false)};
        if (oracle || check) {
            for (int s = 0; s < 2; ++s) {
                Formula lit = ctx.variable(v);
                if (s)
                    lit = ctx.negation(lit);
                Formula brute = blake_canonical(
                    argument_oracle(db, ctx.implication(delta, lit)));
                if (oracle) {
                    sup[s] = brute;
                    cond[s] = blake_canonical(
                        ctx.conjunction(brute, ctx.negation(negated)));
                } else if (!equivalent(sup[s], brute)) {
                    return check_failed("support for " +
                                            lit_string(ctx, make_lit(v, s == 0)),
                                        to_string(sup[s]), to_string(brute));
                }
            }
        }
        const std::string& name = ctx.var_name(v);
        out.line("support " + name + ": " + to_string(sup[0]));
        out.line("support !" + name + ": " + to_string(sup[1]));
        out.line("conditional " + name + ": " + to_string(cond[0]));
        out.line("conditional !" + name + ": " + to_string(cond[1]));
        nodes.push_back({{"node", name},
                         {"support", {to_string(sup[0]), to_string(sup[1])}},
                         {"conditional", {to_string(cond[0]), to_string(cond[1])}}});
    }
    out.doc["nodes"] = nodes;
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"argument calculus over propositional databases and networks"};
    app.require_subcommand(1);

    std::string format = "text";
    bool oracle = false;
    bool check = false;
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "json"}));
    app.add_flag("--oracle", oracle, "force the brute-force path");
    app.add_flag("--check", check, "run both paths and fail on mismatch");

    std::string db_file, net_file, query, target, given, obs, evidence;
    std::string ivars, jvars, kvars, flavor = "plus";

    CLI::App* argue = app.add_subcommand("argue", "argument for a sentence");
    argue->add_option("--db", db_file, "database or plain theory file");
    argue->add_option("--net", net_file, "network file");
    argue->add_option("--query", query)->required();

    CLI::App* condition = app.add_subcommand("condition", "conditional argument");
    condition->add_option("--db", db_file)->required();
    condition->add_option("--target", target)->required();
    condition->add_option("--given", given)->required();

    CLI::App* independent = app.add_subcommand("independent", "independence check");
    independent->add_option("--db", db_file)->required();
    independent->add_option("--i", ivars)->required();
    independent->add_option("--j", jvars)->required();
    independent->add_option("--k", kvars);
    independent->add_option("--flavor", flavor)
        ->check(CLI::IsMember({"plus", "minus"}));

    CLI::App* label = app.add_subcommand("label", "minimal argument states");
    label->add_option("--db", db_file)->required();
    label->add_option("--query", query)->required();

    CLI::App* diagnose = app.add_subcommand("diagnose", "kernel diagnoses");
    diagnose->add_option("--db", db_file)->required();
    diagnose->add_option("--obs", obs)->required();

    CLI::App* retract = app.add_subcommand("retract", "minimal retractions");
    retract->add_option("--db", db_file)->required();
    retract->add_option("--obs", obs)->required();

    CLI::App* dsep = app.add_subcommand("dsep", "d-separation check");
    dsep->add_option("--net", net_file)->required();
    dsep->add_option("--i", ivars)->required();
    dsep->add_option("--j", jvars)->required();
    dsep->add_option("--k", kvars);

    CLI::App* propagate_cmd = app.add_subcommand("propagate", "polytree propagation");
    propagate_cmd->add_option("--net", net_file)->required();
    propagate_cmd->add_option("--evidence", evidence, "comma-separated literals");

    for (CLI::App* sub : app.get_subcommands({}))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Output out;
    out.as_json = format == "json";
    int code = 0;
    if (*argue)
        code = do_argue(out, db_file, net_file, query, oracle, check);
    else if (*condition)
        code = do_condition(out, db_file, target, given, oracle, check);
    else if (*independent)
        code = do_independent(out, db_file, ivars, jvars, kvars, flavor, oracle, check);
    else if (*label)
        code = do_label(out, db_file, query, oracle, check);
    else if (*diagnose)
        code = do_diagnose(out, db_file, obs, oracle, check);
    else if (*retract)
        code = do_retract(out, db_file, obs, oracle, check);
    else if (*dsep)
        code = do_dsep(out, net_file, ivars, jvars, kvars, oracle, check);
    else if (*propagate_cmd)
        code = do_propagate(out, net_file, evidence, oracle, check);

    if (code != 3)
        out.flush();
    return code;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
