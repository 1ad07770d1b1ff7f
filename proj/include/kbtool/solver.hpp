#pragma once

// Chronological backtracking over the declared variable order, trying
// domain values in ascending order, so the first solution found is the
// lexicographically smallest. Minimal conflicts come from divide-and-
// conquer relaxation biased toward earlier-declared constraints; results
// are verified minimal before they are returned.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kb.hpp"

namespace kbtool {

namespace detail {

// Expression flattened onto variable indices; hot path for search.
struct CNode {
    enum class Kind : uint8_t { Cmp, Not, And, Or, Implies, ImpliedBy } kind = Kind::Cmp;
    CmpOp op = CmpOp::Eq;
    int var = -1;
    int rhs_var = -1;  // -1 means rhs_const applies
    int rhs_const = 0;
    int left = -1;
    int right = -1;
};

struct CompiledExpr {
    std::vector<CNode> nodes;
    int root = -1;
    int max_var = -1;  // highest referenced variable index
};

inline int compile_node(const KnowledgeBase& kb, const Expr& e, CompiledExpr& out) {
    int id = static_cast<int>(out.nodes.size());
    out.nodes.emplace_back();
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            CNode node;
            if constexpr (std::is_same_v<T, Comparison>) {
                node.kind = CNode::Kind::Cmp;
                node.op = n.op;
                node.var = kb.variable_index(n.var);
                if (node.var < 0) throw UnboundVariableError(n.var);
                if (const auto* rv = std::get_if<std::string>(&n.rhs)) {
                    node.rhs_var = kb.variable_index(*rv);
                    if (node.rhs_var < 0) throw UnboundVariableError(*rv);
                } else {
                    node.rhs_const = std::get<int>(n.rhs);
                }
                out.max_var = std::max({out.max_var, node.var, node.rhs_var});
            } else if constexpr (std::is_same_v<T, Not>) {
                node.kind = CNode::Kind::Not;
                node.left = compile_node(kb, *n.child, out);
            } else {
                if constexpr (std::is_same_v<T, And>) node.kind = CNode::Kind::And;
                if constexpr (std::is_same_v<T, Or>) node.kind = CNode::Kind::Or;
                if constexpr (std::is_same_v<T, Implies>) node.kind = CNode::Kind::Implies;
                if constexpr (std::is_same_v<T, ImpliedBy>) node.kind = CNode::Kind::ImpliedBy;
                node.left = compile_node(kb, *n.lhs, out);
                node.right = compile_node(kb, *n.rhs, out);
            }
            out.nodes[id] = node;
        },
        e.node);
    return id;
}

inline CompiledExpr compile(const KnowledgeBase& kb, const Expr& e) {
    CompiledExpr out;
    out.root = compile_node(kb, e, out);
    return out;
}

inline bool eval(const CompiledExpr& ce, int at, const std::vector<int>& values) {
    const CNode& n = ce.nodes[at];
    switch (n.kind) {
    case CNode::Kind::Cmp: {
        int lhs = values[n.var];
        int rhs = n.rhs_var >= 0 ? values[n.rhs_var] : n.rhs_const;
        switch (n.op) {
        case CmpOp::Eq: return lhs == rhs;
        case CmpOp::Ne: return lhs != rhs;
        case CmpOp::Lt: return lhs < rhs;
        case CmpOp::Gt: return lhs > rhs;
        case CmpOp::Le: return lhs <= rhs;
        case CmpOp::Ge: return lhs >= rhs;
        }
        return false;
    }
    case CNode::Kind::Not: return !eval(ce, n.left, values);
    case CNode::Kind::And: return eval(ce, n.left, values) && eval(ce, n.right, values);
    case CNode::Kind::Or: return eval(ce, n.left, values) || eval(ce, n.right, values);
    case CNode::Kind::Implies: return !eval(ce, n.left, values) || eval(ce, n.right, values);
    case CNode::Kind::ImpliedBy: return eval(ce, n.left, values) || !eval(ce, n.right, values);
    }
    return false;
}

inline bool eval(const CompiledExpr& ce, const std::vector<int>& values) {
    return eval(ce, ce.root, values);
}

class Search {
public:
    explicit Search(const KnowledgeBase& kb) : kb_(kb) {
        for (const auto& c : kb.constraints()) compiled_.push_back(compile(kb, *c.expr));
    }

    // indices must be sorted; returns the first satisfying assignment in
    // value order, or nullopt
    std::optional<std::vector<int>> solve(const std::vector<int>& constraint_indices) const {
        const auto& vars = kb_.variables();
        int n = static_cast<int>(vars.size());

        // constraints become checkable once their last variable is assigned
        std::vector<std::vector<int>> due(n + 1);
        for (int ci : constraint_indices) {
            int mv = compiled_[ci].max_var;
            due[mv < 0 ? 0 : mv + 1].push_back(ci);
        }

        std::vector<int> values(n, 0);
        for (int ci : due[0])
            if (!eval(compiled_[ci], values)) return std::nullopt;
        if (n == 0) return values;

        std::vector<int> choice(n, 0);
        int depth = 0;
        while (true) {
            const auto& domain = vars[depth].domain;
            if (choice[depth] >= static_cast<int>(domain.size())) {
                if (depth == 0) return std::nullopt;
                choice[depth] = 0;
                --depth;
                ++choice[depth];
                continue;
            }
            values[depth] = domain[choice[depth]];
            bool ok = true;
            for (int ci : due[depth + 1]) {
                if (!eval(compiled_[ci], values)) { ok = false; break; }
            }
            if (!ok) {
                ++choice[depth];
                continue;
            }
            if (depth == n - 1) return values;
            ++depth;
        }
    }

    bool consistent(const std::vector<int>& constraint_indices) const {
        return solve(constraint_indices).has_value();
    }

private:
    const KnowledgeBase& kb_;
    std::vector<CompiledExpr> compiled_;
};

inline std::vector<int> resolve_subset(const KnowledgeBase& kb, const std::vector<std::string>& ids) {
    std::vector<int> indices;
    for (const auto& id : ids) {
        int idx = kb.constraint_index(id);
        if (idx < 0) throw Error("unknown constraint id: " + id);
        bool seen = false;
        for (int other : indices)
            if (other == idx) { seen = true; break; }
        if (!seen) indices.push_back(idx);
    }
    std::sort(indices.begin(), indices.end());
    return indices;
}

inline std::vector<int> all_indices(const KnowledgeBase& kb) {
    std::vector<int> indices(kb.constraints().size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
    return indices;
}

}  // namespace detail

inline std::optional<Assignment> find_solution(const KnowledgeBase& kb,
                                               const std::vector<std::string>& subset) {
    detail::Search search(kb);
    auto values = search.solve(detail::resolve_subset(kb, subset));
    if (!values) return std::nullopt;
    Assignment a;
    for (size_t i = 0; i < kb.variables().size(); ++i) a[kb.variables()[i].name] = (*values)[i];
    return a;
}

inline std::optional<Assignment> find_solution(const KnowledgeBase& kb) {
    detail::Search search(kb);
    auto values = search.solve(detail::all_indices(kb));
    if (!values) return std::nullopt;
    Assignment a;
    for (size_t i = 0; i < kb.variables().size(); ++i) a[kb.variables()[i].name] = (*values)[i];
    return a;
}

inline bool is_consistent(const KnowledgeBase& kb, const std::vector<std::string>& subset) {
    detail::Search search(kb);
    return search.consistent(detail::resolve_subset(kb, subset));
}

inline bool is_consistent(const KnowledgeBase& kb) {
    detail::Search search(kb);
    return search.consistent(detail::all_indices(kb));
}

namespace detail {

// Preferred-conflict relaxation: recursively halves the candidate list,
// keeping earlier-declared constraints when more than one minimal conflict
// exists.
inline std::vector<int> conflict_core(const Search& search, std::vector<int> background,
                                      bool background_changed, const std::vector<int>& candidates) {
    if (background_changed && !search.consistent(background)) return {};
    if (candidates.size() == 1) return candidates;

    size_t half = candidates.size() / 2;
    std::vector<int> first(candidates.begin(), candidates.begin() + half);
    std::vector<int> second(candidates.begin() + half, candidates.end());

    std::vector<int> bg_first = background;
    bg_first.insert(bg_first.end(), first.begin(), first.end());
    std::vector<int> d2 = conflict_core(search, bg_first, !first.empty(), second);

    std::vector<int> bg_d2 = background;
    bg_d2.insert(bg_d2.end(), d2.begin(), d2.end());
    std::vector<int> d1 = conflict_core(search, bg_d2, !d2.empty(), first);

    d1.insert(d1.end(), d2.begin(), d2.end());
    std::sort(d1.begin(), d1.end());
    return d1;
}

}  // namespace detail

// Minimal inconsistent constraint subset in declaration order, or nullopt
// for a consistent knowledge base. Minimality means dropping any single
// element leaves a satisfiable set.
inline std::optional<std::vector<std::string>> minimal_conflict(const KnowledgeBase& kb) {
    detail::Search search(kb);
    std::vector<int> all = detail::all_indices(kb);
    if (search.consistent(all)) return std::nullopt;

    std::vector<int> core = detail::conflict_core(search, {}, false, all);

    if (core.empty() || search.consistent(core))
        throw Error("internal: conflict extraction produced a consistent set");
    for (size_t i = 0; i < core.size(); ++i) {
        std::vector<int> without;
        for (size_t j = 0; j < core.size(); ++j)
            if (j != i) without.push_back(core[j]);
        if (!search.consistent(without)) throw Error("internal: conflict is not minimal");
    }

    std::vector<std::string> ids;
    for (int idx : core) ids.push_back(kb.constraints()[idx].id);
    return ids;
}

}  // namespace kbtool
