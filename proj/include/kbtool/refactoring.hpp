#pragma once

// Semantics-preserving rewriting toward low-error constraint forms.
//
// Two catalog families of logically equivalent shapes over placeholders X
// and Y: "requires" (X forces Y) and "incompatibility" (X forbids Y). Each
// form carries the share of wrong answers observed when people worked with
// constraints written that way; the plain implication (form 1) had the
// fewest errors in both families, so rewrites always target it. Every
// rewrite is verified by exhaustive evaluation before it is suggested.

#include <optional>
#include <string>
#include <vector>

#include "kb.hpp"

namespace kbtool {

enum class Family { Requires, Incompatibility };

inline const char* family_name(Family f) {
    return f == Family::Requires ? "requires" : "incompatibility";
}

struct CatalogForm {
    Family family;
    int index;           // 1..5 within the family
    const char* schema;  // shape in constraint syntax
    double error_rate;   // observed share of wrong answers, percent
};

inline const std::vector<CatalogForm>& form_catalog() {
    static const std::vector<CatalogForm> forms = {
        {Family::Requires, 1, "X -> Y", 21.43},
        {Family::Requires, 2, "not X or Y", 50.0},
        {Family::Requires, 3, "not Y -> not X", 96.43},
        {Family::Requires, 4, "not (X and not Y)", 73.08},
        {Family::Requires, 5, "Y <- X", 25.0},
        {Family::Incompatibility, 1, "X -> not Y", 14.29},
        {Family::Incompatibility, 2, "not X or not Y", 34.62},
        {Family::Incompatibility, 3, "Y -> not X", 50.0},
        {Family::Incompatibility, 4, "not (X and Y)", 42.31},
        {Family::Incompatibility, 5, "not Y <- X", 16.67},
    };
    return forms;
}

inline const CatalogForm& form(Family family, int index) {
    for (const auto& f : form_catalog())
        if (f.family == family && f.index == index) return f;
    throw Error("no catalog form with index " + std::to_string(index));
}

inline double score(Family family, int index) { return form(family, index).error_rate; }

// ======================= classification =======================

struct FormMatch {
    Family family;
    int index;
    ExprPtr x, y;
};

namespace detail {

// Placeholders bind whole subtrees that are not themselves negations; the
// catalog spells every negation out, which keeps rewritten output stable
// under re-classification.
inline bool bindable(const ExprPtr& e) { return !std::holds_alternative<Not>(e->node); }

inline const ExprPtr* negated_child(const ExprPtr& e) {
    if (const auto* n = std::get_if<Not>(&e->node)) return &n->child;
    return nullptr;
}

}  // namespace detail

// Structural match against the form catalog; the first matching form wins.
// An implication with a negated consequent is an incompatibility, never a
// requires form with a negated Y. Form 3 of the incompatibility family is
// form 1 with the placeholders swapped, so instances of it report index 1.
inline std::optional<FormMatch> classify(const Expr& e) {
    using detail::bindable;
    using detail::negated_child;

    if (const auto* imp = std::get_if<Implies>(&e.node)) {
        const ExprPtr* la = negated_child(imp->lhs);
        const ExprPtr* rb = negated_child(imp->rhs);
        if (la && rb) {
            if (bindable(*la) && bindable(*rb)) return FormMatch{Family::Requires, 3, *rb, *la};
            return std::nullopt;
        }
        if (rb) {
            if (bindable(imp->lhs) && bindable(*rb))
                return FormMatch{Family::Incompatibility, 1, imp->lhs, *rb};
            return std::nullopt;
        }
        if (la) return std::nullopt;
        if (bindable(imp->lhs) && bindable(imp->rhs))
            return FormMatch{Family::Requires, 1, imp->lhs, imp->rhs};
        return std::nullopt;
    }

    if (const auto* o = std::get_if<Or>(&e.node)) {
        const ExprPtr* la = negated_child(o->lhs);
        const ExprPtr* rb = negated_child(o->rhs);
        if (la && rb) {
            if (bindable(*la) && bindable(*rb)) return FormMatch{Family::Incompatibility, 2, *la, *rb};
            return std::nullopt;
        }
        if (la && bindable(*la) && bindable(o->rhs)) return FormMatch{Family::Requires, 2, *la, o->rhs};
        return std::nullopt;
    }

    if (const auto* n = std::get_if<Not>(&e.node)) {
        const auto* a = std::get_if<And>(&n->child->node);
        if (!a) return std::nullopt;
        const ExprPtr* rb = negated_child(a->rhs);
        if (rb) {
            if (bindable(a->lhs) && bindable(*rb)) return FormMatch{Family::Requires, 4, a->lhs, *rb};
            return std::nullopt;
        }
        if (bindable(a->lhs) && bindable(a->rhs))
            return FormMatch{Family::Incompatibility, 4, a->lhs, a->rhs};
        return std::nullopt;
    }

    if (const auto* ib = std::get_if<ImpliedBy>(&e.node)) {
        const ExprPtr* ly = negated_child(ib->lhs);
        if (ly) {
            if (bindable(*ly) && bindable(ib->rhs))
                return FormMatch{Family::Incompatibility, 5, ib->rhs, *ly};
            return std::nullopt;
        }
        if (bindable(ib->lhs) && bindable(ib->rhs))
            return FormMatch{Family::Requires, 5, ib->rhs, ib->lhs};
        return std::nullopt;
    }

    return std::nullopt;
}

inline std::optional<FormMatch> classify(const Constraint& c) { return classify(*c.expr); }

// Form 1 of the match's family with the same placeholder bindings.
inline ExprPtr rewrite_to_form1(const FormMatch& m) {
    if (m.family == Family::Requires) return implies(m.x, m.y);
    return implies(m.x, neg(m.y));
}

// ======================= equivalence checking =======================

constexpr long long kDefaultEquivalenceBound = 1'000'000;

// Exhaustive comparison of two expressions over the domains of every
// variable either of them references.
inline bool check_equivalence(const KnowledgeBase& kb, const Expr& a, const Expr& b,
                              long long max_assignments = kDefaultEquivalenceBound) {
    std::vector<const Variable*> vars;
    for (const auto& v : kb.variables()) {
        bool used = false;
        for (const auto& name : referenced_variables(a))
            if (name == v.name) { used = true; break; }
        if (!used)
            for (const auto& name : referenced_variables(b))
                if (name == v.name) { used = true; break; }
        if (used) vars.push_back(&v);
    }
    for (const auto& name : referenced_variables(a))
        if (!kb.find_variable(name)) throw UnboundVariableError(name);
    for (const auto& name : referenced_variables(b))
        if (!kb.find_variable(name)) throw UnboundVariableError(name);

    long long states = 1;
    for (const auto* v : vars) {
        states *= static_cast<long long>(v->domain.size());
        if (states > max_assignments)
            throw StateSpaceError("equivalence check needs more than " +
                                  std::to_string(max_assignments) + " assignments");
    }

    Assignment assignment;
    std::vector<size_t> odometer(vars.size(), 0);
    for (const auto* v : vars) assignment[v->name] = v->domain.front();
    while (true) {
        if (evaluate(a, assignment) != evaluate(b, assignment)) return false;
        size_t i = 0;
        for (; i < vars.size(); ++i) {
            if (++odometer[i] < vars[i]->domain.size()) {
                assignment[vars[i]->name] = vars[i]->domain[odometer[i]];
                break;
            }
            odometer[i] = 0;
            assignment[vars[i]->name] = vars[i]->domain.front();
        }
        if (i == vars.size()) break;
    }
    return true;
}

// ======================= recommendations =======================

struct RefactoringSuggestion {
    std::string constraint_id;
    Family family = Family::Requires;
    int matched_index = 0;
    ExprPtr rewritten;
    double score_delta = 0.0;  // matched form's error rate minus form 1's

    bool operator==(const RefactoringSuggestion& o) const {
        return constraint_id == o.constraint_id && family == o.family &&
               matched_index == o.matched_index && equal(rewritten, o.rewritten) &&
               score_delta == o.score_delta;
    }
};

// None when the constraint matches no catalog form or is already form 1.
// The returned rewrite has passed check_equivalence against the original.
inline std::optional<RefactoringSuggestion> recommend(const KnowledgeBase& kb, const Constraint& c,
                                                      long long max_assignments = kDefaultEquivalenceBound) {
    auto m = classify(c);
    if (!m || m->index == 1) return std::nullopt;
    ExprPtr rewritten = rewrite_to_form1(*m);
    if (!check_equivalence(kb, *c.expr, *rewritten, max_assignments))
        throw Error("rewrite of " + c.id + " failed the equivalence check");
    return RefactoringSuggestion{c.id, m->family, m->index, std::move(rewritten),
                                 score(m->family, m->index) - score(m->family, 1)};
}

struct RefactorSkip {
    std::string constraint_id;
    std::string reason;
};

struct RefactorOutcome {
    KnowledgeBase kb;
    std::vector<RefactoringSuggestion> suggestions;  // applied rewrites
    std::vector<RefactorSkip> skipped;               // verification could not run
};

// Applies every verified suggestion; everything else is carried over
// unchanged. The result accepts exactly the assignments the input does.
inline RefactorOutcome refactor_kb(const KnowledgeBase& kb,
                                   long long max_assignments = kDefaultEquivalenceBound) {
    RefactorOutcome out;
    for (const auto& v : kb.variables()) out.kb.add_variable(v);
    for (const auto& c : kb.constraints()) {
        std::optional<RefactoringSuggestion> s;
        try {
            s = recommend(kb, c, max_assignments);
        } catch (const Error& e) {
            out.skipped.push_back({c.id, e.what()});
        }
        if (s) {
            out.kb.add_constraint(c.id, s->rewritten);
            out.suggestions.push_back(std::move(*s));
        } else {
            out.kb.add_constraint(c.id, c.expr);
        }
    }
    return out;
}

}  // namespace kbtool
