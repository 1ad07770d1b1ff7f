#pragma once

// Core model for constraint knowledge bases: integer variables over finite
// domains, boolean constraint expressions, and assignments.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace kbtool {

// ======================= errors =======================

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class UnboundVariableError : public Error {
public:
    explicit UnboundVariableError(const std::string& name)
        : Error("unbound variable: " + name), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class UndefinedSimilarityError : public Error {
public:
    using Error::Error;
};

class StateSpaceError : public Error {
public:
    using Error::Error;
};

// ======================= expressions =======================

enum class CmpOp { Eq, Ne, Lt, Gt, Le, Ge };

inline const char* cmp_op_text(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Gt: return ">";
    case CmpOp::Le: return "<=";
    case CmpOp::Ge: return ">=";
    }
    return "?";
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Right-hand side of a comparison: integer literal or another variable.
using Operand = std::variant<int, std::string>;

struct Comparison {
    std::string var;
    CmpOp op;
    Operand rhs;
};

struct Not {
    ExprPtr child;
};
struct And {
    ExprPtr lhs, rhs;
};
struct Or {
    ExprPtr lhs, rhs;
};
struct Implies {
    ExprPtr lhs, rhs;
};
// Reversed implication: ImpliedBy{a, b} is "a <- b", i.e. b implies a.
struct ImpliedBy {
    ExprPtr lhs, rhs;
};

struct Expr {
    std::variant<Comparison, Not, And, Or, Implies, ImpliedBy> node;
};

inline ExprPtr cmp(std::string var, CmpOp op, Operand rhs) {
    return std::make_shared<Expr>(Expr{Comparison{std::move(var), op, std::move(rhs)}});
}
inline ExprPtr neg(ExprPtr e) { return std::make_shared<Expr>(Expr{Not{std::move(e)}}); }
inline ExprPtr conj(ExprPtr l, ExprPtr r) {
    return std::make_shared<Expr>(Expr{And{std::move(l), std::move(r)}});
}
inline ExprPtr disj(ExprPtr l, ExprPtr r) {
    return std::make_shared<Expr>(Expr{Or{std::move(l), std::move(r)}});
}
inline ExprPtr implies(ExprPtr l, ExprPtr r) {
    return std::make_shared<Expr>(Expr{Implies{std::move(l), std::move(r)}});
}
inline ExprPtr implied_by(ExprPtr l, ExprPtr r) {
    return std::make_shared<Expr>(Expr{ImpliedBy{std::move(l), std::move(r)}});
}

inline bool equal(const Expr& a, const Expr& b);

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return equal(*a, *b);
}

inline bool equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, Comparison>) {
                return x.var == y.var && x.op == y.op && x.rhs == y.rhs;
            } else if constexpr (std::is_same_v<T, Not>) {
                return equal(x.child, y.child);
            } else {
                return equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
            }
        },
        a.node);
}

// ======================= variables and constraints =======================

struct Variable {
    std::string name;
    std::vector<int> domain;  // sorted ascending, unique, non-empty

    bool contains(int value) const {
        return std::binary_search(domain.begin(), domain.end(), value);
    }
    bool operator==(const Variable& o) const { return name == o.name && domain == o.domain; }
};

// Normalizes an arbitrary value list into domain form.
inline std::vector<int> make_domain(std::vector<int> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

// Contiguous domain lo..hi inclusive. lo > hi yields an empty list, which
// add_variable rejects.
inline std::vector<int> make_domain(int lo, int hi) {
    std::vector<int> values;
    for (int v = lo; v <= hi; ++v) values.push_back(v);
    return values;
}

struct Constraint {
    std::string id;
    ExprPtr expr;

    bool operator==(const Constraint& o) const { return id == o.id && equal(expr, o.expr); }
};

class KnowledgeBase {
public:
    void add_variable(Variable v) {
        if (v.name.empty()) throw Error("variable name must not be empty");
        if (v.domain.empty()) throw Error("variable " + v.name + " has an empty domain");
        if (!std::is_sorted(v.domain.begin(), v.domain.end()) ||
            std::adjacent_find(v.domain.begin(), v.domain.end()) != v.domain.end())
            throw Error("variable " + v.name + " domain must be sorted and duplicate-free");
        if (find_variable(v.name)) throw Error("duplicate variable: " + v.name);
        variables_.push_back(std::move(v));
    }

    void add_constraint(std::string id, ExprPtr expr) {
        if (id.empty()) throw Error("constraint id must not be empty");
        if (!expr) throw Error("constraint " + id + " has no expression");
        if (find_constraint(id)) throw Error("duplicate constraint: " + id);
        check_references(*expr, id);
        constraints_.push_back(Constraint{std::move(id), std::move(expr)});
    }

    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }

    const Variable* find_variable(std::string_view name) const {
        for (const auto& v : variables_)
            if (v.name == name) return &v;
        return nullptr;
    }
    const Constraint* find_constraint(std::string_view id) const {
        for (const auto& c : constraints_)
            if (c.id == id) return &c;
        return nullptr;
    }
    int variable_index(std::string_view name) const {
        for (size_t i = 0; i < variables_.size(); ++i)
            if (variables_[i].name == name) return static_cast<int>(i);
        return -1;
    }
    int constraint_index(std::string_view id) const {
        for (size_t i = 0; i < constraints_.size(); ++i)
            if (constraints_[i].id == id) return static_cast<int>(i);
        return -1;
    }

    bool operator==(const KnowledgeBase& o) const {
        return variables_ == o.variables_ && constraints_ == o.constraints_;
    }

private:
    void check_references(const Expr& e, const std::string& id) const {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Comparison>) {
                    if (!find_variable(n.var))
                        throw UnboundVariableError(n.var + " (constraint " + id + ")");
                    if (const auto* rv = std::get_if<std::string>(&n.rhs))
                        if (!find_variable(*rv))
                            throw UnboundVariableError(*rv + " (constraint " + id + ")");
                } else if constexpr (std::is_same_v<T, Not>) {
                    check_references(*n.child, id);
                } else {
                    check_references(*n.lhs, id);
                    check_references(*n.rhs, id);
                }
            },
            e.node);
    }

    std::vector<Variable> variables_;
    std::vector<Constraint> constraints_;
};

// ======================= assignments and evaluation =======================

// Ordered map so printed assignments are stable.
using Assignment = std::map<std::string, int>;

// True when every assigned variable exists and its value is in domain.
inline bool assignment_in_domains(const KnowledgeBase& kb, const Assignment& a) {
    for (const auto& [name, value] : a) {
        const Variable* v = kb.find_variable(name);
        if (!v || !v->contains(value)) return false;
    }
    return true;
}

inline int operand_value(const Operand& rhs, const Assignment& a) {
    if (const auto* c = std::get_if<int>(&rhs)) return *c;
    const auto& name = std::get<std::string>(rhs);
    auto it = a.find(name);
    if (it == a.end()) throw UnboundVariableError(name);
    return it->second;
}

inline bool evaluate(const Expr& e, const Assignment& a) {
    return std::visit(
        [&](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Comparison>) {
                auto it = a.find(n.var);
                if (it == a.end()) throw UnboundVariableError(n.var);
                int lhs = it->second;
                int rhs = operand_value(n.rhs, a);
                switch (n.op) {
                case CmpOp::Eq: return lhs == rhs;
                case CmpOp::Ne: return lhs != rhs;
                case CmpOp::Lt: return lhs < rhs;
                case CmpOp::Gt: return lhs > rhs;
                case CmpOp::Le: return lhs <= rhs;
                case CmpOp::Ge: return lhs >= rhs;
                }
                return false;
            } else if constexpr (std::is_same_v<T, Not>) {
                return !evaluate(*n.child, a);
            } else if constexpr (std::is_same_v<T, And>) {
                return evaluate(*n.lhs, a) && evaluate(*n.rhs, a);
            } else if constexpr (std::is_same_v<T, Or>) {
                return evaluate(*n.lhs, a) || evaluate(*n.rhs, a);
            } else if constexpr (std::is_same_v<T, Implies>) {
                return !evaluate(*n.lhs, a) || evaluate(*n.rhs, a);
            } else {  // ImpliedBy: lhs <- rhs
                return evaluate(*n.lhs, a) || !evaluate(*n.rhs, a);
            }
        },
        e.node);
}

inline bool evaluate(const Constraint& c, const Assignment& a) { return evaluate(*c.expr, a); }

// ======================= structural queries =======================

namespace detail {

inline void collect_occurrences(const Expr& e, std::vector<std::string>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Comparison>) {
                out.push_back(n.var);
                if (const auto* rv = std::get_if<std::string>(&n.rhs)) out.push_back(*rv);
            } else if constexpr (std::is_same_v<T, Not>) {
                collect_occurrences(*n.child, out);
            } else {
                collect_occurrences(*n.lhs, out);
                collect_occurrences(*n.rhs, out);
            }
        },
        e.node);
}

}  // namespace detail

// Distinct variables of a constraint with 1-based positions. The position of
// a variable is the index of its first occurrence in the left-to-right
// occurrence sequence; repeat occurrences still advance the index.
inline std::vector<std::pair<std::string, int>> variable_occurrences(const Expr& e) {
    std::vector<std::string> seq;
    detail::collect_occurrences(e, seq);
    std::vector<std::pair<std::string, int>> out;
    for (size_t i = 0; i < seq.size(); ++i) {
        bool seen = false;
        for (const auto& [name, pos] : out)
            if (name == seq[i]) { seen = true; break; }
        if (!seen) out.emplace_back(seq[i], static_cast<int>(i) + 1);
    }
    return out;
}

inline std::vector<std::pair<std::string, int>> variable_occurrences(const Constraint& c) {
    return variable_occurrences(*c.expr);
}

inline std::vector<std::string> referenced_variables(const Expr& e) {
    std::vector<std::string> out;
    for (auto& [name, pos] : variable_occurrences(e)) out.push_back(name);
    return out;
}

enum class OperatorTag { Eq, Ne, Lt, Gt, Le, Ge, Not, And, Or, Implies, ImpliedBy };

inline const char* operator_tag_text(OperatorTag t) {
    switch (t) {
    case OperatorTag::Eq: return "=";
    case OperatorTag::Ne: return "!=";
    case OperatorTag::Lt: return "<";
    case OperatorTag::Gt: return ">";
    case OperatorTag::Le: return "<=";
    case OperatorTag::Ge: return ">=";
    case OperatorTag::Not: return "not";
    case OperatorTag::And: return "and";
    case OperatorTag::Or: return "or";
    case OperatorTag::Implies: return "->";
    case OperatorTag::ImpliedBy: return "<-";
    }
    return "?";
}

inline OperatorTag operator_tag(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return OperatorTag::Eq;
    case CmpOp::Ne: return OperatorTag::Ne;
    case CmpOp::Lt: return OperatorTag::Lt;
    case CmpOp::Gt: return OperatorTag::Gt;
    case CmpOp::Le: return OperatorTag::Le;
    case CmpOp::Ge: return OperatorTag::Ge;
    }
    return OperatorTag::Eq;
}

using OperatorMultiset = std::map<OperatorTag, int>;

inline void collect_operators(const Expr& e, OperatorMultiset& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Comparison>) {
                ++out[operator_tag(n.op)];
            } else if constexpr (std::is_same_v<T, Not>) {
                ++out[OperatorTag::Not];
                collect_operators(*n.child, out);
            } else {
                if constexpr (std::is_same_v<T, And>) ++out[OperatorTag::And];
                if constexpr (std::is_same_v<T, Or>) ++out[OperatorTag::Or];
                if constexpr (std::is_same_v<T, Implies>) ++out[OperatorTag::Implies];
                if constexpr (std::is_same_v<T, ImpliedBy>) ++out[OperatorTag::ImpliedBy];
                collect_operators(*n.lhs, out);
                collect_operators(*n.rhs, out);
            }
        },
        e.node);
}

inline OperatorMultiset operator_multiset(const Expr& e) {
    OperatorMultiset out;
    collect_operators(e, out);
    return out;
}

inline OperatorMultiset operator_multiset(const Constraint& c) { return operator_multiset(*c.expr); }

}  // namespace kbtool
