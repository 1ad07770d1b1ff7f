#pragma once

// Constraint-to-constraint similarity.
//
// The variable metric scores two constraints by the variables they touch:
// a variable occurring in both at the same position counts 1, at different
// positions 0.5, otherwise 0; the sum is normalized by the size of the
// union of the referenced variable sets. Positions come from
// variable_occurrences (first occurrence in reading order).
//
// The operator metric is multiset Jaccard over the operator tags of the two
// expressions.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kb.hpp"

namespace kbtool {

enum class Metric { Variable, Operator };

inline const char* metric_name(Metric m) {
    return m == Metric::Variable ? "variable" : "operator";
}

inline std::optional<Metric> metric_from_name(std::string_view name) {
    if (name == "variable") return Metric::Variable;
    if (name == "operator") return Metric::Operator;
    return std::nullopt;
}

namespace detail {

inline std::optional<int> position_of(const std::vector<std::pair<std::string, int>>& occ,
                                      std::string_view name) {
    for (const auto& [var, pos] : occ)
        if (var == name) return pos;
    return std::nullopt;
}

}  // namespace detail

inline double co_occurrence(std::string_view var, const Constraint& a, const Constraint& b) {
    auto pa = detail::position_of(variable_occurrences(a), var);
    auto pb = detail::position_of(variable_occurrences(b), var);
    if (!pa || !pb) return 0.0;
    return *pa == *pb ? 1.0 : 0.5;
}

inline double variable_similarity(const Constraint& a, const Constraint& b) {
    auto occ_a = variable_occurrences(a);
    auto occ_b = variable_occurrences(b);
    std::vector<std::string> joint;
    for (const auto& [var, pos] : occ_a) joint.push_back(var);
    for (const auto& [var, pos] : occ_b)
        if (!detail::position_of(occ_a, var)) joint.push_back(var);
    if (joint.empty()) throw UndefinedSimilarityError("similarity undefined: no variables referenced");

    double sum = 0.0;
    for (const auto& var : joint) {
        auto pa = detail::position_of(occ_a, var);
        auto pb = detail::position_of(occ_b, var);
        if (pa && pb) sum += (*pa == *pb) ? 1.0 : 0.5;
    }
    return sum / static_cast<double>(joint.size());
}

inline double operator_similarity(const Constraint& a, const Constraint& b) {
    OperatorMultiset ma = operator_multiset(a);
    OperatorMultiset mb = operator_multiset(b);
    int min_sum = 0, max_sum = 0;
    auto ia = ma.begin();
    auto ib = mb.begin();
    while (ia != ma.end() || ib != mb.end()) {
        if (ib == mb.end() || (ia != ma.end() && ia->first < ib->first)) {
            max_sum += ia->second;
            ++ia;
        } else if (ia == ma.end() || ib->first < ia->first) {
            max_sum += ib->second;
            ++ib;
        } else {
            min_sum += std::min(ia->second, ib->second);
            max_sum += std::max(ia->second, ib->second);
            ++ia;
            ++ib;
        }
    }
    // expressions always carry at least one comparison operator
    if (max_sum == 0) return 1.0;
    return static_cast<double>(min_sum) / static_cast<double>(max_sum);
}

inline double similarity(Metric metric, const Constraint& a, const Constraint& b) {
    return metric == Metric::Variable ? variable_similarity(a, b) : operator_similarity(a, b);
}

// ======================= matrices =======================

struct SimilarityMatrix {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> values;  // square, symmetric
    Metric metric = Metric::Variable;

    int size() const { return static_cast<int>(ids.size()); }

    int index_of(std::string_view id) const {
        for (size_t i = 0; i < ids.size(); ++i)
            if (ids[i] == id) return static_cast<int>(i);
        return -1;
    }

    double at(int i, int j) const { return values[i][j]; }

    double at(std::string_view a, std::string_view b) const {
        int i = index_of(a), j = index_of(b);
        if (i < 0 || j < 0) throw Error("unknown constraint id in similarity lookup");
        return values[i][j];
    }
};

inline SimilarityMatrix similarity_matrix(const KnowledgeBase& kb, Metric metric) {
    SimilarityMatrix m;
    m.metric = metric;
    const auto& cs = kb.constraints();
    size_t n = cs.size();
    for (const auto& c : cs) m.ids.push_back(c.id);
    m.values.assign(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
        m.values[i][i] = similarity(metric, cs[i], cs[i]);
        for (size_t j = 0; j < i; ++j) {
            double s = similarity(metric, cs[i], cs[j]);
            m.values[i][j] = s;
            m.values[j][i] = s;
        }
    }
    return m;
}

// Truncation used for display: floor to two decimals (0.375 -> 0.37).
inline double truncate2(double v) { return std::floor(v * 100.0 + 1e-9) / 100.0; }

namespace detail {

// shortest decimal form that parses back to the same double
inline std::string double_text(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace detail

inline std::string matrix_to_csv(const SimilarityMatrix& m, bool truncated = false) {
    std::ostringstream os;
    os << "id";
    for (const auto& id : m.ids) os << ',' << id;
    os << '\n';
    for (int i = 0; i < m.size(); ++i) {
        os << m.ids[i];
        for (int j = 0; j < m.size(); ++j)
            os << ',' << detail::double_text(truncated ? truncate2(m.at(i, j)) : m.at(i, j));
        os << '\n';
    }
    return os.str();
}

// Reads the matrix_to_csv layout back. Checks shape, symmetry, unit
// diagonal and the [0,1] range; the metric tag defaults to variable.
inline SimilarityMatrix matrix_from_csv(std::string_view source) {
    SimilarityMatrix m;
    std::vector<std::vector<std::string>> rows;
    size_t pos = 0;
    while (pos <= source.size()) {
        size_t eol = source.find('\n', pos);
        std::string_view line =
            source.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? source.size() + 1 : eol + 1;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t fpos = 0;
        while (true) {
            size_t comma = line.find(',', fpos);
            std::string_view f =
                line.substr(fpos, comma == std::string_view::npos ? std::string_view::npos : comma - fpos);
            fields.emplace_back(f);
            if (comma == std::string_view::npos) break;
            fpos = comma + 1;
        }
        rows.push_back(std::move(fields));
    }

    if (rows.empty()) throw Error("similarity matrix: empty input");
    const auto& header = rows.front();
    if (header.size() < 2) throw Error("similarity matrix: header must list constraint ids");
    for (size_t j = 1; j < header.size(); ++j) {
        if (header[j].empty()) throw Error("similarity matrix: empty id in header");
        for (size_t k = 1; k < j; ++k)
            if (header[k] == header[j]) throw Error("similarity matrix: duplicate id " + header[j]);
        m.ids.push_back(header[j]);
    }
    size_t n = m.ids.size();
    if (rows.size() != n + 1) throw Error("similarity matrix: expected one row per id");
    m.values.assign(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
        const auto& row = rows[i + 1];
        if (row.size() != n + 1) throw Error("similarity matrix: row width mismatch");
        if (row[0] != m.ids[i]) throw Error("similarity matrix: row label " + row[0] + " out of order");
        for (size_t j = 0; j < n; ++j) {
            const std::string& f = row[j + 1];
            char* end = nullptr;
            double v = std::strtod(f.c_str(), &end);
            if (f.empty() || end != f.c_str() + f.size())
                throw Error("similarity matrix: bad number '" + f + "'");
            if (v < -1e-9 || v > 1.0 + 1e-9) throw Error("similarity matrix: value out of [0,1]");
            m.values[i][j] = v;
        }
    }
    for (size_t i = 0; i < n; ++i) {
        if (std::abs(m.values[i][i] - 1.0) > 1e-9)
            throw Error("similarity matrix: diagonal must be 1");
        for (size_t j = 0; j < i; ++j)
            if (std::abs(m.values[i][j] - m.values[j][i]) > 1e-9)
                throw Error("similarity matrix: not symmetric");
    }
    return m;
}

}  // namespace kbtool
