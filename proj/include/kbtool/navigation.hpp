#pragma once

// Navigation logs record, per user, the order in which constraints were
// analyzed: rank 1 is the constraint visited first. CSV on disk:
//
//   user,constraint,rank
//   1,c5,1
//   1,c2,2

#include <charconv>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kb.hpp"
#include "parser.hpp"

namespace kbtool {

struct NavigationLog {
    // user id -> (constraint id -> rank); ranks are distinct positive
    // integers within a user
    std::map<int, std::map<std::string, int>> users;
    // constraint ids in first-appearance order; doubles as the canonical
    // ordering for tie-breaks
    std::vector<std::string> constraint_order;

    bool empty() const { return users.empty(); }

    int constraint_count() const { return static_cast<int>(constraint_order.size()); }

    bool knows_constraint(std::string_view id) const {
        for (const auto& c : constraint_order)
            if (c == id) return true;
        return false;
    }

    void note_constraint(const std::string& id) {
        if (!knows_constraint(id)) constraint_order.push_back(id);
    }

    void add_visit(int user, const std::string& constraint, int rank) {
        auto& ranks = users[user];
        if (ranks.count(constraint)) throw Error("duplicate constraint for user");
        for (const auto& [cid, r] : ranks)
            if (r == rank) throw Error("duplicate rank for user");
        ranks[constraint] = rank;
        note_constraint(constraint);
    }

    bool operator==(const NavigationLog& o) const {
        return users == o.users && constraint_order == o.constraint_order;
    }
};

struct NavLogParseResult {
    std::optional<NavigationLog> log;  // engaged iff errors is empty
    std::vector<ParseError> errors;
    std::vector<std::string> warnings;

    bool ok() const { return log.has_value() && errors.empty(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_int_field(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace detail

// Parses the CSV form. Unknown constraint ids are tolerated (logs outlive
// constraint removals) but produce warnings when a knowledge base is given.
inline NavLogParseResult parse_navigation_log(std::string_view source,
                                              const KnowledgeBase* kb = nullptr) {
    NavLogParseResult result;
    NavigationLog log;

    int lineno = 0;
    bool saw_header = false;
    size_t pos = 0;
    while (pos <= source.size()) {
        size_t eol = source.find('\n', pos);
        std::string_view line = source.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                                 : eol - pos);
        pos = eol == std::string_view::npos ? source.size() + 1 : eol + 1;
        ++lineno;
        line = detail::trim(line);
        if (line.empty()) continue;

        std::vector<std::string_view> fields;
        size_t fpos = 0;
        while (true) {
            size_t comma = line.find(',', fpos);
            fields.push_back(detail::trim(line.substr(fpos, comma == std::string_view::npos
                                                                ? std::string_view::npos
                                                                : comma - fpos)));
            if (comma == std::string_view::npos) break;
            fpos = comma + 1;
        }

        if (!saw_header) {
            if (fields.size() != 3 || fields[0] != "user" || fields[1] != "constraint" ||
                fields[2] != "rank") {
                result.errors.push_back({lineno, 1, "expected header 'user,constraint,rank'",
                                         ParseErrorKind::Syntax});
                return result;
            }
            saw_header = true;
            continue;
        }

        if (fields.size() != 3) {
            result.errors.push_back({lineno, 1, "expected 3 fields", ParseErrorKind::Syntax});
            continue;
        }
        int user = 0, rank = 0;
        if (!detail::parse_int_field(fields[0], user)) {
            result.errors.push_back({lineno, 1, "user id must be an integer", ParseErrorKind::Syntax});
            continue;
        }
        std::string constraint(fields[1]);
        if (constraint.empty()) {
            result.errors.push_back({lineno, 1, "empty constraint id", ParseErrorKind::Syntax});
            continue;
        }
        if (!detail::parse_int_field(fields[2], rank) || rank <= 0) {
            result.errors.push_back({lineno, 1, "rank must be a positive integer", ParseErrorKind::Syntax});
            continue;
        }

        auto& ranks = log.users[user];
        if (ranks.count(constraint)) {
            result.errors.push_back({lineno, 1,
                                     "duplicate constraint " + constraint + " for user " +
                                         std::to_string(user),
                                     ParseErrorKind::DuplicateId});
            continue;
        }
        bool rank_taken = false;
        for (const auto& [cid, r] : ranks) {
            if (r == rank) {
                result.errors.push_back({lineno, 1,
                                         "duplicate rank " + std::to_string(rank) + " for user " +
                                             std::to_string(user),
                                         ParseErrorKind::DuplicateId});
                rank_taken = true;
                break;
            }
        }
        if (rank_taken) continue;
        ranks[constraint] = rank;
        log.note_constraint(constraint);
        if (kb && !kb->find_constraint(constraint))
            result.warnings.push_back("line " + std::to_string(lineno) + ": constraint " + constraint +
                                      " is not in the knowledge base");
    }

    if (!saw_header && result.errors.empty())
        result.errors.push_back({1, 1, "expected header 'user,constraint,rank'", ParseErrorKind::Syntax});
    if (result.errors.empty()) result.log = std::move(log);
    return result;
}

inline NavigationLog parse_navigation_log_or_throw(std::string_view source,
                                                   const KnowledgeBase* kb = nullptr) {
    NavLogParseResult r = parse_navigation_log(source, kb);
    if (!r.ok()) throw ParseFailure(std::move(r.errors));
    return std::move(*r.log);
}

// Rows grouped per user (ascending), each user's rows in rank order.
inline std::string serialize_navigation_log(const NavigationLog& log) {
    std::ostringstream os;
    os << "user,constraint,rank\n";
    for (const auto& [user, ranks] : log.users) {
        std::vector<std::pair<int, std::string>> by_rank;
        for (const auto& [cid, rank] : ranks) by_rank.emplace_back(rank, cid);
        std::sort(by_rank.begin(), by_rank.end());
        for (const auto& [rank, cid] : by_rank) os << user << ',' << cid << ',' << rank << '\n';
    }
    return os.str();
}

}  // namespace kbtool
