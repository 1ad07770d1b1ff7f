#pragma once

// Next-constraint recommendation from navigation logs. The current session
// implies ranks (i-th visited constraint has rank i); users are compared by
// Manhattan distance over the visited constraints, a missing rank costs
// |C|+1. The k nearest users each vote for the constraint they analyzed at
// step |visited|+1, skipping anything the session already covered; the
// plurality wins.

#include <algorithm>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "navigation.hpp"

namespace kbtool {

constexpr int kDefaultNeighbors = 3;

struct SessionState {
    std::vector<std::string> visited;  // visit order, no duplicates

    bool has_visited(std::string_view id) const {
        for (const auto& v : visited)
            if (v == id) return true;
        return false;
    }
};

inline SessionState make_session(std::vector<std::string> visited) {
    for (size_t i = 0; i < visited.size(); ++i)
        for (size_t j = 0; j < i; ++j)
            if (visited[i] == visited[j]) throw Error("constraint visited twice: " + visited[i]);
    return SessionState{std::move(visited)};
}

inline double neighbor_distance(const NavigationLog& log, const SessionState& session, int user) {
    if (session.visited.empty()) throw Error("empty session");
    auto it = log.users.find(user);
    if (it == log.users.end()) throw Error("unknown user: " + std::to_string(user));
    const auto& ranks = it->second;

    double penalty = log.constraint_count() + 1;
    double total = 0.0;
    for (size_t i = 0; i < session.visited.size(); ++i) {
        int implied = static_cast<int>(i) + 1;
        auto r = ranks.find(session.visited[i]);
        if (r == ranks.end()) total += penalty;
        else total += std::abs(r->second - implied);
    }
    return total;
}

struct Neighbor {
    int user = 0;
    double distance = 0.0;

    bool operator==(const Neighbor& o) const { return user == o.user && distance == o.distance; }
};

inline std::vector<Neighbor> nearest_neighbors(const NavigationLog& log, const SessionState& session,
                                               int k) {
    if (k < 1) throw Error("k must be at least 1");
    if (log.empty()) throw Error("empty navigation log");
    std::vector<Neighbor> all;
    for (const auto& [user, ranks] : log.users)
        all.push_back({user, neighbor_distance(log, session, user)});
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.user < b.user;
    });
    if (static_cast<int>(all.size()) > k) all.resize(k);
    return all;
}

struct Recommendation {
    std::string constraint;
    std::vector<Neighbor> neighbors;          // consulted, ascending distance
    std::map<std::string, int> votes;         // candidate -> vote count
    std::map<std::string, std::vector<int>> voters;  // candidate -> voting users

    bool operator==(const Recommendation& o) const {
        return constraint == o.constraint && neighbors == o.neighbors && votes == o.votes &&
               voters == o.voters;
    }
};

inline Recommendation recommend_next(const NavigationLog& log, const SessionState& session,
                                     int k = kDefaultNeighbors) {
    if (session.visited.empty()) throw Error("empty session");
    for (size_t i = 0; i < session.visited.size(); ++i)
        for (size_t j = 0; j < i; ++j)
            if (session.visited[i] == session.visited[j])
                throw Error("constraint visited twice: " + session.visited[i]);

    Recommendation rec;
    rec.neighbors = nearest_neighbors(log, session, k);
    size_t p = session.visited.size() + 1;

    for (const auto& n : rec.neighbors) {
        std::vector<std::pair<int, std::string>> by_rank;
        for (const auto& [cid, rank] : log.users.at(n.user)) by_rank.emplace_back(rank, cid);
        std::sort(by_rank.begin(), by_rank.end());
        // start at the neighbor's step p; move on past anything already visited
        for (size_t i = p - 1; i < by_rank.size(); ++i) {
            if (session.has_visited(by_rank[i].second)) continue;
            rec.votes[by_rank[i].second] += 1;
            rec.voters[by_rank[i].second].push_back(n.user);
            break;
        }
    }

    if (rec.votes.empty()) throw Error("no candidates: every ranked constraint was already visited");

    auto distance_of = [&](int user) {
        for (const auto& n : rec.neighbors)
            if (n.user == user) return n.distance;
        return 0.0;
    };
    auto order_of = [&](const std::string& id) {
        for (size_t i = 0; i < log.constraint_order.size(); ++i)
            if (log.constraint_order[i] == id) return i;
        return log.constraint_order.size();
    };

    std::string best;
    int best_votes = 0;
    double best_dist = 0.0;
    for (const auto& [cid, count] : rec.votes) {
        double dist = 0.0;
        for (int user : rec.voters.at(cid)) dist += distance_of(user);
        bool take = false;
        if (best.empty() || count > best_votes) take = true;
        else if (count == best_votes && dist < best_dist) take = true;
        else if (count == best_votes && dist == best_dist && order_of(cid) < order_of(best)) take = true;
        if (take) {
            best = cid;
            best_votes = count;
            best_dist = dist;
        }
    }
    rec.constraint = best;
    return rec;
}

}  // namespace kbtool
