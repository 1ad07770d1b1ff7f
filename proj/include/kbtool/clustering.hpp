#pragma once

// Medoid-style k-means over a constraint similarity matrix. Centroids are
// constraints; a constraint joins the centroid it is most similar to, and
// each cluster's centroid is recomputed as the member with the highest
// summed similarity to the other members. Deterministic tie-breaking
// throughout, so a run is reproducible from its inputs.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "similarity.hpp"

namespace kbtool {

struct ClusterIteration {
    std::vector<std::string> centroids;  // in effect during this assignment pass
    std::map<std::string, int> assignment;
};

struct Clustering {
    int k = 0;
    std::map<std::string, int> assignment;  // constraint id -> cluster index
    std::vector<std::string> centroids;     // empty for random baselines
    std::vector<ClusterIteration> trace;
    int iterations = 0;

    std::vector<std::vector<std::string>> groups(const std::vector<std::string>& id_order) const {
        std::vector<std::vector<std::string>> out(k);
        for (const auto& id : id_order) {
            auto it = assignment.find(id);
            if (it != assignment.end()) out[it->second].push_back(id);
        }
        return out;
    }
};

namespace detail {

constexpr double kSimTie = 1e-9;

inline uint64_t bounded_rand(std::mt19937_64& rng, uint64_t n) { return rng() % n; }

}  // namespace detail

// One assignment pass. A centroid always lands in its own cluster; other
// constraints pick the most similar centroid, resolving ties in favour of
// the cluster they were in before, then the lower cluster index.
inline std::map<std::string, int> assign_to_centroids(const SimilarityMatrix& m,
                                                      const std::vector<std::string>& centroids,
                                                      const std::map<std::string, int>* previous = nullptr) {
    std::vector<int> centroid_idx;
    for (const auto& id : centroids) {
        int idx = m.index_of(id);
        if (idx < 0) throw Error("unknown centroid id: " + id);
        centroid_idx.push_back(idx);
    }

    std::map<std::string, int> out;
    for (int i = 0; i < m.size(); ++i) {
        const std::string& id = m.ids[i];
        int pinned = -1;
        for (size_t c = 0; c < centroid_idx.size(); ++c)
            if (centroid_idx[c] == i) { pinned = static_cast<int>(c); break; }
        if (pinned >= 0) {
            out[id] = pinned;
            continue;
        }

        int prev_cluster = -1;
        if (previous) {
            auto it = previous->find(id);
            if (it != previous->end()) prev_cluster = it->second;
        }

        int best = 0;
        double best_sim = m.at(i, centroid_idx[0]);
        for (size_t c = 1; c < centroid_idx.size(); ++c) {
            double s = m.at(i, centroid_idx[c]);
            if (s > best_sim + detail::kSimTie) {
                best = static_cast<int>(c);
                best_sim = s;
            } else if (s >= best_sim - detail::kSimTie &&
                       static_cast<int>(c) == prev_cluster && best != prev_cluster) {
                best = static_cast<int>(c);
                best_sim = s;
            }
        }
        out[id] = best;
    }
    return out;
}

// Member with the highest summed similarity to the other members. Ties keep
// the current centroid if it is among the best, otherwise take the member
// earliest in matrix order.
inline std::string recompute_centroid(const SimilarityMatrix& m,
                                      const std::vector<std::string>& members,
                                      const std::string& current) {
    if (members.empty()) throw Error("internal: cluster has no members");
    std::string best;
    double best_sum = 0.0;
    for (const auto& cand : m.ids) {
        bool is_member = false;
        for (const auto& id : members)
            if (id == cand) { is_member = true; break; }
        if (!is_member) continue;

        double sum = 0.0;
        for (const auto& other : members)
            if (other != cand) sum += m.at(cand, other);

        if (best.empty() || sum > best_sum + detail::kSimTie) {
            best = cand;
            best_sum = sum;
        } else if (sum >= best_sum - detail::kSimTie && cand == current && best != current) {
            best = cand;
            best_sum = sum;
        }
    }
    return best;
}

// Sum over constraints of similarity to their centroid; non-decreasing
// across iterations.
inline double clustering_objective(const SimilarityMatrix& m,
                                   const std::map<std::string, int>& assignment,
                                   const std::vector<std::string>& centroids) {
    double sum = 0.0;
    for (const auto& [id, cluster] : assignment) sum += m.at(id, centroids[cluster]);
    return sum;
}

inline Clustering kmeans(const SimilarityMatrix& m, int k, std::vector<std::string> init) {
    if (k < 1) throw Error("k must be at least 1");
    if (k > m.size()) throw Error("k exceeds the number of constraints");
    if (static_cast<int>(init.size()) != k) throw Error("expected exactly k initial centroids");
    for (size_t i = 0; i < init.size(); ++i) {
        if (m.index_of(init[i]) < 0) throw Error("unknown centroid id: " + init[i]);
        for (size_t j = 0; j < i; ++j)
            if (init[i] == init[j]) throw Error("duplicate centroid id: " + init[i]);
    }

    Clustering result;
    result.k = k;
    std::vector<std::string> centroids = std::move(init);
    std::map<std::string, int> assignment;

    const int iteration_cap = 10000;
    for (int iter = 0; iter < iteration_cap; ++iter) {
        assignment = assign_to_centroids(m, centroids, iter == 0 ? nullptr : &assignment);
        result.trace.push_back({centroids, assignment});

        std::vector<std::vector<std::string>> members(k);
        for (const auto& id : m.ids) members[assignment.at(id)].push_back(id);
        for (int c = 0; c < k; ++c)
            if (members[c].empty()) throw Error("internal: empty cluster");

        std::vector<std::string> next;
        for (int c = 0; c < k; ++c) next.push_back(recompute_centroid(m, members[c], centroids[c]));

        if (next == centroids) break;
        centroids = std::move(next);
    }

    result.assignment = std::move(assignment);
    result.centroids = std::move(centroids);
    result.iterations = static_cast<int>(result.trace.size());
    return result;
}

// Seeded variant: draws k distinct constraints as initial centroids.
inline Clustering kmeans(const SimilarityMatrix& m, int k, uint64_t seed) {
    if (k < 1) throw Error("k must be at least 1");
    if (k > m.size()) throw Error("k exceeds the number of constraints");
    std::mt19937_64 rng(seed);
    std::vector<int> indices(m.ids.size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
    std::vector<std::string> init;
    for (int c = 0; c < k; ++c) {
        size_t pick = c + detail::bounded_rand(rng, indices.size() - c);
        std::swap(indices[c], indices[pick]);
        init.push_back(m.ids[indices[c]]);
    }
    return kmeans(m, k, std::move(init));
}

// Uniform random partition baseline; every cluster gets at least one
// constraint, repeat runs with one seed agree.
inline Clustering random_clustering(const std::vector<std::string>& ids, int k, uint64_t seed) {
    if (k < 1) throw Error("k must be at least 1");
    if (k > static_cast<int>(ids.size())) throw Error("k exceeds the number of constraints");
    std::mt19937_64 rng(seed);

    std::vector<int> indices(ids.size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
    for (size_t i = 0; i + 1 < indices.size(); ++i) {
        size_t pick = i + detail::bounded_rand(rng, indices.size() - i);
        std::swap(indices[i], indices[pick]);
    }

    Clustering result;
    result.k = k;
    for (int c = 0; c < k; ++c) result.assignment[ids[indices[c]]] = c;
    for (size_t i = k; i < indices.size(); ++i)
        result.assignment[ids[indices[i]]] = static_cast<int>(detail::bounded_rand(rng, k));
    return result;
}

inline Clustering random_clustering(const KnowledgeBase& kb, int k, uint64_t seed) {
    std::vector<std::string> ids;
    for (const auto& c : kb.constraints()) ids.push_back(c.id);
    return random_clustering(ids, k, seed);
}

// Observed task error rates per grouping strategy, for display alongside
// cluster reports: share of wrong answers when participants solved a
// find-a-solution and a find-a-conflict task on knowledge bases grouped by
// that strategy.
struct StrategyErrorRates {
    const char* strategy;
    double solution_task_error;
    double conflict_task_error;
};

inline const std::vector<StrategyErrorRates>& strategy_error_rates() {
    static const std::vector<StrategyErrorRates> rates = {
        {"variable", 21.43, 42.86},
        {"operator", 30.77, 53.85},
        {"random", 38.46, 76.92},
    };
    return rates;
}

}  // namespace kbtool
