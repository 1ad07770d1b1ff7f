#pragma once

// JSON forms of the result types, round-trippable via nlohmann::json.
// Expressions travel as constraint-syntax text and are re-parsed on the
// way back in.

#include <json.hpp>

#include "clustering.hpp"
#include "parser.hpp"
#include "recommend.hpp"
#include "refactoring.hpp"
#include "similarity.hpp"

namespace kbtool {

inline void to_json(nlohmann::json& j, const SimilarityMatrix& m) {
    j = nlohmann::json{{"metric", metric_name(m.metric)}, {"ids", m.ids}, {"values", m.values}};
}

inline void from_json(const nlohmann::json& j, SimilarityMatrix& m) {
    auto metric = metric_from_name(j.at("metric").get<std::string>());
    if (!metric) throw Error("unknown metric: " + j.at("metric").get<std::string>());
    m.metric = *metric;
    j.at("ids").get_to(m.ids);
    j.at("values").get_to(m.values);
}

inline void to_json(nlohmann::json& j, const ClusterIteration& it) {
    j = nlohmann::json{{"centroids", it.centroids}, {"assignment", it.assignment}};
}

inline void from_json(const nlohmann::json& j, ClusterIteration& it) {
    j.at("centroids").get_to(it.centroids);
    j.at("assignment").get_to(it.assignment);
}

inline void to_json(nlohmann::json& j, const Clustering& c) {
    j = nlohmann::json{{"k", c.k},
                       {"assignment", c.assignment},
                       {"centroids", c.centroids},
                       {"iterations", c.iterations},
                       {"trace", c.trace}};
}

inline void from_json(const nlohmann::json& j, Clustering& c) {
    j.at("k").get_to(c.k);
    j.at("assignment").get_to(c.assignment);
    j.at("centroids").get_to(c.centroids);
    j.at("iterations").get_to(c.iterations);
    j.at("trace").get_to(c.trace);
}

inline void to_json(nlohmann::json& j, const Neighbor& n) {
    j = nlohmann::json{{"user", n.user}, {"distance", n.distance}};
}

inline void from_json(const nlohmann::json& j, Neighbor& n) {
    j.at("user").get_to(n.user);
    j.at("distance").get_to(n.distance);
}

inline void to_json(nlohmann::json& j, const Recommendation& r) {
    j = nlohmann::json{{"constraint", r.constraint},
                       {"neighbors", r.neighbors},
                       {"votes", r.votes},
                       {"voters", r.voters}};
}

inline void from_json(const nlohmann::json& j, Recommendation& r) {
    j.at("constraint").get_to(r.constraint);
    j.at("neighbors").get_to(r.neighbors);
    j.at("votes").get_to(r.votes);
    j.at("voters").get_to(r.voters);
}

inline void to_json(nlohmann::json& j, const RefactoringSuggestion& s) {
    j = nlohmann::json{{"constraint", s.constraint_id},
                       {"family", family_name(s.family)},
                       {"matched_form", s.matched_index},
                       {"rewritten", expr_text(s.rewritten)},
                       {"score_delta", s.score_delta}};
}

inline void from_json(const nlohmann::json& j, RefactoringSuggestion& s) {
    j.at("constraint").get_to(s.constraint_id);
    std::string family = j.at("family").get<std::string>();
    if (family == family_name(Family::Requires)) s.family = Family::Requires;
    else if (family == family_name(Family::Incompatibility)) s.family = Family::Incompatibility;
    else throw Error("unknown form family: " + family);
    j.at("matched_form").get_to(s.matched_index);
    s.rewritten = parse_expr(j.at("rewritten").get<std::string>());
    j.at("score_delta").get_to(s.score_delta);
}

}  // namespace kbtool
