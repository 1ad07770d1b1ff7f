// Acceptance checks for the toolkit: one line per criterion, PASS or FAIL,
// nonzero exit when anything fails. Tolerances and expected values are
// pinned here, independent of the unit suite.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <kbtool/kbtool.hpp>

#include "support/generators.hpp"
#include "support/oracle.hpp"

namespace {

using Clock = std::chrono::steady_clock;

std::string read_data_file(const std::string& name) {
    std::ifstream in(std::string(KBTOOL_DATA_DIR) + "/" + name, std::ios::binary);
    if (!in) throw kbtool::Error("missing data file: " + name);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Failures {
    std::vector<std::string> items;

    void add(const std::string& what) { items.push_back(what); }
    bool empty() const { return items.empty(); }
};

#define EXPECT(cond, message)                                                                      \
    do {                                                                                           \
        if (!(cond)) fails.add(message);                                                           \
    } while (0)

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// ---------------------------------------------------------------- 1

Failures similarity_reproduction(std::string& note) {
    Failures fails;
    auto kb = kbtool::parse_kb_or_throw(read_data_file("example.ckb"));
    auto reference = kbtool::matrix_from_csv(read_data_file("refsim.csv"));

    auto started = Clock::now();
    auto computed = kbtool::similarity_matrix(kb, kbtool::Metric::Variable);
    double seconds = std::chrono::duration<double>(Clock::now() - started).count();

    EXPECT(computed.ids == reference.ids, "constraint order differs from the reference table");
    int cells = 0, deviations = 0;
    for (int i = 0; i < computed.size(); ++i) {
        EXPECT(computed.at(i, i) == 1.0, "diagonal must be exactly 1");
        for (int j = 0; j < i; ++j) {
            ++cells;
            double got = kbtool::truncate2(computed.at(i, j));
            bool flagged = (computed.ids[i] == "c6" && computed.ids[j] == "c5") ||
                           (computed.ids[i] == "c7" && computed.ids[j] == "c5");
            if (flagged) {
                // The reference table shows 0.12 for these two pairs; the
                // definition yields 0.25 and the engine follows it.
                ++deviations;
                EXPECT(got == 0.25, "flagged cell (" + computed.ids[i] + "," + computed.ids[j] +
                                        ") must be 0.25, got " + fmt(got));
            } else {
                EXPECT(got == reference.at(i, j),
                       "cell (" + computed.ids[i] + "," + computed.ids[j] + ") expected " +
                           fmt(reference.at(i, j)) + ", got " + fmt(got));
            }
        }
    }
    EXPECT(cells == 21, "expected 21 distinct pairs");
    EXPECT(deviations == 2, "expected exactly 2 flagged pairs");
    EXPECT(seconds < 1.0, "matrix computation took " + fmt(seconds) + "s, budget is 1s");
    note = "19 cells match, 2 documented deviations at 0.25, " + fmt(seconds * 1000.0) + " ms";
    return fails;
}

// ---------------------------------------------------------------- 2

Failures clustering_reproduction(std::string& note) {
    Failures fails;
    auto m = kbtool::matrix_from_csv(read_data_file("refsim.csv"));
    auto result = kbtool::kmeans(m, 2, std::vector<std::string>{"c1", "c5"});

    EXPECT(result.iterations == 2, "expected 2 iterations, got " + std::to_string(result.iterations));
    EXPECT(result.trace.size() == 2, "expected a 2-row trace");

    std::map<std::string, int> first{{"c1", 0}, {"c2", 0}, {"c3", 0}, {"c4", 1},
                                     {"c5", 1}, {"c6", 1}, {"c7", 1}};
    std::map<std::string, int> second{{"c1", 0}, {"c2", 0}, {"c3", 0}, {"c4", 0},
                                      {"c5", 1}, {"c6", 1}, {"c7", 0}};
    if (result.trace.size() == 2) {
        EXPECT(result.trace[0].centroids == (std::vector<std::string>{"c1", "c5"}),
               "pass 1 must run on the initial centroids");
        EXPECT(result.trace[0].assignment == first, "pass 1 assignment differs from the reference");
        EXPECT(result.trace[1].centroids == (std::vector<std::string>{"c2", "c5"}),
               "pass 2 must run on centroids c2, c5");
        EXPECT(result.trace[1].assignment == second, "pass 2 assignment differs from the reference");
    }
    EXPECT(result.centroids == (std::vector<std::string>{"c2", "c5"}),
           "final centroids must be c2, c5");
    EXPECT(result.assignment == second, "final assignment differs from the reference");

    auto groups = result.groups(m.ids);
    EXPECT(groups.size() == 2 && groups[0] == (std::vector<std::string>{"c1", "c2", "c3", "c4", "c7"}) &&
               groups[1] == (std::vector<std::string>{"c5", "c6"}),
           "final clusters must be {c1,c2,c3,c4,c7} and {c5,c6}");
    note = "2 iterations, clusters {c1,c2,c3,c4,c7} | {c5,c6}";
    return fails;
}

// ---------------------------------------------------------------- 3

Failures recommendation_reproduction(std::string& note) {
    Failures fails;
    auto log = kbtool::parse_navigation_log_or_throw(read_data_file("navlog.csv"));
    auto session = kbtool::make_session({"c5", "c2"});

    auto d = [&](int user) { return kbtool::neighbor_distance(log, session, user); };
    EXPECT(d(1) == 0.0 && d(2) == 0.0 && d(4) == 0.0, "users 1, 2, 4 must sit at distance 0");
    EXPECT(d(3) == 6.0, "user 3 must sit at distance 6, got " + fmt(d(3)));

    auto rec = kbtool::recommend_next(log, session, 3);
    EXPECT(rec.neighbors.size() == 3, "3 neighbors must be consulted");
    if (rec.neighbors.size() == 3) {
        EXPECT(rec.neighbors[0].user == 1 && rec.neighbors[1].user == 2 && rec.neighbors[2].user == 4,
               "neighbors must be users 1, 2, 4");
    }
    std::map<std::string, int> votes{{"c1", 2}, {"c3", 1}};
    EXPECT(rec.votes == votes, "votes must be c1:2, c3:1");
    EXPECT(rec.constraint == "c1", "recommendation must be c1, got " + rec.constraint);
    note = "neighbors 1,2,4; votes c1:2 c3:1; recommends c1";
    return fails;
}

// ---------------------------------------------------------------- 4

kbtool::ExprPtr instantiate(kbtool::Family family, int index, kbtool::ExprPtr x, kbtool::ExprPtr y) {
    using namespace kbtool;
    if (family == Family::Requires) {
        switch (index) {
        case 1: return implies(x, y);
        case 2: return disj(neg(x), y);
        case 3: return implies(neg(y), neg(x));
        case 4: return neg(conj(x, neg(y)));
        case 5: return implied_by(y, x);
        }
    } else {
        switch (index) {
        case 1: return implies(x, neg(y));
        case 2: return disj(neg(x), neg(y));
        case 3: return implies(y, neg(x));
        case 4: return neg(conj(x, y));
        case 5: return implied_by(neg(y), x);
        }
    }
    throw kbtool::Error("no such form");
}

Failures refactoring_catalog(std::string& note) {
    using kbtool::Family;
    Failures fails;

    // Classification of all ten shapes, with the swapped incompatibility
    // shape reporting index 1.
    auto kb = kbtool::parse_kb_or_throw(read_data_file("forms.ckb"));
    struct Expected {
        const char* id;
        Family family;
        int index;
    };
    const Expected table[] = {
        {"r1", Family::Requires, 1},        {"r2", Family::Requires, 2},
        {"r3", Family::Requires, 3},        {"r4", Family::Requires, 4},
        {"r5", Family::Requires, 5},        {"i1", Family::Incompatibility, 1},
        {"i2", Family::Incompatibility, 2}, {"i3", Family::Incompatibility, 1},
        {"i4", Family::Incompatibility, 4}, {"i5", Family::Incompatibility, 5},
    };
    for (const auto& t : table) {
        auto m = kbtool::classify(*kb.find_constraint(t.id));
        if (!m) {
            fails.add(std::string(t.id) + " failed to classify");
            continue;
        }
        EXPECT(m->family == t.family && m->index == t.index,
               std::string(t.id) + " classified as " + kbtool::family_name(m->family) + " " +
                   std::to_string(m->index));
    }

    // Same-family equivalence for atomic placeholders over three domain
    // sizes; the families never cross.
    int equivalences = 0;
    for (int domain : {2, 3, 5}) {
        kbtool::KnowledgeBase small;
        small.add_variable({"v1", kbtool::make_domain(1, domain)});
        small.add_variable({"v2", kbtool::make_domain(1, domain)});
        auto x = kbtool::cmp("v1", kbtool::CmpOp::Eq, 1);
        auto y = kbtool::cmp("v2", kbtool::CmpOp::Eq, 2);
        for (Family family : {Family::Requires, Family::Incompatibility}) {
            for (int i = 1; i <= 5; ++i)
                for (int j = i + 1; j <= 5; ++j) {
                    ++equivalences;
                    if (!kbtool::check_equivalence(small, *instantiate(family, i, x, y),
                                                   *instantiate(family, j, x, y)))
                        fails.add(std::string(kbtool::family_name(family)) + " forms " +
                                  std::to_string(i) + " and " + std::to_string(j) +
                                  " differ over 1.." + std::to_string(domain));
                }
        }
        if (kbtool::check_equivalence(small, *instantiate(Family::Requires, 1, x, y),
                                      *instantiate(Family::Incompatibility, 1, x, y)))
            fails.add("the two families coincided over 1.." + std::to_string(domain));
    }

    // Error rates pinned to two decimals, exactly.
    const std::pair<double, double> rates[] = {{21.43, 14.29}, {50.0, 34.62}, {96.43, 50.0},
                                               {73.08, 42.31}, {25.0, 16.67}};
    for (int i = 1; i <= 5; ++i) {
        EXPECT(kbtool::score(Family::Requires, i) == rates[i - 1].first,
               "requires form " + std::to_string(i) + " rate drifted");
        EXPECT(kbtool::score(Family::Incompatibility, i) == rates[i - 1].second,
               "incompatibility form " + std::to_string(i) + " rate drifted");
    }

    // Every suggestion lands on form 1 of the same family, never loses
    // score, and passes the model comparison (recommend verifies it).
    int suggestions = 0;
    for (const auto& c : kb.constraints()) {
        auto s = kbtool::recommend(kb, c);
        if (!s) continue;
        ++suggestions;
        auto back = kbtool::classify(*s->rewritten);
        EXPECT(back && back->index == 1 && back->family == s->family,
               c.id + ": rewrite is not form 1 of its family");
        EXPECT(s->score_delta >= 0.0, c.id + ": rewrite would increase the error rate");
    }
    EXPECT(suggestions == 7, "expected 7 rewrites, got " + std::to_string(suggestions));

    note = "10 shapes classified, " + std::to_string(equivalences) +
           " equivalences over domains 2/3/5, 7 rewrites to form 1";
    return fails;
}

// ---------------------------------------------------------------- 5

Failures solver_against_oracle(std::string& note) {
    Failures fails;
    auto started = Clock::now();

    testsupport::Rng rng(0xACCE55);
    int sat_count = 0, unsat_count = 0;
    const int rounds = 500;
    for (int round = 0; round < rounds && fails.items.size() < 5; ++round) {
        testsupport::KbShape shape{};
        switch (round % 25) {
        case 0: shape = testsupport::kShapeDeep; break;
        case 1:
        case 2: shape = testsupport::kShapeWide; break;
        case 3:
        case 4: shape = testsupport::kShapeMid; break;
        case 5: shape = testsupport::kShapeTiny; break;
        default:
            shape = {rng.range(2, 6), rng.range(2, 4), rng.range(1, 12)};
            break;
        }
        auto kb = testsupport::random_kb(shape, rng);
        std::string tag = "model " + std::to_string(round);

        bool oracle_sat = testsupport::oracle::satisfiable(kb);
        auto solution = kbtool::find_solution(kb);
        if (solution.has_value() != oracle_sat) {
            fails.add(tag + ": solver said " + (solution ? "sat" : "unsat") +
                      ", enumeration says the opposite");
            continue;
        }

        if (oracle_sat) {
            ++sat_count;
            if (!kbtool::assignment_in_domains(kb, *solution))
                fails.add(tag + ": solution leaves the domains");
            if (!testsupport::oracle::satisfies_all(kb, *solution))
                fails.add(tag + ": solution does not satisfy every constraint");
        } else {
            ++unsat_count;
            auto conflict = kbtool::minimal_conflict(kb);
            if (!conflict) {
                fails.add(tag + ": no conflict reported for an unsatisfiable model");
                continue;
            }
            std::vector<int> core;
            for (const auto& id : *conflict) core.push_back(kb.constraint_index(id));
            if (testsupport::oracle::satisfiable(kb, core))
                fails.add(tag + ": reported conflict is satisfiable");
            for (size_t drop = 0; drop < core.size(); ++drop) {
                std::vector<int> rest;
                for (size_t i = 0; i < core.size(); ++i)
                    if (i != drop) rest.push_back(core[i]);
                if (!testsupport::oracle::satisfiable(kb, rest)) {
                    fails.add(tag + ": conflict is not minimal, " + (*conflict)[drop] +
                              " is removable");
                    break;
                }
            }
        }
    }

    double seconds = std::chrono::duration<double>(Clock::now() - started).count();
    EXPECT(sat_count + unsat_count == rounds, "not every model was checked");
    EXPECT(sat_count >= 50, "generator produced too few satisfiable models: " +
                                std::to_string(sat_count));
    EXPECT(unsat_count >= 50, "generator produced too few unsatisfiable models: " +
                                  std::to_string(unsat_count));
    EXPECT(seconds < 60.0, "stress run took " + fmt(seconds) + "s, budget is 60s");
    note = std::to_string(rounds) + " models (" + std::to_string(sat_count) + " sat, " +
           std::to_string(unsat_count) + " unsat), " + fmt(seconds) + " s";
    return fails;
}

// ---------------------------------------------------------------- 6

Failures pinned_constants(std::string& note) {
    Failures fails;
    const auto& rates = kbtool::strategy_error_rates();
    EXPECT(rates.size() == 3, "expected 3 grouping strategies");
    auto check = [&](size_t i, const char* name, double solution, double conflict) {
        if (i >= rates.size()) return;
        EXPECT(rates[i].strategy == std::string(name) &&
                   rates[i].solution_task_error == solution &&
                   rates[i].conflict_task_error == conflict,
               std::string(name) + " strategy rates drifted");
    };
    check(0, "variable", 21.43, 42.86);
    check(1, "operator", 30.77, 53.85);
    check(2, "random", 38.46, 76.92);

    // The ten catalog rates, by family and shape index.
    const auto& forms = kbtool::form_catalog();
    EXPECT(forms.size() == 10, "expected 10 catalog forms");
    const double requires_rates[] = {21.43, 50.0, 96.43, 73.08, 25.0};
    const double incompatibility_rates[] = {14.29, 34.62, 50.0, 42.31, 16.67};
    for (int i = 1; i <= 5; ++i) {
        EXPECT(kbtool::score(kbtool::Family::Requires, i) == requires_rates[i - 1],
               "requires rate " + std::to_string(i) + " drifted");
        EXPECT(kbtool::score(kbtool::Family::Incompatibility, i) == incompatibility_rates[i - 1],
               "incompatibility rate " + std::to_string(i) + " drifted");
    }
    note = "3 strategy rate pairs and 10 form rates pinned";
    return fails;
}

// ---------------------------------------------------------------- 7

Failures roundtrip_and_fuzz(std::string& note) {
    Failures fails;

    testsupport::Rng rng(20260816);
    int roundtrips = 0;
    for (int i = 0; i < 1000 && fails.items.size() < 5; ++i) {
        auto kb = testsupport::random_kb_varied(rng);
        auto r = kbtool::parse_kb(kbtool::serialize_kb(kb));
        if (!r.ok()) {
            fails.add("round trip " + std::to_string(i) + " failed to parse");
            continue;
        }
        if (!(kb == *r.kb)) {
            fails.add("round trip " + std::to_string(i) + " changed the model");
            continue;
        }
        ++roundtrips;
    }

    // Fuzzing: outright garbage plus damaged variants of valid inputs. The
    // parsers must return error lists, never crash.
    std::string example = read_data_file("example.ckb");
    std::string log_text = read_data_file("navlog.csv");
    int fuzzed = 0;
    for (int i = 0; i < 700; ++i, ++fuzzed) {
        auto r = kbtool::parse_kb(testsupport::random_garbage(rng));
        if (!r.ok() && r.errors.empty()) fails.add("kb fuzz produced a silent failure");
    }
    for (int i = 0; i < 300; ++i, ++fuzzed) {
        auto r = kbtool::parse_kb(testsupport::mutate_text(example, rng));
        if (!r.ok() && r.errors.empty()) fails.add("kb mutation produced a silent failure");
    }
    for (int i = 0; i < 300; ++i, ++fuzzed) {
        auto r = kbtool::parse_navigation_log(testsupport::mutate_text(log_text, rng));
        if (!r.ok() && r.errors.empty()) fails.add("log mutation produced a silent failure");
    }
    for (int i = 0; i < 200; ++i, ++fuzzed) {
        auto r = kbtool::parse_navigation_log(testsupport::random_garbage(rng));
        if (!r.ok() && r.errors.empty()) fails.add("log fuzz produced a silent failure");
    }

    note = std::to_string(roundtrips) + " round trips, " + std::to_string(fuzzed) +
           " fuzz inputs survived";
    return fails;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Failures (*run)(std::string&);
    };
    const Criterion criteria[] = {
        {"similarity values match the reference table", similarity_reproduction},
        {"clustering trace reproduces the reference run", clustering_reproduction},
        {"session recommendation reproduces the reference walk", recommendation_reproduction},
        {"form catalog classifies, scores, and rewrites correctly", refactoring_catalog},
        {"solver and conflicts agree with brute-force enumeration", solver_against_oracle},
        {"strategy and form error rates are pinned constants", pinned_constants},
        {"serializer round-trips and parsers survive fuzzing", roundtrip_and_fuzz},
    };

    int failed = 0;
    for (size_t i = 0; i < std::size(criteria); ++i) {
        std::string note;
        Failures fails;
        try {
            fails = criteria[i].run(note);
        } catch (const std::exception& e) {
            fails.add(std::string("unexpected exception: ") + e.what());
        }
        if (fails.empty()) {
            std::cout << "PASS  " << (i + 1) << ". " << criteria[i].name;
            if (!note.empty()) std::cout << " (" << note << ")";
            std::cout << "\n";
        } else {
            ++failed;
            std::cout << "FAIL  " << (i + 1) << ". " << criteria[i].name << "\n";
            for (const auto& item : fails.items) std::cout << "      - " << item << "\n";
        }
    }
    if (failed) {
        std::cout << failed << " of " << std::size(criteria) << " criteria failed\n";
        return 1;
    }
    std::cout << "all " << std::size(criteria) << " criteria passed\n";
    return 0;
}
