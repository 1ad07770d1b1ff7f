// kbtool: command-line front end for the constraint knowledge base library.
//
// Subcommands: validate, sim, cluster, recommend, refactor, solve, conflict,
// session. Exit codes: 0 success, 1 domain result (unsatisfiable KB or a
// conflict was found), 2 usage/parse/engine errors.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <kbtool/json_io.hpp>
#include <kbtool/kbtool.hpp>

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw kbtool::Error("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw kbtool::Error("cannot write " + path);
    out << content;
}

const char* kind_name(kbtool::ParseErrorKind k) {
    switch (k) {
    case kbtool::ParseErrorKind::Syntax: return "syntax";
    case kbtool::ParseErrorKind::UnknownVariable: return "unknown-variable";
    case kbtool::ParseErrorKind::DuplicateId: return "duplicate-id";
    case kbtool::ParseErrorKind::EmptyDomain: return "empty-domain";
    }
    return "?";
}

json error_json(const kbtool::ParseError& e) {
    return json{{"line", e.line}, {"column", e.column}, {"kind", kind_name(e.kind)}, {"message", e.message}};
}

void print_parse_errors(const std::string& path, const std::vector<kbtool::ParseError>& errors) {
    for (const auto& e : errors)
        std::cerr << path << ":" << e.line << ":" << e.column << ": error: " << e.message << " ["
                  << kind_name(e.kind) << "]\n";
}

kbtool::KnowledgeBase load_kb(const std::string& path) {
    kbtool::ParseResult r = kbtool::parse_kb(read_file(path));
    if (!r.ok()) {
        print_parse_errors(path, r.errors);
        throw kbtool::Error("invalid knowledge base: " + path);
    }
    return std::move(*r.kb);
}

kbtool::NavigationLog load_log(const std::string& path, const kbtool::KnowledgeBase* kb,
                               bool print_warnings) {
    kbtool::NavLogParseResult r = kbtool::parse_navigation_log(read_file(path), kb);
    if (!r.ok()) {
        print_parse_errors(path, r.errors);
        throw kbtool::Error("invalid navigation log: " + path);
    }
    if (print_warnings)
        for (const auto& w : r.warnings) std::cerr << path << ": warning: " << w << "\n";
    return std::move(*r.log);
}

uint64_t default_seed() {
    const char* s = std::getenv("KBTOOL_SEED");
    if (!s || !*s) return kbtool::kDefaultSeed;
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0') throw kbtool::Error("KBTOOL_SEED must be a non-negative integer");
    return v;
}

// ======================= validate =======================

int run_validate(const std::string& kb_path, const std::string& log_path, bool as_json) {
    kbtool::ParseResult r = kbtool::parse_kb(read_file(kb_path));
    std::vector<kbtool::ParseError> log_errors;
    std::vector<std::string> warnings;
    if (r.ok() && !log_path.empty()) {
        kbtool::NavLogParseResult lr =
            kbtool::parse_navigation_log(read_file(log_path), &*r.kb);
        log_errors = lr.errors;
        warnings = lr.warnings;
    }

    bool valid = r.ok() && log_errors.empty();
    if (as_json) {
        json j{{"valid", valid},
               {"variables", r.kb ? r.kb->variables().size() : 0},
               {"constraints", r.kb ? r.kb->constraints().size() : 0},
               {"errors", json::array()},
               {"warnings", warnings}};
        for (const auto& e : r.errors) j["errors"].push_back(error_json(e));
        for (const auto& e : log_errors) j["errors"].push_back(error_json(e));
        std::cout << j.dump(2) << "\n";
        return valid ? 0 : 2;
    }

    print_parse_errors(kb_path, r.errors);
    print_parse_errors(log_path, log_errors);
    for (const auto& w : warnings) std::cerr << log_path << ": warning: " << w << "\n";
    if (!valid) return 2;
    std::cout << "ok: " << r.kb->variables().size() << " variables, " << r.kb->constraints().size()
              << " constraints\n";
    return 0;
}

// ======================= sim =======================

int run_sim(const std::string& kb_path, const std::string& metric_name, bool truncated,
            const std::string& out_path, bool as_json) {
    auto metric = kbtool::metric_from_name(metric_name);
    if (!metric) throw kbtool::Error("unknown metric: " + metric_name);
    kbtool::KnowledgeBase kb = load_kb(kb_path);
    kbtool::SimilarityMatrix m = kbtool::similarity_matrix(kb, *metric);
    if (truncated)
        for (auto& row : m.values)
            for (auto& v : row) v = kbtool::truncate2(v);

    std::string text = as_json ? json(m).dump(2) + "\n" : kbtool::matrix_to_csv(m);
    if (out_path.empty()) std::cout << text;
    else write_file(out_path, text);
    return 0;
}

// ======================= cluster =======================

const kbtool::StrategyErrorRates* strategy_rates(const std::string& name) {
    for (const auto& s : kbtool::strategy_error_rates())
        if (name == s.strategy) return &s;
    return nullptr;
}

int run_cluster(const std::string& kb_path, int k, const std::vector<std::string>& init,
                bool seed_given, uint64_t seed, const std::string& matrix_path,
                const std::string& metric_name, bool random_baseline, bool as_json) {
    auto metric = kbtool::metric_from_name(metric_name);
    if (!metric) throw kbtool::Error("unknown metric: " + metric_name);
    kbtool::KnowledgeBase kb = load_kb(kb_path);

    kbtool::SimilarityMatrix m;
    if (!matrix_path.empty()) {
        m = kbtool::matrix_from_csv(read_file(matrix_path));
        if (m.size() != static_cast<int>(kb.constraints().size()))
            throw kbtool::Error("matrix ids do not cover the knowledge base");
        for (const auto& id : m.ids)
            if (!kb.find_constraint(id))
                throw kbtool::Error("matrix id " + id + " is not a constraint of the knowledge base");
    } else {
        m = kbtool::similarity_matrix(kb, *metric);
    }

    uint64_t effective_seed = seed_given ? seed : default_seed();
    kbtool::Clustering clustering;
    std::string strategy;
    if (random_baseline) {
        if (!init.empty()) throw kbtool::Error("--init cannot be combined with --random");
        clustering = kbtool::random_clustering(m.ids, k, effective_seed);
        strategy = "random";
    } else if (!init.empty()) {
        clustering = kbtool::kmeans(m, k, init);
        strategy = kbtool::metric_name(m.metric);
    } else {
        clustering = kbtool::kmeans(m, k, effective_seed);
        strategy = kbtool::metric_name(m.metric);
    }

    if (as_json) {
        json j(clustering);
        j["strategy"] = strategy;
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    auto groups = clustering.groups(m.ids);
    for (int c = 0; c < clustering.k; ++c) {
        std::cout << "cluster " << (c + 1);
        if (!clustering.centroids.empty()) std::cout << " (centroid " << clustering.centroids[c] << ")";
        std::cout << ":";
        for (const auto& id : groups[c]) std::cout << " " << id;
        std::cout << "\n";
    }
    if (clustering.iterations > 0) std::cout << "iterations: " << clustering.iterations << "\n";
    if (const auto* s = strategy_rates(strategy))
        std::cout << "strategy: " << s->strategy << " (observed task error rates "
                  << s->solution_task_error << "% find-a-solution, " << s->conflict_task_error
                  << "% find-a-conflict)\n";
    return 0;
}

// ======================= recommend =======================

int run_recommend(const std::string& log_path, const std::vector<std::string>& visited, int k,
                  bool as_json) {
    kbtool::NavigationLog log = kbtool::parse_navigation_log_or_throw(read_file(log_path));
    kbtool::SessionState session = kbtool::make_session(visited);
    kbtool::Recommendation rec = kbtool::recommend_next(log, session, k);

    if (as_json) {
        std::cout << json(rec).dump(2) << "\n";
        return 0;
    }
    std::cout << rec.constraint << "\n";
    for (const auto& [cid, count] : rec.votes) {
        std::cout << "  " << cid << ": " << count << " vote" << (count == 1 ? "" : "s") << " (user";
        const auto& users = rec.voters.at(cid);
        std::cout << (users.size() == 1 ? " " : "s ");
        for (size_t i = 0; i < users.size(); ++i) std::cout << (i ? ", " : "") << users[i];
        std::cout << ")\n";
    }
    std::cout << "  neighbors:";
    for (const auto& n : rec.neighbors) std::cout << " " << n.user << " (d=" << n.distance << ")";
    std::cout << "\n";
    return 0;
}

// ======================= refactor =======================

int run_refactor(const std::string& kb_path, const std::string& apply_path, bool as_json) {
    kbtool::KnowledgeBase kb = load_kb(kb_path);
    kbtool::RefactorOutcome outcome = kbtool::refactor_kb(kb);

    if (!apply_path.empty()) write_file(apply_path, kbtool::serialize_kb(outcome.kb));

    if (as_json) {
        json j{{"suggestions", outcome.suggestions}, {"skipped", json::array()}};
        for (const auto& s : outcome.skipped)
            j["skipped"].push_back(json{{"constraint", s.constraint_id}, {"reason", s.reason}});
        if (!apply_path.empty()) j["applied_to"] = apply_path;
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (outcome.suggestions.empty() && outcome.skipped.empty()) {
        std::cout << "no rewrites suggested\n";
    }
    for (const auto& s : outcome.suggestions) {
        std::cout << s.constraint_id << ": " << kbtool::family_name(s.family) << " form "
                  << s.matched_index << " -> form 1, score delta " << s.score_delta << "\n"
                  << "    " << kbtool::expr_text(s.rewritten) << "\n";
    }
    for (const auto& s : outcome.skipped)
        std::cerr << "skipped " << s.constraint_id << ": " << s.reason << "\n";
    if (!apply_path.empty()) std::cout << "wrote " << apply_path << "\n";
    return 0;
}

// ======================= solve / conflict =======================

int run_solve(const std::string& kb_path, const std::vector<std::string>& subset, bool as_json) {
    kbtool::KnowledgeBase kb = load_kb(kb_path);
    std::optional<kbtool::Assignment> solution =
        subset.empty() ? kbtool::find_solution(kb) : kbtool::find_solution(kb, subset);

    if (as_json) {
        json j;
        if (solution) j = json{{"status", "sat"}, {"assignment", *solution}};
        else j = json{{"status", "unsat"}};
        std::cout << j.dump(2) << "\n";
        return solution ? 0 : 1;
    }
    if (!solution) {
        std::cout << "UNSAT\n";
        return 1;
    }
    for (const auto& [name, value] : *solution) std::cout << name << " = " << value << "\n";
    return 0;
}

int run_conflict(const std::string& kb_path, bool as_json) {
    kbtool::KnowledgeBase kb = load_kb(kb_path);
    std::optional<std::vector<std::string>> conflict = kbtool::minimal_conflict(kb);

    if (as_json) {
        json j;
        if (conflict) j = json{{"status", "conflict"}, {"constraints", *conflict}};
        else j = json{{"status", "consistent"}};
        std::cout << j.dump(2) << "\n";
        return conflict ? 1 : 0;
    }
    if (!conflict) {
        std::cout << "consistent\n";
        return 0;
    }
    std::cout << "conflict:";
    for (const auto& id : *conflict) std::cout << " " << id;
    std::cout << "\n";
    return 1;
}

// ======================= session =======================

int run_session(const std::string& kb_path, const std::string& log_path, int k) {
    kbtool::KnowledgeBase kb = load_kb(kb_path);
    kbtool::NavigationLog log = load_log(log_path, &kb, true);

    int n = static_cast<int>(kb.constraints().size());
    if (n == 0) throw kbtool::Error("knowledge base has no constraints");

    // fixed grouping for the whole session: two clusters seeded from the
    // first constraints, variable metric
    kbtool::SimilarityMatrix matrix = kbtool::similarity_matrix(kb, kbtool::Metric::Variable);
    int cluster_k = std::min(2, n);
    std::vector<std::string> init;
    for (int i = 0; i < cluster_k; ++i) init.push_back(kb.constraints()[i].id);
    kbtool::Clustering clustering = kbtool::kmeans(matrix, cluster_k, init);
    auto groups = clustering.groups(matrix.ids);

    kbtool::SessionState session;
    std::cout << kb.variables().size() << " variables, " << n << " constraints; " << log.users.size()
              << " users in log. Commands: visit <id>, status, quit.\n";

    std::string line;
    bool prompted_save = false;
    while (true) {
        std::cout << "> " << std::flush;
        if (!std::getline(std::cin, line)) {
            std::cout << "\n";
            break;
        }
        std::istringstream is(line);
        std::string command, arg;
        is >> command >> arg;
        if (command.empty()) continue;

        if (command == "quit") {
            if (!session.visited.empty()) {
                std::cout << "append session to " << log_path << "? [y/N] " << std::flush;
                std::string answer;
                if (std::getline(std::cin, answer) && (answer == "y" || answer == "Y" ||
                                                       answer == "yes")) {
                    int user = log.users.empty() ? 1 : log.users.rbegin()->first + 1;
                    std::string existing = read_file(log_path);
                    std::ofstream out(log_path, std::ios::app);
                    if (!out) throw kbtool::Error("cannot write " + log_path);
                    if (!existing.empty() && existing.back() != '\n') out << '\n';
                    for (size_t i = 0; i < session.visited.size(); ++i)
                        out << user << ',' << session.visited[i] << ',' << (i + 1) << '\n';
                    std::cout << "appended " << session.visited.size() << " visits as user " << user
                              << "\n";
                    prompted_save = true;
                }
            }
            break;
        }
        if (command == "status") {
            std::cout << "visited (" << session.visited.size() << "):";
            for (const auto& id : session.visited) std::cout << " " << id;
            std::cout << "\n";
            continue;
        }
        if (command != "visit") {
            std::cout << "commands: visit <id>, status, quit\n";
            continue;
        }

        if (arg.empty()) {
            std::cout << "usage: visit <constraint id>\n";
            continue;
        }
        const kbtool::Constraint* c = kb.find_constraint(arg);
        if (!c) {
            std::cout << "warning: " << arg << " is not in the knowledge base\n";
            continue;
        }
        if (session.has_visited(arg)) {
            std::cout << "warning: " << arg << " already visited\n";
            continue;
        }
        session.visited.push_back(arg);

        std::cout << "visited " << arg << " (" << session.visited.size() << " of " << n << ")\n";
        int cluster = clustering.assignment.at(arg);
        std::cout << "  cluster " << (cluster + 1) << ":";
        for (const auto& id : groups[cluster]) std::cout << " " << id;
        std::cout << "\n";

        auto suggestion = kbtool::recommend(kb, *c);
        if (suggestion)
            std::cout << "  refactor: " << kbtool::expr_text(suggestion->rewritten) << " (score delta "
                      << suggestion->score_delta << ")\n";
        else
            std::cout << "  refactor: none\n";

        try {
            kbtool::Recommendation rec = kbtool::recommend_next(log, session, k);
            std::cout << "  next: " << rec.constraint << "\n";
        } catch (const kbtool::Error& e) {
            std::cout << "  next: no recommendation (" << e.what() << ")\n";
        }
    }
    (void)prompted_save;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"constraint knowledge base maintenance tool"};
    app.require_subcommand(1);

    std::string kb_path, log_path, out_path, matrix_path, apply_path;
    std::string metric = "variable";
    std::vector<std::string> init, visited, subset;
    bool truncated = false, as_json = false, random_baseline = false;
    int k_clusters = 2;
    int k_neighbors = kbtool::kDefaultNeighbors;
    uint64_t seed = 0;

    CLI::App* c_validate = app.add_subcommand("validate", "parse a knowledge base and report problems");
    c_validate->add_option("kb", kb_path, "knowledge base file")->required();
    c_validate->add_option("--log", log_path, "navigation log to check against the KB");
    c_validate->add_flag("--json", as_json, "machine-readable output");

    CLI::App* c_sim = app.add_subcommand("sim", "pairwise constraint similarity matrix");
    c_sim->add_option("kb", kb_path, "knowledge base file")->required();
    c_sim->add_option("--metric", metric, "variable or operator")->capture_default_str();
    c_sim->add_flag("--truncate2", truncated, "truncate values to two decimals");
    c_sim->add_option("-o,--out", out_path, "write to file instead of stdout");
    c_sim->add_flag("--json", as_json, "machine-readable output");

    CLI::App* c_cluster = app.add_subcommand("cluster", "group constraints by similarity");
    c_cluster->add_option("kb", kb_path, "knowledge base file")->required();
    c_cluster->add_option("--k", k_clusters, "number of clusters")->capture_default_str();
    c_cluster->add_option("--init", init, "initial centroid ids")->delimiter(',');
    CLI::Option* seed_opt = c_cluster->add_option("--seed", seed, "seed for random centroid choice");
    c_cluster->add_option("--matrix", matrix_path, "similarity matrix CSV to use instead of computing");
    c_cluster->add_option("--metric", metric, "variable or operator")->capture_default_str();
    c_cluster->add_flag("--random", random_baseline, "random partition baseline");
    c_cluster->add_flag("--json", as_json, "machine-readable output");

    CLI::App* c_recommend = app.add_subcommand("recommend", "suggest the next constraint to analyze");
    c_recommend->add_option("--log", log_path, "navigation log CSV")->required();
    c_recommend->add_option("--visited", visited, "constraints already analyzed, in order")
        ->required()
        ->delimiter(',');
    c_recommend->add_option("--k", k_neighbors, "neighbors to consult")->capture_default_str();
    c_recommend->add_flag("--json", as_json, "machine-readable output");

    CLI::App* c_refactor = app.add_subcommand("refactor", "suggest lower-error constraint forms");
    c_refactor->add_option("kb", kb_path, "knowledge base file")->required();
    c_refactor->add_option("--apply", apply_path, "write the rewritten knowledge base here");
    c_refactor->add_flag("--json", as_json, "machine-readable output");

    CLI::App* c_solve = app.add_subcommand("solve", "find a solution");
    c_solve->add_option("kb", kb_path, "knowledge base file")->required();
    c_solve->add_option("--constraints", subset, "restrict to these constraint ids")->delimiter(',');
    c_solve->add_flag("--json", as_json, "machine-readable output");

    CLI::App* c_conflict = app.add_subcommand("conflict", "find a minimal conflict");
    c_conflict->add_option("kb", kb_path, "knowledge base file")->required();
    c_conflict->add_flag("--json", as_json, "machine-readable output");

    CLI::App* c_session = app.add_subcommand("session", "interactive navigation session");
    c_session->add_option("kb", kb_path, "knowledge base file")->required();
    c_session->add_option("--log", log_path, "navigation log CSV")->required();
    c_session->add_option("--k", k_neighbors, "neighbors to consult")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*c_validate) return run_validate(kb_path, log_path, as_json);
        if (*c_sim) return run_sim(kb_path, metric, truncated, out_path, as_json);
        if (*c_cluster)
            return run_cluster(kb_path, k_clusters, init, !seed_opt->empty(), seed, matrix_path,
                               metric, random_baseline, as_json);
        if (*c_recommend) return run_recommend(log_path, visited, k_neighbors, as_json);
        if (*c_refactor) return run_refactor(kb_path, apply_path, as_json);
        if (*c_solve) return run_solve(kb_path, subset, as_json);
        if (*c_conflict) return run_conflict(kb_path, as_json);
        if (*c_session) return run_session(kb_path, log_path, k_neighbors);
    } catch (const kbtool::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
