#include <ostream>
#include <sstream>

#include "context_drift/babi_ingest.hpp"
#include "context_drift/cli.hpp"
#include "context_drift/dataset.hpp"
#include "context_drift/errors.hpp"

namespace context_drift::cli {

namespace {

struct CheckResult {
    bool ok = true;
    std::string detail;
};

CheckResult oracle_end_to_end() {
    GenerationParams params;
    params.seed = 11;
    const Dataset dataset = make_generated_dataset(params, 20);
    for (const auto& policy : {PolicyKind::accumulate(), PolicyKind::window(6), PolicyKind::summarize()}) {
        SessionConfig config;
        config.n_stories = dataset.stories.size();
        config.policy = policy;
        OracleModel oracle;
        const RunReport report = run_incremental(dataset, oracle, config);
        for (const auto& step : report.steps) {
            if (step.cumulative_accuracy != 1.0) {
                return {false, policy.label() + " step " + std::to_string(step.step) + " per_i=" +
                                   std::to_string(step.cumulative_accuracy)};
            }
        }
    }
    return {};
}

CheckResult policy_equivalence() {
    GenerationParams params;
    params.seed = 12;
    const Dataset dataset = make_generated_dataset(params, 10);
    auto rendered = [&](const PolicyKind& policy) {
        std::vector<std::vector<Turn>> contexts;
        SessionConfig config;
        config.n_stories = dataset.stories.size();
        config.policy = policy;
        ScriptedModel model({"kitchen"}, true);
        RunOptions options;
        options.on_render = [&](std::size_t, std::span<const Turn> turns) {
            contexts.emplace_back(turns.begin(), turns.end());
        };
        run_incremental(dataset, model, config, options);
        return contexts;
    };
    if (rendered(PolicyKind::window(10)) != rendered(PolicyKind::accumulate())) {
        return {false, "window(10) differs from accumulate over 10 stories"};
    }
    const std::size_t k = 3;
    const auto windowed = rendered(PolicyKind::window(k));
    for (std::size_t i = 0; i < windowed.size(); ++i) {
        const std::size_t n = story_ids_in(windowed[i]).size();
        if (n != std::min(i + 1, k)) {
            return {false, "window(3) step " + std::to_string(i) + " holds " + std::to_string(n) + " stories"};
        }
    }
    return {};
}

CheckResult scoring_round_trip() {
    GenerationParams params;
    params.seed = 13;
    const Dataset dataset = make_generated_dataset(params, 8);
    SessionConfig config;
    config.n_stories = dataset.stories.size();
    config.policy = PolicyKind::window(4);
    ScriptedModel model({"kitchen", "The garden.", "bedroom or park", "I don't know"}, true);
    const RunReport report = run_incremental(dataset, model, config);
    const json j = to_json(report);
    const RunReport back = run_report_from_json(j);
    if (to_json(back) != j) {
        return {false, "run.json does not survive a round trip"};
    }
    if (const auto m = rescore(back); !m.empty()) {
        return {false, std::to_string(m.size()) + " stored flags differ from re-scoring"};
    }
    return {};
}

CheckResult dataset_checks(const std::filesystem::path& path) {
    const Dataset dataset = load_dataset(path);
    if (const auto shared = names_shared_across_stories(dataset.stories); !shared.empty()) {
        return {false, "names shared across stories: " + shared.front() +
                           (shared.size() > 1 ? " (+" + std::to_string(shared.size() - 1) + " more)" : "")};
    }
    for (const auto& story : dataset.stories) {
        for (const auto& q : story.questions) {
            const std::span<const MovementStatement> prefix(story.statements.data(),
                                                            std::min(q.position, story.statements.size()));
            Location replay;
            try {
                replay = final_location(prefix, q.subject);
            } catch (const UnknownEntity&) {
                return {false, "story " + std::to_string(story.id) + ": " + q.subject.name + " never moves"};
            }
            if (replay != q.gold_answer) {
                return {false, "story " + std::to_string(story.id) + ": gold " + q.gold_answer.name +
                                   " but replay gives " + replay.name};
            }
        }
    }
    return {};
}

CheckResult run_json_checks(const std::filesystem::path& path) {
    const RunReport report = run_report_from_json(json::parse(read_file(path)));
    const auto mismatches = rescore(report);
    if (!mismatches.empty()) {
        const auto& m = mismatches.front();
        return {false, std::to_string(mismatches.size()) + " mismatch(es); first at step " + std::to_string(m.step) +
                           " story " + std::to_string(m.story_id) + " stored " + (m.stored ? "true" : "false")};
    }
    return {};
}

template <typename F>
bool report_check(std::ostream& out, const std::string& name, F&& check) {
    CheckResult r;
    try {
        r = check();
    } catch (const std::exception& e) {
        r = {false, e.what()};
    }
    out << (r.ok ? "PASS " : "FAIL ") << name;
    if (!r.ok) {
        out << ": " << r.detail;
    }
    out << '\n';
    return r.ok;
}

}  // namespace

int selftest(const SelftestOptions& options, std::ostream& out) {
    bool ok = true;
    ok &= report_check(out, "oracle-end-to-end", oracle_end_to_end);
    ok &= report_check(out, "policy-equivalence", policy_equivalence);
    ok &= report_check(out, "scoring-round-trip", scoring_round_trip);
    if (options.dataset) {
        ok &= report_check(out, "dataset-uniqueness-and-gold", [&] { return dataset_checks(*options.dataset); });
    }
    if (options.run_json) {
        ok &= report_check(out, "run-json-rescore", [&] { return run_json_checks(*options.run_json); });
    }
    return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace context_drift::cli
