#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "context_drift/babi_ingest.hpp"
#include "context_drift/cli.hpp"
#include "context_drift/dataset.hpp"
#include "context_drift/errors.hpp"
#include "context_drift/http_model.hpp"
#include "context_drift/name_pool.hpp"
#include "context_drift/text.hpp"

namespace context_drift::cli {

namespace {

// Flags shared by `run` and `sweep`. Values are only applied to the manifest
// when the flag was actually given, so manifests keep their settings.
struct RunFlags {
    std::string manifest;
    std::string dataset;
    std::size_t stories = 0;
    std::uint64_t seed = 0;
    std::string mode;
    std::string policy;
    std::size_t window_size = 0;
    std::string model;
    std::string endpoint;
    std::string model_name;
    double temperature = 0.0;
    int max_new_tokens = 0;
    std::size_t max_context_tokens = 0;
    std::string out;
    std::string preamble_file;
    std::string script_file;
    std::uint64_t flaky_seed = 0;
    double flaky_onset = 0.0;
    double flaky_span = 0.0;
    double latency_ms_per_token = 0.0;
    int timeout_s = 0;

    std::vector<CLI::Option*> options;
    CLI::Option* o_stories = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_mode = nullptr;
    CLI::Option* o_policy = nullptr;
    CLI::Option* o_window = nullptr;
    CLI::Option* o_model = nullptr;
    CLI::Option* o_endpoint = nullptr;
    CLI::Option* o_model_name = nullptr;
    CLI::Option* o_temperature = nullptr;
    CLI::Option* o_max_new = nullptr;
    CLI::Option* o_max_ctx = nullptr;
    CLI::Option* o_out = nullptr;
    CLI::Option* o_preamble = nullptr;
    CLI::Option* o_batched = nullptr;
    CLI::Option* o_stop = nullptr;
    CLI::Option* o_reask = nullptr;
    CLI::Option* o_script = nullptr;
    CLI::Option* o_cycle = nullptr;
    CLI::Option* o_flaky_seed = nullptr;
    CLI::Option* o_flaky_onset = nullptr;
    CLI::Option* o_flaky_span = nullptr;
    CLI::Option* o_latency = nullptr;
    CLI::Option* o_timeout = nullptr;
    CLI::Option* o_dataset = nullptr;

    void add_to(CLI::App& app) {
        app.add_option("--manifest", manifest, "JSON run manifest; flags override its fields")->check(CLI::ExistingFile);
        o_dataset = app.add_option("--dataset", dataset, "dataset.json (generated from --seed when omitted)")
                        ->check(CLI::ExistingFile);
        o_stories = app.add_option("--stories", stories, "stories per session");
        o_seed = app.add_option("--seed", seed, "seed for dataset generation and mock models");
        o_mode = app.add_option("--mode", mode, "baseline | incremental")
                     ->check(CLI::IsMember({"baseline", "incremental"}));
        o_policy = app.add_option("--policy", policy, "accumulate | window | summarize")
                       ->check(CLI::IsMember({"accumulate", "window", "summarize"}));
        o_window = app.add_option("--window-size", window_size, "stories kept by the window policy (default 6)");
        o_model = app.add_option("--model", model, "oracle | scripted | flaky | http")
                      ->check(CLI::IsMember({"oracle", "scripted", "flaky", "http"}));
        o_endpoint = app.add_option("--endpoint", endpoint, "base URL of an OpenAI-compatible API, e.g. http://host:8000/v1");
        o_model_name = app.add_option("--model-name", model_name, "model field sent to the endpoint");
        o_temperature = app.add_option("--temperature", temperature, "sampling temperature (default 0.7)");
        o_max_new = app.add_option("--max-new-tokens", max_new_tokens, "completion token limit (default 16)");
        o_max_ctx = app.add_option("--max-context-tokens", max_context_tokens, "context budget (default 2048)");
        o_out = app.add_option("--out", out, "output directory");
        o_preamble = app.add_option("--preamble-file", preamble_file, "replace the built-in teaching prompt")
                         ->check(CLI::ExistingFile);
        o_batched = app.add_flag("--batched-questions", "ask all questions of a step in one message");
        o_stop = app.add_flag("--stop-on-budget", "end the run when the next request would exceed the budget");
        o_reask = app.add_flag("--reask-evicted", "re-ask questions of stories evicted by the window");
        o_script = app.add_option("--script-file", script_file, "scripted backend: one answer per line")
                       ->check(CLI::ExistingFile);
        o_cycle = app.add_flag("--script-cycle", "scripted backend: restart the script when it runs out");
        o_flaky_seed = app.add_option("--flaky-seed", flaky_seed, "flaky backend: error draw seed (default --seed)");
        o_flaky_onset = app.add_option("--flaky-onset", flaky_onset, "flaky backend: prompt tokens before errors start");
        o_flaky_span = app.add_option("--flaky-span", flaky_span, "flaky backend: tokens from onset to certain error");
        o_latency = app.add_option("--latency-ms-per-token", latency_ms_per_token,
                                   "mock backends: report latency = c * prompt tokens");
        o_timeout = app.add_option("--timeout", timeout_s, "http backend: per-request timeout in seconds");
    }

    RunManifest resolve(bool validate = true) const {
        RunManifest m = manifest.empty() ? RunManifest{} : load_manifest(manifest);
        if (o_dataset->count()) m.dataset_path = dataset;
        if (o_stories->count()) m.n_stories = stories;
        if (o_seed->count()) m.seed = seed;
        if (o_mode->count()) m.mode = mode;
        if (o_policy->count()) {
            if (policy != m.policy) m.window_size.reset();
            m.policy = policy;
        }
        if (o_window->count()) m.window_size = window_size;
        if (o_model->count()) {
            if (model != m.model) m.model_params = json::object();
            m.model = model;
        }
        if (o_model_name->count()) m.model_name = model_name;
        if (o_temperature->count()) m.temperature = temperature;
        if (o_max_new->count()) m.max_new_tokens = max_new_tokens;
        if (o_max_ctx->count()) m.max_context_tokens = max_context_tokens;
        if (o_out->count()) m.out = out;
        if (o_preamble->count()) m.preamble_file = preamble_file;
        if (o_batched->count()) m.batched_questions = true;
        if (o_stop->count()) m.stop_on_budget = true;
        if (o_reask->count()) m.reask_evicted = true;
        if (o_endpoint->count()) m.model_params["endpoint"] = endpoint;
        if (o_timeout->count()) m.model_params["timeout_s"] = timeout_s;
        if (o_script->count()) m.model_params["script_file"] = script_file;
        if (o_cycle->count()) m.model_params["cycle"] = true;
        if (o_flaky_seed->count()) m.model_params["seed"] = flaky_seed;
        if (o_flaky_onset->count()) m.model_params["onset_tokens"] = flaky_onset;
        if (o_flaky_span->count()) m.model_params["span_tokens"] = flaky_span;
        if (o_latency->count()) m.model_params["latency_ms_per_token"] = latency_ms_per_token;
        if (validate) validate_manifest(m);
        return m;
    }
};

std::size_t count_results(const RunReport& report) {
    std::size_t n = 0;
    for (const auto& s : report.steps) n += s.question_results.size();
    return n;
}

std::size_t count_errors(const RunReport& report) {
    std::size_t n = 0;
    for (const auto& s : report.steps) {
        for (const auto& r : s.question_results) n += r.error ? 1 : 0;
    }
    return n;
}

int cmd_generate(std::size_t stories, std::uint64_t seed, const GenerationParams& shape, const std::string& out) {
    if (stories == 0) {
        throw ConfigError("--stories must be at least 1");
    }
    GenerationParams params = shape;
    params.seed = seed;
    const Dataset dataset = make_generated_dataset(params, stories);
    const std::filesystem::path dir(out);
    save_dataset(dataset, dir / "dataset.json");
    write_file(dir / "dataset.babi.txt", babi::to_babi(dataset.stories));
    std::cout << "stories: " << dataset.stories.size() << '\n'
              << "fingerprint: " << fingerprint(dataset) << '\n'
              << "written: " << (dir / "dataset.json").string() << ", " << (dir / "dataset.babi.txt").string() << '\n';
    return kExitOk;
}

int cmd_transform(const std::string& input, const std::string& out, std::uint64_t seed, bool rename_only,
                  bool skip_non_movement) {
    babi::ParseOptions options;
    options.non_movement = skip_non_movement ? babi::NonMovementMode::skip : babi::NonMovementMode::error;
    const std::vector<Story> original = babi::parse_babi(read_file(input), options);
    if (original.empty()) {
        throw ConfigError(input + " contains no stories");
    }
    std::size_t needed = 0;
    std::set<std::string> originals;
    for (const auto& story : original) {
        const auto names = babi::entity_names(story);
        needed += names.size();
        originals.insert(names.begin(), names.end());
    }
    // Originals are never reused, so the pool must cover them as well.
    const auto pool = extended_name_pool(needed + originals.size());
    const auto mapping = babi::build_unique_mapping(original, pool, seed);
    std::vector<Story> transformed = babi::substitute_names(original, mapping);
    if (!rename_only) {
        for (auto& story : transformed) story = babi::truncate_story(story);
    }

    Dataset dataset;
    dataset.source = "babi";
    dataset.locations = babi::collect_locations(original);
    dataset.stories = std::move(transformed);
    const std::filesystem::path dir(out);
    save_dataset(dataset, dir / "dataset.json");
    write_file(dir / "dataset.babi.txt", babi::to_babi(dataset.stories));

    std::cout << std::fixed << std::setprecision(2) << "stories: " << dataset.stories.size() << '\n'
              << "mean tokens original: " << babi::mean_story_tokens(original) << '\n'
              << "mean tokens transformed: " << babi::mean_story_tokens(dataset.stories) << '\n'
              << "fingerprint: " << fingerprint(dataset) << '\n';
    return kExitOk;
}

void print_steps(const RunReport& report) {
    std::cout << std::fixed << std::setprecision(4);
    for (const auto& s : report.steps) {
        std::size_t frozen = 0;
        for (const auto& r : s.question_results) frozen += r.mode == QuestionMode::frozen ? 1 : 0;
        std::cout << "step " << s.step << " story " << s.story_id << " per_i " << s.cumulative_accuracy
                  << " prompt_tokens " << s.prompt_tokens << " latency_ms " << s.latency_ms;
        if (frozen > 0) std::cout << " frozen " << frozen;
        std::cout << '\n';
    }
}

int cmd_run(const RunManifest& m) {
    const RunReport report = execute(m);
    emit_report(report, m.out);
    write_file(m.out / "manifest.json", to_json(m).dump(2) + "\n");
    print_steps(report);
    std::cout << "run_id " << run_id(report) << '\n';
    if (report.budget_exceeded) {
        std::cout << "stopped: context budget of " << m.max_context_tokens << " tokens reached\n";
    }
    const std::size_t errors = count_errors(report);
    std::cout << "artifacts: " << m.out.string() << '\n';
    if (errors > 0) {
        std::cerr << errors << " of " << count_results(report) << " questions failed with model errors\n";
        if (errors == count_results(report)) {
            return kExitTransport;
        }
    }
    return kExitOk;
}

struct SweepJob {
    std::string group;
    RunManifest manifest;
};

int cmd_sweep(const RunManifest& base, const std::vector<std::string>& policies, std::size_t seeds, std::size_t jobs) {
    if (seeds == 0) {
        throw ConfigError("--seeds must be at least 1");
    }
    std::vector<SweepJob> work;
    std::vector<std::string> groups;
    for (const auto& name : policies) {
        RunManifest m = base;
        m.policy = name;
        if (name != "window") m.window_size.reset();
        else if (!m.window_size) m.window_size = PolicyKind::kDefaultWindow;
        const std::string group = session_config(m).policy.label();
        groups.push_back(group);
        for (std::size_t s = 0; s < seeds; ++s) {
            RunManifest run = m;
            run.seed = base.seed + s;
            if (run.model == "flaky") run.model_params["seed"] = run.seed;
            run.out = base.out / group / ("seed-" + std::to_string(run.seed));
            validate_manifest(run);
            work.push_back(SweepJob{group, std::move(run)});
        }
    }

    std::vector<RunReport> reports(work.size());
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::size_t i = next++; i < work.size(); i = next++) {
            try {
                reports[i] = execute(work[i].manifest);
                emit_report(reports[i], work[i].manifest.out);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = work.size();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, work.size());
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);

    std::vector<StatsGroup> stats;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const std::span<const RunReport> runs(reports.data() + g * seeds, seeds);
        stats.emplace_back(groups[g], accuracy_stats(runs));
    }
    write_file(base.out / "accuracy.svg", stats_svg(stats));
    write_file(base.out / "sweep_summary.csv", stats_csv(stats));
    write_file(base.out / "manifest.json", to_json(base).dump(2) + "\n");
    std::cout << std::fixed << std::setprecision(4);
    for (const auto& [group, s] : stats) {
        if (!s.empty()) {
            std::cout << group << " final mean per_i " << s.back().mean << " (sd " << s.back().stddev << ", n "
                      << s.back().n << ")\n";
        }
    }
    std::cout << "artifacts: " << base.out.string() << '\n';
    return kExitOk;
}

int cmd_compare(const std::vector<std::string>& runs, std::vector<std::string> labels, const std::string& out) {
    if (!labels.empty() && labels.size() != runs.size()) {
        throw ConfigError("--labels needs one label per run");
    }
    std::vector<RunReport> reports;
    for (const auto& path : runs) {
        reports.push_back(run_report_from_json(json::parse(read_file(path))));
    }
    if (labels.empty()) {
        for (const auto& r : reports) labels.push_back(series_label(r));
    }
    emit_comparison(reports, labels, out);
    std::cout << "artifacts: " << out << '\n';
    return kExitOk;
}

int exit_code_for(std::exception_ptr error, bool print = true) {
    try {
        std::rethrow_exception(error);
    } catch (const StoryRunError& e) {
        if (print) std::cerr << "error: " << e.what() << '\n';
        return e.cause() ? exit_code_for(e.cause(), false) : kExitCheckFailed;
    } catch (const AuthRequired& e) {
        if (print) std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ScriptExhausted& e) {
        if (print) std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ModelError& e) {
        if (print) std::cerr << "error: " << e.what() << '\n';
        return kExitTransport;
    } catch (const ConfigError& e) {
        if (print) std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        if (print) std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        if (print) std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const PoolExhausted& e) {
        if (print) std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        if (print) std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const json::exception& e) {
        std::cerr << "error: malformed JSON: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        if (print) std::cerr << "error: " << e.what() << '\n';
        return kExitCheckFailed;
    }
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Measures how answer accuracy on short location-tracking stories degrades as more stories share one chat context."};
    app.require_subcommand(1);

    auto* generate = app.add_subcommand("generate", "generate a synthetic story dataset");
    std::size_t gen_stories = 50;
    std::uint64_t gen_seed = 0;
    GenerationParams shape;
    bool shared_names = false;
    std::string gen_out = "data/generated";
    generate->add_option("--stories", gen_stories, "number of stories")->capture_default_str();
    generate->add_option("--seed", gen_seed, "generation seed")->capture_default_str();
    generate->add_option("--actors", shape.n_actors_per_story, "actors per story")->capture_default_str();
    generate->add_option("--statements", shape.n_statements_per_story, "statements per story")->capture_default_str();
    generate->add_option("--questions", shape.n_questions_per_story, "questions per story")->capture_default_str();
    generate->add_flag("--shared-names", shared_names, "draw names per story, allowing reuse across stories");
    generate->add_option("--out", gen_out, "output directory")->capture_default_str();

    auto* transform = app.add_subcommand("transform", "rename and truncate a bAbI task file");
    std::string tr_input;
    std::string tr_out = "data/transformed";
    std::uint64_t tr_seed = 0;
    bool rename_only = false;
    bool skip_non_movement = false;
    transform->add_option("--input", tr_input, "bAbI task file")->required()->check(CLI::ExistingFile);
    transform->add_option("--out", tr_out, "output directory")->capture_default_str();
    transform->add_option("--seed", tr_seed, "renaming seed")->capture_default_str();
    transform->add_flag("--rename-only", rename_only, "skip truncation");
    transform->add_flag("--skip-non-movement", skip_non_movement, "drop statements that are not movements");

    auto* run = app.add_subcommand("run", "run one session and write its report");
    RunFlags run_flags;
    run_flags.add_to(*run);

    auto* sweep = app.add_subcommand("sweep", "run several policies over several seeds concurrently");
    RunFlags sweep_flags;
    sweep_flags.add_to(*sweep);
    std::vector<std::string> sweep_policies{"accumulate", "window", "summarize"};
    std::size_t sweep_seeds = 10;
    std::size_t sweep_jobs = std::max(1u, std::thread::hardware_concurrency());
    sweep->add_option("--policies", sweep_policies, "policies to compare")
        ->delimiter(',')
        ->check(CLI::IsMember({"accumulate", "window", "summarize"}))
        ->capture_default_str();
    sweep->add_option("--seeds", sweep_seeds, "seeds per policy, counting up from --seed")->capture_default_str();
    sweep->add_option("--jobs", sweep_jobs, "concurrent sessions")->capture_default_str();

    auto* compare = app.add_subcommand("compare", "overlay several run.json files");
    std::vector<std::string> cmp_runs;
    std::vector<std::string> cmp_labels;
    std::string cmp_out = "runs/compare";
    compare->add_option("--runs", cmp_runs, "run.json files")->required()->check(CLI::ExistingFile);
    compare->add_option("--labels", cmp_labels, "series labels");
    compare->add_option("--out", cmp_out, "output directory")->capture_default_str();

    auto* self = app.add_subcommand("selftest", "run built-in consistency checks");
    std::string st_dataset;
    std::string st_run;
    self->add_option("--dataset", st_dataset, "also check name uniqueness and golds of this dataset.json")
        ->check(CLI::ExistingFile);
    self->add_option("--run-json", st_run, "also re-score this run.json")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*generate) {
            shape.unique_names = !shared_names;
            return cmd_generate(gen_stories, gen_seed, shape, gen_out);
        }
        if (*transform) {
            return cmd_transform(tr_input, tr_out, tr_seed, rename_only, skip_non_movement);
        }
        if (*run) {
            return cmd_run(run_flags.resolve());
        }
        if (*sweep) {
            // Policies come from --policies; each job is validated on its own.
            RunManifest base = sweep_flags.resolve(false);
            if (!sweep_flags.o_out->count() && sweep_flags.manifest.empty()) base.out = "runs/sweep";
            return cmd_sweep(base, sweep_policies, sweep_seeds, sweep_jobs);
        }
        if (*compare) {
            return cmd_compare(cmp_runs, cmp_labels, cmp_out);
        }
        SelftestOptions options;
        if (!st_dataset.empty()) options.dataset = st_dataset;
        if (!st_run.empty()) options.run_json = st_run;
        return selftest(options, std::cout);
    } catch (...) {
        return exit_code_for(std::current_exception());
    }
}

}  // namespace context_drift::cli
