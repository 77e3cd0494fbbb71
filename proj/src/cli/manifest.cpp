#include <set>

#include "context_drift/babi_ingest.hpp"
#include "context_drift/cli.hpp"
#include "context_drift/dataset.hpp"
#include "context_drift/errors.hpp"
#include "context_drift/http_model.hpp"
#include "context_drift/text.hpp"

namespace context_drift::cli {

namespace {

const std::set<std::string>& manifest_keys() {
    static const std::set<std::string> keys{
        "dataset_path", "mode",          "policy",         "window_size",   "model",
        "model_params", "n_stories",     "seed",           "max_context_tokens",
        "stop_on_budget", "batched_questions", "reask_evicted", "temperature", "max_new_tokens",
        "model_name",   "preamble_file", "out"};
    return keys;
}

const std::set<std::string>& model_param_keys(const std::string& backend) {
    static const std::set<std::string> oracle{"latency_ms_per_token"};
    static const std::set<std::string> scripted{"script_file", "cycle", "latency_ms_per_token"};
    static const std::set<std::string> flaky{"seed", "onset_tokens", "span_tokens", "latency_ms_per_token"};
    static const std::set<std::string> http{"endpoint", "timeout_s"};
    if (backend == "oracle") return oracle;
    if (backend == "scripted") return scripted;
    if (backend == "flaky") return flaky;
    if (backend == "http") return http;
    throw ConfigError("unknown model backend '" + backend + "' (oracle|scripted|flaky|http)");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest field '") + key + "': " + e.what());
    }
}

std::vector<std::string> read_script(const std::filesystem::path& path) {
    std::vector<std::string> answers;
    const std::string content = read_file(path);
    for (const auto line : text::split_lines(content)) {
        answers.emplace_back(line);
    }
    return answers;
}

}  // namespace

json to_json(const RunManifest& m) {
    return json{{"dataset_path", m.dataset_path ? json(m.dataset_path->string()) : json(nullptr)},
                {"mode", m.mode},
                {"policy", m.policy},
                {"window_size", m.window_size ? json(*m.window_size) : json(nullptr)},
                {"model", m.model},
                {"model_params", m.model_params},
                {"n_stories", m.n_stories},
                {"seed", m.seed},
                {"max_context_tokens", m.max_context_tokens},
                {"stop_on_budget", m.stop_on_budget},
                {"batched_questions", m.batched_questions},
                {"reask_evicted", m.reask_evicted},
                {"temperature", m.temperature},
                {"max_new_tokens", m.max_new_tokens},
                {"model_name", m.model_name},
                {"preamble_file", m.preamble_file ? json(m.preamble_file->string()) : json(nullptr)},
                {"out", m.out.string()}};
}

RunManifest manifest_from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("manifest must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!manifest_keys().contains(key)) {
            throw ConfigError("unknown manifest field '" + key + "'");
        }
    }
    RunManifest m;
    if (auto p = get_or<std::string>(j, "dataset_path", ""); !p.empty()) {
        m.dataset_path = p;
    }
    m.mode = get_or(j, "mode", m.mode);
    m.policy = get_or(j, "policy", m.policy);
    if (j.contains("window_size") && !j.at("window_size").is_null()) {
        m.window_size = get_or<std::size_t>(j, "window_size", 0);
    }
    m.model = get_or(j, "model", m.model);
    if (j.contains("model_params") && !j.at("model_params").is_null()) {
        m.model_params = j.at("model_params");
    }
    m.n_stories = get_or(j, "n_stories", m.n_stories);
    m.seed = get_or(j, "seed", m.seed);
    m.max_context_tokens = get_or(j, "max_context_tokens", m.max_context_tokens);
    m.stop_on_budget = get_or(j, "stop_on_budget", m.stop_on_budget);
    m.batched_questions = get_or(j, "batched_questions", m.batched_questions);
    m.reask_evicted = get_or(j, "reask_evicted", m.reask_evicted);
    m.temperature = get_or(j, "temperature", m.temperature);
    m.max_new_tokens = get_or(j, "max_new_tokens", m.max_new_tokens);
    m.model_name = get_or(j, "model_name", m.model_name);
    if (auto p = get_or<std::string>(j, "preamble_file", ""); !p.empty()) {
        m.preamble_file = p;
    }
    m.out = get_or<std::string>(j, "out", m.out.string());
    return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("manifest " + path.string() + " is not valid JSON: " + e.what());
    }
    return manifest_from_json(j);
}

void validate_manifest(const RunManifest& m) {
    if (m.mode != "baseline" && m.mode != "incremental") {
        throw ConfigError("mode must be baseline or incremental, got '" + m.mode + "'");
    }
    if (m.policy != "accumulate" && m.policy != "window" && m.policy != "summarize") {
        throw ConfigError("policy must be accumulate, window or summarize, got '" + m.policy + "'");
    }
    if (m.window_size && m.policy != "window") {
        throw ConfigError("window_size is only meaningful with policy=window");
    }
    if (m.window_size && *m.window_size == 0) {
        throw ConfigError("window_size must be at least 1");
    }
    if (m.n_stories == 0) {
        throw ConfigError("n_stories must be at least 1");
    }
    if (!m.model_params.is_object()) {
        throw ConfigError("model_params must be an object");
    }
    const auto& allowed = model_param_keys(m.model);
    for (const auto& [key, value] : m.model_params.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError("model parameter '" + key + "' does not apply to backend '" + m.model + "'");
        }
    }
    if (m.model == "scripted" && !m.model_params.contains("script_file")) {
        throw ConfigError("the scripted backend needs model_params.script_file (--script-file)");
    }
    if (m.model == "http" && !m.model_params.contains("endpoint")) {
        throw ConfigError("the http backend needs an endpoint (--endpoint)");
    }
    if (m.model == "flaky" && m.model_params.contains("span_tokens") &&
        m.model_params.at("span_tokens").get<double>() <= 0.0) {
        throw ConfigError("span_tokens must be positive");
    }
    if (m.temperature < 0.0) {
        throw ConfigError("temperature must be non-negative");
    }
    if (m.max_new_tokens <= 0) {
        throw ConfigError("max_new_tokens must be positive");
    }
}

SessionConfig session_config(const RunManifest& m) {
    SessionConfig c;
    c.n_stories = m.n_stories;
    c.policy = PolicyKind::parse(m.policy, m.window_size.value_or(PolicyKind::kDefaultWindow));
    if (m.preamble_file) {
        c.preamble_text = read_file(*m.preamble_file);
    }
    c.max_context_tokens = m.max_context_tokens;
    c.seed = m.seed;
    c.stop_on_budget = m.stop_on_budget;
    c.batched_questions = m.batched_questions;
    c.reask_evicted = m.reask_evicted;
    c.request.temperature = m.temperature;
    c.request.max_new_tokens = m.max_new_tokens;
    c.request.model_name = m.model_name;
    return c;
}

Dataset resolve_dataset(const RunManifest& m) {
    if (m.dataset_path) {
        return load_dataset(*m.dataset_path);
    }
    GenerationParams params;
    params.seed = m.seed;
    return make_generated_dataset(params, m.n_stories);
}

ModelHandle make_model(const RunManifest& m, const Dataset& dataset) {
    ModelHandle h;
    h.descriptor.backend = m.model;
    json params = m.model_params;
    if (m.model == "oracle") {
        h.inner = std::make_unique<OracleModel>();
    } else if (m.model == "scripted") {
        const std::filesystem::path script = params.at("script_file").get<std::string>();
        const bool cycle = get_or(params, "cycle", false);
        const auto answers = read_script(script);
        params["cycle"] = cycle;
        params["script_sha256"] = sha256_hex(read_file(script));
        h.inner = std::make_unique<ScriptedModel>(answers, cycle);
    } else if (m.model == "flaky") {
        ErrorRateCurve curve;
        curve.onset_tokens = get_or(params, "onset_tokens", kDefaultFlakyOnsetTokens);
        curve.span_tokens = get_or(params, "span_tokens", kDefaultFlakySpanTokens);
        const auto seed = get_or<std::uint64_t>(params, "seed", m.seed);
        params["seed"] = seed;
        params["onset_tokens"] = curve.onset_tokens;
        params["span_tokens"] = curve.span_tokens;
        std::vector<Location> vocabulary = dataset.locations;
        if (vocabulary.empty()) {
            vocabulary = babi::collect_locations(dataset.stories);
        }
        h.inner = std::make_unique<FlakyMockModel>(seed, std::move(vocabulary), curve);
    } else if (m.model == "http") {
        HttpModelConfig config;
        config.base_url = params.at("endpoint").get<std::string>();
        config.api_key = api_key_from_env();
        config.timeout = std::chrono::seconds(get_or(params, "timeout_s", 60));
        params["timeout_s"] = config.timeout.count();
        h.inner = std::make_unique<HttpChatModel>(config);
    } else {
        throw ConfigError("unknown model backend '" + m.model + "'");
    }
    if (params.contains("latency_ms_per_token")) {
        h.wrapper = std::make_unique<SimulatedLatencyModel>(*h.inner, params.at("latency_ms_per_token").get<double>());
    }
    h.descriptor.parameters = std::move(params);
    return h;
}

RunReport execute(const RunManifest& m) {
    validate_manifest(m);
    const Dataset dataset = resolve_dataset(m);
    const SessionConfig config = session_config(m);
    ModelHandle model = make_model(m, dataset);
    RunOptions options;
    options.model = model.descriptor;
    return m.mode == "baseline" ? run_baseline(dataset, model.client(), config, options)
                                : run_incremental(dataset, model.client(), config, options);
}

}  // namespace context_drift::cli
