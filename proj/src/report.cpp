#include "context_drift/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "context_drift/context_policy.hpp"
#include "context_drift/dataset.hpp"
#include "context_drift/errors.hpp"
#include "context_drift/scoring.hpp"
#include "context_drift/svg_plot.hpp"

namespace context_drift {

namespace {

json config_json(const SessionConfig& c) {
    return json{{"n_stories", c.n_stories},
                {"policy", json{{"kind", c.policy.name()},
                                {"window_size", c.policy.is_window() ? json(c.policy.window_size()) : json(nullptr)}}},
                {"preamble_text", c.preamble_text},
                {"max_context_tokens", c.max_context_tokens},
                {"seed", c.seed},
                {"stop_on_budget", c.stop_on_budget},
                {"batched_questions", c.batched_questions},
                {"reask_evicted", c.reask_evicted},
                {"summary_instruction_version", std::string(kSummaryInstructionVersion)},
                {"request", json{{"model_name", c.request.model_name},
                                 {"temperature", c.request.temperature},
                                 {"max_new_tokens", c.request.max_new_tokens},
                                 // Left at endpoint defaults; recorded for audit.
                                 {"top_p", nullptr},
                                 {"presence_penalty", nullptr},
                                 {"frequency_penalty", nullptr}}}};
}

SessionConfig config_from_json(const json& j) {
    SessionConfig c;
    c.n_stories = j.at("n_stories").get<std::size_t>();
    const json& policy = j.at("policy");
    const json& k = policy.at("window_size");
    c.policy = PolicyKind::parse(policy.at("kind").get<std::string>(),
                                 k.is_null() ? PolicyKind::kDefaultWindow : k.get<std::size_t>());
    c.preamble_text = j.at("preamble_text").get<std::string>();
    c.max_context_tokens = j.at("max_context_tokens").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.stop_on_budget = j.at("stop_on_budget").get<bool>();
    c.batched_questions = j.at("batched_questions").get<bool>();
    c.reask_evicted = j.at("reask_evicted").get<bool>();
    const json& r = j.at("request");
    c.request.model_name = r.at("model_name").get<std::string>();
    c.request.temperature = r.at("temperature").get<double>();
    c.request.max_new_tokens = r.at("max_new_tokens").get<int>();
    return c;
}

json index_json(std::size_t q_index) { return q_index == kBatchIndex ? json(nullptr) : json(q_index); }

std::size_t index_from_json(const json& j) { return j.is_null() ? kBatchIndex : j.get<std::size_t>(); }

json result_json(const QuestionResult& r) {
    return json{{"story_id", r.story_id},
                {"q_index", r.q_index},
                {"question", r.question},
                {"gold", r.gold},
                {"raw_answer", r.raw_answer},
                {"normalized", r.normalized},
                {"correct", r.correct},
                {"mode", std::string(to_string(r.mode))},
                {"latency_ms", r.latency_ms},
                {"prompt_tokens", r.prompt_tokens},
                {"error", r.error ? json(*r.error) : json(nullptr)}};
}

QuestionResult result_from_json(const json& j) {
    QuestionResult r;
    r.story_id = j.at("story_id").get<std::size_t>();
    r.q_index = j.at("q_index").get<std::size_t>();
    r.question = j.at("question").get<std::string>();
    r.gold = j.at("gold").get<std::string>();
    r.raw_answer = j.at("raw_answer").get<std::string>();
    r.normalized = j.at("normalized").get<std::string>();
    r.correct = j.at("correct").get<bool>();
    r.mode = question_mode_from_string(j.at("mode").get<std::string>());
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    r.prompt_tokens = j.at("prompt_tokens").get<std::size_t>();
    if (!j.at("error").is_null()) {
        r.error = j.at("error").get<std::string>();
    }
    return r;
}

json step_json(const StepRecord& s) {
    json results = json::array();
    for (const auto& r : s.question_results) {
        results.push_back(result_json(r));
    }
    return json{{"step", s.step},
                {"story_id", s.story_id},
                {"cumulative_accuracy", s.cumulative_accuracy},
                {"new_story_accuracy", s.new_story_accuracy},
                {"prompt_tokens", s.prompt_tokens},
                {"reported_prompt_tokens", s.reported_prompt_tokens ? json(*s.reported_prompt_tokens) : json(nullptr)},
                {"latency_ms", s.latency_ms},
                {"question_results", std::move(results)}};
}

StepRecord step_from_json(const json& j) {
    StepRecord s;
    s.step = j.at("step").get<std::size_t>();
    s.story_id = j.at("story_id").get<std::size_t>();
    s.cumulative_accuracy = j.at("cumulative_accuracy").get<double>();
    s.new_story_accuracy = j.at("new_story_accuracy").get<double>();
    s.prompt_tokens = j.at("prompt_tokens").get<std::size_t>();
    if (j.contains("reported_prompt_tokens") && !j.at("reported_prompt_tokens").is_null()) {
        s.reported_prompt_tokens = j.at("reported_prompt_tokens").get<std::int64_t>();
    }
    s.latency_ms = j.value("latency_ms", std::int64_t{0});
    for (const auto& r : j.at("question_results")) {
        s.question_results.push_back(result_from_json(r));
    }
    return s;
}

json summary_json(const RunReport& report) {
    double mean_acc = 0.0;
    double mean_prompt = 0.0;
    std::int64_t latency = 0;
    for (const auto& s : report.steps) {
        mean_acc += s.cumulative_accuracy;
        mean_prompt += static_cast<double>(s.prompt_tokens);
        latency += s.latency_ms;
    }
    const auto n = static_cast<double>(report.steps.size());
    return json{{"steps", report.steps.size()},
                {"final_accuracy", report.steps.empty() ? 0.0 : report.steps.back().cumulative_accuracy},
                {"mean_accuracy", report.steps.empty() ? 0.0 : mean_acc / n},
                {"mean_story_tokens", report.mean_story_tokens},
                {"mean_prompt_tokens", report.steps.empty() ? 0.0 : mean_prompt / n},
                {"latency_ms", latency}};
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::string label_at(std::span<const RunReport> reports, std::span<const std::string> labels, std::size_t i) {
    return i < labels.size() ? labels[i] : series_label(reports[i]);
}

}  // namespace

std::string series_label(const RunReport& report) {
    return report.mode == RunMode::baseline ? "baseline" : report.config.policy.label();
}

std::string run_id(const RunReport& report) {
    const json key{{"mode", std::string(to_string(report.mode))},
                   {"config", config_json(report.config)},
                   {"model", json{{"backend", report.model.backend}, {"parameters", report.model.parameters}}},
                   {"dataset_fingerprint", report.dataset_fingerprint}};
    return sha256_hex(key.dump()).substr(0, 12);
}

json to_json(const RunReport& report) {
    json vocabulary = json::array();
    for (const auto& loc : report.vocabulary) {
        vocabulary.push_back(loc.name);
    }
    json steps = json::array();
    for (const auto& s : report.steps) {
        steps.push_back(step_json(s));
    }
    json transcript = json::array();
    for (const auto& t : report.transcript) {
        transcript.push_back(json{{"role", std::string(to_string(t.role))},
                                  {"text", t.text},
                                  {"tag", json{{"kind", std::string(to_string(t.tag.kind))},
                                               {"story_id", t.tag.story_id},
                                               {"q_index", index_json(t.tag.q_index)}}}});
    }
    return json{{"schema_version", kRunSchemaVersion},
                {"kind", "run_report"},
                {"run_id", run_id(report)},
                {"mode", std::string(to_string(report.mode))},
                {"config", config_json(report.config)},
                {"model", json{{"backend", report.model.backend}, {"parameters", report.model.parameters}}},
                {"dataset_fingerprint", report.dataset_fingerprint},
                {"vocabulary", std::move(vocabulary)},
                {"budget_exceeded", report.budget_exceeded},
                {"summary", summary_json(report)},
                {"steps", std::move(steps)},
                {"transcript", std::move(transcript)},
                {"started_at", report.started_at},
                {"finished_at", report.finished_at}};
}

RunReport run_report_from_json(const json& j) {
    if (j.value("kind", std::string()) != "run_report") {
        throw ConfigError("document is not a run report");
    }
    const int version = j.value("schema_version", 0);
    if (version != kRunSchemaVersion) {
        throw ConfigError("unsupported run report schema_version " + std::to_string(version));
    }
    RunReport r;
    r.mode = run_mode_from_string(j.at("mode").get<std::string>());
    r.config = config_from_json(j.at("config"));
    r.model.backend = j.at("model").at("backend").get<std::string>();
    r.model.parameters = j.at("model").at("parameters");
    r.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
    for (const auto& loc : j.at("vocabulary")) {
        r.vocabulary.push_back(Location{loc.get<std::string>()});
    }
    r.budget_exceeded = j.at("budget_exceeded").get<bool>();
    r.mean_story_tokens = j.at("summary").at("mean_story_tokens").get<double>();
    for (const auto& s : j.at("steps")) {
        r.steps.push_back(step_from_json(s));
    }
    for (const auto& t : j.at("transcript")) {
        const json& tag = t.at("tag");
        r.transcript.push_back(Turn{role_from_string(t.at("role").get<std::string>()), t.at("text").get<std::string>(),
                                    Tag{tag_kind_from_string(tag.at("kind").get<std::string>()),
                                        tag.at("story_id").get<std::size_t>(), index_from_json(tag.at("q_index"))}});
    }
    r.started_at = j.value("started_at", std::string());
    r.finished_at = j.value("finished_at", std::string());
    return r;
}

json strip_volatile(json j) {
    if (j.is_object()) {
        json out = json::object();
        for (auto& [key, value] : j.items()) {
            if (key == "started_at" || key == "finished_at" || key == "latency_ms") {
                continue;
            }
            out[key] = strip_volatile(value);
        }
        return out;
    }
    if (j.is_array()) {
        for (auto& item : j) {
            item = strip_volatile(std::move(item));
        }
    }
    return j;
}

std::string steps_csv(const RunReport& report) {
    const std::string id = run_id(report);
    std::string out(kStepsCsvHeader);
    out += '\n';
    for (const auto& s : report.steps) {
        for (const auto& r : s.question_results) {
            out += id + ',' + std::to_string(s.step) + ',' + std::to_string(r.story_id) + ',' +
                   std::to_string(r.q_index) + ',' + std::string(to_string(r.mode)) + ',' + csv_field(r.raw_answer) +
                   ',' + csv_field(r.normalized) + ',' + csv_field(r.gold) + ',' + (r.correct ? "true" : "false") +
                   ',' + std::to_string(r.latency_ms) + ',' + std::to_string(r.prompt_tokens) + '\n';
        }
    }
    return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view doc) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const char c = doc[i];
        any = true;
        if (quoted) {
            if (c == '"' && i + 1 < doc.size() && doc[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < doc.size() && doc[i + 1] == '\n') {
                ++i;
            }
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field += c;
        }
    }
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string accuracy_svg(std::span<const RunReport> reports, std::span<const std::string> labels) {
    LinePlot plot("Accuracy vs. stories in context", "step i (stories 0..i in the session)", "accuracy per_i");
    plot.set_y_range(0.0, 1.0);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        std::vector<CurvePoint> points;
        const std::string label = label_at(reports, labels, i);
        for (const auto& s : reports[i].steps) {
            points.push_back(CurvePoint{s.step, s.cumulative_accuracy, label});
        }
        plot.add_series(label, points);
    }
    return plot.render();
}

std::string latency_svg(std::span<const RunReport> reports, std::span<const std::string> labels) {
    LinePlot plot("Answer latency vs. stories in context", "step i", "latency per step (ms)");
    for (std::size_t i = 0; i < reports.size(); ++i) {
        std::vector<CurvePoint> points;
        const std::string label = label_at(reports, labels, i);
        for (const auto& s : reports[i].steps) {
            points.push_back(CurvePoint{s.step, static_cast<double>(s.latency_ms), label});
        }
        plot.add_series(label, points);
    }
    return plot.render();
}

void emit_report(const RunReport& report, const std::filesystem::path& out_dir) {
    if (report.steps.empty()) {
        throw IoError("refusing to emit a report without steps");
    }
    const std::span<const RunReport> one(&report, 1);
    write_file(out_dir / "run.json", to_json(report).dump(2) + "\n");
    write_file(out_dir / "steps.csv", steps_csv(report));
    write_file(out_dir / "accuracy.svg", accuracy_svg(one, {}));
    write_file(out_dir / "latency.svg", latency_svg(one, {}));
}

void emit_comparison(std::span<const RunReport> reports, std::span<const std::string> labels,
                     const std::filesystem::path& out_dir) {
    write_file(out_dir / "accuracy.svg", accuracy_svg(reports, labels));
    write_file(out_dir / "latency.svg", latency_svg(reports, labels));
    std::string csv = "series,step,cumulative_accuracy,latency_ms,prompt_tokens\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const std::string label = csv_field(label_at(reports, labels, i));
        for (const auto& s : reports[i].steps) {
            std::ostringstream row;
            row << label << ',' << s.step << ',' << s.cumulative_accuracy << ',' << s.latency_ms << ','
                << s.prompt_tokens << '\n';
            csv += row.str();
        }
    }
    write_file(out_dir / "comparison.csv", csv);
}

std::vector<StepStats> accuracy_stats(std::span<const RunReport> runs) {
    std::vector<StepStats> out;
    if (runs.empty()) {
        return out;
    }
    std::size_t common = runs.front().steps.size();
    for (const auto& r : runs) {
        common = std::min(common, r.steps.size());
    }
    for (std::size_t i = 0; i < common; ++i) {
        double sum = 0.0;
        for (const auto& r : runs) {
            sum += r.steps[i].cumulative_accuracy;
        }
        const double mean = sum / static_cast<double>(runs.size());
        double var = 0.0;
        for (const auto& r : runs) {
            const double d = r.steps[i].cumulative_accuracy - mean;
            var += d * d;
        }
        out.push_back(StepStats{i, mean, std::sqrt(var / static_cast<double>(runs.size())), runs.size()});
    }
    return out;
}

std::string stats_svg(std::span<const StatsGroup> groups) {
    LinePlot plot("Mean accuracy vs. stories in context", "step i", "mean per_i");
    plot.set_y_range(0.0, 1.0);
    for (const auto& [label, stats] : groups) {
        std::vector<CurvePoint> points;
        for (const auto& s : stats) {
            points.push_back(CurvePoint{s.step, s.mean, label});
        }
        plot.add_series(label, points);
    }
    return plot.render();
}

std::string stats_csv(std::span<const StatsGroup> groups) {
    std::ostringstream out;
    out << "group,step,mean,stddev,n\n";
    for (const auto& [label, stats] : groups) {
        for (const auto& s : stats) {
            out << csv_field(label) << ',' << s.step << ',' << s.mean << ',' << s.stddev << ',' << s.n << '\n';
        }
    }
    return out.str();
}

std::vector<RescoreMismatch> rescore(const RunReport& report) {
    std::vector<RescoreMismatch> out;
    for (const auto& s : report.steps) {
        for (const auto& r : s.question_results) {
            const bool recomputed = !r.error && score(r.raw_answer, Location{r.gold}, report.vocabulary);
            if (recomputed != r.correct) {
                out.push_back(RescoreMismatch{s.step, r.story_id, r.q_index, r.correct, recomputed});
            }
        }
    }
    return out;
}

}  // namespace context_drift
