#include "context_drift/dataset.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "context_drift/errors.hpp"

namespace context_drift {

Dataset make_generated_dataset(const GenerationParams& params, std::size_t n_stories) {
    Dataset d;
    d.source = "generated";
    d.params = with_default_pools(params);
    d.stories = generate_dataset(*d.params, n_stories);
    for (const auto& loc : d.params->location_pool) {
        d.locations.push_back(Location{loc});
    }
    return d;
}

json to_json(const GenerationParams& p) {
    return json{{"n_actors_per_story", p.n_actors_per_story},
                {"n_statements_per_story", p.n_statements_per_story},
                {"n_questions_per_story", p.n_questions_per_story},
                {"name_pool", p.name_pool},
                {"location_pool", p.location_pool},
                {"verb_pool", p.verb_pool},
                {"seed", p.seed},
                {"unique_names", p.unique_names}};
}

GenerationParams generation_params_from_json(const json& j) {
    GenerationParams p;
    p.n_actors_per_story = j.at("n_actors_per_story").get<std::size_t>();
    p.n_statements_per_story = j.at("n_statements_per_story").get<std::size_t>();
    p.n_questions_per_story = j.at("n_questions_per_story").get<std::size_t>();
    p.name_pool = j.value("name_pool", std::vector<std::string>{});
    p.location_pool = j.value("location_pool", std::vector<std::string>{});
    p.verb_pool = j.value("verb_pool", std::vector<std::string>{});
    p.seed = j.at("seed").get<std::uint64_t>();
    p.unique_names = j.value("unique_names", true);
    return p;
}

json to_json(const Story& story) {
    json statements = json::array();
    for (const auto& s : story.statements) {
        statements.push_back(json{{"actor", s.actor.name},
                                  {"verb_phrase", s.verb_phrase},
                                  {"destination", s.destination.name},
                                  {"surface_text", s.surface_text}});
    }
    json questions = json::array();
    for (const auto& q : story.questions) {
        questions.push_back(json{{"text", q.text},
                                 {"subject", q.subject.name},
                                 {"gold_answer", q.gold_answer.name},
                                 {"position", q.position},
                                 {"supporting_ids", q.supporting_ids}});
    }
    return json{{"id", story.id}, {"statements", std::move(statements)}, {"questions", std::move(questions)}};
}

Story story_from_json(const json& j) {
    Story story;
    story.id = j.at("id").get<std::size_t>();
    for (const auto& s : j.at("statements")) {
        story.statements.push_back(MovementStatement{Entity{s.at("actor").get<std::string>()},
                                                     s.at("verb_phrase").get<std::string>(),
                                                     Location{s.at("destination").get<std::string>()},
                                                     s.at("surface_text").get<std::string>()});
    }
    for (const auto& q : j.at("questions")) {
        Question question;
        question.text = q.at("text").get<std::string>();
        question.subject = Entity{q.at("subject").get<std::string>()};
        question.gold_answer = Location{q.at("gold_answer").get<std::string>()};
        question.position = q.value("position", story.statements.size());
        question.supporting_ids = q.value("supporting_ids", std::vector<std::size_t>{});
        story.questions.push_back(std::move(question));
    }
    return story;
}

namespace {

json content_json(const Dataset& d) {
    json locations = json::array();
    for (const auto& loc : d.locations) {
        locations.push_back(loc.name);
    }
    json stories = json::array();
    for (const auto& s : d.stories) {
        stories.push_back(to_json(s));
    }
    return json{{"locations", std::move(locations)}, {"stories", std::move(stories)}};
}

}  // namespace

json to_json(const Dataset& d) {
    json content = content_json(d);
    return json{{"schema_version", kDatasetSchemaVersion},
                {"kind", "dataset"},
                {"source", d.source},
                {"fingerprint", fingerprint(d)},
                {"params", d.params ? to_json(*d.params) : json(nullptr)},
                {"locations", std::move(content["locations"])},
                {"stories", std::move(content["stories"])}};
}

Dataset dataset_from_json(const json& j) {
    if (j.value("kind", std::string("dataset")) != "dataset") {
        throw ConfigError("document is not a dataset");
    }
    const int version = j.value("schema_version", 0);
    if (version != kDatasetSchemaVersion) {
        throw ConfigError("unsupported dataset schema_version " + std::to_string(version));
    }
    Dataset d;
    d.source = j.value("source", std::string("generated"));
    if (j.contains("params") && !j.at("params").is_null()) {
        d.params = generation_params_from_json(j.at("params"));
    }
    for (const auto& loc : j.at("locations")) {
        d.locations.push_back(Location{loc.get<std::string>()});
    }
    for (const auto& s : j.at("stories")) {
        d.stories.push_back(story_from_json(s));
    }
    return d;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

std::string fingerprint(const Dataset& dataset) { return "sha256:" + sha256_hex(content_json(dataset).dump()); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

Dataset load_dataset(const std::filesystem::path& path) {
    try {
        return dataset_from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    write_file(path, to_json(dataset).dump(2) + "\n");
}

std::vector<std::string> names_shared_across_stories(const std::vector<Story>& stories) {
    std::map<std::string, std::set<std::size_t>> owners;
    for (std::size_t i = 0; i < stories.size(); ++i) {
        for (const auto& s : stories[i].statements) {
            owners[s.actor.name].insert(i);
        }
        for (const auto& q : stories[i].questions) {
            owners[q.subject.name].insert(i);
        }
    }
    std::vector<std::string> shared;
    for (const auto& [name, where] : owners) {
        if (where.size() > 1) {
            shared.push_back(name);
        }
    }
    return shared;
}

}  // namespace context_drift
