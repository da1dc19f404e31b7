#include "vizpod/run_config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <regex>
#include <set>

#include "vizpod/error.hpp"
#include "vizpod/jsonl.hpp"

namespace vizpod {
namespace {

using nlohmann::json;

const std::set<std::string> kChatStubs = {"judge-content", "judge-always-a", "judge-garbage", "judge-unavailable",
                                          "vlm-base", "vlm-finetuned"};

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) invalid(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) invalid(fmt::format("unknown field '{}' in {}", key, where));
    }
}

bool looks_like_secret(const std::string& key) {
    static const std::regex re("(^|_)(api_?key|token|secret|password|bearer)$", std::regex::icase);
    return std::regex_search(key, re);
}

ProviderSpec spec_from_json(const json& j, const std::string& where) {
    if (j.is_object()) {
        for (const auto& [key, _] : j.items()) {
            if (looks_like_secret(key)) {
                invalid(fmt::format("{}: inline credential '{}' is not allowed; name an environment variable in "
                                    "api_key_env instead",
                                    where, key));
            }
        }
    }
    check_keys(j, {"name", "stub", "base_url", "model", "api_key_env", "timeout_s"}, where);
    ProviderSpec s;
    s.name = j.value("name", std::string());
    if (j.contains("stub")) s.stub = j["stub"].get<std::string>();
    s.endpoint.name = s.name;
    s.endpoint.base_url = j.value("base_url", std::string());
    s.endpoint.model = j.value("model", std::string());
    s.endpoint.api_key_env = j.value("api_key_env", std::string());
    s.endpoint.timeout_s = j.value("timeout_s", s.endpoint.timeout_s);
    return s;
}

json to_json(const ProviderSpec& s) {
    json j = {{"name", s.name}};
    if (s.stub) {
        j["stub"] = *s.stub;
        return j;
    }
    j["base_url"] = s.endpoint.base_url;
    j["model"] = s.endpoint.model;
    if (!s.endpoint.api_key_env.empty()) j["api_key_env"] = s.endpoint.api_key_env;
    j["timeout_s"] = s.endpoint.timeout_s;
    return j;
}

void validate_spec(const ProviderSpec& s, const std::string& role, const std::set<std::string>& stub_kinds) {
    if (s.name.empty()) invalid(role + " provider needs a name");
    if (s.stub) {
        if (!stub_kinds.count(*s.stub)) invalid(fmt::format("{} '{}': unknown stub kind '{}'", role, s.name, *s.stub));
        return;
    }
    static const std::regex url("^https?://[^/\\s:]+(:[0-9]+)?(/\\S*)?$");
    if (!std::regex_match(s.endpoint.base_url, url)) {
        invalid(fmt::format("{} '{}': base_url '{}' is not an http(s) URL", role, s.name, s.endpoint.base_url));
    }
    static const std::regex env("^[A-Za-z_][A-Za-z0-9_]*$");
    if (!s.endpoint.api_key_env.empty() && !std::regex_match(s.endpoint.api_key_env, env)) {
        invalid(fmt::format("{} '{}': api_key_env must be an environment variable name", role, s.name));
    }
    if (s.endpoint.timeout_s <= 0) invalid(fmt::format("{} '{}': timeout_s must be positive", role, s.name));
}

std::optional<ProviderSpec> optional_spec(const json& providers, const char* key) {
    if (!providers.contains(key) || providers[key].is_null()) return std::nullopt;
    return spec_from_json(providers[key], std::string("providers.") + key);
}

std::vector<ProviderSpec> spec_list(const json& providers, const char* key) {
    std::vector<ProviderSpec> out;
    if (!providers.contains(key)) return out;
    if (!providers[key].is_array()) invalid(std::string("providers.") + key + " must be an array");
    for (std::size_t i = 0; i < providers[key].size(); ++i) {
        out.push_back(spec_from_json(providers[key][i], fmt::format("providers.{}[{}]", key, i)));
    }
    return out;
}

}  // namespace

RetryPolicy RunConfig::retry_policy() const {
    RetryPolicy p;
    p.max_attempts = retry_max_attempts;
    p.initial_backoff = std::chrono::milliseconds(retry_initial_backoff_ms);
    p.max_backoff = std::chrono::milliseconds(retry_max_backoff_ms);
    return p;
}

void RunConfig::validate() const {
    if (jobs == 0) invalid("jobs must be >= 1");
    if (cache_dir.empty()) invalid("cache_dir must not be empty");
    std::set<std::string> names;
    for (const auto& j : judges) {
        validate_spec(j, "judge", kChatStubs);
        if (!names.insert("judge:" + j.name).second) invalid("duplicate judge name '" + j.name + "'");
    }
    for (const auto& v : vlms) {
        validate_spec(v, "vlm", kChatStubs);
        if (!names.insert("vlm:" + v.name).second) invalid("duplicate vlm name '" + v.name + "'");
    }
    if (extractor) validate_spec(*extractor, "extractor", {"extractor"});
    if (promptgen) validate_spec(*promptgen, "promptgen", {"promptgen"});
    if (image) validate_spec(*image, "image", {"image"});
    if (embedding) validate_spec(*embedding, "embedding", {"embedding"});
    if (!focus_system.empty() && !vlms.empty() && !names.count("vlm:" + focus_system)) {
        invalid("focus_system '" + focus_system + "' is not a configured vlm");
    }
    try {
        grounding.validate();
    } catch (const Error& e) {
        invalid(e.what());
    }
    if (parse.label_max_words == 0) invalid("parse.label_max_words must be >= 1");
    if (band.min_words > band.target_min || band.target_min > band.target_max || band.target_max > band.max_words) {
        invalid("datagen.band must satisfy min_words <= target_min <= target_max <= max_words");
    }
    if (filter.max_speaker_share <= 0.0 || filter.max_speaker_share > 1.0) {
        invalid("datagen.max_speaker_share must be in (0, 1]");
    }
    if (max_excerpts_per_episode == 0) invalid("datagen.max_excerpts_per_episode must be >= 1");
    if (stub_block_permille > 1000) invalid("datagen.stub_block_permille must be <= 1000");
    if (retry_max_attempts < 1) invalid("retry.max_attempts must be >= 1");
    if (retry_initial_backoff_ms < 0 || retry_max_backoff_ms < retry_initial_backoff_ms) {
        invalid("retry backoffs must satisfy 0 <= initial_backoff_ms <= max_backoff_ms");
    }
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    try {
        check_keys(j, {"cache_dir", "jobs", "focus_system", "providers", "parse", "grounding", "judge", "datagen",
                       "retry"},
                   "config");
        c.cache_dir = j.value("cache_dir", c.cache_dir.string());
        c.jobs = j.value("jobs", c.jobs);
        c.focus_system = j.value("focus_system", c.focus_system);

        if (j.contains("providers")) {
            const auto& p = j["providers"];
            check_keys(p, {"judges", "vlms", "extractor", "promptgen", "image", "embedding"}, "providers");
            c.judges = spec_list(p, "judges");
            c.vlms = spec_list(p, "vlms");
            c.extractor = optional_spec(p, "extractor");
            c.promptgen = optional_spec(p, "promptgen");
            c.image = optional_spec(p, "image");
            c.embedding = optional_spec(p, "embedding");
        }
        if (j.contains("parse")) {
            const auto& p = j["parse"];
            check_keys(p, {"label_max_words", "merge_adjacent_same_speaker", "strip_stage_directions"}, "parse");
            c.parse.label_max_words = p.value("label_max_words", c.parse.label_max_words);
            c.parse.merge_adjacent_same_speaker =
                p.value("merge_adjacent_same_speaker", c.parse.merge_adjacent_same_speaker);
            c.parse.strip_stage_directions = p.value("strip_stage_directions", c.parse.strip_stage_directions);
        }
        if (j.contains("grounding")) {
            check_keys(j["grounding"],
                       {"w", "report_scale", "chunk_max_tokens", "chunk_aggregation", "image_aggregation",
                        "max_concurrency"},
                       "grounding");
            c.grounding = grounding_config_from_json(j["grounding"]);
        }
        if (j.contains("judge")) {
            const auto& p = j["judge"];
            check_keys(p, {"debias", "temperature"}, "judge");
            c.judge_debias = p.value("debias", c.judge_debias);
            c.judge_temperature = p.value("temperature", c.judge_temperature);
        }
        if (j.contains("datagen")) {
            const auto& p = j["datagen"];
            check_keys(p,
                       {"required_speakers", "min_words", "min_turns", "max_speaker_share", "band",
                        "max_excerpts_per_episode", "synthetic_episodes", "synthetic_seed", "stub_block_permille"},
                       "datagen");
            c.filter.required_speakers = p.value("required_speakers", c.filter.required_speakers);
            c.filter.min_words = p.value("min_words", c.filter.min_words);
            c.filter.min_turns = p.value("min_turns", c.filter.min_turns);
            c.filter.max_speaker_share = p.value("max_speaker_share", c.filter.max_speaker_share);
            if (p.contains("band")) {
                const auto& b = p["band"];
                check_keys(b, {"min_words", "max_words", "target_min", "target_max"}, "datagen.band");
                c.band.min_words = b.value("min_words", c.band.min_words);
                c.band.max_words = b.value("max_words", c.band.max_words);
                c.band.target_min = b.value("target_min", c.band.target_min);
                c.band.target_max = b.value("target_max", c.band.target_max);
            }
            c.max_excerpts_per_episode = p.value("max_excerpts_per_episode", c.max_excerpts_per_episode);
            c.synthetic_episodes = p.value("synthetic_episodes", c.synthetic_episodes);
            c.synthetic_seed = p.value("synthetic_seed", c.synthetic_seed);
            c.stub_block_permille = p.value("stub_block_permille", c.stub_block_permille);
        }
        if (j.contains("retry")) {
            const auto& p = j["retry"];
            check_keys(p, {"max_attempts", "initial_backoff_ms", "max_backoff_ms"}, "retry");
            c.retry_max_attempts = p.value("max_attempts", c.retry_max_attempts);
            c.retry_initial_backoff_ms = p.value("initial_backoff_ms", c.retry_initial_backoff_ms);
            c.retry_max_backoff_ms = p.value("max_backoff_ms", c.retry_max_backoff_ms);
        }
    } catch (const nlohmann::json::exception& e) {
        invalid(std::string("malformed config: ") + e.what());
    }
    if (c.focus_system.empty() && !c.vlms.empty()) c.focus_system = c.vlms.front().name;
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = read_json(path);
    } catch (const nlohmann::json::exception& e) {
        invalid(path.string() + ": " + e.what());
    }
    return run_config_from_json(j);
}

json to_json(const RunConfig& c) {
    json providers = json::object();
    providers["judges"] = json::array();
    for (const auto& s : c.judges) providers["judges"].push_back(to_json(s));
    providers["vlms"] = json::array();
    for (const auto& s : c.vlms) providers["vlms"].push_back(to_json(s));
    auto put = [&](const char* key, const std::optional<ProviderSpec>& s) {
        providers[key] = s ? to_json(*s) : json(nullptr);
    };
    put("extractor", c.extractor);
    put("promptgen", c.promptgen);
    put("image", c.image);
    put("embedding", c.embedding);
    return {{"cache_dir", c.cache_dir.generic_string()},
            {"jobs", c.jobs},
            {"focus_system", c.focus_system},
            {"providers", providers},
            {"parse",
             {{"label_max_words", c.parse.label_max_words},
              {"merge_adjacent_same_speaker", c.parse.merge_adjacent_same_speaker},
              {"strip_stage_directions", c.parse.strip_stage_directions}}},
            {"grounding", to_json(c.grounding)},
            {"judge", {{"debias", c.judge_debias}, {"temperature", c.judge_temperature}}},
            {"datagen",
             {{"required_speakers", c.filter.required_speakers},
              {"min_words", c.filter.min_words},
              {"min_turns", c.filter.min_turns},
              {"max_speaker_share", c.filter.max_speaker_share},
              {"band",
               {{"min_words", c.band.min_words},
                {"max_words", c.band.max_words},
                {"target_min", c.band.target_min},
                {"target_max", c.band.target_max}}},
              {"max_excerpts_per_episode", c.max_excerpts_per_episode},
              {"synthetic_episodes", c.synthetic_episodes},
              {"synthetic_seed", c.synthetic_seed},
              {"stub_block_permille", c.stub_block_permille}}},
            {"retry",
             {{"max_attempts", c.retry_max_attempts},
              {"initial_backoff_ms", c.retry_initial_backoff_ms},
              {"max_backoff_ms", c.retry_max_backoff_ms}}}};
}

RunConfig dry_run_config(RunConfig c) {
    auto stubbed = [](std::string name, std::string kind) {
        ProviderSpec s;
        s.name = std::move(name);
        s.stub = std::move(kind);
        s.endpoint.name = s.name;
        return s;
    };
    if (c.judges.empty()) {
        c.judges = {stubbed("judge-1", "judge-content"), stubbed("judge-2", "judge-content"),
                    stubbed("judge-3", "judge-always-a")};
    } else {
        for (auto& j : c.judges) j = stubbed(j.name, "judge-content");
    }
    if (c.vlms.empty()) {
        c.vlms = {stubbed("finetuned", "vlm-finetuned"), stubbed("base", "vlm-base")};
    } else {
        for (std::size_t i = 0; i < c.vlms.size(); ++i) {
            c.vlms[i] = stubbed(c.vlms[i].name, i == 0 ? "vlm-finetuned" : "vlm-base");
        }
    }
    if (c.focus_system.empty() ||
        std::none_of(c.vlms.begin(), c.vlms.end(), [&](const ProviderSpec& s) { return s.name == c.focus_system; })) {
        c.focus_system = c.vlms.front().name;
    }
    c.extractor = stubbed("extractor", "extractor");
    c.promptgen = stubbed("promptgen", "promptgen");
    c.image = stubbed("image", "image");
    c.embedding = stubbed("embedding", "embedding");
    c.retry_initial_backoff_ms = 0;
    c.retry_max_backoff_ms = 0;
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------

ChatClient& Providers::chat(const ProviderSpec& spec, ErrorCode unavailable) {
    if (!spec.stub) {
        chats_.push_back(make_http_chat_client(spec.endpoint, unavailable));
        return *chats_.back();
    }
    const auto& kind = *spec.stub;
    if (kind == "vlm-base" || kind == "vlm-finetuned") {
        stub::StubVlm::Options o;
        o.profile = kind == "vlm-base" ? stub::StubVlm::Profile::Base : stub::StubVlm::Profile::Finetuned;
        o.clock = &fake_clock_;
        chats_.push_back(std::make_unique<stub::StubVlm>(spec.name, o));
    } else {
        auto mode = stub::StubJudge::Mode::Content;
        if (kind == "judge-always-a") mode = stub::StubJudge::Mode::AlwaysA;
        if (kind == "judge-garbage") mode = stub::StubJudge::Mode::Garbage;
        if (kind == "judge-unavailable") mode = stub::StubJudge::Mode::Unavailable;
        chats_.push_back(std::make_unique<stub::StubJudge>(spec.name, mode));
    }
    return *chats_.back();
}

const ProviderSpec& Providers::require(const std::optional<ProviderSpec>& spec, const char* what) const {
    if (!spec) invalid(std::string("no ") + what + " provider configured");
    return *spec;
}

std::vector<JudgeEndpoint> Providers::judges(const std::vector<std::string>& only) {
    for (const auto& name : only) {
        if (std::none_of(cfg_.judges.begin(), cfg_.judges.end(), [&](const ProviderSpec& s) { return s.name == name; })) {
            invalid("unknown judge '" + name + "'");
        }
    }
    std::vector<JudgeEndpoint> out;
    for (const auto& s : cfg_.judges) {
        if (!only.empty() && std::find(only.begin(), only.end(), s.name) == only.end()) continue;
        out.push_back({s.name, &chat(s, ErrorCode::JudgeUnavailable), s.endpoint.model});
    }
    if (out.empty()) invalid("no judges configured");
    return out;
}

std::vector<Providers::Vlm> Providers::vlms() {
    std::vector<Vlm> out;
    for (const auto& s : cfg_.vlms) {
        out.push_back({s.name, &chat(s, ErrorCode::VlmUnavailable), s.stub ? s.name : s.endpoint.model});
    }
    if (out.empty()) invalid("no vlms configured");
    return out;
}

ExcerptExtractor& Providers::extractor() {
    if (!extractor_) {
        const auto& s = require(cfg_.extractor, "extractor");
        if (s.stub) extractor_ = std::make_unique<stub::StubExcerptExtractor>();
        else extractor_ = make_chat_extractor(chat(s, ErrorCode::ExtractorUnavailable), s.endpoint.model);
    }
    return *extractor_;
}

ImagePromptGenerator& Providers::promptgen() {
    if (!promptgen_) {
        const auto& s = require(cfg_.promptgen, "promptgen");
        if (s.stub) promptgen_ = std::make_unique<stub::StubImagePromptGenerator>();
        else promptgen_ = make_chat_prompt_generator(chat(s, ErrorCode::PromptGenUnavailable), s.endpoint.model);
    }
    return *promptgen_;
}

ImageClient& Providers::image() {
    if (!image_) {
        const auto& s = require(cfg_.image, "image");
        if (s.stub) {
            stub::StubImageClient::Options o;
            o.block_permille = cfg_.stub_block_permille;
            image_ = std::make_unique<stub::StubImageClient>(o);
        } else {
            image_ = make_http_image_client(s.endpoint);
        }
    }
    return *image_;
}

EmbeddingProvider& Providers::embedding() {
    if (!embedding_) {
        const auto& s = require(cfg_.embedding, "embedding");
        if (s.stub) embedding_ = std::make_unique<stub::StubEmbeddingProvider>();
        else embedding_ = make_http_embedding_provider(s.endpoint);
    }
    return *embedding_;
}

Clock Providers::clock() {
    const bool any_stub = std::any_of(cfg_.vlms.begin(), cfg_.vlms.end(), [](const ProviderSpec& s) {
        return s.stub.has_value();
    });
    if (!any_stub) return steady_clock_seconds();
    return [this] { return fake_clock_.now(); };
}

}  // namespace vizpod
