#include <gtest/gtest.h>

#include <cstdlib>

#include "vizpod/error.hpp"
#include "vizpod/run_config.hpp"

using namespace vizpod;
using nlohmann::json;

namespace {

json sample_config() {
    return json::parse(R"({
      "cache_dir": "cache",
      "jobs": 2,
      "providers": {
        "judges": [
          {"name": "j1", "base_url": "https://api.example.com/v1", "model": "judge-a", "api_key_env": "JUDGE_KEY"},
          {"name": "j2", "stub": "judge-always-a"}
        ],
        "vlms": [
          {"name": "ft", "base_url": "http://localhost:8000", "model": "ft-32b"},
          {"name": "base", "stub": "vlm-base"}
        ],
        "embedding": {"name": "clip", "base_url": "http://localhost:9000"}
      },
      "judge": {"debias": false},
      "datagen": {"min_words": 400, "band": {"min_words": 500, "max_words": 2000}},
      "retry": {"max_attempts": 2}
    })");
}

std::optional<ErrorCode> code_of(const json& j) {
    try {
        run_config_from_json(j);
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

}  // namespace

TEST(RunConfig, ParsesAndRoundTrips) {
    const auto c = run_config_from_json(sample_config());
    EXPECT_EQ(c.jobs, 2u);
    ASSERT_EQ(c.judges.size(), 2u);
    EXPECT_EQ(c.judges[0].endpoint.api_key_env, "JUDGE_KEY");
    EXPECT_EQ(c.judges[1].stub, "judge-always-a");
    EXPECT_EQ(c.focus_system, "ft");
    EXPECT_FALSE(c.judge_debias);
    EXPECT_EQ(c.filter.min_words, 400u);
    EXPECT_EQ(c.retry_policy().max_attempts, 2);
    const auto again = run_config_from_json(to_json(c));
    EXPECT_EQ(to_json(again), to_json(c));
}

TEST(RunConfig, RejectsUnknownFields) {
    auto j = sample_config();
    j["judge"]["temprature"] = 0.2;
    EXPECT_EQ(code_of(j), ErrorCode::ConfigInvalid);
    j = sample_config();
    j["extra"] = 1;
    EXPECT_EQ(code_of(j), ErrorCode::ConfigInvalid);
}

TEST(RunConfig, RejectsInlineSecrets) {
    for (const char* key : {"api_key", "apikey", "token", "bearer", "client_secret", "Password"}) {
        auto j = sample_config();
        j["providers"]["judges"][0][key] = "sk-live-123";
        try {
            run_config_from_json(j);
            FAIL() << key;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
            EXPECT_EQ(std::string(e.what()).find("sk-live-123"), std::string::npos);
        }
    }
}

TEST(RunConfig, ValidationErrors) {
    auto bad = [](auto mutate) -> std::optional<ErrorCode> {
        auto j = sample_config();
        mutate(j);
        return code_of(j);
    };
    EXPECT_EQ(bad([](json& j) { j["jobs"] = 0; }), ErrorCode::ConfigInvalid);
    EXPECT_EQ(bad([](json& j) { j["providers"]["judges"][0]["base_url"] = "ftp://x"; }), ErrorCode::ConfigInvalid);
    EXPECT_EQ(bad([](json& j) { j["providers"]["judges"][1]["stub"] = "nope"; }), ErrorCode::ConfigInvalid);
    EXPECT_EQ(bad([](json& j) { j["providers"]["judges"][1]["name"] = "j1"; }), ErrorCode::ConfigInvalid);
    EXPECT_EQ(bad([](json& j) { j["providers"]["judges"][0]["api_key_env"] = "not a var"; }), ErrorCode::ConfigInvalid);
    EXPECT_EQ(bad([](json& j) { j["focus_system"] = "ghost"; }), ErrorCode::ConfigInvalid);
    EXPECT_EQ(bad([](json& j) { j["datagen"]["band"]["target_min"] = 3000; }), ErrorCode::ConfigInvalid);
    EXPECT_EQ(bad([](json& j) { j["jobs"] = "two"; }), ErrorCode::ConfigInvalid);
}

TEST(RunConfig, DryRunStubsEverything) {
    const auto d = dry_run_config();
    ASSERT_EQ(d.judges.size(), 3u);
    for (const auto& j : d.judges) EXPECT_TRUE(j.stub.has_value());
    EXPECT_EQ(d.judges[2].stub, "judge-always-a");
    ASSERT_EQ(d.vlms.size(), 2u);
    EXPECT_EQ(d.focus_system, "finetuned");
    EXPECT_TRUE(d.extractor && d.extractor->stub);
    EXPECT_TRUE(d.embedding && d.embedding->stub);
    EXPECT_EQ(d.retry_initial_backoff_ms, 0);

    const auto from = dry_run_config(run_config_from_json(sample_config()));
    ASSERT_EQ(from.judges.size(), 2u);
    EXPECT_EQ(from.judges[0].name, "j1");
    EXPECT_EQ(from.judges[0].stub, "judge-content");
    EXPECT_EQ(from.vlms[0].name, "ft");
    EXPECT_EQ(from.focus_system, "ft");
}

TEST(Providers, BuildsStubsAndRejectsUnknownJudge) {
    const auto cfg = dry_run_config();
    Providers p(cfg);
    EXPECT_EQ(p.judges().size(), 3u);
    EXPECT_EQ(p.judges({"judge-2"}).size(), 1u);
    EXPECT_THROW(p.judges({"nobody"}), Error);
    const auto v = p.vlms();
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(p.clock()(), 0.0);
    EXPECT_EQ(p.embedding().embed_text("a").dim(), 256u);
}

TEST(Providers, MissingProviderIsConfigInvalid) {
    RunConfig c;
    Providers p(c);
    try {
        p.image();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
    }
}

TEST(RunConfig, ShippedPresetsLoad) {
    for (const char* name : {"example.json", "judges_frontier.json"}) {
        const auto c = load_run_config(std::filesystem::path(VIZPOD_CONFIG_DIR) / name);
        EXPECT_FALSE(c.judges.empty()) << name;
        for (const auto& j : c.judges) {
            if (!j.stub) EXPECT_FALSE(j.endpoint.api_key_env.empty()) << name;
        }
    }
    EXPECT_EQ(load_run_config(std::filesystem::path(VIZPOD_CONFIG_DIR) / "judges_frontier.json").judges.size(), 3u);
}
