/// @file acceptance.cpp
/// @brief Offline acceptance suite. Prints one PASS/FAIL line per criterion;
/// `--only <name>` runs a single criterion and `--list` prints the names.

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>

#include "../test_support.hpp"
#include "vizpod/dataset_stats.hpp"
#include "vizpod/genclient.hpp"
#include "vizpod/grounding.hpp"
#include "vizpod/judge.hpp"
#include "vizpod/jsonl.hpp"
#include "vizpod/pipeline.hpp"
#include "vizpod/stub_clients.hpp"
#include "vizpod/style_metrics.hpp"

using namespace vizpod;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Outcome sample_word_counts() {
    const std::vector<std::size_t> stated = {689, 1191, 979, 689, 935, 910};
    Outcome o;
    std::vector<std::string> cells;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < stated.size(); ++i) {
        const auto raw = tsupport::slurp(tsupport::fixture("sample_transcripts/" + tsupport::sample_transcript_files()[i]));
        const auto words = document_word_count(parse_transcript(raw));
        const double dev = std::abs(static_cast<double>(words) - stated[i]) / stated[i];
        const bool ok = dev <= 0.05;
        cells.push_back(fmt::format("B{} {}/{}{}", i + 1, words, stated[i], ok ? "" : "!"));
        o.require(ok, fmt::format("B{} off by {:.1f}%", i + 1, 100 * dev));
    }
    const double elapsed = seconds_since(t0);
    o.require(elapsed < 1.0, fmt::format("took {:.3f}s", elapsed));
    o.detail = fmt::format("{} in {:.3f}s{}{}", fmt::join(cells, ", "), elapsed, o.pass ? "" : " :: ", o.detail);
    return o;
}

Outcome switch_rate_cross_check() {
    Outcome o;
    const double ft = switch_rate(15.8, 972.1);
    const double base = switch_rate(24.5, 918.6);
    o.require(std::abs(ft - 16.25) < 0.005, fmt::format("ft rate {:.4f}", ft));
    o.require(std::abs(ft - 16.0) <= 0.5, "ft rate outside 16.0 +/- 0.5");
    o.require(std::abs(base - 26.67) < 0.005, fmt::format("base rate {:.4f}", base));
    o.require(std::abs(base - 27.0) <= 0.5, "base rate outside 27.0 +/- 0.5");
    o.detail = fmt::format("16.25 -> {:.2f} (published 16.0), 26.67 -> {:.2f} (published 27.0)", ft, base) +
               (o.pass ? "" : " :: " + o.detail);
    return o;
}

/// Two-speaker transcript with `turns` turns totalling `words` words.
Transcript sized_transcript(std::size_t turns, std::size_t words, std::size_t salt) {
    std::string raw;
    for (std::size_t t = 0; t < turns; ++t) {
        const std::size_t n = words / turns + (t < words % turns ? 1 : 0);
        raw += t % 2 ? "Guest:" : "Host:";
        for (std::size_t w = 0; w < n; ++w) raw += fmt::format(" v{}", (salt * 131 + t * 17 + w) % 503);
        raw += "\n";
    }
    return parse_transcript(raw);
}

Outcome source_corpus_trio() {
    std::vector<StyleReport> reports;
    for (std::size_t i = 0; i < 200; ++i) {
        reports.push_back(style_report(i % 2 ? sized_transcript(14, 943, i) : sized_transcript(15, 1010, i)));
    }
    const auto agg = aggregate_reports(reports);
    Outcome o;
    const double wpt = agg.avg_turn_length.mean, rate = agg.switch_rate.mean, len = agg.total_words.mean;
    o.require(std::abs(wpt - 67.3) <= 0.05, fmt::format("words/turn {:.3f}", wpt));
    o.require(std::abs(rate - 14.8) <= 0.05, fmt::format("switch rate {:.3f}", rate));
    o.require(std::abs(len - 975.8) / 975.8 <= 0.025, fmt::format("mean length {:.1f}", len));
    o.detail = fmt::format("words/turn {:.3f}, switch {:.3f}/1k, length {:.1f} over {} transcripts", wpt, rate, len,
                           agg.sample_count) +
               (o.pass ? "" : " :: " + o.detail);
    return o;
}

Outcome distinct_n_oracle() {
    Outcome o;
    std::size_t checked = 0;
    auto check = [&](const Transcript& t, const std::string& what) {
        const double got = distinct_n(t, 2);
        const double want = tsupport::oracle_distinct_n(t, 2);
        ++checked;
        o.require(got == want, fmt::format("{}: {} != {}", what, got, want));
    };
    for (const auto& f : tsupport::sample_transcript_files()) {
        check(parse_transcript(tsupport::slurp(tsupport::fixture("sample_transcripts/" + f))), f);
    }
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 100; ++i) {
        check(parse_transcript(tsupport::random_dialogue(rng, 2 + rng() % 30)), fmt::format("random #{}", i));
    }
    o.detail = fmt::format("{} transcripts, exact equality", checked) + (o.pass ? "" : " :: " + o.detail);
    return o;
}

std::string token_range(std::size_t from, std::size_t to) {
    std::string s;
    for (std::size_t i = from; i < to; ++i) s += (s.empty() ? "t" : " t") + std::to_string(i);
    return s;
}

Outcome grounding_properties() {
    Outcome o;
    // Three chunks of a 20-token transcript against three images, with
    // dyadic cosines so every value is exact.
    stub::TableEmbeddingProvider p;
    const std::vector<std::vector<double>> chunks = {{1, 1, 1, 1}, {1, 0, 0, 0}, {1, -1, -1, -1}};
    const std::vector<std::vector<double>> images = {{1, 1, 1, -1}, {-1, 0, 0, 0}, {-1, -1, -1, -1}};
    p.texts[token_range(0, 8)] = chunks[0];
    p.texts[token_range(8, 16)] = chunks[1];
    p.texts[token_range(16, 20)] = chunks[2];
    std::vector<std::string> keys = {"img-a", "img-b", "img-c"};
    for (std::size_t i = 0; i < keys.size(); ++i) p.images[keys[i]] = images[i];
    GroundingConfig cfg;
    cfg.chunk_max_tokens = 8;
    const auto t = parse_transcript("Host: " + token_range(0, 12) + "\nGuest: " + token_range(12, 20));

    const auto r = sequence_clip_score(t, keys, p, cfg);
    std::vector<double> oracle;
    for (const auto& img : images) {
        double best = 0.0;
        for (const auto& c : chunks) best = std::max(best, tsupport::oracle_clip(c, img));
        oracle.push_back(best);
    }
    o.require(r.per_image_scores == oracle, "per-image scores differ from the exhaustive oracle");
    o.require(r.sequence_score == (oracle[0] + oracle[1] + oracle[2]) / 3.0, "sequence score differs from oracle mean");
    o.require(r.per_image_scores[1] == 0.0, "negative cosine not clamped to 0");

    std::sort(keys.begin(), keys.end());
    std::size_t perms = 0;
    do {
        ++perms;
        o.require(sequence_clip_score(t, keys, p, cfg).sequence_score == r.sequence_score,
                  "score changed under image permutation");
    } while (std::next_permutation(keys.begin(), keys.end()));

    stub::TableEmbeddingProvider same;
    same.texts[token_range(0, 5)] = {3, 4};
    same.images["x"] = {3, 4};
    const std::vector<std::string> one = {"x"};
    const double top = sequence_clip_score(parse_transcript("A: " + token_range(0, 5)), one, same, cfg).sequence_score;
    o.require(top == cfg.report_scale * cfg.w, fmt::format("identical vectors scored {}", top));

    stub::StubEmbeddingProvider hashed(64);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const std::vector<std::string> imgs = {stub::make_ppm(token_range(i, i + 4)), "noise-" + std::to_string(rng())};
        const auto rr = sequence_clip_score(parse_transcript("A: " + token_range(i, i + 90)), imgs, hashed, GroundingConfig{});
        for (double s : rr.per_image_scores) o.require(s >= 0.0 && s <= 250.0, fmt::format("score {} out of [0, 250]", s));
    }
    o.detail = fmt::format("oracle {{{}, {}, {}}}, {} permutations, bound {}, 100 random scores in [0, 250]", oracle[0],
                           oracle[1], oracle[2], perms, top) +
               (o.pass ? "" : " :: " + o.detail);
    return o;
}

Outcome judge_harness() {
    Outcome o;
    std::vector<Verdict> vs;
    std::map<std::string, SystemLabels> labels;
    for (int i = 0; i < 150; ++i) {
        Verdict v;
        v.sample_id = "s" + std::to_string(i);
        v.judge_id = "j";
        v.winner = i < 124 ? Winner::A : Winner::B;
        labels[v.sample_id] = {"ft", "base"};
        vs.push_back(v);
    }
    const auto hand = aggregate_win_rate(vs, labels, "ft");
    o.require(hand.pooled_rate && *hand.pooled_rate == 124.0 / 150.0, "124/150 not reproduced");
    o.require(fmt::format("{:.4f}", hand.pooled_rate.value_or(0)) == "0.8267", "124/150 != 0.8267");

    std::vector<ComparisonTask> tasks;
    std::map<std::string, SystemLabels> task_labels;
    for (int i = 0; i < 12; ++i) {
        ComparisonTask t;
        t.sample_id = "p" + std::to_string(i);
        t.transcript_a = parse_transcript(fmt::format(
            "Speaker 1: I remember hiking up there in the fog with my sister number {}\nSpeaker 2: that sounds like "
            "the trip where the map blew away and we laughed about it for hours",
            i));
        t.transcript_b = parse_transcript(fmt::format("Speaker 1: Fog {}.\nSpeaker 2: Yes.\nSpeaker 1: Map.", i));
        t.system_labels = {"ft", "base"};
        task_labels[t.sample_id] = t.system_labels;
        tasks.push_back(std::move(t));
    }
    stub::StubJudge fair("fair", stub::StubJudge::Mode::Content);
    stub::StubJudge biased("biased", stub::StubJudge::Mode::AlwaysA);
    const auto verdicts = run_panel(tasks, {{"fair", &fair, ""}, {"biased", &biased, ""}}, true, {}, 2);
    const auto r = aggregate_win_rate(verdicts, task_labels, "ft");
    std::size_t flagged_biased = 0, flagged_fair = 0;
    for (const auto& pair : r.inconsistent_pairs) {
        if (pair.ends_with("/biased")) ++flagged_biased;
        if (pair.ends_with("/fair")) ++flagged_fair;
    }
    o.require(flagged_biased == tasks.size(), fmt::format("biased judge flagged on {}/{}", flagged_biased, tasks.size()));
    o.require(flagged_fair == 0, fmt::format("content judge flagged on {} pairs", flagged_fair));
    const auto& per = r.per_judge;
    o.require(per.at("fair").rate() == 1.0 && per.at("biased").rate() == 0.5, "per-judge rates unexpected");
    o.detail = fmt::format("124/150 -> {:.4f}; biased stub flagged {}/{} pairs, content stub {}/{}",
                           hand.pooled_rate.value_or(0), flagged_biased, tasks.size(), flagged_fair, tasks.size()) +
               (o.pass ? "" : " :: " + o.detail);
    return o;
}

std::map<std::string, std::string> file_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = tsupport::slurp(e.path());
    }
    return out;
}

Outcome pipeline_dry_run() {
    Outcome o;
    tsupport::ScratchDir dir("acceptance-pipeline");
    auto run = [&](const std::string& out) {
        const auto cmd = fmt::format("\"{}\" --dry-run -q --cache \"{}\" pipeline --eval --episodes 20 --out \"{}\" > \"{}\" 2>&1",
                                     VIZPOD_CLI_PATH, (dir / "cache").string(), (dir / out).string(),
                                     (dir / (out + ".log")).string());
        const auto t0 = std::chrono::steady_clock::now();
        const int rc = std::system(cmd.c_str());
        const double elapsed = seconds_since(t0);
        o.require(rc == 0, fmt::format("{} exited with {}", out, rc));
        o.require(elapsed < 10.0, fmt::format("{} took {:.2f}s", out, elapsed));
        return elapsed;
    };
    const double cold = run("run1");
    const double warm = run("run2");
    if (!o.pass) return o;

    const auto root = dir / "run1";
    std::set<std::string> episodes;
    for (const auto& l : read_jsonl(root / "excerpts.jsonl")) episodes.insert(l["episode_id"].get<std::string>());
    for (const auto& l : read_jsonl(root / "extract_log.jsonl")) episodes.insert(l["episode_id"].get<std::string>());
    o.require(episodes.size() == 20, fmt::format("{} episodes accounted for", episodes.size()));

    const auto manifests = read_manifests(root / "manifests.jsonl");
    const WordBand band;
    std::vector<std::size_t> image_counts;
    for (const auto& m : manifests) {
        o.require(m.consistent(), m.sample_id + ": inconsistent counts");
        o.require(m.prompts.size() == kScenesPerExcerpt, m.sample_id + ": prompt count");
        o.require(m.image_count >= kMinImagesPerSample, m.sample_id + ": too few images");
        o.require(band.accepts(m.excerpt.word_count), m.sample_id + ": outside word band");
        o.require(m.excerpt.speaker_labels.size() == 2, m.sample_id + ": speaker count");
        image_counts.push_back(m.image_count);
    }
    o.require(!manifests.empty(), "no manifests");
    for (const auto& e : read_jsonl(root / "excluded.jsonl")) o.require(e.contains("reason"), "exclusion without reason");

    const auto stats = read_json(root / "stats.json");
    std::vector<std::size_t> lo;
    std::size_t total = 0;
    for (const auto& b : stats["word_counts"]) {
        lo.push_back(b["lo"].get<std::size_t>());
        total += b["count"].get<std::size_t>();
    }
    o.require(lo == std::vector<std::size_t>(kWordBinEdges.begin(), kWordBinEdges.end()), "word bin edges differ");
    o.require(stats["word_counts"].back()["hi"].is_null(), "last word bin not open-ended");
    o.require(total == manifests.size(), "word histogram does not sum to sample count");
    std::vector<std::string> image_labels;
    for (const auto& b : stats["image_counts"]) image_labels.push_back(b["label"]);
    o.require(image_labels == std::vector<std::string>{"0-1", "2", "3", "4", "5", "6+"}, "image bins differ");
    o.require(fs::exists(root / "eval" / "report.json"), "no evaluation report");

    const auto a = file_tree(dir / "run1"), b = file_tree(dir / "run2");
    std::size_t differing = 0;
    for (const auto& [k, v] : a) differing += !b.count(k) || b.at(k) != v;
    o.require(a.size() == b.size() && differing == 0, fmt::format("{} files differ on rerun", differing));
    o.detail = fmt::format("{} manifests from 20 episodes, {} files byte-identical on rerun, cold {:.2f}s / warm {:.2f}s",
                           manifests.size(), a.size(), cold, warm) +
               (o.pass ? "" : " :: " + o.detail);
    return o;
}

Outcome table_replay() {
    Outcome o;
    std::vector<std::size_t> images;
    const std::vector<std::pair<std::size_t, std::size_t>> t1 = {{2, 7}, {3, 31}, {4, 223}, {5, 3737}, {6, 2}};
    const std::vector<double> t1_pct = {0.2, 0.8, 5.6, 93.4, 0.1};
    for (auto [k, n] : t1) images.insert(images.end(), n, k);
    const auto ib = image_count_histogram(images);
    for (std::size_t i = 0; i < t1.size(); ++i) {
        o.require(std::abs(ib[i + 1].percent() - t1_pct[i]) <= 0.05 + 1e-9,
                  fmt::format("{} images: {} vs {}", ib[i + 1].label, ib[i + 1].percent(), t1_pct[i]));
    }
    const std::vector<std::size_t> t2 = {131, 191, 251, 443, 537, 619, 1104, 604, 111, 9};
    const std::vector<double> t2_pct = {3.3, 4.8, 6.3, 11.1, 13.4, 15.5, 27.6, 15.1, 2.8, 0.2};
    std::vector<std::size_t> words;
    for (std::size_t b = 0; b < t2.size(); ++b) {
        const std::size_t lo = kWordBinEdges[b];
        const std::size_t hi = b + 1 < kWordBinEdges.size() ? kWordBinEdges[b + 1] : lo + 1000;
        for (std::size_t i = 0; i < t2[b]; ++i) words.push_back(lo + (i * 7919) % (hi - lo));
    }
    const auto wb = word_count_histogram(words);
    for (std::size_t i = 0; i < t2.size(); ++i) {
        o.require(wb[i].count == t2[i], fmt::format("{} count {}", wb[i].label, wb[i].count));
        o.require(std::abs(wb[i].percent() - t2_pct[i]) <= 0.05 + 1e-9,
                  fmt::format("{}: {} vs {}", wb[i].label, wb[i].percent(), t2_pct[i]));
    }
    o.detail = fmt::format("3,737/4,000 -> {:.1f}%, 1,104/4,000 -> {:.1f}%, {} + {} rows checked", ib[4].percent(),
                           wb[6].percent(), t1.size(), t2.size()) +
               (o.pass ? "" : " :: " + o.detail);
    return o;
}

Outcome config_emission() {
    Outcome o;
    const std::vector<std::string> rows = {
        "lora_rank = 16",           "lora_alpha = 32",          "lora_dropout = 0.05",
        "learning_rate = 4e-6",     "batch_size_per_gpu = 1",   "gradient_accumulation = 4",
        "effective_batch_size = 32", "epochs = 1",               "weight_decay = 0.1",
        "warmup_ratio = 0.1",       "max_grad_norm = 0.3",      "lr_scheduler = Cosine",
        "neftune_noise_alpha = 5.0", "model_max_length = 8192", "precision = bf16",
        "deepspeed = ZeRO-3",       "gradient_checkpointing = True"};
    const auto doc = emit_training_config();
    std::size_t found = 0;
    for (const auto& r : rows) {
        const bool ok = doc.find("\n" + r + "\n") != std::string::npos;
        found += ok;
        o.require(ok, "missing '" + r + "'");
    }
    o.require(doc == emit_training_config(), "re-emission differs");
    o.detail = fmt::format("{}/{} key/values present, re-emission identical", found, rows.size()) +
               (o.pass ? "" : " :: " + o.detail);
    return o;
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
    static const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
        {"sample_word_counts", sample_word_counts},
        {"switch_rate_cross_check", switch_rate_cross_check},
        {"source_corpus_trio", source_corpus_trio},
        {"distinct_n_oracle", distinct_n_oracle},
        {"grounding_properties", grounding_properties},
        {"judge_harness", judge_harness},
        {"pipeline_dry_run", pipeline_dry_run},
        {"table_replay", table_replay},
        {"config_emission", config_emission},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::err);
    std::string only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--list") {
            for (const auto& [name, _] : criteria()) fmt::print("{}\n", name);
            return 0;
        }
        if (a == "--only" && i + 1 < argc) {
            only = argv[++i];
        } else {
            fmt::print(stderr, "usage: {} [--list] [--only <criterion>]\n", argv[0]);
            return 2;
        }
    }
    int failures = 0, ran = 0;
    for (const auto& [name, fn] : criteria()) {
        if (!only.empty() && name != only) continue;
        ++ran;
        Outcome out;
        try {
            out = fn();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        failures += !out.pass;
        fmt::print("{} {}: {}\n", out.pass ? "PASS" : "FAIL", name, out.detail);
    }
    if (ran == 0) {
        fmt::print(stderr, "unknown criterion '{}'\n", only);
        return 2;
    }
    return failures == 0 ? 0 : 1;
}
