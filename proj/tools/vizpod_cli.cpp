/// @file vizpod_cli.cpp
/// @brief Command-line front end: one subcommand per pipeline and evaluation stage.
///
/// Exit codes: 0 success, 1 stage error, 2 configuration or input error. Errors
/// are printed to stderr as one JSON object.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "vizpod/content_cache.hpp"
#include "vizpod/dataset_stats.hpp"
#include "vizpod/evaluation.hpp"
#include "vizpod/genclient.hpp"
#include "vizpod/jsonl.hpp"
#include "vizpod/parallel.hpp"
#include "vizpod/pipeline.hpp"
#include "vizpod/report.hpp"
#include "vizpod/run_config.hpp"
#include "vizpod/style_metrics.hpp"
#include "vizpod/synthetic_corpus.hpp"
#include "vizpod/util.hpp"

namespace fs = std::filesystem;
using namespace vizpod;

namespace {

struct Options {
    std::string config;
    std::string cache;
    bool dry_run = false;
    std::size_t jobs = 0;
    bool quiet = false;

    std::string input;
    std::string out;
    std::string requests;
    std::string grounding;
    std::string verdicts;
    std::vector<std::string> judges;
    std::optional<bool> debias;
    bool parallel = false;
    bool eval = false;
    std::size_t episodes = 0;
    std::optional<std::uint64_t> seed;
};

class Context {
public:
    explicit Context(const Options& o) : opts(o) {
        cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
        if (o.dry_run) cfg = dry_run_config(cfg);
        if (!o.cache.empty()) cfg.cache_dir = o.cache;
        if (o.jobs > 0) cfg.jobs = o.jobs;
        if (o.episodes > 0) cfg.synthetic_episodes = o.episodes;
        if (o.seed) cfg.synthetic_seed = *o.seed;
        if (o.debias) cfg.judge_debias = *o.debias;
        cfg.validate();
        providers = std::make_unique<Providers>(cfg);
    }

    ContentCache& cache() {
        if (!cache_) cache_ = std::make_unique<ContentCache>(cfg.cache_dir);
        return *cache_;
    }

    PipelineOptions pipeline_options(const fs::path& out_dir) {
        PipelineOptions p;
        p.out_dir = out_dir;
        p.filter = cfg.filter;
        p.band = cfg.band;
        p.max_excerpts_per_episode = cfg.max_excerpts_per_episode;
        p.retry = cfg.retry_policy();
        p.cache = &cache();
        p.jobs = cfg.jobs;
        return p;
    }

    const Options& opts;
    RunConfig cfg;
    std::unique_ptr<Providers> providers;

private:
    std::unique_ptr<ContentCache> cache_;
};

fs::path require_input(const Options& o) {
    if (o.input.empty()) throw Error(ErrorCode::InputMissing, "--input is required");
    if (!fs::exists(o.input)) throw Error(ErrorCode::InputMissing, "input not found: " + o.input);
    return o.input;
}

fs::path out_dir(const Options& o) {
    fs::path d = o.out.empty() ? fs::path(".") : fs::path(o.out);
    fs::create_directories(d);
    return d;
}

std::vector<GenerationRecord> read_generations(const fs::path& p) {
    std::vector<GenerationRecord> out;
    for (const auto& j : read_jsonl(p)) out.push_back(generation_record_from_json(j));
    return out;
}

std::optional<fs::path> sibling_or_flag(const std::string& flag, const fs::path& input, const char* name) {
    if (!flag.empty()) {
        if (!fs::exists(flag)) throw Error(ErrorCode::InputMissing, "input not found: " + flag);
        return fs::path(flag);
    }
    auto p = input.parent_path() / name;
    if (fs::exists(p)) return p;
    return std::nullopt;
}

// --------------------------------------------------------------------------- datagen

int cmd_make_corpus(Context& ctx) {
    const auto dir = out_dir(ctx.opts);
    const auto episodes = synthetic_episodes({ctx.cfg.synthetic_episodes, ctx.cfg.synthetic_seed});
    std::vector<nlohmann::json> lines;
    for (const auto& e : episodes) lines.push_back(to_json(e));
    write_jsonl(dir / "episodes.jsonl", lines);
    spdlog::info("wrote {} synthetic episodes to {}", episodes.size(), (dir / "episodes.jsonl").string());
    return 0;
}

int cmd_convert(Context& ctx) {
    const auto in = require_input(ctx.opts);
    std::vector<fs::path> files;
    if (fs::is_directory(in)) {
        for (const auto& entry : fs::directory_iterator(in)) {
            if (entry.path().extension() == ".txt") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(in);
    }
    std::vector<nlohmann::json> lines;
    for (const auto& f : files) {
        auto e = episode_from_text(util::read_file(f), f.stem().string(), ctx.cfg.parse);
        for (const auto& w : e.transcript.warnings) spdlog::warn("{}: {}", f.filename().string(), w);
        lines.push_back(to_json(e));
    }
    const auto dir = out_dir(ctx.opts);
    write_jsonl(dir / "episodes.jsonl", lines);
    spdlog::info("converted {} transcripts", lines.size());
    return 0;
}

std::vector<Episode> episodes_for(Context& ctx) {
    if (ctx.opts.input.empty() && ctx.opts.dry_run) {
        return synthetic_episodes({ctx.cfg.synthetic_episodes, ctx.cfg.synthetic_seed});
    }
    return read_episodes(require_input(ctx.opts));
}

int cmd_extract(Context& ctx) {
    const auto episodes = episodes_for(ctx);
    run_extract_stage(episodes, ctx.providers->extractor(), ctx.pipeline_options(out_dir(ctx.opts)));
    return 0;
}

int cmd_promptgen(Context& ctx) {
    const auto excerpts = read_excerpts(require_input(ctx.opts));
    run_promptgen_stage(excerpts, ctx.providers->promptgen(), ctx.pipeline_options(out_dir(ctx.opts)));
    return 0;
}

int cmd_synth(Context& ctx) {
    const auto prompted = read_prompted(require_input(ctx.opts));
    run_synth_stage(prompted, ctx.providers->image(), ctx.pipeline_options(out_dir(ctx.opts)));
    return 0;
}

int cmd_stats(Context& ctx) {
    const auto manifests = read_manifests(require_input(ctx.opts));
    const auto stats = run_stats_stage(manifests, out_dir(ctx.opts));
    std::cout << format_dataset_stats(stats);
    return 0;
}

// --------------------------------------------------------------------------- evaluation

int cmd_metrics(Context& ctx) {
    const auto in = require_input(ctx.opts);
    std::map<std::string, std::vector<StyleReport>> by_system;
    std::vector<std::string> order;
    std::vector<nlohmann::json> lines;
    auto add = [&](const std::string& system, const Transcript& t) {
        auto r = style_report(t);
        auto j = to_json(r);
        j["system"] = system;
        lines.push_back(std::move(j));
        if (!by_system.count(system)) order.push_back(system);
        by_system[system].push_back(std::move(r));
    };

    if (fs::is_directory(in) || in.extension() == ".txt") {
        std::vector<fs::path> files;
        if (fs::is_directory(in)) {
            for (const auto& e : fs::directory_iterator(in)) {
                if (e.path().extension() == ".txt") files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
        } else {
            files.push_back(in);
        }
        const auto system = fs::is_directory(in) ? in.filename().string() : in.stem().string();
        for (const auto& f : files) add(system, parse_transcript(util::read_file(f), ctx.cfg.parse, f.stem().string()));
    } else {
        for (const auto& j : read_jsonl(in)) {
            if (j.contains("transcript_text")) {
                const auto rec = generation_record_from_json(j);
                add(rec.model_id, parse_transcript(rec.transcript_text, ctx.cfg.parse, rec.sample_id));
            } else if (j.contains("text")) {
                const auto id = j.value("id", std::string());
                add(j.value("system", std::string("corpus")), parse_transcript(j["text"].get<std::string>(), ctx.cfg.parse, id));
            } else if (j.contains("episode_id")) {
                add("corpus", episode_from_json(j).transcript);
            } else {
                add(j.value("system", std::string("corpus")), transcript_from_json(j));
            }
        }
    }
    if (lines.empty()) throw Error(ErrorCode::EmptyInput, "no transcripts in " + in.string());

    const auto dir = out_dir(ctx.opts);
    write_jsonl(dir / "metrics.jsonl", lines);
    nlohmann::json corpus = nlohmann::json::object();
    std::vector<StyleColumn> cols;
    for (const auto& system : order) {
        auto agg = aggregate_reports(by_system.at(system));
        corpus[system] = to_json(agg);
        cols.push_back({system, agg, std::nullopt});
    }
    write_json(dir / "metrics.json", corpus);
    const auto table = format_style_table(cols);
    util::write_file_atomic(dir / "metrics.txt", table);
    std::cout << table;
    return 0;
}

int cmd_generate(Context& ctx) {
    const auto requests = read_requests(require_input(ctx.opts));
    if (requests.empty()) throw Error(ErrorCode::EmptyInput, "no generation requests");
    const auto dir = out_dir(ctx.opts);

    write_requests(dir / "requests.jsonl", requests);

    GenerateOptions go;
    go.retry = ctx.cfg.retry_policy();
    go.clock = ctx.providers->clock();
    go.measure_latency = !ctx.opts.parallel;

    std::vector<GenerationRecord> records;
    std::vector<nlohmann::json> failures;
    for (const auto& vlm : ctx.providers->vlms()) {
        std::vector<std::optional<GenerationRecord>> out(requests.size());
        std::vector<std::string> errors(requests.size());
        auto one = [&](std::size_t i) {
            try {
                out[i] = generate(requests[i], *vlm.client, vlm.name, go);
            } catch (const Error& e) {
                errors[i] = std::string(to_string(e.code())) + ": " + e.what();
            }
        };
        // Sequential per endpoint keeps latency measurements uncontended.
        parallel_for(requests.size(), ctx.opts.parallel ? ctx.cfg.jobs : 1, one);
        for (std::size_t i = 0; i < requests.size(); ++i) {
            if (out[i]) records.push_back(std::move(*out[i]));
            else failures.push_back({{"sample_id", requests[i].sample_id}, {"system", vlm.name}, {"reason", errors[i]}});
        }
    }
    std::vector<nlohmann::json> lines;
    for (const auto& r : records) lines.push_back(to_json(r));
    write_jsonl(dir / "generations.jsonl", lines);
    write_jsonl(dir / "generation_failures.jsonl", failures);
    if (records.empty()) throw Error(ErrorCode::EmptyGeneration, "every generation failed");

    const auto stats = generation_stats(records);
    nlohmann::json sj = nlohmann::json::array();
    for (const auto& s : stats) sj.push_back(to_json(s));
    write_json(dir / "generation_stats.json", sj);
    const auto table = format_generation_stats(stats);
    util::write_file_atomic(dir / "generation_stats.txt", table);
    std::cout << table;
    return 0;
}

int cmd_ground(Context& ctx) {
    const auto in = require_input(ctx.opts);
    const auto req_path = sibling_or_flag(ctx.opts.requests, in, "requests.jsonl");
    if (!req_path) throw Error(ErrorCode::InputMissing, "no --requests given and no requests.jsonl next to input");
    const auto records = read_generations(in);
    const auto requests = read_requests(*req_path);

    auto run = ground_records(records, requests, ctx.providers->embedding(), ctx.cfg.grounding,
                              ctx.cfg.retry_policy(), ctx.cfg.parse);
    for (const auto& e : run.errors) spdlog::warn("ground: {}", e);
    const auto dir = out_dir(ctx.opts);
    write_jsonl(dir / "grounding.jsonl", run.lines);

    std::map<std::string, std::vector<double>> per_system;
    for (const auto& l : run.lines) per_system[l["system"].get<std::string>()].push_back(l["sequence_score"].get<double>());
    std::string table;
    for (const auto& [system, scores] : per_system) {
        table += fmt::format("{:<24} CLIPScore {}  (n={})\n", system, format_mean_std(mean_std(scores), 2), scores.size());
    }
    util::write_file_atomic(dir / "grounding.txt", table);
    std::cout << table;
    return run.lines.empty() ? 1 : 0;
}

int cmd_judge(Context& ctx) {
    if (ctx.cfg.judges.empty()) throw Error(ErrorCode::ConfigInvalid, "no judges configured (use --config or --dry-run)");
    const auto records = read_generations(require_input(ctx.opts));
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "no generation records");
    const auto focus = ctx.cfg.focus_system.empty() ? records.front().model_id : ctx.cfg.focus_system;
    const auto set = comparison_tasks(records, focus, ctx.cfg.parse);
    for (const auto& s : set.skipped) spdlog::warn("judge: skipped {}", s);
    if (set.tasks.empty()) throw Error(ErrorCode::EmptyInput, "no comparable sample pairs");

    JudgeOptions jo;
    jo.temperature = ctx.cfg.judge_temperature;
    jo.retry = ctx.cfg.retry_policy();
    jo.cache = &ctx.cache();
    const auto judges = ctx.providers->judges(ctx.opts.judges);
    const auto verdicts = run_panel(set.tasks, judges, ctx.cfg.judge_debias, jo, ctx.cfg.jobs);

    const auto dir = out_dir(ctx.opts);
    std::vector<nlohmann::json> lines;
    for (const auto& v : verdicts) lines.push_back(verdict_line(v, set.labels.at(v.sample_id)));
    write_jsonl(dir / "verdicts.jsonl", lines);

    const auto report = aggregate_win_rate(verdicts, set.labels, focus);
    write_json(dir / "win_rate.json", to_json(report));
    const auto text = format_win_rate(report);
    util::write_file_atomic(dir / "win_rate.txt", text);
    std::cout << text;
    spdlog::info("judge: cache hits {}, misses {}", ctx.cache().hits(), ctx.cache().misses());
    return 0;
}

int cmd_report(Context& ctx) {
    const auto in = require_input(ctx.opts);
    ReportInputs ri;
    ri.records = read_generations(in);
    ri.parse = ctx.cfg.parse;
    ri.config = to_json(ctx.cfg);
    if (const auto g = sibling_or_flag(ctx.opts.grounding, in, "grounding.jsonl")) ri.grounding = read_jsonl(*g);
    if (const auto v = sibling_or_flag(ctx.opts.verdicts, in, "verdicts.jsonl")) {
        std::vector<Verdict> verdicts;
        std::map<std::string, SystemLabels> labels;
        for (const auto& j : read_jsonl(*v)) {
            auto [verdict, l] = verdict_line_from_json(j);
            labels[verdict.sample_id] = l;
            verdicts.push_back(std::move(verdict));
        }
        if (!verdicts.empty()) ri.win_rate = aggregate_win_rate(verdicts, labels, ctx.cfg.focus_system);
    }
    const auto report = build_report(ri);
    const auto dir = out_dir(ctx.opts);
    write_json(dir / "report.json", to_json(report));
    const auto text = format_report(report);
    util::write_file_atomic(dir / "report.txt", text);
    std::cout << text;
    return 0;
}

int cmd_pipeline(Context& ctx) {
    const auto dir = out_dir(ctx.opts);
    const auto episodes = episodes_for(ctx);
    PipelineClients clients{&ctx.providers->extractor(), &ctx.providers->promptgen(), &ctx.providers->image()};
    const auto stats = run_pipeline(episodes, clients, ctx.pipeline_options(dir));
    std::cout << format_dataset_stats(stats);
    if (!ctx.opts.eval) return 0;

    Options eval = ctx.opts;
    eval.out = (dir / "eval").string();
    eval.input = (dir / "manifests.jsonl").string();
    Context ectx(eval);
    ectx.cfg = ctx.cfg;
    if (int rc = cmd_generate(ectx)) return rc;
    eval.input = (dir / "eval" / "generations.jsonl").string();
    if (int rc = cmd_metrics(ectx)) return rc;
    if (int rc = cmd_ground(ectx)) return rc;
    if (int rc = cmd_judge(ectx)) return rc;
    return cmd_report(ectx);
}

int cmd_train_config(Context& ctx) {
    const auto doc = emit_training_config();
    if (ctx.opts.out.empty()) {
        std::cout << doc;
    } else {
        util::write_file_atomic(ctx.opts.out, doc);
    }
    return 0;
}

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::ConfigInvalid:
        case ErrorCode::InputMissing:
        case ErrorCode::InvalidArgument: return 2;
        default: return 1;
    }
}

void report_error(const std::string& command, std::string_view code, const std::string& message) {
    nlohmann::json j = {{"error", {{"command", command}, {"code", code}, {"message", message}}}};
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vizpod: image-grounded podcast dialogue datasets and evaluation"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    Options o;
    app.add_option("--config", o.config, "Run configuration (JSON)");
    app.add_option("--cache", o.cache, "Response cache directory (overrides the config)");
    app.add_flag("--dry-run", o.dry_run, "Use the in-tree deterministic stub providers");
    app.add_option("--jobs", o.jobs, "Parallel work units (overrides the config)");
    app.add_flag("-q,--quiet", o.quiet, "Only log warnings and errors");

    using Handler = int (*)(Context&);
    std::vector<std::pair<CLI::App*, Handler>> commands;
    auto sub = [&](const char* name, const char* help, Handler h) {
        auto* s = app.add_subcommand(name, help);
        commands.emplace_back(s, h);
        return s;
    };
    auto with_io = [&](CLI::App* s) {
        s->add_option("--input", o.input, "Input file or directory");
        s->add_option("--out", o.out, "Output directory");
        return s;
    };

    with_io(sub("extract", "Filter episodes and extract excerpts", cmd_extract));
    with_io(sub("promptgen", "Generate five image prompts per excerpt", cmd_promptgen));
    with_io(sub("synth", "Synthesize images and write manifests", cmd_synth));
    with_io(sub("stats", "Image-count and word-count distributions of manifests", cmd_stats));
    with_io(sub("metrics", "Conversational-style metrics of transcripts", cmd_metrics));
    auto* ground = with_io(sub("ground", "Sequence CLIPScore of generated transcripts", cmd_ground));
    ground->add_option("--requests", o.requests, "Requests or manifests JSONL with the image paths");
    auto* gen = with_io(sub("generate", "Generate transcripts from image sequences", cmd_generate));
    gen->add_flag("--parallel", o.parallel, "Run samples concurrently (latency is not recorded)");
    auto* judge = with_io(sub("judge", "Pairwise naturalness judging", cmd_judge));
    judge->add_option("--judges", o.judges, "Judge names to use (default: all configured)")->delimiter(',');
    judge->add_option("--debias", o.debias, "Judge both presentation orders (true/false)");
    auto* report = with_io(sub("report", "Assemble the evaluation report", cmd_report));
    report->add_option("--grounding", o.grounding, "grounding.jsonl (default: next to the input)");
    report->add_option("--verdicts", o.verdicts, "verdicts.jsonl (default: next to the input)");
    auto* pipeline = with_io(sub("pipeline", "Run extract, promptgen, synth and stats", cmd_pipeline));
    pipeline->add_flag("--eval", o.eval, "Also run generate, metrics, ground, judge and report");
    pipeline->add_option("--episodes", o.episodes, "Synthetic episode count for --dry-run without --input");
    pipeline->add_option("--debias", o.debias, "Judge both presentation orders (true/false)");
    auto* corpus = sub("make-corpus", "Write a seeded synthetic episode corpus", cmd_make_corpus);
    corpus->add_option("--out", o.out, "Output directory");
    corpus->add_option("--episodes", o.episodes, "Episode count");
    corpus->add_option("--seed", o.seed, "Random seed");
    with_io(sub("convert", "Convert plain-text transcripts to episodes JSONL", cmd_convert));
    sub("train-config", "Emit the fine-tuning configuration", cmd_train_config)
        ->add_option("--out", o.out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    auto logger = spdlog::stderr_color_mt("vizpod");
    spdlog::set_default_logger(logger);
    spdlog::set_level(o.quiet ? spdlog::level::warn : spdlog::level::info);

    std::string name;
    Handler handler = nullptr;
    for (const auto& [s, h] : commands) {
        if (s->parsed()) {
            name = s->get_name();
            handler = h;
        }
    }

    try {
        Context ctx(o);
        return handler(ctx);
    } catch (const Error& e) {
        report_error(name, to_string(e.code()), e.what());
        return exit_code_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        report_error(name, "MalformedInput", e.what());
        return 2;
    } catch (const std::exception& e) {
        report_error(name, "Exception", e.what());
        return 1;
    }
}
