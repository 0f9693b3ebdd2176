#include "cotcurate/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "cotcurate/assess.hpp"
#include "cotcurate/config.hpp"
#include "cotcurate/corpus.hpp"
#include "cotcurate/cot_parse.hpp"
#include "cotcurate/error.hpp"
#include "cotcurate/eval_harness.hpp"
#include "cotcurate/llm_client.hpp"
#include "cotcurate/sampling.hpp"
#include "cotcurate/sft_dataset.hpp"
#include "cotcurate/templates.hpp"
#include "cotcurate/token_counter.hpp"

namespace cotcurate {
namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const PipelineConfig& cfg, const std::string& command, const ordered_json& counts) {
    ordered_json m;
    m["command"] = command;
    m["config_hash"] = cfg.config_hash;
    m["template_versions"] = {{"sampling", templates::kSamplingVersion},
                              {"judge", templates::kJudgeVersion},
                              {"direct", templates::kDirectVersion}};
    m["seed"] = cfg.seed;
    m["started_at"] = utc_now();
    m["counts"] = counts;
    jsonl::write_text(cfg.paths.reports / ("manifest_" + command + ".json"), m.dump(2) + "\n");
}

void write_report(const std::filesystem::path& path, const ordered_json& report) {
    jsonl::write_text(path, report.dump(2) + "\n");
}

struct Options {
    std::string config;
    std::optional<int> n;
    std::optional<double> temperature;
    std::optional<double> delta;
    std::string dataset;
    std::string mode = "cot";
    std::optional<int> votes;
    std::string outcomes_out;
    std::string report_out;
    std::string run_a;
    std::string run_b;
    std::string gain_json;
    std::string outcomes_in;
    std::string counter = std::string(kDefaultCounter);
    std::string format = std::string(kExamplesFormat);
    std::string mcq_out;
    int k_options = kDefaultMcqOptions;
    std::uint64_t seed = 0;
};

int cmd_sample(const Options& o, std::ostream& out, std::ostream& err) {
    json overrides = json::object();
    if (o.n) overrides["sampling"]["n_samples"] = *o.n;
    if (o.temperature) overrides["sampling"]["temperature"] = *o.temperature;
    const auto cfg = load_config(o.config, overrides);
    const auto examples = load_examples(cfg.paths.examples);
    const auto client = LlmClient::connect(cfg.endpoint);
    const auto summary = sample_paths(cfg.sampling, client, examples, cfg.paths.samples);
    ordered_json counts;
    counts["examples"] = summary.examples;
    counts["already_present"] = summary.already_present;
    counts["requested"] = summary.requested;
    counts["failed"] = summary.failed;
    counts["endpoint_attempts"] = client.attempts_issued();
    write_manifest(cfg, "sample", counts);
    out << counts.dump() << "\n";
    if (summary.requested > 0 && summary.failed == summary.requested) {
        throw EndpointError("all " + std::to_string(summary.requested) + " sampling requests failed", 0, 0);
    }
    if (summary.failed > 0) err << "warning: " << summary.failed << " sampling requests failed and were recorded in place\n";
    return 0;
}

int cmd_parse(const Options& o, std::ostream& out, std::ostream&) {
    const auto cfg = load_config(o.config);
    const auto samples = load_samples(cfg.paths.samples);
    std::vector<ReasoningPath> paths;
    paths.reserve(samples.size());
    std::size_t ok = 0, repaired = 0, failed = 0;
    for (const auto& s : samples) {
        paths.push_back(parse_path(s));
        switch (paths.back().parse_status) {
            case ParseStatus::kOk: ++ok; break;
            case ParseStatus::kRepaired: ++repaired; break;
            case ParseStatus::kFailed: ++failed; break;
        }
    }
    std::sort(paths.begin(), paths.end(), [](const ReasoningPath& a, const ReasoningPath& b) {
        return std::tie(a.example_id, a.sample_index) < std::tie(b.example_id, b.sample_index);
    });
    save_paths(cfg.paths.parsed, paths);
    ordered_json counts = {{"samples", samples.size()}, {"ok", ok}, {"repaired", repaired}, {"failed", failed}};
    write_manifest(cfg, "parse", counts);
    out << counts.dump() << "\n";
    return 0;
}

int cmd_assess(const Options& o, std::ostream& out, std::ostream&) {
    json overrides = json::object();
    if (o.delta) overrides["assessment"]["delta"] = *o.delta;
    const auto cfg = load_config(o.config, overrides);
    const auto examples = load_examples(cfg.paths.examples);
    const auto paths = load_paths(cfg.paths.parsed);
    const auto judge = LlmClient::connect(cfg.judge_endpoint);
    const auto result = assess_all(paths, examples, cfg.assessment, judge);
    write_assessment(result, cfg.paths.assessed, cfg.paths.selection);
    const auto funnel = funnel_to_json(result.funnel);
    write_report(cfg.paths.reports / "funnel.json", funnel);
    write_manifest(cfg, "assess", funnel);
    out << funnel.dump() << "\n";
    return 0;
}

int cmd_build_sft(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = load_config(o.config);
    const auto build = build_sft(load_selection(cfg.paths.selection), load_assessed(cfg.paths.assessed),
                                 load_paths(cfg.paths.parsed), load_examples(cfg.paths.examples));
    save_sft(cfg.paths.sft, build.records);
    const auto report = retention_to_json(build.retention);
    write_report(cfg.paths.reports / "retention.json", report);
    write_manifest(cfg, "build-sft", report);
    if (build.records.empty()) err << "warning: no selections; wrote an empty sft file\n";
    out << report.dump() << "\n";
    return 0;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream&) {
    const auto cfg = load_config(o.config);
    EvalConfig ec;
    ec.mode = parse_eval_mode(o.mode);
    ec.votes = o.votes.value_or(1);
    ec.temperature = ec.votes > 1 ? cfg.eval.temperature : 0.0;
    ec.counter = cfg.eval.counter;
    ec.seed = cfg.seed;
    ec.model = cfg.eval.model;
    ec.max_output_tokens = cfg.eval.max_output_tokens;
    ec.validate();
    const auto items = load_eval_items(o.dataset);
    const auto client = LlmClient::connect(cfg.endpoint);
    const auto run = evaluate(items, client, ec);
    const std::filesystem::path outcomes = o.outcomes_out.empty() ? cfg.paths.outcomes : std::filesystem::path(o.outcomes_out);
    const std::filesystem::path report_path =
        o.report_out.empty() ? cfg.paths.reports / "eval_report.json" : std::filesystem::path(o.report_out);
    save_outcomes(outcomes, run.outcomes);
    const auto report = report_to_json(run.report);
    write_report(report_path, report);
    ordered_json counts = {{"items", items.size()}, {"votes", ec.votes}, {"flagged", run.report.flagged},
                           {"endpoint_attempts", client.attempts_issued()}};
    write_manifest(cfg, "eval", counts);
    out << report.dump() << "\n";
    return 0;
}

int cmd_gain(const Options& o, std::ostream& out, std::ostream&) {
    const auto table = gain_report(load_outcomes(o.run_a), load_outcomes(o.run_b));
    if (!o.gain_json.empty()) write_report(o.gain_json, gain_to_json(table));
    out << gain_to_text(table);
    return 0;
}

int cmd_curve(const Options& o, std::ostream& out, std::ostream&) {
    out << curve_to_json(voting_curve(load_outcomes(o.outcomes_in))).dump() << "\n";
    return 0;
}

int cmd_stats(const Options& o, std::ostream& out, std::ostream&) {
    const auto counter = make_counter(o.counter);
    const auto examples = load_examples(o.dataset, o.format);
    out << stats_to_json(dataset_stats(examples, *counter)).dump() << "\n";
    return 0;
}

int cmd_mcq(const Options& o, std::ostream& out, std::ostream&) {
    const auto examples = load_examples(o.dataset, o.format);
    const auto items = build_mcq_dataset(examples, o.k_options, o.seed);
    save_mcq(o.mcq_out, items);
    out << ordered_json{{"items", items.size()}, {"k_options", o.k_options}, {"seed", o.seed}}.dump() << "\n";
    return 0;
}

void report_error(std::ostream& err, ExitCode code, const char* kind, const std::string& message) {
    ordered_json e;
    e["error"] = kind;
    e["code"] = static_cast<int>(code);
    e["message"] = message;
    err << jsonl::dump(e) << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Curates self-sampled reasoning paths into SFT data and evaluates models.", "cotcurate"};
    app.require_subcommand(1);
    Options o;

    auto* sample = app.add_subcommand("sample", "Sample N reasoning paths per example (resumable)");
    sample->add_option("--config", o.config, "Pipeline config file")->required();
    sample->add_option("--n", o.n, "Samples per example");
    sample->add_option("--temperature", o.temperature, "Sampling temperature");

    auto* parse = app.add_subcommand("parse", "Parse raw samples into reasoning paths");
    parse->add_option("--config", o.config, "Pipeline config file")->required();

    auto* assess = app.add_subcommand("assess", "Run the answer/faithfulness/consistency funnel and select paths");
    assess->add_option("--config", o.config, "Pipeline config file")->required();
    assess->add_option("--delta", o.delta, "Answer-correctness F1 threshold");

    auto* sft = app.add_subcommand("build-sft", "Write selected paths as prompt/target records");
    sft->add_option("--config", o.config, "Pipeline config file")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate an endpoint on a QA or multiple-choice dataset");
    eval->add_option("--config", o.config, "Pipeline config file")->required();
    eval->add_option("--dataset", o.dataset, "Examples or mcq file")->required();
    eval->add_option("--mode", o.mode, "cot or direct")->check(CLI::IsMember({"cot", "direct"}));
    eval->add_option("--votes", o.votes, "Samples per example for majority voting");
    eval->add_option("--outcomes", o.outcomes_out, "Outcomes file (default: paths.outcomes)");
    eval->add_option("--report", o.report_out, "Report file (default: <reports>/eval_report.json)");

    auto* gain = app.add_subcommand("gain", "Per-tier score gain of run b over run a");
    gain->add_option("--a", o.run_a, "Baseline outcomes file")->required();
    gain->add_option("--b", o.run_b, "Compared outcomes file")->required();
    gain->add_option("--json", o.gain_json, "Also write the table as JSON");

    auto* curve = app.add_subcommand("curve", "Majority-vote and oracle accuracy against sampling rounds");
    curve->add_option("--outcomes", o.outcomes_in, "Outcomes file")->required();

    auto* stats = app.add_subcommand("stats", "Dataset size, mean token length and tier counts");
    stats->add_option("--dataset", o.dataset, "Examples file")->required();
    stats->add_option("--counter", o.counter, "Token counter id");
    stats->add_option("--format", o.format, "examples or longbench");

    auto* mcq = app.add_subcommand("mcq", "Convert a free-form dataset to multiple choice");
    mcq->add_option("--dataset", o.dataset, "Examples file")->required();
    mcq->add_option("--out", o.mcq_out, "Output mcq file")->required();
    mcq->add_option("--k", o.k_options, "Options per question");
    mcq->add_option("--seed", o.seed, "Shuffle seed");
    mcq->add_option("--format", o.format, "examples or longbench");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        report_error(err, ExitCode::kUsage, "usage", e.what());
        return static_cast<int>(ExitCode::kUsage);
    }

    try {
        if (sample->parsed()) return cmd_sample(o, out, err);
        if (parse->parsed()) return cmd_parse(o, out, err);
        if (assess->parsed()) return cmd_assess(o, out, err);
        if (sft->parsed()) return cmd_build_sft(o, out, err);
        if (eval->parsed()) return cmd_eval(o, out, err);
        if (gain->parsed()) return cmd_gain(o, out, err);
        if (curve->parsed()) return cmd_curve(o, out, err);
        if (stats->parsed()) return cmd_stats(o, out, err);
        if (mcq->parsed()) return cmd_mcq(o, out, err);
    } catch (const Error& e) {
        report_error(err, e.code(), e.kind(), e.what());
        return static_cast<int>(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        report_error(err, ExitCode::kIo, "io", e.what());
        return static_cast<int>(ExitCode::kIo);
    }
    report_error(err, ExitCode::kUsage, "usage", "no subcommand");
    return static_cast<int>(ExitCode::kUsage);
}

}  // namespace cotcurate
