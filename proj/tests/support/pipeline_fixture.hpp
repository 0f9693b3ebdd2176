// Synthetic corpus, scripted stub replies and a config for offline pipeline runs.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <json.hpp>

namespace fixture {

namespace fs = std::filesystem;

inline fs::path fresh_dir(const std::string& name) {
    static std::mt19937_64 rng{std::random_device{}()};
    auto dir = fs::temp_directory_path() / ("cotcurate_" + name + "_" + std::to_string(rng() % 1000000000));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

inline std::string example_id(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "ex%03d", i);
    return buf;
}

inline std::string keeper(int i) { return "Mara" + std::to_string(i) + " Quill Dunmore"; }

inline std::string context(int i) {
    return "Record " + std::to_string(i) + ". The harbor of Velmont" + std::to_string(i) + " opened in " +
           std::to_string(1900 + i) + ".\nIts first keeper was " + keeper(i) +
           ".\n  The lighthouse   was painted red.\tShips paid a toll of " + std::to_string(3 + i % 5) + " coins.";
}

inline std::string response(const std::string& reasoning, const std::string& answer) {
    nlohmann::ordered_json j;
    j["reasoning"] = reasoning;
    j["answer"] = answer;
    return j.dump();
}

// Reply for one sample. Variants cover every funnel outcome:
//   0 exact answer, verbatim excerpt            3 F1 2/3, verbatim excerpt
//   1 exact answer, whitespace-perturbed, prose-wrapped (repaired parse)
//   2 F1 0.8, verbatim excerpt                  4 exact answer, fabricated excerpt
//   5 unparseable
inline std::string sample_reply(int i, int idx) {
    const int variant = (i % 10 == 9) ? (idx % 2 ? 4 : 5) : (idx + i) % 6;
    const std::string quote = "[Excerpt 1] `Its first keeper was " + keeper(i) + ".`";
    switch (variant) {
        case 0:
            return response("The question asks for the first keeper.\n" + quote + "\nSo the keeper is " + keeper(i) + ".",
                            keeper(i));
        case 1:
            return "Here is my answer:\n" +
                   response(quote + "\n[Excerpt 2] `The lighthouse was painted\nred.`", keeper(i)) + "\nDone.";
        case 2:
            return response(quote + " gives the name.", "Mara" + std::to_string(i) + " Quill");
        case 3:
            return response(quote + " gives the name.", "Mara" + std::to_string(i) + " Brown Dunmore");
        case 4:
            return response("[Excerpt 1] `keeper was " + keeper(i) + "e, appointed by the king`", keeper(i));
        default:
            return "I believe the keeper was " + keeper(i) + " but I am not sure.";
    }
}

inline int judge_rating(int i, int idx) { return 40 + (i * 7 + idx * 13) % 61; }

struct Layout {
    fs::path dir;
    fs::path config;
    fs::path examples;
    fs::path stub;
    int n_examples = 0;
    int n_samples = 0;
};

// Examples with i % 7 == 3 get a judge that never emits a parseable rating.
inline Layout write_pipeline(const fs::path& dir, int n_examples, int n_samples, double delta = 1.0,
                             int max_concurrency = 4) {
    Layout l{dir, dir / "config.json", dir / "examples.jsonl", dir / "stub.jsonl", n_examples, n_samples};
    fs::create_directories(dir);
    std::ofstream ex(l.examples, std::ios::binary);
    std::ofstream stub(l.stub, std::ios::binary);
    for (int i = 0; i < n_examples; ++i) {
        nlohmann::ordered_json e;
        e["id"] = example_id(i);
        e["context"] = context(i);
        e["question"] = "Who was the first keeper of the harbor of Velmont" + std::to_string(i) + "?";
        e["answers"] = {keeper(i)};
        e["meta"] = {{"source", "harbors"}};
        ex << e.dump() << "\n";
        for (int s = 0; s < n_samples; ++s) {
            nlohmann::ordered_json line;
            line["tag"] = "sample/" + example_id(i) + "/" + std::to_string(s);
            line["replies"] = {{{"status", 200}, {"content", sample_reply(i, s)}}};
            stub << line.dump() << "\n";
            nlohmann::ordered_json judge;
            judge["tag"] = "judge/" + example_id(i) + "/" + std::to_string(s);
            if (i % 7 == 3) {
                judge["replies"] = {{{"status", 200}, {"content", "The steps look fine overall."}}};
            } else {
                judge["replies"] = {{{"status", 200},
                                     {"content", "The breakdown is sound.\nRating: [[" +
                                                     std::to_string(judge_rating(i, s)) + "]]"}}};
            }
            stub << judge.dump() << "\n";
        }
    }
    nlohmann::ordered_json cfg;
    cfg["endpoint"] = {{"base_url", "stub:stub.jsonl"},
                       {"max_concurrency", max_concurrency},
                       {"retry", {{"max_attempts", 3}, {"backoff_base_ms", 1}}}};
    cfg["sampling"] = {{"n_samples", n_samples}, {"model", "stub-model"}};
    cfg["assessment"] = {{"delta", delta}, {"judge_model", "stub-judge"}};
    cfg["seed"] = 7;
    std::ofstream(l.config, std::ios::binary) << cfg.dump(2) << "\n";
    return l;
}

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixture
