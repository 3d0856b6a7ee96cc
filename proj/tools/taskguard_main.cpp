// Command-line front end: run one task, generate labeled corpora, evaluate
// guard backends, and replay the bundled scenarios side by side.
//
// Exit codes (stable contract, also used by the test suite):
//   0  success (for `run`: the task reached its goal)
//   1  the task or backend failed at runtime
//   2  bad input: flags, files, schemas
//   3  outbound privacy violation
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "taskguard/coordinator.hpp"
#include "taskguard/corpus.hpp"
#include "taskguard/errors.hpp"
#include "taskguard/guards.hpp"
#include "taskguard/llm.hpp"
#include "taskguard/metrics.hpp"
#include "taskguard/privacy.hpp"
#include "taskguard/rng.hpp"
#include "taskguard/sim.hpp"

namespace {

using namespace taskguard;

constexpr int kExitSuccess = 0;
constexpr int kExitTaskFailure = 1;
constexpr int kExitInputError = 2;
constexpr int kExitPrivacyViolation = 3;

// ---------------------------------------------------------------------------
// Shared backend wiring

struct BackendFlags {
    std::string feasibility = "off";
    std::string completeness = "off";
    std::string planner = "scripted";
    std::string transport;  // "live" or "fixtures:DIR"; empty = no transport
    std::string model = "gpt-4";
    std::string adapter_url;
    std::string scenario_dir;
};

bool wants_llm(const BackendFlags& flags) {
    return flags.feasibility == "llm" || flags.completeness == "llm" ||
           flags.planner == "llm";
}

// Owns whatever the selected backends need. Construction validates the flag
// combination; the raw pointers handed out stay valid for the holder's life.
struct BackendHolder {
    std::unique_ptr<Transport> transport;
    std::unique_ptr<LlmClient> client;
    std::vector<Scenario> scenarios;  // completeness oracle universe
    std::unique_ptr<FeasibilityGuard> feasibility;
    std::unique_ptr<CompletenessGuard> completeness;
};

// Nothing talks to the network unless asked by name: the chat transport must
// be 'live' explicitly, and adapter backends go to the --adapter-url endpoint.
void make_client(BackendHolder& holder, const BackendFlags& flags,
                 const PlaceholderMemory* memory) {
    if (!wants_llm(flags)) return;
    if (flags.transport == "live") {
        holder.transport = std::make_unique<HttpTransport>();
    } else if (flags.transport.rfind("fixtures:", 0) == 0) {
        holder.transport = std::make_unique<FixtureTransport>(flags.transport.substr(9));
    } else if (flags.transport.empty()) {
        throw ValidationError(
            "an llm backend was selected but no --transport was given "
            "(use 'fixtures:DIR' for offline replay or 'live' to allow network)");
    } else {
        throw ValidationError("unknown --transport '" + flags.transport +
                              "' (expected 'live' or 'fixtures:DIR')");
    }
    holder.client = std::make_unique<LlmClient>(*holder.transport, memory);
}

std::string require_adapter_url(const BackendFlags& flags) {
    if (!flags.adapter_url.empty()) return flags.adapter_url;
    if (const char* env = std::getenv("TASKGUARD_ADAPTER_URL")) return env;
    throw ValidationError(
        "an adapter backend was selected but no endpoint is configured "
        "(pass --adapter-url or set TASKGUARD_ADAPTER_URL)");
}

void make_feasibility(BackendHolder& holder, const BackendFlags& flags,
                      const PlaceholderMemory* memory) {
    if (flags.feasibility == "off") return;
    if (flags.feasibility == "oracle") {
        holder.feasibility = std::make_unique<OracleFeasibilityGuard>();
    } else if (flags.feasibility == "llm") {
        holder.feasibility =
            std::make_unique<LlmFeasibilityGuard>(*holder.client, flags.model, memory);
    } else {
        holder.feasibility =
            std::make_unique<AdapterFeasibilityGuard>(require_adapter_url(flags), memory);
    }
}

void make_completeness(BackendHolder& holder, const BackendFlags& flags,
                       const PlaceholderMemory* memory, const Scenario* run_scenario) {
    if (flags.completeness == "off") return;
    if (flags.completeness == "oracle") {
        if (run_scenario != nullptr) {
            holder.completeness = std::make_unique<OracleCompletenessGuard>(*run_scenario);
        } else if (!flags.scenario_dir.empty()) {
            holder.scenarios = load_scenario_dir(flags.scenario_dir);
            holder.completeness = std::make_unique<OracleCompletenessGuard>(holder.scenarios);
        }
        // else: left unconfigured; scoring a completeness sample without the
        // page universe is then a validation error naming the missing piece.
    } else if (flags.completeness == "llm") {
        holder.completeness =
            std::make_unique<LlmCompletenessGuard>(*holder.client, flags.model, false, memory);
    } else {
        holder.completeness =
            std::make_unique<AdapterCompletenessGuard>(require_adapter_url(flags), memory);
    }
}

// ---------------------------------------------------------------------------
// run

int cmd_run(const std::string& scenario_path, const BackendFlags& flags, int max_replans,
            int step_cap, bool blind_mode, const std::string& memory_file) {
    Scenario scenario = load_scenario(scenario_path);

    PlaceholderMemory memory = memory_file.empty() ? PlaceholderMemory()
                                                   : PlaceholderMemory(memory_file);
    std::string instruction = redact(scenario.instruction, memory);

    BackendHolder holder;
    make_client(holder, flags, &memory);
    make_feasibility(holder, flags, &memory);
    make_completeness(holder, flags, &memory, &scenario);

    std::unique_ptr<Planner> planner;
    if (flags.planner == "scripted")
        planner = std::make_unique<ScriptedPlanner>(scenario);
    else
        planner = std::make_unique<LlmPlanner>(*holder.client, flags.model, &memory);

    RunConfig config;
    config.name = "cli";
    config.max_replans = max_replans;
    config.step_cap = step_cap;
    config.blind_mode = blind_mode;

    TaskReport report = run_task(scenario, instruction, *planner, holder.feasibility.get(),
                                 holder.completeness.get(), memory, config);
    std::cout << task_report_to_json(report).dump(2) << '\n';
    return report.success ? kExitSuccess : kExitTaskFailure;
}

// ---------------------------------------------------------------------------
// gen-corpus

std::vector<std::filesystem::path> html_files_sorted(const std::string& dir) {
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
        if (entry.is_regular_file() && entry.path().extension() == ".html")
            files.push_back(entry.path());
    if (ec) throw IoError("cannot read html dir '" + dir + "': " + ec.message());
    if (files.empty()) throw ValidationError("no .html files in '" + dir + "'");
    std::sort(files.begin(), files.end());
    return files;
}

std::string slurp_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_gen_corpus(const std::string& html_dir, const std::string& scenario_dir,
                   const std::string& out_path, int n_pos, int n_neg, std::uint64_t seed,
                   std::optional<double> noise, int jobs) {
    if (html_dir.empty() == scenario_dir.empty())
        throw ValidationError("pass exactly one of --html-dir (feasibility corpus) "
                              "or --scenario-dir (completeness corpus)");

    std::vector<CorpusSample> samples;
    if (!html_dir.empty()) {
        const auto files = html_files_sorted(html_dir);
        const int n = static_cast<int>(files.size());

        // Even split, remainders to the front pages; every page draws from its
        // own derived seed so the output is one fixed byte stream regardless
        // of --jobs.
        std::vector<Screen> screens(files.size());
        std::vector<std::vector<CorpusSample>> parts(files.size());
        SeededRng seeder(seed);
        std::vector<std::uint64_t> page_seeds;
        for (int i = 0; i < n; ++i) page_seeds.push_back(seeder.next_u64());

        auto build = [&](int i) {
            screens[i] = extract_leaf_elements(slurp_file(files[i]),
                                               files[i].filename().string());
            const int pos = n_pos / n + (i < n_pos % n ? 1 : 0);
            const int neg = n_neg / n + (i < n_neg % n ? 1 : 0);
            parts[i] = gen_feasibility_samples(screens[i], pos, neg, page_seeds[i]);
        };
        if (jobs > 1) {
            std::vector<std::thread> pool;
            std::atomic<int> next{0};
            for (int w = 0; w < std::min(jobs, n); ++w)
                pool.emplace_back([&] {
                    for (int i = next++; i < n; i = next++) build(i);
                });
            for (auto& t : pool) t.join();
        } else {
            for (int i = 0; i < n; ++i) build(i);
        }
        for (auto& part : parts)
            samples.insert(samples.end(), std::make_move_iterator(part.begin()),
                           std::make_move_iterator(part.end()));
    } else {
        auto scenarios = load_scenario_dir(scenario_dir);
        samples = gen_completeness_samples(scenarios, n_pos, n_neg, seed);
    }

    if (noise) apply_label_noise(samples, *noise, seed ^ 0x9e3779b97f4a7c15ULL);
    write_corpus(out_path, samples);
    std::cout << "wrote " << samples.size() << " samples to " << out_path << '\n';
    return kExitSuccess;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const std::string& corpus_path, const BackendFlags& flags,
             std::optional<int> sample_k, std::uint64_t seed, int jobs) {
    if (jobs > 1 && flags.feasibility != "oracle")
        throw ValidationError("--jobs > 1 requires the oracle backend "
                              "(llm/adapter clients are rate-limited and serial)");

    PlaceholderMemory memory;  // eval corpora are already placeholder-form
    BackendHolder holder;
    make_client(holder, flags, &memory);
    make_feasibility(holder, flags, &memory);
    make_completeness(holder, flags, &memory, nullptr);

    EvalBackend backend;
    backend.feasibility = holder.feasibility.get();
    backend.completeness = holder.completeness.get();

    EvalOptions options;
    options.sample_k = sample_k;
    options.seed = seed;
    options.jobs = jobs;

    MetricsReport report = evaluate_predictor(corpus_path, backend, options);
    std::cout << metrics_report_to_json(report).dump(2) << '\n';
    return kExitSuccess;
}

// ---------------------------------------------------------------------------
// replay

int cmd_replay(bool all, const std::string& scenario_path, const std::string& scenario_dir,
               bool as_json) {
    std::vector<Scenario> scenarios;
    if (all) {
        scenarios = load_scenario_dir(scenario_dir);
    } else {
        if (scenario_path.empty())
            throw ValidationError("pass --all or --scenario FILE");
        scenarios.push_back(load_scenario(scenario_path));
    }

    auto reports = replay_all(scenarios);
    if (as_json) {
        Json out = Json::array();
        for (const auto& row : reports) {
            Json cell = Json::array();
            for (const auto& report : row) cell.push_back(task_report_to_json(report));
            out.push_back(std::move(cell));
        }
        std::cout << out.dump(2) << '\n';
    } else {
        std::cout << format_replay_table(reports);
    }
    return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Guarded UI-task runner: feasibility-gated planning, completeness "
                 "verification, placeholder privacy, and a deterministic simulator"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value config file; explicit flags win");

    BackendFlags flags;
    const std::vector<std::string> guard_choices = {"oracle", "llm", "adapter", "off"};
    const std::vector<std::string> eval_choices = {"oracle", "llm", "adapter"};

    // --- run ---------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Run one scenario under a chosen configuration");
    std::string scenario_path, memory_file;
    int max_replans = 3, step_cap = 25;
    bool blind_mode = false;
    run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    run->add_option("--feasibility", flags.feasibility, "Feasibility gate backend")
        ->check(CLI::IsMember(guard_choices))
        ->capture_default_str();
    run->add_option("--completeness", flags.completeness, "Completeness verifier backend")
        ->check(CLI::IsMember(guard_choices))
        ->capture_default_str();
    run->add_option("--planner", flags.planner, "Planner kind")
        ->check(CLI::IsMember({"scripted", "llm"}))
        ->capture_default_str();
    run->add_option("--max-replans", max_replans, "Replan budget per step")
        ->capture_default_str();
    run->add_option("--step-cap", step_cap, "Executed-step ceiling")->capture_default_str();
    run->add_flag("--blind-mode", blind_mode,
                  "On grounding failure, click the lowest-index element instead of skipping");
    run->add_option("--memory-file", memory_file, "File-backed placeholder memory");
    run->add_option("--transport", flags.transport,
                    "LLM transport: 'live' or 'fixtures:DIR' (offline replay)");
    run->add_option("--model", flags.model, "Model name for llm backends")
        ->capture_default_str();
    run->add_option("--adapter-url", flags.adapter_url,
                    "Base URL for adapter backends (or TASKGUARD_ADAPTER_URL)");

    // --- gen-corpus ----------------------------------------------------------
    auto* gen = app.add_subcommand("gen-corpus", "Generate a labeled corpus as JSONL");
    std::string html_dir, out_path;
    int n_pos = 0, n_neg = 0, jobs = 1;
    std::uint64_t seed = 0;
    double noise = -1.0;
    gen->add_option("--html-dir", html_dir, "Directory of .html pages (feasibility corpus)");
    gen->add_option("--scenario-dir", flags.scenario_dir,
                    "Directory of scenario JSON files (completeness corpus)");
    gen->add_option("--out", out_path, "Output JSONL path")->required();
    gen->add_option("--n-pos", n_pos, "Positive sample count")
        ->required()
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--n-neg", n_neg, "Negative sample count")
        ->required()
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", seed, "RNG seed")->capture_default_str();
    gen->add_option("--noise", noise, "Label-flip probability in [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    gen->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber)
        ->capture_default_str();

    // --- eval ----------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "Score a guard backend against a corpus");
    std::string corpus_path;
    int sample_k = -1;
    eval->add_option("--corpus", corpus_path, "Corpus JSONL path")->required();
    eval->add_option("--backend", flags.feasibility, "Backend for both sample kinds")
        ->check(CLI::IsMember(eval_choices))
        ->required();
    eval->add_option("--sample", sample_k, "Evaluate a seeded subsample of this size");
    eval->add_option("--seed", seed, "Subsample seed")->capture_default_str();
    eval->add_option("--jobs", jobs, "Worker threads (oracle backend only)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    eval->add_option("--scenario-dir", flags.scenario_dir,
                     "Scenario directory (page universe for the completeness oracle)");
    eval->add_option("--transport", flags.transport,
                     "LLM transport: 'live' or 'fixtures:DIR'");
    eval->add_option("--model", flags.model, "Model name for llm backends")
        ->capture_default_str();
    eval->add_option("--adapter-url", flags.adapter_url,
                     "Base URL for adapter backends (or TASKGUARD_ADAPTER_URL)");

    // --- replay ----------------------------------------------------------------
    auto* replay = app.add_subcommand(
        "replay", "Replay bundled scenarios under Baseline / +Fea / +Fea+Com");
    bool replay_everything = false;
    bool replay_json = false;
    std::string replay_scenario_path;
    std::string replay_dir = "scenarios";
    replay->add_flag("--all", replay_everything, "Replay every scenario in --scenario-dir");
    replay->add_option("--scenario", replay_scenario_path, "Replay a single scenario file");
    replay->add_option("--scenario-dir", replay_dir, "Scenario directory")
        ->capture_default_str();
    replay->add_flag("--json", replay_json, "Emit full reports as JSON instead of the table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitSuccess : kExitInputError;
    }

    try {
        if (run->parsed())
            return cmd_run(scenario_path, flags, max_replans, step_cap, blind_mode, memory_file);
        if (gen->parsed())
            return cmd_gen_corpus(html_dir, flags.scenario_dir, out_path, n_pos, n_neg, seed,
                                  noise < 0 ? std::nullopt : std::optional<double>(noise),
                                  jobs);
        if (eval->parsed()) {
            flags.completeness = flags.feasibility;  // one --backend covers both kinds
            return cmd_eval(corpus_path, flags,
                            sample_k < 0 ? std::nullopt : std::optional<int>(sample_k), seed,
                            jobs);
        }
        if (replay->parsed())
            return cmd_replay(replay_everything, replay_scenario_path, replay_dir, replay_json);
        return kExitInputError;  // unreachable: a subcommand is required
    } catch (const PrivacyViolationError& e) {
        std::cerr << "privacy violation: " << e.what() << '\n';
        return kExitPrivacyViolation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const CorpusError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const CodecError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const CommandParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const Error& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return kExitTaskFailure;
    }
}
