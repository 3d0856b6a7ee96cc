// Python bindings. Compound values cross the boundary as JSON text and the
// python package decodes them; only PlaceholderMemory is a live object, since
// redaction is stateful and the file-backed store matters across calls.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "taskguard/codec.hpp"
#include "taskguard/command.hpp"
#include "taskguard/coordinator.hpp"
#include "taskguard/corpus.hpp"
#include "taskguard/errors.hpp"
#include "taskguard/guards.hpp"
#include "taskguard/metrics.hpp"
#include "taskguard/privacy.hpp"
#include "taskguard/screen.hpp"
#include "taskguard/sim.hpp"

namespace py = pybind11;
using namespace taskguard;

namespace {

ReplayConfig config_by_name(const std::string& name) {
    for (ReplayConfig config : reference_configs())
        if (config.name == name) return config;
    throw ValidationError("unknown replay config '" + name + "'");
}

std::string run_scenario_file(const std::string& path, const std::string& feasibility,
                              const std::string& completeness, bool blind_mode,
                              int max_replans, int step_cap) {
    auto pick = [](const std::string& choice, const char* flag) {
        if (choice != "oracle" && choice != "off")
            throw ValidationError(std::string(flag) +
                                  " must be 'oracle' or 'off' here; llm/adapter "
                                  "backends are wired through the CLI");
        return choice == "oracle";
    };
    Scenario scenario = load_scenario(path);
    PlaceholderMemory memory;
    std::string instruction = redact(scenario.instruction, memory);

    OracleFeasibilityGuard fea;
    OracleCompletenessGuard com(scenario);
    ScriptedPlanner planner(scenario);

    RunConfig config;
    config.name = "python";
    config.max_replans = max_replans;
    config.step_cap = step_cap;
    config.blind_mode = blind_mode;

    TaskReport report = run_task(scenario, instruction, planner,
                                 pick(feasibility, "feasibility") ? &fea : nullptr,
                                 pick(completeness, "completeness") ? &com : nullptr,
                                 memory, config);
    return task_report_to_json(report).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Guarded UI-task automation core: simulator, guards, privacy, metrics";

    py::register_exception<PrivacyViolationError>(m, "PrivacyViolation");
    py::register_exception<ValidationError>(m, "ValidationFailure");
    py::register_exception<CommandParseError>(m, "CommandParseFailure");
    py::register_exception<CodecError>(m, "CodecFailure");
    py::register_exception<ScenarioError>(m, "ScenarioFailure");
    // Anything else from the library surfaces as RuntimeError via its base.

    py::class_<PlaceholderMemory>(m, "PlaceholderMemory")
        .def(py::init<>())
        .def(py::init<std::filesystem::path>(), py::arg("storage_path"))
        .def("put", &PlaceholderMemory::put, py::arg("name"), py::arg("value"))
        .def("value_of", &PlaceholderMemory::value_of, py::arg("name"))
        .def("name_for_value", &PlaceholderMemory::name_for_value, py::arg("value"))
        .def("entries", [](const PlaceholderMemory& memory) { return memory.entries(); })
        .def("save", &PlaceholderMemory::save);

    m.def("redact",
          [](const std::string& instruction, PlaceholderMemory& memory) {
              return redact(instruction, memory);
          },
          py::arg("instruction"), py::arg("memory"));
    m.def("restore",
          [](const std::string& text, const PlaceholderMemory& memory) {
              RestoreOutcome outcome = restore(text, memory);
              return py::make_tuple(outcome.text, outcome.unknown_placeholders);
          },
          py::arg("text"), py::arg("memory"),
          "Returns (restored_text, unknown_placeholders)");
    m.def("sanitize_outbound",
          [](const std::string& text, const PlaceholderMemory& memory) {
              return sanitize_outbound(text, memory);
          },
          py::arg("text"), py::arg("memory"));
    m.def("assert_no_leak",
          [](const std::string& payload, const PlaceholderMemory& memory) {
              assert_no_leak(payload, memory);
          },
          py::arg("payload"), py::arg("memory"));
    m.def("luhn_valid", &luhn_valid, py::arg("digits"));

    m.def("parse_command_json",
          [](const std::string& text) {
              CommandIntent intent = parse_command(text);
              Json j{{"verb", to_string(intent.verb)},
                     {"caption", intent.caption},
                     {"words", intent.words}};
              return j.dump();
          },
          py::arg("text"));
    m.def("render_command",
          [](const std::string& verb, const std::string& caption, const std::string& words) {
              CommandIntent intent;
              if (verb == "select") intent.verb = Verb::select;
              else if (verb == "click_right_of") intent.verb = Verb::click_right_of;
              else if (verb == "enter") intent.verb = Verb::enter;
              else if (verb == "scroll_until") intent.verb = Verb::scroll_until;
              else throw ValidationError("unknown verb '" + verb + "'");
              intent.caption = caption;
              intent.words = words;
              return render_command(intent);
          },
          py::arg("verb"), py::arg("caption"), py::arg("words") = "");

    m.def("extract_page_json",
          [](const std::string& html, const std::string& screen_id) {
              return screen_to_json(extract_leaf_elements(html, screen_id)).dump();
          },
          py::arg("html"), py::arg("screen_id"));
    m.def("serialize_screen_json",
          [](const std::string& screen_json) {
              return serialize_screen(screen_from_json(Json::parse(screen_json)));
          },
          py::arg("screen_json"),
          "Screen JSON -> the single-line dictionary text sent to models");

    m.def("emit_feasibility", [](int bit) { return emit(StructuredResult::feasibility(bit)); },
          py::arg("bit"));
    m.def("emit_completeness", [](int bit) { return emit(StructuredResult::completeness(bit)); },
          py::arg("bit"));
    m.def("emit_locate",
          [](int x_min, int y_min, int x_max, int y_max) {
              return emit(StructuredResult::locate({x_min, y_min, x_max, y_max}));
          },
          py::arg("x_min"), py::arg("y_min"), py::arg("x_max"), py::arg("y_max"));
    m.def("parse_result_json",
          [](const std::string& text) {
              StructuredResult result = parse(text);
              Json j{{"kind", to_string(result.kind)}};
              if (result.kind == ResultKind::locate)
                  j["bbox"] = {result.bbox.x_min, result.bbox.y_min, result.bbox.x_max,
                               result.bbox.y_max};
              else
                  j["bit"] = result.bit;
              return j.dump();
          },
          py::arg("text"));

    m.def("run_scenario_json", &run_scenario_file, py::arg("path"),
          py::arg("feasibility") = "oracle", py::arg("completeness") = "oracle",
          py::arg("blind_mode") = false, py::arg("max_replans") = 3, py::arg("step_cap") = 25,
          "Run one scenario (scripted planner, oracle guards) -> TaskReport JSON");
    m.def("replay_scenario_json",
          [](const std::string& path, const std::string& config_name) {
              Scenario scenario = load_scenario(path);
              return task_report_to_json(replay_scenario(scenario, config_by_name(config_name)))
                  .dump();
          },
          py::arg("path"), py::arg("config") = "+Fea+Com");
    m.def("replay_table",
          [](const std::string& scenario_dir) {
              return format_replay_table(replay_all(load_scenario_dir(scenario_dir)));
          },
          py::arg("scenario_dir"));

    m.def("generate_feasibility_jsonl",
          [](const std::string& html, const std::string& screen_id, int n_pos, int n_neg,
             std::uint64_t seed) {
              Screen screen = extract_leaf_elements(html, screen_id);
              std::string out;
              for (const CorpusSample& sample : gen_feasibility_samples(screen, n_pos, n_neg, seed)) {
                  out += sample_to_json(sample).dump();
                  out += '\n';
              }
              return out;
          },
          py::arg("html"), py::arg("screen_id"), py::arg("n_pos"), py::arg("n_neg"),
          py::arg("seed"));
    m.def("evaluate_corpus_json",
          [](const std::string& corpus_path, const std::optional<std::string>& scenario_dir,
             std::optional<int> sample_k, std::uint64_t seed, int jobs) {
              OracleFeasibilityGuard fea;
              std::vector<Scenario> scenarios;
              std::unique_ptr<OracleCompletenessGuard> com;
              if (scenario_dir) {
                  scenarios = load_scenario_dir(*scenario_dir);
                  com = std::make_unique<OracleCompletenessGuard>(scenarios);
              }
              EvalBackend backend;
              backend.feasibility = &fea;
              backend.completeness = com.get();
              EvalOptions options;
              options.sample_k = sample_k;
              options.seed = seed;
              options.jobs = jobs;
              return metrics_report_to_json(evaluate_predictor(corpus_path, backend, options))
                  .dump();
          },
          py::arg("corpus_path"), py::arg("scenario_dir") = std::nullopt,
          py::arg("sample") = std::nullopt, py::arg("seed") = 0, py::arg("jobs") = 1,
          "Score the exact oracle backends against a corpus -> metrics JSON");
}
