"""Guarded UI-task automation: python face of the C++ core.

Compound results cross the C++ boundary as JSON text; this wrapper decodes
them so callers see plain dicts and lists.
"""
import json as _json

try:
    from taskguard._core import (  # installed layout: extension inside the package
        CodecFailure,
        CommandParseFailure,
        PlaceholderMemory,
        PrivacyViolation,
        ScenarioFailure,
        ValidationFailure,
        assert_no_leak,
        emit_completeness,
        emit_feasibility,
        emit_locate,
        luhn_valid,
        redact,
        render_command,
        restore,
        sanitize_outbound,
        serialize_screen_json,
        replay_table,
    )
    from taskguard import _core
except ImportError:  # in-tree builds: _core sits on sys.path next to the package
    from _core import (
        CodecFailure,
        CommandParseFailure,
        PlaceholderMemory,
        PrivacyViolation,
        ScenarioFailure,
        ValidationFailure,
        assert_no_leak,
        emit_completeness,
        emit_feasibility,
        emit_locate,
        luhn_valid,
        redact,
        render_command,
        restore,
        sanitize_outbound,
        serialize_screen_json,
        replay_table,
    )
    import _core

__all__ = [
    "CodecFailure",
    "CommandParseFailure",
    "PlaceholderMemory",
    "PrivacyViolation",
    "ScenarioFailure",
    "ValidationFailure",
    "assert_no_leak",
    "emit_completeness",
    "emit_feasibility",
    "emit_locate",
    "evaluate_corpus",
    "extract_page",
    "generate_feasibility_samples",
    "luhn_valid",
    "parse_command",
    "parse_result",
    "redact",
    "render_command",
    "replay_scenario",
    "replay_table",
    "restore",
    "run_scenario",
    "sanitize_outbound",
    "serialize_screen",
]


def parse_command(text):
    """Parse a command template into {'verb', 'caption', 'words'}."""
    return _json.loads(_core.parse_command_json(text))


def parse_result(text):
    """Parse a structured model reply into a dict with 'kind' and payload."""
    return _json.loads(_core.parse_result_json(text))


def extract_page(html, screen_id):
    """Scrape leaf elements from HTML into a screen dict."""
    return _json.loads(_core.extract_page_json(html, screen_id))


def serialize_screen(screen):
    """Screen dict -> the single-line dictionary text shown to models."""
    return _core.serialize_screen_json(_json.dumps(screen))


def run_scenario(path, feasibility="oracle", completeness="oracle", blind_mode=False,
                 max_replans=3, step_cap=25):
    """Run one scenario file with the scripted planner; returns the TaskReport."""
    return _json.loads(_core.run_scenario_json(
        path, feasibility, completeness, blind_mode, max_replans, step_cap))


def replay_scenario(path, config="+Fea+Com"):
    """Replay one scenario under a named reference config; returns the TaskReport."""
    return _json.loads(_core.replay_scenario_json(path, config))


def generate_feasibility_samples(html, screen_id, n_pos, n_neg, seed):
    """Labeled feasibility samples for one page, as a list of dicts."""
    lines = _core.generate_feasibility_jsonl(html, screen_id, n_pos, n_neg, seed)
    return [_json.loads(line) for line in lines.splitlines() if line]


def evaluate_corpus(corpus_path, scenario_dir=None, sample=None, seed=0, jobs=1):
    """Score the exact oracle backends against a corpus file; returns metrics."""
    return _json.loads(_core.evaluate_corpus_json(corpus_path, scenario_dir, sample, seed, jobs))
