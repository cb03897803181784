"""Run Prolog programs in a throwaway workspace under a hard wall-clock timeout.

Isolation is best-effort: each run gets a fresh temp directory as its working
directory and a minimal environment. Nothing stops a program from touching
the rest of the filesystem, so this is not a hermetic sandbox.
"""

from __future__ import annotations

import os
import shutil
import signal
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .core import PrologProgram, RawExecution

DEFAULT_TIMEOUT_MS = 5000
PROGRAM_FILE = "program.pl"
ENV_INTERPRETER = "NEUROPROLOG_SWIPL"

_BUNDLED_SHIM = Path(__file__).resolve().parents[2] / "tools" / "swipl-wasm" / "swipl"


class InterpreterMissing(RuntimeError):
    pass


class SpawnFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class ExecutorConfig:
    interpreter_path: str = "swipl"
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    workdir_root: str = field(default_factory=tempfile.gettempdir)
    # concurrent interpreter processes; the timeout should measure the program,
    # not CPU contention between workers
    max_parallel: int = field(default_factory=lambda: os.cpu_count() or 1)

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be >= 1")


def find_interpreter() -> str | None:
    """Locate a SWI-Prolog executable: $NEUROPROLOG_SWIPL, then PATH, then the wasm shim."""
    env = os.environ.get(ENV_INTERPRETER)
    if env:
        return env
    found = shutil.which("swipl")
    if found:
        return found
    if _BUNDLED_SHIM.exists() and (_BUNDLED_SHIM.parent / "node_modules" / "swipl-wasm").exists():
        return str(_BUNDLED_SHIM)
    return None


def _resolve(path: str) -> str:
    resolved = shutil.which(path) if os.sep not in path else path
    if not resolved or not os.path.isfile(resolved) or not os.access(resolved, os.X_OK):
        raise InterpreterMissing(f"Prolog interpreter not found or not executable: {path}")
    return resolved


def _minimal_env() -> dict[str, str]:
    return {"PATH": os.environ.get("PATH", "/usr/local/bin:/usr/bin:/bin")}


def check_interpreter(cfg: ExecutorConfig) -> str:
    exe = _resolve(cfg.interpreter_path)
    try:
        proc = subprocess.run([exe, "--version"], capture_output=True, text=True,
                              timeout=60, env=_minimal_env(), stdin=subprocess.DEVNULL)
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise InterpreterMissing(f"{cfg.interpreter_path}: cannot query version ({exc})") from exc
    banner = (proc.stdout or proc.stderr).strip()
    if proc.returncode != 0 or not banner:
        raise InterpreterMissing(f"{cfg.interpreter_path}: --version failed")
    return banner.splitlines()[0]


_slot_lock = threading.Lock()
_slots: dict[int, threading.BoundedSemaphore] = {}


def _slot(n: int) -> threading.BoundedSemaphore:
    with _slot_lock:
        if n not in _slots:
            _slots[n] = threading.BoundedSemaphore(n)
        return _slots[n]


def _kill_tree(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()


def execute(program: PrologProgram, cfg: ExecutorConfig,
            extra_files: dict[str, str] | None = None,
            entry: str = PROGRAM_FILE) -> RawExecution:
    """Write ``program`` into a fresh workspace and run the interpreter on it.

    ``extra_files`` are written alongside (e.g. a file a checker program reads);
    ``entry`` names the file given to the interpreter. The workspace path is
    scrubbed from stderr so diagnostics are reproducible across runs.
    """
    exe = _resolve(cfg.interpreter_path)
    os.makedirs(cfg.workdir_root, exist_ok=True)
    workspace = tempfile.mkdtemp(prefix="np-", dir=cfg.workdir_root)
    try:
        Path(workspace, PROGRAM_FILE).write_text(program.source, encoding="utf-8")
        for name, text in (extra_files or {}).items():
            Path(workspace, name).write_text(text, encoding="utf-8")
        cmd = [exe, "-q", "--on-error=status", os.path.join(workspace, entry)]
        timeout = cfg.timeout_ms / 1000.0
        with _slot(cfg.max_parallel):
            start = time.monotonic()
            try:
                proc = subprocess.Popen(cmd, cwd=workspace, env=_minimal_env(),
                                        stdin=subprocess.DEVNULL, stdout=subprocess.PIPE,
                                        stderr=subprocess.PIPE, start_new_session=True)
            except OSError as exc:
                raise SpawnFailure(f"cannot launch {exe}: {exc}") from exc
            try:
                out, err = proc.communicate(timeout=timeout)
                timed_out = False
            except subprocess.TimeoutExpired:
                _kill_tree(proc)
                out, err = proc.communicate()
                timed_out = True
            duration = (time.monotonic() - start) * 1000.0
        stderr = err.decode("utf-8", "replace").replace(workspace + os.sep, "")
        return RawExecution(
            stdout=out.decode("utf-8", "replace"),
            stderr=stderr,
            exit_code=None if timed_out else proc.returncode,
            duration_ms=max(duration, cfg.timeout_ms) if timed_out else duration,
            timed_out=timed_out,
        )
    finally:
        shutil.rmtree(workspace, ignore_errors=True)


PARSE_CHECKER = """\
:- initialization(main, main).
main :-
    catch(check_file('{target}'), E, (print_message(error, E), halt(1))),
    halt(0).
check_file(File) :-
    setup_call_cleanup(open(File, read, S), read_terms(S), close(S)).
read_terms(S) :-
    read_term(S, T, []),
    (   T == end_of_file -> true
    ;   load_ops(T), read_terms(S)
    ).
% module imports may declare operators the rest of the file relies on
load_ops((:- use_module(M))) :- !, catch(use_module(M), _, true).
load_ops((:- use_module(M, L))) :- !, catch(use_module(M, L), _, true).
load_ops((:- op(P, T, N))) :- !, catch(op(P, T, N), _, true).
load_ops(_).
"""


def parse_only(program: PrologProgram, cfg: ExecutorConfig) -> RawExecution:
    """Read every clause of ``program`` without running it; syntax errors land on stderr."""
    checker = PrologProgram(PARSE_CHECKER.format(target=PROGRAM_FILE), "parse checker")
    return execute(program, cfg, extra_files={"check.pl": checker.source}, entry="check.pl")
