"""ARC task files, evaluation loops, and report formatting."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .grids import Grid, GridError
from .lang import model_to_text
from .learn import SearchConfig, DEFAULT_SEARCH, learn, predict

MAX_DIM = 30
ATTEMPTS = 3


class TaskError(Exception):
    """Malformed task file."""


@dataclass(frozen=True)
class Example:
    input: Grid
    output: Grid | None


@dataclass(frozen=True)
class Task:
    task_id: str
    train: tuple
    test: tuple

    @property
    def train_pairs(self):
        return [(ex.input, ex.output) for ex in self.train]


def _grid_of(obj, where: str) -> Grid:
    if not (isinstance(obj, list) and obj and all(isinstance(r, list) for r in obj)):
        raise TaskError(f"{where}: grid must be a non-empty list of rows")
    if len(obj) > MAX_DIM or any(len(r) > MAX_DIM for r in obj):
        raise TaskError(f"{where}: grid exceeds {MAX_DIM}x{MAX_DIM}")
    try:
        return Grid(obj)
    except GridError as e:
        raise TaskError(f"{where}: {e}") from None


def load_task(path: str | Path) -> Task:
    """Read and validate one ARC task file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise TaskError(f"{path.name}: {e.strerror or e}") from None
    except json.JSONDecodeError as e:
        raise TaskError(f"{path.name}: bad JSON: {e}") from None
    if not isinstance(data, dict) or "train" not in data or "test" not in data:
        raise TaskError(f"{path.name}: expected train and test sections")

    def examples(section: str, need_output: bool) -> tuple:
        items = data[section]
        if not isinstance(items, list) or (section == "train" and not items):
            raise TaskError(f"{path.name}: {section} must be a non-empty list")
        out = []
        for k, item in enumerate(items):
            where = f"{path.name}:{section}[{k}]"
            if "input" not in item:
                raise TaskError(f"{where}: missing input")
            gi = _grid_of(item["input"], where + ".input")
            go = None
            if "output" in item:
                go = _grid_of(item["output"], where + ".output")
            elif need_output:
                raise TaskError(f"{where}: missing output")
            out.append(Example(gi, go))
        return tuple(out)

    return Task(path.stem, examples("train", True), examples("test", False))


@dataclass
class ExampleResult:
    solved: bool
    attempt: int        # 1-based attempt that matched, 0 when none did
    predictions: list
    known: bool = True  # False when the file gave no expected output


@dataclass
class TaskReport:
    task_id: str
    model_text: str
    trace: tuple
    train: list
    test: list
    lhat: float
    seconds: float
    timed_out: bool

    def _score(self, results) -> float | None:
        """Fraction of known expected outputs solved; None when none are known."""
        scored = [r for r in results if r.known]
        if not scored:
            return None
        return sum(1 for r in scored if r.solved) / len(scored)

    @property
    def train_score(self) -> float | None:
        return self._score(self.train)

    @property
    def test_score(self) -> float | None:
        return self._score(self.test)


def _check(model, examples, cfg) -> list:
    results = []
    for ex in examples:
        preds = predict(model, ex.input, cfg, attempts=ATTEMPTS)
        solved, attempt = False, 0
        if ex.output is not None:
            for k, p in enumerate(preds, start=1):
                if p == ex.output:
                    solved, attempt = True, k
                    break
        results.append(ExampleResult(solved, attempt, preds, ex.output is not None))
    return results


def evaluate_task(task: Task, cfg: SearchConfig = DEFAULT_SEARCH) -> TaskReport:
    """Learn a model on the training pairs, then judge both example sets.

    A set counts as solved when every expected output is matched exactly by
    one of the first three predictions."""
    result = learn(task.train_pairs, cfg)
    train = _check(result.model, task.train, cfg)
    test = _check(result.model, task.test, cfg)
    return TaskReport(task.task_id, model_to_text(result.model), result.trace,
                      train, test, result.lhat, result.seconds, result.timed_out)


@dataclass
class BatchReport:
    reports: list

    def _agg(self, picker):
        scores = [picker(r) for r in self.reports]
        scores = [s for s in scores if s is not None]
        n1 = sum(1 for s in scores if s == 1.0)
        n2 = sum(scores)
        return n1, n2

    @property
    def summary(self) -> str:
        n = len(self.reports)
        t = sum(r.seconds for r in self.reports) / n if n else 0.0
        tr1, tr2 = self._agg(lambda r: r.train_score)
        te1, te2 = self._agg(lambda r: r.test_score)
        return (f"tasks {n}  mean-learn {t:.1f}s  "
                f"train {tr1} / {tr2:.1f}  test {te1} / {te2:.1f}")


def _evaluate_path(path: str, cfg: SearchConfig) -> TaskReport:
    return evaluate_task(load_task(path), cfg)


def evaluate_batch(paths, cfg: SearchConfig = DEFAULT_SEARCH, jobs: int = 1) -> BatchReport:
    """Evaluate many task files; order of reports is lexicographic by task id
    whatever the worker scheduling."""
    paths = sorted(Path(p) for p in paths)
    if jobs <= 1:
        reports = [_evaluate_path(str(p), cfg) for p in paths]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_evaluate_path, [str(p) for p in paths],
                                    [cfg] * len(paths), chunksize=1))
    reports.sort(key=lambda r: r.task_id)
    return BatchReport(reports)


def task_paths(root: str | Path) -> list[Path]:
    root = Path(root)
    if root.is_file():
        return [root]
    return sorted(root.glob("*.json"))


def report_jsonl(batch: BatchReport) -> str:
    """One JSON object per task, one line each."""
    lines = []
    for r in batch.reports:
        lines.append(json.dumps({
            "task": r.task_id,
            "train_score": None if r.train_score is None else round(r.train_score, 4),
            "test_score": None if r.test_score is None else round(r.test_score, 4),
            "solved": r.test_score == 1.0,
            "attempts": [e.attempt for e in r.test],
            "steps": len(r.trace) - 1,
            "lhat": round(r.lhat, 4),
            "seconds": round(r.seconds, 3),
            "timed_out": r.timed_out,
            "model": r.model_text,
        }, sort_keys=True))
    return "\n".join(lines) + "\n"
