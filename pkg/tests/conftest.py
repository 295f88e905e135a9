import time
from dataclasses import dataclass
from pathlib import Path

import pytest

from dhpp import enumerate_answer_sets, ground_program, parse_program

ROOT = Path(__file__).resolve().parent.parent
PROGRAMS = ROOT / "programs"


@dataclass
class SolveRun:
    ground: object
    result: object
    seconds: float


def solve_file(path: Path) -> SolveRun:
    program = parse_program(path.read_text(encoding="utf-8"), filename=str(path))
    start = time.perf_counter()
    gp = ground_program(program)
    result = enumerate_answer_sets(gp)
    return SolveRun(gp, result, time.perf_counter() - start)


@pytest.fixture(scope="session")
def dice_solved() -> SolveRun:
    return solve_file(PROGRAMS / "dice.dhpp")


@pytest.fixture(scope="session")
def diet_solved() -> SolveRun:
    return solve_file(PROGRAMS / "diet.dhpp")


@pytest.fixture()
def dice_path() -> Path:
    return PROGRAMS / "dice.dhpp"


@pytest.fixture()
def diet_path() -> Path:
    return PROGRAMS / "diet.dhpp"
