import os

import pytest

from cmlpo.syntax import parse_model
from cmlpo.typecheck import check_model

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS = os.path.join(ROOT, "corpus")
CORPUS_FILES = sorted(os.path.join(CORPUS, f) for f in os.listdir(CORPUS) if f.endswith(".cml"))


def corpus_path(name: str) -> str:
    return os.path.join(CORPUS, name)


def read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def checked(text: str, file: str = "<test>"):
    return check_model(parse_model(text, file))


def checked_file(name: str):
    path = corpus_path(name)
    return check_model(parse_model(read(path), path))


@pytest.fixture
def division():
    return checked_file("division.cml")


@pytest.fixture
def division_pre():
    return checked_file("division_pre.cml")


@pytest.fixture(scope="session")
def dwarf():
    return checked_file("dwarf.cml")
