"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from __future__ import annotations

import re

import pytest

_RESULTS: dict[str, dict] = {}


def _key(cid: str) -> int:
    return int(re.match(r"\d+", cid).group())


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    cid, text = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if hasattr(rep, "wasxfail"):
            status = "XFAIL" if rep.skipped else "FAIL"
        else:
            status = "PASS" if rep.passed else "FAIL"
        _RESULTS.setdefault(cid, {"text": text, "status": []})["status"].append(status)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    groups: dict[int, list[str]] = {}
    for cid in _RESULTS:
        groups.setdefault(_key(cid), []).append(cid)
    for num in sorted(groups):
        subs = sorted(groups[num])
        statuses = [s for cid in subs for s in _RESULTS[cid]["status"]]
        ok = all(s == "PASS" for s in statuses)
        note = "" if ok else " (known shortfall, documented in notes/decisions.md)" if "XFAIL" in statuses and "FAIL" not in statuses else ""
        text = _RESULTS[subs[0]]["text"] if len(subs) == 1 else _RESULTS[subs[0]]["text"].split(":")[0]
        tr.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {text}{note}")
        if len(subs) > 1:
            for cid in subs:
                st = "PASS" if all(s == "PASS" for s in _RESULTS[cid]["status"]) else "FAIL"
                tr.write_line(f"    {cid:<4} {st}  {_RESULTS[cid]['text']}")
