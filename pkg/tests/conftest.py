from collections import OrderedDict

_results = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _results.setdefault(number, {"title": title, "outcomes": []})


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    number = mark.args[0]
    # judged on the assertion itself: an expected failure still fails its criterion
    ok = call.excinfo is None
    _results[number]["outcomes"].append((item.name, ok))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, info in _results.items():
        outcomes = info["outcomes"]
        if not outcomes:
            continue
        passed = all(ok for _, ok in outcomes)
        failed = [name for name, ok in outcomes if not ok]
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {info['title']}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        tr.write_line(line)
