import pytest

# criterion id -> (passed, detail); filled by the acceptance tests
ACCEPTANCE = {}


@pytest.fixture
def criterion():
    def record(cid, passed, detail=""):
        ACCEPTANCE[cid] = (bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=_order):
        ok, detail = ACCEPTANCE[cid]
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {cid}  {detail}")


def _order(cid):
    tag = cid.split()[0]
    digits = "".join(ch for ch in tag[1:] if ch.isdigit())
    # companion checks ("C2*") sort after their lettered siblings
    return (int(digits) if digits else 999, tag.replace("*", "~"))
