import io
import json
import pathlib
import random
import re
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

import facdash

ROOT = pathlib.Path(__file__).resolve().parents[2]


def test_question_mean_matches_exact_rounding():
    rng = random.Random(7)
    for _ in range(500):
        counts = [rng.randint(0, 40) for _ in range(5)]
        n = sum(counts)
        got = facdash.question_mean(counts)
        if n == 0:
            assert got is None
            continue
        exact = Fraction(sum((k + 1) * c for k, c in enumerate(counts)), n)
        expected = Fraction(int(exact * 10000 + Fraction(1, 2)), 10000)
        assert got == pytest.approx(float(expected), abs=1e-12)


def test_percentile_matches_scipy_mean_kind():
    rng = np.random.default_rng(3)
    for _ in range(200):
        pop = list(np.round(rng.uniform(1, 5, rng.integers(1, 40)), 2))
        value = pop[rng.integers(len(pop))]
        below = sum(x < value for x in pop)
        equal = sum(x == value for x in pop)
        exact = Fraction(100 * (2 * below + equal), 2 * len(pop))
        half_up = Fraction(int(exact * 10 + Fraction(1, 2)), 10)
        got = facdash.percentile_rank(value, pop)
        assert got == pytest.approx(float(half_up), abs=1e-9)
        assert got == pytest.approx(stats.percentileofscore(pop, value, kind="mean"), abs=0.05 + 1e-9)


def test_percentile_rejects_non_member():
    with pytest.raises(facdash.FacdashError) as err:
        facdash.percentile_rank(2.5, [1.0, 2.0])
    assert err.value.code == "value-not-member"


def test_kde_matches_scipy_gaussian_kde():
    rng = np.random.default_rng(11)
    for _ in range(50):
        samples = list(rng.uniform(1, 5, rng.integers(4, 60)))
        curve = facdash.kde_curve(samples, samples[0])
        reference = stats.gaussian_kde(samples, bw_method="scott")
        sd = np.std(samples, ddof=1)
        assert curve["bandwidth"] == pytest.approx(sd * len(samples) ** -0.2, rel=1e-12)
        assert len(curve["grid"]) == 201
        np.testing.assert_allclose(curve["density"], reference(curve["grid"]), rtol=1e-9, atol=1e-12)
        assert np.trapezoid(curve["density"], curve["grid"]) == pytest.approx(1.0, abs=0.01)


def test_kde_hand_example():
    assert facdash.kde_bandwidth([3.0, 3.5, 4.0, 4.5, 5.0]) == pytest.approx(0.5730, abs=1e-4)


def test_xlsx_interoperates_with_openpyxl(tmp_path):
    openpyxl = pytest.importorskip("openpyxl")
    table = [["name", "score"], ["Ada", "4.25"], ["Grace", "3"]]
    path = tmp_path / "out.xlsx"
    path.write_bytes(facdash.write_xlsx(table, "Scores"))
    sheet = openpyxl.load_workbook(path).active
    assert [[c.value for c in row] for row in sheet.iter_rows()] == [["name", "score"], ["Ada", 4.25], ["Grace", 3]]

    wb = openpyxl.Workbook()
    ws = wb.active
    for row in table:
        ws.append(row)
    buf = io.BytesIO()
    wb.save(buf)
    assert facdash.read_xlsx(buf.getvalue()) == table


def test_csv_round_trip():
    table = [["a", "b,c"], ['quote "x"', "line\nbreak"]]
    assert facdash.read_csv(facdash.write_csv(table)) == table


def test_parse_cents():
    assert facdash.parse_cents("125000.50") == 12500050
    assert facdash.parse_cents("1.234") is None


def test_routes_match_description_file():
    doc = json.loads((ROOT / "api" / "openapi.json").read_text())
    documented = {(m.upper(), p) for p, ops in doc["paths"].items() for m in ops}
    served = {(r["method"], r["path"]) for r in facdash.routes()}
    assert documented == served


def test_service_end_to_end():
    svc = facdash.Service(base_url="https://dash.example.edu")
    seed = svc.seed(faculty=4, research=False)

    chair = facdash.Client(svc)
    status, body = chair.login(seed["chair"]["email"], seed["chair"]["password"])
    assert status == 200 and "password_hash" not in json.dumps(body)

    parts = [("file", "evals.csv", "text/csv", seed["evaluations_csv"])]
    status, body = chair.call("POST", "/api/evals/upload", parts=parts)
    assert status == 200, body
    assert body["upsert"]["replaced"] == 0
    rows = body["upsert"]["inserted"]
    status, body = chair.call("POST", "/api/evals/upload", parts=parts)
    assert body["upsert"] == {"inserted": 0, "replaced": rows}

    status, body = chair.call("GET", "/api/team")
    assert status == 200 and len(body["items"]) == 5

    saved = chair.csrf
    chair.csrf = None
    status, body = chair.call("POST", "/api/users", {"email": "x@example.edu", "first_name": "X",
                                                     "last_name": "Y", "role": "faculty"})
    assert status == 403 and body["code"] == "csrf-mismatch"
    chair.csrf = saved

    status, body = chair.call("POST", "/api/users", {"email": "new@example.edu", "first_name": "New",
                                                     "last_name": "Hire", "role": "faculty"})
    assert status == 201 and "token" not in json.dumps(body)
    mail = [m for m in svc.outbox() if m[0] == "new@example.edu"]
    assert len(mail) == 1
    token = re.search(r"https://dash\.example\.edu/set-password\?token=(\S+)", mail[0][2]).group(1)

    anon = facdash.Client(svc)
    status, _ = anon.call("POST", f"/api/invites/{token}/redeem", {"password": "brand-new-pass-1"})
    assert status == 200
    status, body = anon.call("POST", f"/api/invites/{token}/redeem", {"password": "brand-new-pass-1"})
    assert status == 422
    status, _ = anon.login("new@example.edu", "brand-new-pass-1")
    assert status == 200

    faculty = facdash.Client(svc)
    faculty.login(seed["faculty"][0]["email"], seed["faculty"][0]["password"])
    status, body = faculty.call("GET", "/api/team")
    assert status == 403 and body["code"] == "wrong-role"
    status, body = faculty.call("GET", "/api/evals", query={"subject": seed["faculty"][1]["id"]})
    assert status == 403 and body["code"] == "out-of-scope"
