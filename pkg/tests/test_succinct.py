import csv
import io
import math

import pytest

from fodeflab import succinct as S
from fodeflab.errors import CapExceeded, PreconditionError


def test_small_towers():
    assert [S.tower(i) for i in range(5)] == [1, 2, 4, 16, 65536]
    t5 = S.tower(5)
    assert isinstance(t5, int) and t5.bit_length() == 65537
    assert isinstance(S.tower(6), S.Symbolic)


def test_tower_respects_a_small_digit_cap():
    assert isinstance(S.tower(5, digit_cap=100), S.Symbolic)
    assert S.tower(4, digit_cap=100) == 65536


def test_log_star_is_the_inverse_of_tower():
    assert S.log_star(1) == 0 and S.log_star(2) == 1
    assert S.log_star(3) == 2 and S.log_star(5) == 3
    assert S.log_star(65536) == 4 and S.log_star(65537) == 5
    assert S.log_star(S.tower(5)) == 5
    with pytest.raises(PreconditionError):
        S.log_star(0)


def test_tower4():
    assert [S.tower4(i) for i in range(4)] == [1, 4, 256, 4 ** 256]


def test_f_bound_recurrence():
    assert S.f_bound(2, 2) == 4
    assert S.f_bound(2, 1) == 16 and S.f_bound(2, 0) == 65536
    assert S.f_bound(3, 3) == 4 ** 3
    assert S.ehrv_bound(2) == S.f_bound(2, 0)


def test_universe_size():
    assert S.universe_size(1, 3) == 1 + 3 + 9
    assert S.universe_size(2, 1) == 1


def test_l_bound_values():
    assert S.l_bound(3, 3) == 54
    assert S.l_bound(3, 2) == 64 * 64
    assert S.l_bound(3, 1) == 75742331166651418935296
    assert isinstance(S.l_bound(3, 0), S.Symbolic)


def test_g_iterate():
    assert S.g_step(1) == 4
    assert S.g_iterate(2, 1) == 4 * 2 ** 5
    assert S.g_iterate(0, 7) == 7


def test_theorem_bounds_hold_where_decidable():
    for k in (1, 2, 3):
        tb = S.theorem_bounds(k)
        for row in tb["rows"]:
            assert row["f_ok"] in (True, None)
            assert row["l_ok"] in (True, None)
        assert tb["l0_ok"] in (True, None)
    assert S.theorem_bounds(2)["rows"][0]["f_ok"] is True


def test_render_number():
    assert S.render_number(123) == "123"
    text = S.render_number(S.tower(5))
    assert text.startswith("<") and "19729-digit" in text
    assert S.render_number(S.tower(6)) == "tower(6)"


def test_bad_arguments():
    with pytest.raises(PreconditionError):
        S.tower(-1)
    with pytest.raises(PreconditionError):
        S.f_bound(2, 3)


def test_q_table_small():
    table = S.q_table(3, 4)
    assert [table.q_hat(n) for n in (1, 2, 3)] == [2, 3, 3]
    assert table.q_hat_star(3) == 3
    assert table.rows[0]["classes"] == 1 and table.rows[2]["classes"] == 4
    for row in table.rows:
        assert row["below_log_star_bound"] and row["within_naive_ceiling"]
        assert row["log_star"] == S.log_star(row["n"])


def test_q_table_csv_matches_json():
    table = S.q_table(3, 4)
    rows = list(csv.DictReader(io.StringIO(table.to_csv())))
    assert [int(r["q_hat"]) for r in rows] == [r["q_hat"] for r in table.to_json()["rows"]]
    assert list(rows[0].keys()) == list(S.TABLE_COLUMNS)


def test_q_table_caps():
    with pytest.raises(CapExceeded):
        S.q_table(6, 8)
    with pytest.raises(PreconditionError):
        S.q_table(5, 4)


def test_digit_count_estimate():
    x = 10 ** 30000
    assert S.render_number(x).startswith(f"<{int(x.bit_length() * math.log10(2)) + 1}")
