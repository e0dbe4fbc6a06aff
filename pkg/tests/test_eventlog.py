import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citybrain.errors import ClockRegression, CorruptRecord
from citybrain.eventlog import EventKind, EventLog, dumps, format_record, loads, log_digest, read_log, write_log
from citybrain.kernel import run
from citybrain.scenario import bundled_scenario


def small_log():
    log = EventLog()
    log.append(0, EventKind.RunStarted, ("demo",), {"seed": 1, "horizon": 10.0})
    log.append(1.25, EventKind.MessageSent, ("a", "b"), {"leg": "afferent", "via": "c"})
    log.append(1.25, EventKind.MessageDropped, ("a", "b"), {"reason": "Random", "note": None})
    return log


def test_line_format_is_fixed():
    log = small_log()
    assert format_record(log[1]) == '[1,1.250000000,"MessageSent",["a","b"],{"leg":"afferent","via":"c"}]'
    assert format_record(log[0]).startswith('[0,0.000000000,"RunStarted",["demo"],{"horizon":10.000000000,"seed":1}')


def test_seq_and_clock():
    log = small_log()
    assert [r.seq for r in log] == [0, 1, 2]
    with pytest.raises(ClockRegression):
        log.append(1.0, EventKind.MessageSent)


def test_times_sit_on_grid():
    log = EventLog()
    rec = log.append(1 / 3, EventKind.MessageSent)
    assert rec.time == 0.333333333
    assert loads(dumps(log)) == log


def test_round_trip_file(tmp_path):
    log = run(bundled_scenario("stochastic-city"), seed=3)
    path = tmp_path / "run.log"
    digest = write_log(log, path)
    assert digest == log_digest(log)
    assert read_log(path) == log
    assert path.read_bytes() == dumps(log).encode()


def test_identical_runs_identical_bytes(tmp_path):
    sc = bundled_scenario("datacenter")
    write_log(run(sc, 5), tmp_path / "a.log")
    write_log(run(sc, 5), tmp_path / "b.log")
    assert (tmp_path / "a.log").read_bytes() == (tmp_path / "b.log").read_bytes()


def test_truncated_last_line(tmp_path):
    text = dumps(small_log())
    path = tmp_path / "cut.log"
    path.write_text(text[:-10])
    with pytest.raises(CorruptRecord) as exc:
        read_log(path)
    assert exc.value.line == 3


@pytest.mark.parametrize(
    "line",
    [
        "not json",
        '[0,0.000000000,"Bogus",[],{}]',
        '[0,0,"RunStarted",[],{}]',
        '[0,0.0,"RunStarted",[],{}]',
        '[0,0.000000000,"RunStarted",[1],{}]',
        '[0,0.000000000,"RunStarted",[],{"x":[1]}]',
        '[0,0.000000000,"RunStarted",[]]',
    ],
)
def test_corrupt_records(line):
    with pytest.raises(CorruptRecord) as exc:
        loads(line + "\n")
    assert exc.value.line == 1


def test_out_of_order_seq_is_corrupt():
    a = '[0,1.000000000,"MessageSent",[],{}]'
    b = '[0,2.000000000,"MessageSent",[],{}]'
    with pytest.raises(CorruptRecord) as exc:
        loads(a + "\n" + b + "\n")
    assert exc.value.line == 2


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        read_log(tmp_path / "absent.log")


scalars = st.one_of(
    st.none(),
    st.integers(-10**12, 10**12),
    st.floats(-1e9, 1e9, allow_nan=False),
    st.text(max_size=8),
)


@settings(max_examples=200)
@given(
    st.lists(
        st.tuples(
            st.floats(0, 1e6, allow_nan=False),
            st.sampled_from(list(EventKind)),
            st.lists(st.text(max_size=6), max_size=3),
            st.dictionaries(st.text(min_size=1, max_size=5), scalars, max_size=4),
        ),
        max_size=20,
    )
)
def test_write_read_identity(rows):
    log = EventLog()
    for t, kind, subj, detail in sorted(rows, key=lambda r: r[0]):
        log.append(t, kind, subj, detail)
    again = loads(dumps(log))
    assert again == log
    assert dumps(again) == dumps(log)
