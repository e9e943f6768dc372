import random

import pytest
from hypothesis import given, settings, strategies as st

from promptlens import session as S
from promptlens.clarify import FewShotMode, fallback_clarify
from promptlens.grammar import instantiate_template
from promptlens.grammar.generate import make_record


@pytest.fixture(scope="module")
def elephant_record(lexicon):
    prompt = instantiate_template(
        "conjunction-gerund",
        {"NNP1": "elephant", "NNP2": "bird", "ACT": "flying"},
        lexicon,
        "eleph-1",
    )
    return make_record(prompt, lexicon)


@pytest.fixture(scope="module")
def oracle(lexicon):
    return lambda p, m: fallback_clarify(p, m, lexicon)


class TestOpen:
    def test_pending_with_oracle_question(self, elephant_record, oracle):
        session = S.open_session(elephant_record, 1, FewShotMode.ONE_QUESTION, oracle)
        assert session.pending
        assert session.clarification.items == ("is the elephant flying?",)
        assert session.intention.setup_text == "the elephant is not flying"

    def test_invalid_intention_index(self, elephant_record, oracle):
        with pytest.raises(S.SessionError):
            S.open_session(elephant_record, 7, FewShotMode.ONE_QUESTION, oracle)

    def test_fairness_multi_setup_offers_six(self, lexicon, oracle):
        prompt = instantiate_template("fairness-occupation", {"OCC": "doctor"}, lexicon, "f1")
        record = make_record(prompt, lexicon)
        session = S.open_session(record, 0, FewShotMode.MULTI_SETUP, oracle)
        assert len(session.clarification.items) == 6

    def test_clarifier_failure_surfaces(self, elephant_record):
        def broken(prompt, mode):
            raise ConnectionError("down")

        with pytest.raises(ConnectionError):
            S.open_session(elephant_record, 0, FewShotMode.ONE_QUESTION, broken)


class TestResolve:
    def test_select_concatenates_setup(self, elephant_record, oracle):
        session = S.open_session(elephant_record, 1, FewShotMode.MULTI_SETUP, oracle)
        resolved = S.resolve(session, S.Select(1))
        assert resolved.disambiguated_prompt == (
            "An elephant and a bird flying. The elephant is not flying."
        )
        assert resolved.resolution.kind == "selected"

    def test_no_answer_normalized_to_declarative(self, elephant_record, oracle):
        session = S.open_session(elephant_record, 1, FewShotMode.ONE_QUESTION, oracle)
        resolved = S.resolve(session, S.Answer("No, the elephant is not flying"))
        assert resolved.disambiguated_prompt == (
            "An elephant and a bird flying. The elephant is not flying."
        )

    def test_yes_answer_uses_asked_interpretation(self, elephant_record, oracle):
        session = S.open_session(elephant_record, 0, FewShotMode.ONE_QUESTION, oracle)
        resolved = S.resolve(session, S.Answer("yes"))
        assert resolved.disambiguated_prompt == (
            "An elephant and a bird flying. The elephant is flying."
        )

    def test_free_text_used_verbatim(self, elephant_record, oracle):
        session = S.open_session(elephant_record, 0, FewShotMode.ONE_QUESTION, oracle)
        resolved = S.resolve(session, S.Answer("the bird is soaring"))
        assert resolved.disambiguated_prompt == (
            "An elephant and a bird flying. The bird is soaring."
        )

    def test_skip_finalizes_without_prompt(self, elephant_record, oracle):
        session = S.open_session(elephant_record, 0, FewShotMode.ONE_QUESTION, oracle)
        resolved = S.resolve(session, S.Skip())
        assert resolved.resolution.kind == "skipped"
        assert resolved.disambiguated_prompt is None

    def test_double_resolution_rejected(self, elephant_record, oracle):
        session = S.open_session(elephant_record, 0, FewShotMode.ONE_QUESTION, oracle)
        resolved = S.resolve(session, S.Skip())
        with pytest.raises(S.SessionError):
            S.resolve(resolved, S.Answer("yes"))

    def test_out_of_range_selection_rejected(self, elephant_record, oracle):
        session = S.open_session(elephant_record, 0, FewShotMode.MULTI_SETUP, oracle)
        with pytest.raises(S.SessionError):
            S.resolve(session, S.Select(9))


@settings(max_examples=80, deadline=None)
@given(
    original=st.text(
        alphabet="abcdefghij ", min_size=1, max_size=40
    ).filter(lambda t: t.strip()),
    signal=st.text(alphabet="klmnopqrst ", min_size=1, max_size=40).filter(lambda t: t.strip()),
    punctuated=st.booleans(),
)
def test_concatenation_rule_property(original, signal, punctuated):
    original = original.strip() + ("." if punctuated else "")
    combined = S.concatenate_signal(original, signal)
    assert combined.startswith(original)
    assert combined.endswith(".")
    tail = combined[len(original):]
    assert tail.startswith(" " if punctuated else ". ")
    body = tail[1 if punctuated else 2:]
    assert body[0] == body[0].upper()


class TestParaphrase:
    class _Identity:
        def paraphrase(self, text):
            return text

    class _Down:
        def paraphrase(self, text):
            raise ConnectionError("down")

    def test_identity_stub(self, elephant_record, oracle):
        session = S.resolve(
            S.open_session(elephant_record, 0, FewShotMode.MULTI_SETUP, oracle), S.Select(0)
        )
        updated = S.paraphrase(session, self._Identity())
        assert updated.paraphrased_prompt == updated.disambiguated_prompt

    def test_requires_disambiguated_prompt(self, elephant_record, oracle):
        session = S.open_session(elephant_record, 0, FewShotMode.MULTI_SETUP, oracle)
        with pytest.raises(S.SessionError):
            S.paraphrase(session, self._Identity())

    def test_endpoint_error_leaves_session_unchanged(self, elephant_record, oracle):
        session = S.resolve(
            S.open_session(elephant_record, 0, FewShotMode.MULTI_SETUP, oracle), S.Select(0)
        )
        with pytest.raises(ConnectionError):
            S.paraphrase(session, self._Down())
        assert session.paraphrased_prompt is None


class TestPersistence:
    def test_round_trip_equality(self, tmp_path, elephant_record, oracle):
        session = S.resolve(
            S.open_session(elephant_record, 1, FewShotMode.MULTI_SETUP, oracle), S.Select(1)
        )
        path = tmp_path / "s.jsonl"
        S.persist(session, path)
        assert S.load(path) == session

    def test_empty_log_rejected(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(S.SessionError, match="no session"):
            S.load(path)

    def test_corrupt_line_names_line_number(self, tmp_path, elephant_record, oracle):
        session = S.resolve(
            S.open_session(elephant_record, 1, FewShotMode.MULTI_SETUP, oracle), S.Select(1)
        )
        path = tmp_path / "s.jsonl"
        S.persist(session, path)
        with open(path, "a") as fh:
            fh.write('{"event": "resolve", "t": 99, truncated')
        with pytest.raises(S.SessionError, match=":3"):
            S.load(path)

    def test_randomized_sessions_round_trip(self, tmp_path, lexicon, small_benchmark, oracle):
        rng = random.Random(0)
        path = tmp_path / "session.jsonl"
        for trial in range(200):
            record = rng.choice(small_benchmark.records)
            index = rng.randrange(len(record.interpretations))
            mode = rng.choice(list(FewShotMode))
            session = S.open_session(record, index, mode, oracle, session_id=f"t{trial}")
            roll = rng.random()
            if roll < 0.4:
                session = S.resolve(session, S.Answer(rng.choice(["yes", "no", "maybe blue"])))
            elif roll < 0.8:
                session = S.resolve(
                    session, S.Select(rng.randrange(len(session.clarification.items)))
                )
            else:
                session = S.resolve(session, S.Skip())
            S.persist(session, path)
            assert S.load(path) == session


class TestBatch:
    def test_auto_policy_never_skips_with_oracle(self, small_benchmark, oracle):
        for mode in FewShotMode:
            batch = S.run_batch(small_benchmark.records, mode, oracle)
            assert batch.count("skipped") == 0
            assert batch.success_rate == 1.0

    def test_coverage_accounting(self, small_benchmark, oracle):
        batch = S.run_batch(small_benchmark.records, FewShotMode.ONE_QUESTION, oracle)
        total_interps = sum(len(r.interpretations) for r in small_benchmark.records)
        assert batch.total == total_interps
        assert (
            batch.count("answered") + batch.count("selected") + batch.count("skipped")
            == batch.total
        )
