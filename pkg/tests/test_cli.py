from pathlib import Path

import pytest

from tstd.dsl import parse_trace

from conftest import run_cli


class TestValidate:
    def test_valid_file(self, samples):
        r = run_cli("validate", str(samples / "toggler.tstd"))
        assert r.code == 0
        assert "ok: component 'toggler'" in r.out

    def test_undeclared_state(self, tmp_path):
        p = tmp_path / "bad.tstd"
        p.write_text("component m\nout chan o\nstate S initial\ntrans S -> T\n")
        r = run_cli("validate", str(p))
        assert r.code == 1
        assert "T" in r.out

    def test_missing_file(self):
        r = run_cli("validate", "/no/such/file.tstd")
        assert r.code == 3

    def test_warnings_only_exit_zero(self, samples):
        r = run_cli("validate", str(samples / "counter.tstd"))
        assert r.code == 0
        assert "warning" in r.out

    def test_table_format_flag(self, samples):
        r = run_cli("validate", str(samples / "gate.ttab"), "--format", "table")
        assert r.code == 0

    def test_bad_flag_usage_error(self, samples):
        r = run_cli("validate", str(samples / "toggler.tstd"), "--format", "binary")
        assert r.code == 2


class TestSimulate:
    def test_toggler_golden(self, samples, data, tmp_path):
        out = tmp_path / "out.trc"
        r = run_cli(
            "simulate",
            str(samples / "toggler.tstd"),
            str(samples / "empty4.trc"),
            "--out",
            str(out),
        )
        assert r.code == 0
        assert "simulated 4 ticks" in r.out
        assert out.read_text() == (data / "toggler_out4.trc").read_text()

    def test_zero_tick_trace(self, samples, tmp_path):
        trc = tmp_path / "zero.trc"
        trc.write_text("ticks in\n")
        r = run_cli("simulate", str(samples / "toggler.tstd"), str(trc))
        assert r.code == 0
        assert r.out == "ticks out\n"

    def test_wrong_channels(self, samples, tmp_path):
        trc = tmp_path / "wrong.trc"
        trc.write_text("ticks nope\nnope: -\n")
        r = run_cli("simulate", str(samples / "toggler.tstd"), str(trc))
        assert r.code == 1

    def test_malformed_trace_is_usage_error(self, samples, tmp_path):
        trc = tmp_path / "junk.trc"
        trc.write_text("not a trace\n")
        r = run_cli("simulate", str(samples / "toggler.tstd"), str(trc))
        assert r.code == 2


class TestStream:
    def write(self, tmp_path, text):
        p = tmp_path / "t.trc"
        p.write_text(text)
        return str(p)

    def test_split_all_first(self, tmp_path):
        p = self.write(tmp_path, "ticks c\nc: a b\nc: -\n")
        r = run_cli("stream", "split", p, "-n", "2", "--strategy", "all-first")
        assert r.code == 0
        assert r.out == "ticks c\nc: a b\nc: -\nc: -\nc: -\n"

    def test_join_identity(self, tmp_path):
        p = self.write(tmp_path, "ticks c\nc: a\nc: b\n")
        r = run_cli("stream", "join", p, "-n", "1")
        assert r.code == 0
        assert r.out == "ticks c\nc: a\nc: b\n"

    def test_join_non_aligned_fails(self, tmp_path):
        p = self.write(tmp_path, "ticks c\nc: a\nc: b\nc: -\n")
        r = run_cli("stream", "join", p, "-n", "2")
        assert r.code == 1

    def test_join_pad(self, tmp_path):
        p = self.write(tmp_path, "ticks c\nc: a\nc: b\nc: c\n")
        r = run_cli("stream", "join", p, "-n", "2", "--pad")
        assert r.code == 0
        assert r.out == "ticks c\nc: a b\nc: c\n"

    def test_zero_factor_is_usage_error(self, tmp_path):
        p = self.write(tmp_path, "ticks c\nc: a\n")
        r = run_cli("stream", "split", p, "-n", "0")
        assert r.code == 2

    def test_merge(self, tmp_path):
        a = tmp_path / "a.trc"
        a.write_text("ticks c\nc: a\nc: -\n")
        b = tmp_path / "b.trc"
        b.write_text("ticks c\nc: b\nc: x y\n")
        r = run_cli("stream", "merge", str(a), str(b))
        assert r.code == 0
        assert r.out == "ticks c\nc: a b\nc: x y\n"

    def test_merge_length_mismatch(self, tmp_path):
        a = tmp_path / "a.trc"
        a.write_text("ticks c\nc: a\n")
        b = tmp_path / "b.trc"
        b.write_text("ticks c\nc: b\nc: -\n")
        r = run_cli("stream", "merge", str(a), str(b))
        assert r.code == 1

    def test_abstract(self, tmp_path):
        p = self.write(tmp_path, "ticks c d\nc: a | d: -\nc: b | d: -\n")
        r = run_cli("stream", "abstract", p)
        assert r.code == 0
        assert r.out == "c: a b\nd: -\n"

    def test_delay(self, tmp_path):
        p = self.write(tmp_path, "ticks c\nc: a\n")
        r = run_cli("stream", "delay", p, "-d", "2")
        assert r.code == 0
        assert r.out == "ticks c\nc: -\nc: -\nc: a\n"


class TestCheck:
    def test_constant_spec_consistent(self, tmp_path):
        p = tmp_path / "const.tstd"
        p.write_text(
            "component const\nin chan in\nout chan out\nstate S initial\ntrans S -> S\n  emit out: k\n"
        )
        r = run_cli("check", "causality", str(p))
        assert r.code == 0
        assert "consistent-with-strong" in r.out

    def test_passthrough_refuted_with_replayable_witness(self, samples, tmp_path):
        r = run_cli("check", "causality", str(samples / "passthrough.tstd"))
        assert r.code == 1
        assert "refuted-strong" in r.out
        # Extract the two witness traces and replay them through simulate.
        body = r.out.split("# input a\n")[1]
        trace_a, trace_b = body.split("# input b\n")
        outputs = []
        for text in (trace_a, trace_b):
            f = tmp_path / "w.trc"
            f.write_text(text)
            rr = run_cli("simulate", str(samples / "passthrough.tstd"), str(f))
            assert rr.code == 0
            outputs.append(rr.out)
        assert outputs[0] != outputs[1]

    def test_untimed_sim_agree(self, samples):
        r = run_cli(
            "check",
            "untimed-sim",
            str(samples / "passthrough.tstd"),
            str(samples / "passthrough.tstd"),
        )
        assert r.code == 0
        assert "agree" in r.out

    def test_untimed_sim_disagree(self, samples, tmp_path):
        p = tmp_path / "shout.tstd"
        p.write_text(
            "component shout\nin chan in\nout chan out\nstate S initial\ntrans S -> S\n  emit out: loud\n"
        )
        r = run_cli(
            "check", "untimed-sim", str(samples / "passthrough.tstd"), str(p)
        )
        assert r.code == 1
        assert "disagree" in r.out

    def test_feedback_well_formed(self, samples):
        r = run_cli("check", "feedback", str(samples / "feedback.tnet"))
        assert r.code == 0
        assert "well-formed" in r.out

    def test_feedback_ill_formed(self, samples):
        r = run_cli("check", "feedback", str(samples / "feedback_undelayed.tnet"))
        assert r.code == 1
        assert "cycle" in r.out


class TestCompose:
    def test_identity_net(self, samples, tmp_path):
        trc = tmp_path / "in.trc"
        trc.write_text("ticks in\nin: a b\nin: -\n")
        r = run_cli("compose", str(samples / "identity.tnet"), str(trc))
        assert r.code == 0
        assert r.out == "ticks out\nout: a b\nout: -\n"

    def test_feedback_golden(self, samples, data, tmp_path):
        out = tmp_path / "out.trc"
        r = run_cli(
            "compose",
            str(samples / "feedback.tnet"),
            str(samples / "feedback_in.trc"),
            "--out",
            str(out),
        )
        assert r.code == 0
        assert out.read_text() == (data / "feedback_out3.trc").read_text()

    def test_delay_net(self, samples, tmp_path):
        trc = tmp_path / "in.trc"
        trc.write_text("ticks in\nin: a\nin: b\n")
        r = run_cli("compose", str(samples / "delay1.tnet"), str(trc))
        assert r.code == 0
        assert r.out == "ticks out\nout: -\nout: a\n"

    def test_ill_formed_refused(self, samples):
        r = run_cli(
            "compose",
            str(samples / "feedback_undelayed.tnet"),
            str(samples / "feedback_in.trc"),
        )
        assert r.code == 1

    def test_ticks_conflict_is_usage_error(self, samples):
        r = run_cli(
            "compose",
            str(samples / "feedback.tnet"),
            str(samples / "feedback_in.trc"),
            "--ticks",
            "5",
        )
        assert r.code == 2


class TestGenTrace:
    def test_deterministic(self):
        a = run_cli("gen-trace", "--channels", "x,y", "--ticks", "20", "--seed", "7")
        b = run_cli("gen-trace", "--channels", "x,y", "--ticks", "20", "--seed", "7")
        assert a.code == 0 and a.out == b.out

    def test_zero_ticks_header_only(self):
        r = run_cli("gen-trace", "--channels", "x", "--ticks", "0")
        assert r.code == 0
        assert r.out == "ticks x\n"

    def test_empty_channel_list_rejected(self):
        r = run_cli("gen-trace", "--channels", "", "--ticks", "3")
        assert r.code == 2

    def test_output_is_parseable_with_requested_shape(self):
        r = run_cli(
            "gen-trace",
            "--channels",
            "c",
            "--ticks",
            "50",
            "--max-len",
            "2",
            "--alphabet",
            "p,q",
        )
        trace = parse_trace(r.out)
        assert trace.length == 50
        for iv in trace.channels["c"]:
            assert len(iv) <= 2
            assert all(m.tag in ("p", "q") for m in iv)

    def test_interval_length_mean_is_uniform(self):
        # Lengths drawn uniformly from 0..max-len have mean (max-len)/2.
        r = run_cli("gen-trace", "--channels", "c", "--ticks", "10000", "--max-len", "3")
        trace = parse_trace(r.out)
        mean = sum(len(iv) for iv in trace.channels["c"]) / trace.length
        assert abs(mean - 1.5) < 0.1


class TestExportDot:
    def test_toggler(self, samples):
        r = run_cli("export-dot", str(samples / "toggler.tstd"))
        assert r.code == 0
        assert r.out.startswith('digraph "toggler"')
        assert r.out.count("->") == 2

    def test_identical_across_styles(self, samples):
        a = run_cli("export-dot", str(samples / "watchdog.tstd"))
        b = run_cli("export-dot", str(samples / "watchdog.ttab"))
        assert a.out == b.out

    def test_parse_error_is_usage_error(self, tmp_path):
        p = tmp_path / "junk.tstd"
        p.write_text("xyzzy\n")
        r = run_cli("export-dot", str(p))
        assert r.code == 2
