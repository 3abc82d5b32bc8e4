#!/usr/bin/env python3
"""End-to-end checks of the speechgrade CLI: file contracts, determinism,
exit codes."""

import math
import struct
import subprocess
import sys
import tempfile
import wave
from pathlib import Path

BIN = Path(sys.argv[1]).resolve()
checks = 0


def run(*args, expect=0):
    global checks
    checks += 1
    proc = subprocess.run([str(BIN)] + [str(a) for a in args],
                          capture_output=True, text=True)
    assert proc.returncode == expect, (
        f"{args} -> exit {proc.returncode} (expected {expect})\n"
        f"stdout: {proc.stdout}\nstderr: {proc.stderr}")
    return proc


def check(cond, msg):
    global checks
    checks += 1
    assert cond, msg


def write_wav(path, samples, rate=16000):
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(struct.pack(f"<{len(samples)}h",
                                  *[max(-32768, min(32767, int(s * 32768)))
                                    for s in samples]))


def sine(freq, amp, n, rate=16000):
    return [amp * math.sin(2 * math.pi * freq * t / rate) for t in range(n)]


def main():
    tmp = Path(tempfile.mkdtemp(prefix="speechgrade_cli_"))

    # --- corpus fixtures -------------------------------------------------
    wav_a = tmp / "a.wav"
    wav_b = tmp / "b.wav"
    wav_c = tmp / "c.wav"
    write_wav(wav_a, sine(220, 0.5, 8000))
    write_wav(wav_b, sine(220, 0.45, 8000))
    write_wav(wav_c, sine(900, 0.2, 6400))

    manifest = tmp / "manifest.tsv"
    manifest.write_text(
        "utt_id\tsource\taudio_path\ttranscript\taligned_ref_id\n"
        f"u1\treal\t{wav_a}\tthe dose is small\t\n"
        f"u2\tsynth_aligned\t{wav_b}\tthe dose is small\tu1\n"
        f"u3\tsynth_unaligned\t{wav_c}\tanother sentence entirely\t\n",
        encoding="utf-8")

    # --- features ---------------------------------------------------------
    feat = tmp / "features.tsv"
    run("features", "--manifest", manifest, "--out", feat)
    lines = feat.read_text().splitlines()
    check(lines[0] == "utt_id\tf_sc\tf_sr\tf_mfcc\tf_pv\tf_e", "feature header")
    check(len(lines) == 4, "3 data rows + header")
    first = feat.read_bytes()
    run("features", "--manifest", manifest, "--out", feat)
    check(feat.read_bytes() == first, "features rerun is byte-identical")

    missing = tmp / "missing.tsv"
    missing.write_text(
        "utt_id\tsource\taudio_path\ttranscript\taligned_ref_id\n"
        f"u1\treal\t{tmp / 'nope.wav'}\twords here\t\n", encoding="utf-8")
    proc = run("features", "--manifest", missing, "--out", tmp / "x.tsv", expect=2)
    check("nope.wav" in proc.stderr, "missing wav named in the error")

    bad = tmp / "bad.tsv"
    bad.write_text("not a header\n", encoding="utf-8")
    run("features", "--manifest", bad, "--out", tmp / "x.tsv", expect=1)

    # --- score --------------------------------------------------------------
    report = tmp / "report.tsv"
    run("score", "--manifest", manifest, "--features", feat, "--out", report,
        "--fallback-transcript")
    rows = [l.split("\t") for l in report.read_text().splitlines()]
    check(rows[0] == ["utt_id", "s_perceptual", "s_sim", "s_wer", "c_static",
                      "c_model", "c_final", "lambda"], "report header")
    by_id = {r[0]: r for r in rows[1:]}
    check(float(by_id["u1"][2]) == 1.0 and float(by_id["u1"][3]) == 1.0,
          "real row pinned to 1")
    check(float(by_id["u3"][2]) == 0.0 and float(by_id["u3"][3]) == 0.0,
          "unaligned row pinned to 0")
    # lambda defaults to 1: c_final = 0.4 s_p + 0.3 + 0.3 for real rows
    sp = float(by_id["u1"][1])
    check(abs(float(by_id["u1"][6]) - (0.4 * sp + 0.6)) < 1e-5,
          "real-row confidence formula")
    check(float(by_id["u2"][3]) == 1.0, "identical transcripts give s_wer 1")

    first = report.read_bytes()
    run("score", "--manifest", manifest, "--features", feat, "--out", report,
        "--fallback-transcript")
    check(report.read_bytes() == first, "score rerun is byte-identical")

    run("score", "--manifest", manifest, "--features", feat, "--out", report,
        "--alpha", 0.5, "--beta", 0.3, "--gamma", 0.3,
        "--fallback-transcript", expect=1)  # weights must sum to 1

    # aligned record without hypothesis and without fallback
    run("score", "--manifest", manifest, "--features", feat, "--out", report,
        expect=1)

    # hypotheses + logits path
    hyp = tmp / "hyp.tsv"
    hyp.write_text("u2\tthe dose is large\n", encoding="utf-8")
    run("score", "--manifest", manifest, "--features", feat, "--out", report,
        "--hyp", hyp, "--logits", "0,0,0", "--lambda", 0.5)
    rows = [l.split("\t") for l in report.read_text().splitlines()]
    by_id = {r[0]: r for r in rows[1:]}
    check(abs(float(by_id["u2"][3]) - 0.75) < 1e-5, "one substitution in four words")
    check(float(by_id["u2"][7]) == 0.5, "lambda column")

    # posteriors directory: u1 gets a confident matrix
    post_dir = tmp / "post"
    post_dir.mkdir()
    (post_dir / "u1.tsv").write_text("1.0\t0.0\t0.0\n1.0\t0.0\t0.0\n",
                                     encoding="utf-8")
    run("score", "--manifest", manifest, "--features", feat, "--out", report,
        "--fallback-transcript", "--posteriors", post_dir, "--lambda", 0.5)
    rows = [l.split("\t") for l in report.read_text().splitlines()]
    by_id = {r[0]: r for r in rows[1:]}
    check(float(by_id["u1"][5]) == 1.0, "posterior-derived c_model")
    check(float(by_id["u3"][5]) == 0.5, "neutral c_model without posteriors")

    # --- wer ------------------------------------------------------------------
    ref = tmp / "ref.txt"
    hyp_txt = tmp / "hyp.txt"
    ref.write_text("the dose is small\nthe patient is here\n", encoding="utf-8")
    hyp_txt.write_text("the dose was small\nthe patient is here\n", encoding="utf-8")
    proc = run("wer", "--ref", ref, "--hyp", hyp_txt)
    check(proc.stdout.strip() == "0.1250", "corpus WER 1/8 printed with 4 decimals")
    proc = run("wer", "--ref", ref, "--hyp", hyp_txt, "--per-utt")
    lines = proc.stdout.splitlines()
    check(lines[0] == "1\t1\t0\t0\t4\t0.2500", "per-utt row")
    check(lines[-1] == "0.1250", "corpus row last")
    short = tmp / "short.txt"
    short.write_text("one line only\n", encoding="utf-8")
    run("wer", "--ref", ref, "--hyp", short, expect=1)

    # --- lm ----------------------------------------------------------------------
    text = tmp / "train.txt"
    sentences = []
    words = ["alpha", "beta", "gamma", "delta", "epsilon"]
    for i in range(200):
        sentences.append(" ".join(words[(i + j) % 5] for j in range(4)))
    text.write_text("\n".join(sentences) + "\n", encoding="utf-8")
    held = tmp / "held.txt"
    held.write_text("\n".join(sentences[::7]) + "\n", encoding="utf-8")

    arpa = tmp / "model.arpa"
    run("lm", "train", "--text", text, "--order", 3, "--out", arpa)
    check(arpa.read_text().startswith("\\data\\"), "ARPA header")

    proc = run("lm", "ppl", "--model", arpa, "--text", held)
    ppl_held = float(proc.stdout.strip())
    proc = run("lm", "ppl", "--model", arpa, "--text", text)
    ppl_train = float(proc.stdout.strip())
    check(1.0 <= ppl_train <= ppl_held + 1e-9, "in-sample ppl <= held-out ppl")

    run("lm", "train", "--text", text, "--order", 6, "--out", arpa, expect=1)

    sweep_report = tmp / "sweep.tsv"
    run("lm", "train", "--text", text, "--orders", "3,4,5", "--out-prefix",
        tmp / "sweep_", "--ppl-text", held, "--report", sweep_report)
    for k in (3, 4, 5):
        check((tmp / f"sweep_{k}.arpa").exists(), f"sweep ARPA order {k}")
    rows = sweep_report.read_text().splitlines()
    check(rows[0] == "order\tperplexity" and len(rows) == 4, "sweep report shape")

    proc = run("lm", "dump-check", "--model", arpa)
    check("canonical=yes" in proc.stdout, "own dumps are canonical")
    ragged = tmp / "ragged.arpa"
    ragged.write_text(arpa.read_text().replace("\\end\\\n", ""), encoding="utf-8")
    run("lm", "dump-check", "--model", ragged, expect=1)

    # --- correct --------------------------------------------------------------------
    lexicon = tmp / "lexicon.txt"
    lexicon.write_text("\n".join(words) + "\n", encoding="utf-8")
    hyps_in = tmp / "correct_in.tsv"
    hyps_in.write_text("c1\talpha beta gamma delta\nc2\talpha bexa gamma delta\n",
                       encoding="utf-8")
    corrected = tmp / "corrected.tsv"
    run("correct", "--model", arpa, "--lexicon", lexicon, "--hyp", hyps_in,
        "--out", corrected)
    lines = corrected.read_text().splitlines()
    check(lines[0] == "c1\talpha beta gamma delta", "clean row untouched")
    check(lines[1] == "c2\talpha beta gamma delta", "one-edit token repaired")

    run("correct", "--model", arpa, "--lexicon", lexicon, "--hyp", hyps_in,
        "--out", corrected, "--max-edits", 0)
    check(corrected.read_text().splitlines()[1] == "c2\talpha bexa gamma delta",
          "max-edits 0 is the identity")

    # --- rescore ---------------------------------------------------------------------
    nbest = tmp / "nbest.tsv"
    nbest.write_text(
        "n1\t-3.0\talpha beta gamma delta\n"
        "n1\t-3.0\tdelta delta delta delta\n"
        "n2\t-1.0\tbeta gamma delta epsilon\n", encoding="utf-8")
    selection = tmp / "selection.tsv"
    run("rescore", "--model", arpa, "--nbest", nbest, "--out", selection)
    lines = selection.read_text().splitlines()
    check(lines[0] == "n1\t0\talpha beta gamma delta",
          "LM breaks the acoustic tie toward in-domain text")
    check(lines[1] == "n2\t0\tbeta gamma delta epsilon", "singleton n-best")
    run("rescore", "--model", arpa, "--nbest", nbest, "--out", selection,
        "--lm-weight", 0.0)
    check(selection.read_text().splitlines()[0].startswith("n1\t0"),
          "zero weight keeps the first of equal acoustics")

    # --- train -------------------------------------------------------------------------
    data = tmp / "train_data.tsv"
    rows = []
    for i in range(64):
        label = i % 2
        base = 1.0 if label else -1.0
        feats = [base + 0.01 * ((i * 7 + j) % 5) for j in range(3)]
        rows.append("\t".join(f"{v:.6f}" for v in feats) +
                    f"\t{label}\t0.9\t0.8\t0.7")
    data.write_text("\n".join(rows) + "\n", encoding="utf-8")

    log = tmp / "train_log.tsv"
    proc = run("train", "--data", data, "--log", log, "--epochs", 20, "--seed", 7)
    check(proc.stdout.startswith("final_loss="), "summary line")
    log_rows = [l.split("\t") for l in log.read_text().splitlines()]
    check(len(log_rows) == 20 and len(log_rows[0]) == 7, "log shape")
    check(float(log_rows[0][2]) == 1.0 and float(log_rows[-1][2]) == 0.5,
          "lambda endpoints in the log")
    lambdas = [float(r[2]) for r in log_rows]
    check(all(a >= b for a, b in zip(lambdas, lambdas[1:])), "lambda monotone")

    proc = run("train", "--data", data, "--log", log, "--mode", "learnable",
               "--epochs", 10, "--seed", 3)
    log_rows = [l.split("\t") for l in log.read_text().splitlines()]
    for r in log_rows:
        check(abs(float(r[3]) + float(r[4]) + float(r[5]) - 1.0) < 1e-5,
              "learnable weights sum to 1 per epoch")

    run("train", "--data", data, "--mode", "bogus", expect=1)
    bad_weights = run("train", "--data", data, "--alpha", 0.9, expect=1)
    check("InvalidWeights" in bad_weights.stderr, "weight validation message")

    nan_data = tmp / "nan_data.tsv"
    nan_data.write_text("1e308\t0\t1.0\t1.0\t1.0\n-1e308\t1\t1.0\t1.0\t1.0\n",
                        encoding="utf-8")
    run("train", "--data", nan_data, "--epochs", 3, expect=3)

    # --- experiment --------------------------------------------------------------------
    proc = run("experiment", "noise-robustness", "--seeds", 2)
    lines = proc.stdout.splitlines()
    check(len(lines) == 4, "two seed rows plus mean and std")
    check(lines[2].startswith("mean\t") and lines[3].startswith("std\t"),
          "summary rows")
    proc2 = run("experiment", "noise-robustness", "--seeds", 2)
    check(proc.stdout == proc2.stdout, "experiment output deterministic")

    # --- help and exit codes -------------------------------------------------------------
    for sub in ("features", "score", "wer", "correct", "rescore", "train"):
        proc = run(sub, "--help")
        check("--help" in proc.stdout or "Usage" in proc.stdout, f"{sub} help")
    run("lm", "train", "--help")
    run(expect=1)  # no subcommand
    run("bogus-subcommand", expect=1)

    print(f"cli_test: all {checks} checks passed")


if __name__ == "__main__":
    main()
