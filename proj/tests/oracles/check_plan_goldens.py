"""Recomputes every committed plan golden from its text and phoneme items."""
import json
import pathlib
import sys

TENSE = {"i", "u", "ɑ"}
LAX = {"ɪ", "ʊ", "ʌ"}
VOWELS = set("iyɨʉɯuɪʏʊeøɘɵɤoəɛœɜɞʌɔæɐaɶɑɒɚɝᵻ")


def flagged_words(text):
    words, flags = text.split(), []
    for i, w in enumerate(words):
        if w.count("!") == 2:
            flags.append(i)
    return flags


def word_class(items):
    bases = [it["phoneme"].replace("ː", "") for it in items]
    tense = any(b in TENSE for b in bases)
    lax = any(b in LAX for b in bases)
    if tense and not lax:
        return "tense"
    if lax and not tense:
        return "lax"
    if not tense:
        return "neither"
    start = next((k for k, it in enumerate(items) if it["stress"] == "primary"), None)
    if start is not None:
        for b in bases[start:]:
            if b[0] in VOWELS:
                return "mixed-tense-dominant" if b in TENSE else "mixed-lax-dominant"
    return "mixed-lax-dominant"


def expected(doc):
    items = doc["items"]
    base = doc["base_rate"]
    peak = base * doc["target_stretch"]
    n = len(items)
    if doc["strategy"] == "baseline":
        return [base] * n
    if doc["strategy"] == "stretch-everywhere":
        return [peak] * n
    flags = flagged_words(doc["text"])
    spans = []
    for w in flags:
        idx = [k for k, it in enumerate(items) if it["word_index"] == w]
        spans.append((idx[0], idx[-1] + 1))
    stretched = []
    for (s, e) in spans:
        cls = word_class(items[s:e])
        stretched.append(doc["strategy"] == "stretch-every-target" or cls in ("tense", "mixed-tense-dominant"))
    out = [base] * n
    R = doc["ramp_items"]
    for k, (s, e) in enumerate(spans):
        if not stretched[k]:
            continue
        for i in range(s, e):
            out[i] = peak
        left = spans[k - 1][1] if k > 0 else 0
        gap = s - left
        r = min(R, gap // 2 if k > 0 and stretched[k - 1] else gap)
        for i in range(1, r + 1):
            out[s - i] = base + (r + 1 - i) / (r + 1) * (peak - base)
        right = spans[k + 1][0] if k + 1 < len(spans) else n
        gap = right - e
        r = min(R, gap // 2 if k + 1 < len(spans) and stretched[k + 1] else gap)
        for i in range(1, r + 1):
            out[e + i - 1] = base + (r + 1 - i) / (r + 1) * (peak - base)
    return out


def main(folder):
    files = sorted(pathlib.Path(folder).glob("*.json"))
    assert files, "no golden files found"
    bad = 0
    for f in files:
        doc = json.loads(f.read_text(encoding="utf-8"))
        got = [it["multiplier"] for it in doc["items"]]
        want = [round(v, 6) for v in expected(doc)]
        if any(abs(a - b) > 5e-7 for a, b in zip(got, want)) or len(got) != len(want):
            print(f"MISMATCH {f.name}: {got} != {want}")
            bad += 1
        else:
            print(f"ok {f.name}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
